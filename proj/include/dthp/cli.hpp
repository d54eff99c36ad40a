#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dthp {

// Front door used by the binary and the in-process CLI tests. argv excludes
// the program name. Exit codes: 0 all checks passed, 1 a check failed,
// 2 usage or configuration error.
[[nodiscard]] int run_cli(const std::vector<std::string>& argv);

// Reads an observed 0/1 sequence: either a plain text file with one 0/1 per
// line, or a trajectory CSV (header `i,xi,...`), in which case the xi column
// is extracted.
[[nodiscard]] std::vector<std::uint8_t> read_bit_sequence(const std::string& path);

}  // namespace dthp

"""End-to-end smoke checks for the python module."""

import json
import math

import dthp


K1 = dthp.Kernel.finite(0.3, [0.2])


def test_version_and_import():
    assert isinstance(dthp.__version__, str)
    assert dthp.__version__.count(".") == 2


def test_kernel_roundtrip():
    blob = K1.to_json()
    parsed = json.loads(blob)
    assert parsed["family"] == "finite"
    assert parsed["beta0"] == 0.3
    back = dthp.Kernel.from_json(blob)
    assert back.to_json() == blob
    assert back.baseline == 0.3
    assert back.branching_ratio == 0.2


def test_simulate_decompose_identity():
    path = dthp.simulate(K1, 500, 123)
    again = dthp.decompose(K1, path.xi)
    assert list(again.intensity) == list(path.intensity)
    for i in range(path.n):
        assert path.martingale[i] + path.compensator[i] == float(path.counts[i])
        assert path.zeta[i] in (0.0, 0.2)


def test_exact_distribution_values():
    dist = dthp.enumerate_distribution(K1, 2)
    assert list(dist.pmf) == [0.48999999999999994, 0.36, 0.15]
    dp = dthp.dp_distribution(K1, 2)
    assert max(abs(a - b) for a, b in zip(dist.pmf, dp.pmf)) <= 1e-12


def test_growth_rate_values():
    assert dthp.gamma_exact(K1, 2, -1.0) == -0.2210099138715616
    assert dthp.gamma_exact(K1, 5, 0.0) == 0.0
    check = dthp.check_bounds(K1, 4, -0.5)
    assert check.verdict == "ok"


def test_limit_experiment():
    report = dthp.clt_experiment(K1, 2000, 2000, 7, target="process", workers=2)
    assert report.passed()
    payload = json.loads(report.to_json())
    assert set(payload) == {
        "target", "n", "R", "seed", "empirical_mean", "theoretical_mean",
        "empirical_var", "theoretical_var", "ks_statistic", "checks",
    }


def test_fit_recovery():
    path = dthp.simulate(K1, 8000, 9)
    result = dthp.fit(path.xi, "finite", [0.1, 0.05])
    assert result.converged
    assert math.isfinite(result.loglik)
    assert abs(result.params[0] - 0.3) < 0.1
    assert abs(result.params[1] - 0.2) < 0.1
    assert result.loglik == dthp.loglik(result.kernel(), path.xi)


def test_cli_through_bindings(tmp_path):
    kernel_file = tmp_path / "kernel.json"
    kernel_file.write_text(K1.to_json())
    out = tmp_path / "dist.json"
    code = dthp.run_cli([
        "exact", "--kernel", str(kernel_file), "--n", "2", "--out", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["pmf"] == [0.48999999999999994, 0.36, 0.15]
    assert payload["config"]["command"] == "exact"

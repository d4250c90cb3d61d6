"""Smoke test for the bwlab extension module.

Build and install first:

    pip install --no-build-isolation ./crates/py
"""

import math

import bwlab


def main():
    grid = bwlab.Grid(1, 256, 40.0)
    assert grid.partition_residual() < 1e-12

    k, dk = bwlab.kernel(0.0, 1.0)
    assert k == 0.0 and dk == 1.0
    assert abs(bwlab.mode_ode_residual(3.0, 0.7, 1e-4)) < 1e-6

    g = grid.profile("gaussian", amplitude=1.0, width=2.0)
    assert len(g) == 256
    later = bwlab.apply_d(5.0, g)
    assert later.lebesgue_norm(2.0) < g.lebesgue_norm(2.0) * 5.0
    u = bwlab.linear_solution(g, grid.zeros(), 0.0)
    assert (u - g).max_abs() < 1e-12

    f = grid.profile("random-band", amplitude=1.0, k_lo=0.5, k_hi=10.0, slope=1.0, seed=3)
    h = grid.profile("random-band", amplitude=1.0, k_lo=0.5, k_hi=10.0, slope=1.0, seed=4)
    assert bwlab.decomposition_residual(f, h) < 1e-10
    assert f.besov_seminorm(1.0, 2.0) > 0.0

    v = bwlab.check_gwp(1, 4.0, 5.0, 9)
    assert v["lwp_passes"] and v["gwp_passes"]
    assert not bwlab.check_lwp(1, 4.0, 0.2, 9)["lwp_passes"]
    try:
        bwlab.check_lwp(1, 4.0, 5.0, 2.5)
    except ValueError:
        pass
    else:
        raise AssertionError("non-integer p accepted")
    s = bwlab.suggest_s(1, 4.0, 9)
    assert s is not None and s <= 5.0

    small = grid.profile("gaussian", amplitude=1e-2, width=2.0)
    times, fields, diag = bwlab.picard_solve(
        small, grid.zeros(), 1, 4.0, 5.0, 9,
        {"horizon": 2.0, "time_grid": {"kind": "uniform", "steps": 20}},
    )
    assert diag["converged"] and len(times) == len(fields) == 21

    report = bwlab.run_experiment(
        'experiment = "partition"\n[grid]\nn = 1\npoints = 512\nlength = 50.0\n'
    )
    assert all(v["passed"] for v in report["verdicts"])
    names = [name for name, _ in bwlab.list_experiments()]
    assert "verify-lp-lq" in names and len(names) == 11
    assert math.isfinite(report["scalars"]["max_residual"])
    print("bwlab smoke test passed")


if __name__ == "__main__":
    main()

"""Smoke test for the schatten_lab extension module."""

import math

import schatten_lab as sl


def close(x, y, tol=1e-10):
    return abs(x - y) <= tol * (1.0 + abs(y))


def main():
    f = sl.Gauge("power:0.5")
    assert close(f(4.0), 2.0)
    assert not f.well_behaved
    capped = sl.Gauge("capped:power:0.5:delta=0.001")
    assert capped.well_behaved

    m = [[3.0, 0.0], [4.0, 5.0]]
    sigma = sl.singular_values(m)
    assert close(sigma[0] * sigma[1], 15.0) and close(sum(s * s for s in sigma), 50.0)
    u, s, v = sl.svd(m)
    assert len(u) == 2 and len(v) == 2 and close(s[0], sigma[0])
    lam, _ = sl.sym_eig([[2.0, 1.0], [1.0, 2.0]])
    assert close(lam[0], 3.0) and close(lam[1], 1.0)
    assert len(sl.dilation([[1.0, 2.0, 3.0]])) == 4
    assert close(sl.schatten_quasi_norm([[4.0, 0.0], [0.0, 9.0]], 0.5), 25.0)

    a = [[3.0, 0.0], [0.0, 1.0]]
    b = [[2.0, 0.0], [0.0, 0.0]]
    report = sl.check_main_inequality(a, b, f)
    assert report.holds and report.lhs <= report.rhs
    reports = sl.run_check(a, b, "conjecture_partial", f)
    assert [r.check_name for r in reports] == ["conjecture_partial@k=1", "conjecture_partial@k=2"]

    summary = sl.fuzz_campaign("gaussian", 4, 4, [f, capped], 200, seed=3, checks=["main", "mirsky"])
    assert all(failed == 0 for _, _, failed, _ in summary), summary

    theta = 0.7
    q0 = [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
    run = sl.align([2.0, -1.0], [1.5, 0.3], capped, q0=q0)
    assert run.converged and run.commutes(1e-5)
    assert all(t1[1] < t0[1] for t0, t1 in zip(run.trace, run.trace[1:]))

    op, y, truth = sl.gaussian_instance(4, 4, 1, 14, seed=5)
    x = sl.irls_solve(op, 4, 4, y, 0.5)
    err = math.sqrt(sum((xi - ti) ** 2 for xr, tr in zip(x, truth) for xi, ti in zip(xr, tr)))
    assert err < 1e-3, err

    z = [[1.0, 0.0], [0.0, 0.2]]
    assert sl.nullspace_margin(z, 0.5, 1) < 0
    xbar, xbar_prime = sl.failure_witness(z, 1, 0.5)
    assert close(xbar_prime[1][1] - xbar[1][1], 0.2) and close(xbar_prime[0][0] - xbar[0][0], 1.0)
    assert 0.0 <= sl.rip_estimate(op, 4, 4, 1, 50, 0)

    rows = sl.phase_transition(3, 3, 1, [0.5], [9], 2, 1)
    assert rows == [(0.5, 9, 1.0, rows[0][3], 2)]

    try:
        sl.Gauge("power:2")
    except ValueError:
        pass
    else:
        raise AssertionError("bad gauge accepted")
    print("schatten_lab smoke test passed")


if __name__ == "__main__":
    main()

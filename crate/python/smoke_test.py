"""Smoke test for the walkdet Python module.

Build first:  pip install -e crates/py --no-build-isolation
Run:          python3 python/smoke_test.py
"""

import math

import walkdet


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    # walk on K4: 3-regular, aperiodic
    k4 = walkdet.Graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    chain = k4.uniform_walk()
    assert chain.num_states == 4
    assert chain.uniform_regular_degree() == 3
    close(chain.entropy_rate(), math.log(3), 1e-12)
    lo, hi = chain.rho_extremes()
    close(lo, -math.log(3), 1e-12)
    close(hi, -math.log(3), 1e-12)
    close(sum(chain.stationary()), 1.0, 1e-12)

    thr = walkdet.threshold_beta(chain)
    close(thr, math.sqrt(2 * math.log(3)), 1e-9)
    b = walkdet.all_bounds(chain, 3.0)
    assert 0.0 < b.physics_lb <= b.genie_ub
    close(b.genie_ub, 4.5, 1e-15)
    close(b.phi_tilde, b.genie_ub - b.physics_lb, 1e-15)
    sweep = walkdet.bounds_sweep(chain, [0.5, 1.0, 2.0, 3.0])
    assert [s.physics_lb for s in sweep][:2] == [0.0, 0.0]
    close(sweep[-1].physics_lb, b.physics_lb, 1e-12)

    # cycles are periodic for even length; odd ones are fine
    try:
        walkdet.gen_cycle(6).uniform_walk()
    except ValueError as e:
        assert "period" in str(e)
    else:
        raise AssertionError("periodic walk accepted")
    lazy = walkdet.gen_cycle(6).lazy_walk()
    close(lazy.entropy_rate(), math.log(2), 1e-4)

    s, t_star = walkdet.entropy_density(chain, -math.log(3))
    close(s, math.log(3), 1e-9)

    tri = walkdet.MarkovChain([[0.0, 0.55, 0.45], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    rows, states = walkdet.simulate_h1(tri, 1.0, 6, seed=7)
    assert len(rows) == 3 and all(len(r) == 6 for r in rows)
    assert len(states) == 6 and all(0 <= x < 3 for x in states)
    fast = walkdet.log_likelihood_ratio(tri, 1.0, rows)
    slow = walkdet.brute_force_llr(tri, 1.0, rows)
    close(fast.log_l, slow.log_l, 1e-9 * max(1.0, abs(slow.log_l)))
    assert fast.n == 6
    assert fast.decide(fast.ell) == "H0"
    assert walkdet.log_likelihood_ratio(tri, 0.0, rows).log_l == 0.0

    noise = walkdet.simulate_h0(3, 6, seed=7)
    assert noise == walkdet.simulate_h0(3, 6, seed=7)
    try:
        walkdet.log_likelihood_ratio(tri, 1.0, noise[:2])
    except ValueError:
        pass
    else:
        raise AssertionError("dimension mismatch accepted")

    single = walkdet.MarkovChain([[1.0]])
    est = walkdet.estimate_exponent(single, 1.0, 2000, 50, seed=0)
    assert abs(est.eta_hat - 0.5) <= 4 * est.stderr, est

    roc = walkdet.estimate_roc(tri, 3.0, 50, 50, seed=1)
    assert len(roc) == 99
    assert all(0.0 <= pf <= 1.0 and 0.0 <= pm <= 1.0 for _, pf, pm in roc)

    print("python smoke test: ok")


if __name__ == "__main__":
    main()

import math

import numpy as np
import pytest

from csynth import greedy as g
from csynth.core import RandomSource, uniform_norm
from csynth.potential import potential, v_beta_value_grad
from csynth.sampler import build_ensemble
from oracles import grid_min

H3_BOUND = 1.1013662270016746  # 2 sqrt(2 ln 128 / 32)


def advanced_state(e, steps, seed=3, horizon=64):
    st = g.init_state(e, g.make_schedule("fixed", e, horizon))
    rng = RandomSource(seed)
    for _ in range(steps):
        st = g.step_blind(st, e, rng)
    return st


def general_ensemble(seed=0, M=12, n=6):
    rs = np.random.default_rng(seed)
    A = rs.standard_normal((M, n))
    Y = np.linalg.pinv(A).T
    return build_ensemble(Y, A)


def test_bound_constant():
    assert 2 * math.sqrt(2 * math.log(128) / 32) == pytest.approx(H3_BOUND, rel=1e-15)


def test_first_step_picks_lowest_active(h3_ensemble):
    e = h3_ensemble
    st = g.init_state(e, g.make_schedule("fixed", e, 32))
    assert g.step_policy_a(st, e, "first").picks[0][0] == 0
    assert g.step_policy_a_prime(st, e, RandomSource(0)).k == 1


@pytest.mark.parametrize("policy", ["a", "aprime", "b", "c"])
def test_h3_final_bound(h3, policy):
    A, Y = h3
    r = g.run_derandomized(Y, A, policy, "fixed", 32, rng=RandomSource(1))
    assert r.history[-1]["mu"] <= H3_BOUND
    U = r.factor.matrix()
    assert uniform_norm(U - np.eye(8)) == pytest.approx(r.history[-1]["mu"], abs=1e-12)


@pytest.mark.parametrize("policy", ["a", "b", "c", "aprime", "joint"])
def test_condition_and_reconstruction(policy):
    e = general_ensemble(1)
    sched = "joint" if policy == "joint" else "fixed"
    st = g.init_state(e, g.make_schedule(sched, e, 40))
    rng = RandomSource(2)
    for _ in range(15):
        new = g.step(st, e, policy, 1e-10, rng)
        assert g.condition_holds(st, new, e.L)
        assert new.beta >= st.beta
        assert new.value == pytest.approx(potential(new.S, new.beta), abs=1e-12)
        st = new
    assert np.abs(g.reconstruct_S(st.picks, e) - st.S).max() <= 1e-8
    assert st.deltasum <= st.budget + 1e-9


def test_a_variants_and_best(h3_ensemble):
    e = h3_ensemble
    st = advanced_state(e, 5)
    first = g.step_policy_a(st, e, "first")
    best = g.step_policy_a(st, e, "best")
    assert best.value <= first.value + 1e-12
    with pytest.raises(ValueError):
        g.step_policy_a(st, e, "other")


def test_linesearch_examples(h3_ensemble):
    e = h3_ensemble
    st = g.init_state(e, g.make_schedule("fixed", e, 32))
    i = 2
    cancel = g.replace(st, S=e.W - e.atom(i))
    t, v = g.linesearch_rank1(cancel, e, i, 1e-12)
    assert t == pytest.approx(1.0, abs=1e-9) and v == pytest.approx(0.0, abs=1e-12)
    at_w = g.replace(st, S=e.W.copy())
    t, v = g.linesearch_rank1(at_w, e, i, 1e-12)
    assert t == 0 and v == 0


def test_linesearch_beats_grid():
    e = general_ensemble(2)
    st = g.init_state(e, g.make_schedule("fixed", e, 30))
    rs = np.random.default_rng(4)
    st = g.replace(st, S=rs.standard_normal((e.n, e.n)))
    X = st.S - e.W
    for i in e.active[:5]:
        t, v = g.linesearch_rank1(st, e, i, 1e-10)
        ref = grid_min(lambda s: potential(X + s * e.atom(i), st.beta), 0, 4, 21)
        assert t >= 0
        assert v <= ref + 1e-12


def test_policy_c_row_examples():
    e = general_ensemble(3)
    st = g.init_state(e, g.make_schedule("fixed", e, 30))
    u = g.solve_policy_c_row(g.replace(st, S=e.W.copy()), e.arows[0], W=e.W)
    np.testing.assert_array_equal(u, 0)
    eq = g.CoordinateEquation(np.array([1.0]), np.array([1.0]))
    assert eq.solve(1e-14) == pytest.approx(-1.0, abs=1e-12)
    assert g.CoordinateEquation(np.array([1.0, 2.0]), np.zeros(2)).solve() == 0.0


def test_policy_c_first_order_optimality():
    e = general_ensemble(4)
    rs = np.random.default_rng(5)
    st = g.replace(g.init_state(e, g.make_schedule("fixed", e, 30)), S=rs.standard_normal((e.n, e.n)))
    a = e.arows[1]
    tol = 1e-10
    u = g.solve_policy_c_row(st, a, tol, W=e.W)
    _, G = v_beta_value_grad(st.S - e.W + np.outer(u, a), st.beta)
    assert np.abs(G @ a).max() <= tol


def test_policy_dominance_at_state(h3_ensemble):
    for e, st in ((h3_ensemble, advanced_state(h3_ensemble, 9)), (general_ensemble(6), None)):
        if st is None:
            st = g.init_state(e, g.make_schedule("fixed", e, 30))
            for _ in range(6):
                st = g.step_policy_a(st, e, "first")
        _, vb = g._policy_b_candidates(st, e, 1e-12, False)
        _, vc = g._policy_c_candidates(st, e, 1e-12, False)
        va = g._values_at_unit_step(st, e, st.beta, False)
        assert vc.min() <= vb.min() + 1e-9
        assert vb.min() <= va.min() + 1e-9


@pytest.mark.parametrize("steps", [0, 4, 11])
def test_fast_paths_match_generic(h3, steps):
    A, Y = h3
    e = build_ensemble(Y, A)
    st = advanced_state(e, steps)
    for fn in (g._policy_b_candidates, g._policy_c_candidates):
        fast, slow = fn(st, e, 1e-13, True), fn(st, e, 1e-13, False)
        np.testing.assert_allclose(fast[1], slow[1], atol=1e-11)
    np.testing.assert_allclose(
        g._values_at_unit_step(st, e, st.beta, True), g._values_at_unit_step(st, e, st.beta, False), atol=1e-11
    )


def test_fast_paths_ternary_atoms():
    # atoms with entries in {-L, 0, L}: sparse +-1 rows and matching Y
    A = np.array([[1.0, 0, -1, 1], [0, 1, 1, 0], [1, -1, 0, 0], [1, 1, 1, -1], [0, 0, 1, 1]])
    Y = np.sign(A) * 0.5
    e = build_ensemble(Y, A)
    assert e.uniform_atoms
    st = g.init_state(e, g.make_schedule("fixed", e, 20))
    for _ in range(5):
        st = g.step_policy_a(st, e, "first")
    for fn in (g._policy_b_candidates, g._policy_c_candidates):
        np.testing.assert_allclose(fn(st, e, 1e-13, True)[1], fn(st, e, 1e-13, False)[1], atol=1e-10)


def test_joint_monotone_and_dominates_feasible_point(h3_ensemble):
    e = h3_ensemble
    st = g.init_state(e, g.make_schedule("joint", e))
    for _ in range(4):
        st = g.step_joint_beta(st, e)
    lg = math.log(2 * e.n * e.n)
    for i in (0, 3, 6):
        t, beta, obj, trace = g.joint_minimize(st, e, i, 1e-10)
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
        assert obj <= st.beta * lg + potential(st.S - e.W + e.atom(i), st.beta) + 1e-12
        assert beta >= st.beta


def test_run_termination_target(h3):
    A, Y = h3
    r = g.run_derandomized(Y, A, "a", "fixed", 32, target_s=1)
    assert r.certified
    mus = [h["mu"] for h in r.history]
    assert mus[-1] < 0.5 and all(m >= 0.5 for m in mus[:-1])


def test_run_refined_and_deterministic(h3):
    A, Y = h3
    kw = dict(policy="aprime", schedule="closed", k_max=32, target_s=2, rng=None, refine_every=1)
    a = g.run_derandomized(Y, A, **{**kw, "rng": RandomSource(5)})
    b = g.run_derandomized(Y, A, **{**kw, "rng": RandomSource(5)})
    assert [h["pick"] for h in a.history] == [h["pick"] for h in b.history]
    assert a.certified and a.mu < 0.25
    for h in a.history:
        if h["mu_refined"] is not None:
            assert h["mu_refined"] <= h["mu"] + 1e-8


def test_run_budget_exhausted_returns_best(h3):
    A, Y = h3
    r = g.run_derandomized(Y, A, "blind", "fixed", 3, target_s=8, rng=RandomSource(0))
    assert not r.certified
    assert r.mu == min(h["mu"] for h in r.history)


def test_run_rejects_bad_args(h3):
    A, Y = h3
    with pytest.raises(ValueError):
        g.run_derandomized(Y, A, "zzz")
    with pytest.raises(ValueError):
        g.run_derandomized(Y, A, "a", k_max=0)


def test_ties_break_low_and_rerun_identical(h3):
    A, Y = h3
    for policy in ("b", "c"):
        r1 = g.run_derandomized(Y, A, policy, "fixed", 10)
        r2 = g.run_derandomized(Y, A, policy, "fixed", 10)
        assert [h["pick"] for h in r1.history] == [h["pick"] for h in r2.history]
        assert r1.history[0]["pick"] == 0


def test_joint_vs_fixed_b_reported(h3):
    # empirical comparison only: no dominance claim exists, so a miss is reported, not failed
    A, Y = h3
    joint = g.run_derandomized(Y, A, "joint", "joint", 32)
    fixed_b = g.run_derandomized(Y, A, "b", "fixed", 32)
    held = joint.mu <= fixed_b.mu + 1e-6
    print(f"H_3 joint mu {joint.mu:.6f} vs fixed-schedule b mu {fixed_b.mu:.6f}: dominance {'held' if held else 'missed'}")
    if not held:
        import warnings

        warnings.warn("joint-beta run did not dominate fixed-schedule policy b on H_3")
    assert np.isfinite(joint.mu) and np.isfinite(fixed_b.mu)

import numpy as np
import pytest

from tvvar.lp import (
    StandardFormLP,
    build_clime_subproblem,
    solve_clime_subproblem,
    solve_simplex,
)


def make_lp(c, G, h):
    return StandardFormLP(
        cost=np.asarray(c, float),
        constraint_matrix=np.asarray(G, float),
        rhs=np.asarray(h, float),
    )


def test_textbook_minimum():
    # min x1 + x2 s.t. -x1 - x2 <= -1, x >= 0
    res = solve_simplex(make_lp([1, 1], [[-1, -1]], [-1]))
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0, abs=1e-10)


def test_infeasible():
    res = solve_simplex(make_lp([1], [[1]], [-1]))
    assert res.status == "infeasible"


def test_unbounded():
    res = solve_simplex(make_lp([-1], np.zeros((1, 1)), [5]))
    assert res.status == "unbounded"


def test_two_var_vertex():
    # min -x1 - 2 x2 s.t. x1 + x2 <= 4, x2 <= 3
    res = solve_simplex(make_lp([-1, -2], [[1, 1], [0, 1]], [4, 3]))
    assert res.status == "optimal"
    assert np.allclose(res.x, [1, 3], atol=1e-10)
    assert res.objective == pytest.approx(-7.0)


def test_validation():
    with pytest.raises(ValueError):
        make_lp([1, 2], [[1, 2, 3]], [1])
    with pytest.raises(ValueError):
        make_lp([np.inf], [[1]], [1])


def test_determinism_bit_identical():
    rng = np.random.default_rng(2)
    G = rng.normal(size=(12, 6))
    h = rng.normal(size=12) + 2
    c = np.abs(rng.normal(size=6))
    r1 = solve_simplex(make_lp(c, G, h))
    r2 = solve_simplex(make_lp(c, G, h))
    assert r1.status == r2.status == "optimal"
    assert np.array_equal(r1.x, r2.x)
    assert r1.objective == r2.objective
    assert np.array_equal(r1.basis, r2.basis)


def test_optimality_certificate_and_feasibility():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n, m = 5, 9
        G = rng.normal(size=(m, n))
        h = rng.normal(size=m)
        c = np.abs(rng.normal(size=n)) + 0.1  # bounded below on x >= 0
        res = solve_simplex(make_lp(c, G, h))
        if res.status != "optimal":
            continue
        # no single-variable improving move remains
        assert np.min(res.reduced_costs) >= -1e-9
        assert np.all(G @ res.x - h <= 1e-8)
        assert np.all(res.x >= -1e-10)


def brute_force_l1_min(G, h, tau_box, step):
    """Lattice search for min |u|_1 over G-constrained box problems."""
    grids = [np.arange(-tau_box, tau_box + step / 2, step) for _ in range(G.shape[1])]
    best, best_u = np.inf, None
    mesh = np.meshgrid(*grids, indexing="ij")
    U = np.stack([m.ravel() for m in mesh], axis=1)
    feas = np.all(G @ U.T <= h[:, None] + 1e-12, axis=0)
    if not feas.any():
        return None
    obj = np.abs(U[feas]).sum(axis=1)
    k = int(np.argmin(obj))
    return obj[k], U[feas][k]


def test_l1_minimality_against_integer_lattice():
    # d=3 toy: coarse lattice exhaustion agrees with the simplex optimum
    rng = np.random.default_rng(6)
    for _ in range(10):
        S = np.eye(3) + 0.2 * rng.normal(size=(3, 3))
        u_true = rng.integers(-2, 3, size=3).astype(float)
        b = S @ u_true
        tau = 0.05
        G = np.vstack([np.hstack([S, -S]), np.hstack([-S, S])])
        h = np.concatenate([tau + b, tau - b])
        lp = make_lp(np.ones(6), G, h)
        res = solve_simplex(lp)
        assert res.status == "optimal"
        picked = brute_force_l1_min(np.vstack([S, -S]), np.concatenate([tau + b, -(b - tau)]), 3.0, 1.0)
        # integer lattice contains u_true, so its l1 value bounds the lattice min
        assert picked is not None
        lattice_obj = picked[0]
        assert res.objective <= lattice_obj + 1e-8


def test_clime_subproblem_tau_pins_solution():
    # S = I and tiny tau pin u to b with objective |b|_1
    b = np.array([0.4, -0.2, 0.7])
    u, res = solve_clime_subproblem(np.eye(3), b, b, 1e-9)
    assert res.status == "optimal"
    assert np.allclose(u, b, atol=1e-7)
    assert res.objective == pytest.approx(np.abs(b).sum(), abs=1e-7)


def test_clime_subproblem_large_tau_gives_zero():
    b = np.array([0.4, -0.2, 0.7])
    u, res = solve_clime_subproblem(np.eye(3), b, b, 0.8)
    assert res.status == "optimal"
    assert np.allclose(u, 0.0, atol=1e-12)
    assert res.objective == pytest.approx(0.0, abs=1e-12)


def test_clime_subproblem_matches_fine_lattice_at_d2():
    # S = [[1,.5],[.5,1]], b = (0.6, 0.3), tau = 0.1 against a 0.001 grid
    S = np.array([[1.0, 0.5], [0.5, 1.0]])
    b = np.array([0.6, 0.3])
    tau = 0.1
    u, res = solve_clime_subproblem(S, b, b, tau)
    assert res.status == "optimal"

    step = 0.001
    grid = np.arange(-1.0, 1.0 + step / 2, step)
    U1, U2 = np.meshgrid(grid, grid, indexing="ij")
    U = np.stack([U1.ravel(), U2.ravel()], axis=1)
    r1 = U @ S.T - b  # S u - b (S symmetric)
    feas = np.max(np.abs(r1), axis=1) <= tau + 1e-12
    obj = np.abs(U).sum(axis=1)
    obj[~feas] = np.inf
    k = int(np.argmin(obj))
    assert np.max(np.abs(u - U[k])) <= 0.01


def test_clime_residual_contract():
    rng = np.random.default_rng(8)
    for _ in range(20):
        d = 4
        S = np.eye(d) + 0.3 * rng.normal(size=(d, d))
        S = S @ S.T / d + np.eye(d)
        b = rng.normal(size=d)
        cvec = b + 0.01 * rng.normal(size=d)
        tau = 0.3
        u, res = solve_clime_subproblem(S, b, cvec, tau)
        assert res.status == "optimal"
        assert np.max(np.abs(b - S @ u)) <= tau + 1e-8
        assert np.max(np.abs(cvec - S.T @ u)) <= tau + 1e-8


def test_clime_feasibility_monotone_in_tau():
    rng = np.random.default_rng(10)
    S = np.eye(3) + 0.2 * rng.normal(size=(3, 3))
    b = rng.normal(size=3)
    u1, r1 = solve_clime_subproblem(S, b, b, 0.05)
    u2, r2 = solve_clime_subproblem(S, b, b, 0.5)
    if r1.status == "optimal":
        assert r2.status == "optimal"
        assert np.abs(u2).sum() <= np.abs(u1).sum() + 1e-9


def test_clime_dimension_mismatch():
    with pytest.raises(ValueError):
        build_clime_subproblem(np.eye(3), np.zeros(2), np.zeros(3), 0.1)
    with pytest.raises(ValueError):
        build_clime_subproblem(np.eye(3), np.zeros(3), np.zeros(3), 0.0)


def test_debug_text_roundtrip_fields():
    lp = make_lp([1, 1], [[-1, -1]], [-1])
    txt = lp.to_debug_text()
    assert "minimize" in txt and "<=" in txt and "-1" in txt

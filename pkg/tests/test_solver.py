import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squintless.model import MultiFreqTensor, Scenario, Source, synthesize
from squintless.recovery import vandermonde_decompose
from squintless.solver import (HermitianToeplitz, SolverConfig, SolverError, admm_solve,
                               dual_feasibility_check, psd_project, r_adjoint, r_map,
                               real_inner, toeplitz_project, virtual_sizes)


def brute_psd(m):
    """Best Frobenius fit over every subset of retained eigenvalues (3x3 oracle)."""
    w, v = np.linalg.eigh(m)
    best, best_err = None, np.inf
    for keep in itertools.product([0, 1], repeat=m.shape[0]):
        cand = (v * (w * np.array(keep)).clip(0)) @ v.conj().T
        err = np.linalg.norm(cand - m)
        if err < best_err:
            best, best_err = cand, err
    return best


# -- index maps


def test_r_map_identity_at_p1(rng):
    q = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    np.testing.assert_array_equal(r_map(q, 1, (3, 4)), q)


def test_r_map_stride_example():
    out = r_map(np.array([[1, 2], [3, 4]]), 2, (3, 3))
    np.testing.assert_array_equal(out, [[1, 0, 2], [0, 0, 0], [3, 0, 4]])


def test_r_map_overflow():
    with pytest.raises(SolverError):
        r_map(np.ones((3, 3)), 2, (4, 5))


def test_r_adjoint_all_ones():
    np.testing.assert_array_equal(r_adjoint(np.ones((3, 3)), 2), np.ones((2, 2)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(2, 5), st.integers(2, 5), st.integers(0, 2 ** 31))
def test_r_adjoint_round_trip(p, nr, nt, seed):
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(nr, nt)) + 1j * rng.normal(size=(nr, nt))
    dims = (p * (nr - 1) + 1, p * (nt - 1) + 1)
    np.testing.assert_array_equal(r_adjoint(r_map(q, p, dims), p, (nr, nt)), q)
    assert np.count_nonzero(r_map(q, p, dims)) <= nr * nt


# -- PSD projection


def test_psd_examples():
    np.testing.assert_array_equal(psd_project(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]))
    np.testing.assert_allclose(psd_project(np.array([[0, 1], [1, 0]])), 0.5 * np.ones((2, 2)),
                               atol=1e-15)


def test_psd_matches_brute_force(rng):
    for _ in range(50):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = a + a.conj().T
        np.testing.assert_allclose(psd_project(m), brute_psd(m), atol=1e-12)


def test_psd_idempotent_and_batched(rng):
    a = rng.normal(size=(4, 5, 5)) + 1j * rng.normal(size=(4, 5, 5))
    m = a + np.conj(np.swapaxes(a, 1, 2))
    once = psd_project(m)
    np.testing.assert_allclose(psd_project(once), once, atol=1e-12)
    assert np.linalg.eigvalsh(once).min() >= -1e-10


def test_psd_rejects_nan():
    with pytest.raises(SolverError):
        psd_project(np.array([[np.nan, 0], [0, 1]]))


# -- Toeplitz


def test_toeplitz_materialize():
    t = HermitianToeplitz([2.0 + 0.5j, 1j, 3])
    m = t.matrix()
    assert t.first_row[0] == 2.0
    np.testing.assert_array_equal(m, m.conj().T)
    assert m[0, 1] == 1j and m[1, 0] == -1j and m[2, 0] == 3


def test_toeplitz_projection_is_orthogonal(rng):
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    m = a + a.conj().T
    t = toeplitz_project(m)
    # the residual is orthogonal to every Hermitian Toeplitz direction
    for k in range(5):
        for basis in (1.0, 1j):
            if k == 0 and basis == 1j:
                continue
            v = np.zeros(5, complex)
            v[k] = basis
            d = HermitianToeplitz(v).matrix()
            assert abs(real_inner(d, m - t)) < 1e-12


# -- ADMM


def test_virtual_sizes():
    assert virtual_sizes(9, 9, 2) == (17, 17)


def test_zero_data():
    res = admm_solve(MultiFreqTensor(np.zeros((2, 3, 3))))
    assert res.objective == 0 and res.converged
    assert not np.any(res.t_r.matrix())


def test_single_source_p1():
    y = synthesize(Scenario(5, 5, 1, [Source(0.23, 0.61, [1.0])]))
    res = admm_solve(y)
    assert res.converged
    f = vandermonde_decompose(res.t_r, psd_tol=1e-7)
    assert f.order == 1 and abs(f.omegas[0] - 0.23) < 1e-3


def test_constraint_satisfaction(desk):
    _, y, res = desk
    assert res.converged and res.residuals[0] <= 1e-6


def test_weak_duality_on_objective(desk):
    _, y, res = desk
    dual = sum(real_inner(res.dual_q[p], y.slices[p]) for p in range(y.n_freq))
    assert res.objective >= dual - 1e-4


def test_multipliers_are_psd_and_satisfy_trace_rows(desk):
    _, _, res = desk
    rep = dual_feasibility_check(res.dual_q, res.p_r, res.p_t)
    assert rep["trace_r_error"] < 1e-5 and rep["trace_t_error"] < 1e-5
    assert rep["p_r_min_eig"] >= -1e-8 and rep["p_t_min_eig"] >= -1e-8


def test_deterministic(desk):
    _, y, res = desk
    again = admm_solve(y)
    np.testing.assert_array_equal(again.t_r.first_row, res.t_r.first_row)


def test_non_convergence_flagged():
    y = synthesize(Scenario(4, 4, 2, [Source(0.1, 0.3, [1, 1j])]))
    res = admm_solve(y, max_iter=3)
    assert not res.converged and res.iterations == 3


def test_config_validation():
    with pytest.raises(SolverError):
        SolverConfig(rho=-1)
    with pytest.raises(SolverError, match="unknown"):
        SolverConfig.from_dict({"rho": 1, "bogus": 2})


def test_dual_feasibility_constructed_pair():
    NR = NT = 3
    q = np.zeros((1, 3, 3))
    good_r = np.zeros((3, 3))
    good_r[0, 0] = 1.0  # diagonal sum 1, off-diagonal sums 0
    rep = dual_feasibility_check(q, good_r, good_r.copy())
    assert rep["feasible"]
    rep = dual_feasibility_check(q, np.eye(NR) / NR * 2, np.eye(NT) / NT)
    assert not rep["feasible"] and rep["trace_r_error"] == pytest.approx(1.0)


def test_literal_t_update_diverges():
    y = synthesize(Scenario(3, 3, 2, [Source(0.2, 0.7, [0.5, 0.5j])]))
    with np.errstate(all="ignore"), pytest.raises(SolverError):
        admm_solve(y, literal_t_update=True, max_iter=5000)

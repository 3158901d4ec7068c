"""Sparse solver contracts against dense oracles."""

import numpy as np
import pytest
import scipy.linalg as dla
import scipy.sparse as sp

from darwintd import (
    MaterialRegion,
    SolverError,
    assemble_materials,
    build_grid,
    build_gradient,
)
from darwintd.eqs import assemble_eqs
from darwintd.linalg import (
    SpdSolver,
    eliminate_dirichlet,
    solve_complex_symmetric,
    solve_spd,
    spmv,
)


def random_spd(n, seed, shift=1.0):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n))
    return sp.csr_matrix(m @ m.T + shift * n * np.eye(n))


class TestSpmv:
    def test_identity(self):
        x = np.arange(5.0)
        assert np.array_equal(spmv(sp.eye(5, format="csr"), x), x)

    def test_gradient_of_constant(self):
        g = build_grid(2, 2, 2, 1e-3, 1e-3, 1e-3)
        assert np.all(spmv(build_gradient(g), np.ones(8)) == 0)

    def test_matches_dense(self):
        rng = np.random.default_rng(3)
        dense = rng.standard_normal((20, 20))
        dense[np.abs(dense) < 1.0] = 0.0
        a = sp.csr_matrix(dense)
        x = rng.standard_normal(20)
        assert np.allclose(spmv(a, x), dense @ x, rtol=1e-14)

    def test_dimension_check(self):
        with pytest.raises(ValueError, match="dimension"):
            spmv(sp.eye(4, format="csr"), np.ones(5))


class TestSpdSolver:
    def test_diagonal_closed_form(self):
        a = sp.diags([2.0] * 6).tocsr()
        x, report = solve_spd(a, np.ones(6))
        assert np.allclose(x, 0.5)
        assert report.relative_residual <= 1e-10

    def test_eqs_capacitor_matches_dense_cholesky(self):
        g = build_grid(3, 3, 3, 1e-3, 1e-3, 1e-3)
        mats = assemble_materials(
            g, [MaterialRegion(box=(0, 2e-3, 0, 2e-3, 0, 2e-3))], 1e-2, 2.5e-9
        )
        grad = build_gradient(g)
        top = [g.node(i, j, 2) for i in range(3) for j in range(3)]
        bottom = [g.node(i, j, 0) for i in range(3) for j in range(3)]
        system = assemble_eqs(g, mats, grad, top, bottom, 2.5e-9, method="cg")
        rhs = np.ones(system.reduced.free.size)
        for method in ("cg", "direct"):
            x, _ = solve_spd(system.reduced.k_ff, rhs, tol=1e-12, method=method)
            dense = system.reduced.k_ff.toarray()
            x_ref = dla.cho_solve(dla.cho_factor(dense), rhs)
            assert np.linalg.norm(x - x_ref) <= 1e-10 * np.linalg.norm(x_ref)

    def test_tight_tolerance_contract(self):
        a = random_spd(100, seed=1)
        b = np.random.default_rng(2).standard_normal(100)
        x, report = solve_spd(a, b, tol=1e-12)
        assert report.relative_residual <= 1e-12

    def test_residual_recomputed_from_matrix(self):
        a = random_spd(30, seed=4)
        b = np.ones(30)
        x, report = solve_spd(a, b, tol=1e-10)
        recomputed = np.linalg.norm(b - a @ x) / np.linalg.norm(b)
        assert report.relative_residual == pytest.approx(recomputed, rel=1e-12)

    def test_cg_iteration_cap_raises_with_history(self):
        a = random_spd(50, seed=5, shift=1e-4)
        b = np.ones(50)
        with pytest.raises(SolverError) as err:
            solve_spd(a, b, tol=1e-14, max_iter=2)
        assert len(err.value.residual_history) >= 2

    def test_non_spd_diagonal_rejected(self):
        a = sp.diags([1.0, -1.0, 1.0]).tocsr()
        with pytest.raises(SolverError):
            solve_spd(a, np.ones(3))

    def test_zero_rhs(self):
        a = random_spd(10, seed=6)
        x, report = solve_spd(a, np.zeros(10))
        assert np.all(x == 0)
        assert report.iterations == 0

    def test_direct_reuse_is_deterministic(self):
        a = random_spd(40, seed=7)
        solver = SpdSolver(a, method="direct")
        b = np.random.default_rng(8).standard_normal(40)
        x1, _ = solver.solve(b)
        x2, _ = solver.solve(b)
        assert np.array_equal(x1, x2)


class TestComplexSymmetric:
    def test_real_matrix_complex_rhs_linearity(self):
        a = random_spd(12, seed=9)
        rng = np.random.default_rng(10)
        b = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        x, _ = solve_complex_symmetric(a, b, method="dense")
        xr, _ = solve_spd(a, b.real, method="dense")
        xi, _ = solve_spd(a, b.imag, method="dense")
        assert np.allclose(x.real, xr, atol=1e-12)
        assert np.allclose(x.imag, xi, atol=1e-12)

    def test_two_by_two_closed_form(self):
        a = sp.csr_matrix(np.array([[1 + 1j, 0], [0, 2.0]]))
        x, _ = solve_complex_symmetric(a, np.array([1.0, 2.0]), method="dense")
        assert x[0] == pytest.approx((1 - 1j) / 2)
        assert x[1] == pytest.approx(1.0)

    def test_random_matches_dense_oracle(self):
        rng = np.random.default_rng(11)
        m = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
        a_dense = m + m.T + 50 * np.eye(50)  # complex symmetric, well conditioned
        b = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        for method in ("dense", "sparse-lu"):
            x, report = solve_complex_symmetric(sp.csr_matrix(a_dense), b, method=method)
            x_ref = np.linalg.solve(a_dense, b)
            assert np.linalg.norm(x - x_ref) <= 1e-10 * np.linalg.norm(x_ref)
            assert report.relative_residual <= 1e-10


class TestDirichletElimination:
    def test_round_trip(self):
        reduced = eliminate_dirichlet(random_spd(10, seed=12), [0, 3, 9])
        vals = np.array([5.0, -2.0, 7.0])
        full = reduced.expand(np.arange(7.0), vals)
        assert full[0] == 5.0 and full[3] == -2.0 and full[9] == 7.0
        assert np.array_equal(full[reduced.free], np.arange(7.0))

    def test_fold_in_matches_dense_block_solve(self):
        a = random_spd(12, seed=13)
        fixed = np.array([1, 4, 5])
        vals = np.array([2.0, -1.0, 0.5])
        reduced = eliminate_dirichlet(a, fixed)
        rhs_full = np.random.default_rng(14).standard_normal(12)
        x_free, _ = solve_spd(reduced.k_ff, reduced.reduce_rhs(rhs_full, vals),
                              tol=1e-13, method="dense")
        x = reduced.expand(x_free, vals)
        # the free rows of the original system must be satisfied
        residual = (a @ x - rhs_full)[reduced.free]
        assert np.linalg.norm(residual) <= 1e-9 * np.linalg.norm(rhs_full)

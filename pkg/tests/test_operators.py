import numpy as np
import pytest
import scipy.sparse as sp

from porphase.errors import CompatibilityError
from porphase.fields import ScalarField, VectorField, ViscosityModel
from porphase.grid import (MANDEL_BASIS, StaggeredGrid, mandel_matrix,
                           mandel_vector)
from porphase.linsolve import PinnedNeumannSolver, cg
from porphase.operators import (convect_skew, div, grad, korteweg_force,
                                laplace_neumann_solve, strain, viscous_apply)


def rand_grid(periodic=False, n=24, seed=0):
    rng = np.random.default_rng(seed)
    if periodic:
        mask = np.ones((n, n), dtype=bool)
        mask[n // 2 - 3:n // 2 + 3, n // 2 - 3:n // 2 + 3] = False
    else:
        mask = np.ones((n, n), dtype=bool)
        mask[5:9, 5:9] = False
    return StaggeredGrid(mask, 1.0 / n, periodic=periodic), rng


@pytest.mark.parametrize("periodic", [False, True])
def test_div_grad_adjoint(periodic):
    """<grad s, u> + <s, div u> = 0 exactly (summation by parts)."""
    g, rng = rand_grid(periodic)
    s = rng.standard_normal(g.npore)
    u = rng.standard_normal(g.nu)
    lhs = (g.G @ s) @ u
    rhs = s @ (-(g.G.T @ u))
    assert abs(lhs + rhs) < 1e-12 * max(1.0, abs(lhs))


def test_poisson_matrix_kernel_is_constants():
    g, _ = rand_grid(False)
    ones = np.ones(g.npore)
    assert np.abs(g.L @ ones).max() < 1e-12
    assert np.abs(g.L - g.L.T).max() < 1e-14


def test_mandel_roundtrip():
    M = np.array([[1.3, -0.4], [-0.4, 0.8]])
    assert np.abs(mandel_matrix(mandel_vector(M)) - M).max() < 1e-15
    # basis is orthonormal in the Frobenius inner product
    for a in range(3):
        for b in range(3):
            ip = np.sum(MANDEL_BASIS[a] * MANDEL_BASIS[b])
            assert abs(ip - (a == b)) < 1e-15


def test_gradient_second_order():
    errs = []
    for n in (32, 64):
        g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
        X, Y = g.cell_centers()
        s = np.sin(np.pi * X) * np.cos(np.pi * Y)
        gx, gy = g.grad(s)
        xf = np.arange(n + 1) / n
        yc = (np.arange(n) + 0.5) / n
        Xf, Yc = np.meshgrid(xf, yc, indexing="ij")
        exact = np.pi * np.cos(np.pi * Xf) * np.cos(np.pi * Yc)
        inner = g.fx_active
        errs.append(np.abs(gx - exact)[inner].max())
    assert np.log2(errs[0] / errs[1]) > 1.9


def test_viscous_matrix_symmetric_positive():
    g, rng = rand_grid(False)
    K = g.viscous_matrix(2.0 * np.eye(3))
    assert np.abs((K - K.T)).max() < 1e-12
    u = rng.standard_normal(g.nu)
    assert u @ (K @ u) >= -1e-12


def test_skew_convection_annihilates_energy():
    g, rng = rand_grid(False)
    u = VectorField.from_vec(g, rng.standard_normal(g.nu))
    v = VectorField.from_vec(g, rng.standard_normal(g.nu))
    w = convect_skew(u, v)
    assert abs(w.vec() @ v.vec()) < 1e-12


def test_neumann_solve_and_compatibility():
    n = 48
    g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
    X, Y = g.cell_centers()
    s_ex = np.cos(np.pi * X) * np.cos(2 * np.pi * Y)
    rhs = ScalarField(g, 5 * np.pi ** 2 * s_ex)
    sol = laplace_neumann_solve(rhs, tol=1e-11)
    s0 = s_ex - s_ex.mean()
    assert np.abs(sol.values - s0).max() < 5e-3
    with pytest.raises(CompatibilityError):
        laplace_neumann_solve(ScalarField(g, np.ones((n, n))))


def test_aniso_laplacian_symmetric_with_zero_rowsum():
    g, _ = rand_grid(False)
    C = np.array([[1.0, 0.3], [0.3, 0.7]])
    LC = g.aniso_laplacian(C)
    assert np.abs((LC - LC.T)).max() < 1e-12
    assert np.abs(LC @ np.ones(g.npore)).max() < 1e-11
    # negative semidefinite
    rng = np.random.default_rng(1)
    x = rng.standard_normal(g.npore)
    assert x @ (LC @ x) <= 1e-10


def test_strain_of_linear_field_interior():
    """u = (x, -y) has strain diag(1, -1) away from boundaries."""
    n = 32
    g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
    xf = np.arange(n + 1) / n
    yc = (np.arange(n) + 0.5) / n
    ux = np.broadcast_to(xf[:, None], (n + 1, n)).copy()
    uy = -np.broadcast_to(((np.arange(n + 1) / n))[None, :], (n, n + 1)).copy()
    E = g.strain(ux, uy)
    interior = np.zeros((n, n), bool)
    interior[2:-2, 2:-2] = True
    pid = g.pid[interior]
    assert np.abs(E[0, pid] - 1.0).max() < 1e-12
    assert np.abs(E[1, pid] + 1.0).max() < 1e-12
    assert np.abs(E[2, pid]).max() < 1e-12


def test_viscous_apply_matches_laplacian_order():
    """For isotropic A and divergence-free u, div(A D(u)) = nu Lap(u)."""
    errs = []
    for n in (32, 64):
        g = StaggeredGrid(np.ones((n, n), bool), 1.0 / n)
        xf = np.arange(n + 1) / n
        yc = (np.arange(n) + 0.5) / n
        Xf, Yc = np.meshgrid(xf, yc, indexing="ij")
        Xc, Yf = np.meshgrid(yc, xf, indexing="ij")
        ux = np.pi * np.sin(np.pi * Xf) ** 2 * np.sin(2 * np.pi * Yc)
        uy = -np.pi * np.sin(2 * np.pi * Xc) * np.sin(np.pi * Yf) ** 2
        u = VectorField(g, ux, uy)
        out = viscous_apply(ViscosityModel.isotropic(1.0), u)
        lap_ux = 2 * np.pi ** 3 * (
            np.cos(2 * np.pi * Xf) * np.sin(2 * np.pi * Yc)
            - 2 * np.sin(np.pi * Xf) ** 2 * np.sin(2 * np.pi * Yc))
        inner = np.zeros_like(g.fx_active)
        inner[2:-2, 2:-2] = g.fx_active[2:-2, 2:-2]
        errs.append(np.abs(out.ux - lap_ux)[inner].max())
    assert np.log2(errs[0] / errs[1]) > 1.7


def test_korteweg_is_phi_times_grad_mu():
    g, rng = rand_grid(False)
    phi = g.scatter_cells(rng.standard_normal(g.npore))
    mu = g.scatter_cells(rng.standard_normal(g.npore))
    f = korteweg_force(ScalarField(g, phi, role="phi"),
                       ScalarField(g, mu, role="mu"))
    gmu = g.G @ g.gather_cells(mu)
    px, py = g.phi_face_average(phi)
    pvec = np.concatenate([px[g.fx_active], py[g.fy_active]])
    assert np.abs(f.vec() - pvec * gmu).max() < 1e-14


def test_projection_exact():
    g, rng = rand_grid(False)
    u = rng.standard_normal(g.nu)
    solver = PinnedNeumannSolver(g.L)
    q = solver.solve(g.G.T @ u)
    w = u - g.G @ q
    assert np.abs(g.G.T @ w).max() < 1e-10


def test_cg_solves_spd_system():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((40, 40))
    A = sp.csr_matrix(A @ A.T + 40 * np.eye(40))
    b = rng.standard_normal(40)
    x = cg(A, b, tol=1e-12)
    assert np.linalg.norm(A @ x - b) < 1e-9 * np.linalg.norm(b)

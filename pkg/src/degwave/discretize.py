"""Graded-mesh P1 finite elements for the degenerate operator.

Unknowns live on nodes ``x_0 = 0 < x_1 < ... < x_{N-1}``; the Dirichlet node
``x_N = 1`` is eliminated.  The node at ``x = 0`` is free, so the weighted
Neumann condition is natural and the boundary feedback acts on it through a
rank-one damping term.

The damped first-order system in ``Z = (u, v)`` reads

    u' = v,    M v' = -K u - c d d^T v,

with ``d = e_0`` and damping coefficient ``c`` (1 for the physical feedback).
Its energy ``(v^T M v + u^T K u) / 2`` decays at rate ``c |v_0|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ConvergenceError, DomainError
from .spectrum import DegeneracyParams

__all__ = [
    "Mesh",
    "Tridiagonal",
    "OperatorMatrices",
    "DampedGenerator",
    "build_mesh",
    "assemble",
    "discrete_generator",
    "generalized_eigs",
    "write_coo",
]


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    grading: float

    def __post_init__(self):
        if self.nodes[0] < 0 or self.nodes[-1] != 1.0 or np.any(np.diff(self.nodes) <= 0):
            raise DomainError("mesh nodes must increase strictly from x_0 >= 0 to 1")

    @property
    def cells(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_cells(self) -> int:
        return len(self.nodes) - 1


def build_mesh(alpha: float, n_cells: int, grading: float | None = None) -> Mesh:
    """Mesh with nodes ``(i/N)**g`` on ``[0, 1]``.

    The default grading ``g = 2/(2-alpha)`` makes the mesh uniform in
    ``y = x**kappa``.
    """
    if int(n_cells) != n_cells or n_cells < 2:
        raise DomainError(f"number of cells must be an integer >= 2, got {n_cells!r}")
    if not (1.0 <= alpha < 2.0):
        raise DomainError(f"alpha must lie in [1, 2), got {alpha!r}")
    g = 2.0 / (2.0 - alpha) if grading is None else float(grading)
    if g < 1.0:
        raise DomainError("grading exponent must be >= 1")
    nodes = (np.arange(n_cells + 1) / n_cells) ** g
    nodes[-1] = 1.0
    if np.any(np.diff(nodes) <= 0):
        raise DomainError(f"grading {g:g} with N={n_cells} underflows near x=0; use more cells or a smaller grading")
    return Mesh(nodes=nodes, grading=g)


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal matrix stored as its main and first off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def matvec(self, x):
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        return y

    def to_sparse(self):
        return sp.diags([self.off, self.diag, self.off], [-1, 0, 1], format="csr")

    def to_dense(self):
        return self.to_sparse().toarray()

    def upper_banded(self):
        """Upper banded storage for ``scipy.linalg`` banded routines."""
        ab = np.zeros((2, self.size))
        ab[0, 1:] = self.off
        ab[1] = self.diag
        return ab

    def drop_last(self) -> "Tridiagonal":
        return Tridiagonal(self.diag[:-1].copy(), self.off[:-1].copy())


@dataclass(frozen=True)
class OperatorMatrices:
    """Stiffness and mass on the free nodes plus the full (pre-Dirichlet) pair."""

    mesh: Mesh
    alpha: float
    stiffness: Tridiagonal
    mass: Tridiagonal
    full_stiffness: Tridiagonal
    full_mass: Tridiagonal

    @property
    def trace(self) -> np.ndarray:
        """Vector selecting the value at ``x = 0``."""
        d = np.zeros(self.stiffness.size)
        d[0] = 1.0
        return d

    @property
    def size(self) -> int:
        return self.stiffness.size


def assemble(mesh: Mesh, alpha: float) -> OperatorMatrices:
    """P1 stiffness for ``int x^alpha u' w'`` and consistent mass for ``int u w``.

    ``x^alpha`` is integrated exactly on each cell.
    """
    x = mesh.nodes
    h = mesh.cells
    weight = (x[1:] ** (alpha + 1.0) - x[:-1] ** (alpha + 1.0)) / (alpha + 1.0)
    k_cell = weight / h**2
    kd = np.zeros(len(x))
    kd[:-1] += k_cell
    kd[1:] += k_cell
    md = np.zeros(len(x))
    md[:-1] += h / 3.0
    md[1:] += h / 3.0
    full_k = Tridiagonal(kd, -k_cell)
    full_m = Tridiagonal(md, h / 6.0)
    return OperatorMatrices(
        mesh=mesh,
        alpha=float(alpha),
        stiffness=full_k.drop_last(),
        mass=full_m.drop_last(),
        full_stiffness=full_k,
        full_mass=full_m,
    )


@dataclass
class DampedGenerator:
    """Block operator ``A_h Z = (v, -M^{-1}(K u + c v_0 e_0))`` on ``Z = (u, v)``.

    Holds banded Cholesky factors of ``K`` and ``M`` for repeated solves.
    """

    matrices: OperatorMatrices
    damping: float = 1.0
    _k_chol: np.ndarray = field(init=False, repr=False)
    _m_chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._k_chol = sla.cholesky_banded(self.matrices.stiffness.upper_banded())
        self._m_chol = sla.cholesky_banded(self.matrices.mass.upper_banded())

    @property
    def size(self) -> int:
        return self.matrices.size

    @property
    def K(self) -> Tridiagonal:
        return self.matrices.stiffness

    @property
    def M(self) -> Tridiagonal:
        return self.matrices.mass

    def split(self, z):
        n = self.size
        return z[:n], z[n:]

    def solve_k(self, b):
        return sla.cho_solve_banded((self._k_chol, False), b)

    def solve_m(self, b):
        return sla.cho_solve_banded((self._m_chol, False), b)

    def apply(self, z):
        u, v = self.split(z)
        rhs = -self.K.matvec(u)
        rhs[0] -= self.damping * v[0]
        return np.concatenate([v, self.solve_m(rhs)])

    def gram_apply(self, z):
        """Energy Gram matrix ``diag(K, M)`` applied to ``z``."""
        u, v = self.split(z)
        return np.concatenate([self.K.matvec(u), self.M.matvec(v)])

    def inner(self, z1, z2) -> complex:
        """Energy inner product ``<z1, z2> = z2^H G z1``."""
        return complex(np.vdot(z2, self.gram_apply(z1)))

    def norm(self, z) -> float:
        return float(np.sqrt(max(self.inner(z, z).real, 0.0)))

    def mass_form(self, x):
        """Unconjugated ``x^T M x`` summed cell by cell (no cancellation for real-phased x)."""
        h = self.matrices.mesh.cells
        xf = np.append(x, 0.0)
        a, b = xf[:-1], xf[1:]
        return np.sum(h * (a * a + b * b + (a + b) ** 2)) / 6.0

    def stiffness_form(self, x):
        """Unconjugated ``x^T K x`` as ``sum_cells k_cell (x_i - x_{i+1})^2``."""
        return np.sum(-self.matrices.full_stiffness.off * np.diff(np.append(x, 0.0)) ** 2)

    def energy(self, u, v) -> float:
        """``(v^T M v + u^T K u)/2`` summed cell by cell without cancellation."""
        return 0.5 * float(self.mass_form(v) + self.stiffness_form(u))

    def pencil(self):
        """Dense ``(J, B)`` with ``B Z' = J Z``."""
        n = self.size
        K, M = self.K.to_dense(), self.M.to_dense()
        C = np.zeros((n, n))
        C[0, 0] = self.damping
        J = np.block([[np.zeros((n, n)), np.eye(n)], [-K, -C]])
        B = np.block([[np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), M]])
        return J, B

    def to_dense(self) -> np.ndarray:
        J, B = self.pencil()
        return np.linalg.solve(B, J)

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues of the discrete generator (dense; for modest N)."""
        J, B = self.pencil()
        return sla.eigvals(J, B)

    def energy_symmetric_form(self) -> np.ndarray:
        """Dense ``L^T A_h L^{-T}`` (``G = L L^T``): skew part minus rank-one damping.

        Its eigenvalues equal those of ``A_h``; for a unit eigenvector ``w``
        the real part is exactly ``-c |w_v[0] / l_M[0,0]|^2``.
        """
        n = self.size
        Lk = np.linalg.cholesky(self.K.to_dense())
        Lm = np.linalg.cholesky(self.M.to_dense())
        top = sla.solve_triangular(Lm, Lk, lower=True).T
        damp = np.zeros((n, n))
        damp[0, 0] = self.damping
        bottom = sla.solve_triangular(Lm, sla.solve_triangular(Lm, damp, lower=True).T, lower=True)
        return np.block([[np.zeros((n, n)), top], [-top.T, -bottom]])


def discrete_generator(matrices: OperatorMatrices, damping: float = 1.0) -> DampedGenerator:
    """The damped block generator built from assembled matrices."""
    if damping < 0:
        raise DomainError("damping coefficient must be nonnegative")
    return DampedGenerator(matrices=matrices, damping=float(damping))


def generalized_eigs(
    matrices: OperatorMatrices,
    k: int,
    tol: float = 1e-12,
    max_iter: int = 1000,
    return_vectors: bool = False,
):
    """Smallest ``k`` eigenvalues of ``K x = mu M x`` by block inverse iteration.

    A block of ``min(2k, k+8)`` vectors is iterated with ``K^{-1} M`` (banded
    Cholesky of ``K``) and Rayleigh-Ritz projected each sweep, which deflates
    converged directions against the rest.

    Raises
    ------
    ConvergenceError
        Listing the indices whose Ritz values did not settle.
    """
    n = matrices.size
    if k < 1 or k > n // 4:
        raise DomainError(f"k must satisfy 1 <= k <= N/4 = {n // 4}")
    K, M = matrices.stiffness, matrices.mass
    chol = sla.cholesky_banded(K.upper_banded())
    Kd = K.to_sparse()
    Md = M.to_sparse()
    p = min(2 * k, k + 8, n)
    rng = np.random.default_rng(12345)
    X = rng.standard_normal((n, p))
    prev = np.full(k, np.inf)
    for _ in range(max_iter):
        X = sla.cho_solve_banded((chol, False), Md @ X)
        X, _ = np.linalg.qr(X)
        kk = X.T @ (Kd @ X)
        mm = X.T @ (Md @ X)
        vals, vecs = sla.eigh(0.5 * (kk + kk.T), 0.5 * (mm + mm.T))
        X = X @ vecs
        cur = vals[:k]
        settled = np.abs(cur - prev) <= tol * np.abs(cur)
        if settled.all():
            return (cur, X[:, :k]) if return_vectors else cur
        prev = cur
    bad = [i + 1 for i in np.nonzero(~settled)[0]]
    raise ConvergenceError(f"generalized eigenvalues {bad} did not converge in {max_iter} sweeps")


def write_coo(matrix: Tridiagonal, path) -> None:
    """Write ``row col value`` lines (0-based) for debugging."""
    coo = matrix.to_sparse().tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")

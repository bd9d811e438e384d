"""Finite-difference realizations of -Delta - V with matrix potentials.

Grids are 1-D to 3-D boxes with Dirichlet or periodic boundary; the
Laplacian is the standard 2d+1-point stencil acting as the identity on
the internal C^N fiber.  On top of it sit the counting and comparison
routines: negative-eigenvalue counts via symmetric-indefinite inertia,
the Birman-Schwinger operator K = V^{1/2} L^{-1} V^{1/2} with its
counting bound, heat-kernel and Trotter-product traces, the resolvent
trace, and Riemann-sum right-hand sides of the counting and Riesz-mean
bounds.

Counting statements at fixed grid size are exact finite-dimensional
theorems and are tested as hard gates; comparisons that stand in for
continuum statements (the survey ratios) are monitoring data only.

Heat kernel sign note: the free kernel is (4 pi t)^{-d/2} exp(-|x-y|^2/(4t))
with a decaying Gaussian; a growing exponent would not be normalizable.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .config import MAX_MATRIX_DIM, dense_budget
from .errors import (
    BudgetError,
    NonHermitianError,
    NotPositiveSemidefiniteError,
)
from .matcore import apply_spectral
from .transforms import classical_constant

SUPPORT_TOL = 1e-12
ZERO_BAND_RTOL = 1e-10


# ---------------------------------------------------------------------------
# Grid and potential containers.

_BOUNDARIES = ("dirichlet", "periodic")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular box grid in d = 1, 2, or 3 dimensions.

    Dirichlet grids hold the m interior points of a box of side
    (m+1) h per axis (walls at distance h outside the first and last
    site); periodic grids wrap m points around a circle of length m h.
    """

    d: int
    points_per_axis: tuple[int, ...]
    h: float
    boundary: str = "dirichlet"
    origin: tuple[float, ...] | None = None

    def __post_init__(self):
        d = int(self.d)
        if d not in (1, 2, 3):
            raise ValueError(f"spatial dimension must be 1, 2, or 3, got {d}")
        pts = tuple(int(m) for m in self.points_per_axis)
        if len(pts) != d or any(m < 1 for m in pts):
            raise ValueError(
                f"points_per_axis must list {d} positive integers, got {pts}"
            )
        h = float(self.h)
        if not h > 0.0:
            raise ValueError(f"grid spacing must be positive, got {h}")
        boundary = str(self.boundary).lower()
        if boundary not in _BOUNDARIES:
            raise ValueError(f"boundary must be one of {_BOUNDARIES}, got {boundary!r}")
        origin = self.origin
        if origin is None:
            origin = (0.0,) * d
        origin = tuple(float(c) for c in origin)
        if len(origin) != d:
            raise ValueError(f"origin must have {d} coordinates, got {origin}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "points_per_axis", pts)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "boundary", boundary)
        object.__setattr__(self, "origin", origin)

    @property
    def nsites(self) -> int:
        return int(np.prod(self.points_per_axis))

    @property
    def extent(self) -> tuple[float, ...]:
        if self.boundary == "dirichlet":
            return tuple((m + 1) * self.h for m in self.points_per_axis)
        return tuple(m * self.h for m in self.points_per_axis)

    def site_coords(self) -> np.ndarray:
        """Coordinates of every site, shape (nsites, d), C-ordered."""
        axes = []
        for ax, m in enumerate(self.points_per_axis):
            idx = np.arange(m, dtype=float)
            if self.boundary == "dirichlet":
                idx += 1.0
            axes.append(self.origin[ax] + idx * self.h)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def index_tuples(self) -> list[tuple[int, ...]]:
        """Per-axis index tuple of every site in flat (C) order."""
        grids = np.meshgrid(
            *[np.arange(m) for m in self.points_per_axis], indexing="ij"
        )
        flat = np.stack([g.ravel() for g in grids], axis=-1)
        return [tuple(int(i) for i in row) for row in flat]


def _hermiticity_defect_sites(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - values.conj().transpose(0, 2, 1))))


@dataclass(frozen=True)
class MatrixPotential:
    """Matrix-valued potential: one Hermitian N x N block per grid site."""

    grid: GridSpec
    N: int
    values: np.ndarray

    def __post_init__(self):
        n = int(self.N)
        if n < 1 or n > MAX_MATRIX_DIM:
            raise ValueError(f"fiber dimension must be in [1, {MAX_MATRIX_DIM}], got {n}")
        vals = np.asarray(self.values, dtype=complex)
        want = (self.grid.nsites, n, n)
        if vals.shape != want:
            raise ValueError(f"values must have shape {want}, got {vals.shape}")
        scale = 1.0 + (float(np.max(np.abs(vals))) if vals.size else 0.0)
        defect = _hermiticity_defect_sites(vals)
        if defect > 1e-12 * scale:
            raise NonHermitianError(
                f"potential has a non-Hermitian site: defect {defect:.3e}"
            )
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.grid.nsites * self.N

    def eigenvalues_sites(self) -> np.ndarray:
        """Eigenvalues of every site block, shape (nsites, N), ascending."""
        return np.linalg.eigvalsh(self.values)

    def require_psd(self, rtol: float = 1e-10) -> np.ndarray:
        w = self.eigenvalues_sites()
        scale = 1.0 + (float(np.max(np.abs(w))) if w.size else 0.0)
        if w.size and float(w.min()) < -rtol * scale:
            raise NotPositiveSemidefiniteError(
                f"potential has a site eigenvalue {w.min():.6e}; "
                f"apply positive_part sitewise first"
            )
        return w

    def moment(self, p: float) -> float:
        """h^d * sum_x tr[(V_+(x))^p], the Riemann-sum potential moment."""
        p = float(p)
        w = np.maximum(self.eigenvalues_sites(), 0.0)
        return float(self.grid.h**self.grid.d * np.sum(w**p))

    def positive_part(self) -> "MatrixPotential":
        """Sitewise spectral positive part."""
        clipped = np.array([apply_spectral(lambda x: np.maximum(x, 0.0), m)
                            for m in self.values])
        return MatrixPotential(grid=self.grid, N=self.N, values=clipped)

    def sqrt_sites(self) -> np.ndarray:
        """Sitewise PSD square root, shape (nsites, N, N).

        Eigenvalues in [-1e-12 * scale, 0] are clipped to 0 (rounding dust
        after a positive-part); anything more negative raises.
        """
        w, u = np.linalg.eigh(self.values)
        scale = 1.0 + (float(np.max(np.abs(w))) if w.size else 0.0)
        if w.size and float(w.min()) < -1e-12 * scale:
            self.require_psd(rtol=1e-12)
        root = np.sqrt(np.maximum(w, 0.0))
        return np.einsum("xij,xj,xkj->xik", u, root, u.conj())

    def support(self, tol: float = SUPPORT_TOL) -> np.ndarray:
        """Flat indices of sites with max entry magnitude above tol."""
        if self.values.size == 0:
            return np.empty(0, dtype=int)
        mags = np.max(np.abs(self.values), axis=(1, 2))
        return np.nonzero(mags > tol)[0]

    def block(self) -> sp.csr_matrix:
        """Block-diagonal operator with the site matrices on the diagonal."""
        if self.N == 1:
            return sp.diags(self.values[:, 0, 0], format="csr", dtype=complex)
        return sp.block_diag(list(self.values), format="csr", dtype=complex)


@dataclass(frozen=True)
class DiscreteOperator:
    """Sparse Hermitian operator on the nsites * fiber dimensional space."""

    matrix: sp.spmatrix
    nsites: int
    fiber: int = 1

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise NonHermitianError(f"operator must be square, got {m.shape}")
        if m.shape[0] != self.nsites * self.fiber:
            raise ValueError(
                f"dimension {m.shape[0]} does not match nsites * fiber = "
                f"{self.nsites * self.fiber}"
            )
        defect = m - m.getH()
        worst = float(np.max(np.abs(defect.data))) if defect.nnz else 0.0
        scale = 1.0 + (float(np.max(np.abs(m.data))) if m.nnz else 0.0)
        if worst > 1e-12 * scale:
            raise NonHermitianError(f"operator is not Hermitian: defect {worst:.3e}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def scale(self) -> float:
        """Infinity norm (max absolute row sum), the tolerance yardstick."""
        if self.matrix.nnz == 0 or self.dim == 0:
            return 0.0
        return float(np.max(np.abs(self.matrix).sum(axis=1)))


def _check_dense(dim: int, what: str) -> None:
    cap = dense_budget()
    if dim > cap:
        raise BudgetError(
            f"{what} needs a dense solve of order {dim}, over the budget {cap} "
            f"(raise CLRLAB_DENSE_BUDGET to override)"
        )


# ---------------------------------------------------------------------------
# Laplacians.

def _lap_1d(m: int, h: float, boundary: str) -> sp.csr_matrix:
    # L = (2 I - S - S^T) / h^2 with S the (cyclic) forward shift.
    shift = sp.lil_matrix((m, m))
    for i in range(m - 1):
        shift[i, i + 1] = 1.0
    if boundary == "periodic":
        shift[m - 1, 0] = shift[m - 1, 0] + 1.0
    shift = shift.tocsr()
    return (2.0 * sp.eye(m) - shift - shift.T).tocsr() / h**2


def build_laplacian(grid: GridSpec, fiber: int = 1) -> DiscreteOperator:
    """Stencil Laplacian on the grid, identity on the C^fiber component.

    Dirichlet boundary makes it positive definite with per-axis smallest
    eigenvalue 4/h^2 sin^2(pi / (2(m+1))); periodic boundary has the
    constant vector in its kernel.
    """
    fiber = int(fiber)
    if fiber < 1:
        raise ValueError(f"fiber dimension must be positive, got {fiber}")
    _check_dense(grid.nsites * fiber, "Laplacian assembly")
    total = None
    pts = grid.points_per_axis
    for ax, m in enumerate(pts):
        term = _lap_1d(m, grid.h, grid.boundary)
        before = int(np.prod(pts[:ax])) if ax else 1
        after = int(np.prod(pts[ax + 1 :])) if ax + 1 < len(pts) else 1
        if before > 1:
            term = sp.kron(sp.eye(before), term)
        if after > 1:
            term = sp.kron(term, sp.eye(after))
        total = term if total is None else total + term
    if fiber > 1:
        total = sp.kron(total, sp.eye(fiber))
    return DiscreteOperator(matrix=total.tocsr(), nsites=grid.nsites, fiber=fiber)


def hamiltonian(grid: GridSpec, V: MatrixPotential, sign: float = -1.0) -> DiscreteOperator:
    """L + sign * V as a sparse operator (sign = -1 gives -Delta - V)."""
    if V.grid != grid:
        raise ValueError("potential was generated on a different grid")
    lap = build_laplacian(grid, fiber=V.N)
    return DiscreteOperator(
        matrix=(lap.matrix + float(sign) * V.block()).tocsr(),
        nsites=grid.nsites,
        fiber=V.N,
    )


# ---------------------------------------------------------------------------
# Counting.

def _ldl_negative_count(dense: np.ndarray) -> int:
    """Negative-eigenvalue count via Bunch-Kaufman LDL^H inertia.

    D is block diagonal with 1x1 and 2x2 blocks; congruence preserves
    signs, so counting negative block eigenvalues counts negative
    eigenvalues of the input exactly.
    """
    if dense.shape[0] == 0:
        return 0
    if np.iscomplexobj(dense) and not np.any(dense.imag):
        dense = dense.real  # real symmetric path is ~4x faster in sytrf
    with warnings.catch_warnings():
        # hermitian=True on complex input warns that the (zero) imaginary
        # diagonal is ignored; that is exactly the contract here
        warnings.simplefilter("ignore")
        _, d, _ = scipy.linalg.ldl(dense, hermitian=True)
    n = d.shape[0]
    count = 0
    i = 0
    while i < n:
        if i + 1 < n and (d[i + 1, i] != 0.0 or d[i, i + 1] != 0.0):
            a = d[i, i].real
            b = d[i + 1, i + 1].real
            off = abs(d[i + 1, i]) or abs(d[i, i + 1])
            half_tr = 0.5 * (a + b)
            det = a * b - off**2
            disc = math.sqrt(max(half_tr**2 - det, 0.0))
            for lam in (half_tr - disc, half_tr + disc):
                if lam < 0.0:
                    count += 1
            i += 2
        else:
            if d[i, i].real < 0.0:
                count += 1
            i += 1
    return count


def count_negative(op: DiscreteOperator, method: str = "auto") -> int:
    """Number of eigenvalues below -zero_tol, zero_tol = 1e-10 * |H|_inf.

    method "inertia" uses the symmetric-indefinite factorization (no
    eigenvectors) of the band-shifted matrix H + zero_tol * I; "dense"
    uses a full eigendecomposition and applies the zero band directly;
    "auto" tries inertia and falls back to dense.  The two paths agree
    whenever no eigenvalue sits essentially on the band edge -zero_tol;
    instances that violate that are considered degenerate and should be
    re-drawn by the caller.
    """
    if method not in ("auto", "inertia", "dense"):
        raise ValueError(f"unknown method {method!r}")
    _check_dense(op.dim, "negative-eigenvalue counting")
    if op.dim == 0:
        return 0
    zero_tol = ZERO_BAND_RTOL * op.scale()
    dense = op.toarray()
    if method in ("auto", "inertia"):
        idx = np.arange(dense.shape[0])
        # shift the spectrum up by the band width so the strict lambda < 0
        # inertia count realizes the same lambda < -zero_tol rule as the
        # dense path (exact kernels land at +zero_tol, not at rounding dust)
        dense[idx, idx] += zero_tol
        try:
            return _ldl_negative_count(dense)
        except Exception:
            if method == "inertia":
                raise
        dense[idx, idx] -= zero_tol
    w = np.linalg.eigvalsh(dense)
    return int(np.sum(w < -zero_tol))


def riesz_mean(op: DiscreteOperator, gamma: float) -> float:
    """sum |e|^gamma over eigenvalues e < -zero_tol of the operator."""
    gamma = float(gamma)
    if not gamma > 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    _check_dense(op.dim, "Riesz mean")
    if op.dim == 0:
        return 0.0
    zero_tol = ZERO_BAND_RTOL * op.scale()
    w = np.linalg.eigvalsh(op.toarray())
    neg = w[w < -zero_tol]
    return float(np.sum((-neg) ** gamma))


# ---------------------------------------------------------------------------
# Birman-Schwinger.

def _support_columns(V: MatrixPotential) -> tuple[np.ndarray, np.ndarray]:
    """Columns of V^{1/2} restricted to the support sites.

    Returns (W, support) with W of shape (nsites*N, len(support)*N); the
    complement of the support is annihilated by V^{1/2}, so nothing is
    lost by the restriction.
    """
    support = V.support()
    n = V.N
    w = np.zeros((V.dim, support.size * n), dtype=complex)
    roots = V.sqrt_sites()
    for col, site in enumerate(support):
        w[site * n : (site + 1) * n, col * n : (col + 1) * n] = roots[site]
    return w, support


def birman_schwinger(grid: GridSpec, V: MatrixPotential) -> DiscreteOperator:
    """K = V^{1/2} L^{-1} V^{1/2} restricted to the support of V.

    Requires a Dirichlet grid (the periodic Laplacian is singular) and a
    sitewise-PSD potential.  K is PSD; its eigenvalues above 1 count the
    negative eigenvalues of L - V exactly.
    """
    if grid.boundary != "dirichlet":
        raise ValueError(
            "Birman-Schwinger needs an invertible Laplacian: use a Dirichlet "
            "grid (the periodic Laplacian has the constant kernel vector)"
        )
    if V.grid != grid:
        raise ValueError("potential was generated on a different grid")
    V.require_psd()
    _check_dense(V.dim, "Birman-Schwinger assembly")

    w, support = _support_columns(V)
    if support.size == 0:
        return DiscreteOperator(
            matrix=sp.csr_matrix((0, 0), dtype=complex), nsites=0, fiber=V.N
        )
    lap = build_laplacian(grid, fiber=V.N).matrix.astype(complex).tocsc()
    solve = splu(lap)
    k = w.conj().T @ solve.solve(w)
    k = 0.5 * (k + k.conj().T)
    return DiscreteOperator(matrix=sp.csr_matrix(k), nsites=int(support.size), fiber=V.N)


def bs_bound(F, K: DiscreteOperator) -> float:
    """Counting bound F(1)^{-1} sum_k F(lambda_k(K)).

    For F non-negative, non-decreasing on [0, inf) with F(1) > 0 this
    dominates the number of eigenvalues of K at or above 1, hence the
    number of negative eigenvalues of L - V.
    """
    _check_dense(K.dim, "Birman-Schwinger bound")
    f1 = float(F(1.0))
    if not f1 > 0.0:
        raise ValueError(f"F(1) must be positive, got {f1}")
    if K.dim == 0:
        return 0.0
    lam = np.linalg.eigvalsh(K.toarray())
    scale = 1.0 + float(np.max(np.abs(lam)))
    if lam[0] < -1e-10 * scale:
        raise NotPositiveSemidefiniteError(
            f"K has eigenvalue {lam[0]:.6e}; Birman-Schwinger operators are PSD"
        )
    lam = np.maximum(lam, 0.0)
    vals = np.array([float(F(x)) for x in lam])
    if not np.all(np.isfinite(vals)) or np.any(vals < -1e-12 * (1.0 + np.max(np.abs(vals)))):
        raise ValueError("F must be finite and non-negative on the spectrum of K")
    return float(np.sum(np.maximum(vals, 0.0)) / f1)


# ---------------------------------------------------------------------------
# Heat kernel, Trotter products, resolvents.

def heat_kernel_free(x, y, t: float, d: int) -> float:
    """Free heat kernel (4 pi t)^{-d/2} exp(-|x-y|^2 / (4t)), t > 0."""
    t = float(t)
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    d = int(d)
    if d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    dx = np.atleast_1d(np.asarray(x, dtype=float)) - np.atleast_1d(
        np.asarray(y, dtype=float)
    )
    r2 = float(np.sum(dx * dx))
    return (4.0 * math.pi * t) ** (-d / 2.0) * math.exp(-r2 / (4.0 * t))


@lru_cache(maxsize=16)
def _grid_eig(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Dense eigendecomposition of the spatial (fiber-1) Laplacian, cached."""
    lap = build_laplacian(grid, fiber=1).toarray().real
    w, u = np.linalg.eigh(lap)
    return w, u


@lru_cache(maxsize=64)
def _heat_factor(grid: GridSpec, s: float) -> np.ndarray:
    """exp(-s L) on the spatial grid, cached per (grid, s)."""
    w, u = _grid_eig(grid)
    return (u * np.exp(-s * w)) @ u.T


def _potential_exp_blocks(V: MatrixPotential, s: float) -> np.ndarray:
    """Sitewise exp(-s V(x)) as a stack of blocks."""
    w, u = np.linalg.eigh(V.values)
    return np.einsum("xij,xj,xkj->xik", u, np.exp(-s * w), u.conj())


def trotter_trace(grid: GridSpec, V: MatrixPotential, alpha: float, t: float, n: int) -> float:
    """tr of the Trotter sandwich V^{1/2} (e^{-tL/n} e^{-t alpha V/n})^n V^{1/2}.

    Both factors are exact matrix exponentials (eigendecompositions, the
    spatial one cached per (grid, t/n)).  Converges to the semigroup
    sandwich trace with O(1/n) error; the value is real because the trace
    lets V^{1/2} close the cycle.
    """
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t = float(t)
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if V.grid != grid:
        raise ValueError("potential was generated on a different grid")
    V.require_psd()
    _check_dense(V.dim, "Trotter product")

    s = t / n
    a_sp = _heat_factor(grid, s)
    nf = V.N
    a = np.kron(a_sp, np.eye(nf)) if nf > 1 else a_sp
    b_blocks = _potential_exp_blocks(V, s * alpha)
    if nf == 1:
        step = a * b_blocks[:, 0, 0][np.newaxis, :]
    else:
        b = scipy.linalg.block_diag(*b_blocks)
        step = a @ b
    power = np.linalg.matrix_power(step, n)

    total = 0.0 + 0.0j
    for site in range(grid.nsites):
        sl = slice(site * nf, (site + 1) * nf)
        total += np.trace(V.values[site] @ power[sl, sl])
    return float(total.real)


def semigroup_sandwich_trace(grid: GridSpec, V: MatrixPotential, alpha: float, t: float) -> float:
    """Exact tr[V^{1/2} e^{-t(L + alpha V)} V^{1/2}], the Trotter limit."""
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t = float(t)
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    V.require_psd()
    _check_dense(V.dim, "semigroup trace")
    h_op = hamiltonian(grid, V, sign=alpha)
    w, q = np.linalg.eigh(h_op.toarray())
    diag_v = np.einsum("ij,jk,ki->i", q.conj().T, V.block().toarray(), q).real
    return float(np.sum(diag_v * np.exp(-t * w)))


def resolvent_trace(grid: GridSpec, V: MatrixPotential, alpha: float) -> float:
    """tr[V^{1/2} (L + alpha V)^{-1} V^{1/2}] on a Dirichlet grid.

    Equals sum_k lambda_k / (1 + alpha lambda_k) over the spectrum of the
    Birman-Schwinger operator K, the resolvent identity that converts
    time integrals of Trotter traces into counting information.
    """
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if grid.boundary != "dirichlet":
        raise ValueError("resolvent trace needs a Dirichlet (invertible) Laplacian")
    if V.grid != grid:
        raise ValueError("potential was generated on a different grid")
    V.require_psd()
    _check_dense(V.dim, "resolvent trace")

    w, support = _support_columns(V)
    if support.size == 0:
        return 0.0
    h_dense = hamiltonian(grid, V, sign=alpha).toarray()
    try:
        x = np.linalg.solve(h_dense, w)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(
            f"L + alpha V unexpectedly singular (alpha={alpha})"
        ) from exc
    return float(np.trace(w.conj().T @ x).real)


# ---------------------------------------------------------------------------
# Right-hand sides and heat-diagonal assembly.

def clr_rhs(V: MatrixPotential, R: float) -> float:
    """Counting-bound right side R * L^cl_{0,d} * h^d sum_x tr[(V_+(x))^{d/2}]."""
    R = float(R)
    if not (math.isfinite(R) and R >= 0.0):
        raise ValueError(f"excess factor must be finite and >= 0, got {R}")
    d = V.grid.d
    return R * classical_constant(0.0, d) * V.moment(d / 2.0)


def heat_diagonal_step(grid: GridSpec, V: MatrixPotential, f, t: float) -> float:
    """(4 pi t)^{-d/2} h^d sum_x tr f(t V(x)), the heat-diagonal majorant.

    Integrating this in dt/t reproduces, per positive eigenvalue v of the
    potential, the scaling identity v^{d/2} * corollary_constant(f, d).
    """
    t = float(t)
    if not t > 0.0:
        raise ValueError(f"time must be positive, got {t}")
    if V.grid != grid:
        raise ValueError("potential was generated on a different grid")
    w = V.require_psd()
    vals = np.asarray(f(t * np.maximum(w, 0.0)), dtype=float)
    d = grid.d
    return float((4.0 * math.pi * t) ** (-d / 2.0) * grid.h**d * np.sum(vals))


# ---------------------------------------------------------------------------
# Potential file format.

def potential_to_json_dict(V: MatrixPotential) -> dict:
    """JSON form: grid header, fiber dimension, and the non-zero sites only."""
    idx = V.grid.index_tuples()
    sites = []
    for flat in V.support(tol=0.0):
        m = V.values[flat]
        entries = [[float(z.real), float(z.imag)] for z in m.ravel()]
        sites.append({"index": list(idx[flat]), "matrix": entries})
    return {
        "grid": {
            "d": V.grid.d,
            "points": list(V.grid.points_per_axis),
            "h": V.grid.h,
            "boundary": V.grid.boundary,
        },
        "N": V.N,
        "sites": sites,
    }


def potential_from_json_dict(data: dict) -> MatrixPotential:
    g = data["grid"]
    grid = GridSpec(
        d=int(g["d"]),
        points_per_axis=tuple(int(m) for m in g["points"]),
        h=float(g["h"]),
        boundary=str(g["boundary"]),
    )
    n = int(data["N"])
    values = np.zeros((grid.nsites, n, n), dtype=complex)
    shape = grid.points_per_axis
    for site in data.get("sites", []):
        flat = int(np.ravel_multi_index(tuple(site["index"]), shape))
        entries = np.asarray(site["matrix"], dtype=float)
        if entries.shape != (n * n, 2):
            raise ValueError(
                f"site {site['index']}: need {n * n} [re, im] pairs, got "
                f"shape {entries.shape}"
            )
        values[flat] = (entries[:, 0] + 1j * entries[:, 1]).reshape(n, n)
    return MatrixPotential(grid=grid, N=n, values=values)


def save_potential(V: MatrixPotential, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(potential_to_json_dict(V), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_potential(path) -> MatrixPotential:
    with open(path, encoding="utf-8") as fh:
        return potential_from_json_dict(json.load(fh))


def potential_digest(V: MatrixPotential) -> str:
    """SHA-256 of the canonical JSON form; stable across runs and platforms."""
    payload = json.dumps(
        potential_to_json_dict(V), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()

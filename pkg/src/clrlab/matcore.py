"""Dense Hermitian matrix calculus.

Everything downstream (time-ordered functional calculus, discretized
Schroedinger operators, the experiment harness) funnels matrix work
through this module: validated Hermitian containers, eigendecompositions
with spectral projectors, scalar functional calculus f(A), positive and
negative parts, and the trace form of Hoelder's inequality used by the
convexity estimates.

Matrices are plain complex numpy arrays throughout; ``HermitianMatrix``
is a thin validated wrapper accepted anywhere an array is.  Validation
always rejects non-Hermitian input rather than symmetrizing silently;
``hermitize`` is the explicit projection for callers that want it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import MAX_MATRIX_DIM
from .errors import (
    EigenSolverError,
    NonHermitianError,
    NotPositiveSemidefiniteError,
    SpectralDomainError,
)

# Relative tolerances, scaled by (1 + magnitude of the input).
HERMITICITY_RTOL = 1e-12
CLUSTER_RTOL = 1e-9
PSD_RTOL = 1e-10
HOLDER_SLACK = 1e-10


def _as_square_array(entries) -> np.ndarray:
    if isinstance(entries, HermitianMatrix):
        return entries.entries
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(entries) -> float:
    """Max entrywise deviation |A - A^H| of a square array."""
    a = _as_square_array(entries)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(entries, *, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """Return the input as a complex ndarray, rejecting non-Hermitian data.

    The tolerance is relative: the defect max|A - A^H| must not exceed
    rtol * (1 + max|A_ij|).  Dimensions above MAX_MATRIX_DIM are refused;
    large operators live in the lattice module and never pass through here.
    """
    a = _as_square_array(entries)
    n = a.shape[0]
    if n == 0:
        raise NonHermitianError("empty matrix")
    if n > MAX_MATRIX_DIM:
        raise NonHermitianError(
            f"matrix dimension {n} exceeds the cap {MAX_MATRIX_DIM}"
        )
    scale = 1.0 + float(np.max(np.abs(a)))
    defect = float(np.max(np.abs(a - a.conj().T)))
    if defect > rtol * scale:
        raise NonHermitianError(
            f"matrix is not Hermitian: defect {defect:.3e} exceeds "
            f"{rtol:.1e} * (1 + max|entry|) = {rtol * scale:.3e}"
        )
    return a


def hermitize(entries) -> np.ndarray:
    """Explicit Hermitian projection (A + A^H) / 2 of a square array."""
    a = _as_square_array(entries)
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class HermitianMatrix:
    """Validated N x N complex Hermitian matrix.

    Construction rejects non-Hermitian entries outright.  Use
    ``hermitize`` first if a noisy matrix should be projected.
    """

    entries: np.ndarray

    def __post_init__(self):
        if isinstance(self.entries, HermitianMatrix):
            object.__setattr__(self, "entries", self.entries.entries)
            return
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NonHermitianError(f"expected a square matrix, got shape {a.shape}")
        a = require_hermitian(a)
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    @classmethod
    def identity(cls, n: int) -> "HermitianMatrix":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def diagonal(cls, values) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)).astype(complex))


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral data of a Hermitian matrix: A = sum_k w_k P_k.

    eigenvalues are real and ascending; vectors holds the matching
    orthonormal eigenbasis in its columns.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @cached_property
    def projectors(self) -> np.ndarray:
        """Stack of rank-one projectors, shape (N, N, N)."""
        v = self.vectors
        return np.einsum("ik,jk->kij", v, v.conj())

    def projector(self, k: int) -> np.ndarray:
        u = self.vectors[:, k : k + 1]
        return u @ u.conj().T

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues) @ self.vectors.conj().T

    def apply(self, values) -> np.ndarray:
        """Assemble sum_k values[k] P_k; values must be real, one per eigenvalue."""
        fw = np.asarray(values, dtype=float)
        if fw.shape != self.eigenvalues.shape:
            raise ValueError(
                f"need {self.eigenvalues.shape[0]} scalar values, got shape {fw.shape}"
            )
        out = (self.vectors * fw) @ self.vectors.conj().T
        return 0.5 * (out + out.conj().T)

    def clusters(self, rtol: float = CLUSTER_RTOL) -> list[list[int]]:
        """Indices grouped into near-degenerate runs.

        Consecutive eigenvalues closer than rtol * (1 + spectral radius)
        land in the same cluster, so projectors onto clusters stay stable
        where individual eigenvectors are not.
        """
        w = self.eigenvalues
        if w.size == 0:
            return []
        tol = rtol * (1.0 + float(np.max(np.abs(w))))
        groups = [[0]]
        for k in range(1, w.size):
            if w[k] - w[groups[-1][-1]] <= tol:
                groups[-1].append(k)
            else:
                groups.append([k])
        return groups

    def clustered_projectors(self, rtol: float = CLUSTER_RTOL) -> list[tuple[float, np.ndarray]]:
        """(mean eigenvalue, orthogonal projector) per near-degenerate cluster."""
        out = []
        for grp in self.clusters(rtol):
            v = self.vectors[:, grp]
            out.append((float(np.mean(self.eigenvalues[grp])), v @ v.conj().T))
        return out


def eig_hermitian(a) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises EigenSolverError with size and magnitude diagnostics in the
    (rare) event the dense solver fails to converge.
    """
    m = require_hermitian(a)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"eigh failed on a {m.shape[0]} x {m.shape[0]} matrix "
            f"(max|entry| = {np.max(np.abs(m)):.3e}, "
            f"frobenius = {np.linalg.norm(m):.3e}): {exc}"
        ) from exc
    return EigenDecomposition(eigenvalues=w, vectors=v)


def _evaluate_on_spectrum(f, w: np.ndarray) -> np.ndarray:
    """Evaluate a scalar function on eigenvalues, pinpointing failures."""
    try:
        fw = np.asarray(f(w))
        if fw.shape != w.shape:
            raise ValueError
    except Exception:
        vals = []
        for x in w:
            try:
                vals.append(complex(f(float(x))))
            except Exception as exc:
                raise SpectralDomainError(
                    f"function is undefined at eigenvalue {x!r}: {exc}"
                ) from exc
        fw = np.asarray(vals)
    fw = fw.astype(complex)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        raise SpectralDomainError(
            f"function is not finite at eigenvalue {w[bad][0]!r}"
        )
    scale = 1.0 + float(np.max(np.abs(fw)))
    if np.max(np.abs(fw.imag)) > 1e-12 * scale:
        k = int(np.argmax(np.abs(fw.imag)))
        raise SpectralDomainError(
            f"function is not real on the spectrum: f({w[k]!r}) = {fw[k]!r}"
        )
    return fw.real


def apply_spectral(f, a) -> np.ndarray:
    """Functional calculus f(A) = sum_k f(w_k) P_k for Hermitian A.

    f must be real-valued and finite on the spectrum; violations raise
    SpectralDomainError naming the offending eigenvalue.  The result is
    exactly Hermitian and commutes with A up to rounding.
    """
    dec = eig_hermitian(a)
    fw = _evaluate_on_spectrum(f, dec.eigenvalues)
    return dec.apply(fw)


def split_parts(a) -> tuple[np.ndarray, np.ndarray]:
    """Positive and negative parts (A_+, A_-) from a single decomposition.

    A = A_+ - A_-, both parts are PSD, and their ranges are orthogonal
    because both come from the same eigenbasis.
    """
    dec = eig_hermitian(a)
    w = dec.eigenvalues
    pos = dec.apply(np.maximum(w, 0.0))
    neg = dec.apply(np.maximum(-w, 0.0))
    return pos, neg


def positive_part(a) -> np.ndarray:
    """A_+ = sum over positive eigenvalues of w_k P_k."""
    return split_parts(a)[0]


def negative_part(a) -> np.ndarray:
    """A_- = (-A)_+, so that A = A_+ - A_-."""
    return split_parts(a)[1]


def require_psd(a, *, rtol: float = PSD_RTOL) -> np.ndarray:
    """Validate that a Hermitian matrix is PSD within a relative tolerance.

    Returns the eigenvalues (ascending) so callers can reuse them.
    """
    m = require_hermitian(a)
    w = np.linalg.eigvalsh(m)
    scale = 1.0 + (float(np.max(np.abs(w))) if w.size else 0.0)
    if w.size and w[0] < -rtol * scale:
        raise NotPositiveSemidefiniteError(
            f"matrix has eigenvalue {w[0]:.6e} below -{rtol:.1e} * (1 + spectral radius)"
        )
    return w


def holder_trace_product(matrices, powers) -> tuple[float, float]:
    """Trace Hoelder bound for words in PSD matrices.

    For PSD W_1..W_n and exponents j_1..j_n with k = sum j_i, returns

        lhs = Re tr(W_1^{j_1} ... W_n^{j_n})
        rhs = prod_i (tr W_i^k)^{j_i / k}

    and checks lhs <= rhs up to slack 1e-10 * (1 + rhs); a violation
    beyond slack raises ArithmeticError since it would signal a numerical
    inconsistency, not a mathematical possibility.
    """
    mats = [require_hermitian(m) for m in matrices]
    js = [int(j) for j in powers]
    if len(mats) != len(js) or not mats:
        raise ValueError("need matching, non-empty matrices and powers")
    if any(j < 0 for j in js):
        raise ValueError(f"powers must be non-negative, got {js}")
    k = sum(js)
    if k == 0:
        raise ValueError("total power must be at least 1")
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise ValueError(f"matrices must share a dimension, got {sorted(dims)}")

    eigs = []
    for m in mats:
        w = np.linalg.eigvalsh(m)
        scale = 1.0 + float(np.max(np.abs(w)))
        if w[0] < -PSD_RTOL * scale:
            raise NotPositiveSemidefiniteError(
                f"factor has eigenvalue {w[0]:.6e}; Hoelder needs PSD factors"
            )
        eigs.append(np.maximum(w, 0.0))

    word = np.eye(mats[0].shape[0], dtype=complex)
    for m, j in zip(mats, js):
        if j:
            word = word @ np.linalg.matrix_power(m, j)
    lhs = float(np.trace(word).real)

    rhs = 1.0
    for w, j in zip(eigs, js):
        if j:
            rhs *= float(np.sum(w**k)) ** (j / k)

    if lhs > rhs + HOLDER_SLACK * (1.0 + abs(rhs)):
        raise ArithmeticError(
            f"trace Hoelder inequality violated: lhs {lhs!r} > rhs {rhs!r}"
        )
    return lhs, rhs

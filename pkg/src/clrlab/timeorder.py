"""Time-ordered functional calculus for tuples of Hermitian matrices.

Given W_1, ..., W_n with eigendecompositions W_j = sum_k w_k^(j) P_k^(j),
the time-ordered application of a scalar function f is

    T f(W_1..W_n) = sum over index tuples (k_1..k_n) of
                    f(w_{k_1}^(1) + ... + w_{k_n}^(n)) P_{k_1}^(1) ... P_{k_n}^(n),

with the projector product taken in the fixed order 1..n.  The result is
generally non-Hermitian for n >= 2; its real trace is the quantity of
interest.  Three closed forms avoid the exponential-cost enumeration:
monomials (multinomial expansion), exponentials (ordered product of
matrix exponentials), and mu * exp(alpha mu) (product rule).

The admissible scalar class for the convexity inequality is

    f(mu) = alpha_0 + alpha_1 mu + sum_{j>=2} alpha_j mu^j
            + sum_k beta_k exp(-r_k mu),

with alpha_j >= 0 for j >= 2 and beta_k >= 0 (alpha_0, alpha_1 and the
rates r_k unconstrained).  For PSD inputs, averaging beats time ordering:

    Re tr T f(W_1..W_n) <= (1/n) sum_j tr f(n W_j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ENUMERATION_BUDGET, MONOMIAL_MAX_POWER
from .errors import AdmissibilityError, BudgetError
from .matcore import eig_hermitian, require_hermitian, require_psd


@dataclass(frozen=True)
class ScalarFunctionClass:
    """Admissible function: polynomial plus non-negative exponential atoms.

    poly_coeffs lists alpha_0, alpha_1, ... in ascending order;
    exp_atoms is a sequence of (weight, rate) pairs for weight * exp(-rate * mu).
    Construction enforces alpha_j >= 0 for j >= 2 and weights >= 0.
    """

    poly_coeffs: tuple[float, ...] = ()
    exp_atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.poly_coeffs)
        atoms = tuple((float(w), float(r)) for w, r in self.exp_atoms)
        for j, c in enumerate(coeffs):
            if j >= 2 and c < 0.0:
                raise AdmissibilityError(
                    f"coefficient of mu^{j} must be >= 0, got {c}"
                )
            if not math.isfinite(c):
                raise AdmissibilityError(f"non-finite coefficient {c} at power {j}")
        for w, r in atoms:
            if w < 0.0:
                raise AdmissibilityError(f"atom weight must be >= 0, got {w}")
            if not (math.isfinite(w) and math.isfinite(r)):
                raise AdmissibilityError(f"non-finite atom ({w}, {r})")
        object.__setattr__(self, "poly_coeffs", coeffs)
        object.__setattr__(self, "exp_atoms", atoms)

    def __call__(self, mu):
        x = np.asarray(mu, dtype=float)
        out = np.zeros_like(x)
        if self.poly_coeffs:
            out = out + np.polynomial.polynomial.polyval(x, self.poly_coeffs)
        for w, r in self.exp_atoms:
            out = out + w * np.exp(-r * x)
        if np.isscalar(mu) or np.ndim(mu) == 0:
            return float(out)
        return out

    def __add__(self, other: "ScalarFunctionClass") -> "ScalarFunctionClass":
        if not isinstance(other, ScalarFunctionClass):
            return NotImplemented
        n = max(len(self.poly_coeffs), len(other.poly_coeffs))
        a = list(self.poly_coeffs) + [0.0] * (n - len(self.poly_coeffs))
        b = list(other.poly_coeffs) + [0.0] * (n - len(other.poly_coeffs))
        return ScalarFunctionClass(
            poly_coeffs=tuple(x + y for x, y in zip(a, b)),
            exp_atoms=self.exp_atoms + other.exp_atoms,
        )

    def __mul__(self, c) -> "ScalarFunctionClass":
        c = float(c)
        return ScalarFunctionClass(
            poly_coeffs=tuple(c * a for a in self.poly_coeffs),
            exp_atoms=tuple((c * w, r) for w, r in self.exp_atoms),
        )

    __rmul__ = __mul__

    @property
    def degree(self) -> int:
        d = 0
        for j, c in enumerate(self.poly_coeffs):
            if c != 0.0:
                d = j
        return d

    def derivative_at_zero(self, m: int) -> float:
        """m-th derivative at 0: m! alpha_m + sum_k beta_k (-r_k)^m."""
        val = 0.0
        if m < len(self.poly_coeffs):
            val += math.factorial(m) * self.poly_coeffs[m]
        for w, r in self.exp_atoms:
            val += w * (-r) ** m
        return val

    @classmethod
    def monomial(cls, k: int, coeff: float = 1.0) -> "ScalarFunctionClass":
        if k < 0:
            raise AdmissibilityError(f"monomial power must be >= 0, got {k}")
        return cls(poly_coeffs=(0.0,) * k + (float(coeff),))

    @classmethod
    def exponential(cls, alpha: float, weight: float = 1.0) -> "ScalarFunctionClass":
        """weight * exp(alpha * mu), stored as an atom with rate -alpha."""
        return cls(exp_atoms=((float(weight), -float(alpha)),))


@dataclass(frozen=True)
class TimeOrderedResult:
    """Matrix value of T f(W_1..W_n) together with its real trace."""

    matrix: np.ndarray
    real_trace: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _validated_tuple(matrices) -> list[np.ndarray]:
    mats = [require_hermitian(m) for m in matrices]
    if not mats:
        raise ValueError("need at least one matrix")
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise ValueError(f"matrices must share a dimension, got {sorted(dims)}")
    return mats


def _result(matrix: np.ndarray) -> TimeOrderedResult:
    return TimeOrderedResult(matrix=matrix, real_trace=float(np.trace(matrix).real))


def time_ordered_apply(f, matrices, budget: int = ENUMERATION_BUDGET) -> TimeOrderedResult:
    """Evaluate T f(W_1..W_n) by joint spectral enumeration.

    f may be any scalar function that is real and finite on the sums of
    eigenvalues (a ScalarFunctionClass qualifies).  Enumeration touches
    N**n index tuples; if that exceeds ``budget`` a BudgetError points the
    caller at the closed forms instead.  Cost is O(N**n) memory and time.
    """
    mats = _validated_tuple(matrices)
    n = len(mats)
    dim = mats[0].shape[0]
    if dim**n > budget:
        raise BudgetError(
            f"joint enumeration needs {dim}**{n} = {dim**n} terms, over the "
            f"budget of {budget}; use time_ordered_monomial / "
            f"time_ordered_exponential / time_ordered_mu_exp closed forms"
        )

    decs = [eig_hermitian(m) for m in mats]
    # Overlap matrices between consecutive eigenbases.
    gaps = [
        decs[j].vectors.conj().T @ decs[j + 1].vectors for j in range(n - 1)
    ]

    idx = np.indices((dim,) * n).reshape(n, -1)
    sums = np.zeros(idx.shape[1], dtype=float)
    for j in range(n):
        sums += decs[j].eigenvalues[idx[j]]

    coeff = np.asarray(f(sums), dtype=complex)
    if coeff.shape != sums.shape:
        raise ValueError("f must evaluate elementwise on an array of reals")

    chain = coeff
    for j in range(n - 1):
        chain = chain * gaps[j][idx[j], idx[j + 1]]

    # Accumulate in the basis of W_1 on the left and W_n on the right:
    # T f = V_1 [ sum over tuples chain * e_{k_1} e_{k_n}^T ] V_n^H.
    core = np.zeros((dim, dim), dtype=complex)
    np.add.at(core, (idx[0], idx[-1]), chain)
    matrix = decs[0].vectors @ core @ decs[-1].vectors.conj().T
    return _result(matrix)


def _compositions(total: int, parts: int):
    """All tuples of non-negative ints of given length summing to total."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def time_ordered_monomial(k: int, matrices) -> TimeOrderedResult:
    """Closed form of T mu^k: the multinomial expansion

        sum over j_1+..+j_n = k of  k! / (j_1! .. j_n!)  W_1^{j_1} .. W_n^{j_n}.

    Exact up to rounding; cost grows with the number of compositions, so k
    is capped at MONOMIAL_MAX_POWER.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"power must be a positive integer, got {k!r}")
    if k > MONOMIAL_MAX_POWER:
        raise BudgetError(
            f"monomial power {k} exceeds the cap {MONOMIAL_MAX_POWER}"
        )
    mats = _validated_tuple(matrices)
    n = len(mats)
    dim = mats[0].shape[0]

    # Precompute W_i^p for all p <= k.
    powers = []
    for m in mats:
        tower = [np.eye(dim, dtype=complex)]
        for _ in range(k):
            tower.append(tower[-1] @ m)
        powers.append(tower)

    k_fact = math.factorial(k)
    total = np.zeros((dim, dim), dtype=complex)
    for js in _compositions(k, n):
        coeff = k_fact
        for j in js:
            coeff //= math.factorial(j)
        word = powers[0][js[0]]
        for i in range(1, n):
            if js[i]:
                word = word @ powers[i][js[i]]
        total += coeff * word
    return _result(total)


def time_ordered_exponential(alpha: float, matrices) -> TimeOrderedResult:
    """Closed form of T exp(alpha mu): the ordered product e^{aW_1}..e^{aW_n}."""
    alpha = float(alpha)
    mats = _validated_tuple(matrices)
    word = None
    for m in mats:
        dec = eig_hermitian(m)
        factor = dec.apply(np.exp(alpha * dec.eigenvalues))
        word = factor if word is None else word @ factor
    return _result(word)


def time_ordered_mu_exp(alpha: float, matrices) -> TimeOrderedResult:
    """Closed form of T mu e^{alpha mu}.

    Differentiating the exponential closed form in alpha inserts one
    factor W_m at each position:

        sum_m e^{aW_1}..e^{aW_{m-1}} (W_m e^{aW_m}) e^{aW_{m+1}}..e^{aW_n}.
    """
    alpha = float(alpha)
    mats = _validated_tuple(matrices)
    n = len(mats)
    dim = mats[0].shape[0]

    exps = []
    inserted = []
    for m in mats:
        dec = eig_hermitian(m)
        ew = np.exp(alpha * dec.eigenvalues)
        exps.append(dec.apply(ew))
        inserted.append(dec.apply(dec.eigenvalues * ew))

    # Prefix products of exps[0..m) and suffix products of exps(m..n-1].
    prefix = [np.eye(dim, dtype=complex)]
    for e in exps[:-1]:
        prefix.append(prefix[-1] @ e)
    suffix = [np.eye(dim, dtype=complex)]
    for e in reversed(exps[1:]):
        suffix.append(e @ suffix[-1])
    suffix.reverse()

    total = np.zeros((dim, dim), dtype=complex)
    for m in range(n):
        total += prefix[m] @ inserted[m] @ suffix[m]
    return _result(total)


def _require_admissible(f) -> ScalarFunctionClass:
    if not isinstance(f, ScalarFunctionClass):
        raise AdmissibilityError(
            "convexity routines need a ScalarFunctionClass instance "
            f"(admissible polynomial + exponential atoms), got {type(f).__name__}"
        )
    return f


def _psd_tuple(matrices) -> tuple[list[np.ndarray], list[np.ndarray]]:
    mats = _validated_tuple(matrices)
    eigs = [require_psd(m) for m in mats]
    return mats, eigs


def averaged_trace(f, matrices) -> float:
    """(1/n) sum_j tr f(n W_j), evaluated on eigenvalues."""
    mats = _validated_tuple(matrices)
    n = len(mats)
    total = 0.0
    for m in mats:
        w = np.linalg.eigvalsh(m)
        total += float(np.sum(np.asarray(f(n * w), dtype=float)))
    return total / n


def jensen_gap(f, matrices, budget: int = ENUMERATION_BUDGET) -> float:
    """Gap (1/n) sum_j tr f(n W_j) - Re tr T f(W_1..W_n).

    Preconditions: f admissible (ScalarFunctionClass) and every W_j PSD.
    The gap is guaranteed non-negative mathematically; numerically it may
    dip to -1e-9 * (1 + |average side|), which callers should treat as zero.
    """
    f = _require_admissible(f)
    mats, _ = _psd_tuple(matrices)
    lhs = time_ordered_apply(f, mats, budget=budget).real_trace
    rhs = averaged_trace(f, mats)
    return rhs - lhs


def convex_probe(kink: float, matrices, budget: int = ENUMERATION_BUDGET) -> float:
    """Same gap for the hinge max(mu - kink, 0), which is outside the class.

    No sign guarantee: hinges are convex but not admissible, and the gap
    does go negative for some inputs.  Exposed for exploration only.
    """
    kink = float(kink)
    if not kink > 0.0:
        raise ValueError(f"hinge offset must be positive, got {kink}")
    mats, _ = _psd_tuple(matrices)

    def hinge(mu):
        return np.maximum(np.asarray(mu, dtype=float) - kink, 0.0)

    lhs = time_ordered_apply(hinge, mats, budget=budget).real_trace
    rhs = averaged_trace(hinge, mats)
    return rhs - lhs

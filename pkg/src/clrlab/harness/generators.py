"""Seeded random instances: matrices, admissible functions, potentials.

Everything here is a pure function of its numpy Generator (or integer
seed), so identical seeds reproduce identical instances byte for byte.
"""

from __future__ import annotations

import numpy as np

from ..config import MAX_MATRIX_DIM
from ..lattice import GridSpec, MatrixPotential
from ..timeorder import ScalarFunctionClass

POTENTIAL_STYLES = ("gaussian-bumps", "random-psd-field", "scalar-embed")


def rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (g + g.conj().T) / np.sqrt(n)


def random_psd(rng: np.random.Generator, n: int, eig_max: float = 1.0) -> np.ndarray:
    """Random PSD matrix with largest eigenvalue exactly eig_max."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = g @ g.conj().T
    top = float(np.linalg.eigvalsh(a)[-1])
    return (float(eig_max) / top) * a


def random_admissible_function(
    rng: np.random.Generator,
    max_power: int = 6,
    alpha_cap: float = 2.0,
) -> ScalarFunctionClass:
    """Random admissible function: monomial, exponential, or a convex mix.

    Monomial powers stay at or below max_power, exponential growth rates
    within [-alpha_cap, alpha_cap]; mixtures carry non-negative weights
    plus a free affine part, matching the sign constraints of the class.
    """
    kind = rng.integers(0, 3)
    if kind == 0:
        k = int(rng.integers(2, max_power + 1))
        return ScalarFunctionClass.monomial(k, coeff=float(rng.uniform(0.2, 1.0)))
    if kind == 1:
        alpha = float(rng.uniform(-alpha_cap, alpha_cap))
        return ScalarFunctionClass.exponential(alpha, weight=float(rng.uniform(0.2, 1.0)))
    total = ScalarFunctionClass(
        poly_coeffs=(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(-1.0, 1.0)))
    )
    for _ in range(int(rng.integers(1, 3))):
        k = int(rng.integers(2, max_power + 1))
        total = total + ScalarFunctionClass.monomial(k, coeff=float(rng.uniform(0.0, 0.8)))
    for _ in range(int(rng.integers(1, 3))):
        alpha = float(rng.uniform(-alpha_cap, alpha_cap))
        total = total + ScalarFunctionClass.exponential(
            alpha, weight=float(rng.uniform(0.0, 0.8))
        )
    return total


def _gaussian_bump_values(
    rng: np.random.Generator,
    grid: GridSpec,
    n: int,
    amplitude: float,
    nbumps: int,
) -> np.ndarray:
    # Draw every bump parameter before touching site coordinates, so the
    # same seed describes the same continuum field at every resolution.
    extent = np.asarray(grid.extent)
    origin = np.asarray(grid.origin)
    centers = origin + rng.uniform(0.0, 1.0, size=(nbumps, grid.d)) * extent
    sigmas = rng.uniform(0.12, 0.28, size=nbumps) * float(np.min(extent))
    amps = [random_psd(rng, n, eig_max=amplitude * rng.uniform(0.5, 1.0))
            for _ in range(nbumps)]

    coords = grid.site_coords()
    values = np.zeros((grid.nsites, n, n), dtype=complex)
    for c, s, amp in zip(centers, sigmas, amps):
        r2 = np.sum((coords - c) ** 2, axis=1)
        values += np.exp(-r2 / s**2)[:, None, None] * amp[None, :, :]
    return values


def _psd_field_values(
    rng: np.random.Generator,
    grid: GridSpec,
    n: int,
    amplitude: float,
) -> np.ndarray:
    nsites = grid.nsites
    g = rng.standard_normal((nsites, n, n)) + 1j * rng.standard_normal((nsites, n, n))
    raw = np.einsum("xij,xkj->xik", g, g.conj()) / (2.0 * n)
    raw *= (amplitude * rng.uniform(0.3, 1.0, size=nsites))[:, None, None]

    # One stencil averaging pass; missing neighbors (Dirichlet walls) just
    # drop out of the convex combination, which keeps every site PSD.
    pts = grid.points_per_axis
    arr = raw.reshape(*pts, n, n)
    total = arr.copy()
    count = np.ones(pts, dtype=float)
    ones = np.ones(pts, dtype=float)
    for ax in range(grid.d):
        for step in (1, -1):
            shifted = np.roll(arr, step, axis=ax)
            mask = np.roll(ones, step, axis=ax)
            if grid.boundary == "dirichlet":
                edge = [slice(None)] * grid.d
                edge[ax] = 0 if step == 1 else -1
                shifted[tuple(edge)] = 0.0
                mask[tuple(edge)] = 0.0
            total += shifted
            count += mask
    smoothed = total / count[..., None, None]
    return smoothed.reshape(nsites, n, n)


def generate_potential(
    seed,
    grid: GridSpec,
    N: int,
    style: str,
    amplitude: float = 1.0,
    nbumps: int = 3,
) -> MatrixPotential:
    """Deterministic sitewise-PSD potential in one of three styles.

    gaussian-bumps: sum of Gaussian profiles with random PSD amplitude
    matrices; the bump parameters depend only on the seed and the box, so
    refining the grid samples the same continuum field.
    random-psd-field: i.i.d. PSD site draws smoothed by one stencil
    averaging pass.
    scalar-embed: a scalar (N=1) bump field times the identity, so counts
    are exactly N times the scalar counts.
    """
    n = int(N)
    if n < 1 or n > MAX_MATRIX_DIM:
        raise ValueError(f"N must be in [1, {MAX_MATRIX_DIM}], got {n}")
    amplitude = float(amplitude)
    if not amplitude >= 0.0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    if style not in POTENTIAL_STYLES:
        raise ValueError(f"style must be one of {POTENTIAL_STYLES}, got {style!r}")

    rng = rng_from(seed)
    if style == "gaussian-bumps":
        values = _gaussian_bump_values(rng, grid, n, amplitude, nbumps)
    elif style == "random-psd-field":
        values = _psd_field_values(rng, grid, n, amplitude)
    else:
        scalar = _gaussian_bump_values(rng, grid, 1, amplitude, nbumps)
        values = scalar[:, 0, 0][:, None, None].real * np.eye(n)[None, :, :]
    return MatrixPotential(grid=grid, N=n, values=values)

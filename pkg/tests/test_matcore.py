import numpy as np
import pytest

from clrlab.errors import (
    NonHermitianError,
    NotPositiveSemidefiniteError,
    SpectralDomainError,
)
from clrlab.matcore import (
    HermitianMatrix,
    apply_spectral,
    eig_hermitian,
    hermitize,
    holder_trace_product,
    negative_part,
    positive_part,
    split_parts,
)


def random_hermitian(rng, n, scale=1.0):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (g + g.conj().T)


def random_psd(rng, n, scale=1.0):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (g @ g.conj().T) / n


def test_hermitian_matrix_rejects_non_hermitian():
    bad = np.array([[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(NonHermitianError):
        HermitianMatrix(bad)
    # explicit symmetrization is a separate, opt-in operation
    fixed = hermitize(bad)
    assert np.allclose(fixed, fixed.conj().T)
    HermitianMatrix(fixed)


def test_hermitian_matrix_tolerance_scales_with_entries():
    a = np.array([[1e8, 1.0], [1.0 + 1e-5, 2e8]])
    # defect 1e-5 vs tolerance 1e-12*(1+2e8) ~ 2e-4: accepted
    HermitianMatrix(a)
    b = np.array([[1.0, 1.0], [1.0 + 1e-5, 2.0]])
    with pytest.raises(NonHermitianError):
        HermitianMatrix(b)


def test_eig_identity():
    dec = eig_hermitian(np.eye(3))
    assert np.allclose(dec.eigenvalues, [1.0, 1.0, 1.0])
    total = sum(dec.projector(k) for k in range(3))
    assert np.max(np.abs(total - np.eye(3))) < 1e-10


def test_eig_diagonal():
    dec = eig_hermitian(np.diag([-1.0, 2.0]))
    assert np.allclose(dec.eigenvalues, [-1.0, 2.0])
    assert np.allclose(dec.projector(0), np.diag([1.0, 0.0]))
    assert np.allclose(dec.projector(1), np.diag([0.0, 1.0]))


def test_eig_projector_invariants_and_reconstruction():
    for seed in range(40):
        rng = np.random.default_rng(seed)
        a = random_hermitian(rng, 4, scale=float(rng.uniform(0.1, 10.0)))
        dec = eig_hermitian(a)
        assert np.all(np.diff(dec.eigenvalues) >= 0.0)
        total = np.zeros((4, 4), dtype=complex)
        for k in range(4):
            pk = dec.projector(k)
            for l in range(4):
                prod = pk @ dec.projector(l)
                ref = pk if l == k else np.zeros((4, 4))
                assert np.max(np.abs(prod - ref)) < 1e-10
            total += pk
        assert np.max(np.abs(total - np.eye(4))) < 1e-10
        radius = np.max(np.abs(dec.eigenvalues))
        assert np.max(np.abs(dec.reconstruct() - a)) < 1e-10 * (1.0 + radius)


def test_degenerate_cluster_projectors():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, _ = np.linalg.qr(g)
    a = (q * np.array([1.0, 1.0, 1.0, 3.0])) @ q.conj().T
    dec = eig_hermitian(hermitize(a))
    clusters = dec.clusters()
    assert [len(c) for c in clusters] == [3, 1]
    val, p = dec.clustered_projectors()[0]
    # a cluster projector is well defined even though the basis inside
    # the degenerate eigenspace is not
    assert abs(val - 1.0) < 1e-9
    assert np.max(np.abs(p @ p - p)) < 1e-9
    assert abs(np.trace(p).real - 3.0) < 1e-9


def test_apply_spectral_identity_function():
    rng = np.random.default_rng(1)
    a = random_hermitian(rng, 3)
    assert np.max(np.abs(apply_spectral(lambda mu: mu, a) - a)) < 1e-12


def test_apply_spectral_square_diagonal():
    out = apply_spectral(lambda mu: mu**2, np.diag([1.0, -2.0]))
    assert np.allclose(out, np.diag([1.0, 4.0]))


def _expm_series(a, terms=30):
    # scaling-and-squaring power series; independent of apply_spectral
    norm = np.linalg.norm(a, 2)
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 1)
    b = a / 2**squarings
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ b / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def test_apply_spectral_exp_vs_power_series():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        a = random_hermitian(rng, 3, scale=float(rng.uniform(0.2, 2.0)))
        got = apply_spectral(np.exp, a)
        want = _expm_series(a)
        assert np.max(np.abs(got - want)) < 1e-9


def test_apply_spectral_commutes_with_input():
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        a = random_hermitian(rng, 4)
        fa = apply_spectral(lambda mu: np.tanh(mu), a)
        comm = fa @ a - a @ fa
        assert np.max(np.abs(comm)) < 1e-10


def test_apply_spectral_pole_names_eigenvalue():
    a = np.diag([0.0, 2.0])
    with np.errstate(divide="ignore"), pytest.raises(SpectralDomainError) as err:
        apply_spectral(lambda mu: 1.0 / mu, a)
    assert "0" in str(err.value)


def test_apply_spectral_composition():
    f = lambda mu: mu**2 + 1.0
    g = lambda mu: 2.0 * mu - 3.0
    for seed in range(20):
        rng = np.random.default_rng(200 + seed)
        a = random_hermitian(rng, 4)
        lhs = apply_spectral(lambda mu: f(g(mu)), a)
        rhs = apply_spectral(f, apply_spectral(g, a))
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_positive_part_diagonal():
    assert np.allclose(positive_part(np.diag([3.0, -5.0])), np.diag([3.0, 0.0]))
    assert np.allclose(negative_part(np.diag([3.0, -5.0])), np.diag([0.0, 5.0]))


def test_positive_part_fixes_psd_input():
    rng = np.random.default_rng(2)
    a = random_psd(rng, 4)
    assert np.max(np.abs(positive_part(a) - a)) < 1e-12
    assert np.max(np.abs(positive_part(positive_part(a)) - positive_part(a))) < 1e-12


def test_split_parts_reconstruct_and_orthogonal():
    for seed in range(40):
        rng = np.random.default_rng(300 + seed)
        a = random_hermitian(rng, 5, scale=float(rng.uniform(0.5, 4.0)))
        plus, minus = split_parts(a)
        assert np.max(np.abs(a - (plus - minus))) < 1e-10
        assert abs(np.trace(plus @ minus)) < 1e-10
        assert np.min(np.linalg.eigvalsh(plus)) > -1e-12
        assert np.min(np.linalg.eigvalsh(minus)) > -1e-12


def test_holder_single_factor_is_equality():
    rng = np.random.default_rng(3)
    w = random_psd(rng, 3)
    lhs, rhs = holder_trace_product([w], [3])
    assert abs(lhs - rhs) < 1e-10 * (1.0 + abs(rhs))
    assert abs(lhs - np.trace(np.linalg.matrix_power(w, 3)).real) < 1e-10


def test_holder_identity_pair():
    lhs, rhs = holder_trace_product([np.eye(2), np.eye(2)], [1, 1])
    assert abs(lhs - 2.0) < 1e-12
    assert abs(rhs - 2.0) < 1e-12


def test_holder_rejects_indefinite_input():
    with pytest.raises(NotPositiveSemidefiniteError):
        holder_trace_product([np.diag([1.0, -0.5])], [2])


def test_holder_property_no_violations():
    # 1000 seeded draws, k <= 5: lhs <= rhs + 1e-10 slack every time
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        dim = int(rng.integers(1, 4))
        k = int(rng.integers(1, 6))
        powers = rng.multinomial(k, np.full(n, 1.0 / n)).tolist()
        ws = [random_psd(rng, dim, scale=float(rng.uniform(0.2, 2.0)))
              for _ in range(n)]
        lhs, rhs = holder_trace_product(ws, powers)
        assert lhs <= rhs + 1e-10 * (1.0 + abs(rhs))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsepr.errors import ParameterError
from sparsepr.sensing import (
    DenseEnsemble,
    Measurements,
    PartialDFT,
    SparseSignal,
    add_noise,
    gen_sparse_signal,
    measure,
    sample_ensemble,
)


def test_signal_generation_is_deterministic():
    a = gen_sparse_signal(50, 5, "complex", seed=9)
    b = gen_sparse_signal(50, 5, "complex", seed=9)
    np.testing.assert_array_equal(a.vector, b.vector)
    np.testing.assert_array_equal(a.support, b.support)
    c = gen_sparse_signal(50, 5, "complex", seed=10)
    assert not np.array_equal(a.vector, c.vector)


def test_full_sparsity_gives_dense_signal():
    x = gen_sparse_signal(100, 100, seed=3)
    assert x.support.tolist() == list(range(100))
    assert x.x_min > 0


def test_support_inclusion_frequency():
    n, s, trials = 10_000, 10, 1000
    hits = sum(0 in gen_sparse_signal(n, s, seed=k).support for k in range(trials))
    p = s / n
    assert abs(hits / trials - p) <= 3 * np.sqrt(p * (1 - p) / trials)


def test_signal_rejects_bad_arguments():
    with pytest.raises(ParameterError):
        gen_sparse_signal(5, 6)
    with pytest.raises(ParameterError):
        gen_sparse_signal(5, 2, field="quaternion")
    with pytest.raises(ParameterError):
        SparseSignal(np.array([1.0, 2.0]), [0])
    with pytest.raises(ParameterError):
        SparseSignal(np.array([1.0, np.nan]), [0, 1])


def test_complex_gaussian_real_part_variance():
    A = sample_ensemble("complex_gaussian", 10_000, 8, seed=5).matrix()
    var = A.real.var(axis=0)
    assert np.all(np.abs(var - 0.5) <= 0.05)
    assert np.all(np.abs(A.imag.var(axis=0) - 0.5) <= 0.05)


def test_partial_dft_rows_are_unit_norm():
    A = sample_ensemble("partial_dft", 12, 32, seed=1)
    np.testing.assert_allclose(np.linalg.norm(A.matrix(), axis=1), 1.0, atol=1e-13)


def test_partial_dft_full_selection():
    A = sample_ensemble("partial_dft", 16, 16, seed=4)
    assert A.rows.tolist() == list(range(16))
    with pytest.raises(ParameterError):
        sample_ensemble("partial_dft", 17, 16, seed=4)


@pytest.mark.parametrize("n", [16, 30])
def test_partial_dft_matches_row_products(rng, n):
    A = sample_ensemble("partial_dft", n // 2, n, seed=2)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    k = np.arange(n)
    rows = np.exp(-2j * np.pi * np.outer(A.rows, k) / n) / np.sqrt(n)
    np.testing.assert_allclose(A.apply(x), rows @ x, atol=1e-10)
    r = rng.standard_normal(n // 2) + 1j * rng.standard_normal(n // 2)
    np.testing.assert_allclose(A.adjoint(r), rows.conj().T @ r, atol=1e-10)


@pytest.mark.parametrize("kind", ["complex_gaussian", "real_gaussian", "partial_dft"])
def test_adjoint_identity(rng, kind):
    A = sample_ensemble(kind, 20, 24, seed=8)
    x = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    r = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    lhs = np.vdot(r, A.apply(x))
    rhs = np.vdot(A.adjoint(r), x)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))
    np.testing.assert_allclose(A.column_energy(np.ones(20)),
                               np.sum(np.abs(A.matrix()) ** 2, axis=0), rtol=1e-12)


def test_subset_keeps_rows():
    A = sample_ensemble("complex_gaussian", 10, 4, seed=1)
    B = A.subset([2, 5])
    np.testing.assert_array_equal(B.matrix(), A.matrix()[[2, 5]])
    D = sample_ensemble("partial_dft", 6, 16, seed=1)
    assert D.subset([0, 3]).rows.tolist() == [D.rows[0], D.rows[3]]


def test_measure_examples():
    A = sample_ensemble("complex_gaussian", 5, 3, seed=0)
    np.testing.assert_array_equal(measure(A, np.zeros(3)).y, 0)
    E = DenseEnsemble(np.array([[1, 0, 0], [0, 1, 0]], dtype=complex))
    c = 1.7
    np.testing.assert_allclose(measure(E, np.array([c, 0, 0])).y, [c * c, 0], rtol=1e-15)


def test_mean_intensity_matches_norm():
    x = gen_sparse_signal(6, 3, seed=11)
    means = [measure(sample_ensemble("complex_gaussian", 20, 6, seed=k), x).y.mean()
             for k in range(200)]
    se = np.std(means, ddof=1) / np.sqrt(len(means))
    assert abs(np.mean(means) - x.norm ** 2) <= 3 * se


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3),
       st.floats(0, 2 * np.pi))
def test_measure_nonnegative_and_scaling(seed, c, phi):
    x = gen_sparse_signal(12, 4, "complex", seed=seed)
    A = sample_ensemble("complex_gaussian", 15, 12, seed=seed + 1)
    y = measure(A, x).y
    assert np.all(y >= 0)
    scaled = measure(A, c * np.exp(1j * phi) * x.vector).y
    np.testing.assert_allclose(scaled, abs(c) ** 2 * y, rtol=1e-12, atol=1e-300)


def test_noise_examples():
    x = gen_sparse_signal(20, 3, seed=1)
    A = sample_ensemble("complex_gaussian", 30, 20, seed=2)
    meas = measure(A, x)
    np.testing.assert_array_equal(add_noise(meas, 0.0, seed=7).y, meas.y)
    e1 = add_noise(meas, 0.1, seed=7).y - meas.y
    e2 = add_noise(meas, 0.2, seed=7).y - meas.y
    np.testing.assert_allclose(e2, 2 * e1, rtol=1e-12, atol=1e-15)
    with pytest.raises(ParameterError):
        add_noise(meas, -1.0, seed=7)


def test_noise_standard_deviation():
    y = Measurements(np.ones(10_000))
    noisy = add_noise(y, 0.3, seed=12)
    assert abs(np.std(noisy.y - 1) - 0.3) <= 0.05 * 0.3
    assert noisy.sigma == 0.3 and noisy.noise_seed == 12

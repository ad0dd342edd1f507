import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fitr.kernels import KernelSpec, gram_matrix, kernel_eval, median_bandwidth


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("cubic")
    with pytest.raises(ValueError):
        KernelSpec("gaussian")
    with pytest.raises(ValueError):
        KernelSpec("gaussian", -1.0)
    with pytest.raises(ValueError):
        KernelSpec("linear", 1.0)
    spec = KernelSpec("gaussian", 2.0)
    with pytest.raises(AttributeError):
        spec.bandwidth_sigma = 3.0  # immutable


def test_gaussian_zero_distance_identity():
    for sigma in (0.1, 1.0, 7.5):
        spec = KernelSpec("gaussian", sigma)
        x = np.array([0.3, -1.2, 4.0])
        assert kernel_eval(spec, x, x) == 1.0


def test_linear_orthogonal():
    assert kernel_eval(KernelSpec("linear"), [1, 0], [0, 1]) == 0.0


def test_gaussian_hand_value():
    # sigma 1, x=(0,0), y=(1,1): exp(-2)
    got = kernel_eval(KernelSpec("gaussian", 1.0), [0, 0], [1, 1])
    assert got == pytest.approx(np.exp(-2.0), rel=1e-12)


def test_kernel_eval_errors():
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec("linear"), [1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec("linear"), [np.nan, 0], [0, 0])
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec("gaussian", 1.0), [np.inf, 0], [0, 0])


def test_gram_single_row():
    g = gram_matrix(KernelSpec("gaussian", 3.0), [[0.5, 0.5]], [[0.5, 0.5]])
    assert g.shape == (1, 1)
    assert g[0, 0] == 1.0


def test_gram_linear_identity_rows():
    X = np.eye(2)
    assert np.array_equal(gram_matrix(KernelSpec("linear"), X, X), np.eye(2))


def test_gram_gaussian_hand_values():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    g = gram_matrix(KernelSpec("gaussian", 1.0), X, X)
    expected = np.array([[1.0, np.exp(-2)], [np.exp(-2), 1.0]])
    np.testing.assert_allclose(g, expected, rtol=1e-12)


def test_gram_dimension_mismatch():
    with pytest.raises(ValueError):
        gram_matrix(KernelSpec("linear"), np.ones((2, 3)), np.ones((2, 4)))


def test_gram_large_block_matches_small_path():
    # the expanded-square fallback must agree with the broadcast path
    rng = np.random.default_rng(0)
    Xa = rng.normal(size=(40, 6))
    Xb = rng.normal(size=(30, 6))
    spec = KernelSpec("gaussian", 0.7)
    small = gram_matrix(spec, Xa, Xb)
    import fitr.kernels as K

    old = K._BROADCAST_CELL_LIMIT
    try:
        K._BROADCAST_CELL_LIMIT = 1
        big = gram_matrix(spec, Xa, Xb)
    finally:
        K._BROADCAST_CELL_LIMIT = old
    np.testing.assert_allclose(big, small, atol=1e-12)


def test_gram_psd_gaussian():
    rng = np.random.default_rng(7)
    for n in (5, 20, 50):
        X = rng.normal(size=(n, 4))
        g = gram_matrix(KernelSpec("gaussian", 0.9), X, X)
        eig = np.linalg.eigvalsh(g)
        assert eig.min() >= -1e-8 * np.trace(g)


@settings(max_examples=40, deadline=None)
@given(
    arrays(float, 4, elements=st.floats(-3, 3)),
    arrays(float, 4, elements=st.floats(-3, 3)),
    st.floats(0.05, 1.5),
)
def test_kernel_symmetry_and_range(x, y, sigma):
    # ranges kept small enough that exp(-sigma^2 ||x-y||^2) cannot underflow
    for spec in (KernelSpec("linear"), KernelSpec("gaussian", sigma)):
        assert kernel_eval(spec, x, y) == kernel_eval(spec, y, x)
    g = kernel_eval(KernelSpec("gaussian", sigma), x, y)
    assert 0.0 < g <= 1.0


def test_median_bandwidth_single_pair():
    # two points at distance 2: sigma = 1 / 2
    assert median_bandwidth([[0.0], [2.0]]) == pytest.approx(0.5)


def test_median_bandwidth_three_points():
    # distances {1, 1, 2}: median 1, sigma 1
    assert median_bandwidth([[0.0], [1.0], [2.0]]) == pytest.approx(1.0)


def test_median_bandwidth_permutation_invariant():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(17, 5))
    base = median_bandwidth(X)
    for seed in range(5):
        perm = np.random.default_rng(seed).permutation(17)
        assert median_bandwidth(X[perm]) == base


def test_median_bandwidth_matches_bruteforce():
    rng = np.random.default_rng(11)
    for n in (2, 3, 9, 24):
        X = rng.normal(size=(n, 3))
        dists = sorted(
            float(np.linalg.norm(X[i] - X[j]))
            for i in range(n)
            for j in range(i + 1, n)
        )
        assert median_bandwidth(X) == pytest.approx(1.0 / np.median(dists), rel=1e-12)


def test_median_bandwidth_duplicate_row_shifts_median():
    X = np.array([[0.0], [1.0], [2.0]])
    with_dup = np.vstack([X, [[1.0]]])
    dists = sorted(
        float(abs(a - b))
        for i, a in enumerate(with_dup[:, 0])
        for b in with_dup[i + 1 :, 0]
    )
    assert median_bandwidth(with_dup) == pytest.approx(1.0 / np.median(dists))


def test_median_bandwidth_degenerate():
    with pytest.raises(ValueError):
        median_bandwidth([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
    with pytest.raises(ValueError):
        median_bandwidth([[1.0, 2.0]])

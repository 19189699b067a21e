"""
Unit tests for kernels, Gram matrices and RKHS functions.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kernels import (
    KERNELS,
    GaussianKernel,
    LinearKernel,
    PolynomialKernel,
    RkhsFunction,
    cholesky_solve,
    data_local_bound,
    eval_kernel,
    gram_matrix,
    is_psd,
    jitter_cholesky,
    make_kernel,
    rkhs_eval,
    rkhs_norm,
    sup_embedding_bound,
)
from utils.errors import ContractError, InputDomainError, ParameterError

points = arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 3)),
                elements=st.floats(-3.0, 3.0, allow_nan=False))


# ---------------------------------------------------------------------------
# kernels/factory.py
# ---------------------------------------------------------------------------

class TestFactory:
    def test_known_kinds(self):
        assert set(KERNELS) == {"gaussian", "linear", "polynomial"}

    def test_make_kernel(self):
        assert make_kernel("gaussian", sigma=0.5) == GaussianKernel(0.5)
        assert make_kernel("polynomial", degree=3, offset=0.0) == PolynomialKernel(3, 0.0)
        assert isinstance(make_kernel("linear"), LinearKernel)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            make_kernel("laplace")

    def test_unknown_parameter(self):
        with pytest.raises(ParameterError):
            make_kernel("linear", sigma=1.0)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            GaussianKernel(0.0)
        with pytest.raises(ParameterError):
            PolynomialKernel(degree=0)
        with pytest.raises(ParameterError):
            PolynomialKernel(degree=2, offset=-1.0)


# ---------------------------------------------------------------------------
# kernels/base.py
# ---------------------------------------------------------------------------

class TestEvalKernel:
    def test_gaussian_on_diagonal(self):
        assert eval_kernel(GaussianKernel(0.7), [0.3, -1.0], [0.3, -1.0]) == 1.0

    def test_linear(self):
        assert eval_kernel(LinearKernel(), [1, 2], [3, 4]) == pytest.approx(11.0)

    def test_gaussian_unit_distance(self):
        assert eval_kernel(GaussianKernel(1.0), [0.0], [1.0]) == pytest.approx(math.exp(-0.5))

    def test_callable(self):
        assert LinearKernel()([2.0], [3.0]) == pytest.approx(6.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InputDomainError):
            eval_kernel(LinearKernel(), [1, 2], [1])


class TestGramMatrix:
    def test_single_gaussian_point(self):
        np.testing.assert_array_equal(gram_matrix(GaussianKernel(1.0), [[0.5]]), [[1.0]])

    def test_linear_outer_products(self):
        np.testing.assert_allclose(gram_matrix(LinearKernel(), [[1], [2]]), [[1, 2], [2, 4]])

    def test_equilateral_triangle(self):
        xs = [[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]]
        K = gram_matrix(GaussianKernel(1.0), xs)
        off = K[~np.eye(3, dtype=bool)]
        np.testing.assert_allclose(off, math.exp(-0.5), rtol=1e-12)

    def test_empty_raises(self):
        with pytest.raises(InputDomainError):
            gram_matrix(LinearKernel(), np.empty((0, 2)))

    @given(xs=points)
    @settings(max_examples=50, deadline=None)
    def test_symmetric_psd_exact_diagonal(self, xs):
        for kernel in (GaussianKernel(0.8), LinearKernel(), PolynomialKernel(2, 1.0)):
            K = gram_matrix(kernel, xs)
            assert np.array_equal(K, K.T)
            np.testing.assert_array_equal(np.diag(K), kernel.diagonal(xs))
            assert is_psd(K)


class TestEmbeddingBounds:
    def test_gaussian(self):
        assert sup_embedding_bound(GaussianKernel(0.3), 10.0) == 1.0

    def test_linear(self):
        assert sup_embedding_bound(LinearKernel(), 2.5) == 2.5

    def test_polynomial(self):
        assert sup_embedding_bound(PolynomialKernel(2, 1.0), 1.0) == pytest.approx(2.0)

    def test_polynomial_matches_sphere_maximum(self):
        kernel = PolynomialKernel(3, 0.5)
        angles = np.linspace(0, 2 * np.pi, 200)
        sphere = 1.5 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        best = math.sqrt(float(np.max(kernel.diagonal(sphere))))
        assert sup_embedding_bound(kernel, 1.5) == pytest.approx(best, rel=1e-12)

    def test_negative_domain_bound(self):
        with pytest.raises(ParameterError):
            sup_embedding_bound(LinearKernel(), -1.0)

    def test_data_local_bound_not_above_global(self):
        xs = np.array([[0.2, 0.1], [-0.5, 0.3]])
        radius = float(np.max(np.linalg.norm(xs, axis=1)))
        kernel = PolynomialKernel(2, 1.0)
        assert data_local_bound(kernel, xs) <= sup_embedding_bound(kernel, radius) + 1e-12


# ---------------------------------------------------------------------------
# kernels/linalg.py
# ---------------------------------------------------------------------------

class TestLinalg:
    def test_cholesky_of_pd_matrix_needs_no_jitter(self):
        K = np.array([[2.0, 0.5], [0.5, 1.0]])
        L, jitter = jitter_cholesky(K)
        assert jitter == 0.0
        np.testing.assert_allclose(L @ L.T, K)

    def test_cholesky_adds_jitter_to_singular_matrix(self):
        K = gram_matrix(LinearKernel(), [[1.0], [2.0]])
        L, jitter = jitter_cholesky(K)
        assert jitter > 0
        np.testing.assert_allclose(L @ L.T, K + jitter * np.eye(2))

    def test_cholesky_solve(self):
        K = np.array([[4.0, 1.0], [1.0, 3.0]])
        x = cholesky_solve(K, [1.0, 2.0])
        np.testing.assert_allclose(K @ x, [1.0, 2.0])

    def test_non_square_raises(self):
        with pytest.raises(InputDomainError):
            is_psd(np.ones((2, 3)))

    def test_indefinite_matrix(self):
        assert not is_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))


# ---------------------------------------------------------------------------
# kernels/rkhs.py
# ---------------------------------------------------------------------------

class TestRkhsFunction:
    def test_zero_function(self):
        f = RkhsFunction.zero(GaussianKernel(1.0), [[0.0], [1.0]])
        assert rkhs_norm(f) == 0.0
        assert rkhs_eval(f, [0.3]) == 0.0

    def test_single_section_norm(self):
        f = RkhsFunction.section(GaussianKernel(1.0), [0.4])
        assert rkhs_norm(f) == pytest.approx(1.0)
        assert rkhs_eval(f, [0.4]) == pytest.approx(1.0)

    def test_linear_norm_by_hand(self):
        f = RkhsFunction([[1.0], [2.0]], [1.0, -1.0], LinearKernel())
        # alpha^T K alpha = 1 - 4 + 4
        assert rkhs_norm(f) == pytest.approx(1.0)

    def test_linear_evaluation_by_hand(self):
        f = RkhsFunction([[1.0], [2.0]], [1.0, 1.0], LinearKernel())
        assert rkhs_eval(f, [3.0]) == pytest.approx(9.0)

    def test_length_mismatch(self):
        with pytest.raises(InputDomainError):
            RkhsFunction([[1.0], [2.0]], [1.0], LinearKernel())

    def test_evaluation_dimension_mismatch(self):
        f = RkhsFunction([[1.0, 0.0]], [1.0], LinearKernel())
        with pytest.raises(InputDomainError):
            f([1.0])

    def test_arithmetic_on_shared_support(self):
        kernel = GaussianKernel(1.0)
        f = RkhsFunction([[0.0], [1.0]], [1.0, 2.0], kernel)
        g = f.with_coeffs([0.5, -1.0])
        np.testing.assert_allclose((f + g).coeffs, [1.5, 1.0])
        np.testing.assert_allclose((2.0 * (f - g)).coeffs, [1.0, 6.0])
        assert (f - f).norm() == 0.0

    def test_incompatible_supports(self):
        kernel = GaussianKernel(1.0)
        f = RkhsFunction([[0.0]], [1.0], kernel)
        g = RkhsFunction([[1.0]], [1.0], kernel)
        with pytest.raises(ContractError):
            f + g

    def test_inner_product_matches_norm(self):
        f = RkhsFunction([[0.0], [0.5], [2.0]], [0.3, -1.2, 0.7], GaussianKernel(0.9))
        assert f.inner(f) == pytest.approx(f.squared_norm())

    def test_reproducing_property(self):
        kernel = GaussianKernel(0.6)
        f = RkhsFunction([[0.0], [0.5], [2.0]], [0.3, -1.2, 0.7], kernel)
        x = [0.25]
        assert f.inner(RkhsFunction.section(kernel, x)) == pytest.approx(f(x))

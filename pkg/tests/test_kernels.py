"""Backend parity and leaf-summation determinism of the hot kernels."""

import numpy as np
import pytest

from dustcocycle import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def rng():
    return np.random.default_rng(99)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestDigitKernelParity:
    def test_corner_numerators(self, rng):
        offx = np.array([0, 0, 2, 2], dtype=np.int64)
        offy = np.array([0, 2, 0, 2], dtype=np.int64)
        words = rng.integers(0, 4**9, size=5000).astype(np.int64)
        a = K._corner_numerators_jit(words, 9, offx, offy)
        b = K.corner_numerators_np(words, 9, offx, offy)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_image_bits(self, rng):
        words = rng.integers(0, 4**9, size=5000).astype(np.int64)
        a = K._dust_image_bits_jit(words, 9)
        b = K.dust_image_bits_np(words, 9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_image_bits_match_digit_semantics(self):
        # word symbols contribute x-bit s>>1 and y-bit s&1, coarse digit first
        words = np.array([0b1110, 0], dtype=np.int64)  # symbols (3, 2) and (0, 0)
        mx, my = K.dust_image_bits_np(words, 2)
        assert (mx[0], my[0]) == (0b11, 0b10)
        assert (mx[1], my[1]) == (0, 0)


class TestTraceKernelParity:
    def test_scalar_complex_values_close(self, rng):
        # complex multiply rounds differently between the two code paths
        args = [random_complex(rng, 4096) for _ in range(12)]
        a = K._scalar_kernel_jit(*args)
        b = K.scalar_kernel_np(*args)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)

    def test_scalar_real_values_bitwise_equal(self, rng):
        # real-valued observables (the hot path) evaluate identically
        args = [rng.standard_normal(4096).astype(np.complex128) for _ in range(12)]
        a = K._scalar_kernel_jit(*args)
        b = K.scalar_kernel_np(*args)
        assert np.array_equal(a.view(np.float64), b.view(np.float64))

    def test_matrix_values_close(self, rng):
        args = [np.ascontiguousarray(random_complex(rng, (512, 2, 2))) for _ in range(12)]
        a = K._matrix_kernel_jit(*args)
        b = K.matrix_kernel_np(*args)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)

    def test_matrix_kernel_supports_other_dims(self, rng):
        args = [np.ascontiguousarray(random_complex(rng, (64, 3, 3))) for _ in range(12)]
        a = K._matrix_kernel_jit(*args)
        b = K.matrix_kernel_np(*args)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


class TestLeafSums:
    def test_variants_agree(self, rng):
        vals = random_complex(rng, 4096 * 7 + 123)
        a = K._leaf_sums_jit(vals, np.int64(4096))
        b = K.leaf_sums_np(vals, 4096)
        assert a.shape == b.shape == (8,)
        assert np.allclose(a, b, rtol=1e-13)

    def test_numpy_leaves_independent_of_chunking(self, rng):
        vals = random_complex(rng, 4096 * 8)
        whole = K.leaf_sums_np(vals, 4096)
        split = np.concatenate(
            [K.leaf_sums_np(vals[i * 4096 * 2 : (i + 1) * 4096 * 2], 4096) for i in range(4)]
        )
        assert np.array_equal(whole.view(np.float64), split.view(np.float64))

    def test_numba_leaves_independent_of_chunking(self, rng):
        vals = random_complex(rng, 4096 * 8)
        whole = K._leaf_sums_jit(vals, np.int64(4096))
        split = np.concatenate(
            [
                K._leaf_sums_jit(vals[i * 4096 * 2 : (i + 1) * 4096 * 2], np.int64(4096))
                for i in range(4)
            ]
        )
        assert np.array_equal(whole.view(np.float64), split.view(np.float64))

    def test_compensation_beats_naive_on_adversarial_input(self):
        vals = np.tile([1e16, 1.0, -1e16, -1.0], 1024).astype(np.complex128)
        exact = 0.0
        got = K._leaf_sums_jit(vals, np.int64(4096))
        assert got[0].real == exact


class TestBackendSwitch:
    def test_use_backend_rebinds(self):
        try:
            K.use_backend("numpy")
            assert K.BACKEND == "numpy"
            assert K.scalar_kernel is K.scalar_kernel_np
            K.use_backend("numba")
            assert K.BACKEND == "numba"
            assert K.scalar_kernel is K._scalar_kernel_jit
        finally:
            K.use_backend("auto")

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            K.use_backend("fortran")

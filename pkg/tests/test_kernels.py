import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squintless.kernels import (KernelError, KernelParams, cutoff_half_width, g_coeff, g_table,
                                kernel_1d, kernel_1d_orders, kernel_2d, origin_curvature,
                                real_part)


def fejer4(w, n):
    w = np.asarray(w, dtype=float)
    out = np.ones_like(w)
    nz = np.abs(np.sin(np.pi * w)) > 1e-14
    out[nz] = (np.sin(np.pi * n * w[nz]) / (n * np.sin(np.pi * w[nz]))) ** 4
    return out


def test_g_small_table():
    # tri = [0, .5, 1, .5, 0] for n = 2, autocorrelation divided by n
    assert [g_coeff(k, 2) for k in range(5)] == pytest.approx([0.75, 0.5, 0.125, 0, 0])


def test_g_symmetric_and_table_matches():
    k, g = g_table(7)
    assert np.allclose(g, g[::-1])
    assert np.allclose(g, [g_coeff(int(kk), 7) for kk in k], atol=1e-15)


def test_g_out_of_support():
    with pytest.raises(KernelError, match="support"):
        g_coeff(5, 2)


def test_table_read_only():
    _, g = g_table(3)
    with pytest.raises(ValueError):
        g[0] = 1.0


@pytest.mark.parametrize("n", [2, 3, 8, 17])
def test_kernel_matches_closed_form(n):
    w = np.linspace(-0.5, 0.5, 101)
    np.testing.assert_allclose(real_part(kernel_1d(w, 1, n)), fejer4(w, n), atol=1e-13)


def test_kernel_origin_and_scalar():
    assert abs(kernel_1d(0.0, 1, 5) - 1) < 1e-14
    assert np.ndim(kernel_1d(0.1, 1, 5)) == 0


def test_highest_frequency_is_2n_minus_2():
    k, g = g_table(6)
    nz = k[np.abs(g) > 1e-15]
    assert nz.max() == 2 * 6 - 2


def test_orders_path_matches_direct(rng):
    w = rng.random(50) - 0.5
    for p in (1, 2, 3):
        fast = kernel_1d_orders(w, p, 9, 3)
        for o in range(4):
            ref = kernel_1d(w, p, 9, o)
            assert np.max(np.abs(fast[o] - ref)) <= 1e-12 * max(1, np.max(np.abs(ref)))


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.integers(1, 4), st.integers(2, 12))
def test_scaling_laws(w, p, n):
    k1 = kernel_1d_orders(p * w, 1, n, 2)
    kp = kernel_1d_orders(w, p, n, 2)
    assert abs(kp[0] - k1[0] / p) <= 1e-11 * max(1, abs(k1[0]))
    assert abs(kp[1] - k1[1]) <= 1e-11 * max(1, abs(k1[1]))
    assert abs(kp[2] - p * k1[2]) <= 1e-11 * max(1, abs(p * k1[2]))


def test_derivatives_vs_central_differences():
    h = 1e-5
    for w in (0.013, 0.2, -0.31):
        for o in (1, 2, 3):
            fd = (kernel_1d(w + h, 2, 6, o - 1) - kernel_1d(w - h, 2, 6, o - 1)) / (2 * h)
            ex = kernel_1d(w, 2, 6, o)
            assert abs(fd - ex) <= 1e-6 * max(1, abs(ex))


def test_kernel_2d_is_product():
    prm = KernelParams(3, 5)
    v = kernel_2d(0.1, 0.2, 2, prm, (1, 1))
    ref = kernel_1d(0.1, 2, 3, 1) * kernel_1d(0.2, 2, 5, 1)
    assert abs(v - ref) < 1e-14
    with pytest.raises(KernelError):
        kernel_2d(0, 0, 1, prm, (3, 2))


def test_origin_curvature_closed_form():
    for n in (2, 5, 33):
        ref = np.sum(g_table(n)[1] * (-4 * np.pi ** 2 * g_table(n)[0] ** 2)) / n
        assert origin_curvature(n) == pytest.approx(ref, rel=1e-12)
        assert real_part(kernel_1d(0.0, 1, n, 2)) == pytest.approx(ref, rel=1e-12)


def test_curvature_in_cutoff_form():
    for f in (8, 32, 128):
        n = cutoff_half_width(f)
        assert origin_curvature(n) == pytest.approx(-np.pi ** 2 * f * (f + 4) / 3, rel=1e-12)


def test_params_from_array_sizes():
    prm = KernelParams.from_array_sizes(9, 1025)
    assert (prm.n_a, prm.m_a, prm.f_c) == (2, 256, 512)
    assert (prm.n_rx, prm.n_tx) == (9, 1025)


@pytest.mark.parametrize("n", [4, 8, 10, 3])
def test_params_reject_non_4k_plus_1(n):
    with pytest.raises(KernelError, match="4k"):
        KernelParams.from_array_sizes(n, 9)


def test_real_part_guard():
    assert real_part(1 + 1e-14j) == 1.0
    with pytest.raises(KernelError, match="imaginary"):
        real_part(1 + 1e-3j)

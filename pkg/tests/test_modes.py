"""Cube algebra checks against the dense spectral path."""

import numpy as np

from ibflow import fields as F
from ibflow import modes as M
from conftest import random_real_scalar


def dense_of(cube, n):
    out = np.zeros((n, n, n), dtype=np.complex128)
    M.add_cube_to_dense(out, cube, 1.0)
    return out


def test_cube_round_trip(rng):
    f = random_real_scalar(16, 3, rng)
    cube = M.extract_cube(f.coeffs, 3)
    assert np.array_equal(dense_of(cube, 16), f.coeffs)


def test_conv_matches_dealiased_product(rng):
    f = random_real_scalar(24, 3, rng)
    g = random_real_scalar(24, 2, rng)
    cf = M.extract_cube(f.coeffs, 3)
    cg = M.extract_cube(g.coeffs, 2)
    prod_cube = M.cube_conv(cf, cg)
    exact = F.multiply_dealiased(f, g, out_grid=24)
    diff = dense_of(prod_cube, 24) - exact.coeffs
    assert np.max(np.abs(diff)) <= 1e-13 * np.max(np.abs(exact.coeffs))


def test_offsets_add(rng):
    a = M.Cube(np.array([2, 0, -1]), np.ones((1, 1, 1), dtype=complex))
    b = M.Cube(np.array([-1, 3, 0]), 2.0 * np.ones((1, 1, 1), dtype=complex))
    c = M.cube_conv(a, b)
    assert np.array_equal(c.lo, [1, 3, -1])
    assert c.data[0, 0, 0] == 2.0


def test_derivative_uses_absolute_wavenumbers(rng):
    f = random_real_scalar(16, 3, rng)
    cube = M.extract_cube(f.coeffs, 3)
    d0 = dense_of(M.cube_derivative(cube, 0), 16)
    expected = F.gradient(F.ScalarField(f.coeffs)).coeffs[0]
    assert np.max(np.abs(d0 - expected)) <= 1e-14 * (np.max(np.abs(expected)) + 1)


def test_shifted_cube_derivative(rng):
    # a cube away from the origin must differentiate with its true k
    cube = M.Cube(np.array([5, 0, 0]), np.array([[[1.0 + 0j]]]))
    d = M.cube_derivative(cube, 0)
    assert d.data[0, 0, 0] == 5j


def test_wrapping_accumulation():
    n = 8
    cube = M.Cube(np.array([3, -1, 0]), np.arange(8, dtype=complex).reshape(2, 2, 2))
    dense = np.zeros((n, n, n), dtype=np.complex128)
    M.add_cube_to_dense(dense, cube)
    for i in range(2):
        for j in range(2):
            for l in range(2):
                assert dense[(3 + i) % n, (-1 + j) % n, l] == cube.data[i, j, l]


def test_hermitian_mirror(rng):
    f = random_real_scalar(12, 3, rng)
    mirrored = M.hermitian_mirror(f.coeffs)
    assert np.max(np.abs(mirrored - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))


def test_drop_zero_mode():
    cube = M.Cube(np.array([-1, -1, -1]), np.ones((3, 3, 3), dtype=complex))
    out = M.cube_drop_zero_mode(cube)
    assert out.data[1, 1, 1] == 0
    assert out.data[0, 0, 0] == 1

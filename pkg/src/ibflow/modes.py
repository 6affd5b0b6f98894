"""Compact k-space blocks ("cubes") and exact convolution helpers.

Every building block of the construction is band-limited with modes in a
small box around a known integer offset.  Working on those boxes instead
of full N^3 arrays keeps products exact (linear convolution, no folding)
and cheap.  A cube stores its minimum absolute wavevector ``lo`` and a
dense complex array; absolute mode of ``data[i, j, l]`` is ``lo + (i, j, l)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft


@dataclass
class Cube:
    lo: np.ndarray            # (3,) int, absolute wavevector of data[0,0,0]
    data: np.ndarray          # complex, shape (sx, sy, sz) or (ncomp, sx, sy, sz)

    @property
    def shape3(self):
        return self.data.shape[-3:]

    @property
    def hi(self):
        return self.lo + np.array(self.shape3) - 1

    def copy(self) -> "Cube":
        return Cube(self.lo.copy(), self.data.copy())

    def band(self) -> int:
        return int(max(np.abs(self.lo).max(), np.abs(self.hi).max()))

    def __mul__(self, scalar) -> "Cube":
        return Cube(self.lo.copy(), self.data * scalar)

    __rmul__ = __mul__

    def shifted(self, offset) -> "Cube":
        return Cube(self.lo + np.asarray(offset, dtype=np.int64), self.data)


def cube_from_modes(ks: np.ndarray, coeffs: np.ndarray) -> Cube:
    """Scatter sparse (k, coeff) pairs into a minimal dense cube."""
    ks = np.asarray(ks, dtype=np.int64)
    lo = ks.min(axis=0)
    shape = tuple(ks.max(axis=0) - lo + 1)
    data = np.zeros(shape, dtype=np.complex128)
    idx = ks - lo
    np.add.at(data, (idx[:, 0], idx[:, 1], idx[:, 2]), coeffs)
    return Cube(lo, data)


def cube_conv(a: Cube, b: Cube) -> Cube:
    """Exact linear convolution; offsets add."""
    sa, sb = a.shape3, b.shape3
    out_shape = tuple(x + y - 1 for x, y in zip(sa, sb))
    pad = tuple(sfft.next_fast_len(s) for s in out_shape)
    fa = sfft.fftn(a.data, s=pad, axes=(-3, -2, -1))
    fb = sfft.fftn(b.data, s=pad, axes=(-3, -2, -1))
    prod = sfft.ifftn(fa * fb, axes=(-3, -2, -1))
    sl = tuple(slice(0, s) for s in out_shape)
    return Cube(a.lo + b.lo, np.ascontiguousarray(prod[(Ellipsis,) + sl]))


def cube_fft(a: Cube, pad: tuple[int, int, int]) -> np.ndarray:
    return sfft.fftn(a.data, s=pad, axes=(-3, -2, -1))


def conv_from_ffts(fa: np.ndarray, fb: np.ndarray, lo, out_shape) -> Cube:
    prod = sfft.ifftn(fa * fb, axes=(-3, -2, -1))
    sl = tuple(slice(0, s) for s in out_shape)
    return Cube(np.asarray(lo, dtype=np.int64), np.ascontiguousarray(prod[(Ellipsis,) + sl]))


def axis_wavenumbers(c: Cube):
    """Absolute integer wavenumber arrays along each axis, broadcast-ready."""
    sx, sy, sz = c.shape3
    kx = (c.lo[0] + np.arange(sx)).reshape(-1, 1, 1)
    ky = (c.lo[1] + np.arange(sy)).reshape(1, -1, 1)
    kz = (c.lo[2] + np.arange(sz)).reshape(1, 1, -1)
    return kx, ky, kz

def cube_derivative(c: Cube, axis: int) -> Cube:
    ks = axis_wavenumbers(c)[axis]
    return Cube(c.lo.copy(), 1j * ks * c.data)


def cube_directional_derivative(c: Cube, direction) -> Cube:
    kx, ky, kz = axis_wavenumbers(c)
    d = np.asarray(direction, dtype=float)
    return Cube(c.lo.copy(), 1j * (d[0] * kx + d[1] * ky + d[2] * kz) * c.data)


def cube_gradient(c: Cube) -> Cube:
    kx, ky, kz = axis_wavenumbers(c)
    data = np.stack([1j * kx * c.data, 1j * ky * c.data, 1j * kz * c.data])
    return Cube(c.lo.copy(), data)


def cube_drop_zero_mode(c: Cube) -> Cube:
    out = c.copy()
    idx = -c.lo
    if np.all(idx >= 0) and np.all(idx < np.array(c.shape3)):
        out.data[(Ellipsis,) + tuple(idx)] = 0.0
    return out


def cube_zero_mode(c: Cube) -> complex:
    idx = -c.lo
    if np.all(idx >= 0) and np.all(idx < np.array(c.shape3)):
        return complex(c.data[(Ellipsis,) + tuple(idx)]) if c.data.ndim == 3 else None
    return 0.0


def _wrapped_ranges(lo: int, size: int, n: int):
    """Split [lo, lo+size) mod n into contiguous (dst_slice, src_slice) pairs."""
    out = []
    start = lo % n
    done = 0
    while done < size:
        chunk = min(size - done, n - start)
        out.append((slice(start, start + chunk), slice(done, done + chunk)))
        start = (start + chunk) % n
        done += chunk
    return out


def add_cube_to_dense(dense: np.ndarray, c: Cube, weight=1.0):
    """dense[k] += weight * cube, indices taken modulo the grid size.

    Works for matching leading dimensions (scalar cube into scalar dense,
    vector cube into vector dense).
    """
    n = dense.shape[-1]
    sx, sy, sz = c.shape3
    if max(sx, sy, sz) > n:
        raise ValueError("cube larger than target grid")
    for dx, sx_ in _wrapped_ranges(int(c.lo[0]), sx, n):
        for dy, sy_ in _wrapped_ranges(int(c.lo[1]), sy, n):
            for dz, sz_ in _wrapped_ranges(int(c.lo[2]), sz, n):
                dense[(Ellipsis, dx, dy, dz)] += weight * c.data[(Ellipsis, sx_, sy_, sz_)]


def extract_cube(dense: np.ndarray, band: int) -> Cube:
    """Centered cube of half-width ``band`` read out of a dense spectral array."""
    n = dense.shape[-1]
    size = 2 * band + 1
    lead = dense.shape[:-3]
    data = np.zeros(lead + (size,) * 3, dtype=np.complex128)
    for dx, sx_ in _wrapped_ranges(-band, size, n):
        for dy, sy_ in _wrapped_ranges(-band, size, n):
            for dz, sz_ in _wrapped_ranges(-band, size, n):
                data[(Ellipsis, sx_, sy_, sz_)] = dense[(Ellipsis, dx, dy, dz)]
    return Cube(np.array([-band] * 3, dtype=np.int64), data)


def hermitian_mirror(dense: np.ndarray) -> np.ndarray:
    """conj(D[-k]) of a dense spectral array."""
    axes = (-3, -2, -1)
    return np.conj(np.roll(np.flip(dense, axis=axes), 1, axis=axes))

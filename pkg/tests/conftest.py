import numpy as np
import pytest

from ibflow import fields as F


def random_real_scalar(n: int, band: int, rng: np.random.Generator) -> F.ScalarField:
    """Random real scalar field with |k|_inf <= band (Hermitian by symmetrization)."""
    c = np.zeros((n, n, n), dtype=np.complex128)
    ks = list(range(-band, band + 1))
    for kx in ks:
        for ky in ks:
            for kz in ks:
                c[kx % n, ky % n, kz % n] = rng.normal() + 1j * rng.normal()
    f = F.ScalarField(c)
    return F.hermitianize(f)


def random_real_vector(n: int, band: int, rng: np.random.Generator) -> F.VectorField:
    comps = [random_real_scalar(n, band, rng).coeffs for _ in range(3)]
    return F.VectorField(np.stack(comps))


def single_mode_scalar(n: int, k, coef) -> F.ScalarField:
    """coef * exp(i k.x) + conjugate mode (real field)."""
    f = F.ScalarField.zero(n)
    kx, ky, kz = (int(v) for v in k)
    f.coeffs[kx % n, ky % n, kz % n] = coef
    f.coeffs[-kx % n, -ky % n, -kz % n] += np.conj(coef)
    return f


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

"""Order minus-one symmetric anti-divergence and the commutator-decay probe.

``anti_divergence`` returns the symmetric, trace-free tensor R(u) with
``div R(u) = u - mean(u)``, assembled as an exact Fourier multiplier:
solve ``Laplace v = u - mean(u)`` per mode, then combine the displayed
gradient terms.  Trace-freeness is structural: the only trace
contribution is the divergence of the solenoidal projection, which
vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fields as F
from .fields import SYM6


@dataclass
class AntiDivResult:
    tensor: F.SymTensorField
    mean_removed: np.ndarray  # the subtracted average of the input


def anti_divergence(u: F.VectorField) -> AntiDivResult:
    n = u.grid_size
    mean = u.mean()
    inv_k2 = F.inv_ksq(n)
    kvec = F.wavenumbers(n)

    v = u.coeffs * inv_k2
    v *= -1.0

    kdotv = kvec[0] * v[0]
    kdotv += kvec[1] * v[1]
    kdotv += kvec[2] * v[2]
    kdotv_over_k2 = kdotv * inv_k2

    # expanding the solenoidal projection leaves, per component (i, j):
    # i [ k_i v_j + k_j v_i - (1/2) k_i k_j (k.v)/k^2 ] - [i=j] (i/2)(k.v)
    out = np.empty((6, n, n, n), dtype=np.complex128)
    for c, (i, j) in enumerate(SYM6):
        np.multiply(kvec[i], v[j], out=out[c])
        out[c] += kvec[j] * v[i]
        out[c] -= (0.5 * kvec[i] * kvec[j]) * kdotv_over_k2
        out[c] *= 1j
        if i == j:
            out[c] -= 0.5j * kdotv
    return AntiDivResult(tensor=F.SymTensorField(out), mean_removed=mean)


def anti_divergence_coeffs(u_coeffs: np.ndarray) -> np.ndarray:
    """Array-level variant used by the stress assembly (same multiplier)."""
    return anti_divergence(F.VectorField(u_coeffs)).tensor.coeffs


def anti_divergence_component(u: F.VectorField, i: int, j: int) -> np.ndarray:
    """One component of the anti-divergence without materializing all six.

    Recomputes the per-mode solves on demand; used by large-grid sweeps
    where the full six-component tensor would not fit in memory.
    """
    n = u.grid_size
    k2 = F.ksq(n)
    kx, ky, kz = F.wavenumbers(n)
    kvec = (kx, ky, kz)

    def v_comp(c):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -u.coeffs[c] / k2
        out[0, 0, 0] = 0.0
        return out

    vi, vj = v_comp(i), v_comp(j)
    kdotv = sum(kvec[c] * v_comp(c) for c in range(3))
    with np.errstate(divide="ignore", invalid="ignore"):
        kdotv_over_k2 = kdotv / k2
    kdotv_over_k2[0, 0, 0] = 0.0
    gi = vi - kvec[i] * kdotv_over_k2
    gj = vj - kvec[j] * kdotv_over_k2
    out = 0.25j * (kvec[i] * gj + kvec[j] * gi) + 0.75j * (kvec[i] * vj + kvec[j] * vi)
    if i == j:
        out -= 0.5j * kdotv
    return out


def commutator_decay_probe(
    a: F.ScalarField, f: F.ScalarField, k_list, p: float = 2.0, shell_normalize: bool = True
) -> dict:
    """Measure || |grad|^{-1} P_neq0 (a P_{>=k} f) ||_p across a k-sweep.

    With ``shell_normalize`` (default) each sweep point feeds the
    operator the dyadic shell ``P_[k,2k) f`` rescaled to unit L^p norm,
    which is the input class the estimate controls; the measured norms
    then decay like k^{-1}.  Returns measured norms, the reference bound
    ``k^{-1} ||hess a||_inf ||input||_p``, their ratios, and the log-log
    slope of the measured norms in k.
    """
    hess_sup = hessian_sup_norm(a)
    measured, bounds = [], []
    for k in k_list:
        if shell_normalize:
            hi = F.fourier_project(f, float(k), 2.0 * float(k))
            nrm = F.lebesgue_norm(hi, p)
            if nrm == 0:
                raise ValueError(f"input field has no modes in the shell [{k}, {2*k})")
            hi = (1.0 / nrm) * hi
        else:
            hi = F.fourier_project(f, float(k), np.inf)
        prod = F.pointwise_product(a, hi)
        val = F.lebesgue_norm(F.inverse_gradient_norm(F.project_nonzero(prod)), p)
        measured.append(val)
        bounds.append(hess_sup * F.lebesgue_norm(hi, p) / float(k))
    from .waves import loglog_slope

    return {
        "k": list(k_list),
        "measured": measured,
        "bound": bounds,
        "ratio": [m / b for m, b in zip(measured, bounds)],
        "slope": loglog_slope(k_list, measured),
    }


def hessian_sup_norm(a: F.ScalarField) -> float:
    """Grid sup of the Frobenius norm of the Hessian of a."""
    n = a.grid_size
    kx, ky, kz = F.wavenumbers(n)
    kvec = (kx, ky, kz)
    total = np.zeros((n, n, n))
    for i in range(3):
        for j in range(3):
            comp = F.ScalarField(-kvec[i] * kvec[j] * a.coeffs).physical()
            total += comp**2
    return float(np.sqrt(total).max())

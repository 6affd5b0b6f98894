"""Dirichlet kernels, directed intermittent phases, and Beltrami waves.

The intermittent phase attached to a direction is a Dirichlet kernel
composed with the rotation onto that direction's orthonormal frame,
rescaled so every mode lands on the integer lattice, and translated in
time along the first frame coordinate.  Time dependence is kept
symbolic: each mode carries an integer phase rate, so time derivatives
are exact multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import fields as F
from . import modes as M
from .geometry import Direction, DIRECTIONS, LAMBDA_PLUS, negate


class ParamRejected(ValueError):
    """Parameter combination cannot be realized on the integer lattice."""


@dataclass(frozen=True)
class WaveParams:
    """Frequency/concentration/oscillation parameters of one wave family.

    ``lam`` is the carrier frequency, ``sigma`` the relative spacing of
    the kernel comb (an exact rational with unit numerator), ``r`` the
    kernel half-width in mode counts, and ``mu`` the temporal
    oscillation rate.  Construction enforces only lattice realizability;
    the analytic admissibility chain is reported by :meth:`flags` and
    enforced on demand by :meth:`require`.
    """

    lam: int
    sigma: Fraction
    r: int
    mu: float

    def __post_init__(self):
        sigma = Fraction(self.sigma)
        object.__setattr__(self, "sigma", sigma)
        if self.lam <= 0 or self.lam % 5 != 0:
            raise ParamRejected(f"lambda must be a positive multiple of 5, got {self.lam}")
        if sigma <= 0 or sigma.numerator != 1:
            raise ParamRejected(f"sigma must be a unit fraction in (0,1], got {sigma}")
        ls = self.lam * sigma
        if ls.denominator != 1 or int(ls) % 5 != 0:
            raise ParamRejected(f"lambda*sigma must be a positive multiple of 5, got {ls}")
        if self.r < 1:
            raise ParamRejected(f"r must be a positive integer, got {self.r}")
        if self.mu <= 0:
            raise ParamRejected("mu must be positive")

    @property
    def lam_sigma(self) -> int:
        return int(self.lam * self.sigma)

    def flags(self) -> dict[str, bool]:
        ls_r = self.lam_sigma * self.r
        return {
            "chain": 0 < self.sigma < 1 < self.r < self.lam < self.mu < self.lam**2,
            "sigma_r_lt_1": self.sigma * self.r < 1,
            "mu_ge_r32": self.mu >= self.r**1.5,
            "band_sufficient": 2 * np.sqrt(3) * ls_r <= self.lam / 2,
            "band_single_exact": band_support_single(self)["holds"],
            "band_tensor_exact": band_support_tensor(self)["holds"],
        }

    def require(self, *names: str):
        flags = self.flags()
        bad = [n for n in names if not flags[n]]
        if bad:
            raise ParamRejected(f"wave parameters violate {bad}: {self}")

    def __str__(self):
        return f"(lam={self.lam}, sigma={self.sigma}, r={self.r}, mu={self.mu})"


# ---------------------------------------------------------------------------
# kernels and phases


def dirichlet_kernel(r: int, grid: int) -> F.ScalarField:
    """Normalized full-cube Dirichlet kernel with modes |k|_inf <= r."""
    if r < 1:
        raise ValueError("kernel order must be >= 1")
    if grid // 2 - 1 < r:
        raise F.BandwidthError(r, grid)
    f = F.ScalarField.zero(grid)
    amp = (2 * r + 1) ** -1.5
    idx = np.arange(-r, r + 1) % grid
    f.coeffs[np.ix_(idx, idx, idx)] = amp
    return f


def _frame_mode_table(d: Direction, wp: WaveParams):
    """Integer mode vectors lam*sigma*(n1 xi + n2 A + n3 C) and their n1."""
    ls = wp.lam_sigma
    if ls % 5 != 0:
        raise ParamRejected("lattice requires lambda*sigma in 5N")
    base = ls // 5
    five_xi = np.rint(5 * d.xi).astype(np.int64)
    five_a = np.rint(5 * d.a_vec).astype(np.int64)
    c_int = np.rint(d.c_vec).astype(np.int64)
    if not np.allclose(c_int, d.c_vec, atol=1e-12):
        raise ParamRejected("frame completion is not an integer vector")
    rng = np.arange(-wp.r, wp.r + 1, dtype=np.int64)
    n1, n2, n3 = np.meshgrid(rng, rng, rng, indexing="ij")
    n1, n2, n3 = n1.ravel(), n2.ravel(), n3.ravel()
    ks = (
        n1[:, None] * (base * five_xi)[None, :]
        + n2[:, None] * (base * five_a)[None, :]
        + n3[:, None] * (ls * c_int)[None, :]
    )
    return ks, n1


@dataclass
class IntermittentPhase:
    """Directed, rescaled kernel with symbolic time phases.

    For directions in the negative half-set the phase equals that of the
    positive partner; the stored ``direction`` keeps the caller's sign so
    transport-identity bookkeeping stays explicit.
    """

    direction: Direction
    params: WaveParams
    ks: np.ndarray = field(repr=False)      # (M, 3) integer modes
    n1: np.ndarray = field(repr=False)      # (M,) first rotated coordinate index
    amplitude: float = 0.0

    @classmethod
    def build(cls, d: Direction, wp: WaveParams) -> "IntermittentPhase":
        rep = d if d.sign > 0 else negate(d)
        ks, n1 = _frame_mode_table(rep, wp)
        return cls(direction=d, params=wp, ks=ks, n1=n1,
                   amplitude=(2 * wp.r + 1) ** -1.5)

    @property
    def omega(self) -> float:
        """Phase rate per unit n1 (always attached to the positive frame)."""
        return float(self.params.lam_sigma * self.params.mu)

    def coeffs_at(self, t: float) -> np.ndarray:
        return self.amplitude * np.exp(1j * self.omega * self.n1 * t)

    def cube(self, t: float) -> M.Cube:
        return M.cube_from_modes(self.ks, self.coeffs_at(t))

    def dt_cube(self, t: float, order: int = 1) -> M.Cube:
        rate = (1j * self.omega * self.n1) ** order
        return M.cube_from_modes(self.ks, rate * self.coeffs_at(t))

    def field(self, t: float, grid: int) -> F.ScalarField:
        out = F.ScalarField.zero(grid)
        if np.abs(self.ks).max() > grid // 2 - 1:
            raise F.BandwidthError(int(np.abs(self.ks).max()), grid)
        M.add_cube_to_dense(out.coeffs, self.cube(t))
        return out

    def dt_field(self, t: float, grid: int) -> F.ScalarField:
        out = F.ScalarField.zero(grid)
        M.add_cube_to_dense(out.coeffs, self.dt_cube(t))
        return out

    def kernel_band(self) -> int:
        return int(np.abs(self.ks).max())


def intermittent_phase(d: Direction, wp: WaveParams) -> IntermittentPhase:
    return IntermittentPhase.build(d, wp)


def beltrami_wave(d: Direction, lam: int, grid: int) -> F.VectorField:
    """Single-mode complex Beltrami wave; real combinations pair +-xi."""
    if lam % 5 != 0 or lam <= 0:
        raise ParamRejected(f"lambda must be a positive multiple of 5, got {lam}")
    k = np.rint(lam * d.xi).astype(int)
    if np.abs(k).max() > grid // 2 - 1:
        raise F.BandwidthError(int(np.abs(k).max()), grid)
    v = F.VectorField.zero(grid)
    n = grid
    v.coeffs[:, k[0] % n, k[1] % n, k[2] % n] = d.b_vec
    return v


def wave_carrier(d: Direction, lam: int) -> tuple[np.ndarray, np.ndarray]:
    """(integer wavevector, polarization vector) of the plane-wave factor."""
    return np.rint(lam * d.xi).astype(np.int64), d.b_vec


def intermittent_beltrami(d: Direction, wp: WaveParams, t: float, grid: int) -> F.VectorField:
    """The modulated wave: phase times the plane-wave carrier (complex field)."""
    carrier_k, b = wave_carrier(d, wp.lam)
    phase = intermittent_phase(d, wp)
    cube = phase.cube(t).shifted(carrier_k)
    band = max(np.abs(cube.lo).max(), np.abs(cube.hi).max())
    if band > grid // 2 - 1:
        raise F.BandwidthError(int(band), grid)
    out = F.VectorField.zero(grid)
    for i in range(3):
        M.add_cube_to_dense(out.coeffs[i], cube, b[i])
    return out


def wave_band(wp: WaveParams) -> int:
    """Max |k|_inf over all modes of all twelve modulated waves."""
    best = 0
    for d in LAMBDA_PLUS:
        ks, _ = _frame_mode_table(d, wp)
        carrier = np.rint(wp.lam * d.xi).astype(np.int64)
        for sgn in (+1, -1):
            best = max(best, int(np.abs(sgn * carrier + ks).max()))
    return best


def kernel_band(wp: WaveParams) -> int:
    return max(int(np.abs(_frame_mode_table(d, wp)[0]).max()) for d in LAMBDA_PLUS)


# ---------------------------------------------------------------------------
# exact band-support facts


def band_support_single(wp: WaveParams) -> dict:
    """Exact lattice check of the single-wave band fact |k| in [lam/2, 2 lam)."""
    lam = wp.lam
    lo_ok, hi_ok = True, True
    min_sq, max_sq = np.inf, 0
    for d in LAMBDA_PLUS:
        ks, _ = _frame_mode_table(d, wp)
        carrier = np.rint(lam * d.xi).astype(np.int64)
        modes = carrier[None, :] + ks
        sq = np.sum(modes * modes, axis=1)
        min_sq = min(min_sq, int(sq.min()))
        max_sq = max(max_sq, int(sq.max()))
    lo_ok = 4 * min_sq >= lam * lam
    hi_ok = max_sq < 4 * lam * lam
    return {
        "holds": bool(lo_ok and hi_ok),
        "min_abs": float(np.sqrt(min_sq)),
        "max_abs": float(np.sqrt(max_sq)),
        "lower_edge": lam / 2,
        "upper_edge": 2 * lam,
    }


def band_support_tensor(wp: WaveParams) -> dict:
    """Exact lattice check of the pair-product fact |k| in [lam/5, 4 lam).

    Enumerates every mode of every product of two modulated waves over
    ordered direction pairs whose carriers do not cancel.
    """
    lam = wp.lam
    min_sq, max_sq = np.inf, 0
    worst = None
    tables = {d.index: _frame_mode_table(d, wp)[0] for d in LAMBDA_PLUS}

    def modes_of(d):
        ks = tables[(d if d.sign > 0 else negate(d)).index]
        carrier = np.rint(lam * d.xi).astype(np.int64)
        return carrier[None, :] + ks

    all_modes = {d.index: modes_of(d) for d in DIRECTIONS}
    for d1 in DIRECTIONS:
        for d2 in DIRECTIONS:
            if d2.index == negate(d1).index:
                continue
            m1 = all_modes[d1.index]
            m2 = all_modes[d2.index]
            total = m1[:, None, :] + m2[None, :, :]
            sq = np.einsum("abi,abi->ab", total, total)
            lo = int(sq.min())
            if lo < min_sq:
                min_sq = lo
                amin = np.unravel_index(int(sq.argmin()), sq.shape)
                worst = (d1.five_xi, d2.five_xi, tuple(int(v) for v in total[amin]))
            max_sq = max(max_sq, int(sq.max()))
    holds = (25 * min_sq >= lam * lam) and (max_sq < 16 * lam * lam)
    return {
        "holds": bool(holds),
        "min_abs": float(np.sqrt(min_sq)),
        "max_abs": float(np.sqrt(max_sq)),
        "lower_edge": lam / 5,
        "upper_edge": 4 * lam,
        "worst_pair": worst,
    }


# ---------------------------------------------------------------------------
# scaling measurements


@dataclass
class ScalingFit:
    family: str
    p: float
    param_name: str
    params: list
    norms: list
    slope: float
    predicted: float

    @property
    def rel_err(self) -> float:
        if self.predicted == 0:
            return abs(self.slope)
        return abs(self.slope - self.predicted) / abs(self.predicted)


def loglog_slope(xs, ys) -> float:
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])


def measure_norm_scaling(
    family,
    params: list,
    p_list: list,
    predicted_exponent,
    family_name: str = "family",
    param_name: str = "r",
) -> list[ScalingFit]:
    """Least-squares log-log slopes of ||family(param)||_p against params.

    ``family`` maps a parameter value to a field; ``predicted_exponent``
    maps p to the expected slope.
    """
    fits = []
    fields_cache = [family(v) for v in params]
    for p in p_list:
        norms = [F.lebesgue_norm(f, p) for f in fields_cache]
        fits.append(
            ScalingFit(
                family=family_name,
                p=p,
                param_name=param_name,
                params=list(params),
                norms=norms,
                slope=loglog_slope(params, norms),
                predicted=float(predicted_exponent(p)),
            )
        )
    return fits

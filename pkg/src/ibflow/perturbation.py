"""Temporal cutoff, energy density, amplitudes, and the velocity increment.

Pipeline for one sample time t of the iteration round:

* ``TimeCutoff`` gives the smooth ramp psi equal to 1 on the stress
  support, supported in its delta-neighborhood, with sup |psi'| <= 2/delta;
* ``build_rho`` evaluates the energy density pointwise on the grid;
* ``AmplitudeBuilder`` forms the amplitude fields: the coefficient of
  each direction solves the geometric decomposition per grid point, so
  the reconstruction identity holds to rounding.  The perturbation uses
  the band-limited truncation ``a~ = P_B a`` of each amplitude, which
  keeps every later product and Leibniz step exact on the lattice; the
  truncation mismatch is carried through the stress assembly as an
  explicit reported component;
* ``build_perturbation`` assembles the principal, corrector, and
  temporal parts together with their exact-in-the-fast-factor time
  derivatives (slow factors differenced at 4th order).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.fft as sfft

from . import fields as F
from . import modes as M
from .geometry import DIRECTIONS, LAMBDA_PLUS, M_INVERSE, negate
from .intervals import IntervalUnion
from .waves import IntermittentPhase, WaveParams, intermittent_phase, wave_carrier

RAMP_FRACTION = Fraction(4, 5)  # psi ramp width as a fraction of delta
FD_STEP_FRACTION = 1e-3         # slow-factor FD step as a fraction of ramp width


class OutsideBallError(ValueError):
    """Amplitude square went nonpositive somewhere on the grid."""

    def __init__(self, value: float, location):
        self.location = tuple(int(i) for i in location)
        super().__init__(
            f"amplitude square {value:.3e} at grid point {self.location}; "
            "stress left the admissible ball"
        )


# ---------------------------------------------------------------------------
# smooth profiles


def _ramp(u):
    """Exp-based smoothstep: 0 for u<=0, 1 for u>=1, C-infinity monotone."""
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        f = np.where(u > 0, np.exp(-1.0 / (2.0 * np.maximum(u, 1e-300))), 0.0)
        g = np.where(u < 1, np.exp(-1.0 / (2.0 * np.maximum(1.0 - u, 1e-300))), 0.0)
    return f / (f + g)


def _ramp_prime(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0) & (u < 1)
    us = np.where(inside, u, 0.5)
    f = np.exp(-1.0 / (2.0 * us))
    g = np.exp(-1.0 / (2.0 * (1.0 - us)))
    fp = f / (2.0 * us**2)
    gp = -g / (2.0 * (1.0 - us) ** 2)
    val = (fp * g - f * gp) / (f + g) ** 2
    return np.where(inside, val, 0.0)


RAMP_PRIME_MAX = float(np.max(_ramp_prime(np.linspace(0, 1, 200001))))


def chi(s):
    """Smooth increasing interpolant: 1 on [0,1], s on [2,inf).

    On (1,2): ``1 + (s-1) E((s-1)^{1/6})`` with E the exp smoothstep;
    C-infinity at both junctions, monotone, and chi(s) >= s/1.04 so the
    admissible-ball margin of the working radius absorbs the dip.
    """
    s = np.asarray(s, dtype=float)
    mid = 1.0 + (s - 1.0) * _ramp(np.abs(s - 1.0) ** (1.0 / 6.0))
    return np.where(s <= 1.0, 1.0, np.where(s >= 2.0, s, mid))


CHI_MAX_RATIO = float(np.max(np.linspace(1, 2, 200001) / chi(np.linspace(1, 2, 200001))))


@dataclass(frozen=True)
class TimeCutoff:
    """Smooth time window: 1 on ``support``, zero outside its neighborhood."""

    support: IntervalUnion
    delta: Fraction

    @property
    def ramp_width(self) -> Fraction:
        return RAMP_FRACTION * Fraction(self.delta)

    @property
    def window(self) -> IntervalUnion:
        """Closure of supp psi (exact rational endpoints)."""
        return self.support.neighborhood(self.ramp_width)

    def _pieces(self):
        w = float(self.ramp_width)
        return [(float(a), float(b), w) for a, b in self.window.intervals]

    def psi(self, t: float) -> float:
        total = 0.0
        for lo, hi, w in self._pieces():
            if lo <= t <= hi:
                u_up = (t - lo) / w
                u_dn = (hi - t) / w
                total += float(_ramp(min(u_up, 1.0)) * _ramp(min(u_dn, 1.0)))
        return total

    def psi_prime(self, t: float) -> float:
        total = 0.0
        for lo, hi, w in self._pieces():
            if lo <= t <= hi:
                u_up = (t - lo) / w
                u_dn = (hi - t) / w
                up, dn = float(_ramp(min(u_up, 1.0))), float(_ramp(min(u_dn, 1.0)))
                dup = float(_ramp_prime(u_up)) / w if u_up < 1 else 0.0
                ddn = -float(_ramp_prime(u_dn)) / w if u_dn < 1 else 0.0
                total += dup * dn + up * ddn
        return total

    def fd_step(self) -> float:
        return FD_STEP_FRACTION * float(self.ramp_width) if not self.support.is_empty() else 1e-6


def time_cutoff(support: IntervalUnion, delta) -> TimeCutoff:
    """Cutoff equal to 1 on ``support`` (gaps below two ramp widths bridged)."""
    if Fraction(delta) <= 0:
        raise ValueError("delta must be positive")
    w = RAMP_FRACTION * Fraction(delta)
    # widening by one ramp merges intervals whose gap is < 2 ramps; shrinking
    # back leaves a plateau covering the support plus any bridged gaps
    plateau = IntervalUnion.from_pairs(
        (a + w, b - w) for a, b in support.neighborhood(w).intervals
    )
    return TimeCutoff(support=plateau, delta=Fraction(delta))


# ---------------------------------------------------------------------------
# energy density and amplitudes


# (Id - xi xi)_c per positive direction d and stored component c; equals
# B_d x B_-d + B_-d x B_d, the matrix shape each squared amplitude carries
_PROJ6 = np.array(
    [
        [(np.eye(3) - np.outer(d.xi, d.xi))[i, j] for (i, j) in F.SYM6]
        for d in LAMBDA_PLUS
    ]
)


def frobenius_field(r: F.SymTensorField) -> np.ndarray:
    vals = F.physical_components(r)
    w = F.SYM6_WEIGHT.reshape(6, 1, 1, 1)
    return np.sqrt(np.sum(w * vals * vals, axis=0))


def build_rho(
    r_field: F.SymTensorField, psi_value: float, delta: float, eps_gamma: float
) -> np.ndarray:
    """Energy density on the grid: eps^-1 delta chi(|R|/delta) psi^2."""
    if psi_value == 0.0:
        return np.zeros((r_field.grid_size,) * 3)
    absr = frobenius_field(r_field)
    return (psi_value**2 / eps_gamma) * delta * chi(absr / delta)


@dataclass
class AmplitudeSet:
    """Amplitude fields of one sample time on the construction grid."""

    t: float
    grid: int
    psi_value: float
    rho_phys: np.ndarray                # (n,n,n) real
    a_phys: np.ndarray                  # (6,n,n,n) real, half-set order
    a_tilde: list                       # 6 cubes, band-limited amplitudes
    slow_band: int
    identity_error: float               # reconstruction defect, absolute
    identity_scale: float
    min_a_sq: float

    def rho_l1(self) -> float:
        return float(np.mean(np.abs(self.rho_phys)))

    def a_l2(self, i: int) -> float:
        return float(np.sqrt(np.mean(self.a_phys[i] ** 2)))


class AmplitudeBuilder:
    """Evaluates amplitude fields at arbitrary times.

    ``r_of_t`` supplies the current stress; the reduced grid keeps the
    finite-difference neighbors cheap.  The band-limited amplitudes are
    what the perturbation consumes; the pointwise fields feed the
    reconstruction certificate.
    """

    def __init__(
        self,
        r_of_t: Callable[[float], F.SymTensorField],
        cutoff: TimeCutoff,
        delta: float,
        eps_gamma: float,
        grid: int,
        slow_band: int,
        fd_grid: int | None = None,
    ):
        self.r_of_t = r_of_t
        self.cutoff = cutoff
        self.delta = float(delta)
        self.eps_gamma = float(eps_gamma)
        self.grid = grid
        self.slow_band = slow_band
        self.fd_grid = fd_grid or min(grid, 96)

    def _r_values(self, t: float, n: int) -> np.ndarray:
        r_field = self.r_of_t(t)
        if r_field.grid_size != n:
            r_field = F.resize(r_field, n)
        return F.physical_components(r_field)

    def _a_squared(self, t: float, grid: int, r_vals: np.ndarray | None = None):
        """(rho, a^2 per half-set direction, R values) pointwise on the grid."""
        psi_val = self.cutoff.psi(t)
        n = grid
        if psi_val == 0.0:
            return psi_val, np.zeros((n, n, n)), np.zeros((6, n, n, n)), None
        if r_vals is None:
            r_vals = self._r_values(t, n)
        absr = np.sqrt(
            np.einsum("c,cxyz,cxyz->xyz", F.SYM6_WEIGHT, r_vals, r_vals)
        )
        rho = (psi_val**2 / self.eps_gamma) * self.delta * chi(absr / self.delta)
        a_sq = np.einsum("dc,cxyz->dxyz", -M_INVERSE, r_vals)
        a_sq += 0.25 * rho[None]
        return psi_val, rho, a_sq, r_vals

    def _zero_block(self) -> M.Cube:
        size = 2 * self.slow_band + 1
        return M.Cube(np.array([-self.slow_band] * 3), np.zeros((size,) * 3, dtype=complex))

    def at(self, t: float) -> AmplitudeSet:
        n = self.grid
        psi_val, rho, a_sq, r_vals = self._a_squared(t, n)
        if psi_val == 0.0:
            return AmplitudeSet(
                t=t, grid=n, psi_value=0.0, rho_phys=rho,
                a_phys=a_sq, a_tilde=[self._zero_block() for _ in range(6)],
                slow_band=self.slow_band,
                identity_error=0.0, identity_scale=1.0, min_a_sq=0.0,
            )
        min_a_sq = float(a_sq.min())
        scale = float(np.abs(a_sq).max()) or 1.0
        if min_a_sq < -1e-12 * scale:
            loc = np.unravel_index(int(a_sq.argmin()), a_sq.shape)
            raise OutsideBallError(min_a_sq, loc[1:])
        a = np.sqrt(np.maximum(a_sq, 0.0))
        del a_sq
        ident_err, ident_scale = self._identity_defect(rho, a, r_vals)
        a_tilde = [
            M.extract_cube(sfft.fftn(a[i]) / n**3, self.slow_band) for i in range(6)
        ]
        return AmplitudeSet(
            t=t, grid=n, psi_value=psi_val, rho_phys=rho, a_phys=a,
            a_tilde=a_tilde, slow_band=self.slow_band,
            identity_error=ident_err, identity_scale=ident_scale, min_a_sq=min_a_sq,
        )

    def _identity_defect(self, rho: np.ndarray, a: np.ndarray, r_vals: np.ndarray):
        """max | sum_Lambda a^2 B x B_- - (rho Id - R) | over grid and entries."""
        defect = np.einsum("dc,dxyz,dxyz->cxyz", _PROJ6, a, a)
        defect += r_vals
        for c in range(3):
            defect[c] -= rho
        err = float(np.max(np.abs(defect)))
        scale = float(max(np.max(np.abs(r_vals)), np.max(rho), 1e-300))
        return err, scale

    def tilde_blocks(self, t: float) -> list:
        """Band-limited amplitude cubes via the reduced grid (FD neighbors)."""
        n = self.fd_grid
        psi_val, _, a_sq, _ = self._a_squared(t, n)
        if psi_val == 0.0:
            return [self._zero_block() for _ in range(6)]
        min_a_sq = float(a_sq.min())
        scale = float(np.abs(a_sq).max()) or 1.0
        if min_a_sq < -1e-12 * scale:
            loc = np.unravel_index(int(a_sq.argmin()), a_sq.shape)
            raise OutsideBallError(min_a_sq, loc[1:])
        a = np.sqrt(np.maximum(a_sq, 0.0))
        return [M.extract_cube(sfft.fftn(a[i]) / n**3, self.slow_band) for i in range(6)]

    def fd_tilde(self, t: float) -> list:
        """4th-order central difference of the band-limited amplitudes."""
        h = self.cutoff.fd_step()
        stencil = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)]
        blocks = [self._zero_block() for _ in range(6)]
        for off, w in stencil:
            for acc, b in zip(blocks, self.tilde_blocks(t + off * h)):
                acc.data += w * b.data
        return [M.Cube(b.lo, b.data / (12.0 * h)) for b in blocks]


# ---------------------------------------------------------------------------
# shared cube bundles


@dataclass
class DirBundle:
    """Per-direction cubes shared by the increment and the stress assembly."""

    eta: M.Cube
    deta: M.Cube
    q: M.Cube                # a~ * a~
    dq: M.Cube               # d_t(a~^2) = 2 a~ d_t a~
    eta2: M.Cube
    eta2_nz: M.Cube          # P_neq0 eta^2
    deta2: M.Cube
    base_q_eta2nz: M.Cube    # (a~^2)(P_neq0 eta^2)
    grad_q_eta2nz: list      # (d_ax a~^2)(P_neq0 eta^2), ax = 0..2
    dq_eta2: M.Cube          # d_t(a~^2) eta^2
    q_deta2: M.Cube          # a~^2 d_t(eta^2)


def _padded(c: M.Cube, pad):
    return M.cube_fft(c, pad)


def build_dir_bundles(amps: "AmplitudeSet", fd_blocks: list, phases: dict, t: float) -> list:
    """One bundle per half-set direction with shared padded transforms."""
    out = []
    for i in range(6):
        eta = phases[i].cube(t)
        deta = phases[i].dt_cube(t)
        block, dblock = amps.a_tilde[i], fd_blocks[i]
        q = M.cube_conv(block, block)
        dq = M.Cube(q.lo.copy(), 2.0 * M.cube_conv(block, dblock).data)
        eta2 = M.cube_conv(eta, eta)
        deta2 = M.Cube(eta2.lo.copy(), 2.0 * M.cube_conv(eta, deta).data)
        eta2_nz = M.cube_drop_zero_mode(eta2)

        out_shape = tuple(a + b - 1 for a, b in zip(q.shape3, eta2.shape3))
        pad = tuple(int(sfft.next_fast_len(s)) for s in out_shape)
        lo = q.lo + eta2.lo
        f_q = _padded(q, pad)
        f_dq = _padded(dq, pad)
        f_e2 = _padded(eta2, pad)
        f_e2nz = _padded(eta2_nz, pad)
        f_de2 = _padded(deta2, pad)
        base = M.conv_from_ffts(f_q, f_e2nz, lo, out_shape)
        grad = []
        for ax in range(3):
            d_prime = M.conv_from_ffts(
                f_q, _padded(M.cube_derivative(eta2_nz, ax), pad), lo, out_shape
            )
            # conv(d_ax q, e) = d_ax conv(q, e) - conv(q, d_ax e), exactly
            grad.append(
                M.Cube(base.lo.copy(), M.cube_derivative(base, ax).data - d_prime.data)
            )
        dq_eta2 = M.conv_from_ffts(f_dq, f_e2, lo, out_shape)
        q_deta2 = M.conv_from_ffts(f_q, f_de2, lo, out_shape)
        out.append(
            DirBundle(
                eta=eta, deta=deta, q=q, dq=dq, eta2=eta2, eta2_nz=eta2_nz,
                deta2=deta2, base_q_eta2nz=base, grad_q_eta2nz=grad,
                dq_eta2=dq_eta2, q_deta2=q_deta2,
            )
        )
    return out


# ---------------------------------------------------------------------------
# velocity increment


@dataclass
class PerturbationParts:
    """The three-part increment and its hybrid time derivatives at one time.

    The slim build retains only what the stress assembly needs (w, d_t w,
    the principal part, and the time derivative of its curl
    representation); the full build keeps every part for diagnostics.
    Certificates evaluated during assembly live in ``stats``.
    """

    t: float
    grid: int
    params: WaveParams
    w: F.VectorField               # lambda^-1 curl(principal) + temporal
    dt_w: F.VectorField
    principal: F.VectorField       # sum a~ eta W
    dt_curl_rep: F.VectorField     # hybrid d_t of the curl representation
    stats: dict
    corrector: F.VectorField | None = None   # lambda^-1 sum grad(a~ eta) x W
    temporal: F.VectorField | None = None    # mu^-1 P_LH P_neq0 (a~^2 eta^2 xi)
    curl_rep: F.VectorField | None = None
    dt_principal: F.VectorField | None = None
    dt_temporal: F.VectorField | None = None

    def curl_identity_error(self) -> float:
        """Relative defect of principal + corrector = lambda^-1 curl(principal)."""
        return self.stats["curl_identity_rel"]

    def release_optional(self):
        self.corrector = self.temporal = self.curl_rep = None
        self.dt_principal = self.dt_temporal = None


def build_perturbation(
    amps: AmplitudeSet,
    fd_blocks: list,
    wp: WaveParams,
    grid: int,
    phases: dict | None = None,
    bundles: list | None = None,
    keep_all: bool = False,
) -> PerturbationParts:
    """Assemble w^(p), w^(c), w^(t) and the hybrid time derivatives.

    Products are computed once per half-set direction and accumulated
    for both signs (conjugate polarization, opposite carrier).  The
    curl-identity certificate and the spectral L^2 norms of every part
    are evaluated inside, so the slim build can release intermediates.
    """
    n = grid
    t = amps.t
    phases = phases or {d.index: intermittent_phase(d, wp) for d in LAMBDA_PLUS}
    bundles = bundles or build_dir_bundles(amps, fd_blocks, phases, t)
    stats: dict = {}

    wp_dense = np.zeros((3, n, n, n), dtype=np.complex128)
    wc_dense = np.zeros((3, n, n, n), dtype=np.complex128)
    dtp_dense = np.zeros((3, n, n, n), dtype=np.complex128)

    for d in LAMBDA_PLUS:
        i = d.index
        bundle: DirBundle = bundles[i]
        block, dblock = amps.a_tilde[i], fd_blocks[i]
        prod = M.cube_conv(block, bundle.eta)
        dprod = M.Cube(
            prod.lo.copy(),
            M.cube_conv(dblock, bundle.eta).data + M.cube_conv(block, bundle.deta).data,
        )
        grad = M.cube_gradient(prod)
        for dd in (d, negate(d)):
            carrier_k, b = wave_carrier(dd, wp.lam)
            shifted = prod.shifted(carrier_k)
            dshifted = dprod.shifted(carrier_k)
            for comp in range(3):
                if b[comp] != 0:
                    M.add_cube_to_dense(wp_dense[comp], shifted, b[comp])
                    M.add_cube_to_dense(dtp_dense[comp], dshifted, b[comp])
            cross = (
                grad.data[1] * b[2] - grad.data[2] * b[1],
                grad.data[2] * b[0] - grad.data[0] * b[2],
                grad.data[0] * b[1] - grad.data[1] * b[0],
            )
            for comp in range(3):
                M.add_cube_to_dense(
                    wc_dense[comp],
                    M.Cube(grad.lo + carrier_k, cross[comp]),
                    1.0 / wp.lam,
                )

    principal = F.VectorField(wp_dense)
    corrector = F.VectorField(wc_dense)
    dt_principal = F.VectorField(dtp_dense)
    curl_rep = F.VectorField(F.curl(principal).coeffs / wp.lam)

    # certificate: principal + corrector = lambda^-1 curl(principal)
    defect = F.l2_norm_spectral(
        F.VectorField(principal.coeffs + corrector.coeffs - curl_rep.coeffs)
    )
    stats["curl_identity_rel"] = defect / max(F.l2_norm_spectral(curl_rep), 1e-300)
    stats["w_p_l2"] = F.l2_norm_spectral(principal)
    stats["w_c_l2"] = F.l2_norm_spectral(corrector)
    stats["dt_w_p_l2"] = F.l2_norm_spectral(dt_principal)
    if not keep_all:
        corrector = None

    dt_curl_rep = F.VectorField(F.curl(dt_principal).coeffs / wp.lam)
    if not keep_all:
        dt_principal = None

    wt_dense = np.zeros((3, n, n, n), dtype=np.complex128)
    dtt_dense = np.zeros((3, n, n, n), dtype=np.complex128)
    for d in LAMBDA_PLUS:
        bundle = bundles[d.index]
        # a~^2 eta^2 = (a~^2)(P_neq0 eta^2) + a~^2, and its hybrid derivative
        for comp in range(3):
            if d.xi[comp] != 0.0:
                wk = d.xi[comp] / wp.mu
                M.add_cube_to_dense(wt_dense[comp], bundle.base_q_eta2nz, wk)
                M.add_cube_to_dense(wt_dense[comp], bundle.q, wk)
                M.add_cube_to_dense(dtt_dense[comp], bundle.dq_eta2, wk)
                M.add_cube_to_dense(dtt_dense[comp], bundle.q_deta2, wk)

    temporal = F.leray_project(F.project_nonzero(F.VectorField(wt_dense)))
    del wt_dense
    stats["w_t_l2"] = F.l2_norm_spectral(temporal)
    w = F.VectorField(curl_rep.coeffs + temporal.coeffs)
    if not keep_all:
        temporal = None
        curl_rep = None

    dt_temporal = F.leray_project(F.project_nonzero(F.VectorField(dtt_dense)))
    del dtt_dense
    dt_w = F.VectorField(dt_curl_rep.coeffs + dt_temporal.coeffs)
    if not keep_all:
        dt_temporal = None

    stats["w_l2"] = F.l2_norm_spectral(w)
    return PerturbationParts(
        t=t, grid=n, params=wp, w=w, dt_w=dt_w,
        principal=principal, dt_curl_rep=dt_curl_rep, stats=stats,
        corrector=corrector, temporal=temporal, curl_rep=curl_rep,
        dt_principal=dt_principal, dt_temporal=dt_temporal,
    )


# ---------------------------------------------------------------------------
# measured bounds


def amplitude_sup_norms(amps: AmplitudeSet, order: int) -> float:
    """C^order proxy: summed grid sups of spectral derivatives of a~."""
    total = 0.0
    n = amps.grid
    for j in range(order + 1):
        worst = 0.0
        for cube in amps.a_tilde:
            if cube.data.size == 1:
                continue
            dense = np.zeros((n, n, n), dtype=np.complex128)
            M.add_cube_to_dense(dense, cube)
            f = F.ScalarField(dense)
            g = F.sqrt_laplacian_power(f, float(j)) if j else f
            worst = max(worst, float(np.max(np.abs(g.physical_complex().real))))
        total += worst
    return total


def perturbation_norm_suite(
    parts: PerturbationParts, amps: AmplitudeSet, delta: float, p_list=(2.0,)
) -> dict:
    """Measured sides and reference combinations of the increment bounds."""
    wp = parts.params
    lam, sig, r, mu = wp.lam, float(wp.sigma), wp.r, wp.mu
    c1 = amplitude_sup_norms(amps, 1)
    c2 = amplitude_sup_norms(amps, 2)
    rows = {}
    norm_p = {p: F.lebesgue_norm(parts.w, p) for p in p_list}
    rows["w_p_l2"] = F.lebesgue_norm(parts.principal, 2)
    rows["w_p_l2_reference"] = np.sqrt(delta) + (lam * sig) ** -0.5 * c1
    for p in p_list:
        rfac = r ** (1.5 - 3.0 / p)
        rows[f"w_lp[{p}]"] = norm_p[p]
        rows[f"w_lp_reference[{p}]"] = rfac * c1
        rows[f"wc_wt_lp[{p}]"] = F.lebesgue_norm(parts.corrector, p) + F.lebesgue_norm(
            parts.temporal, p
        )
        rows[f"wc_wt_lp_reference[{p}]"] = (sig * r + r**1.5 / mu) * rfac * c1
        dt_wc = F.VectorField(parts.dt_curl_rep.coeffs - parts.dt_principal.coeffs)
        rows[f"dt_wp_wc_lp[{p}]"] = F.lebesgue_norm(parts.dt_principal, p) + F.lebesgue_norm(
            dt_wc, p
        )
        rows[f"dt_wp_wc_lp_reference[{p}]"] = lam * sig * mu * r ** (2.5 - 3.0 / p) * c2
        for n_ord in (1, 2):
            grad_n = F.VectorField(
                F.sqrt_laplacian_power(parts.w, float(n_ord)).coeffs
            )
            rows[f"gradN_w_lp[N={n_ord},p={p}]"] = F.lebesgue_norm(grad_n, p)
            rows[f"gradN_w_lp_reference[N={n_ord},p={p}]"] = (
                rfac * lam**n_ord * amplitude_sup_norms(amps, n_ord + 1)
            )
    rows["C1"] = c1
    rows["C2"] = c2
    return rows

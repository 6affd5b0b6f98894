"""Run orchestration: configuration, the verified iteration round, sweeps.

A run configuration carries a seed description, the relaxed step wave
profile, an admissible wave-verification profile, and tolerance
overrides.  ``iteration_step`` executes one full perturbation round at
the scheduled sample times, recording every certificate and norm into a
:class:`~ibflow.reporting.NormReport`, and returns the new iteration
state with exact support bookkeeping.
"""

from __future__ import annotations

import gc
import json
import time as _time
from dataclasses import dataclass, field as dfield
from fractions import Fraction
from pathlib import Path

import numpy as np
import psutil
import scipy.fft as sfft

from . import antidiv as AD
from . import fields as F
from . import io as fio
from . import modes as M
from . import stress as S
from .geometry import LAMBDA_PLUS, epsilon_gamma
from .intervals import IntervalUnion
from .perturbation import (
    AmplitudeBuilder,
    PerturbationParts,
    build_dir_bundles,
    build_perturbation,
    time_cutoff,
)
from .reporting import CheckResult, NormReport
from .scheduling import Schedule, ScheduleRejected, make_wave_params
from .waves import WaveParams, intermittent_phase, wave_band


class ConfigError(ValueError):
    """Configuration schema violation; message carries the offending path."""


DEFAULT_TOLERANCES = {
    "beltrami": 1e-12,
    "gamma_reconstruction": 1e-12,
    "eta_mean": 1e-12,
    "transport_identity": 1e-13,
    "dirichlet_slope": 0.10,
    "antidiv_identity": 1e-12,
    "antidiv_structure": 1e-12,
    "commutator_slope_lo": -1.2,
    "commutator_slope_hi": -0.8,
    "div_w": 1e-10,
    "mean_w": 1e-10,
    "curl_identity": 1e-10,
    "amplitude_identity": 1e-10,
    "residual": 1e-6,
    "psi_slope": 2.0,
    "linear_sweep_slope": 0.25,
    "gradn_sweep_slope": 0.20,
    "step_runtime_s": 600.0,
    "step_memory_gb": 16.0,
}


@dataclass
class WaveProfile:
    lam: int
    sigma: Fraction
    r: int
    mu: float

    def params(self) -> WaveParams:
        return WaveParams(lam=self.lam, sigma=Fraction(self.sigma), r=self.r, mu=self.mu)


@dataclass
class RunConfig:
    theta: float = 1.0
    nu: float = 1.0
    epsilon0: float = 0.5
    grid_size: int = 192
    seed_grid: int = 32
    lambda_list: list = dfield(default_factory=lambda: [25, 50, 100])
    time_samples: int = 5
    seed: S.SeedSpec = dfield(default_factory=S.SeedSpec)
    step: WaveProfile = dfield(default_factory=lambda: WaveProfile(25, Fraction(1, 5), 2, 4.0))
    waves_profile: WaveProfile = dfield(
        default_factory=lambda: WaveProfile(75, Fraction(1, 15), 2, 80.0)
    )
    tolerances: dict = dfield(default_factory=dict)
    output_dir: str = "out"
    threads: int = 1
    export_fields: bool = False

    def tol(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


def default_config() -> RunConfig:
    return RunConfig()


def _require(cond: bool, path: str, msg: str):
    if not cond:
        raise ConfigError(f"config.{path}: {msg}")


def config_from_dict(raw: dict) -> RunConfig:
    cfg = RunConfig()
    known = {
        "theta", "nu", "epsilon0", "grid_size", "seed_grid", "lambda_list",
        "time_samples", "seed", "step", "waves_profile", "tolerances",
        "output_dir", "threads", "export_fields",
    }
    for key in raw:
        _require(key in known, key, "unknown key")
    for key in ("theta", "nu", "epsilon0"):
        if key in raw:
            _require(isinstance(raw[key], (int, float)), key, "must be a number")
            setattr(cfg, key, float(raw[key]))
    for key in ("grid_size", "seed_grid", "time_samples", "threads"):
        if key in raw:
            _require(isinstance(raw[key], int) and raw[key] > 0, key, "must be a positive integer")
            setattr(cfg, key, raw[key])
    _require(cfg.grid_size % 2 == 0, "grid_size", "must be even")
    if "lambda_list" in raw:
        _require(
            isinstance(raw["lambda_list"], list)
            and all(isinstance(x, int) and x > 0 for x in raw["lambda_list"]),
            "lambda_list", "must be a list of positive integers",
        )
        cfg.lambda_list = list(raw["lambda_list"])
    if "seed" in raw:
        sd = raw["seed"]
        _require(isinstance(sd, dict), "seed", "must be an object")
        try:
            cfg.seed = S.SeedSpec(
                direction_index=int(sd.get("direction_index", 0)),
                amplitude=complex(sd.get("amplitude_re", 0.15), sd.get("amplitude_im", 0.1)),
                t0=Fraction(str(sd.get("t0", 0))),
                t1=Fraction(str(sd.get("t1", 1))),
            )
        except (ValueError, TypeError) as err:
            raise ConfigError(f"config.seed: {err}") from err
    for key in ("step", "waves_profile"):
        if key in raw:
            pd = raw[key]
            _require(isinstance(pd, dict), key, "must be an object")
            for sub in ("lam", "r"):
                _require(isinstance(pd.get(sub), int), f"{key}.{sub}", "must be an integer")
            try:
                profile = WaveProfile(
                    lam=pd["lam"], sigma=Fraction(str(pd["sigma"])),
                    r=pd["r"], mu=float(pd["mu"]),
                )
                profile.params()
            except (KeyError, ValueError, TypeError) as err:
                raise ConfigError(f"config.{key}: {err}") from err
            setattr(cfg, key, profile)
    if "tolerances" in raw:
        _require(isinstance(raw["tolerances"], dict), "tolerances", "must be an object")
        for name, val in raw["tolerances"].items():
            _require(name in DEFAULT_TOLERANCES, f"tolerances.{name}", "unknown tolerance")
            _require(isinstance(val, (int, float)), f"tolerances.{name}", "must be a number")
        cfg.tolerances = dict(raw["tolerances"])
    if "output_dir" in raw:
        _require(isinstance(raw["output_dir"], str), "output_dir", "must be a string")
        cfg.output_dir = raw["output_dir"]
    if "export_fields" in raw:
        _require(isinstance(raw["export_fields"], bool), "export_fields", "must be a boolean")
        cfg.export_fields = raw["export_fields"]
    return cfg


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: invalid JSON ({err})") from err
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# step orchestration


def slow_band_for(grid: int, wp: WaveParams) -> int:
    """Largest amplitude band keeping every assembly product on the lattice."""
    wb = wave_band(wp)
    band = (grid // 2 - 1 - 2 * wb) // 2
    if band < 1:
        raise F.BandwidthError(2 * wb + 2, grid)
    return band


def sample_times(cutoff, support: IntervalUnion, count: int) -> list[float]:
    """Interior samples plus one point on each ramp of the time window."""
    (a, b) = support.intervals[0][0], support.intervals[-1][1]
    a, b = float(a), float(b)
    w = float(cutoff.ramp_width)
    if count <= 2:
        return [0.5 * (a + b)]
    interior = np.linspace(a + 0.15 * (b - a), b - 0.15 * (b - a), count - 2)
    return [a - 0.5 * w] + [float(t) for t in interior] + [b + 0.5 * w]


class StepContext:
    """Builders and caches shared by every sample of one iteration round."""

    def __init__(self, state: S.IterationState, wp: WaveParams, grid: int):
        self.state = state
        self.wp = wp
        self.grid = grid
        self.slow_band = slow_band_for(grid, wp)
        self.cutoff = time_cutoff(state.supp_r, state.delta_next)
        self.eps_gamma = epsilon_gamma()
        fd_grid = min(grid, 64)
        self.builder = AmplitudeBuilder(
            r_of_t=state.flow.r_at,
            cutoff=self.cutoff,
            delta=float(state.delta_next),
            eps_gamma=self.eps_gamma,
            grid=grid,
            slow_band=self.slow_band,
            fd_grid=fd_grid,
        )
        self.phases = {i: intermittent_phase(LAMBDA_PLUS[i], wp) for i in range(6)}

    def fd_pad_exact(self) -> Fraction:
        """Exact bound on how far the FD stencil reaches past the window."""
        return 2 * Fraction(1, 1000) * self.cutoff.ramp_width

    def support_bound(self) -> IntervalUnion:
        """Certified support of the increment and the new stress."""
        if self.cutoff.window.is_empty():
            return IntervalUnion.empty()
        return self.cutoff.window.neighborhood(self.fd_pad_exact())

    def parts_at(self, t: float):
        amps = self.builder.at(t)
        fd = self.builder.fd_tilde(t)
        bundles = build_dir_bundles(amps, fd, self.phases, t)
        parts = build_perturbation(amps, fd, self.wp, self.grid, self.phases, bundles)
        return amps, fd, bundles, parts

    def w_at(self, t: float) -> F.VectorField:
        return self.parts_at(t)[3].w

    def amplitudes_vanish_at(self, t: float) -> bool:
        """Cheap off-support probe: every assembly input is exactly zero."""
        amps_zero = self.builder.cutoff.psi(t) == 0.0
        fd = self.builder.fd_tilde(t)
        return amps_zero and all(float(np.abs(b.data).max()) == 0.0 for b in fd)

    def sample(self, t: float, detailed: bool = False, keep_fields: bool = False) -> dict:
        """Full assembly, certificates, and norms at one sample time.

        Operations are ordered for peak-memory control: the truncation
        family is formed while the pointwise amplitudes exist,
        intermediates are dropped as soon as their certificates and
        norms are recorded, and the oscillation assembly releases the
        direction bundles as it consumes them.
        """
        t_start = _time.time()
        theta, nu = self.state.theta, self.state.nu
        grid = self.grid
        rec: dict = {"t": float(t), "psi": self.cutoff.psi(t)}

        amps = self.builder.at(t)
        fd = self.builder.fd_tilde(t)
        rec["amplitude_identity_rel"] = (
            amps.identity_error / amps.identity_scale if amps.psi_value else 0.0
        )
        rec["min_a_sq"] = amps.min_a_sq
        rec["rho_l1"] = amps.rho_l1()
        bundles = build_dir_bundles(amps, fd, self.phases, t)
        trunc = S.truncation_family(amps, bundles, grid)
        amps.a_phys = None  # pointwise amplitudes no longer needed
        gc.collect()

        parts = build_perturbation(
            amps, fd, self.wp, grid, self.phases, bundles, keep_all=detailed
        )
        rec.update(parts.stats)
        w_scale = max(parts.stats["w_l2"], 1e-300)
        rec["div_w_rel"] = F.l2_norm_spectral(F.divergence(parts.w)) / w_scale
        rec["mean_w_rel"] = float(np.max(np.abs(parts.w.mean()))) / w_scale
        rec["w_sobolev_2tm1_1"] = F.sobolev_norm(parts.w, 2 * theta - 1, 1)

        if detailed:
            from .perturbation import perturbation_norm_suite

            rec["norm_suite"] = perturbation_norm_suite(
                parts, amps, float(self.state.delta_next), p_list=(2.0,)
            )
            # pure finite-difference cross-check of the hybrid derivative
            h = self.cutoff.fd_step()
            w_m = self.w_at(t - h)
            w_p2 = self.w_at(t + h)
            fd_dt = (w_p2.coeffs - w_m.coeffs) / (2 * h)
            scale = max(F.l2_norm_spectral(parts.dt_w), 1e-300)
            rec["dt_w_fd_vs_hybrid_rel"] = (
                F.l2_norm_spectral(F.VectorField(fd_dt - parts.dt_w.coeffs)) / scale
            )
            del w_m, w_p2, fd_dt
            parts.release_optional()
            gc.collect()

        v_q = F.resize(self.state.flow.v_at(t), grid)
        dt_v_q = F.resize(self.state.flow.dt_v_at(t), grid)
        p_q = F.resize(self.state.flow.p_at(t), grid)

        dt_v1 = F.VectorField(dt_v_q.coeffs + parts.dt_w.coeffs)
        del dt_v_q
        parts.dt_w = None

        r1, p1, ledger = S.assemble_new_stress(
            parts, amps, fd, v_q, p_q, theta, nu, self.phases,
            bundles=bundles, detailed=detailed, trunc=trunc, release_bundles=True,
        )
        rec["stress"] = ledger
        del bundles, trunc, p_q
        v1 = F.VectorField(v_q.coeffs + parts.w.coeffs)
        parts_w = parts.w
        del v_q, parts
        gc.collect()

        res = S.momentum_residual(v1, dt_v1, p1, r1, theta, nu)
        rec["residual_rel"] = res["residual_rel"]
        rec["residual_terms"] = res["terms"]

        out_fields = None
        if keep_fields:
            out_fields = {"v1": v1, "r1": r1, "p1": p1, "w": parts_w}
        rec["runtime_s"] = _time.time() - t_start
        rec["rss_gb"] = psutil.Process().memory_info().rss / 2**30
        del amps, fd, v1, dt_v1, r1, p1, parts_w
        gc.collect()
        if out_fields is not None:
            rec["fields"] = out_fields
        return rec


class StepFlow:
    """Flow handle for the post-step state; re-evaluates on demand."""

    def __init__(self, base_flow, ctx: StepContext):
        self.base = base_flow
        self.ctx = ctx

    def v_at(self, t: float) -> F.VectorField:
        v = F.resize(self.base.v_at(t), self.ctx.grid)
        return F.VectorField(v.coeffs + self.ctx.w_at(t).coeffs)

    def dt_v_at(self, t: float) -> F.VectorField:
        parts = self.ctx.parts_at(t)[3]
        base = F.resize(self.base.dt_v_at(t), self.ctx.grid)
        return F.VectorField(base.coeffs + parts.dt_w.coeffs)

    def _assembled(self, t: float):
        amps, fd, bundles, parts = self.ctx.parts_at(t)
        v_q = F.resize(self.base.v_at(t), self.ctx.grid)
        p_q = F.resize(self.base.p_at(t), self.ctx.grid)
        return S.assemble_new_stress(
            parts, amps, fd, v_q, p_q,
            self.ctx.state.theta, self.ctx.state.nu, self.ctx.phases,
            bundles=bundles,
        )

    def r_at(self, t: float) -> F.SymTensorField:
        return self._assembled(t)[0]

    def p_at(self, t: float) -> F.ScalarField:
        return self._assembled(t)[1]


def iteration_step(
    state: S.IterationState,
    delta_next2,
    wp: WaveParams,
    grid: int,
    n_samples: int = 5,
    keep_fields: bool = False,
) -> tuple[S.IterationState, list[dict], NormReport]:
    """One verified perturbation round at the scheduled sample times.

    ``delta_next2`` is the target size for the new stress (reported as a
    ratio, never asserted at desk scale).
    """
    report = NormReport(title=f"iteration step q={state.q}")
    ctx = StepContext(state, wp, grid)
    times = sample_times(ctx.cutoff, state.supp_r, n_samples)
    detailed_at = times[len(times) // 2]
    records = []
    worst = {"residual_rel": 0.0, "curl_identity_rel": 0.0, "div_w_rel": 0.0,
             "mean_w_rel": 0.0, "amplitude_identity_rel": 0.0}
    r_new_l1_max = 0.0
    for t in times:
        rec = ctx.sample(t, detailed=(t == detailed_at), keep_fields=keep_fields)
        records.append(rec)
        for key in worst:
            worst[key] = max(worst[key], rec[key])
        r_new_l1_max = max(r_new_l1_max, rec["stress"]["r_new_l1"])
        report.add("residual_rel", rec["residual_rel"], t=t)
        report.add("r_new_l1", rec["stress"]["r_new_l1"], t=t)
        report.add("w_l2", rec["w_l2"], t=t)

    # stray-support probe: every assembly input vanishes strictly outside
    # the certified bound (the assembly is componentwise linear in them)
    bound = ctx.support_bound()
    t_out = float(bound.intervals[-1][1]) + 10 * float(ctx.fd_pad_exact())
    report.add_check(CheckResult.flag(
        "amplitudes_vanish_off_support", ctx.amplitudes_vanish_at(t_out),
        detail=f"probe at t={t_out:.4f}",
    ))

    # certified support bookkeeping (exact rational arithmetic)
    delta_prev = state.delta_next
    inside_r = state.supp_r.neighborhood(delta_prev).contains(bound)
    union_old = state.supp_v.union(state.supp_r)
    inside_union = union_old.neighborhood(delta_prev).contains(bound.union(state.supp_v))
    report.add_check(CheckResult.flag("supp_w_in_delta_neighborhood", inside_r))
    report.add_check(CheckResult.flag("supp_union_in_delta_neighborhood", inside_union))
    psi_sup_slope = _psi_slope_estimate(ctx)
    report.add_check(CheckResult.le("psi_slope_times_delta", psi_sup_slope, 2.0))
    plateau_ok = ctx.cutoff.support.contains(state.supp_r)
    report.add_check(CheckResult.flag("psi_equals_one_on_stress_support", plateau_ok))

    report.meta["delta_prev"] = float(delta_prev)
    report.meta["delta_target"] = float(delta_next2)
    report.meta["contraction_ratio"] = r_new_l1_max / float(delta_next2)
    report.meta["worst"] = worst
    report.meta["times"] = [float(t) for t in times]

    new_state = S.IterationState(
        q=state.q + 1,
        flow=StepFlow(state.flow, ctx),
        delta_next=Fraction(r_new_l1_max),
        supp_v=union_old.union(bound),
        supp_r=bound,
        theta=state.theta,
        nu=state.nu,
    )
    return new_state, records, report


def _psi_slope_estimate(ctx: StepContext, n_pts: int = 4001) -> float:
    window = ctx.cutoff.window
    if window.is_empty():
        return 0.0
    lo = float(window.intervals[0][0])
    hi = float(window.intervals[-1][1])
    ts = np.linspace(lo, hi, n_pts)
    sup = max(abs(ctx.cutoff.psi_prime(t)) for t in ts)
    return sup * float(ctx.cutoff.delta)

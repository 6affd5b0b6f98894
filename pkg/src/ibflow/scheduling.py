"""Parameter scheduling: the concentration exponent, the strict p-window,
admissible roundings of (sigma, r, mu), and the error-size sequence.

The exponent window is ``max(0, (2/3)(2 theta - 1)) < alpha < 1``; it is
nonempty exactly for ``theta < 5/4``, which the scheduler enforces at
the API boundary.  Ideal powers ``r = lam^alpha``,
``sigma = lam^{-(alpha+1)/2}``, ``mu = lam^{(5 alpha+1)/4}`` are rounded
onto the admissible lattice (unit-fraction sigma with lam*sigma a
multiple of 5, integer r) by exhaustive scoring in log distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from fractions import Fraction

import numpy as np

from .waves import WaveParams, band_support_single

THETA_THRESHOLD = 1.25


class ScheduleRejected(ValueError):
    pass


def alpha_window(theta: float) -> tuple[float, float]:
    return max(0.0, (2.0 / 3.0) * (2.0 * theta - 1.0)), 1.0


def choose_alpha(theta: float) -> float:
    """Midpoint of the admissible window; rejects theta at or above 5/4."""
    if theta >= THETA_THRESHOLD:
        raise ScheduleRejected(
            f"dissipation exponent {theta} is not below the 5/4 threshold; "
            "the concentration window is empty"
        )
    lo, hi = alpha_window(theta)
    return 0.5 * (lo + hi)


def check_p_inequalities(alpha: float, theta: float, p: float) -> dict:
    """The four strict inequalities pinning the reporting exponent p.

    Returns each left-hand side (negative slack = satisfied) and the
    combined verdict.
    """
    if p <= 1:
        raise ValueError("the exponent must satisfy p > 1")
    s = [
        -(alpha + 1.0) / 2.0 + (5.0 * alpha + 1.0) / 4.0 + (2.5 - 3.0 / p) * alpha,
        (1.5 - 3.0 / p) * alpha + max(0.0, 2.0 * theta - 1.0),
        -(5.0 * alpha + 1.0) / 4.0 + (4.5 - 3.0 / p) * alpha,
        -(1.0 - alpha) / 2.0 + (3.0 - 3.0 / p) * alpha,
    ]
    return {"slacks": s, "passed": all(v < 0 for v in s)}


def choose_p(alpha: float, theta: float) -> float:
    """Largest p of the form 1 + 2^-j satisfying all four inequalities."""
    for j in range(1, 40):
        p = 1.0 + 2.0**-j
        if check_p_inequalities(alpha, theta, p)["passed"]:
            return p
    raise ScheduleRejected(f"no admissible p found for alpha={alpha}, theta={theta}")


def admissible_sigmas(lam: int) -> list[Fraction]:
    """Unit fractions sigma < 1 with lam*sigma a positive multiple of 5."""
    if lam % 5 != 0:
        raise ScheduleRejected(f"lambda must be a multiple of 5, got {lam}")
    out = []
    for k in range(1, lam // 5 + 1):
        if lam % (5 * k) == 0 and 5 * k < lam:
            out.append(Fraction(5 * k, lam))
    return sorted(set(out))


@dataclass
class Rounding:
    params: WaveParams
    targets: dict
    deltas: dict
    flags: dict


def make_wave_params(lam: int, alpha: float, strict: bool = True) -> Rounding:
    """Round the scheduled powers onto the admissible lattice.

    The exact single-wave band-support fact is required in strict mode
    (it is the property the sufficient spacing condition exists to
    guarantee, and unlike that condition it is satisfiable at small
    frequencies); the pair-product fact and the sufficient condition are
    recorded as flags.
    """
    r_target = lam**alpha
    sigma_target = lam ** (-(alpha + 1.0) / 2.0)
    mu_target = lam ** ((5.0 * alpha + 1.0) / 4.0)

    best = None
    for sigma in admissible_sigmas(lam):
        r_cap = int(np.ceil(1.0 / float(sigma))) - 1  # sigma * r < 1
        for r in range(2, max(2, min(lam - 1, r_cap)) + 1):
            if sigma * r >= 1 or r >= lam:
                continue
            mu = max(mu_target, r**1.5)
            if strict and not (lam < mu < lam**2):
                mu = min(max(mu, lam * (1.0 + 1e-9)), lam**2 * (1.0 - 1e-9))
                if mu < r**1.5:
                    continue
            try:
                wp = WaveParams(lam=lam, sigma=sigma, r=r, mu=mu)
            except Exception:
                continue
            if strict and not band_support_single(wp)["holds"]:
                continue
            score = np.log(float(sigma) / sigma_target) ** 2 + np.log(r / r_target) ** 2
            if best is None or score < best[0]:
                best = (score, wp)
    if best is None:
        raise ScheduleRejected(f"no admissible (sigma, r) rounding for lambda={lam}")
    wp = best[1]
    flags = wp.flags()
    if strict:
        missing = [k for k in ("sigma_r_lt_1", "mu_ge_r32", "band_single_exact") if not flags[k]]
        if missing:
            raise ScheduleRejected(f"rounded parameters violate {missing}")
    return Rounding(
        params=wp,
        targets={"r": r_target, "sigma": sigma_target, "mu": mu_target},
        deltas={
            "r": wp.r / r_target,
            "sigma": float(wp.sigma) / sigma_target,
            "mu": wp.mu / mu_target,
        },
        flags=flags,
    )


def delta_sequence(epsilon0, q_max: int) -> list[Fraction]:
    """delta_{q+1} = 2^{-q} epsilon0 for q >= 1, exact rationals."""
    eps = Fraction(epsilon0)
    return [eps / 2**q for q in range(1, q_max + 1)]


@dataclass
class Schedule:
    """Deterministic parameter plan for a run."""

    theta: float
    nu: float
    epsilon0: Fraction
    lambda_list: list
    alpha: float = 0.0
    p_exponent: float = 0.0
    roundings: dict = dfield(default_factory=dict)

    @classmethod
    def build(cls, theta: float, nu: float, epsilon0, lambda_list, strict: bool = True) -> "Schedule":
        alpha = choose_alpha(theta)
        p = choose_p(alpha, theta)
        sched = cls(
            theta=float(theta), nu=float(nu), epsilon0=Fraction(epsilon0),
            lambda_list=[int(l) for l in lambda_list], alpha=alpha, p_exponent=p,
        )
        for lam in sched.lambda_list:
            sched.roundings[lam] = make_wave_params(lam, alpha, strict=strict)
        ineq = check_p_inequalities(alpha, theta, p)
        if not ineq["passed"]:
            raise ScheduleRejected(f"p-inequalities fail at p={p}: {ineq['slacks']}")
        return sched

    def deltas(self, q_max: int) -> list[Fraction]:
        return delta_sequence(self.epsilon0, q_max)

    def contraction_exponent_limit(self) -> float:
        """Limiting exponent 2 theta - 1 - 3/2 of the dissipation term.

        Negative below the 5/4 threshold (the term contracts as the
        frequency grows), positive above it.
        """
        return 2.0 * self.theta - 1.0 - 1.5

"""Direction frames on the rational sphere and the matrix decomposition lemma.

The twelve unit directions (six plus their negatives) carry orthonormal
companion frames and complex polarization vectors.  Every symmetric
matrix close to the identity is written as a positive combination of the
rank-two projections ``Id - xi xi^T``; the coefficients come from one
fixed 6x6 linear system whose exact rational inverse is computed at
import time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import SYM6

_FIVE_XI_PLUS = [
    (3, 4, 0),
    (3, -4, 0),
    (0, 3, 4),
    (0, 3, -4),
    (4, 0, 3),
    (-4, 0, 3),
]
# companion choices, fixed for determinism: 5*A for each 5*xi above
_FIVE_A_PLUS = [
    (-4, 3, 0),
    (4, 3, 0),
    (0, -4, 3),
    (0, 4, 3),
    (3, 0, -4),
    (3, 0, 4),
]


@dataclass(frozen=True)
class Direction:
    """One lattice direction with its frame and polarization vector."""

    xi: np.ndarray          # unit vector, 5*xi integer
    a_vec: np.ndarray       # unit vector orthogonal to xi, A(-xi) = A(xi)
    sign: int               # +1 on the positive half-set, -1 on its negation
    index: int              # position in the canonical 12-element list

    @property
    def c_vec(self) -> np.ndarray:
        return np.cross(self.xi, self.a_vec)

    @property
    def b_vec(self) -> np.ndarray:
        return (self.a_vec + 1j * self.c_vec) / np.sqrt(2.0)

    @property
    def five_xi(self) -> tuple[int, int, int]:
        v = np.rint(5 * self.xi).astype(int)
        return (int(v[0]), int(v[1]), int(v[2]))

    def __repr__(self):
        return f"Direction(5xi={self.five_xi}, sign={self.sign:+d})"


def build_directions() -> list[Direction]:
    """The canonical 12-direction set: positives first, then negatives.

    Negatives reuse the companion of the positive partner, which gives
    ``B(-xi) = conj(B(xi))`` by construction.
    """
    dirs: list[Direction] = []
    for i, (fx, fa) in enumerate(zip(_FIVE_XI_PLUS, _FIVE_A_PLUS)):
        xi = np.array(fx, dtype=float) / 5.0
        a = np.array(fa, dtype=float) / 5.0
        dirs.append(Direction(xi=xi, a_vec=a, sign=+1, index=i))
    for i, d in enumerate(list(dirs)):
        dirs.append(Direction(xi=-d.xi, a_vec=d.a_vec, sign=-1, index=6 + i))
    return dirs


DIRECTIONS = build_directions()
LAMBDA_PLUS = DIRECTIONS[:6]
LAMBDA_MINUS = DIRECTIONS[6:]


def negate(d: Direction) -> Direction:
    return DIRECTIONS[(d.index + 6) % 12]


def _exact_projection_vec(five_xi) -> list[Fraction]:
    """vec6 of Id - xi xi^T in exact rationals, SYM6 component order."""
    xi = [Fraction(v, 5) for v in five_xi]
    out = []
    for (i, j) in SYM6:
        val = (Fraction(1) if i == j else Fraction(0)) - xi[i] * xi[j]
        out.append(val)
    return out


def _invert_fraction_matrix(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _build_system():
    cols = [_exact_projection_vec(fx) for fx in _FIVE_XI_PLUS]
    m = [[cols[d][c] for d in range(6)] for c in range(6)]  # m[comp][dir]
    return m, _invert_fraction_matrix(m)


_M_EXACT, _M_INV_EXACT = _build_system()
M_SYSTEM = np.array([[float(x) for x in row] for row in _M_EXACT])
M_INVERSE = np.array([[float(x) for x in row] for row in _M_INV_EXACT])


class OutsideBallError(ValueError):
    """Requested matrix lies outside the positive-coefficient ball."""


@dataclass
class GammaSolution:
    c: np.ndarray            # six coefficients gamma^2, positive half-set order
    gamma: np.ndarray        # their square roots
    epsilon_gamma: float     # validity radius used for the positivity check


def sym_to_vec6(r: np.ndarray) -> np.ndarray:
    return np.array([r[i, j] for (i, j) in SYM6])


def vec6_to_sym(v) -> np.ndarray:
    r = np.zeros((3, 3), dtype=np.asarray(v).dtype)
    for c, (i, j) in enumerate(SYM6):
        r[i, j] = r[j, i] = v[c]
    return r


def gamma_coefficients(r, exact: bool = False) -> GammaSolution:
    """Coefficients c with sum_i c_i (Id - xi_i xi_i^T) = R, gamma = sqrt(c).

    With ``exact=True`` the input must be rational-valued; the solve is
    done in exact arithmetic and converted to floats afterwards.
    """
    if exact:
        vec = [Fraction(x) for x in (r if not hasattr(r, "shape") else sym_to_vec6(r))]
        c = [sum(_M_INV_EXACT[i][j] * vec[j] for j in range(6)) for i in range(6)]
        c_arr = np.array([float(x) for x in c])
        exact_ok = all(x > 0 for x in c)
        if not exact_ok:
            raise OutsideBallError("nonpositive coefficient in exact solve")
        return GammaSolution(c=c_arr, gamma=np.sqrt(c_arr), epsilon_gamma=epsilon_gamma())
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.allclose(r, r.T, atol=1e-12 * max(1.0, np.abs(r).max())):
        raise ValueError("input must be a symmetric 3x3 matrix")
    c = M_INVERSE @ sym_to_vec6(r)
    if np.any(c <= 0):
        raise OutsideBallError(f"nonpositive coefficient {c.min():.3e}")
    return GammaSolution(c=c, gamma=np.sqrt(c), epsilon_gamma=epsilon_gamma())


def reconstruct(c) -> np.ndarray:
    """sum_i c_i (Id - xi_i xi_i^T) over the positive half-set."""
    out = np.zeros((3, 3))
    for ci, d in zip(np.asarray(c, dtype=float), LAMBDA_PLUS):
        out += ci * (np.eye(3) - np.outer(d.xi, d.xi))
    return out


# ---------------------------------------------------------------------------
# validity radius


def _row_dual_norms() -> np.ndarray:
    """Frobenius-dual norms of the inverse-system rows (exact entries)."""
    w = np.array([1.0, 1.0, 1.0, 0.5, 0.5, 0.5])  # duals of doubled off-diagonals
    return np.sqrt((M_INVERSE**2 * w) @ np.ones(6))


def epsilon_gamma_analytic() -> float:
    """Largest Frobenius radius around Id keeping every coefficient positive.

    Coefficients depend affinely on the matrix, so the worst unit
    perturbation for row i drives c_i down at rate ||row_i||_dual; the
    radius is 1/4 over the largest such rate.
    """
    return float(0.25 / _row_dual_norms().max())


def epsilon_gamma_sampled(n_samples: int = 10_000, seed: int = 7, operator_norm: bool = False) -> float:
    """Sampled estimate of the radius (min root over random unit directions)."""
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(n_samples):
        s = rng.normal(size=(3, 3))
        s = 0.5 * (s + s.T)
        nrm = np.linalg.norm(s, 2) if operator_norm else np.linalg.norm(s, "fro")
        s /= nrm
        slope = M_INVERSE @ sym_to_vec6(s)
        drop = -slope.min()
        if drop > 0:
            best = min(best, 0.25 / drop)
    return float(best)


_EPS_SAFETY = 0.95
_EPS_CACHE: dict[str, float] = {}


def epsilon_gamma() -> float:
    """Conservative working radius: analytic worst case times a 5% margin."""
    if "value" not in _EPS_CACHE:
        _EPS_CACHE["value"] = _EPS_SAFETY * epsilon_gamma_analytic()
    return _EPS_CACHE["value"]


def system_condition_number() -> float:
    return float(np.linalg.cond(M_SYSTEM))

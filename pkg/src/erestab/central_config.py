"""Central configurations of collinear primaries and the off-line equilibrium
of a massless body.

All configurations are stored in normalized units: the primaries' center of
mass sits at the origin and sum(m_i |a_i|^2) = 1, so the configuration
multiplier mu equals the potential U(a) of the primaries.  Raw positions
passed to the constructors are recentered and rescaled automatically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConvergenceError,
    DegenerateSolutionError,
    DomainError,
    InvariantViolation,
    SingularityError,
)

SQRT3 = math.sqrt(3.0)

MASS_SUM_TOL = 1e-14
CC_RESIDUAL_TOL = 1e-10
CENTER_TOL = 1e-12
INERTIA_TOL = 1e-12


class FamilyKind(Enum):
    COLLINEAR = "collinear"
    POLYGON = "polygon"


@dataclass(frozen=True)
class MassSystem:
    """Masses of the primaries.  The massless body is never stored here.

    Masses must be positive and sum to one (collinear family convention
    m_1 + ... + m_k = 1; the polygon family's m_0 + n*m = 1 is the same
    constraint).  Use :meth:`normalized` to rescale raw masses.
    """

    masses: tuple[float, ...]
    kind: FamilyKind = FamilyKind.COLLINEAR

    def __post_init__(self):
        if len(self.masses) < 2:
            raise DomainError("a mass system needs at least two primaries")
        if any(not (m > 0.0) for m in self.masses):
            raise DomainError(f"all primary masses must be positive, got {self.masses}")
        if abs(math.fsum(self.masses) - 1.0) > MASS_SUM_TOL:
            raise DomainError(
                "primary masses must sum to 1; use MassSystem.normalized to rescale"
            )

    @classmethod
    def normalized(cls, masses: Sequence[float], kind: FamilyKind = FamilyKind.COLLINEAR):
        total = math.fsum(float(m) for m in masses)
        if not total > 0.0:
            raise DomainError("total mass must be positive")
        return cls(tuple(float(m) / total for m in masses), kind)

    def __len__(self) -> int:
        return len(self.masses)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)


def potential(masses: np.ndarray, positions: np.ndarray) -> float:
    """Newtonian potential U = sum_{i<j} m_i m_j / |a_i - a_j|."""
    total = 0.0
    k = len(masses)
    for i in range(k):
        for j in range(i + 1, k):
            r = math.hypot(
                positions[i, 0] - positions[j, 0], positions[i, 1] - positions[j, 1]
            )
            if r < 1e-12:
                raise SingularityError(f"primaries {i} and {j} are coincident")
            total += masses[i] * masses[j] / r
    return total


def _attraction(masses: np.ndarray, positions: np.ndarray, point: np.ndarray) -> np.ndarray:
    """sum_j m_j (a_j - p) / |a_j - p|^3 over all primaries."""
    diff = positions - point[None, :]
    r = np.hypot(diff[:, 0], diff[:, 1])
    if np.any(r < 1e-12):
        raise SingularityError("evaluation point coincides with a primary")
    return (masses[:, None] * diff / (r**3)[:, None]).sum(axis=0)


def cc_defect(
    masses: np.ndarray,
    positions: np.ndarray,
    mu: float,
    massless_position: np.ndarray | None = None,
) -> float:
    """Worst-case norm of the central-configuration equation defect.

    For each primary i the defect is sum_{j!=i} m_j (a_j - a_i)/|a_j - a_i|^3
    + mu a_i; the massless body, when present, satisfies the same equation
    with the sum running over every primary.
    """
    worst = 0.0
    k = len(masses)
    for i in range(k):
        others = np.delete(np.arange(k), i)
        f = _attraction(masses[others], positions[others], positions[i])
        worst = max(worst, float(np.hypot(*(f + mu * positions[i]))))
    if massless_position is not None:
        f = _attraction(masses, positions, massless_position)
        worst = max(worst, float(np.hypot(*(f + mu * massless_position))))
    return worst


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Configuration:
    """A normalized planar central configuration of the primaries.

    ``massless_position`` is None until the equilibrium of the massless body
    has been attached (see :func:`restricted_position`).
    """

    masses: MassSystem
    primary_positions: np.ndarray
    massless_position: np.ndarray | None
    mu: float
    cc_residual: float
    inertia_residual: float

    @classmethod
    def from_primaries(
        cls,
        masses: MassSystem,
        positions: Sequence[Sequence[float]],
        massless_position: Sequence[float] | None = None,
    ) -> "Configuration":
        """Recenter, rescale and validate a raw configuration.

        Raises ConvergenceError if the recentered/rescaled positions do not
        satisfy the central-configuration equations to within 1e-10.
        """
        m = masses.array
        pos = np.array(positions, dtype=float).reshape(len(masses), 2)
        extra = (
            None
            if massless_position is None
            else np.asarray(massless_position, dtype=float).reshape(2)
        )
        com = m @ pos
        pos = pos - com
        if extra is not None:
            extra = extra - com
        inertia = float(np.sum(m * np.sum(pos * pos, axis=1)))
        if not inertia > 0.0:
            raise DomainError("degenerate configuration: zero moment of inertia")
        scale = 1.0 / math.sqrt(inertia)
        pos = pos * scale
        if extra is not None:
            extra = extra * scale
        mu = potential(m, pos)
        residual = cc_defect(m, pos, mu, extra)
        if residual > CC_RESIDUAL_TOL:
            raise ConvergenceError(
                "positions do not satisfy the central-configuration equations",
                residual=residual,
            )
        inertia_res = abs(float(np.sum(m * np.sum(pos * pos, axis=1))) - 1.0)
        return cls(
            masses=masses,
            primary_positions=_readonly(pos),
            massless_position=None if extra is None else _readonly(extra),
            mu=mu,
            cc_residual=residual,
            inertia_residual=inertia_res,
        )

    def with_massless(self, position: Sequence[float]) -> "Configuration":
        """Attach a massless-body position without renormalizing the primaries."""
        p = np.asarray(position, dtype=float).reshape(2)
        m = self.masses.array
        residual = cc_defect(m, self.primary_positions, self.mu, p)
        return Configuration(
            masses=self.masses,
            primary_positions=self.primary_positions,
            massless_position=_readonly(p),
            mu=self.mu,
            cc_residual=residual,
            inertia_residual=self.inertia_residual,
        )

    @property
    def center_residual(self) -> float:
        m = self.masses.array
        return float(np.hypot(*(m @ self.primary_positions)))


# ---------------------------------------------------------------------------
# Euler three-body spacing quintic
# ---------------------------------------------------------------------------

def euler_quintic_coefficients(m1: float, m2: float, m3: float) -> np.ndarray:
    """Coefficients (highest degree first) of the collinear spacing quintic.

    The root x is the ratio |q1-q2| / |q2-q3| for bodies ordered
    (m1, m2, m3) from left to right on the line.
    """
    return np.array(
        [
            m3 + m2,
            3.0 * m3 + 2.0 * m2,
            3.0 * m3 + m2,
            -(3.0 * m1 + m2),
            -(3.0 * m1 + 2.0 * m2),
            -(m1 + m2),
        ]
    )


def solve_euler_quintic(m1: float, m2: float, m3: float) -> float:
    """Unique positive root of the collinear spacing quintic.

    By Descartes' rule the coefficient sequence has exactly one sign change,
    so the positive root is unique.  The root is bracketed by a sign scan on
    10^4 log-spaced points of (0, 100) and refined with Brent's method plus
    two Newton polish steps.
    """
    if min(m1, m2, m3) <= 0.0:
        raise DomainError("masses must be positive")
    coeffs = euler_quintic_coefficients(m1, m2, m3)
    deriv = np.polyder(coeffs)
    grid = np.geomspace(1e-8, 100.0, 10_000)
    vals = np.polyval(coeffs, grid)
    exact = np.flatnonzero(vals == 0.0)
    if exact.size:
        x = float(grid[exact[0]])
    else:
        flips = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
        if flips.size == 0:
            raise ConvergenceError("no sign change of the quintic on (0, 100)")
        i = int(flips[0])
        x = brentq(
            lambda t: float(np.polyval(coeffs, t)),
            float(grid[i]),
            float(grid[i + 1]),
            xtol=1e-15,
        )
    for _ in range(2):
        x -= float(np.polyval(coeffs, x)) / float(np.polyval(deriv, x))
    scaled = abs(float(np.polyval(coeffs, x))) / float(np.max(np.abs(coeffs)))
    if scaled > 1e-13:
        raise ConvergenceError("quintic root failed the residual check", residual=scaled)
    return float(x)


def collinear_three_primaries(masses: MassSystem) -> Configuration:
    """Collinear central configuration of three primaries ordered left to right."""
    if masses.kind is not FamilyKind.COLLINEAR or len(masses) != 3:
        raise DomainError("collinear_three_primaries needs a 3-mass collinear system")
    x = solve_euler_quintic(*masses.masses)
    raw = [(0.0, 0.0), (x, 0.0), (1.0 + x, 0.0)]
    return Configuration.from_primaries(masses, raw)


# ---------------------------------------------------------------------------
# General collinear configurations (any number of primaries, fixed ordering)
# ---------------------------------------------------------------------------

def _line_positions(masses: np.ndarray, log_gaps: np.ndarray, ordering) -> np.ndarray:
    gaps = np.exp(log_gaps)
    coords = np.concatenate(([0.0], np.cumsum(gaps)))
    x = np.empty(len(masses))
    x[list(ordering)] = coords
    return x - masses @ x


def _line_cc_residual(masses: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Residual of the collinear CC equations with the multiplier fixed to 1;
    # valid because the equation set is scale covariant.
    dx = x[None, :] - x[:, None]
    r = np.abs(dx)
    np.fill_diagonal(r, 1.0)
    force = (masses[None, :] * dx / r**3).sum(axis=1)
    return force + x


def moulton_collinear(
    masses: MassSystem,
    ordering: Sequence[int] | None = None,
    *,
    max_iter: int = 200,
) -> Configuration:
    """Collinear central configuration of k >= 2 primaries in a fixed ordering.

    The Moulton count guarantees exactly one configuration per ordering.  The
    solver runs a damped Gauss-Newton iteration on the logarithms of the
    k-1 gap lengths (keeping every gap positive) with the multiplier pinned
    to 1; the result is rescaled to the standard normalization.
    """
    if masses.kind is not FamilyKind.COLLINEAR:
        raise DomainError("moulton_collinear needs a collinear mass system")
    k = len(masses)
    if ordering is None:
        ordering = tuple(range(k))
    if sorted(ordering) != list(range(k)):
        raise DomainError(f"ordering must be a permutation of 0..{k - 1}")
    m = masses.array
    u = np.zeros(k - 1)
    res = _line_cc_residual(m, _line_positions(m, u, ordering))
    norm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if norm < 1e-12:
            break
        jac = np.empty((k, k - 1))
        h = 1e-7
        for c in range(k - 1):
            up = u.copy()
            up[c] += h
            um = u.copy()
            um[c] -= h
            jac[:, c] = (
                _line_cc_residual(m, _line_positions(m, up, ordering))
                - _line_cc_residual(m, _line_positions(m, um, ordering))
            ) / (2.0 * h)
        step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        scale = 1.0
        for _ in range(30):
            trial = u + scale * step
            trial_res = _line_cc_residual(m, _line_positions(m, trial, ordering))
            if np.max(np.abs(trial_res)) < norm:
                break
            scale *= 0.5
        else:
            raise ConvergenceError(
                "Moulton iteration stalled: damping failed to reduce the residual",
                residual=norm,
            )
        u = trial
        res = trial_res
        norm = float(np.max(np.abs(res)))
    else:
        raise ConvergenceError(
            f"Moulton iteration did not converge in {max_iter} iterations",
            residual=norm,
        )
    x = _line_positions(m, u, ordering)
    return Configuration.from_primaries(masses, np.column_stack([x, np.zeros(k)]))


# ---------------------------------------------------------------------------
# Equilibrium of the massless body off the primaries' line
# ---------------------------------------------------------------------------

def restricted_position(
    config: Configuration,
    guess: Sequence[float] = (0.0, 1.0),
    *,
    max_iter: int = 200,
) -> Configuration:
    """Solve for the off-line equilibrium position of the massless body.

    The position a solves sum_j m_j (a_j - a)/|a_j - a|^3 = -mu a with mu
    fixed by the primaries.  A damped 2D Newton iteration starts from
    ``guess`` (default (0, 1) in normalized units).  At any off-line
    solution the y-component of the equation forces the identity
    mu = sum_j m_j / |a_j - a|^3, which is verified to 1e-9.

    Parameters
    ----------
    config : Configuration
        Valid collinear configuration of the primaries (on the x-axis).
    guess : pair of floats
        Starting point; must not lie on the primaries' line.
    """
    a = np.asarray(guess, dtype=float).reshape(2)
    if abs(a[1]) < 1e-12:
        raise DomainError("guess must lie off the primaries' line")
    m = config.masses.array
    pos = config.primary_positions
    mu = config.mu

    def f_and_j(point):
        diff = pos - point[None, :]
        r = np.hypot(diff[:, 0], diff[:, 1])
        if np.any(r < 1e-12):
            raise SingularityError("massless body hit a primary during iteration")
        r3 = r**3
        f = (m[:, None] * diff / r3[:, None]).sum(axis=0) + mu * point
        outer = np.einsum("k,ki,kj->ij", m / r**5, diff, diff)
        jac = 3.0 * outer - np.eye(2) * float(np.sum(m / r3)) + mu * np.eye(2)
        return f, jac

    f, jac = f_and_j(a)
    norm = float(np.max(np.abs(f)))
    for _ in range(max_iter):
        if norm < 1e-11:
            break
        step = np.linalg.solve(jac, -f)
        scale = 1.0
        for _ in range(30):
            trial = a + scale * step
            try:
                trial_f, trial_jac = f_and_j(trial)
            except SingularityError:
                scale *= 0.5
                continue
            if np.max(np.abs(trial_f)) < norm:
                break
            scale *= 0.5
        else:
            raise ConvergenceError(
                "restricted-position Newton stalled (30 halvings without progress)",
                residual=norm,
            )
        a, f, jac = trial, trial_f, trial_jac
        norm = float(np.max(np.abs(f)))
    else:
        raise ConvergenceError(
            f"restricted-position Newton did not converge in {max_iter} iterations",
            residual=norm,
        )
    if abs(a[1]) < 1e-8:
        raise DegenerateSolutionError(
            "Newton converged to a point on the primaries' line; "
            "choose a different guess"
        )
    diff = pos - a[None, :]
    r = np.hypot(diff[:, 0], diff[:, 1])
    mu_check = float(np.sum(m / r**3))
    if abs(mu - mu_check) > 1e-9:
        raise InvariantViolation(
            f"off-line multiplier identity violated: |mu - sum m_j/r^3| = "
            f"{abs(mu - mu_check):.3e}"
        )
    return config.with_massless(a)


def locate_offline_equilibria(config: Configuration, samples: int = 2000) -> list[np.ndarray]:
    """All equilibrium positions of the massless body in the open upper half plane.

    For primaries on the x-axis the y-component of the equilibrium equation
    holds exactly on the locus sum_j m_j / |a - a_j|^3 = mu, which is the
    graph of a unique y(x) > 0 wherever the on-axis value exceeds mu (the
    sum is strictly decreasing in y).  Scanning the x-component of the
    equation along that graph finds every off-line equilibrium; mirror
    images below the axis are omitted.
    """
    m = config.masses.array
    pos = config.primary_positions
    if np.max(np.abs(pos[:, 1])) > 1e-10:
        raise DomainError("locate_offline_equilibria needs primaries on the x-axis")
    xs = pos[:, 0]
    mu = config.mu
    reach = float(np.max(np.abs(xs)) + mu ** (-1.0 / 3.0) + 1.0)

    def h(x, y):
        return float(np.sum(m / ((x - xs) ** 2 + y * y) ** 1.5)) - mu

    def y_on_locus(x):
        if h(x, 1e-9) <= 0.0:
            return None
        hi = 1e-6
        while h(x, hi) > 0.0:
            hi *= 2.0
            if hi > 1e6:
                return None
        return brentq(lambda y: h(x, y), 1e-9, hi, xtol=1e-14)

    def fx_on_locus(x):
        y = y_on_locus(x)
        if y is None:
            return None
        return float(np.sum(m * (xs - x) / ((x - xs) ** 2 + y * y) ** 1.5)) + mu * x

    grid = np.linspace(-reach, reach, samples)
    vals = [fx_on_locus(x) for x in grid]
    found: list[np.ndarray] = []
    for (xa, fa), (xb, fb) in zip(zip(grid, vals), zip(grid[1:], vals[1:])):
        if fa is None or fb is None or (fa > 0.0) == (fb > 0.0):
            continue
        xr = brentq(lambda x: fx_on_locus(x), xa, xb, xtol=1e-13)
        yr = y_on_locus(xr)
        if yr is not None:
            found.append(np.array([xr, yr]))
    return found


def offline_equilibrium(config: Configuration, guess: Sequence[float] = (0.0, 1.0)) -> Configuration:
    """Robust off-line equilibrium: Newton first, locus scan as fallback.

    Tries :func:`restricted_position` from ``guess``; if the iteration
    degenerates onto the primaries' line, re-seeds it with the globally
    located equilibrium nearest to the guess.
    """
    try:
        return restricted_position(config, guess)
    except (ConvergenceError, DegenerateSolutionError):
        candidates = locate_offline_equilibria(config)
        if not candidates:
            raise
        ref = np.asarray(guess, dtype=float)
        best = min(candidates, key=lambda a: float(np.hypot(*(a - ref))))
        return restricted_position(config, best)


def solve_symmetric_y(m2: float) -> float:
    """Height parameter y of the massless body for the symmetric 4-body chain.

    For primaries (m1, m2, m1) with m1 = (1 - m2)/2 the massless body sits at
    (0, y (1 - m2)^(-1/2)) where y solves

        (1 - m2)/(y^2 + 1)^(3/2) + m2/y^3 = (1 + 7 m2)/8.

    y decreases strictly from sqrt(3) at m2 = 0 toward 1 as m2 -> 1.
    """
    if not 0.0 <= m2 < 1.0:
        raise DomainError(f"m2 must lie in [0, 1), got {m2}")
    rhs = (1.0 + 7.0 * m2) / 8.0

    def g(y):
        val = (1.0 - m2) / (y * y + 1.0) ** 1.5 - rhs
        if m2:
            val += m2 / y**3
        return val

    y = brentq(g, 1.0 - 1e-9, SQRT3 + 1e-6, xtol=1e-15)
    return float(min(max(y, 1.0), SQRT3))


def symmetric_four_body(m2: float, guess: Sequence[float] | None = None) -> Configuration:
    """Full symmetric restricted 4-body chain: primaries plus massless body.

    m2 = 0 degenerates to two equal primaries; the middle body is dropped
    rather than stored with zero mass.
    """
    if not 0.0 <= m2 < 1.0:
        raise DomainError(f"m2 must lie in [0, 1), got {m2}")
    m1 = 0.5 * (1.0 - m2)
    if m2 > 0.0:
        config = collinear_three_primaries(MassSystem((m1, m2, m1)))
    else:
        config = Configuration.from_primaries(
            MassSystem((0.5, 0.5)), [(-1.0, 0.0), (1.0, 0.0)]
        )
    y = solve_symmetric_y(m2)
    start = (0.0, y * (1.0 - m2) ** -0.5) if guess is None else guess
    return restricted_position(config, start)

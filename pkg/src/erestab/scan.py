"""Parameter sweeps: stability diagrams, separation curves, and thresholds.

Grid scans are deterministic: points are processed in row-major input order
and results carry the settings record that produced them, so re-running a
scan with equal settings reproduces identical output.  Individual point
failures are recorded in the emitted rows and never abort a sweep.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Sequence

import numpy as np

from .central_config import MassSystem, collinear_three_primaries, offline_equilibrium
from .errors import CurveExtractionError, DomainError, ErestabError
from .linearization import StabilityParams, compute_D, spectral_params, symmetric_beta
from .maslov import DEFAULT_LEVELS, morse_index
from .monodromy import (
    DEFAULT_CIRCLE_TOL,
    DEFAULT_TOL,
    SpectrumVerdict,
    classify_spectrum,
    integrate_fundamental,
)
from .polygon_config import PolygonSystem, Site, solve_site

THETA_BETA_MAX = 9.0
THETA_E_MAX = 0.99
CURVE_E_MAX = 0.95


def _env_workers() -> int:
    try:
        return max(1, int(os.environ.get("ERESTAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ScanSettings:
    """Everything that influences a scan's numbers, hashable for provenance."""

    integrator_tol: float = DEFAULT_TOL
    circle_tol: float = DEFAULT_CIRCLE_TOL
    morse_levels: tuple[int, ...] = DEFAULT_LEVELS
    workers: int = field(default_factory=_env_workers)

    def canonical_json(self) -> str:
        return json.dumps(
            {
                "integrator_tol": repr(self.integrator_tol),
                "circle_tol": repr(self.circle_tol),
                "morse_levels": list(self.morse_levels),
            },
            sort_keys=True,
        )

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


DEFAULT_SETTINGS = ScanSettings()


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# ---------------------------------------------------------------------------
# Theta rectangle scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    """One point of the (beta, e) rectangle with verdict and indices.

    ``beta`` is the collinear-family parameter 9 - (lambda3 - lambda4)^2
    in [0, 9]; records are immutable once emitted.
    """

    beta: float
    e: float
    params: StabilityParams | None
    verdict: SpectrumVerdict | None
    phi_1: int | None
    nu_1: int | None
    phi_m1: int | None
    nu_m1: int | None
    eigenvalues: tuple[complex, ...] | None
    sympl_residual: float | None
    source: str
    error: str | None = None


def _theta_point(point: tuple[float, float], settings: ScanSettings) -> ScanRecord:
    beta, e = point
    try:
        p = StabilityParams.from_beta_hls(beta, e)
        mono = integrate_fundamental(p, settings.integrator_tol)
        verdict = classify_spectrum(mono, settings.circle_tol)
        idx1 = morse_index(p, 1.0, settings.morse_levels)
        idxm = morse_index(p, -1.0, settings.morse_levels)
        return ScanRecord(
            beta=beta,
            e=e,
            params=p,
            verdict=verdict,
            phi_1=idx1.phi,
            nu_1=idx1.nu,
            phi_m1=idxm.phi,
            nu_m1=idxm.nu,
            eigenvalues=mono.eigenvalues,
            sympl_residual=mono.symplectic_residual,
            source="grid",
        )
    except ErestabError as exc:
        return ScanRecord(
            beta=beta, e=e, params=None, verdict=None, phi_1=None, nu_1=None,
            phi_m1=None, nu_m1=None, eigenvalues=None, sympl_residual=None,
            source="grid", error=str(exc),
        )


def scan_theta(
    beta_grid: Sequence[float],
    e_grid: Sequence[float],
    settings: ScanSettings = DEFAULT_SETTINGS,
) -> list[ScanRecord]:
    """Verdicts and indices over the parameter rectangle [0, 9] x [0, 0.99).

    One record per grid point, e-major then beta, in the given order.
    """
    for b in beta_grid:
        if not 0.0 <= b <= THETA_BETA_MAX:
            raise DomainError(f"beta {b} outside [0, {THETA_BETA_MAX}]")
    for e in e_grid:
        if not 0.0 <= e <= THETA_E_MAX:
            raise DomainError(f"e {e} outside [0, {THETA_E_MAX}]")
    points = [(float(b), float(e)) for e in e_grid for b in beta_grid]
    return _pmap(partial(_theta_point, settings=settings), points, settings.workers)


# ---------------------------------------------------------------------------
# Separation curves
# ---------------------------------------------------------------------------

class CurveKind(Enum):
    BETA_S = "BetaS"
    BETA_M = "BetaM"
    BETA_K = "BetaK"


@dataclass(frozen=True)
class CurvePoint:
    e: float
    beta: float
    curve: CurveKind
    bracket_width: float
    source: str = "bisection"


def _phi_m1(beta: float, e: float, settings: ScanSettings, cache: dict) -> int:
    key = beta
    if key not in cache:
        p = StabilityParams.from_beta_hls(beta, e)
        cache[key] = morse_index(p, -1.0, settings.morse_levels).phi
    return cache[key]


def _has_circle_spectrum(beta: float, e: float, settings: ScanSettings, cache: dict) -> bool:
    key = beta
    if key not in cache:
        p = StabilityParams.from_beta_hls(beta, e)
        mono = integrate_fundamental(p, settings.integrator_tol)
        moduli = np.abs(np.asarray(mono.eigenvalues))
        cache[key] = bool(np.any(np.abs(moduli - 1.0) < settings.circle_tol))
    return cache[key]


def _bisect_boundary(pred, lo: float, hi: float, resolution: float) -> tuple[float, float]:
    """Shrink [lo, hi] with pred(lo) true, pred(hi) false; returns (mid, width)."""
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), hi - lo


def find_curves(
    e_list: Sequence[float],
    beta_resolution: float = 0.01,
    settings: ScanSettings = DEFAULT_SETTINGS,
    coarse_step: float = 0.05,
) -> list[CurvePoint]:
    """Locate the three separation curves at each requested eccentricity.

    For each e the -1 Morse index over beta in [0, 9] is non-increasing and
    drops by one unit at two boundaries (which merge at e = 0); those two
    points are refined by integer-valued bisection and emitted as BetaS
    (smaller) and BetaM (larger).  BetaK is the boundary below which the
    monodromy spectrum keeps intersecting the unit circle; the first grid
    failure is refined under the fine-grid reading of the supremum.

    Rows where the index data does not show the expected structure are
    skipped with a warning.
    """
    if beta_resolution > 0.01:
        raise DomainError("beta_resolution must be <= 0.01")
    points: list[CurvePoint] = []
    grid = np.arange(0.0, THETA_BETA_MAX + 0.5 * coarse_step, coarse_step)
    grid[-1] = min(grid[-1], THETA_BETA_MAX)
    for e in e_list:
        e = float(e)
        if not 0.0 <= e <= CURVE_E_MAX:
            raise DomainError(f"curve extraction limited to e in [0, {CURVE_E_MAX}]")
        phi_cache: dict = {}
        circ_cache: dict = {}
        try:
            phis = [_phi_m1(b, e, settings, phi_cache) for b in grid]
            if any(b > a for a, b in zip(phis, phis[1:])):
                raise CurveExtractionError(f"phi_-1 not non-increasing at e={e}")
            if phis[0] != 2 or phis[-1] != 0:
                raise CurveExtractionError(
                    f"phi_-1 endpoints ({phis[0]}, {phis[-1]}) != (2, 0) at e={e}"
                )
            jump_betas = []
            for level in (2, 1):
                drops = np.flatnonzero(
                    (np.asarray(phis[:-1]) >= level) & (np.asarray(phis[1:]) < level)
                )
                if drops.size != 1:
                    raise CurveExtractionError(
                        f"expected one phi_-1 >= {level} boundary at e={e}, found {drops.size}"
                    )
                i = int(drops[0])
                beta, width = _bisect_boundary(
                    lambda b: _phi_m1(b, e, settings, phi_cache) >= level,
                    float(grid[i]),
                    float(grid[i + 1]),
                    beta_resolution,
                )
                jump_betas.append((beta, width))
            (b1, w1), (b2, w2) = sorted(jump_betas)
            points.append(CurvePoint(e, b1, CurveKind.BETA_S, w1))
            points.append(CurvePoint(e, b2, CurveKind.BETA_M, w2))

            circ = [_has_circle_spectrum(b, e, settings, circ_cache) for b in grid]
            if not circ[0]:
                raise CurveExtractionError(f"no circle spectrum at beta=0, e={e}")
            fails = np.flatnonzero(~np.asarray(circ))
            if fails.size == 0:
                points.append(CurvePoint(e, float(grid[-1]), CurveKind.BETA_K, 0.0))
            else:
                i = int(fails[0])
                beta, width = _bisect_boundary(
                    lambda b: _has_circle_spectrum(b, e, settings, circ_cache),
                    float(grid[i - 1]),
                    float(grid[i]),
                    beta_resolution,
                )
                points.append(CurvePoint(e, beta, CurveKind.BETA_K, width))
        except ErestabError as exc:
            warnings.warn(f"curve extraction failed at e={e}: {exc}", stacklevel=2)
    return points


def region_of(beta: float, beta_s: float, beta_m: float, beta_k: float) -> str:
    """Region label I..IV of a beta value relative to the three curves."""
    if beta < beta_s:
        return "I"
    if beta < beta_m:
        return "II"
    if beta < beta_k:
        return "III"
    return "IV"


# ---------------------------------------------------------------------------
# Four-body mass plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassScanPoint:
    m1: float
    m3: float
    m2: float
    beta: float | None
    verdict: SpectrumVerdict | None
    error: str | None = None

    @property
    def stable(self) -> bool:
        return self.verdict is not None and self.verdict.is_stable


def _mass_point(point: tuple[float, float], e: float, settings: ScanSettings) -> MassScanPoint:
    m1, m3 = point
    m2 = 1.0 - m1 - m3
    try:
        if m1 <= 0.0 or m3 <= 0.0 or m2 <= 0.0:
            raise DomainError("masses must be positive with m1 + m3 < 1")
        config = collinear_three_primaries(MassSystem.normalized((m1, m2, m3)))
        config = offline_equilibrium(config)
        p = spectral_params(compute_D(config), e)
        mono = integrate_fundamental(p, settings.integrator_tol)
        verdict = classify_spectrum(mono, settings.circle_tol)
        return MassScanPoint(m1=m1, m3=m3, m2=m2, beta=p.beta_hls, verdict=verdict)
    except ErestabError as exc:
        return MassScanPoint(m1=m1, m3=m3, m2=m2, beta=None, verdict=None, error=str(exc))


def mass_scan_4body(
    m1_grid: Sequence[float],
    m3_grid: Sequence[float],
    e: float = 0.0,
    settings: ScanSettings = DEFAULT_SETTINGS,
) -> list[MassScanPoint]:
    """Stability layer over the (m1, m3) plane for the restricted 4-body chain.

    For each admissible pair the middle mass is m2 = 1 - m1 - m3 and the
    verdict is computed through the full chain: spacing quintic, off-line
    equilibrium, stability matrix, monodromy.  Emits one point per grid
    cell in m1-major order; inadmissible or failed cells carry an error.
    """
    points = [(float(a), float(b)) for a in m1_grid for b in m3_grid]
    return _pmap(partial(_mass_point, e=float(e), settings=settings), points, settings.workers)


# ---------------------------------------------------------------------------
# Symmetric-family threshold
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MstarResult:
    value: float
    bracket_low: float
    bracket_high: float
    monotone: bool
    note: str = ""

    @property
    def bracket_width(self) -> float:
        return self.bracket_high - self.bracket_low


def find_mstar(tolerance: float = 1e-6, grid_step: float = 1e-3) -> MstarResult:
    """Critical middle mass of the symmetric chain at e = 0.

    Bisects beta(m2) < 1 (the circular-case stability criterion) on the
    chain y(m2) -> z -> beta = 36 z (1 - z).  The chain is unimodal in m2
    (a hump near m2 ~ 0.09 before the decay to 0), so the grid check
    verifies what the bisection needs: a unique crossing of 1, with beta
    strictly decreasing from the last unstable grid point onward.  If that
    fails, the finest-grid boundary is returned with a warning.
    """
    if tolerance < 1e-8:
        raise DomainError("tolerance must be >= 1e-8")
    grid = np.arange(0.0, 1.0 - 1e-9, grid_step)
    betas = np.array([symmetric_beta(m) for m in grid])
    stable = betas < 1.0
    if stable[0] or not stable[-1]:
        raise CurveExtractionError("beta(m2) does not cross 1 on the grid")
    first = int(np.flatnonzero(stable)[0])
    lo, hi = float(grid[first - 1]), float(grid[first])
    single_crossing = bool(np.all(stable[first:]) and not np.any(stable[:first]))
    decreasing_past = bool(np.all(np.diff(betas[first - 1 :]) < 0.0))
    if not (single_crossing and decreasing_past):
        warnings.warn(
            "beta(m2) is not monotone through the crossing; "
            "returning the finest-grid boundary",
            stacklevel=2,
        )
        return MstarResult(0.5 * (lo + hi), lo, hi, monotone=False,
                           note="non-monotone chain; grid boundary")
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if symmetric_beta(mid) < 1.0:
            hi = mid
        else:
            lo = mid
    return MstarResult(0.5 * (lo + hi), lo, hi, monotone=True)


# ---------------------------------------------------------------------------
# Polygon verdict table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonVerdictRecord:
    n: int
    m0_over_M: float
    e: float
    site: Site
    rho: float | None
    lambda3: float | None
    lambda4: float | None
    alpha: float | None
    beta: float | None
    verdict: SpectrumVerdict | None
    phi_1: int | None
    nu_1: int | None
    phi_m1: int | None
    nu_m1: int | None
    error: str | None = None


def _polygon_cell(
    cell: tuple[int, float, float, Site], settings: ScanSettings
) -> PolygonVerdictRecord:
    n, ratio, e, site = cell
    try:
        sys = PolygonSystem.from_mass_ratio(n, ratio)
        bang = solve_site(sys, site)
        p = StabilityParams(bang.lambda3, bang.lambda4, e)
        mono = integrate_fundamental(p, settings.integrator_tol)
        verdict = classify_spectrum(mono, settings.circle_tol)
        idx1 = morse_index(p, 1.0, settings.morse_levels)
        idxm = morse_index(p, -1.0, settings.morse_levels)
        return PolygonVerdictRecord(
            n=n, m0_over_M=ratio, e=e, site=site, rho=bang.rho,
            lambda3=p.lambda3, lambda4=p.lambda4, alpha=p.alpha, beta=p.beta,
            verdict=verdict, phi_1=idx1.phi, nu_1=idx1.nu,
            phi_m1=idxm.phi, nu_m1=idxm.nu,
        )
    except ErestabError as exc:
        return PolygonVerdictRecord(
            n=n, m0_over_M=ratio, e=e, site=site, rho=None, lambda3=None,
            lambda4=None, alpha=None, beta=None, verdict=None, phi_1=None,
            nu_1=None, phi_m1=None, nu_m1=None, error=str(exc),
        )


def polygon_verdicts(
    n_list: Sequence[int] = (4, 8, 12),
    m0_over_M_list: Sequence[float] = (10.0, 100.0, 1000.0, 10000.0),
    e_list: Sequence[float] = (0.0, 0.1),
    sites: Sequence[Site] = (Site.S1, Site.S2, Site.S3),
    settings: ScanSettings = DEFAULT_SETTINGS,
) -> list[PolygonVerdictRecord]:
    """Verdict and index table over (n, m0/M, e, site) cells."""
    if not (n_list and m0_over_M_list and e_list and sites):
        raise DomainError("all sweep lists must be nonempty")
    cells = [
        (int(n), float(r), float(e), site)
        for n in n_list
        for r in m0_over_M_list
        for e in e_list
        for site in sites
    ]
    return _pmap(partial(_polygon_cell, settings=settings), cells, settings.workers)

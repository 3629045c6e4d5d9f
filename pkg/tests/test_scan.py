import numpy as np
import pytest

from erestab.errors import DomainError
from erestab.linearization import symmetric_beta
from erestab.monodromy import Verdict, classify_spectrum, integrate_fundamental
from erestab.linearization import StabilityParams
from erestab.scan import (
    CurveKind,
    ScanSettings,
    find_curves,
    find_mstar,
    mass_scan_4body,
    polygon_verdicts,
    region_of,
    scan_theta,
)
from erestab.polygon_config import Site

FAST = ScanSettings(integrator_tol=1e-10, morse_levels=(32, 64, 128, 256))


def by_curve(points, e):
    return {
        p.curve: p.beta for p in points if p.e == e
    }


class TestScanTheta:
    def test_known_verdicts(self):
        records = scan_theta([0.5, 2.0, 9.0], [0.0], FAST)
        verdicts = {r.beta: r.verdict.verdict for r in records}
        assert verdicts[0.5] is Verdict.STRONGLY_LINEARLY_STABLE
        assert not verdicts[2.0].is_stable
        assert not verdicts[9.0].is_stable
        assert all(r.error is None for r in records)

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            scan_theta([10.0], [0.0], FAST)
        with pytest.raises(DomainError):
            scan_theta([1.0], [0.995], FAST)

    def test_reproducible(self):
        a = scan_theta([0.4, 1.7], [0.1, 0.5], FAST)
        b = scan_theta([0.4, 1.7], [0.1, 0.5], FAST)
        assert a == b

    def test_row_major_order(self):
        records = scan_theta([0.0, 1.0], [0.0, 0.2], FAST)
        assert [(r.beta, r.e) for r in records] == [
            (0.0, 0.0), (1.0, 0.0), (0.0, 0.2), (1.0, 0.2)
        ]

    def test_indices_emitted(self):
        (rec,) = scan_theta([0.3], [0.2], FAST)
        assert rec.phi_m1 == 2 and rec.phi_1 == 0
        assert rec.nu_1 == 0 and rec.nu_m1 == 0


class TestCurves:
    def test_circular_row(self):
        points = find_curves([0.0], beta_resolution=0.01, settings=FAST)
        betas = by_curve(points, 0.0)
        assert set(betas) == {CurveKind.BETA_S, CurveKind.BETA_M, CurveKind.BETA_K}
        # the two index jumps coincide at e = 0 near beta = 3/4
        assert abs(betas[CurveKind.BETA_S] - 0.75) < 0.03
        assert abs(betas[CurveKind.BETA_M] - 0.75) < 0.03
        # the spectral-escape boundary sits at the circular stability edge
        assert abs(betas[CurveKind.BETA_K] - 1.0) < 0.02
        assert all(p.bracket_width <= 0.01 for p in points)

    def test_tongue_opens_with_eccentricity(self):
        points = find_curves([0.2], beta_resolution=0.01, settings=FAST)
        betas = by_curve(points, 0.2)
        assert betas[CurveKind.BETA_S] < betas[CurveKind.BETA_M] - 0.2
        assert betas[CurveKind.BETA_S] <= betas[CurveKind.BETA_M] <= betas[
            CurveKind.BETA_K
        ] + 0.01

    def test_resolution_halving_moves_points_less_than_coarse_step(self):
        coarse = by_curve(find_curves([0.1], 0.01, FAST), 0.1)
        fine = by_curve(find_curves([0.1], 0.005, FAST), 0.1)
        for kind in coarse:
            assert abs(coarse[kind] - fine[kind]) <= 0.01

    def test_resolution_validated(self):
        with pytest.raises(DomainError):
            find_curves([0.1], beta_resolution=0.05, settings=FAST)

    def test_region_agreement_with_verdicts(self):
        e = 0.2
        betas = by_curve(find_curves([e], 0.01, FAST), e)
        bs, bm, bk = (betas[k] for k in (CurveKind.BETA_S, CurveKind.BETA_M, CurveKind.BETA_K))
        grid = [b for b in np.arange(0.05, 9.0, 0.18)
                if min(abs(b - bs), abs(b - bm), abs(b - bk)) > 0.02]
        agree = 0
        for b in grid:
            verdict = classify_spectrum(
                integrate_fundamental(StabilityParams.from_beta_hls(b, e), 1e-10)
            )
            strong = verdict.verdict is Verdict.STRONGLY_LINEARLY_STABLE
            in_stable_region = region_of(b, bs, bm, bk) in ("I", "III")
            agree += strong == in_stable_region
        assert agree >= 0.99 * len(grid)


class TestMassScan:
    def test_threshold_points_on_diagonal(self):
        pts = mass_scan_4body([0.0727], [0.0727], 0.0, FAST)  # m2 = 0.8546 > m*
        assert pts[0].stable
        pts = mass_scan_4body([0.25], [0.25], 0.0, FAST)  # m2 = 0.5, beta > 1
        assert not pts[0].stable and pts[0].beta > 1.0

    def test_symmetry_under_mass_swap(self):
        grid = [0.05, 0.2, 0.35]
        pts = mass_scan_4body(grid, grid, 0.0, FAST)
        table = {(p.m1, p.m3): p.stable for p in pts}
        for a in grid:
            for b in grid:
                assert table[(a, b)] == table[(b, a)]
        # heavy middle mass m2 = 0.9 on the diagonal is stable
        assert table[(0.05, 0.05)]

    def test_inadmissible_cells_recorded(self):
        pts = mass_scan_4body([0.6], [0.6], 0.0, FAST)
        assert pts[0].error is not None
        assert pts[0].verdict is None


class TestMstar:
    def test_value_and_bracket(self):
        res = find_mstar(1e-6)
        assert 0.84 <= res.value <= 0.87
        assert res.bracket_width < 1e-6
        assert res.monotone
        assert res.bracket_low - 0.005 <= 0.854 <= res.bracket_high + 0.005

    def test_beta_straddles_one(self):
        res = find_mstar(1e-6)
        assert symmetric_beta(res.value + 0.01) < 1.0 < symmetric_beta(res.value - 0.01)

    def test_monodromy_agrees_with_beta_criterion(self):
        res = find_mstar(1e-6)
        for dm, expect_stable in ((+0.01, True), (-0.01, False)):
            beta = symmetric_beta(res.value + dm)
            verdict = classify_spectrum(
                integrate_fundamental(StabilityParams.from_beta_hls(beta, 0.0), 1e-10)
            )
            assert verdict.is_stable == expect_stable

    def test_tolerance_validated(self):
        with pytest.raises(DomainError):
            find_mstar(1e-9)


class TestPolygonVerdicts:
    def test_table_shape_and_order(self):
        records = polygon_verdicts([8], [1e3], [0.0, 0.1], [Site.S1, Site.S3], FAST)
        assert [(r.e, r.site) for r in records] == [
            (0.0, Site.S1), (0.0, Site.S3), (0.1, Site.S1), (0.1, Site.S3)
        ]

    def test_heavy_center_verdicts(self):
        records = polygon_verdicts([8], [1e3], [0.0, 0.1], list(Site), FAST)
        for r in records:
            assert r.error is None
            if r.site in (Site.S1, Site.S2):
                assert not r.verdict.is_stable
            else:
                assert r.verdict.is_stable
                assert r.phi_m1 - r.phi_1 == 2

    def test_empty_lists_rejected(self):
        with pytest.raises(DomainError):
            polygon_verdicts([], [10.0], [0.0], [Site.S1], FAST)


class TestParallel:
    def test_worker_pool_matches_serial(self):
        serial = scan_theta([0.4, 2.2], [0.0, 0.3], FAST)
        parallel = scan_theta(
            [0.4, 2.2], [0.0, 0.3],
            ScanSettings(integrator_tol=FAST.integrator_tol,
                         morse_levels=FAST.morse_levels, workers=2),
        )
        assert serial == parallel

    def test_env_var_caps_workers(self, monkeypatch):
        monkeypatch.setenv("ERESTAB_THREADS", "3")
        assert ScanSettings().workers == 3
        monkeypatch.setenv("ERESTAB_THREADS", "junk")
        assert ScanSettings().workers == 1

    def test_settings_digest_ignores_workers(self):
        a = ScanSettings(workers=1)
        b = ScanSettings(workers=4)
        assert a.digest() == b.digest()

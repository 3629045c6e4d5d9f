import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from erestab.errors import ConvergenceError, DomainError
from erestab.linearization import StabilityParams
from erestab.maslov import (
    assemble_operator,
    index_monodromy_consistency,
    kernel_dimension,
    morse_index,
    positivity_check,
    r_e_fourier_coefficients,
)
from erestab.monodromy import integrate_fundamental
from erestab.polygon_config import PolygonSystem, Site, solve_site

from oracles import operator_spectrum_e0


def params(alpha, beta, e):
    return StabilityParams.from_alpha_beta(alpha, beta, e)


class TestFourierCoefficients:
    def test_against_quadrature(self):
        e = 0.6
        c = r_e_fourier_coefficients(e, 8)
        for m in range(9):
            val, _ = quad(
                lambda t: math.cos(m * t) / (1.0 + e * math.cos(t)),
                0.0,
                math.pi,
                epsabs=1e-13,
                epsrel=1e-13,
            )
            assert c[m] == pytest.approx(val / math.pi, abs=1e-12)

    def test_circular_case_is_delta(self):
        c = r_e_fourier_coefficients(0.0, 5)
        assert np.array_equal(c, np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]))


class TestAssembly:
    def test_exact_hermiticity(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            p = params(rng.uniform(0, 2), rng.uniform(0, 3), rng.uniform(0, 0.8))
            omega = cmath.exp(2j * math.pi * rng.uniform(0, 1))
            h = assemble_operator(p, omega, 16)
            assert np.max(np.abs(h - h.conj().T)) < 1e-13 * np.max(np.abs(h))

    def test_circular_case_banded_exactly(self):
        h = assemble_operator(params(0.5, 1.0, 0.0), -1.0, 12)
        n = 25
        blocks = h.reshape(n, 2, n, 2)
        for j in range(n):
            for k in range(n):
                if abs(j - k) not in (0, 2):
                    assert np.all(blocks[j, :, k, :] == 0.0)

    def test_circular_diagonal_closed_form(self):
        # alpha = 1/2, beta = 0, omega = 1: eigenvalues k^2 + 1/2, doubled
        h = assemble_operator(params(0.5, 0.0, 0.0), 1.0, 16)
        vals = np.sort(np.linalg.eigvalsh(h))
        ks = np.arange(-16, 17)
        want = np.sort(np.concatenate([ks**2 + 0.5, ks**2 + 0.5]))
        assert np.max(np.abs(vals - want)) < 1e-12

    def test_validation(self):
        with pytest.raises(DomainError):
            assemble_operator(params(0.5, 0.0, 0.0), 1.0, 4)
        with pytest.raises(DomainError):
            assemble_operator(params(0.5, 0.0, 0.0), 2.0, 16)


class TestMorseIndex:
    @pytest.mark.parametrize("alpha,beta,rho", [(0.5, 1.2, 0.0), (0.5, 1.2, 0.5),
                                                (1.5, 2.5, 0.25), (0.0, 0.3, 0.1)])
    def test_circular_counts_match_closed_form(self, alpha, beta, rho):
        spectrum = operator_spectrum_e0(alpha, beta, rho, 300)
        want_phi = int(np.count_nonzero(spectrum < -1e-9))
        res = morse_index(params(alpha, beta, 0.0), cmath.exp(2j * math.pi * rho))
        assert res.phi == want_phi
        assert res.stabilized

    def test_phi1_vanishes_below_three_halves(self):
        for beta in (0.3, 0.8, 1.2, 1.45):
            for e in (0.1, 0.4, 0.7):
                assert morse_index(params(0.5, beta, e), 1.0).phi == 0

    def test_phi_minus_one_anchor(self):
        res = morse_index(params(0.5, 1.5, 0.2), -1.0)
        assert res.phi == 2
        assert res.nu == 0

    def test_monotone_in_family_parameter(self):
        # phi_-1 non-increasing as the collinear-family beta grows
        e = 0.2
        phis = [
            morse_index(StabilityParams.from_beta_hls(b, e), -1.0).phi
            for b in np.arange(0.0, 9.01, 0.5)
        ]
        assert all(b <= a for a, b in zip(phis, phis[1:]))
        assert phis[0] == 2 and phis[-1] == 0

    def test_operator_domination_in_alpha(self):
        e, beta = 0.3, 1.0
        mins = [
            morse_index(params(alpha, beta, e), 1.0).min_eigenvalue
            for alpha in (0.2, 0.5, 1.0, 2.0)
        ]
        assert all(b >= a for a, b in zip(mins, mins[1:]))

    def test_non_stabilization_raises(self):
        with pytest.raises(ConvergenceError):
            morse_index(params(0.5, 1.0, 0.3), 1.0, levels=(16,))


class TestPositivity:
    def test_flat_operator_positive_on_full_circle(self):
        assert positivity_check(params(0.5, 0.0, 0.0), omega_samples=16, levels=(16, 32))

    def test_heavy_center_limit_not_positive(self):
        assert not positivity_check(params(2.0, 6.0, 0.1), omega_samples=16, levels=(32, 64))

    def test_polygon_s3_positive_at_one(self):
        bang = solve_site(PolygonSystem.from_mass_ratio(8, 1e4), Site.S3)
        res = morse_index(StabilityParams(bang.lambda3, bang.lambda4, 0.2), 1.0)
        assert res.phi == 0 and res.nu == 0
        assert res.min_eigenvalue > 0.0

    def test_sample_count_validated(self):
        with pytest.raises(DomainError):
            positivity_check(params(0.5, 0.0, 0.0), omega_samples=8)


class TestConsistency:
    def test_nullity_matches_monodromy_kernel_at_degeneracy(self):
        p = StabilityParams.from_beta_hls(0.75, 0.0)
        rep = index_monodromy_consistency(p)
        assert rep.nu_operator == rep.nu_monodromy
        assert rep.nu_operator[1] == 2  # omega = -1 at the circular degeneracy

    def test_generic_points_have_empty_kernels(self):
        rng = np.random.default_rng(21)
        for _ in range(6):
            p = StabilityParams.from_beta_hls(rng.uniform(0, 9), rng.uniform(0, 0.7))
            rep = index_monodromy_consistency(p)
            assert rep.nu_consistent

    def test_jump_sum_polygon_s3(self):
        bang = solve_site(PolygonSystem.from_mass_ratio(8, 1e3), Site.S3)
        p = StabilityParams(bang.lambda3, bang.lambda4, 0.1)
        rep = index_monodromy_consistency(p)
        assert rep.phi_m1 - rep.phi_1 == 2
        assert rep.jump_from_monodromy == 2
        assert rep.consistent

    def test_jump_sum_stable_collinear(self):
        rep = index_monodromy_consistency(StabilityParams.from_beta_hls(0.9, 0.1))
        assert rep.jump_from_indices == 0
        assert rep.jump_from_monodromy == 0

    def test_hyperbolic_point_all_nullities_zero(self):
        p = StabilityParams.from_beta_hls(4.0, 0.1)
        rep = index_monodromy_consistency(p)
        assert rep.nu_monodromy == (0, 0, 0, 0)
        assert rep.nu_consistent

    def test_kernel_dimension_gate(self):
        mono = integrate_fundamental(StabilityParams.from_beta_hls(3.0, 0.2))
        assert kernel_dimension(mono.gamma_end, 1.0) == 0
        assert kernel_dimension(np.eye(4), 1.0) == 4

"""Twisted Morse indices of the second-order stability operator.

The operator

    A(alpha, beta, e) = -d^2/dt^2 I2 - I2 + r_e(t) [ (1 + alpha) I2 + beta S(t) ],

with r_e(t) = 1/(1 + e cos t) and S(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]],
acts on the twisted domain {y : y(2*pi) = w y(0), y'(2*pi) = w y'(0)} for a
unit complex w.  Its Morse index phi_w (number of negative eigenvalues) and
nullity nu_w (kernel dimension) equal the w-indices of the monodromy path,
with nu_w also equal to dim ker(gamma(2*pi) - w I).

Discretization is a Fourier-Galerkin scheme in the twisted basis
e^{i (k + rho) t} with w = e^{2*pi*i*rho}: r_e has the exact geometric
Fourier coefficients c_m = b^{|m|} / sqrt(1 - e^2), b = -e/(1 + sqrt(1 - e^2)),
and S couples modes k and k +- 2 only, so assembly is exact and spectrally
convergent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import ConvergenceError, DomainError
from .linearization import J4, StabilityParams
from .monodromy import DEFAULT_CIRCLE_TOL, DEFAULT_TOL, Monodromy, integrate_fundamental

# Kernel band half-width as a fraction of the base-level matrix norm.  The
# assembly is exact and eigvalsh is backward stable, so true kernel
# eigenvalues are resolved to ~1e-12 of the norm; a band much wider than
# that (e.g. 1e-7) misclassifies genuinely small nonzero eigenvalues near
# the index-jump curves and breaks the nullity/monodromy-kernel agreement.
KERNEL_TOL_FACTOR = 1e-10
DEFAULT_LEVELS = (64, 128, 256, 512, 1024)

# S(t) = (e^{2it} N_plus + e^{-2it} N_minus) / 2
N_PLUS = np.array([[1.0, -1.0j], [-1.0j, -1.0]])
N_MINUS = np.array([[1.0, 1.0j], [1.0j, -1.0]])


def r_e_fourier_coefficients(e: float, mmax: int) -> np.ndarray:
    """Fourier coefficients c_0..c_mmax of 1/(1 + e cos t).

    c_m = b^|m| / sqrt(1 - e^2) with b = -e / (1 + sqrt(1 - e^2)).
    """
    if not 0.0 <= e < 1.0:
        raise DomainError(f"eccentricity must lie in [0, 1), got {e}")
    root = math.sqrt(1.0 - e * e)
    b = -e / (1.0 + root)
    return b ** np.arange(mmax + 1) / root


def omega_to_rho(omega: complex) -> float:
    """rho in [0, 1) with omega = e^{2*pi*i*rho}."""
    w = complex(omega)
    if abs(abs(w) - 1.0) > 1e-9:
        raise DomainError(f"omega must lie on the unit circle, got |omega| = {abs(w)}")
    return (cmath.phase(w) / (2.0 * math.pi)) % 1.0


def assemble_operator(p: StabilityParams, omega: complex, K: int) -> np.ndarray:
    """Galerkin matrix of the stability operator in the twisted Fourier basis.

    Size 2(2K+1), exactly Hermitian; at e = 0 the matrix is banded with
    couplings only at |j - k| in {0, 2}.
    """
    if K < 8:
        raise DomainError("K must be at least 8")
    if p.e > 0.99:
        raise DomainError(f"eccentricity {p.e} exceeds the supported limit 0.99")
    rho = omega_to_rho(omega)
    alpha, beta = p.alpha, p.beta
    modes = np.arange(-K, K + 1) + rho
    c = r_e_fourier_coefficients(p.e, 2 * K + 2)

    # scalar Toeplitz blocks: C0[j,k] = c_|j-k|, CP[j,k] = c_|j-k-2|
    idx = np.arange(2 * K + 1)
    c0 = toeplitz(c[idx])
    cp = toeplitz(c[np.abs(idx - 2)], c[idx + 2])
    diag = np.diag(modes**2 - 1.0)

    h = np.kron(diag + (1.0 + alpha) * c0, np.eye(2)).astype(complex)
    h += 0.5 * beta * (np.kron(cp, N_PLUS) + np.kron(cp.T, N_MINUS))
    return h


@dataclass(frozen=True)
class IndexResult:
    """Morse index data at one unit-circle point.

    phi counts discretized eigenvalues below -kernel_tol, nu those within
    [-kernel_tol, kernel_tol]; ``stabilized`` records that two consecutive
    truncation levels agreed on both counts.
    """

    omega: complex
    rho: float
    phi: int
    nu: int
    num_modes: int
    min_eigenvalue: float
    kernel_gap: float
    stabilized: bool


def _counts(h: np.ndarray, tol: float) -> tuple[int, int, float, float]:
    vals = np.linalg.eigvalsh(h)
    phi = int(np.count_nonzero(vals < -tol))
    nu = int(np.count_nonzero(np.abs(vals) <= tol))
    nonkernel = np.abs(vals)[np.abs(vals) > tol]
    gap = float(nonkernel.min()) if nonkernel.size else float("inf")
    return phi, nu, float(vals[0]), gap


def morse_index(
    p: StabilityParams, omega: complex, levels: tuple[int, ...] = DEFAULT_LEVELS
) -> IndexResult:
    """Stabilized Morse index phi_w and nullity nu_w of the operator.

    The truncation level escalates through ``levels`` until two consecutive
    levels agree on both counts; disagreement at the last level raises a
    convergence error carrying the last two counts.  The kernel band is
    sized once, from the base-level matrix norm: a band that widened with
    the truncation would swallow genuinely small eigenvalues and the counts
    could never stabilize near them.
    """
    rho = omega_to_rho(omega)
    prev: tuple[int, int] | None = None
    last = None
    tol = None
    for K in levels:
        h = assemble_operator(p, omega, K)
        if tol is None:
            tol = KERNEL_TOL_FACTOR * float(np.max(np.sum(np.abs(h), axis=1)))
        phi, nu, min_eig, gap = _counts(h, tol)
        if prev == (phi, nu):
            return IndexResult(
                omega=complex(omega),
                rho=rho,
                phi=phi,
                nu=nu,
                num_modes=2 * K + 1,
                min_eigenvalue=min_eig,
                kernel_gap=gap,
                stabilized=True,
            )
        prev = (phi, nu)
        last = (phi, nu)
    raise ConvergenceError(
        f"Morse index did not stabilize up to K={levels[-1]}; last counts {last}"
    )


def positivity_check(
    p: StabilityParams,
    omega_samples: int = 16,
    levels: tuple[int, ...] = DEFAULT_LEVELS,
) -> bool:
    """True when the operator is positive definite at every sampled omega.

    Samples rho = j / omega_samples on a uniform circle grid; positive
    definiteness at all omega certifies hyperbolicity of the monodromy.
    """
    if omega_samples < 16:
        raise DomainError("omega_samples must be at least 16")
    for j in range(omega_samples):
        omega = cmath.exp(2j * math.pi * j / omega_samples)
        result = morse_index(p, omega, levels)
        if result.phi > 0 or result.nu > 0:
            return False
    return True


# ---------------------------------------------------------------------------
# Consistency between operator indices and the monodromy
# ---------------------------------------------------------------------------

def kernel_dimension(mat: np.ndarray, omega: complex, circle_tol: float = DEFAULT_CIRCLE_TOL) -> int:
    """dim ker(M - omega I) by singular-value rank with threshold sqrt(circle_tol).

    The kernel is empty unless omega is close to an eigenvalue, so the rank
    test only runs behind that gate; a bare singular-value threshold would
    report spurious kernels for strongly non-normal matrices.
    """
    guard = math.sqrt(circle_tol)
    eigs = np.linalg.eigvals(mat)
    algebraic = int(np.count_nonzero(np.abs(eigs - complex(omega)) < guard))
    if algebraic == 0:
        return 0
    sv = np.linalg.svd(mat - complex(omega) * np.eye(mat.shape[0]), compute_uv=False)
    geometric = int(np.count_nonzero(sv < guard * np.linalg.norm(mat, 2)))
    return min(geometric, algebraic)


def _circle_jump_sum(mat: np.ndarray, circle_tol: float) -> int | None:
    """Signed index-jump total over upper-half-circle eigenvalues of ``mat``.

    Each simple on-circle eigenvalue in the open upper half plane carries a
    splitting jump of -sign(Im(v^H J v)) (its negative Krein sign); returns
    None when eigenvalues sit at or cluster near +-1 and the jump cannot be
    resolved from the spectrum alone.
    """
    eigs, vecs = np.linalg.eig(mat)
    guard = math.sqrt(circle_tol)
    on = np.abs(np.abs(eigs) - 1.0) < circle_tol
    if np.any(on & ((np.abs(eigs - 1.0) < guard) | (np.abs(eigs + 1.0) < guard))):
        return None
    upper = np.flatnonzero(on & (eigs.imag > 0.0))
    for a in range(len(upper)):
        for b in range(a + 1, len(upper)):
            if abs(eigs[upper[a]] - eigs[upper[b]]) < guard:
                return None  # clustered pair: Krein signs unresolved
    total = 0
    for i in upper:
        v = vecs[:, i]
        sign_q = (np.conj(v) @ (J4 @ v)).imag
        if abs(sign_q) < 1e-12:
            return None
        total += -1 if sign_q > 0 else 1
    return total


@dataclass(frozen=True)
class ConsistencyReport:
    """Cross-checks between operator indices and the monodromy spectrum."""

    params: StabilityParams
    omegas: tuple[complex, ...]
    nu_operator: tuple[int, ...]
    nu_monodromy: tuple[int, ...]
    phi_1: int
    phi_m1: int
    jump_from_indices: int
    jump_from_monodromy: int | None

    @property
    def nu_consistent(self) -> bool:
        return self.nu_operator == self.nu_monodromy

    @property
    def jump_consistent(self) -> bool | None:
        if self.jump_from_monodromy is None:
            return None
        return self.jump_from_indices == self.jump_from_monodromy

    @property
    def consistent(self) -> bool:
        return self.nu_consistent and self.jump_consistent is not False


def index_monodromy_consistency(
    p: StabilityParams,
    *,
    tol: float = DEFAULT_TOL,
    circle_tol: float = DEFAULT_CIRCLE_TOL,
    extra_rhos: tuple[float, ...] = (0.1, 0.25),
    levels: tuple[int, ...] = DEFAULT_LEVELS,
    monodromy: Monodromy | None = None,
) -> ConsistencyReport:
    """Check nu_w against dim ker(gamma(2*pi) - w I) and the index jump sum.

    The jump check compares phi_{-1} - phi_1 with the total signed splitting
    jump read off the on-circle monodromy eigenvalues; a discrepancy is
    reported in the result, never raised.
    """
    mono = monodromy if monodromy is not None else integrate_fundamental(p, tol)
    mat = mono.gamma_end
    omegas = [1.0 + 0.0j, -1.0 + 0.0j]
    omegas += [cmath.exp(2j * math.pi * r) for r in extra_rhos]
    nu_op = []
    nu_mono = []
    phi1 = phim1 = 0
    for w in omegas:
        res = morse_index(p, w, levels)
        nu_op.append(res.nu)
        nu_mono.append(kernel_dimension(mat, w, circle_tol))
        if w == 1.0 + 0.0j:
            phi1 = res.phi
        elif w == -1.0 + 0.0j:
            phim1 = res.phi
    return ConsistencyReport(
        params=p,
        omegas=tuple(omegas),
        nu_operator=tuple(nu_op),
        nu_monodromy=tuple(nu_mono),
        phi_1=phi1,
        phi_m1=phim1,
        jump_from_indices=phim1 - phi1,
        jump_from_monodromy=_circle_jump_sum(mat, circle_tol),
    )

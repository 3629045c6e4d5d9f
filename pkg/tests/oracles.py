"""Independent oracles used to freeze and verify expected values.

Everything here deliberately avoids the production code paths: polynomial
companion roots instead of bracketed Brent, high-precision summation
instead of fsum, closed-form spectra instead of Galerkin matrices, and a
direct quartic-multiplier formula instead of integrated monodromies.
"""

import math

import numpy as np


def quintic_positive_roots(m1, m2, m3):
    """All positive real roots of the collinear spacing quintic via companion
    eigenvalues (numpy.roots)."""
    coeffs = [
        m3 + m2,
        3 * m3 + 2 * m2,
        3 * m3 + m2,
        -(3 * m1 + m2),
        -(3 * m1 + 2 * m2),
        -(m1 + m2),
    ]
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) < 1e-9 * np.maximum(1.0, np.abs(roots.real))].real
    return np.sort(real[real > 0])


def cc_defect_complex(masses, positions, mu, massless=None):
    """Central-configuration defect via complex arithmetic (independent of the
    production vector implementation)."""
    zs = [complex(p[0], p[1]) for p in positions]
    worst = 0.0
    for i, zi in enumerate(zs):
        acc = 0.0 + 0.0j
        for j, zj in enumerate(zs):
            if j == i:
                continue
            acc += masses[j] * (zj - zi) / abs(zj - zi) ** 3
        worst = max(worst, abs(acc + mu * zi))
    if massless is not None:
        zn = complex(massless[0], massless[1])
        acc = sum(m * (z - zn) / abs(z - zn) ** 3 for m, z in zip(masses, zs))
        worst = max(worst, abs(acc + mu * zn))
    return worst


def hn_highprec(n, x, u, dps=64):
    """Naive term-by-term lattice mean at dps decimal digits."""
    import mpmath as mp

    with mp.workdps(dps):
        x = mp.mpf(x)
        u = mp.mpf(u)
        total = mp.mpf(0)
        for j in range(1, n + 1):
            c = mp.cos(2 * mp.pi * j / n + u)
            total += (1 - x * c) / (1 + x * x - 2 * x * c) ** mp.mpf(1.5)
        return float(total / n)


def symmetric_y_highprec(m2, dps=40):
    """Height parameter of the symmetric chain via mpmath root finding."""
    import mpmath as mp

    with mp.workdps(dps):
        m2 = mp.mpf(m2)

        def f(y):
            val = (1 - m2) / (y * y + 1) ** mp.mpf(1.5) - (1 + 7 * m2) / 8
            if m2 != 0:
                val += m2 / y**3
            return val

        return float(mp.findroot(f, mp.mpf("1.3")))


def routh_beta(m1, m2, m3):
    """Equilateral-family mass parameter 27 (m1 m2 + m2 m3 + m3 m1) / (sum m)^2."""
    return 27.0 * (m1 * m2 + m2 * m3 + m3 * m1) / (m1 + m2 + m3) ** 2


def operator_spectrum_e0(alpha, beta, rho, nmax):
    """Closed-form circular-case operator spectrum on the twisted domain.

    After rotating coordinates the operator becomes autonomous; each twisted
    frequency nu in Z + rho contributes the 2x2 block eigenvalues
    nu^2 + 1 + alpha +- sqrt(beta^2 + 4 nu^2).
    """
    out = []
    for k in range(-nmax, nmax + 1):
        nu = k + rho
        s = math.sqrt(beta * beta + 4.0 * nu * nu)
        out.append(nu * nu + 1.0 + alpha - s)
        out.append(nu * nu + 1.0 + alpha + s)
    return np.sort(out)


def monodromy_eigs_e0(lam3, lam4):
    """Circular-case multipliers from the exponent quartic.

    Exponents x solve (lam3 - x^2)(lam4 - x^2) + 4 x^2 = 0; the multipliers
    are exp(2 pi x).
    """
    xs = np.roots([1.0, 0.0, 4.0 - lam3 - lam4, 0.0, lam3 * lam4])
    return np.exp(2.0 * np.pi * xs)


def diamond(*blocks):
    """Symplectic direct sum of 2x2 blocks in (Z1, Z2, z1, z2) coordinates."""
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n))
    for i, b in enumerate(blocks):
        idx = [i, i + n]
        out[np.ix_(idx, idx)] = np.asarray(b, dtype=float)
    return out


def rot(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def match_eigs(a, b):
    """Max eigenvalue distance under optimal pairing (independent pairing code)."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    worst = 0.0
    for x in a:
        j = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b[j]))
        b.pop(j)
    return worst

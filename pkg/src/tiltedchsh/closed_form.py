"""Exact quantum values of the doubly-tilted CHSH functional.

``CHSH + alpha<A_0> + beta<B_0>`` reaches its quantum maximum at the largest
real root of a degree-6 polynomial in the value (degree 4 on the diagonal
``alpha == beta``). The maximising cosines of the angles between each
party's two observables then follow from a quadratic.

Polynomial coefficients are stored in ascending degree order throughout.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import matrix_balance

from ._validation import PolynomialError, RadicandError, TiltRangeError, check_tilts

#: Companion eigenvalues with a relative imaginary part below this count as real.
IMAG_TOL = 1e-8
#: Eigenvalues closer than this (relative) are examined as a possible multiple root.
CLUSTER_TOL = 1e-4
#: Above this value of alpha + beta the optimum is nearly merged with the classical bound.
LOW_CONFIDENCE_EDGE = 1.99


@dataclass(frozen=True, eq=False)
class PolySpec:
    """Polynomial with ascending ``coeffs`` and its real roots (sorted ascending)."""

    coeffs: np.ndarray
    real_roots: np.ndarray
    multiplicities: tuple
    provenance: str
    alpha: float = float("nan")
    beta: float = float("nan")
    out_of_region: bool = False
    low_confidence: bool = False

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def largest_real_root(self):
        if len(self.real_roots) == 0:
            return float("nan")
        return float(self.real_roots[-1])

    @property
    def has_multiple_root(self):
        return any(m > 1 for m in self.multiplicities)

    def __call__(self, lam):
        return P.polyval(lam, self.coeffs)

    def scale(self, lam):
        """Size of the largest term at ``lam``, the natural unit for residuals."""
        return float(np.max(np.abs(self.coeffs) * np.abs(lam) ** np.arange(len(self.coeffs))))


def _newton(coeffs, x, iters=60):
    dcoeffs = P.polyder(coeffs)
    best_x, best_f = x, abs(P.polyval(x, coeffs))
    for _ in range(iters):
        f = P.polyval(x, coeffs)
        d = P.polyval(x, dcoeffs)
        if d == 0.0 or not np.isfinite(f):
            break
        step = f / d
        x = x - step
        fx = abs(P.polyval(x, coeffs))
        if fx < best_f:
            best_x, best_f = x, fx
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            break
    return best_x


def _clusters(z, radius):
    order = np.argsort(z.real)
    groups = []
    for i in order:
        for g in groups:
            if any(abs(z[i] - z[j]) <= radius * max(1.0, abs(z[j])) for j in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def real_roots(coeffs, return_multiplicity=False):
    """Real roots of the polynomial with ascending ``coeffs``, sorted ascending.

    Roots come from the eigenvalues of the balanced companion matrix and are
    refined by Newton's method. A cluster of eigenvalues with a real centre
    is collapsed into one root of the matching multiplicity, polished on the
    appropriate derivative.
    """
    c = np.asarray(coeffs, dtype=np.float64)
    if c.ndim != 1 or len(c) == 0 or c[-1] == 0.0 or not np.all(np.isfinite(c)):
        raise PolynomialError("leading coefficient must be finite and nonzero")
    n = len(c) - 1
    if n > 8:
        raise PolynomialError(f"degree {n} exceeds the supported maximum of 8")
    if n == 0:
        return (np.empty(0), ()) if return_multiplicity else np.empty(0)
    monic = c / c[-1]
    companion = np.zeros((n, n))
    companion[1:, :-1] = np.eye(n - 1)
    companion[:, -1] = -monic[:-1]
    balanced, _ = matrix_balance(companion)
    z = np.linalg.eigvals(balanced)

    roots, mults = [], []
    for g in _clusters(z, CLUSTER_TOL):
        members = z[g]
        centre = members.mean()
        scale = max(1.0, abs(centre))
        if abs(centre.imag) > IMAG_TOL * scale:
            continue
        if len(g) == 1 or np.all(np.abs(members.imag) <= IMAG_TOL * scale):
            polished = sorted(_newton(monic, m.real) for m in members)
            distinct = len(g) == 1 or np.min(np.diff(polished)) > 1e-9 * scale
            if distinct:
                roots.extend(polished)
                mults.extend([1] * len(g))
                continue
        k = len(g)
        deriv = monic
        for _ in range(k - 1):
            deriv = P.polyder(deriv)
        roots.append(_newton(deriv, centre.real))
        mults.append(k)

    order = np.argsort(roots)
    out = np.asarray(roots, dtype=np.float64)[order]
    mult = tuple(int(mults[i]) for i in order)
    return (out, mult) if return_multiplicity else out


def poly_spec(coeffs, provenance, **kwargs):
    coeffs = np.asarray(coeffs, dtype=np.float64)
    roots, mult = real_roots(coeffs, return_multiplicity=True)
    return PolySpec(coeffs, roots, mult, provenance, **kwargs)


# value polynomials -------------------------------------------------------


def sym_coefficients(alpha):
    a2 = alpha * alpha
    return np.array(
        [
            5 * a2**3 - 21 * a2**2 + 16 * a2 - 32,
            2 * a2**3 - a2**2 - 20 * a2 - 32,
            11 / 4 * a2**2 - 12 * a2 - 4,
            4 - a2,
            1.0,
        ]
    )


def sym_poly(alpha):
    """Degree-4 value polynomial on the diagonal ``alpha == beta``; ``alpha`` in ``[0, 1]``."""
    alpha, _ = check_tilts(alpha, alpha, upper=1.0)
    return poly_spec(
        sym_coefficients(alpha), "sym4", alpha=alpha, beta=alpha, out_of_region=alpha >= 1.0
    )


def tau_coefficients(alpha, beta):
    """``tau_0 .. tau_6`` of the degree-6 value polynomial."""
    a, b = alpha, beta
    a2, b2 = a * a, b * b
    return np.array(
        [
            a2**3 * (27 * b2 - 8)
            + a2**2 * (-54 * b2**2 + 48 * b2 + 32)
            + a2 * (27 * b2**3 + 48 * b2**2 - 400 * b2 + 128)
            - 8 * b2**3
            + 32 * b2**2
            + 128 * b2
            - 512,
            -168 * a**3 * b**3 + 60 * a**5 * b + 160 * a**3 * b + 60 * a * b**5 + 160 * a * b**3 - 576 * a * b,
            -6 * a2**2 * b2 - 6 * a2 * b2**2 - 64 * a2 * b2 + 20 * a2**2 + 96 * a2 + 20 * b2**2 + 96 * b2 + 320,
            8 * a**3 * b**3 - 24 * a**3 * b - 24 * a * b**3 + 96 * a * b,
            11 * a2 * b2 - 16 * a2 - 16 * b2 - 64,
            -4 * a * b,
            4.0,
        ]
    )


def _gen_kwargs(alpha, beta):
    s = alpha + beta
    return dict(alpha=alpha, beta=beta, out_of_region=s >= 2.0, low_confidence=s > LOW_CONFIDENCE_EDGE)


def gen_poly(alpha, beta):
    """Degree-6 value polynomial for general tilts in ``[0, 2]``."""
    alpha, beta = check_tilts(alpha, beta)
    return poly_spec(tau_coefficients(alpha, beta), "gen6", **_gen_kwargs(alpha, beta))


def alt_poly(alpha, beta):
    """Degree-6 polynomial for the anti-aligned tilt ``CHSH + alpha<A_0> - beta<B_0>``.

    Odd coefficients of :func:`gen_poly` flip sign, i.e. ``p_alt(l) = p(-l)``.
    """
    alpha, beta = check_tilts(alpha, beta)
    tau = tau_coefficients(alpha, beta)
    tau[1::2] *= -1
    return poly_spec(tau, "alt6", **_gen_kwargs(alpha, beta))


def quantum_value(alpha, beta):
    """Maximal quantum value of ``CHSH + alpha<A_0> + beta<B_0>``.

    Outside the violation region (``alpha + beta >= 2``) no quantum strategy
    beats the classical value ``2 + alpha + beta``, which is returned there.
    """
    alpha, beta = check_tilts(alpha, beta)
    if alpha == beta and alpha < 1.0:
        root = sym_poly(alpha).largest_real_root
    else:
        root = gen_poly(alpha, beta).largest_real_root
    return float(max(root, 2.0 + alpha + beta))


def alt_quantum_value(alpha, beta):
    """Maximal quantum value of ``CHSH + alpha<A_0> - beta<B_0>``, floored at ``2 + alpha + beta``."""
    return float(max(alt_poly(alpha, beta).largest_real_root, 2.0 + alpha + beta))


# optimal cosines ------------------------------------------------------------


def _sqrt_checked(value, what, tol=1e-12):
    if value < -tol:
        raise RadicandError(f"negative radicand {value:.3e} in {what}; is cQ the largest root?")
    return np.sqrt(max(value, 0.0))


def optimal_cosines(alpha, beta, cQ):
    """Cosines ``(cA, cB)`` of the optimal measurement angles given the value ``cQ``.

    The symmetric formula also accepts the boundary ``alpha = beta = 1``,
    where it gives the compatible limit ``c = 1``.
    """
    alpha, beta = check_tilts(alpha, beta)
    a2, b2 = alpha * alpha, beta * beta
    if alpha == beta and alpha <= 1.0:
        c = (3 * a2 - 4 + _sqrt_checked(16 + 9 * a2 * a2 + 8 * a2 * (2 * cQ - 1), "symmetric cosine")) / 8
        return float(c), float(c)
    if alpha + beta >= 2.0:
        raise TiltRangeError("optimal cosines are only defined for alpha + beta < 2")
    R = 16 - 4 * a2 - 4 * b2 + 9 * a2 * b2 + 16 * alpha * beta * cQ
    root = _sqrt_checked((4 - a2) * (4 - b2) * R, "cosine formula")
    cA = (3 * b2 - 4) / 8 + root / (8 * (4 - a2))
    cB = ((4 - a2) * cA + a2 - b2) / (4 - b2)
    # cancellation can leave -1e-17 where the exact cosine is 0
    return float(_snap_zero(cA)), float(_snap_zero(cB))


def _snap_zero(c, tol=1e-12):
    return 0.0 if -tol < c < 0.0 else c


def sym_cosine_poly(alpha, cQ):
    """Quadratic ``h(c) = 4c^2 + (4 - 3 alpha^2) c - alpha^2 (1 + cQ)`` (ascending)."""
    a2 = alpha * alpha
    return np.array([-a2 * (1 + cQ), 4 - 3 * a2, 4.0])


def gen_cosine_poly(alpha, beta, cQ):
    """Quadratic in Alice's cosine whose larger root is the optimal ``cA`` (ascending)."""
    a, b = alpha, beta
    a2, b2 = a * a, b * b
    return np.array(
        [
            -a2 * b2 + a * b**3 * cQ - 4 * a * b * cQ + 2 * b2 * b2 - 4 * b2,
            3 * a2 * b2 - 4 * a2 - 12 * b2 + 16,
            16 - 4 * a2,
        ]
    )

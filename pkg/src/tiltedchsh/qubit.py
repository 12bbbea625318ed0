"""Two-qubit strategies for the tilted CHSH functional.

Both parties measure ``Z`` for input 0 and ``c Z + s X`` for input 1, with
``s = +sqrt(1 - c^2)``. The tilted Bell operator is then a real 4x4
symmetric matrix whose top eigenpair gives the best value and state for the
chosen cosines.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import bell
from ._validation import CosineRangeError, NotSymmetricError, TiltRangeError, check_real, check_tilts

_Z = np.diag([1.0, -1.0])
_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_I = np.eye(2)


def observables(c):
    """``(O_0, O_1)`` = ``(Z, cZ + sX)`` for one party."""
    c = check_real(c, "cosine")
    if not -1.0 <= c <= 1.0:
        raise CosineRangeError(f"cosine {c} outside [-1, 1]")
    s = np.sqrt(max(0.0, 1.0 - c * c))
    return _Z, c * _Z + s * _X


def bell_operator(cA, cB, alpha, beta):
    """``A0B0 + A0B1 + A1B0 - A1B1 + alpha A0 + beta B0`` in the computational basis.

    Cosines in ``[-1, 1]`` are accepted; the optimum always has them in
    ``[0, 1)`` for non-negative tilts.
    """
    A0, A1 = observables(cA)
    B0, B1 = observables(cB)
    k = np.kron
    return (
        k(A0, B0) + k(A0, B1) + k(A1, B0) - k(A1, B1)
        + alpha * k(A0, _I) + beta * k(_I, B0)
    )


def _operator_batch(cA, cB, alpha, beta):
    """Vectorised :func:`bell_operator` over arrays of cosines (no validation)."""
    cA = np.asarray(cA, dtype=np.float64)
    cB = np.asarray(cB, dtype=np.float64)
    sA = np.sqrt(np.clip(1 - cA * cA, 0, None))
    sB = np.sqrt(np.clip(1 - cB * cB, 0, None))
    shape = np.broadcast(cA, cB).shape
    out = np.zeros(shape + (4, 4))
    ZZ, ZX, XZ, XX = np.kron(_Z, _Z), np.kron(_Z, _X), np.kron(_X, _Z), np.kron(_X, _X)
    ZI, IZ = np.kron(_Z, _I), np.kron(_I, _Z)
    # A1 B1 = cAcB ZZ + cAsB ZX + sAcB XZ + sAsB XX
    e = lambda v: np.asarray(v)[..., None, None]  # noqa: E731
    out += ZZ * e(1 + cB + cA - cA * cB)
    out += ZX * e(sB - cA * sB)
    out += XZ * e(sA - sA * cB)
    out -= XX * e(sA * sB)
    out += alpha * ZI + beta * IZ
    return out


def char_poly(cA, cB, alpha, beta):
    """Ascending coefficients of ``det(lambda I - M)`` for the tilted Bell operator."""
    a, b = alpha, beta
    a2, b2 = a * a, b * b
    c0 = (
        8 * b2 * cA * (cB * cB - 1)
        - 8 * cB * (a2 + (b2 - 2) * cB)
        + (a2 - b2) ** 2
        + 8 * cA * cA * (cB - 1) * (a2 - 2 * cB - 2)
    )
    c1 = 8 * a * b * (cA * (cB - 1) - cB - 1)
    c2 = -2 * (a2 + b2 + 4)
    return np.array([c0, c1, c2, 0.0, 1.0])


def char_poly_partials(cA, cB, lam, alpha, beta):
    """``(q, dq/dcA, dq/dcB, dq/dlambda)`` of the characteristic polynomial at ``lam``."""
    a, b = alpha, beta
    q = np.polynomial.polynomial.polyval(lam, char_poly(cA, cB, a, b))
    dA = 8 * (cB - 1) * (2 * a * a * cA + a * b * lam + b * b * (1 + cB) - 4 * cA * (1 + cB))
    dB = 8 * (cA - 1) * (a * a * (1 + cA) + a * b * lam + 2 * b * b * cB - 4 * cB * (1 + cA))
    dl = 4 * lam**3 - 4 * lam * (a * a + b * b + 4) + 8 * a * b * (cA * (cB - 1) - cB - 1)
    return q, dA, dB, dl


StationarityResiduals = namedtuple(
    "StationarityResiduals", ["char", "d_cA", "d_cB", "reduced_A", "reduced_B"]
)


def stationarity_residuals(cA, cB, lam, alpha, beta):
    """Residuals of the conditions an interior optimum ``(cA, cB, lam)`` must satisfy.

    ``reduced_A`` is ``dq/dcA`` divided by its factor ``8(cB - 1)`` and
    ``reduced_B`` is ``dq/dcB`` divided by ``8(cA - 1)``. When a cosine equals
    1 the division is skipped and the undivided derivative is reported.
    """
    q, dA, dB, _ = char_poly_partials(cA, cB, lam, alpha, beta)
    a, b = alpha, beta
    if abs(1 - cB) > 1e-12:
        red_A = (b * b - 4 * cA) * (1 + cB) + 2 * a * a * cA + a * b * lam
    else:
        red_A = dA
    if abs(1 - cA) > 1e-12:
        red_B = (a * a - 4 * cB) * (1 + cA) + 2 * b * b * cB + a * b * lam
    else:
        red_B = dB
    return StationarityResiduals(float(q), float(dA), float(dB), float(red_A), float(red_B))


# eigen-solver ---------------------------------------------------------------


def jacobi_eigh(M, tol=1e-14, max_sweeps=30):
    """Cyclic Jacobi eigen-decomposition of a small symmetric matrix.

    Returns eigenvalues in descending order and the matching eigenvectors
    as columns.
    """
    A = np.array(M, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                A[p, q] = A[q, p] = 0.0
                V = V @ J
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@dataclass(frozen=True, eq=False)
class SpectralResult:
    eigenvalues: np.ndarray
    top_vector: np.ndarray
    residual: float

    @property
    def top(self):
        return float(self.eigenvalues[0])

    @property
    def gap(self):
        return float(self.eigenvalues[0] - self.eigenvalues[1])


def max_eigenpair(M):
    """Full spectrum (descending) and top eigenvector with a non-negative leading entry."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {M.shape}")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12:
        raise NotSymmetricError("matrix is not symmetric to 1e-12")
    w, V = jacobi_eigh((M + M.T) / 2)
    v = V[:, 0] / np.linalg.norm(V[:, 0])
    lead = v[np.argmax(np.abs(v) > 1e-12)]
    if lead < 0:
        v = -v
    residual = float(np.linalg.norm(M @ v - w[0] * v))
    return SpectralResult(w, v, residual)


def schmidt_coefficients(state):
    """Singular values of a two-qubit state reshaped to 2x2, larger first (closed form)."""
    m = np.asarray(state, dtype=np.float64).reshape(2, 2)
    frob = float(np.sum(m * m))
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = np.sqrt(max(frob * frob - 4 * det * det, 0.0))
    big = np.sqrt((frob + disc) / 2)
    small = abs(det) / big if big > 0 else 0.0
    return float(big), float(small)


# strategies -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QubitStrategy:
    cA: float
    cB: float
    alpha: float
    beta: float
    state: np.ndarray
    schmidt: float
    value: float
    gap: float

    def behavior(self):
        """Probability table produced by measuring ``state`` with the strategy's observables."""
        A = observables(self.cA)
        B = observables(self.cB)
        psi = self.state
        table = np.zeros((2, 2, 2, 2))
        for x, y in np.ndindex(2, 2):
            for ia, va in enumerate(bell.OUTCOME_VALUES):
                Pa = (_I + va * A[x]) / 2
                for ib, vb in enumerate(bell.OUTCOME_VALUES):
                    Pb = (_I + vb * B[y]) / 2
                    table[ia, ib, x, y] = psi @ np.kron(Pa, Pb) @ psi
        table = np.clip(table, 0.0, None)
        table /= table.sum(axis=(0, 1), keepdims=True)
        return bell.Behavior(bell.CHSH_SCENARIO, table)

    def to_dict(self):
        return {
            "schemaVersion": bell.SCHEMA_VERSION,
            "alpha": self.alpha,
            "beta": self.beta,
            "cA": self.cA,
            "cB": self.cB,
            "state": self.state.tolist(),
            "schmidt": self.schmidt,
            "lambda": self.value,
            "gap": self.gap,
        }


def strategy_at(cA, cB, alpha, beta):
    spec = max_eigenpair(bell_operator(cA, cB, alpha, beta))
    schmidt, _ = schmidt_coefficients(spec.top_vector)
    return QubitStrategy(
        float(cA), float(cB), float(alpha), float(beta), spec.top_vector, schmidt, spec.top, spec.gap
    )


def optimal_state(alpha, beta):
    """Optimal strategy from the closed-form value and cosines."""
    from .closed_form import optimal_cosines, quantum_value

    alpha, beta = check_tilts(alpha, beta)
    if alpha + beta >= 2.0:
        raise TiltRangeError("alpha + beta >= 2: the optimum is the classical (product) point")
    cA, cB = optimal_cosines(alpha, beta, quantum_value(alpha, beta))
    return strategy_at(cA, cB, alpha, beta)


OracleResult = namedtuple("OracleResult", ["cA", "cB", "value"])


def oracle_max(alpha, beta, grid_n=64, refine_tol=1e-10, domain=(0.0, 1.0 - 1e-9), starts=4):
    """Brute-force maximum of the top eigenvalue over both cosines.

    A ``grid_n x grid_n`` scan over ``domain`` seeds bounded Nelder-Mead runs
    from the ``starts`` best grid points. Uses LAPACK eigenvalues, so it is
    independent of the closed-form chain and the Jacobi solver it checks.
    Ties go to the lexicographically smaller ``(cA, cB)``.
    """
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32")
    lo, hi = domain
    grid = np.linspace(lo, hi, grid_n)
    cA, cB = np.meshgrid(grid, grid, indexing="ij")
    values = np.linalg.eigvalsh(_operator_batch(cA, cB, alpha, beta))[..., -1]
    flat = values.ravel()
    # stable sort on -value keeps row-major (lexicographic) order among ties
    seeds = np.argsort(-flat, kind="stable")[:starts]

    def objective(c):
        c = np.clip(c, lo, hi)
        return -np.linalg.eigvalsh(_operator_batch(c[0], c[1], alpha, beta))[-1]

    best = (float(flat[seeds[0]]), float(cA.ravel()[seeds[0]]), float(cB.ravel()[seeds[0]]))
    for s in seeds:
        res = minimize(
            objective,
            x0=[cA.ravel()[s], cB.ravel()[s]],
            method="Nelder-Mead",
            bounds=[(lo, hi), (lo, hi)],
            options={"xatol": refine_tol, "fatol": 1e-15, "maxiter": 4000},
        )
        x = np.clip(res.x, lo, hi)
        cand = (-float(res.fun), float(x[0]), float(x[1]))
        if cand[0] > best[0] or (cand[0] == best[0] and cand[1:] < best[1:]):
            best = cand
    return OracleResult(best[1], best[2], best[0])

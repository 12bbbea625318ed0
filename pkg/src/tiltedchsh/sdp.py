"""Dense primal-dual interior-point solver for small semidefinite programs.

Solves the pair

    primal:  minimize <C, X>   s.t. <A_i, X> = b_i,  X >= 0
    dual:    maximize b.y      s.t. S = C - sum_i y_i A_i >= 0

with the HKM search direction and Mehrotra's predictor-corrector, starting
from an infeasible point. Everything is dense; intended for N up to ~200.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky, solve_triangular

OPTIMAL = "optimal"
MAX_ITER = "max-iter"
ILL_CONDITIONED = "ill-conditioned"


@dataclass(frozen=True, eq=False)
class LmiResult:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray
    primal_residual: np.ndarray
    primal_objective: float
    dual_objective: float
    rel_gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    status: str


def _max_step(M, D):
    """Largest t with ``M + t D`` PSD (``inf`` if unbounded), for ``M`` positive definite."""
    L = cholesky(M, lower=True)
    W = solve_triangular(L, D, lower=True)
    W = solve_triangular(L, W.T, lower=True)
    lam_min = np.linalg.eigvalsh((W + W.T) / 2)[0]
    return np.inf if lam_min >= 0 else -1.0 / lam_min


def _schur_solver(M):
    """Cholesky solve of the Schur system, with a small diagonal shift if it is only semidefinite."""
    shift = 0.0
    base = np.abs(np.diag(M)).max(initial=1.0)
    for _ in range(4):
        try:
            factor = cho_factor(M + shift * np.eye(len(M)))
            return lambda r: cho_solve(factor, r)
        except (LinAlgError, np.linalg.LinAlgError):
            shift = base * (1e-14 if shift == 0.0 else 100 * shift / base)
    return None


def _is_pd(M):
    try:
        cholesky(M, lower=True)
    except (LinAlgError, np.linalg.LinAlgError):
        return False
    return bool(np.all(np.isfinite(M)))


def _sym(M):
    return (M + M.T) / 2


def solve_lmi(C, A, b, tol=1e-9, max_iter=200, step_factor=0.95, stall_iters=15):
    """Solve the primal-dual pair above.

    ``A`` is an array of shape ``(m, N, N)`` of symmetric matrices. Stops
    when relative gap, primal and dual infeasibility are all below ``tol``,
    or reports ``ill-conditioned`` once ``stall_iters`` iterations pass
    without a 10% improvement. The best iterate seen is returned.
    """
    C = np.asarray(C, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, N = A.shape[0], C.shape[0]
    Aflat = A.reshape(m, N * N)

    def op(X):
        return Aflat @ X.ravel()

    def adj(y):
        return (y @ Aflat).reshape(N, N)

    scale = 1.0 + max(np.abs(C).max(), np.abs(b).max(initial=0.0))
    X = scale * np.eye(N)
    S = scale * np.eye(N)
    y = np.zeros(m)
    nb, nC = 1.0 + np.linalg.norm(b), 1.0 + np.linalg.norm(C)
    status = MAX_ITER
    it = 0
    best, best_err, best_it = (X, y, S, 0), np.inf, 0
    for it in range(1, max_iter + 1):
        Rp = b - op(X)
        Rd = C - S - adj(y)
        pobj, dobj = float(np.sum(C * X)), float(b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf, dinf = np.linalg.norm(Rp) / nb, np.linalg.norm(Rd) / nC
        err = max(gap, pinf, dinf)
        if err < 0.9 * best_err:
            best_it = it
        if err < best_err:
            best, best_err = (X, y, S, it - 1), err
        if err <= tol:
            status = OPTIMAL
            break
        if it - best_it > stall_iters:
            status = ILL_CONDITIONED
            break
        mu = float(np.sum(X * S)) / N
        try:
            Sinv = np.linalg.inv(S)
            Sinv = _sym(Sinv)
            # Schur complement M_ij = tr(A_i X A_j S^-1)
            G = np.matmul(np.matmul(X, A), Sinv)  # (m, N, N): X A_j S^-1
            M = Aflat @ G.reshape(m, N * N).T
            M = _sym(M)
        except (LinAlgError, np.linalg.LinAlgError):
            status = ILL_CONDITIONED
            break
        solve_schur = _schur_solver(M)
        if solve_schur is None:
            status = ILL_CONDITIONED
            break

        XRdSi = X @ Rd @ Sinv

        def direction(sigma, K):
            H = sigma * mu * Sinv - X - XRdSi - K
            dy = solve_schur(Rp - op(H))
            dS = Rd - adj(dy)
            dX = _sym(H + X @ adj(dy) @ Sinv)
            return dX, dy, dS

        try:
            dXa, dya, dSa = direction(0.0, 0.0)
            ap = min(1.0, _max_step(X, dXa))
            ad = min(1.0, _max_step(S, dSa))
            mu_aff = float(np.sum((X + ap * dXa) * (S + ad * dSa))) / N
            sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
            dX, dy, dS = direction(sigma, dXa @ dSa @ Sinv)
            ap = min(1.0, step_factor * _max_step(X, dX))
            ad = min(1.0, step_factor * _max_step(S, dS))
        except (LinAlgError, np.linalg.LinAlgError):
            status = ILL_CONDITIONED
            break
        # round-off can push a near-singular iterate off the cone; shorten the step until it is not
        for _ in range(30):
            Xn, Sn = _sym(X + ap * dX), _sym(S + ad * dS)
            if _is_pd(Xn) and _is_pd(Sn):
                break
            ap, ad = ap * 0.5, ad * 0.5
        else:
            status = ILL_CONDITIONED
            break
        X, S, y = Xn, Sn, y + ad * dy

    X, y, S, it = best
    Rp = b - op(X)
    Rd = C - S - adj(y)
    pobj, dobj = float(np.sum(C * X)), float(b @ y)
    return LmiResult(
        X=X,
        y=y,
        S=S,
        primal_residual=Rp,
        primal_objective=pobj,
        dual_objective=dobj,
        rel_gap=abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj)),
        primal_infeasibility=float(np.linalg.norm(Rp) / nb),
        dual_infeasibility=float(np.linalg.norm(Rd) / nC),
        iterations=it,
        status=status,
    )

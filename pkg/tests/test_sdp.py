import numpy as np
import pytest

from tiltedchsh import npa, sdp

cvxopt = pytest.importorskip("cvxopt")
from cvxopt import matrix, solvers  # noqa: E402


def random_feasible_sdp(rng, n=6, m=5):
    A = rng.normal(size=(m, n, n))
    A = (A + A.transpose(0, 2, 1)) / 2
    X0 = rng.normal(size=(n, n))
    X0 = X0 @ X0.T + np.eye(n)
    b = np.einsum("kij,ij->k", A, X0)
    Z = rng.normal(size=(n, n))
    C = Z @ Z.T + np.eye(n) + np.einsum("k,kij->ij", rng.normal(size=m), A)
    return C, A, b


class TestSolveLmi:
    def test_diagonal_lp(self):
        # minimize x1 + 2 x2 subject to x1 + x2 = 1: optimum 1 at x1 = 1
        C = np.diag([1.0, 2.0])
        A = np.array([np.eye(2)])
        r = sdp.solve_lmi(C, A, [1.0])
        assert r.status == sdp.OPTIMAL
        assert r.primal_objective == pytest.approx(1.0, abs=1e-8)
        assert r.dual_objective == pytest.approx(1.0, abs=1e-8)
        np.testing.assert_allclose(r.X, np.diag([1.0, 0.0]), atol=1e-7)

    def test_random_problems_match_scipy_free_checks(self, rng):
        for _ in range(10):
            C, A, b = random_feasible_sdp(rng)
            r = sdp.solve_lmi(C, A, b)
            assert r.status == sdp.OPTIMAL
            assert np.linalg.eigvalsh(r.X)[0] >= -1e-9
            assert np.linalg.eigvalsh(r.S)[0] >= -1e-9
            np.testing.assert_allclose(np.einsum("kij,ij->k", A, r.X), b, atol=1e-7 * (1 + np.abs(b).max()))
            assert r.rel_gap <= 1e-9

    def test_max_iter_status(self, rng):
        C, A, b = random_feasible_sdp(rng)
        r = sdp.solve_lmi(C, A, b, max_iter=2)
        assert r.status == sdp.MAX_ITER
        assert r.iterations <= 2


def _cvxopt_npa(mp):
    """Same moment problem solved by cvxopt's conic solver."""
    masks = [mp.class_mask(k) for k in range(1, len(mp.classes))]
    n = mp.size
    c = matrix(-mp.objective[1:].astype(float))
    G = matrix(np.column_stack([(-F).ravel(order="F") for F in masks]))
    h = matrix(np.eye(n))
    solvers.options.update(show_progress=False)
    sol = solvers.sdp(c, Gs=[G], hs=[h])
    assert sol["status"] == "optimal"
    return -sol["primal objective"] + mp.constant


@pytest.mark.parametrize(
    "alpha,beta,level",
    [(0.0, 0.0, "1"), (0.5, 0.0, "1+AB"), (0.4, 0.7, "2"), (0.9, 0.9, "3"), (1.3, 0.2, "1+AB")],
)
def test_agrees_with_cvxopt(alpha, beta, level):
    from tiltedchsh import bell

    mp = npa.build_moment_problem(bell.tilted_chsh_functional(alpha, beta), level)
    ours = npa.solve_sdp(mp)
    ref = _cvxopt_npa(mp)
    assert ours.upper_bound == pytest.approx(ref, abs=1e-6)

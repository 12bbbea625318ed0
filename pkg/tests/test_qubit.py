import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from tiltedchsh import bell, closed_form, qubit, selftest
from tiltedchsh._validation import CosineRangeError, NotSymmetricError, TiltRangeError

SQRT2 = math.sqrt(2.0)


class TestBellOperator:
    def test_chsh_spectrum(self):
        w = np.linalg.eigvalsh(qubit.bell_operator(0, 0, 0, 0))
        np.testing.assert_allclose(w, [-2 * SQRT2, 0, 0, 2 * SQRT2], atol=1e-14)

    @pytest.mark.parametrize("ab", [(0.0, 0.0), (0.3, 1.1), (1.9, 0.05)])
    def test_commuting_observables_are_classical(self, ab):
        M = qubit.bell_operator(1, 1, *ab)
        assert np.count_nonzero(M - np.diag(np.diag(M))) == 0
        assert np.max(np.diag(M)) == pytest.approx(2 + sum(ab))

    def test_symmetric_matrix_entries(self):
        # on the diagonal the ZZ weight is omega = 1 + cA + cB - cAcB
        c, a = 0.3, 0.4
        M = qubit.bell_operator(c, c, a, a)
        omega = 1 + 2 * c - c * c
        s = math.sqrt(1 - c * c)
        assert M[0, 0] == pytest.approx(omega + 2 * a)
        assert M[3, 3] == pytest.approx(omega - 2 * a)
        assert M[0, 1] == pytest.approx(s * (1 - c))
        assert M[0, 3] == pytest.approx(-s * s)
        np.testing.assert_array_equal(M, M.T)

    def test_batch_matches_scalar(self, rng):
        cA, cB = rng.uniform(-1, 1, (2, 7))
        batch = qubit._operator_batch(cA, cB, 0.3, 0.8)
        for i in range(7):
            np.testing.assert_allclose(batch[i], qubit.bell_operator(cA[i], cB[i], 0.3, 0.8), atol=1e-15)

    def test_cosine_range(self):
        with pytest.raises(CosineRangeError):
            qubit.bell_operator(1.2, 0, 0, 0)


class TestCharPoly:
    def test_chsh(self):
        np.testing.assert_allclose(qubit.char_poly(0, 0, 0, 0), [0, 0, -8, 0, 1], atol=0)

    def test_top_eigenvalue_is_largest_root(self, rng):
        for cA, cB, a, b in rng.uniform(0, 1, (1000, 4)) * [1, 1, 2, 2]:
            top = qubit.max_eigenpair(qubit.bell_operator(cA, cB, a, b)).top
            roots = closed_form.real_roots(qubit.char_poly(cA, cB, a, b))
            assert top == pytest.approx(roots[-1], abs=1e-9)

    def test_partials_match_finite_differences(self, rng):
        h = 1e-5
        for cA, cB, a, b in rng.uniform(0.05, 0.95, (50, 4)) * [1, 1, 1.5, 1.5]:
            lam = rng.uniform(2, 4)
            q = lambda u, v, lm: P.polyval(lm, qubit.char_poly(u, v, a, b))  # noqa: E731
            _, dA, dB, dl = qubit.char_poly_partials(cA, cB, lam, a, b)
            fd = [
                (q(cA + h, cB, lam) - q(cA - h, cB, lam)) / (2 * h),
                (q(cA, cB + h, lam) - q(cA, cB - h, lam)) / (2 * h),
                (q(cA, cB, lam + h) - q(cA, cB, lam - h)) / (2 * h),
            ]
            for exact, approx in zip((dA, dB, dl), fd):
                assert exact == pytest.approx(approx, rel=1e-5, abs=1e-6)


class TestStationarity:
    def test_optimum_at_half(self):
        cq = closed_form.quantum_value(0.5, 0.5)
        cA, cB = closed_form.optimal_cosines(0.5, 0.5, cq)
        assert max(abs(r) for r in qubit.stationarity_residuals(cA, cB, cq, 0.5, 0.5)) <= 1e-8

    def test_generic_point_fails(self):
        res = qubit.stationarity_residuals(0.3, 0.7, 3.2, 0.5, 0.5)
        assert max(abs(r) for r in res) > 1e-3

    def test_diagonal_difference_factorises(self, rng):
        for cA, cB, a, lam in rng.uniform(0, 1, (20, 4)):
            r = qubit.stationarity_residuals(cA, cB, 2 + 2 * lam, a, a)
            assert r.reduced_A - r.reduced_B == pytest.approx((a * a - 4) * (cA - cB), abs=1e-12)


class TestEigen:
    def test_identity(self):
        s = qubit.max_eigenpair(np.eye(4))
        np.testing.assert_allclose(s.eigenvalues, 1.0)
        assert s.gap == 0.0

    def test_diagonal(self):
        s = qubit.max_eigenpair(np.diag([4.0, 1.0, 0.0, -1.0]))
        assert s.top == 4.0 and s.gap == 3.0
        np.testing.assert_array_equal(s.top_vector, [1, 0, 0, 0])

    def test_chsh_spectrum(self):
        s = qubit.max_eigenpair(qubit.bell_operator(0, 0, 0, 0))
        np.testing.assert_allclose(s.eigenvalues, [2 * SQRT2, 0, 0, -2 * SQRT2], atol=1e-13)

    def test_against_lapack(self, rng):
        for _ in range(200):
            A = rng.normal(size=(4, 4))
            A = A + A.T
            s = qubit.max_eigenpair(A)
            np.testing.assert_allclose(s.eigenvalues, np.linalg.eigvalsh(A)[::-1], atol=1e-12)
            assert s.residual <= 1e-10
            assert np.linalg.norm(s.top_vector) == pytest.approx(1.0)
            assert s.top_vector[np.flatnonzero(np.abs(s.top_vector) > 1e-12)[0]] > 0

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetricError):
            qubit.max_eigenpair(np.triu(np.ones((4, 4))))


class TestSchmidt:
    def test_product_and_bell(self):
        assert qubit.schmidt_coefficients([1, 0, 0, 0]) == (1.0, 0.0)
        big, small = qubit.schmidt_coefficients(np.array([1, 0, 0, 1]) / SQRT2)
        assert big == pytest.approx(1 / SQRT2) and small == pytest.approx(1 / SQRT2)

    def test_against_svd(self, rng):
        for _ in range(50):
            v = rng.normal(size=4)
            v /= np.linalg.norm(v)
            np.testing.assert_allclose(
                qubit.schmidt_coefficients(v), np.linalg.svd(v.reshape(2, 2), compute_uv=False), atol=1e-12
            )


class TestOptimalState:
    def test_chsh(self):
        s = qubit.optimal_state(0, 0)
        assert s.cA == 0 and s.cB == 0
        assert s.schmidt == pytest.approx(1 / SQRT2, abs=1e-12)
        assert s.value == pytest.approx(2 * SQRT2, abs=1e-12)

    def test_schmidt_between_at_half(self):
        assert 1 / SQRT2 < qubit.optimal_state(0.5, 0.5).schmidt < 1

    def test_schmidt_monotone_toward_product(self):
        xs = [qubit.optimal_state(a, a).schmidt for a in np.linspace(0, 0.999, 40)]
        assert np.all(np.diff(xs) >= -1e-12)
        assert xs[-1] > 0.98

    def test_gap_and_second_eigenvalue(self):
        g = np.linspace(0, 1.99, 15)
        for a in g:
            for b in g:
                if a + b <= 1.99:
                    s = qubit.optimal_state(a, b)
                    assert s.gap > 0
                    assert s.value - s.gap <= 2 + a + b + 1e-9

    def test_behavior_closure(self):
        for a, b in [(0, 0), (0.5, 0.5), (1.2, 0.3), (6 / 17, 6 / 17)]:
            s = qubit.optimal_state(a, b)
            f = bell.tilted_chsh_functional(a, b)
            assert bell.evaluate_functional(f, s.behavior()) == pytest.approx(
                closed_form.quantum_value(a, b), abs=1e-9
            )

    def test_outside_region(self):
        with pytest.raises(TiltRangeError):
            qubit.optimal_state(1.0, 1.0)

    def test_json_keys(self):
        d = qubit.optimal_state(0.2, 0.4).to_dict()
        assert {"alpha", "beta", "cA", "cB", "state", "schmidt", "lambda", "gap"} <= d.keys()
        assert len(d["state"]) == 4


class TestOracle:
    def test_chsh(self):
        o = qubit.oracle_max(0, 0)
        assert o.value == pytest.approx(2 * SQRT2, abs=1e-9)
        assert abs(o.cA) <= 1e-6 and abs(o.cB) <= 1e-6

    def test_single_tilt(self):
        assert qubit.oracle_max(1.0, 0.0).value == pytest.approx(math.sqrt(10), abs=1e-6)

    def test_worked_example(self):
        assert qubit.oracle_max(6 / 17, 6 / 17).value == pytest.approx(2.98098, abs=1e-5)

    def test_grid_guard(self):
        with pytest.raises(ValueError):
            qubit.oracle_max(0, 0, grid_n=8)

    def test_deterministic(self):
        assert qubit.oracle_max(0.7, 0.2) == qubit.oracle_max(0.7, 0.2)

    def test_negative_cosines_never_better(self, rng):
        # the optimum uses the non-negative sine branch; allowing c < 0 finds nothing better
        for a, b in rng.uniform(0, 0.9, (5, 2)):
            wide = qubit.oracle_max(a, b, domain=(-1.0, 1.0 - 1e-9))
            assert wide.value <= closed_form.quantum_value(a, b) + 1e-9


class TestSelfTest:
    def test_chsh(self):
        r = selftest.self_test_strategy(0, 0)
        assert r.cA_star == 0 and r.cB_star == 0
        assert r.cQ == pytest.approx(2 * SQRT2)
        assert r.strategy.schmidt == pytest.approx(1 / SQRT2)
        assert r.oracle_delta <= 1e-6

    def test_single_tilt(self):
        r = selftest.self_test_strategy(0.5, 0.0)
        assert r.cA_star == pytest.approx(0, abs=1e-12)
        # Bob's measurements sit at +-mu around Z with tan(mu) = sin(2 theta), cos(theta) the Schmidt coefficient
        theta = math.acos(r.strategy.schmidt)
        mu = math.atan(math.sin(2 * theta))
        assert r.cB_star == pytest.approx(math.cos(2 * mu), abs=1e-9)
        assert r.max_stationarity_residual <= 1e-8

    def test_near_boundary(self):
        r = selftest.self_test_strategy(0.999, 0.999, oracle=False)
        assert r.cQ == pytest.approx(3.998000001333, abs=1e-9)
        assert r.cA_star > 0.98 and r.strategy.schmidt > 0.98
        assert math.isnan(r.oracle_delta)

    def test_report_dict(self):
        d = selftest.self_test_strategy(0.3, 0.6, oracle=False).to_dict()
        assert d["cosineResidual"] <= 1e-12
        assert set(d["stationarity"]) == {"char", "d_cA", "d_cB", "reduced_A", "reduced_B"}

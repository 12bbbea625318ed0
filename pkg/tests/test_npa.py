import math

import numpy as np
import pytest

from tiltedchsh import bell, closed_form, npa
from tiltedchsh._validation import LevelError, TiltRangeError, UnsupportedScenarioError

SQRT2 = math.sqrt(2.0)


class TestWords:
    def test_involution(self):
        assert npa.canonicalize(("A0", "A0")) == ()

    def test_cross_party_commutation(self):
        assert npa.canonicalize(("B0", "A1")) == ("A1", "B0")

    def test_cancel_then_reorder(self):
        assert npa.canonicalize(("A0", "A1", "A1", "B0")) == ("A0", "B0")

    def test_idempotent_and_adjoint(self, rng):
        for _ in range(200):
            w = tuple(rng.choice(npa.SYMBOLS, size=rng.integers(0, 8)))
            c = npa.canonicalize(w)
            assert npa.canonicalize(c) == c
            assert npa.adjoint(w) == npa.canonicalize(tuple(reversed(c)))

    def test_unknown_symbol(self):
        with pytest.raises(ValueError):
            npa.canonicalize(("C0",))

    def test_level_tags(self):
        assert npa.parse_level("1+ab") == "1+AB"
        assert npa.parse_level(3) == "3"
        assert sorted(["3", "1+AB", "2", "1"], key=npa.level_rank) == ["1", "1+AB", "2", "3"]
        with pytest.raises(LevelError):
            npa.parse_level("x")
        with pytest.raises(LevelError):
            npa.parse_level(0)


class TestBuildWords:
    def test_level_one(self):
        assert npa.build_words(1) == [(), ("A0",), ("A1",), ("B0",), ("B1",)]

    @pytest.mark.parametrize("level", [1, 2, 3, 4, 5])
    def test_counts(self, level):
        assert len(npa.build_words(level)) == 1 + 2 * level * (level + 1)

    def test_intermediate_level(self):
        words = npa.build_words("1+AB")
        assert len(words) == 9
        assert words[5:] == [("A0", "B0"), ("A0", "B1"), ("A1", "B0"), ("A1", "B1")]

    def test_words_are_canonical_and_distinct(self):
        words = npa.build_words(3)
        assert len(set(words)) == len(words)
        assert all(npa.canonicalize(w) == w and len(w) <= 3 for w in words)

    def test_large_level_guard(self):
        with pytest.raises(LevelError):
            npa.build_words(6)
        with pytest.warns(UserWarning):
            assert len(npa.build_words(6, allow_large=True)) == 85


class TestMomentProblem:
    def test_chsh_level_one(self):
        mp = npa.build_moment_problem(bell.chsh_functional(), 1)
        assert mp.size == 5
        assert mp.objective_terms() == {"A0B0": 1.0, "A0B1": 1.0, "A1B0": 1.0, "A1B1": -1.0}

    def test_tilted_objective(self):
        mp = npa.build_moment_problem(bell.tilted_chsh_functional(0.3, 0.6), "1+AB")
        terms = mp.objective_terms()
        assert terms["A0"] == pytest.approx(0.3) and terms["B0"] == pytest.approx(0.6)
        assert set(terms) == {"A0", "B0", "A0B0", "A0B1", "A1B0", "A1B1"}

    def test_diagonal_is_identity_class(self):
        mp = npa.build_moment_problem(bell.chsh_functional(), 3)
        assert np.all(np.diag(mp.cell_class) == 0)
        assert np.array_equal(mp.cell_class, mp.cell_class.T)

    def test_unsupported_scenario(self):
        s = bell.Scenario(3, 2, 2, 2)
        with pytest.raises(UnsupportedScenarioError):
            npa.build_moment_problem(bell.BellFunctional(s, np.zeros(s.shape)), 1)


class TestSolve:
    def test_tsirelson(self):
        assert npa.npa_bound(0, 0, "1") == pytest.approx(2 * SQRT2, abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_single_tilt(self, alpha):
        assert npa.npa_bound(alpha, 0, "1+AB") == pytest.approx(math.sqrt(8 + 2 * alpha**2), abs=1e-6)

    def test_zero_objective(self):
        f = bell.BellFunctional(bell.CHSH_SCENARIO, np.zeros((2, 2, 2, 2)))
        r = npa.solve_sdp(npa.build_moment_problem(f, 1))
        assert r.upper_bound == pytest.approx(0.0, abs=1e-8)
        assert r.moment_matrix[0, 0] == 1.0
        assert np.linalg.eigvalsh(r.moment_matrix)[0] >= -1e-8

    def test_moment_matrix_properties(self):
        mp = npa.build_moment_problem(bell.tilted_chsh_functional(0.7, 0.4), 2)
        r = npa.solve_sdp(mp)
        M = r.moment_matrix
        assert r.certified
        assert M[0, 0] == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.eigvalsh(M)[0] >= -1e-7
        for k in range(len(mp.classes)):
            vals = M[mp.cell_class == k]
            assert np.ptp(vals) <= 1e-8

    def test_near_boundary_twelve_digit_value(self):
        cq = 3.998000001333
        for level in ("1", "1+AB", "2", "3"):
            assert npa.npa_bound(0.999, 0.999, level) >= cq - 1e-7

    def test_tolerance_refinement(self):
        a = npa.npa_bound(0.6, 0.3, "2", tol=1e-7)
        b = npa.npa_bound(0.6, 0.3, "2", tol=1e-8)
        assert abs(a - b) <= 1e-6

    def test_guards(self):
        mp = npa.build_moment_problem(bell.chsh_functional(), 1)
        with pytest.raises(ValueError):
            npa.solve_sdp(mp, tol=1e-12)
        with pytest.raises(TiltRangeError):
            npa.npa_bound(1.5, 1.5, "1")
        with pytest.raises(TiltRangeError):
            npa.npa_bound(-0.1, 0.0, "1")

    def test_tilted_functional_input(self):
        from tiltedchsh import tilting

        tf = tilting.doubly_tilted_chsh(0.85, 0.85)
        r = npa.solve_sdp(npa.build_moment_problem(tf, 2))
        assert r.upper_bound >= closed_form.quantum_value(tf.alpha, tf.beta) - 1e-7


class TestTightLevel:
    def test_single_tilt(self):
        assert npa.min_tight_level(0.5, 0.0) in ("1", "1+AB")

    def test_no_tilt(self):
        assert npa.min_tight_level(0, 0) == "1"

    def test_near_boundary_beyond_intermediate(self):
        level = npa.min_tight_level(0.95, 0.95, gap_tol=1e-7, max_level="3")
        # the exact outcome is recorded, not asserted; it is never the two lowest levels
        assert level is None or npa.level_rank(level) > npa.level_rank("1+AB")

    def test_max_level_cutoff(self):
        assert npa.min_tight_level(0.9, 0.9, max_level="1+AB") is None

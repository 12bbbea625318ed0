"""NPA moment-matrix upper bounds for CHSH-scenario correlator functionals.

Operators are the four dichotomic observables ``A0, A1, B0, B1`` with
``O^2 = 1`` and Alice's operators commuting with Bob's. A word is a tuple of
symbols in canonical form: Alice's part first, then Bob's, with adjacent
repeats cancelled. The moment matrix is taken real symmetric, so a word and
its adjoint share one variable.
"""

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from . import bell, closed_form, sdp
from ._validation import LevelError, check_real

SYMBOLS = ("A0", "A1", "B0", "B1")
IDENTITY = ()
#: Level tags in increasing order of strength.
LEVELS = ("1", "1+AB", "2", "3", "4", "5", "6", "7", "8")
MAX_SAFE_LEVEL = 5
DEFAULT_TOL = 1e-9


def _reduce(symbols):
    out = []
    for s in symbols:
        if out and out[-1] == s:
            out.pop()
        else:
            out.append(s)
    return out


def canonicalize(word):
    """Alice block then Bob block, each with adjacent equal symbols cancelled."""
    for s in word:
        if s not in SYMBOLS:
            raise ValueError(f"unknown operator symbol {s!r}")
    alice = _reduce([s for s in word if s[0] == "A"])
    bob = _reduce([s for s in word if s[0] == "B"])
    return tuple(alice + bob)


def adjoint(word):
    return canonicalize(tuple(reversed(word)))


def product(u, v):
    """Canonical form of ``u^dagger v``, the word in cell ``(u, v)`` of the moment matrix."""
    return canonicalize(tuple(reversed(u)) + tuple(v))


def class_key(word):
    """Shared variable of ``word`` and its adjoint (real moment matrices)."""
    w = canonicalize(word)
    return min(w, adjoint(w))


def word_label(word):
    return "".join(word) if word else "1"


def parse_level(level):
    """Normalise a level tag: ``1``, ``'1+AB'``, ``'2'``, ... to its string form."""
    tag = str(level).strip().upper().replace(" ", "")
    if tag == "1+AB":
        return "1+AB"
    try:
        k = int(tag)
    except ValueError:
        raise LevelError(f"unknown level tag {level!r}") from None
    if k < 1:
        raise LevelError(f"level must be at least 1, got {k}")
    return str(k)


def level_rank(level):
    """Sort key placing ``1 < 1+AB < 2 < 3 < ...``."""
    tag = parse_level(level)
    return 1.5 if tag == "1+AB" else float(tag)


def build_words(level, allow_large=False):
    """Canonical words indexing the moment matrix at ``level``, shortest first."""
    tag = parse_level(level)
    k = 1 if tag == "1+AB" else int(tag)
    if k > MAX_SAFE_LEVEL:
        if not allow_large:
            raise LevelError(f"level {k} exceeds {MAX_SAFE_LEVEL}; pass allow_large=True to override")
        warnings.warn(f"level {k} moment matrices are poorly conditioned in double precision", stacklevel=2)
    words = [IDENTITY]
    seen = {IDENTITY}
    frontier = [IDENTITY]
    for n in range(1, k + 1):
        nxt = []
        for w, s in itertools.product(frontier, SYMBOLS):
            c = canonicalize(w + (s,))
            if len(c) == n and c not in seen:
                seen.add(c)
                nxt.append(c)
        nxt.sort()
        words.extend(nxt)
        frontier = nxt
    if tag == "1+AB":
        words.extend((a, b) for a in ("A0", "A1") for b in ("B0", "B1"))
    return words


@dataclass(frozen=True, eq=False)
class MomentProblem:
    """Moment matrix structure plus a linear objective over its variables.

    ``cell_class[i, j]`` indexes ``classes``; class 0 is the identity, whose
    value is fixed to 1. ``objective[k]`` weights class ``k`` and
    ``constant`` is added to the optimum.
    """

    level: str
    words: list
    classes: list
    cell_class: np.ndarray
    objective: np.ndarray
    constant: float = 0.0

    @property
    def size(self):
        return len(self.words)

    @property
    def index(self):
        return {w: i for i, w in enumerate(self.words)}

    def class_mask(self, k):
        return (self.cell_class == k).astype(np.float64)

    def objective_terms(self):
        return {word_label(self.classes[k]): float(v) for k, v in enumerate(self.objective) if v != 0.0}


def _objective_words(f):
    const, A, B, E = bell.correlator_form(f.functional if hasattr(f, "functional") else f)
    terms = {}
    for x in range(2):
        terms[(f"A{x}",)] = A[x]
    for y in range(2):
        terms[(f"B{y}",)] = B[y]
    for x, y in itertools.product(range(2), range(2)):
        terms[(f"A{x}", f"B{y}")] = E[x, y]
    return const, terms


def build_moment_problem(f, level):
    """Moment problem maximising the correlator form of a CHSH-scenario functional."""
    base = f.functional if hasattr(f, "functional") else f
    if base.scenario != bell.CHSH_SCENARIO:
        raise bell.UnsupportedScenarioError("NPA bounds are implemented for the (2,2,2,2) scenario only")
    tag = parse_level(level)
    words = build_words(tag, allow_large=True) if int(tag.split("+")[0]) > MAX_SAFE_LEVEL else build_words(tag)
    n = len(words)
    classes = [IDENTITY]
    lookup = {IDENTITY: 0}
    cell = np.zeros((n, n), dtype=np.intp)
    for i, j in itertools.product(range(n), range(n)):
        key = class_key(product(words[i], words[j]))
        if key not in lookup:
            lookup[key] = len(classes)
            classes.append(key)
        cell[i, j] = lookup[key]
    const, terms = _objective_words(f)
    objective = np.zeros(len(classes))
    for w, v in terms.items():
        if v != 0.0:
            objective[lookup[class_key(w)]] += v
    return MomentProblem(tag, words, classes, cell, objective, float(const))


@dataclass(frozen=True, eq=False)
class SdpResult:
    upper_bound: float
    lower_bound: float
    moment_matrix: np.ndarray
    duality_gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    status: str

    @property
    def certified(self):
        return self.status == sdp.OPTIMAL


def solve_sdp(mp, tol=DEFAULT_TOL, max_iter=200):
    """Maximise the objective over PSD moment matrices with unit identity cell.

    The moment matrix is ``I + sum_k y_k F_k`` over the non-identity class
    masks ``F_k``. ``upper_bound`` is the certificate objective (trace of
    the dual matrix) plus the l1 norm of its equality residual plus the
    constant. Since all moments lie in ``[-1, 1]`` this bounds every quantum
    value even when the certificate is only approximately feasible.
    """
    tol = check_real(tol, "tol")
    if tol < 1e-10:
        raise ValueError("tol below 1e-10 is beyond double-precision reach")
    if mp.size > 200:
        raise ValueError(f"moment matrix of size {mp.size} exceeds the dense solver limit 200")
    m = len(mp.classes) - 1
    masks = np.stack([mp.class_mask(k) for k in range(1, m + 1)])
    C = mp.class_mask(0)
    res = sdp.solve_lmi(C, -masks, mp.objective[1:], tol=tol, max_iter=max_iter)
    moment = C + np.tensordot(res.y, masks, axes=1)
    # every moment lies in [-1, 1], so the residual of the certificate costs at most its l1 norm
    slack = float(np.abs(res.primal_residual).sum())
    return SdpResult(
        upper_bound=res.primal_objective + slack + mp.constant,
        lower_bound=res.dual_objective + mp.constant,
        moment_matrix=moment,
        duality_gap=abs(res.primal_objective - res.dual_objective),
        primal_infeasibility=res.primal_infeasibility,
        dual_infeasibility=res.dual_infeasibility,
        iterations=res.iterations,
        status=res.status,
    )


def _check_npa_tilts(alpha, beta):
    alpha = check_real(alpha, "alpha")
    beta = check_real(beta, "beta")
    if alpha < 0 or beta < 0 or alpha + beta > 2.5:
        raise closed_form.TiltRangeError("NPA probing needs alpha, beta >= 0 and alpha + beta <= 2.5")
    return alpha, beta


def npa_solve(alpha, beta, level, tol=DEFAULT_TOL):
    alpha, beta = _check_npa_tilts(alpha, beta)
    return solve_sdp(build_moment_problem(bell.tilted_chsh_functional(alpha, beta), level), tol=tol)


def npa_bound(alpha, beta, level, tol=DEFAULT_TOL):
    """NPA upper bound on ``CHSH + alpha<A_0> + beta<B_0>`` at ``level``."""
    return npa_solve(alpha, beta, level, tol).upper_bound


def min_tight_level(alpha, beta, gap_tol=1e-6, max_level="3", tol=DEFAULT_TOL):
    """Smallest level whose bound is within ``gap_tol`` of the exact value, else ``None``."""
    cq = closed_form.quantum_value(alpha, beta)
    top = level_rank(max_level)
    for tag in LEVELS:
        if level_rank(tag) > top:
            break
        if npa_bound(alpha, beta, tag, tol) - cq <= gap_tol:
            return tag
    return None

"""Bell scenarios, behaviours and linear Bell functionals.

Tables are dense float64 arrays indexed ``[a, b, x, y]``. For dichotomic
measurements outcome index 0 stands for the value +1 and index 1 for -1.
"""

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._validation import (
    MAX_VERTICES,
    NS_TOL,
    PROB_TOL,
    InvalidBehaviorError,
    ScenarioMismatchError,
    ScenarioTooLargeError,
    SignalingError,
    UnsupportedScenarioError,
    check_efficiency,
)

#: Physical values of the two outcome indices of a dichotomic measurement.
OUTCOME_VALUES = np.array([1.0, -1.0])

SCHEMA_VERSION = 1


def _frozen(array):
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Scenario:
    """Input and outcome counts ``(mA, mB, dA, dB)`` of a bipartite Bell test."""

    mA: int
    mB: int
    dA: int
    dB: int

    def __post_init__(self):
        for name in ("mA", "mB", "dA", "dB"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidBehaviorError(f"{name} must be a positive integer, got {value!r}")

    @property
    def shape(self):
        return (self.dA, self.dB, self.mA, self.mB)

    @property
    def n_vertices(self):
        return self.dA**self.mA * self.dB**self.mB

    def to_dict(self):
        return {"mA": self.mA, "mB": self.mB, "dA": self.dA, "dB": self.dB}


CHSH_SCENARIO = Scenario(2, 2, 2, 2)


@dataclass(frozen=True)
class CorrelatorSet:
    """Full-correlators ``E[x, y]`` and marginals ``A[x]``, ``B[y]`` of a CHSH-scenario behaviour."""

    E: np.ndarray
    A: np.ndarray = field(default_factory=lambda: np.zeros(2))
    B: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        E, A, B = _frozen(self.E), _frozen(self.A), _frozen(self.B)
        if E.shape != (2, 2) or A.shape != (2,) or B.shape != (2,):
            raise InvalidBehaviorError("correlators must have shapes E (2, 2), A (2,), B (2,)")
        for arr in (E, A, B):
            if np.any(np.abs(arr) > 1 + PROB_TOL):
                raise InvalidBehaviorError("correlators must lie in [-1, 1]")
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional probability table ``p(ab|xy)`` stored as ``table[a, b, x, y]``."""

    scenario: Scenario
    table: np.ndarray

    def __post_init__(self):
        table = _frozen(self.table)
        if table.shape != self.scenario.shape:
            raise InvalidBehaviorError(
                f"table shape {table.shape} does not match scenario shape {self.scenario.shape}"
            )
        if np.any(table < -PROB_TOL):
            raise InvalidBehaviorError(f"negative probability {table.min():.3e}")
        sums = table.sum(axis=(0, 1))
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            raise InvalidBehaviorError(
                f"slices p(.,.|x,y) must sum to 1, worst deviation {np.abs(sums - 1).max():.3e}"
            )
        object.__setattr__(self, "table", table)

    def conditional_A(self):
        """``p(a|x,y)`` as an array ``[a, x, y]``; depends on ``y`` only for signalling tables."""
        return self.table.sum(axis=1)

    def conditional_B(self):
        """``p(b|x,y)`` as an array ``[b, x, y]``."""
        return self.table.sum(axis=0)

    def signaling_gap(self):
        pa = self.conditional_A()
        pb = self.conditional_B()
        gap_a = np.ptp(pa, axis=2).max()
        gap_b = np.ptp(pb, axis=1).max()
        return float(max(gap_a, gap_b))

    def is_no_signaling(self, tol=NS_TOL):
        return self.signaling_gap() <= tol

    @property
    def marginal_A(self):
        """``p_A(a|x)`` as ``[a, x]`` (average over Bob's input)."""
        return self.conditional_A().mean(axis=2)

    @property
    def marginal_B(self):
        """``p_B(b|y)`` as ``[b, y]`` (average over Alice's input)."""
        return self.conditional_B().mean(axis=1)

    def mix(self, other, weight):
        """Convex combination ``(1-weight)*self + weight*other``."""
        _same_scenario(self.scenario, other.scenario)
        return Behavior(self.scenario, (1 - weight) * self.table + weight * other.table)

    def to_dict(self):
        return {
            "schemaVersion": SCHEMA_VERSION,
            "kind": "behavior",
            "scenario": self.scenario.to_dict(),
            "table": _table_to_rows(self.table),
        }

    @classmethod
    def from_dict(cls, doc):
        scenario = Scenario(**doc["scenario"])
        return cls(scenario, _rows_to_table(doc["table"], scenario))

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """Linear functional ``sum_abxy coeffs[a,b,x,y] p(ab|xy)``; the local bound is cached."""

    scenario: Scenario
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = _frozen(self.coeffs)
        if coeffs.shape != self.scenario.shape:
            raise ScenarioMismatchError(
                f"coefficient shape {coeffs.shape} does not match scenario {self.scenario.shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @cached_property
    def local_bound(self):
        return local_bound(self)

    def __add__(self, other):
        _same_scenario(self.scenario, other.scenario)
        return BellFunctional(self.scenario, self.coeffs + other.coeffs)

    def __mul__(self, factor):
        return BellFunctional(self.scenario, float(factor) * self.coeffs)

    __rmul__ = __mul__

    def to_dict(self):
        return {
            "schemaVersion": SCHEMA_VERSION,
            "kind": "functional",
            "scenario": self.scenario.to_dict(),
            "table": _table_to_rows(self.coeffs),
            "localBound": self.local_bound,
        }

    @classmethod
    def from_dict(cls, doc):
        scenario = Scenario(**doc["scenario"])
        return cls(scenario, _rows_to_table(doc["table"], scenario))

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _same_scenario(s1, s2):
    if s1 != s2:
        raise ScenarioMismatchError(f"scenario mismatch: {s1} vs {s2}")


def _table_to_rows(table):
    # rows indexed by (x, y), columns by (a, b), both row-major
    dA, dB, mA, mB = table.shape
    return table.transpose(2, 3, 0, 1).reshape(mA * mB, dA * dB).tolist()


def _rows_to_table(rows, scenario):
    rows = np.asarray(rows, dtype=np.float64)
    expected = (scenario.mA * scenario.mB, scenario.dA * scenario.dB)
    if rows.shape != expected:
        raise InvalidBehaviorError(f"table has shape {rows.shape}, expected {expected}")
    return rows.reshape(scenario.mA, scenario.mB, scenario.dA, scenario.dB).transpose(2, 3, 0, 1)


def _require_chsh(scenario):
    if scenario != CHSH_SCENARIO:
        raise UnsupportedScenarioError(f"operation needs the (2,2,2,2) scenario, got {scenario}")


def behavior_from_correlators(c):
    """Rebuild ``p(ab|xy) = (1 + a<A_x> + b<B_y> + ab<A_x B_y>)/4``."""
    a = OUTCOME_VALUES[:, None, None, None]
    b = OUTCOME_VALUES[None, :, None, None]
    table = (1 + a * c.A[None, None, :, None] + b * c.B[None, None, None, :] + a * b * c.E) / 4
    if np.any(table < -PROB_TOL):
        raise InvalidBehaviorError(
            f"correlators do not define a probability table (min entry {table.min():.3e})"
        )
    return Behavior(CHSH_SCENARIO, np.clip(table, 0.0, None))


def correlators_from_behavior(p):
    _require_chsh(p.scenario)
    a = OUTCOME_VALUES[:, None, None, None]
    b = OUTCOME_VALUES[None, :, None, None]
    E = (a * b * p.table).sum(axis=(0, 1))
    A = (OUTCOME_VALUES[:, None] * p.marginal_A).sum(axis=0)
    B = (OUTCOME_VALUES[:, None] * p.marginal_B).sum(axis=0)
    return CorrelatorSet(np.clip(E, -1, 1), np.clip(A, -1, 1), np.clip(B, -1, 1))


def evaluate_functional(f, p):
    _same_scenario(f.scenario, p.scenario)
    return float(np.sum(f.coeffs * p.table))


def deterministic_behavior(scenario, ax, by):
    """Vertex ``p(ab|xy) = delta(a, ax[x]) delta(b, by[y])`` (outcome indices)."""
    ax, by = tuple(ax), tuple(by)
    if len(ax) != scenario.mA or len(by) != scenario.mB:
        raise InvalidBehaviorError("one outcome per input is required")
    table = np.zeros(scenario.shape)
    for x, y in itertools.product(range(scenario.mA), range(scenario.mB)):
        table[ax[x], by[y], x, y] = 1.0
    return Behavior(scenario, table)


def _assignments(m, d):
    return np.array(list(itertools.product(range(d), repeat=m)), dtype=np.intp).reshape(-1, m)


def local_bound(f, return_vertex=False):
    """Maximum of ``f`` over all deterministic local strategies.

    With ``return_vertex`` the maximising outcome assignments ``(ax, by)`` are
    returned as well (first in lexicographic order).
    """
    s = f.scenario
    if s.n_vertices > MAX_VERTICES:
        raise ScenarioTooLargeError(
            f"{s.n_vertices} deterministic vertices exceed the enumeration limit {MAX_VERTICES}"
        )
    alice = _assignments(s.mA, s.dA)
    bob = _assignments(s.mB, s.dB)
    values = np.zeros((len(alice), len(bob)))
    for x, y in itertools.product(range(s.mA), range(s.mB)):
        values += f.coeffs[alice[:, x][:, None], bob[:, y][None, :], x, y]
    i, j = np.unravel_index(np.argmax(values), values.shape)
    best = float(values[i, j])
    if return_vertex:
        return best, tuple(int(v) for v in alice[i]), tuple(int(v) for v in bob[j])
    return best


def effective_behavior(p, q, etaA, etaB):
    """Observed behaviour when no-click events are replaced by the local assignment ``q``.

    Mixture of ``p`` (both click), ``p_A (x) q_B`` (only Alice clicks),
    ``q_A (x) p_B`` (only Bob clicks) and ``q`` (neither clicks). For a
    signalling ``p`` the clicking party's conditional ``p(a|x,y)`` is used.
    """
    etaA = check_efficiency(etaA, "etaA")
    etaB = check_efficiency(etaB, "etaB")
    _same_scenario(p.scenario, q.scenario)
    if not q.is_no_signaling():
        raise SignalingError(
            f"assignment strategy must be no-signalling (gap {q.signaling_gap():.3e})"
        )
    pa = p.conditional_A()  # [a, x, y]
    pb = p.conditional_B()  # [b, x, y]
    qa = q.marginal_A  # [a, x]
    qb = q.marginal_B  # [b, y]
    only_alice = pa[:, None, :, :] * qb[None, :, None, :]
    only_bob = qa[:, None, :, None] * pb[None, :, :, :]
    table = (
        etaA * etaB * p.table
        + etaA * (1 - etaB) * only_alice
        + (1 - etaA) * etaB * only_bob
        + (1 - etaA) * (1 - etaB) * q.table
    )
    return Behavior(p.scenario, table)


def correlator_functional(E, A=(0.0, 0.0), B=(0.0, 0.0), constant=0.0):
    """CHSH-scenario functional ``const + sum E_xy<A_xB_y> + sum A_x<A_x> + sum B_y<B_y>``.

    Marginal terms are spread evenly over the other party's inputs.
    """
    E = np.asarray(E, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    a = OUTCOME_VALUES[:, None, None, None]
    b = OUTCOME_VALUES[None, :, None, None]
    coeffs = (
        a * b * E[None, None, :, :]
        + a * A[None, None, :, None] / 2
        + b * B[None, None, None, :] / 2
        + constant / 4
    )
    return BellFunctional(CHSH_SCENARIO, np.broadcast_to(coeffs, CHSH_SCENARIO.shape))


def correlator_form(f):
    """Project a CHSH-scenario functional onto ``(constant, A, B, E)`` correlator coefficients.

    Exact on no-signalling behaviours, where the functional equals
    ``constant + A.<A> + B.<B> + sum E * <AB>``.
    """
    _require_chsh(f.scenario)
    a = OUTCOME_VALUES[:, None, None, None]
    b = OUTCOME_VALUES[None, :, None, None]
    c = f.coeffs
    constant = c.sum() / 4
    A = (a * c).sum(axis=(0, 1, 3)) / 4
    B = (b * c).sum(axis=(0, 1, 2)) / 4
    E = (a * b * c).sum(axis=(0, 1)) / 4
    # drop cancellation residue so absent terms are exactly zero
    cut = 1e-14 * max(np.abs(c).max(), 1.0)
    constant = 0.0 if abs(constant) < cut else constant
    for part in (A, B, E):
        part[np.abs(part) < cut] = 0.0
    return float(constant), A, B, E


def chsh_functional():
    return correlator_functional([[1.0, 1.0], [1.0, -1.0]])


def tilted_chsh_functional(alpha, beta):
    """``CHSH + alpha<A_0> + beta<B_0>``."""
    return correlator_functional([[1.0, 1.0], [1.0, -1.0]], A=(alpha, 0.0), B=(beta, 0.0))


def tsirelson_behavior():
    """Isotropic behaviour reaching ``2*sqrt(2)`` on CHSH with unbiased marginals."""
    r = 1 / np.sqrt(2)
    return behavior_from_correlators(CorrelatorSet(np.array([[r, r], [r, -r]])))


def uniform_behavior(scenario=CHSH_SCENARIO):
    return Behavior(scenario, np.full(scenario.shape, 1.0 / (scenario.dA * scenario.dB)))


def pr_box(gamma=0, mu=0, nu=0):
    """No-signalling box with ``a XOR b = x*y XOR mu*x XOR nu*y XOR gamma`` (outcome indices)."""
    table = np.zeros(CHSH_SCENARIO.shape)
    for a, b, x, y in itertools.product(range(2), repeat=4):
        if a ^ b == (x * y) ^ (mu * x) ^ (nu * y) ^ gamma:
            table[a, b, x, y] = 0.5
    return Behavior(CHSH_SCENARIO, table)


def no_signaling_vertices():
    """The 16 deterministic and 8 PR-type vertices of the CHSH no-signalling polytope."""
    det = [
        deterministic_behavior(CHSH_SCENARIO, ax, by)
        for ax in itertools.product(range(2), repeat=2)
        for by in itertools.product(range(2), repeat=2)
    ]
    return det + [pr_box(*bits) for bits in itertools.product(range(2), repeat=3)]


def random_mixture(vertices, rng):
    """Random convex combination (Dirichlet weights) of the given behaviours."""
    w = rng.dirichlet(np.ones(len(vertices)))
    table = np.tensordot(w, np.stack([v.table for v in vertices]), axes=1)
    return Behavior(vertices[0].scenario, table)

"""Tilting Bell functionals by detector inefficiency.

A no-click event is replaced by a local deterministic assignment ``qbar``.
The observed value of a functional on the effective behaviour then splits as

    f(p~) = etaA*etaB * f_tilted(p) + (1-etaA)*(1-etaB) * f(qbar)

where ``f_tilted`` adds single-party marginal terms weighted by
``(1-eta)/eta`` of the *other* party's detector.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import bell
from ._validation import EfficiencyError, check_bit, check_efficiency

#: Two functionals are considered equal after rounding to this many decimals.
_CANON_DECIMALS = 10


def tilt_weight(eta):
    """``(1-eta)/eta``: weight of a party's no-click events relative to its clicks."""
    return (1.0 - eta) / eta


@dataclass(frozen=True)
class DeterministicAssignment:
    """Outcome index per input, ``ax[x]`` for Alice and ``by[y]`` for Bob."""

    ax: tuple
    by: tuple

    def __post_init__(self):
        object.__setattr__(self, "ax", tuple(int(v) for v in self.ax))
        object.__setattr__(self, "by", tuple(int(v) for v in self.by))

    @classmethod
    def from_bits(cls, sA, sB, rA, rB):
        """CHSH assignment with ``<A_x> = (-1)^(rA*x + sA)`` and ``<B_y> = (-1)^(rB*y + sB)``."""
        sA, sB, rA, rB = (check_bit(v, n) for v, n in zip((sA, sB, rA, rB), ("sA", "sB", "rA", "rB")))
        return cls(((sA) % 2, (rA + sA) % 2), ((sB) % 2, (rB + sB) % 2))

    @property
    def bits(self):
        """``(sA, sB, rA, rB)``; only defined for two inputs and two outcomes per party."""
        if len(self.ax) != 2 or len(self.by) != 2:
            raise bell.UnsupportedScenarioError("bit labels exist only for the CHSH scenario")
        sA, sB = self.ax[0], self.by[0]
        return sA, sB, (self.ax[1] - sA) % 2, (self.by[1] - sB) % 2

    @property
    def parity(self):
        """``sA + sB + rA*rB mod 2``; class 0 tilts towards CHSH, class 1 against it."""
        sA, sB, rA, rB = self.bits
        return (sA + sB + rA * rB) % 2

    def behavior(self, scenario=bell.CHSH_SCENARIO):
        return bell.deterministic_behavior(scenario, self.ax, self.by)


ALL_PLUS = DeterministicAssignment((0, 0), (0, 0))


@dataclass(frozen=True, eq=False)
class TiltedFunctional:
    """Tilted functional with its provenance.

    ``alpha`` and ``beta`` are the CHSH-normalised weights ``2(1-etaB)/etaB``
    and ``2(1-etaA)/etaA``. ``bound`` is the threshold the tilted value must
    exceed for the effective behaviour to violate the base inequality;
    ``vertex_bound`` is the plain local bound of the tilted coefficients.
    The two coincide unless ``qbar`` scores below the base local bound.
    """

    functional: bell.BellFunctional
    base: bell.BellFunctional
    alpha: float
    beta: float
    assignment: DeterministicAssignment
    etaA: float
    etaB: float
    bound: float
    vertex_bound: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "vertex_bound", self.functional.local_bound)
        if self.base.scenario == bell.CHSH_SCENARIO:
            tilt = bell.BellFunctional(self.base.scenario, self.functional.coeffs - self.base.coeffs)
            const, A, B, E = bell.correlator_form(tilt)
            ok = (
                abs(const) < 1e-9
                and np.allclose(E, 0.0, atol=1e-9)
                and abs(np.abs(A).sum() - self.alpha) <= 1e-9 * max(1.0, self.alpha)
                and abs(np.abs(B).sum() - self.beta) <= 1e-9 * max(1.0, self.beta)
            )
            if _is_chsh(self.base) and not ok:
                raise AssertionError("tilt weights inconsistent with the tilted coefficients")

    @property
    def coeffs(self):
        return self.functional.coeffs

    @property
    def in_violation_region(self):
        """Whether a quantum violation of ``bound`` exists (``alpha + beta < 2``); ``None`` off-CHSH."""
        if not _is_chsh(self.base):
            return None
        return self.alpha + self.beta < 2.0

    def correlator_form(self):
        return bell.correlator_form(self.functional)

    def to_dict(self):
        const, A, B, E = self.correlator_form()
        doc = {
            "schemaVersion": bell.SCHEMA_VERSION,
            "alpha": self.alpha,
            "beta": self.beta,
            "etaA": self.etaA,
            "etaB": self.etaB,
            "bound": self.bound,
            "vertexBound": self.vertex_bound,
            "inViolationRegion": self.in_violation_region,
            "assignment": {"ax": list(self.assignment.ax), "by": list(self.assignment.by)},
            "correlatorForm": {"constant": const, "A": A.tolist(), "B": B.tolist(), "E": E.tolist()},
            "functional": self.functional.to_dict(),
        }
        if len(self.assignment.ax) == 2 and len(self.assignment.by) == 2:
            doc["assignment"]["bits"] = list(self.assignment.bits)
            doc["assignment"]["parity"] = self.assignment.parity
        return doc


@lru_cache(maxsize=1)
def _chsh_coeffs():
    return bell.chsh_functional().coeffs


def _is_chsh(f):
    return f.scenario == bell.CHSH_SCENARIO and np.array_equal(f.coeffs, _chsh_coeffs())


def tilted_coefficients(f, qbar, etaA, etaB):
    """``T = f + w(etaB) * f[a, b_y, x, y] + w(etaA) * f[a_x, b, x, y]``.

    The added terms depend on one party's outcome only, so on no-signalling
    behaviours they are the single-party marginal functionals.
    """
    s = f.scenario
    c = f.coeffs
    x = np.arange(s.mA)
    y = np.arange(s.mB)
    by = np.asarray(qbar.by)
    ax = np.asarray(qbar.ax)
    # c[a, by[y], x, y] as an array [a, x, y], broadcast over b
    alice_part = c[:, by[None, :], x[:, None], y[None, :]]
    bob_part = c[ax[:, None], :, x[:, None], y[None, :]].transpose(2, 0, 1)
    return (
        c
        + tilt_weight(etaB) * alice_part[:, None, :, :]
        + tilt_weight(etaA) * bob_part[None, :, :, :]
    )


def tilt_functional(f, qbar, etaA, etaB):
    """Tilted functional whose violation by ``p`` is violation of ``f`` by the effective behaviour."""
    etaA = check_efficiency(etaA, "etaA", allow_zero=False)
    etaB = check_efficiency(etaB, "etaB", allow_zero=False)
    if len(qbar.ax) != f.scenario.mA or len(qbar.by) != f.scenario.mB:
        raise bell.ScenarioMismatchError("assignment does not match the functional's scenario")
    coeffs = tilted_coefficients(f, qbar, etaA, etaB)
    q_value = bell.evaluate_functional(f, qbar.behavior(f.scenario))
    bound = (f.local_bound - q_value * (1 - etaA) * (1 - etaB)) / (etaA * etaB)
    return TiltedFunctional(
        functional=bell.BellFunctional(f.scenario, coeffs),
        base=f,
        alpha=2 * tilt_weight(etaB),
        beta=2 * tilt_weight(etaA),
        assignment=qbar,
        etaA=etaA,
        etaB=etaB,
        bound=float(bound),
    )


def doubly_tilted_chsh(etaA, etaB):
    """``CHSH + alpha<A_0> + beta<B_0>`` with bound ``2(1/etaA + 1/etaB - 1)``."""
    return tilt_functional(bell.chsh_functional(), ALL_PLUS, etaA, etaB)


def tilts_from_efficiencies(etaA, etaB):
    etaA = check_efficiency(etaA, "etaA", allow_zero=False)
    etaB = check_efficiency(etaB, "etaB", allow_zero=False)
    return 2 * tilt_weight(etaB), 2 * tilt_weight(etaA)


def efficiencies_from_tilts(alpha, beta):
    """Inverse of :func:`tilts_from_efficiencies`: ``etaA = 2/(2+beta)``, ``etaB = 2/(2+alpha)``."""
    if alpha < 0 or beta < 0:
        raise EfficiencyError("negative tilts do not correspond to efficiencies")
    return 2.0 / (2.0 + beta), 2.0 / (2.0 + alpha)


def critical_efficiency_bob(etaA):
    """Smallest Bob efficiency allowing a CHSH violation given ``etaA`` (``alpha + beta = 2``)."""
    etaA = check_efficiency(etaA, "etaA")
    if etaA <= 0.5:
        raise EfficiencyError(f"etaA={etaA} <= 1/2: no efficiency of Bob's detector suffices")
    return etaA / (3 * etaA - 1)


def in_violation_region(etaA, etaB):
    alpha, beta = tilts_from_efficiencies(etaA, etaB)
    return alpha + beta < 2.0


def enumerate_assignments():
    """The 16 deterministic CHSH assignments ordered by bits ``(sA, sB, rA, rB)``."""
    return [DeterministicAssignment.from_bits(*bits) for bits in itertools.product((0, 1), repeat=4)]


def assignment_tilted_chsh(sA, sB, rA, rB, etaA, etaB):
    """Tilted CHSH for the assignment with the given bits, built from its correlator form.

    Alice's input ``x = rB`` receives ``(-1)^sB * 2(1-etaB)/etaB`` and Bob's
    input ``y = rA`` receives ``(-1)^sA * 2(1-etaA)/etaA``.
    """
    qbar = DeterministicAssignment.from_bits(sA, sB, rA, rB)
    etaA = check_efficiency(etaA, "etaA", allow_zero=False)
    etaB = check_efficiency(etaB, "etaB", allow_zero=False)
    wA, wB = tilt_weight(etaA), tilt_weight(etaB)
    A = [wB * (1 + (-1) ** (rB + x)) * (-1) ** sB for x in (0, 1)]
    B = [wA * (1 + (-1) ** (rA + y)) * (-1) ** sA for y in (0, 1)]
    functional = bell.correlator_functional([[1.0, 1.0], [1.0, -1.0]], A=A, B=B)
    sign = (-1) ** qbar.parity
    bound = (2.0 - 2.0 * sign * (1 - etaA) * (1 - etaB)) / (etaA * etaB)
    return TiltedFunctional(
        functional=functional,
        base=bell.chsh_functional(),
        alpha=2 * wB,
        beta=2 * wA,
        assignment=qbar,
        etaA=etaA,
        etaB=etaB,
        bound=bound,
    )


def effective_chsh_value(cQ, assignment, etaA, etaB):
    """Observed CHSH value when the tilted functional reaches ``cQ`` and no-clicks follow ``assignment``."""
    etaA = check_efficiency(etaA, "etaA")
    etaB = check_efficiency(etaB, "etaB")
    sign = (-1) ** assignment.parity
    return etaA * etaB * cQ + 2.0 * (1 - etaA) * (1 - etaB) * sign


@dataclass(frozen=True)
class GapResult:
    delta: float
    cQ: float
    cQ_alt: float
    in_violation_region: bool


def assignment_gap(etaA, etaB):
    """Advantage of a class-0 over a class-1 assignment in the optimal effective CHSH value.

    Computed outside the violation region as well; ``in_violation_region``
    flags those points.
    """
    from .closed_form import alt_quantum_value, quantum_value

    alpha, beta = tilts_from_efficiencies(etaA, etaB)
    cq = quantum_value(alpha, beta)
    cq_alt = alt_quantum_value(alpha, beta)
    delta = etaA * etaB * (cq - cq_alt) + 4 * (1 - etaA) * (1 - etaB)
    return GapResult(float(delta), cq, cq_alt, alpha + beta < 2.0)


# relabelings ---------------------------------------------------------------


def _index_grid():
    return np.stack(np.meshgrid(*(np.arange(2),) * 4, indexing="ij"), axis=-1).reshape(-1, 4)


@lru_cache(maxsize=1)
def _all_relabelings():
    """Input swaps, input-dependent outcome flips and the party swap, as index maps."""
    idx = _index_grid()
    maps = []
    for swap, ix, iy, fa0, fa1, fb0, fb1 in itertools.product((0, 1), repeat=7):
        a, b, x, y = idx.T
        if swap:
            a, b, x, y = b, a, y, x
        x2, y2 = x ^ ix, y ^ iy
        a2 = a ^ np.where(x2 == 0, fa0, fa1)
        b2 = b ^ np.where(y2 == 0, fb0, fb1)
        maps.append(np.ravel_multi_index((a2, b2, x2, y2), (2, 2, 2, 2)))
    unique = {tuple(m) for m in maps}
    return sorted(unique)


@lru_cache(maxsize=1)
def chsh_symmetry_group():
    """Relabelings of the CHSH scenario that leave the CHSH functional invariant."""
    chsh = _chsh_coeffs().ravel()
    return tuple(m for m in _all_relabelings() if np.array_equal(chsh[list(m)], chsh))


def apply_relabeling(coeffs, relabeling):
    flat = np.asarray(coeffs, dtype=np.float64).ravel()
    return flat[list(relabeling)].reshape(2, 2, 2, 2)


def canonical_form(f):
    """Lexicographically smallest image of ``f`` under :func:`chsh_symmetry_group`."""
    coeffs = f.coeffs if hasattr(f, "coeffs") else np.asarray(f)
    flat = np.round(np.asarray(coeffs, dtype=np.float64).ravel(), _CANON_DECIMALS) + 0.0
    images = [tuple(flat[list(g)]) for g in chsh_symmetry_group()]
    return min(images)

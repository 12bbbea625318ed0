"""End-to-end self-test of a tilted CHSH functional: closed form, state and oracle."""

from dataclasses import dataclass

import numpy as np

from . import closed_form, qubit
from ._validation import check_tilts


@dataclass(frozen=True, eq=False)
class SelfTestReport:
    alpha: float
    beta: float
    cQ: float
    cA_star: float
    cB_star: float
    strategy: qubit.QubitStrategy
    oracle_delta: float
    cosine_residual: float
    stationarity: qubit.StationarityResiduals

    @property
    def max_stationarity_residual(self):
        return float(max(abs(r) for r in self.stationarity))

    def to_dict(self):
        doc = self.strategy.to_dict()
        doc.update(
            cQ=self.cQ,
            oracleDelta=self.oracle_delta,
            cosineResidual=self.cosine_residual,
            stationarity=dict(self.stationarity._asdict()),
        )
        return doc


def self_test_strategy(alpha, beta, oracle=True, grid_n=64):
    """Closed-form value, cosines and state at ``(alpha, beta)``, cross-checked.

    ``oracle_delta`` is ``|cQ - oracle value|`` (NaN with ``oracle=False``).
    ``cosine_residual`` is the residual of the quadratic the optimal cosine
    solves, relative to its largest term.
    """
    alpha, beta = check_tilts(alpha, beta)
    cq = closed_form.quantum_value(alpha, beta)
    strategy = qubit.optimal_state(alpha, beta)
    if alpha == beta:
        h = closed_form.sym_cosine_poly(alpha, cq)
    else:
        h = closed_form.gen_cosine_poly(alpha, beta, cq)
    c = strategy.cA
    terms = np.abs(h) * np.abs(c) ** np.arange(3)
    cos_res = float(abs(np.polynomial.polynomial.polyval(c, h)) / max(terms.max(), 1.0))
    delta = float("nan")
    if oracle:
        delta = abs(cq - qubit.oracle_max(alpha, beta, grid_n=grid_n).value)
    stat = qubit.stationarity_residuals(strategy.cA, strategy.cB, cq, alpha, beta)
    return SelfTestReport(alpha, beta, cq, strategy.cA, strategy.cB, strategy, delta, cos_res, stat)

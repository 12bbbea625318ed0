"""Grid scans over efficiencies or tilts, written as CSV."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import bell, closed_form, npa, qubit, tilting
from ._validation import BellError

OUTPUTS = ("cQ", "loopholeFreeCHSH", "cosines", "schmidt", "npaLevel", "delta")
_OUTPUT_COLUMNS = {
    "cQ": ("cQ",),
    "loopholeFreeCHSH": ("loopholeFreeCHSH",),
    "cosines": ("cA", "cB"),
    "schmidt": ("schmidt",),
    "npaLevel": ("npaLevel",),
    "delta": ("delta",),
}


@dataclass(frozen=True)
class ScanSpec:
    """Grid description.

    ``plane`` is ``"eta"`` (x = etaA, y = etaB) or ``"alpha"`` (x = alpha,
    y = beta). ``y_values`` replaces the y range by an explicit list, in
    which the string ``"x"`` stands for the current x (the diagonal).
    """

    plane: str = "eta"
    x_range: tuple = (0.5, 1.0)
    y_range: tuple = (0.5, 1.0)
    steps: tuple = (11, 11)
    outputs: tuple = ("cQ", "loopholeFreeCHSH")
    y_values: tuple = None
    max_level: str = "3"
    gap_tol: float = 1e-6
    npa_tol: float = npa.DEFAULT_TOL

    def __post_init__(self):
        if self.plane not in ("eta", "alpha"):
            raise ValueError(f"plane must be 'eta' or 'alpha', got {self.plane!r}")
        if len(self.steps) != 2 or min(self.steps) < 2:
            raise ValueError("step counts must be at least 2")
        for o in self.outputs:
            if o not in OUTPUTS:
                raise ValueError(f"unknown output {o!r}; choose from {', '.join(OUTPUTS)}")
        if self.y_values is not None:
            for v in self.y_values:
                if v != "x" and not isinstance(v, (int, float)):
                    raise ValueError(f"bad y value {v!r}")

    @property
    def columns(self):
        cols = ["etaA", "etaB", "alpha", "beta"]
        for o in self.outputs:
            cols.extend(_OUTPUT_COLUMNS[o])
        return cols + ["status"]

    def points(self):
        xs = np.linspace(*self.x_range, self.steps[0])
        for x in xs:
            if self.y_values is not None:
                ys = [x if v == "x" else float(v) for v in self.y_values]
            else:
                ys = np.linspace(*self.y_range, self.steps[1])
            for y in ys:
                yield float(x), float(y)


def _point_row(spec, x, y):
    row = dict.fromkeys(spec.columns, None)
    if spec.plane == "eta":
        etaA, etaB = x, y
        alpha, beta = tilting.tilts_from_efficiencies(etaA, etaB)
    else:
        alpha, beta = x, y
        etaA, etaB = tilting.efficiencies_from_tilts(alpha, beta)
    row.update(etaA=etaA, etaB=etaB, alpha=alpha, beta=beta)
    inside = alpha + beta < 2.0
    cq = closed_form.quantum_value(alpha, beta)
    if "cQ" in spec.outputs:
        row["cQ"] = cq
    if "loopholeFreeCHSH" in spec.outputs:
        row["loopholeFreeCHSH"] = tilting.effective_chsh_value(cq, tilting.ALL_PLUS, etaA, etaB)
    if inside and ("cosines" in spec.outputs or "schmidt" in spec.outputs):
        s = qubit.optimal_state(alpha, beta)
        row.update(cA=s.cA, cB=s.cB, schmidt=s.schmidt)
        if "cosines" not in spec.outputs:
            row.pop("cA"), row.pop("cB")
        if "schmidt" not in spec.outputs:
            row.pop("schmidt")
    if "npaLevel" in spec.outputs and alpha + beta <= 2.5:
        level = npa.min_tight_level(alpha, beta, spec.gap_tol, spec.max_level, spec.npa_tol)
        row["npaLevel"] = level or "not-found"
    if "delta" in spec.outputs:
        row["delta"] = tilting.assignment_gap(etaA, etaB).delta
    row["status"] = "ok" if inside else "out-of-region"
    return row


def run_scan(spec):
    """Rows in row-major order (x outer); failures are reported in ``status``."""
    for x, y in spec.points():
        try:
            yield _point_row(spec, x, y)
        except (BellError, ValueError, ArithmeticError) as exc:
            row = dict.fromkeys(spec.columns, None)
            row.update(status=f"error: {exc}")
            if spec.plane == "eta":
                row.update(etaA=x, etaB=y)
            else:
                row.update(alpha=x, beta=y)
            yield row


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    v = float(v)
    if math.isnan(v):
        return ""
    return "%.17g" % v


def write_csv(rows, columns, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])


def iso_effective_chsh(etaA, etaB):
    """CHSH value of the isotropic Tsirelson behaviour after the all-+1 assignment."""
    p = bell.effective_behavior(bell.tsirelson_behavior(), tilting.ALL_PLUS.behavior(), etaA, etaB)
    return bell.evaluate_functional(bell.chsh_functional(), p)

"""Shared tolerances, error types and argument checks."""

import numbers

import numpy as np

#: Tolerance on negative probabilities and slice normalisation.
PROB_TOL = 1e-12
#: Maximum marginal discrepancy accepted by the no-signalling predicate.
NS_TOL = 1e-10
#: Largest number of deterministic vertices ``local_bound`` will enumerate.
MAX_VERTICES = 10**7


class BellError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class InvalidBehaviorError(BellError):
    pass


class ScenarioMismatchError(BellError):
    pass


class ScenarioTooLargeError(BellError):
    pass


class EfficiencyError(BellError):
    """Detector efficiency outside the admissible range."""


class SignalingError(BellError):
    pass


class TiltRangeError(BellError):
    pass


class CosineRangeError(BellError):
    pass


class NotSymmetricError(BellError):
    pass


class PolynomialError(BellError):
    pass


class RadicandError(BellError):
    pass


class LevelError(BellError):
    pass


class UnsupportedScenarioError(BellError):
    pass


def check_real(value, name):
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, np.floating, np.integer)):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value):
        raise BellError(f"{name} must be finite, got {value}")
    return value


def check_efficiency(eta, name="eta", allow_zero=True):
    eta = check_real(eta, name)
    if not 0.0 <= eta <= 1.0:
        raise EfficiencyError(f"{name}={eta} is outside [0, 1]")
    if not allow_zero and eta == 0.0:
        raise EfficiencyError(f"{name}=0: tilt weights (1-eta)/eta are undefined")
    return eta


def check_bit(bit, name):
    if bit not in (0, 1):
        raise BellError(f"{name} must be 0 or 1, got {bit!r}")
    return int(bit)


def check_tilts(alpha, beta, upper=2.0):
    alpha = check_real(alpha, "alpha")
    beta = check_real(beta, "beta")
    if alpha < 0 or beta < 0:
        raise TiltRangeError(f"tilts must be non-negative, got alpha={alpha}, beta={beta}")
    if alpha > upper or beta > upper:
        raise TiltRangeError(f"tilts must not exceed {upper}, got alpha={alpha}, beta={beta}")
    return alpha, beta

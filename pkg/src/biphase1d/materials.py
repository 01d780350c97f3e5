"""Barotropic pressure laws, two-fluid mixture coefficients, and the
homogenized (effective) coefficients with their pressure-relaxation source.

Everything here is a closed-form scalar function of the local state; all
functions broadcast over numpy arrays.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

WEIGHTING_CROSS = "cross"
WEIGHTING_OWN = "paper"
WEIGHTINGS = (WEIGHTING_CROSS, WEIGHTING_OWN)


class PressureLaw:
    """Base for barotropic laws p = p(rho) with p(rho) >= 0, nondecreasing."""

    def pressure(self, rho):
        raise NotImplementedError

    def potential(self, rho):
        """Energy density rho * integral_1^rho p(s)/s^2 ds.

        Accepts rho >= 0; the value at rho = 0 is the continuity limit 0.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(PressureLaw):
    """p(rho) = K * rho**gamma with K > 0, gamma >= 1."""

    K: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError(f"pressure coefficient must be > 0, got {self.K}")
        if not self.gamma >= 1:
            raise ValueError(f"pressure exponent must be >= 1, got {self.gamma}")

    def pressure(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be >= 0")
        return self.K * rho**self.gamma

    def potential(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be >= 0")
        if self.gamma == 1:
            # rho*log(rho) -> 0 as rho -> 0+
            with np.errstate(divide="ignore", invalid="ignore"):
                g = self.K * rho * np.log(rho)
            return np.where(rho == 0, 0.0, g)
        return self.K * rho * (rho ** (self.gamma - 1) - 1.0) / (self.gamma - 1.0)


@dataclass(frozen=True)
class TabulatedLaw(PressureLaw):
    """Monotone piecewise-linear p(rho) through (rho_table, p_table)."""

    rho_table: np.ndarray = field(default=None)
    p_table: np.ndarray = field(default=None)

    def __post_init__(self):
        rho_t = np.asarray(self.rho_table, dtype=float)
        p_t = np.asarray(self.p_table, dtype=float)
        if rho_t.ndim != 1 or rho_t.shape != p_t.shape or rho_t.size < 2:
            raise ValueError("tables must be matching 1-d arrays of length >= 2")
        if np.any(np.diff(rho_t) <= 0):
            raise ValueError("rho_table must be strictly increasing")
        if np.any(p_t < 0) or np.any(np.diff(p_t) < 0):
            raise ValueError("p_table must be nonnegative and nondecreasing")
        object.__setattr__(self, "rho_table", rho_t)
        object.__setattr__(self, "p_table", p_t)

    def pressure(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be >= 0")
        return np.interp(rho, self.rho_table, self.p_table)

    def potential(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0):
            raise ValueError("density must be >= 0")

        def one(r):
            if r == 0.0:
                return 0.0
            val, _ = quad(lambda s: self.pressure(s) / s**2, 1.0, r,
                          points=None, limit=200)
            return r * val

        if rho.ndim == 0:
            return np.float64(one(float(rho)))
        return np.array([one(r) for r in rho.ravel()]).reshape(rho.shape)


@dataclass(frozen=True)
class MaterialPair:
    """The two phases: pressure laws and constant viscosities mu > 0."""

    law_plus: PressureLaw
    law_minus: PressureLaw
    mu_plus: float
    mu_minus: float

    def __post_init__(self):
        if not (self.mu_plus > 0 and self.mu_minus > 0):
            raise ValueError("viscosities must be > 0")


def _check_fraction(w, name):
    w = np.asarray(w, dtype=float)
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError(f"{name} must lie in [0, 1]")
    return w


def mixture_pressure(c, rho, mat):
    """Sharp-interface mixture pressure c*p_+(rho) + (1-c)*p_-(rho)."""
    c = _check_fraction(c, "color")
    return c * mat.law_plus.pressure(rho) + (1.0 - c) * mat.law_minus.pressure(rho)


def mixture_viscosity(c, mat):
    """Sharp-interface mixture viscosity c*mu_+ + (1-c)*mu_-."""
    c = _check_fraction(c, "color")
    return c * mat.mu_plus + (1.0 - c) * mat.mu_minus


def mixture_potential(c, rho, mat):
    """Pressure potential of the mixture, affine in c like the pressure."""
    c = _check_fraction(c, "color")
    return c * mat.law_plus.potential(rho) + (1.0 - c) * mat.law_minus.potential(rho)


def mu_eff(alpha, mat):
    """Homogenized viscosity mu_+ mu_- / (alpha mu_- + (1-alpha) mu_+).

    Endpoints return the pure-phase viscosities exactly.
    """
    alpha = _check_fraction(alpha, "volume fraction")
    if mat.mu_plus == mat.mu_minus:
        return np.full_like(alpha, mat.mu_plus)
    denom = alpha * mat.mu_minus + (1.0 - alpha) * mat.mu_plus
    harm = mat.mu_plus * mat.mu_minus / denom
    return np.where(alpha == 1.0, mat.mu_plus,
                    np.where(alpha == 0.0, mat.mu_minus, harm))


def p_eff(alpha, rho_plus, rho_minus, mat, weighting=WEIGHTING_CROSS):
    """Homogenized pressure of the mixture.

    Both variants average the phase pressures with viscosity weights over
    the common denominator alpha*mu_- + (1-alpha)*mu_+:

    * ``"cross"`` pairs each phase pressure with the *other* phase's
      viscosity, which makes p_eff equal the pure-phase pressure exactly
      at alpha in {0, 1} (this is the default).
    * ``"paper"`` pairs each phase pressure with its *own* viscosity; it
      breaks the pure-phase limit whenever mu_+ != mu_- and is kept only
      so runs can compare the two closures.

    The variants coincide when mu_+ == mu_-.
    """
    alpha = _check_fraction(alpha, "volume fraction")
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}, expected one of {WEIGHTINGS}")
    p_p = mat.law_plus.pressure(rho_plus)
    p_m = mat.law_minus.pressure(rho_minus)
    denom = alpha * mat.mu_minus + (1.0 - alpha) * mat.mu_plus
    if weighting == WEIGHTING_CROSS:
        num = alpha * p_p * mat.mu_minus + (1.0 - alpha) * p_m * mat.mu_plus
        return np.where(alpha == 1.0, p_p,
                        np.where(alpha == 0.0, p_m, num / denom))
    num = alpha * p_p * mat.mu_plus + (1.0 - alpha) * p_m * mat.mu_minus
    return num / denom


def relaxation_weights(alpha, mat):
    """Coefficients (a, b) splitting the one-sided strain rates.

    Unique solution of 1 - a*mu_+ = b*alpha and 1 - a*mu_- = -b*(1-alpha):
    a = 1/((1-alpha)*mu_+ + alpha*mu_-), b = (mu_- - mu_+) * a.
    """
    alpha = _check_fraction(alpha, "volume fraction")
    denom = (1.0 - alpha) * mat.mu_plus + alpha * mat.mu_minus
    a = 1.0 / denom
    b = (mat.mu_minus - mat.mu_plus) / denom
    return a, b


def relaxation_rhs(alpha, rho_plus, rho_minus, du_dx, mat):
    """Rate of change of the volume fraction along particle paths.

    alpha*(1-alpha)/((1-alpha)*mu_+ + alpha*mu_-)
        * (p_+(rho_+) - p_-(rho_-) - (mu_+ - mu_-)*du_dx)

    Vanishes identically at alpha in {0, 1}.
    """
    alpha = _check_fraction(alpha, "volume fraction")
    denom = (1.0 - alpha) * mat.mu_plus + alpha * mat.mu_minus
    dp = mat.law_plus.pressure(rho_plus) - mat.law_minus.pressure(rho_minus)
    return alpha * (1.0 - alpha) / denom * (dp - (mat.mu_plus - mat.mu_minus) * du_dx)

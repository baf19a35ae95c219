"""Physical constants, the logarithmic double-well potential, and material laws.

The mixture is described by an order parameter ``r`` in [-1, 1] (volume
fraction difference of the two fluids). Its bulk free energy density is the
logarithmic (Flory-Huggins) double well

    Psi(r) = (theta/2) * [(1+r) ln(1+r) + (1-r) ln(1-r)] - (theta0/2) r**2

with absolute temperature ``theta`` below the critical temperature
``theta0``, which makes the homogeneous state unstable and produces two
preferred mixture states at the binodal values. Psi is singular at r = +-1,
which is analytically convenient (it keeps the exact order parameter inside
(-1, 1)) but useless to a solver whose iterates may briefly leave that
interval. We therefore work with a C^6 regularization ``PsiHat`` that equals
Psi on the inner interval (-1+delta, 1-delta) and continues outside with the
degree-6 Taylor polynomials of Psi about the two gluing points. Iterates that
stay delta-away from +-1 never see the difference.

Density and viscosity are affine in the order parameter on [-1, 1],

    rho(r) = varrho1 * r + varrho2,      varrho1 = (rho1 - rho2)/2,
                                         varrho2 = (rho1 + rho2)/2,

and are extended outside [-1, 1] by a C^2 monotone saturation that reaches
constant clamp values at |r| = 1 + w. The clamps keep the coefficient fields
positive and bounded no matter what the phase iterate does, which the
momentum solver relies on.

Everything in this module is a pure function of immutable inputs and accepts
numpy arrays wherever the formulas are pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = [
    "Params",
    "RegularizedPotential",
    "flory_huggins",
    "build_regularized_potential",
    "extend_density",
    "extend_viscosity",
]

#: transition width of the coefficient saturation (distance beyond |r|=1 at
#: which the clamp value is reached exactly)
DEFAULT_EXTENSION_WIDTH = 0.25


@dataclass(frozen=True)
class Params:
    """All model constants.

    Parameters
    ----------
    rho1, rho2
        Mass densities of fluid 1 and fluid 2; ``rho1 > rho2 > 0`` required
        (fluid 1 is the heavy one).
    nu1, nu2
        Viscosities of the two fluids, both positive.
    g
        Gravitational acceleration (acts along minus the vertical axis).
    theta, theta0
        Flory-Huggins temperatures, ``0 < theta < theta0``.
    delta
        Regularization half-gap in (0, 1): the potential is exact on
        ``(-1+delta, 1-delta)``.
    rho_lo, rho_hi, nu_lo, nu_hi
        Saturation clamps of the extended coefficient laws. Default to
        0.9*min and 1.1*max of the respective pair.
    extension_width
        Width ``w`` of the saturation blend, clamp reached at ``|r| = 1+w``.

    Mobility, surface-tension and interface-width coefficients are fixed to 1
    (the normalized form of the model); they are stored so the normalization
    is visible at call sites.
    """

    rho1: float
    rho2: float
    nu1: float
    nu2: float
    g: float
    theta: float
    theta0: float
    delta: float
    rho_lo: float | None = None
    rho_hi: float | None = None
    nu_lo: float | None = None
    nu_hi: float | None = None
    extension_width: float = DEFAULT_EXTENSION_WIDTH
    mobility: float = field(default=1.0)
    sigma: float = field(default=1.0)
    ell: float = field(default=1.0)

    def __post_init__(self) -> None:
        if not (self.rho1 > self.rho2 > 0.0):
            raise ValueError("densities must satisfy rho1 > rho2 > 0")
        if min(self.nu1, self.nu2) <= 0.0:
            raise ValueError("viscosities must be positive")
        if not (0.0 < self.theta < self.theta0):
            raise ValueError("temperatures must satisfy 0 < theta < theta0")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if (self.mobility, self.sigma, self.ell) != (1.0, 1.0, 1.0):
            raise ValueError("mobility, sigma and ell are fixed to 1")
        if self.extension_width <= 0.0:
            raise ValueError("extension_width must be positive")
        # fill default clamps (frozen dataclass: go through __setattr__)
        if self.rho_lo is None:
            object.__setattr__(self, "rho_lo", 0.9 * min(self.rho1, self.rho2))
        if self.rho_hi is None:
            object.__setattr__(self, "rho_hi", 1.1 * max(self.rho1, self.rho2))
        if self.nu_lo is None:
            object.__setattr__(self, "nu_lo", 0.9 * min(self.nu1, self.nu2))
        if self.nu_hi is None:
            object.__setattr__(self, "nu_hi", 1.1 * max(self.nu1, self.nu2))
        if not (0.0 < self.rho_lo <= min(self.rho1, self.rho2)):
            raise ValueError("rho_lo must satisfy 0 < rho_lo <= min(rho1, rho2)")
        if self.rho_hi < max(self.rho1, self.rho2):
            raise ValueError("rho_hi must dominate max(rho1, rho2)")
        if not (0.0 < self.nu_lo <= min(self.nu1, self.nu2)):
            raise ValueError("nu_lo must satisfy 0 < nu_lo <= min(nu1, nu2)")
        if self.nu_hi < max(self.nu1, self.nu2):
            raise ValueError("nu_hi must dominate max(nu1, nu2)")

    @property
    def varrho1(self) -> float:
        """Half density contrast, the slope of the affine density law."""
        return 0.5 * (self.rho1 - self.rho2)

    @property
    def varrho2(self) -> float:
        """Mean density, the offset of the affine density law."""
        return 0.5 * (self.rho1 + self.rho2)

    @property
    def nu_slope(self) -> float:
        return 0.5 * (self.nu1 - self.nu2)

    @property
    def nu_mean(self) -> float:
        return 0.5 * (self.nu1 + self.nu2)

    def with_delta(self, delta: float) -> "Params":
        """Copy of the parameter set with a different regularization gap."""
        return Params(
            rho1=self.rho1, rho2=self.rho2, nu1=self.nu1, nu2=self.nu2,
            g=self.g, theta=self.theta, theta0=self.theta0, delta=delta,
            rho_lo=self.rho_lo, rho_hi=self.rho_hi,
            nu_lo=self.nu_lo, nu_hi=self.nu_hi,
            extension_width=self.extension_width,
        )


def flory_huggins(r, k: int, theta: float, theta0: float):
    """k-th derivative of the logarithmic double-well potential.

    Evaluates the closed-form derivative formulas; nothing is differenced
    numerically. Accepts scalars or numpy arrays for ``r``.

    Orders:
        k=0   (theta/2)[(1+r)ln(1+r) + (1-r)ln(1-r)] - (theta0/2) r^2
        k=1   (theta/2)[ln(1+r) - ln(1-r)] - theta0 r
        k=2   (theta/2)[1/(1+r) + 1/(1-r)] - theta0
        k>=3  (theta/2)(k-2)! [(-1)^k (1+r)^(1-k) + (1-r)^(1-k)]

    Raises
    ------
    ValueError
        if any sample has |r| >= 1 (the potential is singular there) or if
        the derivative order is outside 0..6.
    """
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= 1.0):
        raise ValueError("flory_huggins requires |r| < 1")
    if not 0 <= k <= 6:
        raise ValueError(f"unsupported derivative order {k} (0..6)")
    if k == 0:
        out = 0.5 * theta * ((1.0 + r) * np.log1p(r) + (1.0 - r) * np.log1p(-r)) \
            - 0.5 * theta0 * r * r
    elif k == 1:
        out = 0.5 * theta * (np.log1p(r) - np.log1p(-r)) - theta0 * r
    elif k == 2:
        out = 0.5 * theta * (1.0 / (1.0 + r) + 1.0 / (1.0 - r)) - theta0
    else:
        sign = -1.0 if k % 2 else 1.0
        fac = 0.5 * theta * math.factorial(k - 2)
        out = fac * (sign * (1.0 + r) ** (1 - k) + (1.0 - r) ** (1 - k))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RegularizedPotential:
    """C^6 regularization of the double well.

    On the inner interval ``(-1+delta, 1-delta)`` the exact potential is
    used (same code path, so values there are bitwise identical to
    :func:`flory_huggins`). Outside, the degree-6 Taylor polynomials about
    the gluing points continue the potential smoothly to all of R; by
    construction all derivatives up to order 6 match one-sidedly at the
    gluing points.

    ``left_coeffs``/``right_coeffs`` hold the polynomial coefficients in
    ascending powers of ``(r - anchor)`` with anchors ``-1+delta`` and
    ``1-delta``.
    """

    theta: float
    theta0: float
    delta: float
    left_coeffs: np.ndarray
    right_coeffs: np.ndarray

    def evaluate(self, r, k: int = 0):
        """Evaluate the k-th derivative (k = 0..6) at scalar or array ``r``."""
        if not 0 <= k <= 6:
            raise ValueError(f"unsupported derivative order {k} (0..6)")
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        edge = 1.0 - self.delta
        out = np.empty_like(r)
        inner = np.abs(r) <= edge
        if np.any(inner):
            out[inner] = flory_huggins(r[inner], k, self.theta, self.theta0)
        lo = r < -edge
        if np.any(lo):
            out[lo] = self._poly(self.left_coeffs, r[lo] + edge, k)
        hi = r > edge
        if np.any(hi):
            out[hi] = self._poly(self.right_coeffs, r[hi] - edge, k)
        return float(out[0]) if scalar else out

    @staticmethod
    def _poly(coeffs: np.ndarray, x: np.ndarray, k: int) -> np.ndarray:
        c = np.polynomial.polynomial.polyder(coeffs, k) if k else coeffs
        return np.polynomial.polynomial.polyval(x, c)


def build_regularized_potential(p: Params) -> RegularizedPotential:
    """Construct the C^6 regularized potential for the given parameters.

    The exterior branches are the degree-6 Taylor expansions of the exact
    potential about ``r = -(1-delta)`` and ``r = +(1-delta)``:

        Psi(anchor) + sum_{i=1..6} Psi^(i)(anchor)/i! * (r - anchor)^i
    """
    edge = 1.0 - p.delta
    right = np.array([
        flory_huggins(edge, i, p.theta, p.theta0) / math.factorial(i)
        for i in range(7)
    ])
    left = np.array([
        flory_huggins(-edge, i, p.theta, p.theta0) / math.factorial(i)
        for i in range(7)
    ])
    return RegularizedPotential(
        theta=p.theta, theta0=p.theta0, delta=p.delta,
        left_coeffs=left, right_coeffs=right,
    )


# ---------------------------------------------------------------------------
# coefficient extensions
# ---------------------------------------------------------------------------

def _sat_poly(sigma: float) -> np.ndarray:
    """Quintic p with p(0)=0, p(1)=1, p'(0)=sigma, p'(1)=0, p''(0)=p''(1)=0.

    This is the smoothstep-style blend used beyond |r| = 1: the affine
    coefficient law enters with normalized slope ``sigma`` and levels off to
    the clamp with vanishing first and second derivative. Ascending
    coefficient order.
    """
    return np.array([
        0.0, sigma, 0.0,
        10.0 - 6.0 * sigma,
        8.0 * sigma - 15.0,
        6.0 - 3.0 * sigma,
    ])


def _check_monotone(coeffs: np.ndarray) -> None:
    d = np.polynomial.polynomial.polyder(coeffs)
    t = np.linspace(0.0, 1.0, 513)
    if np.polynomial.polynomial.polyval(t, d).min() < -1e-12:
        raise ValueError(
            "coefficient saturation is not monotone for these clamps; "
            "widen the clamp gap or shrink extension_width"
        )


def _affine_saturated(r, k: int, slope: float, offset: float,
                      lo: float, hi: float, w: float):
    """k-th derivative (k=0..2) of the saturated affine law.

    Equals ``slope*r + offset`` on [-1, 1]; beyond, blends C^2-smoothly into
    the clamp value the affine law runs toward on that side (``hi`` where it
    increases, ``lo`` where it decreases), reached exactly at |r| = 1 + w.
    """
    if not 0 <= k <= 2:
        raise ValueError(f"unsupported derivative order {k} (0..2)")
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)

    if slope == 0.0:
        # matched coefficients: the law is a constant, already clamped
        if k == 0:
            out = np.full_like(r, offset)
        else:
            out = np.zeros_like(r)
        return float(out[0]) if scalar else out

    out = np.empty_like(r)
    core = np.abs(r) <= 1.0
    if k == 0:
        out[core] = slope * r[core] + offset
    elif k == 1:
        out[core] = slope
    else:
        out[core] = 0.0

    for side in (+1.0, -1.0):
        mask = (r * side) > 1.0
        if not np.any(mask):
            continue
        f_edge = slope * side + offset           # value at r = side*1
        target = (hi if slope * side > 0 else lo)
        gap = (target - f_edge) / (slope * side)  # in r units, positive
        if gap <= 0.0:
            raise ValueError("clamp does not dominate the affine edge value")
        coeffs = _sat_poly(w / gap)
        _check_monotone(coeffs)
        d = (r[mask] * side - 1.0) / w            # normalized deviation
        t = np.minimum(d, 1.0)
        ck = np.polynomial.polynomial.polyder(coeffs, k) if k else coeffs
        val = np.polynomial.polynomial.polyval(t, ck)
        if k == 0:
            out[mask] = f_edge + slope * side * gap * val
        else:
            # chain rule: d/dr = (1/w) d/dt per order, side sign per order
            out[mask] = slope * (side ** (k + 1)) * (gap / w ** k) * val
            out[mask] = np.where(d > 1.0, 0.0, out[mask])
    return float(out[0]) if scalar else out


def extend_density(r, k: int, p: Params):
    """k-th derivative (k = 0..2) of the extended density law rho-hat.

    Affine ``varrho1*r + varrho2`` on [-1, 1]; C^2 monotone saturation to
    ``rho_hi`` above and ``rho_lo`` below, clamps reached at |r| = 1 + w.
    Values stay inside [rho_lo, rho_hi] for every real ``r``.
    """
    return _affine_saturated(r, k, p.varrho1, p.varrho2,
                             p.rho_lo, p.rho_hi, p.extension_width)


def extend_viscosity(r, k: int, p: Params):
    """Same construction as :func:`extend_density` for the viscosity law."""
    return _affine_saturated(r, k, p.nu_slope, p.nu_mean,
                             p.nu_lo, p.nu_hi, p.extension_width)

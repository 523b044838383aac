"""Gamma, beta, and Mittag-Leffler functions.

The two-parameter Mittag-Leffler function

    E_{a,b}(z) = sum_{k>=0} z^k / Gamma(a k + b),    a > 0, b > 0,

generalizes the exponential (``E_{1,1} = exp``) and gives the natural
growth envelope of fractional-order dynamics. Evaluation here is
series-only with compensated (Kahan) summation: every use in this
package has a moderate real argument on a bounded horizon, so
asymptotic or contour representations are deliberately out of scope.
The admissible argument range shrinks for small ``a`` because the early
terms of the series grow before the gamma denominators take over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SeriesConvergenceError

#: Largest argument accepted by :func:`gamma` before float64 overflow.
GAMMA_OVERFLOW_LIMIT = 170.0

#: Consecutive below-tolerance terms required before the series stops.
#: Guards against the non-monotone early terms at small ``alpha``.
_STOP_RUN = 3


def gamma(x: float) -> float:
    """Gamma function on the positive half line.

    Restricted to ``0 < x <= 170``: nothing in this package needs the
    reflection formula, and beyond 170 the value overflows float64.
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma requires x > 0, got {x!r}")
    if x > GAMMA_OVERFLOW_LIMIT:
        raise OverflowError(f"gamma({x}) exceeds float64 range (x > {GAMMA_OVERFLOW_LIMIT})")
    return math.gamma(x)


def beta_fn(a: float, b: float) -> float:
    """Euler beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    a, b = float(a), float(b)
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"beta_fn requires a, b > 0, got a={a!r}, b={b!r}")
    # lgamma form dodges intermediate overflow; the result is always positive.
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


@dataclass(frozen=True)
class MlfParams:
    """Parameters of a Mittag-Leffler evaluation E_{alpha,beta}.

    ``alpha`` and ``beta`` are the Mittag-Leffler parameters proper,
    distinct from the derivative orders elsewhere in the package.
    ``series_tol`` is the absolute per-term truncation tolerance and
    ``max_terms`` caps the series length.
    """

    alpha: float
    beta: float = 1.0
    series_tol: float = 1e-12
    # Sized for the slowest admissible case (alpha near 0.3 with the value
    # close to float64 overflow needs ~6400 terms).
    max_terms: int = 8000

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError(f"MlfParams requires alpha, beta > 0, got {self}")
        if not self.series_tol > 0.0:
            raise ValueError(f"MlfParams requires series_tol > 0, got {self.series_tol!r}")
        if self.max_terms < 1:
            raise ValueError(f"MlfParams requires max_terms >= 1, got {self.max_terms!r}")


def series_radius(alpha: float) -> float:
    """Largest |z| the plain series handles reliably for this alpha."""
    return 30.0 if alpha >= 0.3 else 10.0


def mittag_leffler(params: MlfParams, z: float) -> float:
    """Evaluate E_{alpha,beta}(z) by truncated power series.

    Terms are formed in log space, ``exp(k log|z| - lgamma(alpha k + beta))``,
    so intermediate factors never overflow unless the value itself does.
    Summation is compensated; the series stops once three consecutive
    terms fall below ``params.series_tol`` in magnitude.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"mittag_leffler requires finite z, got {z!r}")
    zmax = series_radius(params.alpha)
    if abs(z) > zmax:
        raise ValueError(
            f"|z|={abs(z)} outside the supported series range |z| <= {zmax} "
            f"for alpha={params.alpha}"
        )
    if z == 0.0:
        return 1.0 / gamma(params.beta)

    log_abs_z = math.log(abs(z))
    negative = z < 0.0
    total = 0.0
    comp = 0.0  # Kahan compensation
    small_run = 0
    for k in range(params.max_terms):
        magnitude = math.exp(k * log_abs_z - math.lgamma(params.alpha * k + params.beta))
        term = -magnitude if (negative and k % 2 == 1) else magnitude
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if not math.isfinite(total):
            raise OverflowError(
                f"E_{{{params.alpha},{params.beta}}}({z}) overflows float64"
            )
        if magnitude < params.series_tol:
            small_run += 1
            if small_run >= _STOP_RUN:
                return total
        else:
            small_run = 0
    raise SeriesConvergenceError(
        f"Mittag-Leffler series did not satisfy the stopping rule within "
        f"{params.max_terms} terms (alpha={params.alpha}, beta={params.beta}, z={z})"
    )


def mittag_leffler_values(params: MlfParams, z: np.ndarray) -> np.ndarray:
    """Elementwise :func:`mittag_leffler` over an array of arguments."""
    flat = np.asarray(z, dtype=float).ravel()
    out = np.array([mittag_leffler(params, zi) for zi in flat])
    return out.reshape(np.shape(z))

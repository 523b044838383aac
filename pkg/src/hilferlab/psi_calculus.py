"""psi-transform geometry, grids, fractional operators, and norms.

Every operator here works in the transformed variable ``x = psi(t) - psi(0)``.
The substitution ``x = psi(s)`` absorbs the ``psi'(s)`` factor of the
psi-fractional kernel, so the left-sided integral of order ``a``,

    (1/Gamma(a)) * int_0^t psi'(s) (psi(t) - psi(s))^(a-1) w(s) ds,

becomes a classical power-kernel convolution in x. Grid samples are
integrated by product trapezoid: the integrand is interpolated piecewise
linearly in x and each panel is integrated against ``(X - x)^(a-1)`` in
closed form, which keeps full accuracy through the kernel singularity
at ``x = X``.

Solutions of the fractional problems treated here typically blow up like
``x^(gamma-1)`` at the origin, so trajectories store *weighted* values
``w(t) = x(t)^(1-gamma) u(t)`` at interior nodes and the finite limit of
``w`` at ``t -> 0+`` separately. An optional ``origin_exponent`` hint
lets the quadrature integrate such data by modelling the integrand as
``x^(rho-1)`` times a piecewise-linear factor on the panels nearest the
origin.

Everything here is a pure function of immutable inputs: no shared
mutable state, deterministic results, safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import beta as _scipy_beta
from scipy.special import betainc as _betainc

from .errors import DelayRangeError, GridError
from .special_functions import gamma as _gamma

if TYPE_CHECKING:  # pragma: no cover
    from .problem_model import FractionalOrder

#: Relative tolerance for detecting uniform spacing in x.
_UNIFORM_RTOL = 1e-12

#: Rows per block in the general (non-uniform) quadrature path.
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class PsiFunction:
    """An increasing C^1 transform psi with its derivative.

    ``fn`` and ``deriv`` must accept scalars or numpy arrays. ``inverse``
    (of psi itself, not of the shifted variable) is optional; grid
    construction falls back to bracketed root finding without it.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def shifted(self, t):
        """psi(t) - psi(0), the working variable of every operator."""
        return self.fn(t) - self.fn(0.0)

    def invert_shifted(self, x, bracket: tuple[float, float]):
        """Solve psi(t) - psi(0) = x for t, elementwise."""
        x = np.asarray(x, dtype=float)
        if self.inverse is not None:
            return np.asarray(self.inverse(x + self.fn(0.0)), dtype=float)
        psi0 = float(self.fn(0.0))
        lo, hi = bracket

        def solve_one(xi: float) -> float:
            return brentq(lambda t: float(self.fn(t)) - psi0 - xi, lo, hi, xtol=1e-14)

        return np.array([solve_one(xi) for xi in np.atleast_1d(x)]).reshape(x.shape)

    def deriv_bounds(self, a: float, b: float, n: int = 2049) -> tuple[float, float]:
        """(min, max) of psi' sampled on [a, b]; feeds the zeta estimates."""
        d = np.asarray(self.deriv(np.linspace(a, b, n)), dtype=float)
        if not np.all(np.isfinite(d)) or not np.all(d > 0.0):
            raise ValueError(f"psi'{self.label and ' (' + self.label + ')'} must be finite "
                             f"and positive on [{a}, {b}]")
        return float(d.min()), float(d.max())


@dataclass(frozen=True)
class Grid:
    """Solution grid on [0, b] plus a history grid covering [-r, 0].

    ``nodes`` must start at exactly 0 and increase strictly;
    ``history_nodes`` must increase strictly and end at exactly 0.
    """

    nodes: np.ndarray
    history_nodes: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        hist = np.asarray(self.history_nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "history_nodes", hist)
        if nodes.ndim != 1 or nodes.size < 3:
            raise GridError("grid needs at least 2 intervals (3 nodes)")
        if nodes[0] != 0.0:
            raise GridError(f"grid must start at t=0, got {nodes[0]!r}")
        if not np.all(np.diff(nodes) > 0.0):
            raise GridError("grid nodes must be strictly increasing")
        if hist.ndim != 1 or hist.size < 2:
            raise GridError("history grid needs at least 2 nodes")
        if hist[-1] != 0.0:
            raise GridError(f"history grid must end at t=0, got {hist[-1]!r}")
        if not np.all(np.diff(hist) > 0.0):
            raise GridError("history nodes must be strictly increasing")

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1

    @property
    def horizon(self) -> float:
        return float(self.nodes[-1])

    @property
    def history_depth(self) -> float:
        return float(-self.history_nodes[0])


def make_grid(
    psi: PsiFunction,
    b: float,
    n: int,
    r: float,
    history_size: int = 128,
    uniform_in: str = "psi",
) -> Grid:
    """Build the default grid: uniform in x = psi(t)-psi(0), or in t.

    Uniform-in-psi spacing is the default because it makes the product
    quadrature translation invariant (a fast convolution) and clusters
    nodes where psi grows slowly.
    """
    if uniform_in not in ("psi", "t"):
        raise GridError(f"uniform_in must be 'psi' or 't', got {uniform_in!r}")
    if uniform_in == "t":
        nodes = np.linspace(0.0, b, n + 1)
    else:
        x = np.linspace(0.0, float(psi.shifted(b)), n + 1)
        nodes = np.asarray(psi.invert_shifted(x, bracket=(0.0, b)), dtype=float)
        nodes[0], nodes[-1] = 0.0, b  # pin endpoints against inversion roundoff
    hist = np.linspace(-r, 0.0, history_size + 1)
    hist[-1] = 0.0
    return Grid(nodes=nodes, history_nodes=hist)


@dataclass
class Trajectory:
    """Grid-sampled solution in weighted representation.

    ``weighted_values[i]`` holds ``w(t_{i+1}) = x(t_{i+1})^(1-gamma) u(t_{i+1})``
    at the interior nodes ``t_1..t_N``; ``initial_weight`` is the finite
    ``t -> 0+`` limit of w (the raw u may blow up like ``x^(gamma-1)``).
    ``history_values`` samples u itself on the history nodes; its last
    entry need not match the t -> 0+ limit of u, since the problem class
    imposes a weighted initial condition rather than continuity at 0.
    """

    grid: Grid
    weighted_values: np.ndarray
    initial_weight: float
    history_values: np.ndarray
    gamma: float

    def __post_init__(self) -> None:
        self.weighted_values = np.asarray(self.weighted_values, dtype=float)
        self.history_values = np.asarray(self.history_values, dtype=float)
        if self.weighted_values.shape != (self.grid.n_intervals,):
            raise ValueError(
                f"weighted_values must have one entry per interior node "
                f"({self.grid.n_intervals}), got shape {self.weighted_values.shape}"
            )
        if self.history_values.shape != self.grid.history_nodes.shape:
            raise ValueError("history_values must match history_nodes in length")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma!r}")
        if not np.isfinite(self.initial_weight):
            raise ValueError("initial_weight must be finite")
        if not np.all(np.isfinite(self.weighted_values)):
            raise ValueError("weighted_values must be finite")
        if not np.all(np.isfinite(self.history_values)):
            raise ValueError("history_values must be finite")


def trajectory_values(traj: Trajectory, psi: PsiFunction, t) -> np.ndarray:
    """Evaluate u(t) anywhere on [-r, b].

    For t <= 0 the stored history is interpolated linearly in t. For
    t > 0 the weighted values are interpolated linearly in x and then
    unweighted by ``x^(gamma-1)``; for gamma < 1 this correctly blows up
    as t -> 0+.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t_arr)
    lo = float(traj.grid.history_nodes[0])
    if np.any(t_arr < lo - 1e-12 * max(1.0, abs(lo))):
        raise DelayRangeError(
            f"time {t_arr.min()} below the covered history window [{lo}, 0]"
        )
    past = t_arr <= 0.0
    if np.any(past):
        out[past] = np.interp(t_arr[past], traj.grid.history_nodes, traj.history_values)
    future = ~past
    if np.any(future):
        x_nodes = np.concatenate(([0.0], np.asarray(psi.shifted(traj.grid.nodes[1:]), dtype=float)))
        w_nodes = np.concatenate(([traj.initial_weight], traj.weighted_values))
        xq = np.asarray(psi.shifted(t_arr[future]), dtype=float)
        w = np.interp(xq, x_nodes, w_nodes)
        out[future] = w if traj.gamma == 1.0 else w * xq ** (traj.gamma - 1.0)
    return out if np.ndim(t) else out[0]


# ---------------------------------------------------------------------------
# product-trapezoid quadrature for the left-sided fractional integral
# ---------------------------------------------------------------------------

def _panel_moments(alpha: float, a: np.ndarray, b: np.ndarray):
    """Closed-form moments of one panel against the kernel.

    For A = X - x_j, B = X - x_{j+1}:
      M0 = int (X - x)^(alpha-1) dx          over [x_j, x_{j+1}]
      M1 = int (x - x_j)(X - x)^(alpha-1) dx
    """
    m0 = (a ** alpha - b ** alpha) / alpha
    m1 = a * m0 - (a ** (alpha + 1.0) - b ** (alpha + 1.0)) / (alpha + 1.0)
    return m0, m1


def _product_trapezoid_uniform(alpha: float, h: float, w: np.ndarray) -> np.ndarray:
    """Translation-invariant weights on a uniform x-grid, via convolution."""
    n = w.size - 1
    d = np.arange(0, n + 1, dtype=float)
    da = d ** alpha
    da1 = d ** (alpha + 1.0)
    p0 = np.empty(n + 1)
    p1 = np.empty(n + 1)
    p0[0] = p1[0] = 0.0
    p0[1:] = (da[1:] - da[:-1]) / alpha
    p1[1:] = d[1:] * p0[1:] - (da1[1:] - da1[:-1]) / (alpha + 1.0)
    # I_i = h^a [ sum_{j<i} w_j (P0-P1)(i-j)  +  sum_{1<=j<=i} w_j P1(i-j+1) ]
    left = np.convolve(w, np.concatenate(([0.0], p0[1:] - p1[1:])))[: n + 1]
    w_shift = w.copy()
    w_shift[0] = 0.0
    right = np.convolve(w_shift, p1[1:])[: n + 1]
    return h ** alpha * (left + right)


def _product_trapezoid_general(alpha: float, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Blockwise panel summation for non-uniform x-grids."""
    n = x.size - 1
    h = np.diff(x)
    slope = np.diff(w) / h
    out = np.zeros(n + 1)
    for lo in range(1, n + 1, _BLOCK_ROWS):
        hi = min(lo + _BLOCK_ROWS, n + 1)
        xi = x[lo:hi, None]
        a = xi - x[None, :-1]
        b = xi - x[None, 1:]
        live = b >= 0.0
        a = np.where(live, a, 1.0)
        b = np.where(live, b, 1.0)
        m0, m1 = _panel_moments(alpha, a, b)
        contrib = w[None, :-1] * m0 + slope[None, :] * m1
        out[lo:hi] = np.sum(np.where(live, contrib, 0.0), axis=1)
    return out


def _origin_correction(
    alpha: float, x: np.ndarray, w: np.ndarray, rho: float, k_panels: int
) -> np.ndarray:
    """Replace the first panels' linear interpolant by x^(rho-1) * linear.

    Exact for integrands of the form ``x^(rho-1) (c0 + c1 x)``, which is
    how weighted-space solutions behave near the origin. Returns the
    additive correction for nodes 1..N.
    """
    n = x.size - 1
    k = min(k_panels, n)
    h = np.diff(x)
    xi = x[1:]
    corr = np.zeros(n)
    # factor the modelled integrand as x^(rho-1) * v(x) with v piecewise linear
    v = np.empty(k + 1)
    v[1:] = w[1 : k + 1] * x[1 : k + 1] ** (1.0 - rho)
    v[0] = v[1]  # the sample at x=0 carries no usable information
    b0 = _scipy_beta(rho, alpha)
    b1 = _scipy_beta(rho + 1.0, alpha)
    for j in range(k):
        live = xi >= x[j + 1]
        xs = np.where(live, xi, 1.0)
        # subtract the plain linear-panel contribution
        a_ = xs - x[j]
        bb = xs - x[j + 1]
        m0, m1 = _panel_moments(alpha, a_, bb)
        linear = w[j] * m0 + (w[j + 1] - w[j]) / h[j] * m1
        # add the weighted-model contribution via regularized incomplete beta
        va = x[j] / xs
        vb = x[j + 1] / xs
        mm0 = xs ** (alpha + rho - 1.0) * b0 * (_betainc(rho, alpha, vb) - _betainc(rho, alpha, va))
        mm1 = xs ** (alpha + rho) * b1 * (
            _betainc(rho + 1.0, alpha, vb) - _betainc(rho + 1.0, alpha, va)
        )
        model = v[j] * mm0 + (v[j + 1] - v[j]) / h[j] * (mm1 - x[j] * mm0)
        corr += np.where(live, model - linear, 0.0)
    return corr


def frac_integral_grid(
    alpha: float,
    psi: PsiFunction,
    samples: np.ndarray,
    grid: Grid,
    origin_exponent: Optional[float] = None,
) -> np.ndarray:
    """Left-sided psi-fractional integral of grid data, at every node.

    Returns the product-integration approximation of I^{alpha;psi} of the
    sampled function at all grid nodes; the value at t=0 is exactly 0.
    The scheme is exact whenever the integrand is piecewise linear in
    x = psi(t) - psi(0).

    ``origin_exponent=rho`` declares that the integrand behaves like
    ``x^(rho-1)`` times a smooth factor near the origin (``rho`` in
    (0, 1] U (1, 2)); the panels nearest 0 then integrate that model
    exactly and the sample at t=0 is ignored. Without the hint, the
    node-0 sample participates in the first panel like any other.
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"frac_integral_grid requires alpha in (0, 1], got {alpha!r}")
    w = np.asarray(samples, dtype=float)
    if w.shape != grid.nodes.shape:
        raise GridError(
            f"samples shape {w.shape} does not match grid shape {grid.nodes.shape}"
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("samples must be finite at every grid node")
    if origin_exponent is not None and not (0.0 < origin_exponent < 2.0):
        raise ValueError(f"origin_exponent must lie in (0, 2), got {origin_exponent!r}")

    x = np.asarray(psi.shifted(grid.nodes), dtype=float)
    if not np.all(np.diff(x) > 0.0):
        raise GridError("psi must be strictly increasing across the grid nodes")

    h = np.diff(x)
    if np.allclose(h, h[0], rtol=_UNIFORM_RTOL, atol=0.0):
        out = _product_trapezoid_uniform(alpha, float(h.mean()), w)
    else:
        out = _product_trapezoid_general(alpha, x, w)

    if origin_exponent is not None and origin_exponent != 1.0:
        k_panels = max(8, (x.size - 1) // 50)
        out[1:] += _origin_correction(alpha, x, w, float(origin_exponent), k_panels)

    out[0] = 0.0
    return out / _gamma(alpha)


def power_rule_reference(alpha: float, sigma: float, psi: PsiFunction, t) -> np.ndarray:
    """Closed form of the fractional integral of ``(psi(s)-psi(0))^(sigma-1)``.

    I^{alpha;psi} maps that power to
    ``Gamma(sigma)/Gamma(alpha+sigma) * (psi(t)-psi(0))^(alpha+sigma-1)``;
    this is the quadrature oracle used throughout the tests.
    """
    if not alpha > 0.0:
        raise ValueError(f"power_rule_reference requires alpha > 0, got {alpha!r}")
    if not sigma > 0.0:
        raise ValueError(f"power_rule_reference requires sigma > 0, got {sigma!r}")
    x = np.asarray(psi.shifted(t), dtype=float)
    return _gamma(sigma) / _gamma(alpha + sigma) * x ** (alpha + sigma - 1.0)


def hilfer_derivative_grid(
    order: "FractionalOrder",
    psi: PsiFunction,
    samples: np.ndarray,
    grid: Grid,
    origin_exponent: Optional[float] = None,
) -> np.ndarray:
    """psi-Hilfer derivative of grid data by its three-stage composition.

    The derivative of order ``alpha`` and type ``beta`` is evaluated as

        I^{beta(1-alpha); psi}  o  (1/psi') d/dt  o  I^{(1-beta)(1-alpha); psi}

    with either fractional integral skipped when its order is zero. The
    middle stage uses 3-point centred differences in t (2nd-order
    one-sided at the ends) and is the dominant error source; callers must
    supply data whose inner integral is differentiable on the grid.

    ``origin_exponent=rho`` declares the data behaves like ``x^(rho-1)``
    near the origin. Besides steering the inner quadrature, the hint lets
    the middle stage differentiate the smooth cofactor of ``x^mu`` (with
    ``mu = rho - 1 + (1-beta)(1-alpha)``) instead of the raw inner
    integral, which keeps the stencils away from the origin singularity;
    the node-0 output remains the plain one-sided estimate and is not
    reliable for singular data.
    """
    inner_order = (1.0 - order.beta) * (1.0 - order.alpha)
    outer_order = order.beta * (1.0 - order.alpha)

    if inner_order > 0.0:
        stage = frac_integral_grid(inner_order, psi, samples, grid, origin_exponent)
    else:
        stage = np.asarray(samples, dtype=float).copy()

    psi_prime = np.asarray(psi.deriv(grid.nodes), dtype=float)
    deriv = np.gradient(stage, grid.nodes, edge_order=2) / psi_prime

    hint_out: Optional[float] = None
    if origin_exponent is not None:
        mu = origin_exponent - 1.0 + inner_order
        x = np.asarray(psi.shifted(grid.nodes), dtype=float)
        # factor stage = x^mu * v; the quadrature's artificial 0 at node 0
        # never enters because v there is extrapolated
        v = stage.copy() if mu == 0.0 else stage * np.where(x > 0.0, x, 1.0) ** (-mu)
        v[0] = 2.0 * v[1] - v[2]
        dv = np.gradient(v, grid.nodes, edge_order=2) / psi_prime
        if mu == 0.0:
            deriv[1:] = dv[1:]
            deriv[0] = dv[0]
        else:
            deriv[1:] = x[1:] ** (mu - 1.0) * (mu * v[1:] + x[1:] * dv[1:])
        if 0.0 < mu < 2.0:
            hint_out = mu

    if outer_order > 0.0:
        return frac_integral_grid(outer_order, psi, deriv, grid, hint_out)
    return deriv


def weighted_norm(gamma: float, psi: PsiFunction, traj: Trajectory) -> float:
    """Max of |w| over the interior nodes and the t -> 0+ weighted limit."""
    if traj.gamma != gamma:
        raise ValueError(
            f"trajectory carries gamma={traj.gamma!r}, norm requested gamma={gamma!r}"
        )
    if traj.weighted_values.size == 0:
        return abs(traj.initial_weight)
    return max(abs(traj.initial_weight), float(np.max(np.abs(traj.weighted_values))))


def bielecki_norm(gamma: float, delta: float, psi: PsiFunction, traj: Trajectory) -> float:
    """Weighted sup-norm with exponential damping exp(-delta (psi(t)-psi(0)))."""
    if delta < 0.0:
        raise ValueError(f"bielecki_norm requires delta >= 0, got {delta!r}")
    if traj.gamma != gamma:
        raise ValueError(
            f"trajectory carries gamma={traj.gamma!r}, norm requested gamma={gamma!r}"
        )
    x = np.asarray(psi.shifted(traj.grid.nodes[1:]), dtype=float)
    damped = np.exp(-delta * x) * np.abs(traj.weighted_values)
    if damped.size == 0:
        return abs(traj.initial_weight)
    return max(abs(traj.initial_weight), float(np.max(damped)))

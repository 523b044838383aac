"""Shared fixtures and independent oracles for the test suite.

The oracle helpers here deliberately avoid the package's own evaluation
paths: series are summed with math.lgamma, integrals use scipy
quadrature, so expected values are computed independently of the code
under test.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from hilferlab import DelayFFIDE, FractionalOrder, catalog


def ml_series(alpha: float, beta: float, z: float, tol: float = 1e-16) -> float:
    """Brute-force Mittag-Leffler series, independent of the package path."""
    total = 0.0
    small = 0
    for k in range(2000):
        if z == 0.0:
            term = 1.0 / math.gamma(beta) if k == 0 else 0.0
        else:
            mag = math.exp(k * math.log(abs(z)) - math.lgamma(alpha * k + beta))
            term = -mag if (z < 0.0 and k % 2 == 1) else mag
        total += term
        small = small + 1 if abs(term) < tol else 0
        if small >= 4:
            return total
    raise RuntimeError("oracle series did not converge")


def sup_rel(got: np.ndarray, ref: np.ndarray) -> float:
    """Relative sup-norm error of grid data: max|got-ref| / max|ref|."""
    scale = float(np.max(np.abs(ref)))
    if scale == 0.0:
        return float(np.max(np.abs(got)))
    return float(np.max(np.abs(np.asarray(got) - np.asarray(ref))) / scale)


def make_worked_problem() -> DelayFFIDE:
    """The linear delay problem with L_f=0.05, L_h=0.1, Theta ~ 0.1204."""
    return DelayFFIDE(
        order=FractionalOrder(alpha=0.5, beta=1.0),
        psi=catalog.make_psi("identity"),
        f=catalog.make_f("linear", c1=0.05, c2=0.05, c3=0.05),
        h_kernel=catalog.make_h("linear", d1=0.1, d2=0.1),
        g=catalog.make_g("constant_lag", lag=0.5),
        phi=catalog.make_phi("cosine", amplitude=1.0, frequency=1.0),
        u0=1.0,
        b=1.0,
        r=0.5,
        lip_f=0.05,
        lip_h=0.1,
    )


def make_linear_problem(beta: float, lam: float = 0.2) -> DelayFFIDE:
    """f = lam*u1, no kernel, psi = t: closed form t^(g-1) E_{a,g}(lam t^a)."""
    return DelayFFIDE(
        order=FractionalOrder(alpha=0.5, beta=beta),
        psi=catalog.make_psi("identity"),
        f=catalog.make_f("linear", c1=lam),
        h_kernel=catalog.make_h("none"),
        g=catalog.make_g("no_delay"),
        phi=catalog.make_phi("constant", value=1.0),
        u0=1.0,
        b=1.0,
        r=0.5,
        lip_f=lam,
        lip_h=0.0,
    )


def power_samples(psi, grid, sigma: float) -> np.ndarray:
    """Samples of (psi(s)-psi(0))^(sigma-1) with a finite stand-in at t=0."""
    x = np.asarray(psi.shifted(grid.nodes), dtype=float)
    out = np.zeros_like(x)
    out[1:] = x[1:] ** (sigma - 1.0)
    out[0] = 1.0 if sigma == 1.0 else 0.0
    return out


def power_hint(sigma: float):
    """Origin hint for power data: exact exponent where the model applies."""
    return sigma if (sigma != 1.0 and sigma < 2.0) else None


@pytest.fixture
def worked_problem() -> DelayFFIDE:
    return make_worked_problem()


@pytest.fixture
def identity_psi():
    return catalog.make_psi("identity")


#: psi transforms exercised by the operator oracle tests.
ORACLE_PSIS = {
    "identity": catalog.make_psi("identity"),
    "exponential": catalog.make_psi("exponential"),
    "shifted_power_2": catalog.make_psi("shifted_power", rho=2.0),
}

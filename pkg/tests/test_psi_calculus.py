import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilferlab import (
    DelayRangeError,
    FractionalOrder,
    Grid,
    GridError,
    PsiFunction,
    Trajectory,
    bielecki_norm,
    catalog,
    frac_integral_grid,
    hilfer_derivative_grid,
    make_grid,
    power_rule_reference,
    trajectory_values,
    weighted_norm,
)

from conftest import ORACLE_PSIS, power_hint, power_samples, sup_rel

#: psi(t) = t^2 + t, increasing on [0, b] with analytic inverse.
QUADRATIC_PSI = PsiFunction(
    fn=lambda t: np.asarray(t, dtype=float) ** 2 + np.asarray(t, dtype=float),
    deriv=lambda t: 2.0 * np.asarray(t, dtype=float) + 1.0,
    label="t^2+t",
    inverse=lambda y: 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * np.asarray(y, dtype=float))),
)

INVARIANT_PSIS = {
    "identity": ORACLE_PSIS["identity"],
    "exponential": ORACLE_PSIS["exponential"],
    "quadratic": QUADRATIC_PSI,
}


class TestGrid:
    def test_construction(self, identity_psi):
        g = make_grid(identity_psi, 1.0, 10, 0.5)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0
        assert g.history_nodes[0] == -0.5 and g.history_nodes[-1] == 0.0
        assert g.n_intervals == 10

    def test_uniform_in_psi_spacing(self):
        psi = ORACLE_PSIS["exponential"]
        g = make_grid(psi, 1.0, 64, 0.5, uniform_in="psi")
        x = psi.shifted(g.nodes)
        assert np.allclose(np.diff(x), np.diff(x)[0], rtol=1e-9)
        g_t = make_grid(psi, 1.0, 64, 0.5, uniform_in="t")
        assert np.allclose(np.diff(g_t.nodes), np.diff(g_t.nodes)[0], rtol=1e-12)

    def test_uniform_in_psi_without_inverse(self):
        psi = PsiFunction(fn=np.exp, deriv=np.exp, label="exp-noinv")
        g = make_grid(psi, 1.0, 16, 0.5)
        x = psi.shifted(g.nodes)
        assert np.allclose(np.diff(x), np.diff(x)[0], rtol=1e-9)

    @pytest.mark.parametrize(
        "nodes,history",
        [
            ([0.0, 1.0], [-1.0, 0.0]),                 # too few nodes
            ([0.1, 0.5, 1.0], [-1.0, 0.0]),            # does not start at 0
            ([0.0, 0.5, 0.4], [-1.0, 0.0]),            # not increasing
            ([0.0, 0.5, 1.0], [-1.0, -0.1]),           # history not ending at 0
            ([0.0, 0.5, 1.0], [0.0]),                  # too short history
        ],
    )
    def test_invalid_grids(self, nodes, history):
        with pytest.raises(GridError):
            Grid(nodes=np.array(nodes), history_nodes=np.array(history))


class TestFracIntegral:
    def test_zero_function(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 50, 0.5)
        out = frac_integral_grid(0.5, identity_psi, np.zeros_like(grid.nodes), grid)
        assert np.all(out == 0.0)

    def test_constant_half_order(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 2000, 0.5)
        out = frac_integral_grid(0.5, identity_psi, np.ones_like(grid.nodes), grid)
        # I^{0.5}[1](1) = 1/Gamma(1.5) = 1.1283791670955126
        assert out[-1] == pytest.approx(1.1283791670955126, rel=1e-6)
        assert out[0] == 0.0

    def test_classical_integral(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 100, 0.5)
        out = frac_integral_grid(1.0, identity_psi, grid.nodes.copy(), grid)
        assert out[-1] == pytest.approx(0.5, rel=1e-13)

    def test_argument_validation(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 10, 0.5)
        with pytest.raises(ValueError):
            frac_integral_grid(0.0, identity_psi, np.ones_like(grid.nodes), grid)
        with pytest.raises(ValueError):
            frac_integral_grid(1.5, identity_psi, np.ones_like(grid.nodes), grid)
        with pytest.raises(GridError):
            frac_integral_grid(0.5, identity_psi, np.ones(3), grid)
        bad = np.ones_like(grid.nodes)
        bad[3] = np.inf
        with pytest.raises(ValueError):
            frac_integral_grid(0.5, identity_psi, bad, grid)

    @pytest.mark.parametrize("psi_name", sorted(INVARIANT_PSIS))
    @pytest.mark.parametrize("alpha,sigma", [(0.5, 0.875), (0.25, 1.25), (0.9, 1.625)])
    def test_power_rule_oracle(self, psi_name, alpha, sigma):
        psi = INVARIANT_PSIS[psi_name]
        errs = {}
        for n in (1000, 2000):
            grid = make_grid(psi, 1.0, n, 0.5)
            got = frac_integral_grid(alpha, psi, power_samples(psi, grid, sigma), grid,
                                     power_hint(sigma))
            ref = power_rule_reference(alpha, sigma, psi, grid.nodes)
            errs[n] = sup_rel(got[1:], ref[1:])
        assert errs[2000] <= 1e-3
        assert errs[2000] < errs[1000]

    @pytest.mark.parametrize("psi_name", sorted(INVARIANT_PSIS))
    def test_semigroup(self, psi_name):
        psi = INVARIANT_PSIS[psi_name]
        grid = make_grid(psi, 1.0, 2000, 0.5)
        for sigma in (0.875, 1.25, 2.0):
            samples = power_samples(psi, grid, sigma)
            inner = frac_integral_grid(0.4, psi, samples, grid, power_hint(sigma))
            got = frac_integral_grid(0.3, psi, inner, grid, power_hint(sigma + 0.4))
            ref = frac_integral_grid(0.7, psi, samples, grid, power_hint(sigma))
            assert np.max(np.abs(got - ref)) <= 5e-3 * np.max(np.abs(ref))

    def test_nonuniform_grid_path(self):
        # uniform-in-t nodes under a nonlinear psi exercise the general panel sum
        psi = ORACLE_PSIS["exponential"]
        grid = make_grid(psi, 1.0, 800, 0.5, uniform_in="t")
        got = frac_integral_grid(0.5, psi, power_samples(psi, grid, 1.5), grid)
        ref = power_rule_reference(0.5, 1.5, psi, grid.nodes)
        assert sup_rel(got[1:], ref[1:]) <= 2e-3


class TestPowerRuleReference:
    def test_values(self, identity_psi):
        assert power_rule_reference(0.5, 1.0, identity_psi, 1.0) == pytest.approx(
            1.1283791670955126, rel=1e-12
        )
        assert power_rule_reference(1.0, 1.0, identity_psi, 2.0) == pytest.approx(
            2.0, rel=1e-12
        )
        # Gamma(0.7)/Gamma(1.0) = 1.298055332647558
        assert power_rule_reference(0.3, 0.7, identity_psi, 1.0) == pytest.approx(
            1.298055332647558, rel=1e-12
        )

    def test_domain(self, identity_psi):
        with pytest.raises(ValueError):
            power_rule_reference(0.0, 1.0, identity_psi, 1.0)
        with pytest.raises(ValueError):
            power_rule_reference(0.5, -1.0, identity_psi, 1.0)


class TestHilferDerivative:
    def test_constant_caputo_path(self, identity_psi):
        order = FractionalOrder(alpha=0.5, beta=1.0)
        grid = make_grid(identity_psi, 1.0, 400, 0.5)
        out = hilfer_derivative_grid(order, identity_psi, np.full_like(grid.nodes, 3.7), grid)
        assert np.max(np.abs(out[1:])) <= 1e-8

    def test_zero_function(self, identity_psi):
        order = FractionalOrder(alpha=0.4, beta=0.3)
        grid = make_grid(identity_psi, 1.0, 100, 0.5)
        out = hilfer_derivative_grid(order, identity_psi, np.zeros_like(grid.nodes), grid)
        assert np.all(out == 0.0)

    @pytest.mark.parametrize("psi_name", ["identity", "exponential"])
    def test_power_rule_riemann_liouville_path(self, psi_name):
        # sigma=1.8, alpha=0.5, beta=0: derivative is
        # Gamma(1.8)/Gamma(1.3) x^0.3 = 1.037787389397271 x^0.3
        psi = INVARIANT_PSIS[psi_name]
        order = FractionalOrder(alpha=0.5, beta=0.0)
        grid = make_grid(psi, 1.0, 2000, 0.5)
        x = np.asarray(psi.shifted(grid.nodes), dtype=float)
        out = hilfer_derivative_grid(order, psi, x**0.8, grid, origin_exponent=1.8)
        ref = 1.037787389397271 * x**0.3
        assert sup_rel(out[1:], ref[1:]) <= 5e-2

    def test_annihilates_homogeneous_power(self, identity_psi):
        # the power x^(gamma-1) is in the kernel of the derivative
        order = FractionalOrder(alpha=0.5, beta=0.5)
        gamma = order.gamma
        grid = make_grid(identity_psi, 1.0, 1000, 0.5)
        x = np.asarray(identity_psi.shifted(grid.nodes), dtype=float)
        samples = np.zeros_like(x)
        samples[1:] = x[1:] ** (gamma - 1.0)
        out = hilfer_derivative_grid(order, identity_psi, samples, grid, origin_exponent=gamma)
        interior = out[5:]  # end stencils touch the modelled origin panels
        assert np.max(np.abs(interior)) <= 5e-2 * np.max(np.abs(samples[1:]))

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    def test_left_inverse_on_smooth_data(self, identity_psi, beta):
        order = FractionalOrder(alpha=0.6, beta=beta)
        grid = make_grid(identity_psi, 1.0, 2000, 0.5)
        x = np.asarray(identity_psi.shifted(grid.nodes), dtype=float)
        smooth = 1.0 + x + np.cos(2.0 * x)
        integral = frac_integral_grid(order.alpha, identity_psi, smooth, grid)
        recovered = hilfer_derivative_grid(
            order, identity_psi, integral, grid, origin_exponent=order.alpha + 1.0
        )
        # finite-difference limited; tolerance matches the documented 5e-2
        assert sup_rel(recovered[1:], smooth[1:]) <= 5e-2

    def test_inversion_with_initial_term(self, identity_psi):
        # I^alpha D^{alpha,beta} removes exactly the x^(gamma-1) component
        order = FractionalOrder(alpha=0.5, beta=0.5)
        gamma = order.gamma
        sigma = 1.9
        grid = make_grid(identity_psi, 1.0, 2000, 0.5)
        x = np.asarray(identity_psi.shifted(grid.nodes), dtype=float)
        samples = np.zeros_like(x)
        samples[1:] = 2.0 * x[1:] ** (gamma - 1.0) + x[1:] ** (sigma - 1.0)
        deriv = hilfer_derivative_grid(order, identity_psi, samples, grid, origin_exponent=gamma)
        got = frac_integral_grid(order.alpha, identity_psi, deriv, grid,
                                 origin_exponent=sigma - order.alpha)
        ref = np.zeros_like(x)
        ref[1:] = x[1:] ** (sigma - 1.0)
        assert sup_rel(got[1:], ref[1:]) <= 5e-2


def make_traj(identity_psi, weighted, gamma=1.0, hist=None):
    grid = make_grid(identity_psi, 1.0, len(weighted), 0.5, history_size=4)
    hist_vals = np.zeros_like(grid.history_nodes) if hist is None else hist
    return Trajectory(
        grid=grid,
        weighted_values=np.asarray(weighted, dtype=float),
        initial_weight=0.0,
        history_values=hist_vals,
        gamma=gamma,
    )


class TestNorms:
    def test_weighted_norm_examples(self, identity_psi):
        assert weighted_norm(1.0, identity_psi, make_traj(identity_psi, [0.0, 0.0, 0.0])) == 0.0
        traj = make_traj(identity_psi, [1.0, -2.0, 1.5])
        assert weighted_norm(1.0, identity_psi, traj) == 2.0

    def test_gamma_one_is_sup_norm_of_u(self, identity_psi):
        traj = make_traj(identity_psi, [0.3, -0.9, 0.7])
        vals = trajectory_values(traj, identity_psi, traj.grid.nodes[1:])
        assert weighted_norm(1.0, identity_psi, traj) == np.max(np.abs(vals))

    def test_gamma_mismatch(self, identity_psi):
        traj = make_traj(identity_psi, [1.0, 1.0, 1.0], gamma=0.75)
        with pytest.raises(ValueError):
            weighted_norm(1.0, identity_psi, traj)

    def test_bielecki_at_zero_delta(self, identity_psi):
        traj = make_traj(identity_psi, [1.0, -2.0, 1.5])
        assert bielecki_norm(1.0, 0.0, identity_psi, traj) == weighted_norm(
            1.0, identity_psi, traj
        )

    def test_bielecki_decreasing_envelope(self, identity_psi):
        traj = make_traj(identity_psi, [1.0, 1.0, 1.0])
        object.__setattr__(traj, "initial_weight", 1.0)
        assert bielecki_norm(1.0, 1.0, identity_psi, traj) == pytest.approx(1.0, abs=0.0)

    def test_bielecki_rejects_negative_delta(self, identity_psi):
        traj = make_traj(identity_psi, [1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            bielecki_norm(1.0, -0.5, identity_psi, traj)

    @given(
        scale_exp=st.integers(min_value=-8, max_value=8),
        sign=st.sampled_from([-1.0, 1.0]),
        values=st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=3,
            max_size=3,
        ),
        other=st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=3,
            max_size=3,
        ),
    )
    @settings(max_examples=60, deadline=None)
    def test_norm_axioms(self, scale_exp, sign, values, other):
        psi = catalog.make_psi("identity")
        c = sign * 2.0**scale_exp  # dyadic scalars make homogeneity exact
        a = make_traj(psi, values)
        ca = make_traj(psi, [c * v for v in values])
        assert weighted_norm(1.0, psi, ca) == abs(c) * weighted_norm(1.0, psi, a)
        b = make_traj(psi, other)
        ab = make_traj(psi, [v + w for v, w in zip(values, other)])
        assert weighted_norm(1.0, psi, ab) <= (
            weighted_norm(1.0, psi, a) + weighted_norm(1.0, psi, b)
        )


class TestTrajectoryEvaluation:
    def test_history_interpolation(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 4, 1.0, history_size=2)
        traj = Trajectory(
            grid=grid,
            weighted_values=np.ones(4),
            initial_weight=1.0,
            history_values=np.array([2.0, 1.0, 0.0]),
            gamma=1.0,
        )
        assert trajectory_values(traj, identity_psi, -1.0) == 2.0
        assert trajectory_values(traj, identity_psi, -0.25) == pytest.approx(0.5)
        assert trajectory_values(traj, identity_psi, 0.0) == 0.0

    def test_weighted_unweighting(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 4, 1.0, history_size=2)
        gamma = 0.5
        traj = Trajectory(
            grid=grid,
            weighted_values=np.full(4, 2.0),
            initial_weight=2.0,
            history_values=np.zeros(3),
            gamma=gamma,
        )
        t = 0.25
        assert trajectory_values(traj, identity_psi, t) == pytest.approx(
            2.0 * t ** (gamma - 1.0)
        )

    def test_below_history_window(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 4, 1.0, history_size=2)
        traj = Trajectory(
            grid=grid,
            weighted_values=np.ones(4),
            initial_weight=1.0,
            history_values=np.zeros(3),
            gamma=1.0,
        )
        with pytest.raises(DelayRangeError):
            trajectory_values(traj, identity_psi, -1.5)

    def test_non_finite_rejected(self, identity_psi):
        grid = make_grid(identity_psi, 1.0, 4, 1.0, history_size=2)
        with pytest.raises(ValueError):
            Trajectory(
                grid=grid,
                weighted_values=np.array([1.0, np.nan, 1.0, 1.0]),
                initial_weight=1.0,
                history_values=np.zeros(3),
                gamma=1.0,
            )

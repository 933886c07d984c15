import numpy as np
import pytest

from profinn import ConfigError, Tape
from profinn import jets as J
from profinn import network as net
from profinn.loss import LossWeights
from profinn.problems import burgers_oracle, burgers_oracle_slope
from profinn.problems.burgers import BurgersProblem, burgers_residual_jet

from fdcheck import grad_fd, rel_err, third_derivative_fd, vec_rel_err


def jet_from_values(tape, value, d1=None, d2=None):
    return J.Jet2(
        tape.constant(np.asarray(value, float)),
        None if d1 is None else (tape.constant(np.asarray(d1, float)),),
        None if d2 is None else (tape.constant(np.asarray(d2, float)),),
        1,
    )


class TestOracle:
    def test_zero_maps_to_zero(self):
        assert burgers_oracle(0.0) == 0.0

    def test_cubic_root_at_y_two(self):
        # y + U + U^3 = 0 at y=2 has the root U=-1
        assert burgers_oracle(2.0, 0.5, 1.0) == pytest.approx(-1.0, abs=1e-14)

    def test_far_field_cube_root(self):
        u = burgers_oracle(1e12, 0.5, 1.0)
        assert u == pytest.approx(-1e4, rel=1e-8)

    def test_oddness(self):
        ys = np.array([0.3, 1.0, 7.5, 1e3])
        assert np.allclose(burgers_oracle(-ys), -burgers_oracle(ys), rtol=1e-14)

    def test_residual_of_implicit_relation_scaled(self):
        ys = np.logspace(-6, 12, 1000)
        us = burgers_oracle(ys, 0.5, 1.0)
        resid = np.abs(ys + us + us ** 3)
        assert np.all(resid <= 1e-13 * np.maximum(1.0, ys))

    def test_c_is_one_by_series_expansion(self):
        # Expanding y + U + C U^3 = 0 gives U = -y + C y^3 + O(y^5), so the
        # cubic coefficient (and the oracle's U'''(0)/6) must equal C = 1.
        for y in (1e-3, 2e-3, 5e-3):
            u = burgers_oracle(y, 0.5, 1.0)
            assert (u + y) / y ** 3 == pytest.approx(1.0, rel=1e-4)
        d3 = third_derivative_fd(lambda y: burgers_oracle(y, 0.5, 1.0), 0.0, h=1e-2)
        assert d3 == pytest.approx(6.0, rel=1e-4)

    def test_fractional_exponent_lambda(self):
        # lam = 0.4 -> exponent 3.5, defined for y >= 0 and extended oddly
        ys = np.logspace(-3, 6, 50)
        us = burgers_oracle(ys, 0.4, 1.0)
        resid = np.abs(ys + us - np.abs(us) ** 3.5)
        assert np.all(resid <= 1e-13 * np.maximum(1.0, ys))

    def test_slope_matches_finite_differences(self):
        ys = np.logspace(-2, 4, 20)
        us = burgers_oracle(ys)
        slopes = burgers_oracle_slope(us)
        h = 1e-6 * np.maximum(ys, 1.0)
        fd = (burgers_oracle(ys + h) - burgers_oracle(ys - h)) / (2 * h)
        assert rel_err(slopes, fd, floor=1e-10) <= 1e-6

    def test_rejects_bad_lambda(self):
        with pytest.raises(ConfigError):
            burgers_oracle(1.0, lam=-0.5)


class TestResidual:
    def test_zero_field_is_trivial_solution(self):
        tape = Tape()
        zs = np.linspace(0, 5, 11)
        u = jet_from_values(tape, np.zeros(11), np.zeros(11))
        r = burgers_residual_jet(tape, u, zs, 0.5)
        assert np.all(r.value.value == 0.0)

    def test_oracle_point_closes_residual(self):
        # lam=0.5, y=2: U=-1, U_y=-1/(1+3U^2)=-0.25, so
        # r = -0.5*(-1) + (1.5*2 - 1)*(-0.25) = 0
        tape = Tape()
        z = np.array([np.arcsinh(2.0)])
        u_val = np.array([-1.0])
        u_z = np.array([-0.25 * np.cosh(z[0])])  # U_z = U_y * cosh(z)
        u = jet_from_values(tape, u_val, u_z)
        r = burgers_residual_jet(tape, u, z, 0.5)
        assert abs(float(r.value.value[0])) <= 1e-14

    def test_origin_forced_by_taylor_constraint(self):
        problem = BurgersProblem(lam=0.5, mode="weak",
                                 config=net.MlpConfig(1, 2, 8, "tanh", seed=4))
        theta = problem.init_theta(0)
        r = problem.residual_values(theta, np.array([0.0]))
        assert abs(r[0]) <= 1e-14

    def test_residual_on_oracle_profile(self):
        # acceptance invariant: residual of oracle data <= 1e-10 on the
        # log-spaced grid
        ys = np.logspace(-6, 12, 1000)
        zs = np.arcsinh(ys)
        us = burgers_oracle(ys, 0.5, 1.0)
        uy = burgers_oracle_slope(us, 0.5, 1.0)
        tape = Tape()
        u = jet_from_values(tape, us, uy * np.cosh(zs))
        r = burgers_residual_jet(tape, u, zs, 0.5)
        assert np.max(np.abs(r.value.value)) <= 1e-10

    def test_odd_in_z_for_odd_field(self):
        # For odd U the residual itself is odd in z (U_z is even, sinh odd),
        # so |r| is symmetric and the loss sees both half-lines identically.
        problem = BurgersProblem(lam=0.5, mode="weak",
                                 config=net.MlpConfig(1, 2, 8, "tanh", seed=1))
        theta = problem.init_theta(3)
        zs = np.linspace(0.1, 4.0, 13)
        r_pos = problem.residual_values(theta, zs)
        r_neg = problem.residual_values(theta, -zs)
        scale = np.max(np.abs(r_pos))
        assert np.max(np.abs(r_pos + r_neg)) <= 1e-12 * scale

    def test_parameter_gradient_matches_fd(self):
        config = net.MlpConfig(1, 2, 6, "tanh", seed=2)
        problem = BurgersProblem(lam=0.5, mode="exact", config=config,
                                 interior_batch=5, smoothness_batch=5)
        theta0 = problem.init_theta(1)
        batches = problem.sample_batches(seed=0, epoch=0)
        weights = LossWeights()

        def loss_of(theta):
            tape = Tape()
            total, _ = problem.build_loss(tape, theta, batches, weights)
            return tape, total

        tape, total = loss_of(theta0)
        g = tape.gradient(total)
        g_fd = grad_fd(lambda t: float(loss_of(t)[1].value), theta0)
        assert vec_rel_err(g, g_fd) <= 1e-6


class TestBoundary:
    def test_exact_mode_zero_network(self):
        problem = BurgersProblem(mode="exact")
        tape = Tape()
        leaves = net.register_params(tape, np.zeros(problem.theta_size()),
                                     problem.config)
        rset = problem.boundary_residual(tape, leaves)
        assert float(rset.residuals[0].value[0]) == 0.0

    def test_weak_mode_taylor_cubic_slope(self):
        # U = -z + z^3 gives U_y(30) = 2699 / cosh(30)
        problem = BurgersProblem(mode="weak")
        tape = Tape()
        leaves = net.register_params(tape, np.zeros(problem.theta_size()),
                                     problem.config)
        rset = problem.boundary_residual(tape, leaves)
        expected = (3 * 900.0 - 1.0) / np.cosh(30.0)
        assert float(rset.residuals[0].value[0]) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(5.05e-10, rel=1e-2)


class TestProblemSurface:
    def test_exact_mode_requires_positive_lambda(self):
        with pytest.raises(ConfigError):
            BurgersProblem(lam=0.0, mode="exact")

    def test_grid_columns_shapes(self):
        problem = BurgersProblem(config=net.MlpConfig(1, 2, 6, "tanh"))
        theta = problem.init_theta(0)
        cols = problem.grid_columns(theta, np.linspace(0, 30, 101))
        assert set(cols) == {"z", "y", "r1", "u"}
        assert all(v.shape == (101,) for v in cols.values())
        assert np.all(np.diff(cols["y"]) > 0)

    def test_share_points_reuses_interior_draw(self):
        problem = BurgersProblem(config=net.MlpConfig(1, 2, 6, "tanh"),
                                 interior_batch=64, smoothness_batch=64,
                                 share_points=True)
        batches = problem.sample_batches(seed=5, epoch=2)
        assert np.array_equal(batches["interior"].points,
                              batches["smoothness"].points)
        assert batches["smoothness"].role == "smoothness"
        indep = BurgersProblem(config=net.MlpConfig(1, 2, 6, "tanh"),
                               interior_batch=64, smoothness_batch=64)
        b2 = indep.sample_batches(seed=5, epoch=2)
        assert not np.array_equal(b2["interior"].points, b2["smoothness"].points)

    def test_far_field_residual_matches_mpmath_oracle(self):
        # pure-ansatz residual at y = 1e12 (zero-weight inner net) checked
        # against an independent extended-precision evaluation of
        # -lam*A + ((1+lam) y + A) A'(y) with A = -y^(q+p) / (1+y)^q
        import mpmath as mp
        mp.mp.dps = 50
        lam, q = 0.5, 15
        p = lam / (1 + lam)

        def a_of(y):
            return -y ** (q + p) / (1 + y) ** q

        z = float(np.arcsinh(1e12))
        y0 = mp.sinh(mp.mpf(z))
        a_val = a_of(y0)
        a_dy = mp.diff(a_of, y0)
        r_mp = -lam * a_val + ((1 + lam) * y0 + a_val) * a_dy

        problem = BurgersProblem(mode="exact", lam=lam)
        theta = np.zeros(problem.theta_size())
        r = problem.residual_values(theta, np.array([z]))[0]
        # the residual cancels terms of size lam*|A| ~ 5e3 down to ~3e-5, so
        # 1e-12 is measured against the cancelling-term scale (an absolute
        # 1e-12 would be below the float64 ulp of those terms)
        scale = float(lam * abs(a_val))
        assert abs(r - float(r_mp)) <= 1e-12 * max(1.0, scale)
        assert abs(r - float(r_mp)) <= 1e-6 * abs(float(r_mp))

    def test_fresh_exact_net_matches_tail_offline(self):
        # independent check of the evaluation path: with zero weights the
        # field must equal chi*g computed in extended precision
        import mpmath as mp
        mp.mp.dps = 40
        problem = BurgersProblem(mode="exact", lam=0.5)
        theta = np.zeros(problem.theta_size())
        zs = np.array([0.0, 1.0, 14.0, 28.0])
        u = problem.field_values(theta, zs)
        for z, u_val in zip(zs, u):
            y = mp.sinh(mp.mpf(float(z)))
            ref = 0.0 if y == 0 else float(-y ** (15 + mp.mpf(1) / 3) / (1 + y) ** 15)
            assert abs(u_val - ref) <= 1e-13 * max(1.0, abs(ref))

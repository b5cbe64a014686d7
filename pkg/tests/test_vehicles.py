"""Unit tests for the vehicle Hamiltonians and analytic update kernels."""
import numpy as np
import pytest

from hjplan import obstacles as ob
from hjplan import oracles, vehicles


CAR = vehicles.car(2.0)
PLANE = vehicles.airplane(2.5, 0.5)
SUB = vehicles.submarine(2.0)


class TestModelFactories:
    def test_dimensions(self):
        assert (CAR.state_dim, CAR.spatial_dim) == (3, 2)
        assert (PLANE.state_dim, PLANE.spatial_dim) == (4, 3)
        assert (SUB.state_dim, SUB.spatial_dim) == (5, 3)

    def test_angular_indices(self):
        assert CAR.angular_indices == (2,)
        assert PLANE.angular_indices == (3,)
        assert SUB.angular_indices == (3, 4)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            vehicles.car(0.0)
        with pytest.raises(ValueError):
            vehicles.airplane(1.0, -1.0)
        with pytest.raises(ValueError):
            vehicles.VehicleModel(kind="boat", w_max=1.0)


class TestHamiltonian:
    def test_car_hand_value(self):
        # theta = 0: H = |p1| + W |p3|
        h = vehicles.eval_hamiltonian(CAR, [0.0, 0.0, 0.0], [1.0, 5.0, -0.5])
        assert h == pytest.approx(1.0 + 2.0 * 0.5)

    def test_car_heading_projection(self):
        h = vehicles.eval_hamiltonian(
            CAR, [0.0, 0.0, np.pi / 2], [3.0, -2.0, 0.0]
        )
        assert h == pytest.approx(2.0)

    def test_airplane_signed_planar_term(self):
        # the airplane moves forward only: the planar term is linear, not |.|
        h = vehicles.eval_hamiltonian(
            PLANE, [0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]
        )
        assert h == pytest.approx(-1.0)
        h = vehicles.eval_hamiltonian(
            PLANE, [0.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 1.0, 1.0]
        )
        assert h == pytest.approx(1.0 + 0.5 + 2.5)

    def test_submarine_isotropic_phi(self):
        # phi = pi/2: heading is planar and the angular term is isotropic
        x = [0.0, 0.0, 0.0, 0.0, np.pi / 2]
        h = vehicles.eval_hamiltonian(SUB, x, [1.0, 0.0, 0.0, 3.0, 4.0])
        assert h == pytest.approx(1.0 + 2.0 * 5.0, rel=1e-9)

    def test_homogeneity_spot(self):
        rng = np.random.default_rng(1)
        for model in (CAR, PLANE, SUB):
            x = rng.normal(size=model.state_dim)
            p = rng.normal(size=model.state_dim)
            lam = 3.7
            h1 = vehicles.eval_hamiltonian(model, x, lam * p)
            h0 = vehicles.eval_hamiltonian(model, x, p)
            assert h1 == pytest.approx(lam * h0, rel=1e-12)

    def test_batched(self):
        x = np.zeros((4, 3))
        p = np.ones((4, 3))
        h = vehicles.eval_hamiltonian(CAR, x, p)
        assert h.shape == (4,)

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            vehicles.eval_hamiltonian(CAR, np.zeros(4), np.zeros(4))


def _ctx(delta=0.1, sigma=1.0, tau=0.2, factor=1.0):
    return vehicles.ProxContext(delta, sigma, tau, obstacle_factor=factor)


class TestProxP:
    def test_car_soft_threshold_angular(self):
        # p3 is soft-thresholded by ds * W = 0.1 * 1 * 2 = 0.2
        p = vehicles.prox_p(CAR, np.zeros(3), [0.0, 0.0, 1.0], _ctx())
        assert p[2] == pytest.approx(0.8)
        p = vehicles.prox_p(CAR, np.zeros(3), [0.0, 0.0, 0.1], _ctx())
        assert p[2] == pytest.approx(0.0)

    def test_car_directional_shrink(self):
        # theta = 0: the p1 component shrinks by ds, p2 passes through
        p = vehicles.prox_p(CAR, np.zeros(3), [1.0, 0.7, 0.0], _ctx())
        np.testing.assert_allclose(p, [0.9, 0.7, 0.0], atol=1e-12)

    def test_car_obstacle_factor_suppresses(self):
        p = vehicles.prox_p(CAR, np.zeros(3), [1.0, 0.7, 0.3], _ctx(factor=0.0))
        np.testing.assert_allclose(p, [1.0, 0.7, 0.3], atol=1e-12)

    def test_airplane_linear_shift(self):
        # the planar block gains +ds * gamma (linear Hamiltonian term)
        p = vehicles.prox_p(PLANE, np.zeros(4), [1.0, 2.0, 0.0, 0.0], _ctx())
        np.testing.assert_allclose(p[:2], [1.1, 2.0], atol=1e-12)

    def test_submarine_isotropic_closed_form(self):
        # phi = pi/2, beta45 = (3, 4), c = ds * W: vector soft-threshold
        ctx = vehicles.ProxContext(1.0, 0.5, 0.2, obstacle_factor=1.0)
        c = 1.0  # delta * sigma * W = 1 * 0.5 * 2
        x = np.array([0.0, 0.0, 0.0, 0.0, np.pi / 2])
        beta = np.array([0.0, 0.0, 0.0, 3.0, 4.0])
        p = vehicles.prox_p(SUB, x, beta, ctx)
        shrink = max(0.0, 1.0 - c / 5.0)
        np.testing.assert_allclose(p[3:], [3.0 * shrink, 4.0 * shrink], atol=1e-9)

    def test_submarine_dead_zone(self):
        x = np.array([0.0, 0.0, 0.0, 0.0, np.pi / 2])
        beta = np.array([0.0, 0.0, 0.0, 0.05, 0.05])
        p = vehicles.prox_p(SUB, x, beta, _ctx())
        np.testing.assert_allclose(p[3:], [0.0, 0.0], atol=1e-12)

    def test_prox_reduces_objective(self):
        rng = np.random.default_rng(7)
        for model in (CAR, PLANE, SUB):
            x = rng.normal(size=model.state_dim)
            beta = rng.normal(size=model.state_dim)
            ctx = _ctx()
            p = vehicles.prox_p(model, x, beta, ctx)
            ds = ctx.delta * ctx.sigma

            def obj(q):
                return ds * vehicles.eval_hamiltonian(model, x, q) \
                    + 0.5 * np.sum((q - beta) ** 2)

            assert obj(p) <= obj(beta) + 1e-12

    def test_batched_matches_loop(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(6, 5))
        beta = rng.normal(size=(6, 5))
        ctx = _ctx()
        batch = vehicles.prox_p(SUB, x, beta, ctx)
        for i in range(6):
            single = vehicles.prox_p(SUB, x[i], beta[i], ctx)
            np.testing.assert_allclose(batch[i], single, atol=1e-12)


class TestSubmarineBisection:
    def test_residual_at_root(self):
        alpha = vehicles.submarine_alpha_root(3.0, 4.0, 1.0, 1.0)
        assert abs(vehicles.submarine_g(alpha, 3.0, 4.0, 1.0, 1.0)) <= 1e-10

    def test_isotropic_closed_form_root(self):
        # s2 = 1: p = (1 - c/|beta|) beta so alpha = |beta| - c
        alpha = vehicles.submarine_alpha_root(3.0, 4.0, 1.0, 1.0)
        assert alpha == pytest.approx(4.0, abs=1e-9)

    def test_small_s2_stable(self):
        alpha = vehicles.submarine_alpha_root(0.5, 2.0, 1e-10, 0.3)
        g = vehicles.submarine_g(alpha, 0.5, 2.0, 1e-10, 0.3)
        assert np.isfinite(alpha) and abs(g) <= 1e-10

    def test_scan_limit_error(self):
        with pytest.raises(vehicles.BisectionError):
            vehicles.submarine_alpha_root(1e9, 1e9, 1.0, 0.1)


class TestStateUpdates:
    def test_update_x0_moves_toward_goal(self):
        goal = np.array([1.0, 0.0, 0.0])
        x0 = vehicles.update_x0(CAR, np.array([3.0, 0.0, 0.0]), np.zeros(3),
                                goal, tau=0.2)
        np.testing.assert_allclose(x0, [2.8, 0.0, 0.0], atol=1e-12)

    def test_update_x0_snaps_inside_ball(self):
        goal = np.array([1.0, 0.0, 0.0])
        x0 = vehicles.update_x0(CAR, np.array([1.05, 0.0, 0.0]), np.zeros(3),
                                goal, tau=0.2)
        np.testing.assert_allclose(x0, goal, atol=1e-12)

    def test_spatial_update_free_space_closed_form(self):
        x = np.array([1.0, 2.0, 0.5])
        pj = np.array([0.3, -0.1, 0.0])
        pj1 = np.array([0.1, 0.1, 0.0])
        out = vehicles.update_x_spatial(CAR, x, pj, pj1, _ctx(), None, 0.0)
        np.testing.assert_allclose(out, x[:2] - 0.2 * (pj[:2] - pj1[:2]))

    def test_spatial_update_pushes_out_of_obstacle(self):
        obs = ob.ObstacleSet(balls=(ob.MovingBall(center=(0.0, 0.0), radius=1.0),))
        # nu lands exactly on the ball boundary, inside the tanh layer
        x = np.array([[1.2, 0.0, 0.0]])
        pj = np.array([[1.0, 0.0, 0.5]])
        pj1 = np.zeros((1, 3))
        free = vehicles.update_x_spatial(CAR, x, pj, pj1, _ctx(), None,
                                         np.zeros(1))
        pushed = vehicles.update_x_spatial(CAR, x, pj, pj1, _ctx(), obs,
                                           np.zeros(1))
        # near the boundary the descent steps push outward (larger x)
        assert pushed[0, 0] > free[0, 0]

    def test_angular_gradient_matches_fd(self):
        rng = np.random.default_rng(11)
        for model in (CAR, PLANE, SUB):
            ai = list(model.angular_indices)
            p = rng.normal(size=model.state_dim)
            nu = rng.normal(size=len(ai))
            th = rng.normal(size=len(ai))
            dto = 0.02

            def h(block):
                full = np.zeros(model.state_dim)
                full[ai] = block
                ham = vehicles.eval_hamiltonian(model, full, p)
                return -dto * ham + 0.5 * np.sum((block - nu) ** 2)

            ana = vehicles.angular_objective_gradient(
                model, th, p, nu, dto
            )
            num = oracles.fd_gradient(h, th)
            np.testing.assert_allclose(ana, num, rtol=1e-5, atol=1e-6)

    def test_angular_update_reduces_objective(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(5, 3))
        pj = rng.normal(size=(5, 3))
        pj1 = rng.normal(size=(5, 3))
        ctx = _ctx()
        out = vehicles.update_x_angular(CAR, x, pj, pj1, ctx)
        assert out.shape == (5, 1)
        assert np.isfinite(out).all()


class TestControlRecovery:
    def test_car_controls(self):
        u = vehicles.recover_controls(CAR, [0.0, 0.0, 0.0], [-1.0, 0.0, 0.5])
        np.testing.assert_allclose(u, [1.0, -1.0])

    def test_sign_zero_is_zero(self):
        u = vehicles.recover_controls(CAR, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        np.testing.assert_allclose(u, [0.0, 0.0])

    def test_airplane_unit_speed(self):
        u = vehicles.recover_controls(
            PLANE, [0.0, 0.0, 0.0, 0.0], [1.0, 1.0, -1.0, -1.0]
        )
        assert u[0] == 1.0
        np.testing.assert_allclose(u[1:], [1.0, 1.0])

    def test_submarine_curvature_feasible(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(20, 5))
        p = rng.normal(size=(20, 5))
        u = vehicles.recover_controls(SUB, x, p)
        curv = np.sqrt(u[:, 1] ** 2 * np.sin(x[:, 4]) ** 2 + u[:, 2] ** 2)
        assert np.all(curv <= 1.0 + 1e-6)


class TestRollout:
    def test_car_straight_line(self):
        controls = np.tile([1.0, 0.0], (10, 1))
        states = vehicles.rollout_dynamics(CAR, [0.0, 0.0, 0.0], controls, 0.1)
        np.testing.assert_allclose(states[-1], [1.0, 0.0, 0.0], atol=1e-12)

    def test_car_turn_rate(self):
        controls = np.tile([0.0, 1.0], (5, 1))
        states = vehicles.rollout_dynamics(CAR, [0.0, 0.0, 0.0], controls, 0.1)
        assert states[-1, 2] == pytest.approx(0.5 * 2.0)

    def test_control_bound_enforced(self):
        with pytest.raises(ValueError):
            vehicles.rollout_dynamics(CAR, [0.0, 0.0, 0.0], [[1.5, 0.0]], 0.1)

    def test_submarine_curvature_enforced(self):
        with pytest.raises(ValueError):
            vehicles.rollout_dynamics(
                SUB, [0.0, 0.0, 0.0, 0.0, np.pi / 2], [[1.0, 1.0, 1.0]], 0.1
            )


class TestProxContext:
    def test_step_size_product_bound(self):
        with pytest.raises(ValueError):
            vehicles.ProxContext(0.1, 1.0, 0.3)

    def test_positive_parameters(self):
        with pytest.raises(ValueError):
            vehicles.ProxContext(-0.1, 1.0, 0.2)

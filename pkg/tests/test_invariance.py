import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parainv import (Ball, Box, HalfSpace, NonnegCone, TimeGrid, ValidationError,
                     build_interval_space, check_criterion_along,
                     check_pointwise_criterion, diffusion_form, distance_monitor,
                     ftc_identity_check, invbound_check, matrix_form, matrix_space,
                     solve_linear, whole_space)
from parainv.invariance import default_battery
from oracles import linear_flow, sign_pattern_margins

I2 = matrix_space(np.eye(2), np.eye(2))
COUPLED = np.array([[1.0, 1.0], [1.0, 1.0]])


@pytest.fixture(scope="module")
def heat_box():
    space = build_interval_space(32, lumped=True)
    form = diffusion_form(space, 1.0, (0.0, 0.2))
    return space, form, Box(space, 0.0, 1.0)


class TestCriterionAlong:
    def test_heat_in_ball_holds(self):
        space = build_interval_space(40)
        form = diffusion_form(space, 1.0, (0.0, 0.1))
        u0 = space.interpolate(lambda x: np.sin(np.pi * x))
        traj = solve_linear(form, None, u0, TimeGrid(0.0, 0.1, 100))
        report = check_criterion_along(form, None, traj, Ball(space))
        assert report.holds
        assert report.first_failure is None
        assert report.violation_density == 0.0
        # the sine has H-norm below one: the trajectory never leaves the ball
        assert not np.any(report.distances)

    def test_counterexample_fails_from_the_start(self):
        form = matrix_form(I2, COUPLED, (0.0, 0.1))
        traj = solve_linear(form, None, np.array([1.0, 0.0]), TimeGrid(0.0, 0.1, 100))
        report = check_criterion_along(form, None, traj, NonnegCone(I2))
        assert not report
        assert report.first_failure == 1
        assert report.worst_margin < 0
        assert report.violation_density == pytest.approx(100 / 101)

    def test_negative_tol(self, heat_box):
        space, form, box = heat_box
        traj = solve_linear(form, None, np.zeros(space.dim), TimeGrid(0.0, 0.2, 4))
        with pytest.raises(ValidationError):
            check_criterion_along(form, None, traj, box, tol=-1.0)


class TestPointwise:
    def test_counterexample_lattice(self):
        form = matrix_form(I2, COUPLED)
        samples = np.array([[1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        report = check_pointwise_criterion(form, None, NonnegCone(I2), samples)
        value, _, sample = report.worst
        assert value == -1.0
        np.testing.assert_array_equal(sample, [1.0, -1.0])
        assert not report.holds

    def test_lattice_matches_brute_force(self):
        form = matrix_form(I2, COUPLED)
        cone = NonnegCone(I2)
        brute = sign_pattern_margins(COUPLED, 2)
        samples = np.array([v for _, v in brute])
        report = check_pointwise_criterion(form, None, cone, samples)
        np.testing.assert_allclose(report.margins[0], [m for m, _ in brute], atol=1e-15)
        assert min(m for m, _ in brute) == report.worst_margin == -1.0

    def test_default_battery_finds_lattice_worst(self):
        form = matrix_form(I2, COUPLED)
        report = check_pointwise_criterion(form, None, NonnegCone(I2), n_random=0)
        value, _, sample = report.worst
        assert value == pytest.approx(-1.0, abs=1e-12)
        np.testing.assert_array_equal(sample, [1.0, -1.0])

    def test_diagonal_operator_holds_on_cone(self):
        form = matrix_form(I2, np.diag([1.0, 3.0]))
        assert check_pointwise_criterion(form, None, NonnegCone(I2))

    def test_p1_heat_box_margins_nonnegative(self, heat_box):
        _, form, box = heat_box
        report = check_pointwise_criterion(form, None, box)
        assert report.worst_margin >= 0.0

    def test_whole_space_margins_vanish(self, heat_box):
        space, form, _ = heat_box
        report = check_pointwise_criterion(form, None, whole_space(space))
        assert not np.any(report.margins)

    def test_source_pushing_out_fails(self, heat_box):
        space, form, box = heat_box
        push = lambda t: space.embed(np.full(space.dim, 1e4))  # noqa: E731
        assert not check_pointwise_criterion(form, push, box)

    def test_battery_shape(self, heat_box):
        _, _, box = heat_box
        dim = box.space.dim
        assert default_battery(box, n_random=7).shape == (2 * dim + 14, dim)
        small = Box(I2)
        assert default_battery(small, n_random=0).shape == (4 + 9, 2)

    def test_empty_samples(self, heat_box):
        _, form, box = heat_box
        with pytest.raises(ValidationError):
            check_pointwise_criterion(form, None, box, np.zeros((0, box.space.dim)))


class TestDistanceMonitor:
    def test_ball_contraction(self):
        form = matrix_form(I2, np.eye(2), (0.0, 1.0))
        grid = TimeGrid(0.0, 1.0, 1000)
        traj = solve_linear(form, None, np.array([2.0, 0.0]), grid)
        report = distance_monitor(traj, Ball(I2), form.constants.omega_stab)
        assert report.holds
        assert report.d0 == pytest.approx(1.0)
        exact = np.maximum(2 * np.exp(-grid.nodes) - 1, 0.0)
        assert np.abs(report.distances - exact).max() <= 5 * grid.tau
        assert np.all(report.distances <= np.exp(-grid.nodes) + 10 * grid.tau)

    def test_counterexample_leaves_cone(self):
        form = matrix_form(I2, COUPLED, (0.0, 0.1))
        traj = solve_linear(form, None, np.array([1.0, 0.0]), TimeGrid(0.0, 0.1, 1000))
        report = distance_monitor(traj, NonnegCone(I2), form.constants.omega_stab)
        assert report.d0 == 0.0
        assert not report
        exact = linear_flow(COUPLED, [1.0, 0.0], 0.1)
        assert report.distances[-1] == pytest.approx(-exact[1], abs=1e-3)

    def test_zero_distance_is_absorbing(self, heat_box):
        space, form, box = heat_box
        u0 = space.interpolate(lambda x: 0.5 + 0.4 * np.sin(3 * np.pi * x))
        traj = solve_linear(form, None, u0, TimeGrid(0.0, 0.2, 100))
        report = distance_monitor(traj, box, form.constants.omega_stab)
        assert report.d0 == 0.0
        assert not np.any(report.distances)
        assert report.max_excess <= 0.0


class TestInvBound:
    def test_holds_for_identity_ball(self):
        rng = np.random.default_rng(0)
        form = matrix_form(I2, np.eye(2))
        for v in rng.standard_normal((50, 2)) * 3:
            result = invbound_check(form, v, np.zeros(2), Ball(I2))
            assert result.hypothesis_holds and result

    def test_fem_box(self, heat_box):
        space, form, box = heat_box
        rng = np.random.default_rng(1)
        for v in rng.standard_normal((20, space.dim)) * 2:
            result = invbound_check(form, v, np.zeros(space.dim), box)
            assert result.hypothesis_holds
            assert result.lhs <= result.rhs

    def test_failing_hypothesis_is_flagged(self):
        form = matrix_form(I2, COUPLED)
        result = invbound_check(form, [1.0, -1.0], np.zeros(2), NonnegCone(I2))
        assert result.holds and not result.hypothesis_holds


class TestFTC:
    def _traj(self, heat_box, steps):
        space, form, _ = heat_box
        u0 = space.interpolate(lambda x: 2 * np.sin(np.pi * x))
        return solve_linear(form, None, u0, TimeGrid(0.0, 0.2, steps))

    def test_whole_space_residual_vanishes(self, heat_box):
        space, _, _ = heat_box
        assert ftc_identity_check(self._traj(heat_box, 64), whole_space(space)) <= 1e-10

    def test_left_rule_first_order(self, heat_box):
        _, _, box = heat_box
        res = [ftc_identity_check(self._traj(heat_box, s), box) for s in (100, 200, 400)]
        ratios = np.array(res[:-1]) / np.array(res[1:])
        assert np.all((ratios > 1.5) & (ratios < 2.5))

    def test_midpoint_exact_for_halfspace_inside(self):
        # P is affine on each side of a half-space boundary
        form = matrix_form(I2, np.eye(2), (0.0, 1.0))
        traj = solve_linear(form, None, np.array([3.0, 1.0]), TimeGrid(0.0, 1.0, 16))
        hs = HalfSpace(I2, [1.0, 0.0], -1.0)
        assert ftc_identity_check(traj, hs, quadrature="midpoint") <= 1e-6

    def test_options(self, heat_box):
        _, _, box = heat_box
        with pytest.raises(ValidationError):
            ftc_identity_check(self._traj(heat_box, 8), box, quadrature="simpson")
        with pytest.raises(ValidationError):
            ftc_identity_check(self._traj(heat_box, 1), box)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_margin_on_diagonal_cone_is_sign_pattern(seed):
    rng = np.random.default_rng(seed)
    diag = rng.uniform(0.1, 3.0, 3)
    space = matrix_space(np.eye(3), np.eye(3))
    form = matrix_form(space, np.diag(diag))
    # disjoint supports of v+ and v- make every margin vanish
    report = check_pointwise_criterion(form, None, NonnegCone(space),
                                       rng.standard_normal((40, 3)))
    assert np.abs(report.margins).max() <= 1e-15

"""Numerical probes of the necessity direction.

If every solution started in ``C`` at any time stays in ``C``, then every
solution ``u`` (started anywhere) satisfies the margin inequality. The probe
reproduces the restart construction behind that statement. On a partition
``a = t_0 < ... < t_n = b`` it restarts the equation from ``Pu(t_{k-1})``,
compares the restarted solutions ``v_{n,k}`` with ``u``, and integrates
``<f - A Pu, u - Pu>`` over dyadic subintervals, where it must be ``<= 0``.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import GridError, ValidationError
from .invariance import _dyadic_pairs, check_pointwise_criterion, rhs_value
from .lions import ThetaStepper, mr_norm
from .semilinear import make_plan, solve_semilinear
from .space import row_quadratic

__all__ = [
    "SamplingReport",
    "IntervalProbe",
    "ProbeReport",
    "invariance_sampling_test",
    "restart_probe",
    "pointwise_necessity_scan",
]

ASSUMPTIONS = [
    "right-continuity of the form (and of the right-hand side) is asserted, not verified",
    "the whole discrete space plays the role of the dense regular subspace",
]


def _is_semilinear(rhs):
    return getattr(rhs, "state_dependent", False)


def _solve_from(form, rhs, convex, grid, stepper, k0, k1, u_start, plan):
    """States ``k0..k1`` of the solution started at ``u_start``."""
    if _is_semilinear(rhs):
        sol = solve_semilinear(form, rhs, u_start, grid.sub(k0, k1), plan,
                               stepper.theta, convex, check_lipschitz=False)
        return sol.trajectory.states
    forcing = None
    if rhs is not None:
        forcing = lambda k: np.asarray(rhs(stepper.stage_time(k)), dtype=float)  # noqa: E731
    return stepper.run(u_start, k0, k1, forcing)


@dataclass
class SamplingReport:
    tol: float
    starts: list  # (restart index, restart time, worst distance)
    worst_violation: float
    worst_initial: np.ndarray

    @property
    def passed(self):
        return self.worst_violation <= self.tol

    def __bool__(self):
        return self.passed


def invariance_sampling_test(form, rhs, convex, n_starts, grid, theta=1.0, seed=0,
                             tol=None, plan=None, starts=None):
    """Restart from random points of ``C`` at random grid times and watch containment.

    Passes iff the largest distance to ``C`` seen on ``[c, b]`` stays below
    ``tol`` (default ``10 tau``). Explicit ``(index, u_c)`` pairs may be
    appended through ``starts``.
    """
    if n_starts < 1:
        raise ValidationError("need at least one start")
    rng = np.random.default_rng(seed)
    tol = 10.0 * grid.tau if tol is None else tol
    stepper = ThetaStepper(form, grid, theta)
    if _is_semilinear(rhs) and plan is None:
        plan = make_plan(form, rhs, grid, theta=theta, seed=seed)
    space = form.space
    trials = []
    for _ in range(n_starts):
        k0 = int(rng.integers(0, grid.steps))
        trials.append((k0, convex.project(rng.standard_normal(space.dim))))
    trials.extend(starts or [])
    records, worst, worst_u = [], -np.inf, None
    for k0, u_c in trials:
        states = _solve_from(form, rhs, convex, grid, stepper, k0, grid.steps,
                             np.asarray(u_c, dtype=float), plan)
        dist = max(convex.distance(u) for u in states)
        records.append((k0, grid.t(k0), dist))
        if dist > worst:
            worst, worst_u = dist, np.asarray(u_c, dtype=float)
    return SamplingReport(tol, records, float(worst), worst_u)


@dataclass
class IntervalProbe:
    k: int
    t0: float
    t1: float
    restart_deviation: float
    dominance: float


@dataclass
class ProbeReport:
    n: int
    intervals: list
    integrals: list  # (t_start, t_end, integral of <f - A Pu, u - Pu>)
    tol_int: float
    telescoped: float
    endpoint_difference: float
    restart_sum: float
    l2_deviation: float
    extra: dict = field(default_factory=dict)

    @property
    def max_integral(self):
        return max(v for _, _, v in self.integrals)

    @property
    def min_dominance(self):
        return min(p.dominance for p in self.intervals)

    @property
    def max_restart_deviation(self):
        return max(p.restart_deviation for p in self.intervals)

    @property
    def necessity_consistent(self):
        return self.max_integral <= self.tol_int

    def __bool__(self):
        return self.necessity_consistent


def restart_probe(form, rhs, convex, traj, n, theta=1.0, plan=None, slack=10.0):
    """Restart construction on the uniform ``n``-partition of the trajectory grid.

    Parameters
    ----------
    traj : Trajectory
        Solution of ``u' + A u = f`` (or ``= F(., Pu)``) on its whole grid.
    n : int
        Number of subintervals; must divide the number of grid steps.

    Returns
    -------
    ProbeReport
        ``necessity_consistent`` iff every dyadic integral of
        ``<f - A Pu, u - Pu>`` is at most ``slack tau (1 + ||u||_MR^2)``.
    """
    grid = traj.grid
    if n < 1 or grid.steps % n:
        raise GridError(f"n={n} does not divide {grid.steps} steps")
    space = form.space
    tau = grid.tau
    width = grid.steps // n
    stepper = ThetaStepper(form, grid, theta)
    restart_rhs = rhs
    if _is_semilinear(rhs):
        restart_rhs = rhs.as_projected(False)
        if plan is None:
            plan = make_plan(form, rhs, grid, theta=theta)

    states = traj.states
    proj = convex.project_many(states)
    rest = states - proj
    dist = np.sqrt(row_quadratic(rest, space.h_gram))

    intervals = []
    restart_sum = 0.0
    l2_dev = 0.0
    for k in range(1, n + 1):
        i0, i1 = (k - 1) * width, k * width
        v = _solve_from(form, restart_rhs, convex, grid, stepper, i0, i1,
                        proj[i0].copy(), plan)
        diff = states[i0:i1 + 1] - v
        dev = np.sqrt(row_quadratic(diff, space.h_gram))
        intervals.append(IntervalProbe(k, grid.t(i0), grid.t(i1), float(dev.max()),
                                       float((dev - dist[i0:i1 + 1]).min())))
        restart_sum += dev[-1] ** 2 - dev[0] ** 2
        gap = v[:-1] - proj[i0:i1]
        l2_dev += tau * row_quadratic(gap, space.h_gram).sum()

    density = np.zeros(grid.steps)
    for i in range(grid.steps):
        if not np.any(rest[i]):
            continue
        t = grid.t(i)
        f_val = rhs_value(rhs, t, proj[i], space)
        density[i] = float(rest[i] @ (f_val - form.action(t, proj[i])))
    cum = np.concatenate([[0.0], np.cumsum(tau * density)])
    integrals = [(grid.t(s), grid.t(e), float(cum[e] - cum[s]))
                 for s, e in _dyadic_pairs(grid.steps, prefixes=False)]
    energy = dist ** 2
    marks = energy[::width]
    tol_int = slack * tau * (1.0 + mr_norm(traj) ** 2)
    return ProbeReport(
        n=n,
        intervals=intervals,
        integrals=integrals,
        tol_int=float(tol_int),
        telescoped=float(np.diff(marks).sum()),
        endpoint_difference=float(energy[-1] - energy[0]),
        restart_sum=float(restart_sum),
        l2_deviation=float(np.sqrt(l2_dev)),
    )


def pointwise_necessity_scan(form, rhs, convex, samples=None, times=None,
                             tol=1e-12, n_random=100, seed=0):
    """Margins ``a(t, Pv, v - Pv) - <f(t) or F(t, Pv), v - Pv>`` over a battery.

    Under invariance (and the regularity hypotheses recorded in
    ``report.assumptions``) every margin must be ``>= -tol``.
    """
    report = check_pointwise_criterion(form, rhs, convex, samples, times, tol,
                                       n_random, seed)
    report.assumptions = list(ASSUMPTIONS)
    return report

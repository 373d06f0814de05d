"""Semilinear problems ``u' + A(t) u = F(t, u)`` by Picard iteration on slabs.

The interval is cut into slabs short enough for the solution map
``v -> S v`` (solve the linear problem with source ``F(., v)``) to contract
in the discrete MR norm; the squared contraction factor on a slab of length
``s`` is ``s c_a L^2 / (2 sqrt 2)``. Slabs are solved one after another and
glued at their endpoint states.
"""

import copy
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .exceptions import (ContractionFailureError, InvarianceViolationError,
                         PreconditionError, ValidationError)
from .invariance import check_pointwise_criterion
from .lions import (ThetaStepper, Trajectory, _dual_norms_sq, _v_norms_sq,
                    estimate_solution_norm)

__all__ = [
    "SemilinearRHS",
    "scalar_nonlinearity",
    "lipschitz_of_clamped",
    "ContractionPlan",
    "make_plan",
    "SlabReport",
    "SemilinearSolution",
    "solve_semilinear",
    "solve_projected_semilinear",
]

SQRT8 = 2.0 * np.sqrt(2.0)


class SemilinearRHS:
    """Right-hand side ``F(t, v)`` with values in ``V'``.

    Parameters
    ----------
    space : DiscreteSpace
    func : callable
        ``func(t, v)`` returning a coefficient vector in ``V'``.
    lipschitz : float
        ``||F(t,v) - F(t,w)||_{V'} <= L ||v - w||_H``.
    projected : bool
        Feed ``Pv`` instead of ``v`` into ``func`` (needs a convex set in the
        solver).
    sample_range : (float, float), optional
        Nodal range of the states used by :meth:`check_lipschitz`; Gaussian
        states are used when omitted.
    """

    state_dependent = True

    def __init__(self, space, func, lipschitz, projected=False, sample_range=None,
                 name="F"):
        if lipschitz < 0:
            raise ValidationError("Lipschitz constant must be nonnegative")
        self.space = space
        self.func = func
        self.lipschitz = float(lipschitz)
        self.projected = bool(projected)
        self.sample_range = sample_range
        self.name = name

    def __call__(self, t, v):
        return self.func(t, v)

    def as_projected(self, flag=True):
        new = copy.copy(self)
        new.projected = flag
        return new

    def effective(self, convex=None):
        """The map actually iterated: ``v -> F(t, Pv)`` or ``v -> F(t, v)``."""
        if self.projected:
            if convex is None:
                raise ValidationError("projected right-hand side needs a convex set")
            return lambda t, v: self.func(t, convex.project(v))
        return self.func

    def check_lipschitz(self, convex=None, n_pairs=200, times=(0.0,), seed=0):
        """Worst ``||F(v) - F(w)||_{V'} / (L ||v - w||_H)`` on random pairs.

        Values ``<= 1 + 1e-6`` certify the declared constant.
        """
        fn = self.effective(convex)
        rng = np.random.default_rng(seed)
        space = self.space
        worst = 0.0
        for i in range(n_pairs):
            if self.sample_range is None:
                v, w = rng.standard_normal((2, space.dim))
            else:
                v, w = rng.uniform(*self.sample_range, size=(2, space.dim))
            t = times[i % len(times)]
            num = space.dual_norm(fn(t, v) - fn(t, w))
            den = space.h_norm(v - w)
            if num == 0.0:
                continue
            if self.lipschitz == 0.0:
                return np.inf
            worst = max(worst, num / (self.lipschitz * den))
        return worst


def _nodal_factor(space):
    """Bound of the H-norm of nodal maps relative to the diagonal of hGram."""
    if space.diagonal_h:
        return 1.0
    d = np.diag(space.h_gram)
    lam = sla.eigh(space.h_gram, np.diag(d), eigvals_only=True)
    return float(np.sqrt(lam[-1] / lam[0]))


def scalar_nonlinearity(space, fn, lipschitz, projected=False, sample_range=None,
                        name="F"):
    """``F(t, v) = hGram @ fn(v)`` with ``fn`` applied nodewise."""
    h_diag = np.diag(space.h_gram).copy() if space.diagonal_h else None

    def func(t, v):
        vals = fn(np.asarray(v, dtype=float))
        if h_diag is not None:
            return h_diag * vals
        return space.h_gram @ vals

    return SemilinearRHS(space, func, lipschitz, projected, sample_range, name)


def lipschitz_of_clamped(fn, lo, hi, space=None, slope=None, n_samples=10001):
    """Lipschitz constant of ``v -> hGram fn(Pv)`` from ``H`` to ``V'``.

    Parameters
    ----------
    fn : callable
        Scalar function, vectorised.
    lo, hi : float
        The box that ``P`` clamps to; only slopes on ``[lo, hi]`` matter.
    space : DiscreteSpace, optional
        Supplies the embedding constant ``c_emb`` (and a norm-equivalence
        factor for non-diagonal ``hGram``). Without it the bare slope bound
        is returned.
    slope : float, optional
        Known bound on ``|fn'|``. Sampled from secants otherwise, padded by
        the largest change between neighbouring secants.
    """
    if slope is None:
        xs = np.linspace(lo, hi, n_samples)
        with np.errstate(all="ignore"):
            secants = np.diff(np.asarray(fn(xs), dtype=float)) / np.diff(xs)
        if not np.all(np.isfinite(secants)) or np.abs(secants).max() > 1e12:
            raise ValidationError("sampled slope of the nonlinearity is unbounded")
        pad = np.abs(np.diff(secants)).max() if secants.size > 1 else 0.0
        slope = float(np.abs(secants).max() + pad)
    if space is None:
        return float(slope)
    return float(space.c_emb * _nodal_factor(space) * slope)


@dataclass(frozen=True)
class ContractionPlan:
    """Slab length and Picard controls."""

    c_a: float
    lipschitz: float
    slab_length: float
    max_picard_iters: int = 200
    picard_tol: float = 1e-10

    @property
    def q(self):
        """Largest slab length for which the Picard map contracts."""
        if self.lipschitz == 0.0:
            return np.inf
        return SQRT8 / (self.c_a * self.lipschitz ** 2)

    @property
    def factor(self):
        """Squared-norm contraction factor ``slab_length c_a L^2 / (2 sqrt 2)``."""
        return self.slab_length * self.c_a * self.lipschitz ** 2 / SQRT8


def make_plan(form, rhs, grid, c_a=None, theta=1.0, probes=8, seed=0,
              max_picard_iters=200, picard_tol=1e-10):
    """Plan with slab length ``<= q/2`` rounded down to whole grid steps.

    ``c_a`` is estimated with :func:`parainv.lions.estimate_solution_norm`
    on ``grid`` when not given.
    """
    if c_a is None:
        c_a = estimate_solution_norm(form, grid, probes=probes, theta=theta, seed=seed)
    L = rhs.lipschitz
    span = grid.b - grid.a
    target = span if L == 0.0 else min(span, 0.5 * SQRT8 / (c_a * L ** 2))
    steps = int(np.floor(target / grid.tau + 1e-9))
    if steps < 1:
        raise ValidationError(
            f"time step {grid.tau:g} exceeds the contraction slab length "
            f"{target:g}; refine the grid"
        )
    return ContractionPlan(float(c_a), L, steps * grid.tau, max_picard_iters,
                           picard_tol)


@dataclass
class SlabReport:
    k0: int
    k1: int
    iterations: int
    increments: list
    ratios: list

    @property
    def max_ratio(self):
        return max(self.ratios) if self.ratios else 0.0


@dataclass
class SemilinearSolution:
    trajectory: Trajectory
    plan: ContractionPlan
    slabs: list
    criterion: object = None
    max_violation: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def max_ratio(self):
        return max((s.max_ratio for s in self.slabs), default=0.0)


def _mr_sq(space, states, tau):
    duals = np.diff(states, axis=0) @ space.h_gram / tau
    return tau * (_dual_norms_sq(space, duals).sum()
                  + _v_norms_sq(space, states[:-1]).sum())


def _slab_steps(plan, grid):
    steps = plan.slab_length / grid.tau
    n = int(round(steps))
    if n < 1 or abs(n - steps) > 1e-6 * max(1.0, steps):
        raise ValidationError("slab length must be a whole number of grid steps")
    return n


def _picard_slab(stepper, fn, u_start, k0, k1, plan, init):
    theta = stepper.theta
    space = stepper.space

    def forcing_from(states):
        def forcing(k):
            j = k - k0
            mix = states[j + 1] if theta == 1.0 else (
                (1.0 - theta) * states[j] + theta * states[j + 1])
            return fn(stepper.stage_time(k), mix)
        return forcing

    if init == "zero":
        current = np.zeros((k1 - k0 + 1, space.dim))
    elif init == "warm":
        frozen = fn(stepper.stage_time(k0), u_start)
        current = stepper.run(u_start, k0, k1, lambda k: frozen)
    else:
        raise ValidationError(f"unknown Picard initialisation {init!r}")

    increments, ratios = [], []
    bad = 0
    for it in range(1, plan.max_picard_iters + 1):
        new = stepper.run(u_start, k0, k1, forcing_from(current))
        inc = np.sqrt(_mr_sq(space, new - current, stepper.grid.tau))
        floor = 1e-13 * (1.0 + np.sqrt(_mr_sq(space, new, stepper.grid.tau)))
        if increments and increments[-1] > floor:
            ratio = (inc / increments[-1]) ** 2
            ratios.append(ratio)
            bad = bad + 1 if ratio >= 1.0 else 0
            if bad >= 3:
                raise ContractionFailureError(
                    f"Picard iteration on steps {k0}..{k1} did not contract "
                    f"(ratio {ratio:.3g}); use shorter slabs, L or c_a is underestimated"
                )
        increments.append(inc)
        current = new
        if inc <= plan.picard_tol:
            break
    return current, SlabReport(k0, k1, it, increments, ratios)


def solve_semilinear(form, rhs, u_a, grid, plan=None, theta=1.0, convex=None,
                     init="warm", stepper=None, check_lipschitz=True):
    """Solve ``u' + A u = F(., u)`` (or ``F(., Pu)`` for projected ``rhs``).

    Parameters
    ----------
    form : NonAutonomousForm
    rhs : SemilinearRHS
    u_a : array_like
    grid : TimeGrid
    plan : ContractionPlan, optional
        Built with :func:`make_plan` when omitted.
    convex : ConvexSet, optional
        Required when ``rhs.projected``.
    init : {'warm', 'zero'}
        First Picard iterate: the linear solve with ``F`` frozen at ``u_a``,
        or the zero trajectory.

    Returns
    -------
    SemilinearSolution
        Trajectory plus per-slab Picard diagnostics.

    Raises
    ------
    ContractionFailureError
        After three consecutive non-contracting Picard iterations.
    """
    space = form.space
    u_a = space._vec(u_a, "u_a")
    fn = rhs.effective(convex)
    if check_lipschitz:
        worst = rhs.check_lipschitz(convex, times=(grid.a, grid.b))
        if worst > 1.0 + 1e-6:
            raise ValidationError(
                f"declared Lipschitz constant {rhs.lipschitz:g} is violated "
                f"by a factor {worst:.4g}"
            )
    if plan is None:
        plan = make_plan(form, rhs, grid, theta=theta)
    if stepper is None:
        stepper = ThetaStepper(form, grid, theta)
    width = _slab_steps(plan, grid)
    states = np.empty((grid.steps + 1, space.dim))
    states[0] = u_a
    slabs = []
    k0 = 0
    while k0 < grid.steps:
        k1 = min(k0 + width, grid.steps)
        slab, report = _picard_slab(stepper, fn, states[k0], k0, k1, plan, init)
        states[k0:k1 + 1] = slab
        slabs.append(report)
        k0 = k1
    traj = Trajectory(grid, states, space)
    return SemilinearSolution(traj, plan, slabs)


def solve_projected_semilinear(form, rhs, convex, u_a, grid, plan=None, theta=1.0,
                               tol=1e-9, samples=None, times=None, seed=0,
                               stepper=None):
    """Solve ``u' + A u = F(., Pu)`` from ``u_a`` in the set and confirm ``u`` stays inside.

    The pointwise criterion for ``(form, F o P, convex)`` is evaluated first
    and attached as ``solution.criterion``. Because ``Pu = u`` along the
    returned trajectory it also solves ``u' + A u = F(., u)``. Pass a
    ``stepper`` to reuse factorisations across many initial values.

    Raises
    ------
    PreconditionError
        If ``u_a`` is farther than ``tol`` from the set.
    InvarianceViolationError
        If some state leaves the set by more than ``tol``.
    """
    inside, violation = convex.contains(u_a, tol)
    if not inside:
        raise PreconditionError(f"initial value lies outside the set (distance {violation:.3e})")
    prhs = rhs.as_projected(True)
    criterion = check_pointwise_criterion(form, prhs, convex, samples=samples,
                                          times=times, seed=seed)
    sol = solve_semilinear(form, prhs, u_a, grid, plan, theta, convex, stepper=stepper)
    dists = np.array([convex.distance(u) for u in sol.trajectory.states])
    sol.criterion = criterion
    sol.max_violation = float(dists.max())
    if sol.max_violation > tol:
        k = int(np.argmax(dists))
        raise InvarianceViolationError(
            k, sol.max_violation,
            f"criterion/scheme inconsistency: state {k} is {sol.max_violation:.3e} "
            f"outside the set (pointwise criterion worst margin "
            f"{criterion.worst_margin:.3e})",
        )
    return sol

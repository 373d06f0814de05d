"""Invariance criteria for closed convex sets.

The central quantity is the *margin*::

    margin(t, v) = a(t, Pv, v - Pv) - <f(t), v - Pv>

which must be nonnegative for the set to be invariant. It can be tested
along one solution (:func:`check_criterion_along`) or over a battery of
states (:func:`check_pointwise_criterion`). For state-dependent right-hand
sides ``f`` is evaluated at ``(t, Pv)``.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .exceptions import ValidationError
from .space import row_quadratic

__all__ = [
    "CriterionReport",
    "PointwiseReport",
    "DistanceReport",
    "InvBoundResult",
    "rhs_value",
    "margin",
    "check_criterion_along",
    "check_pointwise_criterion",
    "default_battery",
    "distance_monitor",
    "invbound_check",
    "ftc_identity_check",
]


def rhs_value(rhs, t, state, space):
    """Evaluate a source term or a state-dependent right-hand side at ``(t, state)``."""
    if rhs is None:
        return np.zeros(space.dim)
    if getattr(rhs, "state_dependent", False):
        return np.asarray(rhs(t, state), dtype=float)
    return np.asarray(rhs(t), dtype=float)


def margin(form, rhs, convex, t, v):
    """``a(t, Pv, v - Pv) - <f(t), v - Pv>`` and the pieces it is built from."""
    pv, rest = convex.decompose(v)
    if not np.any(rest):
        return 0.0, pv, rest
    value = form.apply(t, pv, rest) - float(rest @ rhs_value(rhs, t, pv, form.space))
    return value, pv, rest


@dataclass
class CriterionReport:
    times: np.ndarray
    margins: np.ndarray
    distances: np.ndarray
    thresholds: np.ndarray
    tol: float

    @property
    def failing(self):
        return np.flatnonzero(self.margins < self.thresholds)

    @property
    def holds(self):
        return self.failing.size == 0

    @property
    def first_failure(self):
        idx = self.failing
        return int(idx[0]) if idx.size else None

    @property
    def violation_density(self):
        """Fraction of grid nodes where the criterion fails."""
        return self.failing.size / self.margins.size

    @property
    def worst_margin(self):
        return float(self.margins.min())

    def __bool__(self):
        return self.holds


def check_criterion_along(form, f, traj, convex, tol=1e-9):
    """Evaluate the margin at every grid node of ``traj``.

    The verdict holds iff ``margin_k >= -tol (1 + ||u_k||_V^2)`` for all ``k``.
    """
    if tol < 0:
        raise ValidationError("tol must be nonnegative")
    space = form.space
    n = len(traj)
    margins = np.zeros(n)
    distances = np.zeros(n)
    thresholds = np.zeros(n)
    for k, (t, u) in enumerate(zip(traj.times, traj.states)):
        m, _, rest = margin(form, f, convex, t, u)
        margins[k] = m
        distances[k] = space.h_norm(rest)
        thresholds[k] = -tol * (1.0 + space.v_norm(u) ** 2)
    return CriterionReport(traj.times.copy(), margins, distances, thresholds, tol)


def default_battery(convex, n_random=100, seed=0):
    """States used by the pointwise checks.

    Signed basis vectors, the lattice ``{1, 0, -1}^dim`` for ``dim <= 6``
    (enumerated in that order), ``n_random`` Gaussian vectors of unit H-norm
    and ``n_random`` perturbed points of the set.
    """
    space = convex.space
    dim = space.dim
    rng = np.random.default_rng(seed)
    eye = np.eye(dim)
    parts = [eye, -eye]
    if dim <= 6:
        parts.append(np.array(list(product((1.0, 0.0, -1.0), repeat=dim))))
    gauss = rng.standard_normal((n_random, dim))
    gauss /= np.sqrt(row_quadratic(gauss, space.h_gram))[:, None]
    parts.append(gauss)
    near = convex.sample(rng, n_random) + 0.5 * rng.standard_normal((n_random, dim))
    parts.append(near)
    return np.vstack(parts)


@dataclass
class PointwiseReport:
    times: np.ndarray
    samples: np.ndarray
    margins: np.ndarray  # shape (len(times), len(samples))
    thresholds: np.ndarray  # shape (len(samples),)
    tol: float
    assumptions: list = field(default_factory=list)

    @property
    def worst_margin(self):
        return float(self.margins.min())

    @property
    def worst(self):
        """``(margin, time, sample)`` of the worst offender."""
        i, j = np.unravel_index(np.argmin(self.margins), self.margins.shape)
        return float(self.margins[i, j]), float(self.times[i]), self.samples[j]

    @property
    def holds(self):
        return bool(np.all(self.margins >= self.thresholds[None, :]))

    def __bool__(self):
        return self.holds


def _default_times(form, count=9):
    if form.autonomous:
        return np.array([form.interval[0]])
    return np.linspace(*form.interval, count)


def check_pointwise_criterion(form, f, convex, samples=None, times=None,
                              tol=1e-12, n_random=100, seed=0):
    """Worst margin over ``samples x times``.

    A nonnegative worst margin is the sufficient condition for invariance of
    every solution; it can only be sampled, never proven, here.
    """
    if samples is None:
        samples = default_battery(convex, n_random, seed)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise ValidationError("need at least one sample")
    times = _default_times(form) if times is None else np.atleast_1d(
        np.asarray(times, dtype=float))
    space = form.space
    projected, rests = convex.decompose_many(samples)
    active = np.flatnonzero(np.any(rests != 0.0, axis=1))
    pv, rest = projected[active], rests[active]
    state_dependent = getattr(f, "state_dependent", False)
    margins = np.zeros((times.size, samples.shape[0]))
    for i, t in enumerate(times):
        if active.size == 0:
            break
        acted = np.asarray(form.operator(t) @ pv.T).T
        if state_dependent:
            forced = np.array([rhs_value(f, t, p, space) for p in pv])
        else:
            forced = rhs_value(f, t, None, space)[None, :]
        margins[i, active] = np.einsum("ij,ij->i", rest, acted - forced)
    thresholds = -tol * (1.0 + row_quadratic(samples, space.v_gram))
    return PointwiseReport(times, samples, margins, thresholds, tol)


@dataclass
class DistanceReport:
    times: np.ndarray
    distances: np.ndarray
    bound: np.ndarray
    slack: float
    d0: float

    @property
    def excess(self):
        """``(distance_k - bound_k) / (1 + d0)``."""
        return (self.distances - self.bound) / (1.0 + self.d0)

    @property
    def max_excess(self):
        return float(self.excess.max())

    @property
    def holds(self):
        return bool(np.all(self.distances <= self.bound + self.slack))

    def __bool__(self):
        return self.holds


def distance_monitor(traj, convex, omega_stab, d0=None, c_slack=10.0):
    """Compare ``||u_k - Pu_k||_H`` with ``d0 exp(omega_stab (t_k - a))``.

    The discrete verdict allows ``slack = c_slack * tau * (1 + d0)``.
    """
    space = convex.space
    distances = np.array([space.h_norm(u - convex.project(u)) for u in traj.states])
    if d0 is None:
        d0 = distances[0]
    times = traj.times
    bound = d0 * np.exp(omega_stab * (times - times[0]))
    slack = c_slack * traj.grid.tau * (1.0 + d0)
    return DistanceReport(times, distances, bound, slack, float(d0))


@dataclass
class InvBoundResult:
    holds: bool
    hypothesis_holds: bool
    lhs: float
    rhs: float

    def __bool__(self):
        return self.holds


def invbound_check(form, v, h, convex, times=None, constants=None, rtol=1e-9):
    """Check the V-bound on ``v - Pv`` implied by a one-sided margin.

    If ``a(t, Pv, v - Pv) >= <h, v - Pv>`` holds at the sampled times, then::

        ||v - Pv||_V^2 <= (M^2 ||v||_V^2 + ||h||_{V'}^2) / alpha^2
                          + (2 omega / alpha) ||v - Pv||_H^2

    When the hypothesis fails the result is vacuously true and flagged.
    """
    c = constants if constants is not None else form.constants
    space = form.space
    v = space._vec(v)
    h = space._vec(h, "h")
    pv, rest = convex.decompose(v)
    times = _default_times(form) if times is None else np.atleast_1d(times)
    scale = 1.0 + space.v_norm(v) ** 2
    hyp = all(
        form.apply(t, pv, rest) - float(rest @ h) >= -1e-12 * scale for t in times
    )
    lhs = space.v_norm(rest) ** 2
    rhs = ((c.m_bound ** 2 * space.v_norm(v) ** 2 + space.dual_norm(h) ** 2)
           / c.alpha ** 2 + 2.0 * c.omega_ell / c.alpha * space.h_norm(rest) ** 2)
    if not hyp:
        return InvBoundResult(True, False, lhs, rhs)
    return InvBoundResult(bool(lhs <= rhs * (1.0 + rtol) + 1e-14), True, lhs, rhs)


def _dyadic_pairs(steps, max_level=8, prefixes=True):
    pairs = {(0, k) for k in range(1, steps + 1)} if prefixes else set()
    level = 0
    while level <= max_level and steps % (2 ** level) == 0:
        width = steps // 2 ** level
        pairs.update((j * width, (j + 1) * width) for j in range(2 ** level))
        level += 1
    return sorted(pairs)


def ftc_identity_check(traj, convex, quadrature="left"):
    """Defect of ``||u~(t)||^2 - ||u~(s)||^2 = 2 int_s^t <u', u~>`` with ``u~ = u - Pu``.

    Checked on all pairs ``(a, t_k)`` and on dyadic subintervals. With
    ``quadrature='left'`` the integrand uses ``u~_k``, which gives a defect of
    order ``tau``. ``'midpoint'`` uses ``(u~_k + u~_{k+1}) / 2``; it is exact
    wherever ``P`` is locally affine, so only steps where ``Pu`` changes regime
    contribute.
    """
    if traj.grid.steps < 2:
        raise ValidationError("need at least two steps")
    if quadrature not in ("left", "midpoint"):
        raise ValidationError(f"unknown quadrature {quadrature!r}")
    space = traj.space
    rest = traj.states - convex.project_many(traj.states)
    energy = row_quadratic(rest, space.h_gram)
    weights = rest[:-1] if quadrature == "left" else 0.5 * (rest[:-1] + rest[1:])
    incr = 2.0 * traj.grid.tau * np.einsum("ij,ij->i", traj.derivative_duals(), weights)
    cum = np.concatenate([[0.0], np.cumsum(incr)])
    worst = 0.0
    for s, t in _dyadic_pairs(traj.grid.steps):
        worst = max(worst, abs(energy[t] - energy[s] - (cum[t] - cum[s])))
    return float(worst)

"""Linear Cauchy problems ``u' + A(t) u = f``, ``u(a) = u_a`` by the theta-scheme.

Each step solves::

    (H/tau + theta A(s)) u_{k+1} = (H/tau - (1 - theta) A(s)) u_k + f(s),

with ``s = t_k + theta tau`` and ``H`` the H-Gram matrix. The discrete time
derivative is represented in ``V'`` as ``H (u_{k+1} - u_k) / tau``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import GridError, StepFailureError, ValidationError
from .space import row_quadratic

__all__ = [
    "TimeGrid",
    "Trajectory",
    "ThetaStepper",
    "solve_linear",
    "mr_norm",
    "l2_h_norm_sq",
    "energy_identity_residual",
    "estimate_solution_norm",
]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = a + k tau`` with ``tau = (b - a) / steps``."""

    a: float
    b: float
    steps: int

    def __post_init__(self):
        if not self.a < self.b:
            raise GridError(f"need a < b, got [{self.a}, {self.b}]")
        if int(self.steps) != self.steps or self.steps < 1:
            raise GridError(f"steps must be a positive integer, got {self.steps}")

    @property
    def tau(self):
        return (self.b - self.a) / self.steps

    @property
    def nodes(self):
        return self.a + self.tau * np.arange(self.steps + 1)

    def t(self, k):
        return self.a + k * self.tau

    def index(self, t):
        """Index of the node at ``t``; raises if ``t`` is not a node."""
        k = int(round((t - self.a) / self.tau))
        if not 0 <= k <= self.steps or abs(self.t(k) - t) > 1e-9 * self.tau:
            raise GridError(f"t={t} is not a grid node")
        return k

    def sub(self, k0, k1):
        """The grid restricted to nodes ``k0..k1``."""
        return TimeGrid(self.t(k0), self.t(k1), k1 - k0)


class Trajectory:
    """States ``u_0..u_N`` on a :class:`TimeGrid`.

    ``offset`` is the index of the first state on the parent grid that the
    stepper used; it is 0 unless the trajectory is a slab of a larger run.
    """

    def __init__(self, grid, states, space, offset=0):
        states = np.asarray(states, dtype=float)
        if states.shape != (grid.steps + 1, space.dim):
            raise ValidationError(
                f"states have shape {states.shape}, expected "
                f"({grid.steps + 1}, {space.dim})"
            )
        self.grid = grid
        self.states = states
        self.space = space
        self.offset = offset

    @property
    def times(self):
        return self.grid.nodes

    @property
    def final(self):
        return self.states[-1]

    def at(self, t):
        return self.states[self.grid.index(t)]

    def derivative_duals(self):
        """Discrete derivatives ``H (u_{k+1} - u_k) / tau``, shape ``(N, dim)``."""
        diffs = np.diff(self.states, axis=0) / self.grid.tau
        return diffs @ self.space.h_gram

    def __len__(self):
        return self.states.shape[0]

    def __repr__(self):
        return (f"Trajectory([{self.grid.a}, {self.grid.b}], steps={self.grid.steps}, "
                f"dim={self.space.dim})")


def _bandwidth(mat):
    coo = mat.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.abs(coo.row - coo.col).max())


class _Factor:
    """Solver for one step matrix.

    Narrow-band sparse matrices (the 1D element case) go through a banded
    solve, other sparse matrices through ``splu`` and dense ones through LU.
    """

    banded_limit = 4

    def __init__(self, mat, step):
        self._step = step
        try:
            if sp.issparse(mat):
                width = _bandwidth(mat)
                if width <= self.banded_limit:
                    self._init_banded(mat, width)
                else:
                    self._lu = spla.splu(mat.tocsc())
                    self._solve = self._lu.solve
            else:
                with warnings.catch_warnings():
                    # an exactly singular pivot is reported below as a step failure
                    warnings.simplefilter("ignore", sla.LinAlgWarning)
                    lu = sla.lu_factor(mat, check_finite=True)
                if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * np.abs(mat).max():
                    raise StepFailureError(step)
                self._solve = lambda rhs: sla.lu_solve(lu, rhs)
        except RuntimeError:
            raise StepFailureError(step) from None
        except (np.linalg.LinAlgError, ValueError):
            raise StepFailureError(step) from None

    def _init_banded(self, mat, width):
        dia = mat.todia()
        n = mat.shape[0]
        ab = np.zeros((2 * width + 1, n))
        for offset, row in zip(dia.offsets, dia.data):
            # dia rows are indexed by column; banded storage puts A[i, j] at ab[w + i - j, j]
            ab[width - offset] += row[:n]
        if not np.all(np.isfinite(ab)):
            raise StepFailureError(self._step)
        self._solve = lambda rhs: sla.solve_banded((width, width), ab, rhs,
                                                   check_finite=False)

    def solve(self, rhs):
        try:
            return self._solve(rhs)
        except np.linalg.LinAlgError:
            raise StepFailureError(self._step) from None


class ThetaStepper:
    """Theta-scheme on a fixed grid with cached step factorisations.

    Repeated solves on the same grid (Picard iterations, restarts) reuse the
    LU factors of ``H/tau + theta A(t_k + theta tau)``.
    """

    max_cache = 20000

    def __init__(self, form, grid, theta=1.0):
        if not 0.5 <= theta <= 1.0:
            raise ValidationError(f"theta must lie in [1/2, 1], got {theta}")
        lo, hi = form.interval
        span = hi - lo
        if grid.a < lo - 1e-12 * span or grid.b > hi + 1e-12 * span:
            raise GridError(f"grid [{grid.a}, {grid.b}] leaves form interval {form.interval}")
        self.form = form
        self.grid = grid
        self.theta = float(theta)
        self.space = form.space
        self._h = self.space.h_gram_sparse if form.sparse else self.space.h_gram
        self._cache = {}

    def stage_time(self, k):
        return self.grid.t(k) + self.theta * self.grid.tau

    def _entry(self, k):
        key = 0 if self.form.autonomous else k
        entry = self._cache.get(key)
        if entry is None:
            tau = self.grid.tau
            a_mat = self.form.operator(self.stage_time(k))
            lhs = self._h / tau + self.theta * a_mat
            explicit = None
            if self.theta < 1.0:
                explicit = self._h / tau - (1.0 - self.theta) * a_mat
            entry = (_Factor(lhs, k), explicit)
            if len(self._cache) < self.max_cache:
                self._cache[key] = entry
        return entry

    def step(self, k, u, f_val=None):
        factor, explicit = self._entry(k)
        if explicit is None:
            rhs = self._h @ u / self.grid.tau
        else:
            rhs = explicit @ u
        if f_val is not None:
            rhs = rhs + f_val
        out = factor.solve(np.asarray(rhs, dtype=float).ravel())
        if not np.all(np.isfinite(out)):
            raise StepFailureError(k, "non-finite state")
        return out

    def run(self, u_start, k0, k1, forcing=None):
        """States ``u_{k0}..u_{k1}`` starting from ``u_start``.

        ``forcing(k)`` returns the source at stage ``t_k + theta tau`` or
        ``None`` for zero.
        """
        states = np.empty((k1 - k0 + 1, self.space.dim))
        states[0] = u_start
        for j, k in enumerate(range(k0, k1)):
            f_val = None if forcing is None else forcing(k)
            states[j + 1] = self.step(k, states[j], f_val)
        return states

    def trajectory(self, u_start, k0=0, k1=None, forcing=None):
        k1 = self.grid.steps if k1 is None else k1
        states = self.run(u_start, k0, k1, forcing)
        return Trajectory(self.grid.sub(k0, k1), states, self.space, offset=k0)


def _source_forcing(stepper, f):
    if f is None:
        return None
    return lambda k: np.asarray(f(stepper.stage_time(k)), dtype=float)


def solve_linear(form, f, u_a, grid, theta=1.0, stepper=None):
    """Solve ``u' + A u = f`` on ``grid`` with ``u(a) = u_a``.

    Parameters
    ----------
    form : NonAutonomousForm
    f : callable or None
        Source term ``t -> V'`` coefficient vector; ``None`` means zero.
    u_a : array_like
        Initial value.
    grid : TimeGrid
    theta : float
        1 is implicit Euler (the default), 1/2 is Crank-Nicolson.
    stepper : ThetaStepper, optional
        Reuse cached factorisations from an earlier solve on the same grid.
    """
    if stepper is None:
        stepper = ThetaStepper(form, grid, theta)
    u_a = form.space._vec(u_a, "u_a")
    return stepper.trajectory(u_a, forcing=_source_forcing(stepper, f))


def _dual_norms_sq(space, duals):
    solved = sla.cho_solve(space._v_factor, np.atleast_2d(duals).T)
    return np.einsum("ij,ji->i", np.atleast_2d(duals), solved)


def _v_norms_sq(space, states):
    return row_quadratic(states, space.v_gram)


def _h_norms_sq(space, states):
    return row_quadratic(states, space.h_gram)


def mr_norm(traj):
    """Discrete ``||u||_MR``: derivative in ``L2(V')`` plus ``L2(V)``, left-endpoint sums."""
    tau = traj.grid.tau
    space = traj.space
    deriv = _dual_norms_sq(space, traj.derivative_duals()).sum()
    value = _v_norms_sq(space, traj.states[:-1]).sum()
    return float(np.sqrt(max(tau * (deriv + value), 0.0)))


def l2_h_norm_sq(traj):
    """Left-endpoint ``||u||^2_{L2(I;H)}``."""
    return float(traj.grid.tau * _h_norms_sq(traj.space, traj.states[:-1]).sum())


def energy_identity_residual(traj):
    """Largest per-step defect of ``d||u||_H^2 = 2 <u', u>`` (midpoint pairing).

    The discrete identity is exact, so the result measures rounding only.
    """
    tau = traj.grid.tau
    states = traj.states
    sq = _h_norms_sq(traj.space, states)
    mids = 0.5 * (states[1:] + states[:-1])
    pair = np.einsum("ij,ij->i", traj.derivative_duals(), mids)
    return float(np.abs(np.diff(sq) - 2.0 * tau * pair).max())


def _low_modes(form, count):
    sym = form.dense_operator(form.interval[0])
    sym = 0.5 * (sym + sym.T)
    dim = form.space.dim
    count = min(count, dim)
    _, vecs = sla.eigh(sym, form.space.h_gram, subset_by_index=[0, count - 1])
    return vecs


def _high_modes(space, count):
    """Directions maximising ``||v||_V / ||v||_H``."""
    count = min(count, space.dim)
    _, vecs = sla.eigh(space.v_gram, space.h_gram,
                       subset_by_index=[space.dim - count, space.dim - 1])
    return vecs


# (probe kind, direction family) cycled over the probes; kinds: 0 initial value
# only, 1 source constant in time, 2 source varying per step, 3 both
_PROBE_PLAN = [(0, "noise"), (1, "low"), (2, "high"), (3, "noise"),
               (0, "high"), (1, "noise"), (2, "low"), (3, "high")]


def estimate_solution_norm(form, grid, probes=8, theta=1.0, seed=0, forcing=True):
    """Randomised estimate of the constant ``c_a`` in the maximal regularity bound.

    Probes the affine solution map ``(f, u_a) -> u`` and returns twice the
    largest observed ``||u||^2_MR / (||f||^2_{L2(V')} + ||u_a||_H^2)``.
    Spatial directions are random combinations of the low modes of ``A(a)``,
    of the most oscillatory directions of ``vGram`` against ``hGram``, or
    white noise. The oscillatory ones matter: the left-endpoint sum picks up
    ``tau ||u_a||_V^2``, which dominates once ``tau`` times the top eigenvalue
    is large. With ``forcing=False`` only initial values are probed.
    """
    if probes < 4:
        raise ValidationError("need at least 4 probes")
    space = form.space
    rng = np.random.default_rng(seed)
    stepper = ThetaStepper(form, grid, theta)
    families = {"low": _low_modes(form, 3), "high": _high_modes(space, 3)}
    tau = grid.tau

    def direction(family):
        if family == "noise":
            return rng.standard_normal(space.dim)
        modes = families[family]
        return modes @ rng.standard_normal(modes.shape[1])

    best = 0.0
    for i in range(probes):
        kind, family = _PROBE_PLAN[i % len(_PROBE_PLAN)]
        if not forcing:
            kind = 0
        u_a = np.zeros(space.dim)
        f_vals = None
        if kind in (0, 3):
            u_a = direction(family)
            u_a /= space.h_norm(u_a)
        if kind == 1:
            f_vals = np.tile(space.embed(direction(family)), (grid.steps, 1))
        elif kind in (2, 3):
            f_vals = np.array([space.embed(direction(family)) for _ in range(grid.steps)])
        if f_vals is not None:
            f_vals /= np.sqrt(tau * _dual_norms_sq(space, f_vals).sum())
        data = space.h_norm(u_a) ** 2
        if f_vals is not None:
            data += tau * _dual_norms_sq(space, f_vals).sum()
        if data == 0.0:
            continue
        forcing_fn = None if f_vals is None else (lambda k, fv=f_vals: fv[k])
        traj = stepper.trajectory(u_a, forcing=forcing_fn)
        best = max(best, mr_norm(traj) ** 2 / data)
    return 2.0 * best

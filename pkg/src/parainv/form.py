"""Non-autonomous bounded H-elliptic forms and their constants.

A form is stored through its operator matrices: ``a(t, v, w) = w @ A(t) @ v``.
Two families are provided, P1 diffusion forms on the interval and forms
given by an arbitrary matrix-valued function of time.

The real field is used throughout, so every real part in the usual
statements is the identity here.
"""

from collections import OrderedDict
from dataclasses import dataclass, replace
from numbers import Real

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import minimize_scalar

from .exceptions import DomainError, NotEllipticError, ValidationError

__all__ = [
    "FormConstants",
    "NonAutonomousForm",
    "diffusion_form",
    "matrix_form",
    "estimate_constants",
    "certify_constants",
    "apply_form",
]

ALPHA_SAFETY = 0.95
OMEGA_CAP = 1e6


@dataclass(frozen=True)
class FormConstants:
    """Boundedness and ellipticity constants of a form.

    Attributes
    ----------
    m_bound : float
        ``|a(t,v,w)| <= m_bound ||v||_V ||w||_V``.
    alpha, omega_ell : float
        ``a(t,v,v) + omega_ell ||v||_H^2 >= alpha ||v||_V^2`` with ``alpha > 0``.
    omega_stab : float
        ``a(t,v,v) >= -omega_stab ||v||_H^2``; negative for coercive forms.
        It is the growth rate of the distance bound in
        :func:`parainv.invariance.distance_monitor`.
    """

    m_bound: float
    alpha: float
    omega_ell: float
    omega_stab: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise NotEllipticError(f"alpha must be positive, got {self.alpha}")
        if self.m_bound < 0:
            raise ValidationError(f"m_bound must be nonnegative, got {self.m_bound}")


class NonAutonomousForm:
    """``t -> A(t)`` on ``[a, b]`` over a :class:`DiscreteSpace`.

    ``operator_at`` must be a pure function of ``t`` returning a dense array
    or a scipy sparse matrix of shape ``(dim, dim)``. The most recently used
    matrices are cached by ``t``, so callers must not modify them in place.
    """

    recent_size = 64

    def __init__(self, space, operator_at, interval=(0.0, 1.0), constants=None,
                 autonomous=False, name="form"):
        a, b = map(float, interval)
        if not a < b:
            raise ValidationError(f"interval must satisfy a < b, got {interval}")
        self.space = space
        self._operator_at = operator_at
        self.interval = (a, b)
        self.autonomous = bool(autonomous)
        self.name = name
        self._constants = constants
        self._cached = None
        self._recent = OrderedDict()
        if self.autonomous:
            self._cached = self._checked(operator_at(a))

    def _checked(self, mat):
        if not sp.issparse(mat):
            mat = np.atleast_2d(np.asarray(mat, dtype=float))
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"operator has shape {mat.shape}, expected "
                f"({self.space.dim}, {self.space.dim})"
            )
        return mat

    @property
    def sparse(self):
        return sp.issparse(self.operator(self.interval[0]))

    def operator(self, t):
        """The matrix ``A(t)``."""
        a, b = self.interval
        span = b - a
        if not (a - 1e-12 * span <= t <= b + 1e-12 * span):
            raise DomainError(f"t={t} outside [{a}, {b}]")
        if self._cached is not None:
            return self._cached
        t = float(t)
        mat = self._recent.get(t)
        if mat is None:
            mat = self._checked(self._operator_at(t))
            self._recent[t] = mat
            if len(self._recent) > self.recent_size:
                self._recent.popitem(last=False)
        return mat

    def dense_operator(self, t):
        mat = self.operator(t)
        return mat.toarray() if sp.issparse(mat) else mat

    def apply(self, t, v, w):
        """``a(t, v, w) = w @ A(t) @ v``."""
        v = self.space._vec(v)
        w = self.space._vec(w, "w")
        return float(w @ (self.operator(t) @ v))

    def action(self, t, v):
        """``A(t) v`` as an element of ``V'``."""
        return np.asarray(self.operator(t) @ v).ravel()

    @property
    def constants(self):
        if self._constants is None:
            self._constants = estimate_constants(self)
        return self._constants

    def with_constants(self, constants=None, **overrides):
        """Copy of this form with user-certified constants."""
        base = constants if constants is not None else self.constants
        new = NonAutonomousForm(self.space, self._operator_at, self.interval,
                                replace(base, **overrides), self.autonomous,
                                self.name)
        return new

    def __repr__(self):
        return (f"NonAutonomousForm({self.name!r}, interval={self.interval}, "
                f"dim={self.space.dim})")


def apply_form(form, t, v, w):
    return form.apply(t, v, w)


def _diffusion_diagonals(mesh, kappa_cells):
    """Main and off diagonals of ``sum_c kappa_c K_c`` on the free nodes."""
    h = mesh.h
    main = np.zeros(mesh.n + 1)
    main[:-1] += kappa_cells
    main[1:] += kappa_cells
    off = -kappa_cells
    if mesh.bc == "dirichlet":
        main, off = main[1:-1], off[1:-1]
    return main / h, off / h


def diffusion_form(space, kappa, interval=(0.0, 1.0), kappa_bounds=None,
                   n_time_samples=65):
    """P1 form ``a(t,v,w) = int kappa(t,x) v' w' dx`` on the unit interval.

    Parameters
    ----------
    space : DiscreteSpace
        Must come from :func:`parainv.space.build_interval_space`.
    kappa : float or callable
        Diffusion coefficient ``kappa(t, x)``, vectorised in ``x``. It is
        sampled at cell midpoints, which is exact for cellwise constant
        coefficients. A plain number gives an autonomous form.
    kappa_bounds : (float, float), optional
        Certified ``(kappa_min, kappa_max)``. Otherwise sampled on a time grid
        of ``n_time_samples`` points times the cell midpoints, with the
        extremes refined between neighbouring time samples.

    Returns
    -------
    NonAutonomousForm
        With ``m_bound = kappa_max`` and ``alpha = omega_ell = kappa_min``;
        ``omega_stab`` is ``-kappa_min`` times the smallest eigenvalue of the
        unit stiffness matrix relative to ``hGram``.
    """
    mesh = space.mesh
    if mesh is None:
        raise ValidationError("diffusion_form needs a finite element space")
    mids = mesh.midpoints
    autonomous = isinstance(kappa, Real)
    if autonomous:
        const = float(kappa)
        kappa_fn = lambda t, x: np.full_like(x, const)  # noqa: E731
    else:
        kappa_fn = kappa

    def kappa_cells(t):
        return np.broadcast_to(np.asarray(kappa_fn(t, mids), dtype=float),
                               mids.shape)

    if kappa_bounds is None:
        ts = np.linspace(*interval, 1 if autonomous else n_time_samples)
        samples = np.array([kappa_cells(t) for t in ts])
        kmax = _refine_max(lambda t: kappa_cells(t).max(), ts, samples.max(axis=1))
        kmin = -_refine_max(lambda t: -kappa_cells(t).min(), ts, -samples.min(axis=1))
    else:
        kmin, kmax = map(float, kappa_bounds)
    if not kmin > 0:
        raise NotEllipticError(f"diffusion coefficient not positive (min {kmin})")

    def operator_at(t):
        k = kappa_cells(t)
        if np.any(k <= 0):
            raise NotEllipticError(f"diffusion coefficient not positive at t={t}")
        main, off = _diffusion_diagonals(mesh, k)
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")

    ones = np.ones(mesh.n)
    main, off = _diffusion_diagonals(mesh, ones)
    base = sp.diags([off, main, off], [-1, 0, 1]).toarray()
    lam_min = sla.eigh(base, space.h_gram, eigvals_only=True,
                       subset_by_index=[0, 0])[0]
    constants = FormConstants(m_bound=kmax, alpha=kmin, omega_ell=kmin,
                              omega_stab=float(-kmin * lam_min))
    form = NonAutonomousForm(space, operator_at, interval, constants,
                             autonomous=autonomous, name="diffusion")
    form.kappa = kappa_fn
    form.kappa_bounds = (kmin, kmax)
    form.unit_stiffness = base
    return form


def matrix_form(space, operator, interval=(0.0, 1.0), constants=None,
                n_samples=33):
    """Form given by a matrix or a callable ``t -> matrix``.

    Constants are estimated with :func:`estimate_constants` unless given.
    """
    if callable(operator):
        op, autonomous = operator, False
    else:
        mat = np.atleast_2d(np.asarray(operator, dtype=float))
        op, autonomous = (lambda t: mat), True
    form = NonAutonomousForm(space, op, interval, constants,
                             autonomous=autonomous, name="matrix")
    if constants is None:
        form._constants = estimate_constants(form, n_samples)
    return form


def _sample_times(form, n_samples):
    if n_samples < 2:
        raise ValidationError("n_samples must be at least 2")
    if form.autonomous:
        return np.array([form.interval[0]])
    return np.linspace(*form.interval, n_samples)


def _refine_max(fn, times, values):
    """Raise the sampled maximum of ``fn`` by a bounded search around its best sample."""
    i = int(np.argmax(values))
    best = float(values[i])
    if times.size < 2:
        return best
    lo, hi = times[max(i - 1, 0)], times[min(i + 1, times.size - 1)]
    res = minimize_scalar(lambda t: -fn(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * max(hi - lo, 1.0)})
    return max(best, float(-res.fun))


def estimate_constants(form, n_samples=33):
    """Sample-based estimate of ``(M, alpha, omega_ell, omega_stab)``.

    ``omega_stab`` is the largest ``-lambda_min`` of ``Sym A(t)`` relative to
    ``hGram`` over the sampled times. Coercive forms (``omega_stab < 0``) get
    ``omega_ell = 0``; otherwise ``omega_ell = omega_stab + 1``. ``alpha`` is
    the smallest eigenvalue of ``Sym A(t) + omega_ell hGram`` relative to
    ``vGram``, capped by the largest V-Rayleigh quotient of ``Sym A(t)`` (a
    shift alone never makes a form elliptic) and multiplied by 0.95.

    Each extreme is refined by a bounded scalar search between the
    neighbours of its worst sample, which catches peaks that fall between
    grid points of smooth coefficients.

    Raises
    ------
    NotEllipticError
        If the capped ``alpha`` is not positive for any shift up to 1e6.
    """
    space = form.space
    hg, vg = space.h_gram, space.v_gram
    lv = np.linalg.cholesky(vg)
    times = _sample_times(form, n_samples)

    def sym(t):
        mat = form.dense_operator(t)
        return 0.5 * (mat + mat.T)

    def op_norm(t):
        mat = form.dense_operator(t)
        scaled = sla.solve_triangular(lv, sla.solve_triangular(lv, mat.T, lower=True).T,
                                      lower=True)
        return float(np.linalg.norm(scaled, 2))

    def neg_low_h(t):
        return float(-sla.eigh(sym(t), hg, eigvals_only=True, subset_by_index=[0, 0])[0])

    def top_v(t):
        return float(sla.eigh(sym(t), vg, eigvals_only=True)[-1])

    m_bound = _refine_max(op_norm, times, np.array([op_norm(t) for t in times]))
    omega_stab = _refine_max(neg_low_h, times, np.array([neg_low_h(t) for t in times]))
    rayleigh_cap = max(top_v(t) for t in times)
    if not rayleigh_cap > 0:
        raise NotEllipticError("form is not elliptic: a(t, v, v) <= 0 for all v")
    spread = max(abs(omega_stab), rayleigh_cap, 1.0)
    coercive = omega_stab < -1e-8 * spread
    shift = 0.0 if coercive else omega_stab + 1.0

    def low_v(t, shift):
        return float(sla.eigh(sym(t) + shift * hg, vg, eigvals_only=True,
                              subset_by_index=[0, 0])[0])

    while True:
        lows = np.array([low_v(t, shift) for t in times])
        alpha = min(-_refine_max(lambda t: -low_v(t, shift), times, -lows), rayleigh_cap)
        if alpha > 0:
            break
        shift = 2.0 * max(shift, 1.0)
        if shift > OMEGA_CAP:
            raise NotEllipticError(f"no alpha > 0 for omega <= {OMEGA_CAP:g}")
    return FormConstants(m_bound=m_bound, alpha=ALPHA_SAFETY * float(alpha),
                         omega_ell=float(shift), omega_stab=omega_stab)


def certify_constants(form, constants=None, times=None, n_vectors=1000, seed=0):
    """Check the constant inequalities on a random battery.

    Returns a dict of worst normalised margins; all of them must be
    ``>= -1e-9`` for the constants to certify themselves.
    """
    c = constants if constants is not None else form.constants
    space = form.space
    rng = np.random.default_rng(seed)
    if times is None:
        times = rng.uniform(*form.interval, size=n_vectors)
    else:
        times = np.resize(np.asarray(times, dtype=float), n_vectors)
    worst = {"coercive": np.inf, "bounded": np.inf, "stab": np.inf}
    for t in times:
        v, w = rng.standard_normal((2, space.dim))
        vv = space.v_norm(v) ** 2
        hh = space.h_norm(v) ** 2
        avv = form.apply(t, v, v)
        worst["coercive"] = min(worst["coercive"],
                                (avv + c.omega_ell * hh - c.alpha * vv) / vv)
        worst["stab"] = min(worst["stab"], (avv + c.omega_stab * hh) / hh)
        bound = c.m_bound * space.v_norm(v) * space.v_norm(w)
        worst["bounded"] = min(worst["bounded"],
                               (bound - abs(form.apply(t, v, w))) / bound)
    return worst

"""Discrete Gelfand triples ``V -> H -> V'``.

A :class:`DiscreteSpace` carries two symmetric positive definite Gram
matrices on a common coefficient space:

* ``h_gram`` defines ``(u | v)_H = v @ h_gram @ u``,
* ``v_gram`` defines ``||v||_V**2 = v @ v_gram @ v``.

Elements of the antidual ``V'`` are plain coefficient arrays ``g`` paired with
``v`` through ``<g, v> = v @ g``; the embedding ``H -> V'`` is ``h -> h_gram @ h``.
"""

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .exceptions import InvalidMeshError, ValidationError

__all__ = ["DiscreteSpace", "Mesh", "build_interval_space", "matrix_space"]

_SYM_RTOL = 1e-12


class Mesh:
    """Uniform P1 mesh of (0, 1).

    ``nodes`` holds all mesh nodes, ``dofs`` the indices of the nodes that
    carry unknowns (all of them for Neumann, the interior for Dirichlet).
    """

    def __init__(self, n, bc):
        self.n = int(n)
        self.bc = bc
        self.h = 1.0 / self.n
        self.nodes = np.linspace(0.0, 1.0, self.n + 1)
        if bc == "dirichlet":
            self.dofs = np.arange(1, self.n)
        else:
            self.dofs = np.arange(self.n + 1)
        self.midpoints = 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @property
    def x(self):
        return self.nodes[self.dofs]

    def restrict(self, full):
        """Drop eliminated rows/columns from a matrix on all nodes."""
        idx = self.dofs
        if sp.issparse(full):
            return full.tocsr()[idx][:, idx]
        full = np.asarray(full)
        if full.ndim == 1:
            return full[idx]
        return full[np.ix_(idx, idx)]

    def extend(self, values):
        """Nodal values on all nodes, zero at eliminated Dirichlet nodes."""
        out = np.zeros(self.n + 1)
        out[self.dofs] = values
        return out

    def __repr__(self):
        return f"Mesh(n={self.n}, bc={self.bc!r})"


def _check_spd(name, mat):
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {mat.shape}")
    scale = max(np.abs(mat).max(), np.finfo(float).tiny)
    if np.abs(mat - mat.T).max() > _SYM_RTOL * scale:
        raise ValidationError(f"{name} is not symmetric")
    try:
        factor = sla.cho_factor(mat, lower=True)
    except np.linalg.LinAlgError:
        raise ValidationError(f"{name} is not positive definite") from None
    return mat, factor


class DiscreteSpace:
    """Immutable discrete triple with precomputed Cholesky factors.

    Use :func:`build_interval_space` or :func:`matrix_space` rather than
    calling the constructor directly.
    """

    def __init__(self, h_gram, v_gram, lumped=False, mesh=None):
        h_gram, self._h_factor = _check_spd("hGram", h_gram)
        v_gram, self._v_factor = _check_spd("vGram", v_gram)
        if h_gram.shape != v_gram.shape:
            raise ValidationError(
                f"hGram and vGram differ in shape: {h_gram.shape} vs {v_gram.shape}"
            )
        h_gram.setflags(write=False)
        v_gram.setflags(write=False)
        self.h_gram = h_gram
        self.v_gram = v_gram
        self.lumped = bool(lumped)
        self.mesh = mesh
        self.dim = h_gram.shape[0]
        self.diagonal_h = not np.any(h_gram - np.diag(np.diag(h_gram)))
        # largest sqrt of the generalized eigenvalues of (hGram, vGram)
        top = sla.eigh(h_gram, v_gram, eigvals_only=True,
                       subset_by_index=[self.dim - 1, self.dim - 1])
        self.c_emb = float(np.sqrt(top[0]))
        self._h_sparse = sp.csr_matrix(h_gram)

    # -- helpers ---------------------------------------------------------
    def _vec(self, v, name="v"):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValidationError(
                f"{name} has shape {v.shape}, expected ({self.dim},)"
            )
        return v

    @property
    def x(self):
        """Coordinates of the degrees of freedom (FEM mode only)."""
        if self.mesh is None:
            raise ValidationError("matrix-mode space has no node coordinates")
        return self.mesh.x

    @property
    def h_gram_sparse(self):
        return self._h_sparse

    def interpolate(self, func):
        """Nodal interpolant of ``func(x)`` on the degrees of freedom."""
        return np.asarray(func(self.x), dtype=float) * np.ones(self.dim)

    # -- norms and pairings ---------------------------------------------
    def h_inner(self, u, v):
        return float(self._vec(v) @ self.h_gram @ self._vec(u, "u"))

    def h_norm(self, v):
        v = self._vec(v)
        return float(np.sqrt(max(v @ self.h_gram @ v, 0.0)))

    def v_norm(self, v):
        v = self._vec(v)
        return float(np.sqrt(max(v @ self.v_gram @ v, 0.0)))

    def dual_norm(self, g):
        """``sup <g, v> / ||v||_V``, computed with one Cholesky solve."""
        g = self._vec(g, "g")
        return float(np.sqrt(max(g @ sla.cho_solve(self._v_factor, g), 0.0)))

    def pair(self, g, v):
        return float(self._vec(v) @ self._vec(g, "g"))

    def embed(self, h):
        """Image of ``h`` in ``V'`` under ``h -> (h | .)_H``."""
        return self.h_gram @ self._vec(h, "h")

    def riesz_h(self, g):
        """Inverse of :meth:`embed`."""
        return sla.cho_solve(self._h_factor, self._vec(g, "g"))

    def riesz_v(self, g):
        """``vGram^{-1} g``, the maximiser of the dual-norm quotient."""
        return sla.cho_solve(self._v_factor, self._vec(g, "g"))

    def __repr__(self):
        kind = "matrix" if self.mesh is None else repr(self.mesh)
        return f"DiscreteSpace(dim={self.dim}, lumped={self.lumped}, {kind})"


def p1_matrices(n):
    """Full-node P1 stiffness, consistent mass and lumped mass on (0, 1)."""
    h = 1.0 / n
    main = np.full(n + 1, 2.0)
    main[[0, -1]] = 1.0
    off = np.ones(n)
    stiff = sp.diags([-off, main, -off], [-1, 0, 1]) / h
    mass = sp.diags([off, 2 * main, off], [-1, 0, 1]) * (h / 6.0)
    lumped = sp.diags(main * (h / 2.0))
    return stiff.tocsr(), mass.tocsr(), lumped.tocsr()


def build_interval_space(n, bc="dirichlet", lumped=False):
    """P1 finite element triple on the unit interval.

    Parameters
    ----------
    n : int
        Number of cells, at least 2.
    bc : {'dirichlet', 'neumann'}
        Dirichlet eliminates both boundary nodes, so ``V = H^1_0``.
    lumped : bool
        Use the trapezoidal (diagonal) mass matrix as ``hGram``. Required by
        the pointwise convex sets in :mod:`parainv.convex`.

    Returns
    -------
    DiscreteSpace
        ``hGram`` is the mass matrix and ``vGram`` is stiffness plus that
        same mass matrix, so that ``||v||_H <= ||v||_V``.
    """
    if int(n) != n or n < 2:
        raise InvalidMeshError(f"need at least 2 cells, got {n}")
    if bc not in ("dirichlet", "neumann"):
        raise InvalidMeshError(f"unknown boundary condition {bc!r}")
    mesh = Mesh(n, bc)
    stiff, mass, mass_lumped = p1_matrices(mesh.n)
    m = mass_lumped if lumped else mass
    h_gram = mesh.restrict(m).toarray()
    v_gram = mesh.restrict(stiff + m).toarray()
    return DiscreteSpace(h_gram, v_gram, lumped=lumped, mesh=mesh)


def matrix_space(h_gram, v_gram):
    """Space given directly by its two Gram matrices (no mesh)."""
    h_gram = np.atleast_2d(np.asarray(h_gram, dtype=float))
    v_gram = np.atleast_2d(np.asarray(v_gram, dtype=float))
    space = DiscreteSpace(h_gram.copy(), v_gram.copy(), lumped=False)
    space.lumped = space.diagonal_h
    return space


def row_quadratic(rows, gram):
    """``r_i @ gram @ r_i`` for every row of ``rows``."""
    rows = np.atleast_2d(rows)
    return np.einsum("ij,ij->i", rows @ gram, rows)

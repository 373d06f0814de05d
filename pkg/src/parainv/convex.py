"""Closed convex sets with exact orthogonal projection in the H geometry.

Pointwise sets (boxes and the nonnegative cone) are projected by nodal
clamping, which is the exact H-projection only when ``hGram`` is diagonal.
They refuse any other geometry instead of approximating.
"""

import numpy as np

from .exceptions import GeometryMismatchError, ValidationError

__all__ = ["ConvexSet", "Box", "NonnegCone", "Ball", "HalfSpace", "whole_space"]


class ConvexSet:
    """Base class; subclasses implement :meth:`project`."""

    pointwise = False

    def __init__(self, space):
        self.space = space
        self._check_geometry()

    def _check_geometry(self):
        space = self.space
        if self.pointwise and not space.diagonal_h:
            raise GeometryMismatchError(
                f"{type(self).__name__} needs a lumped (diagonal) H-Gram matrix; "
                "nodal clamping is not the H-projection for consistent mass"
            )

    def project(self, x):
        raise NotImplementedError

    def project_many(self, xs):
        return np.array([self.project(x) for x in xs])

    def contains(self, x, tol=0.0):
        """``(inside, violation)`` with ``violation = ||x - Px||_H``."""
        if tol < 0:
            raise ValidationError("tol must be nonnegative")
        violation = self.distance(x)
        return violation <= tol, violation

    def distance(self, x):
        return self.space.h_norm(x - self.project(x))

    def decompose(self, x):
        """``(Px, x - Px)``."""
        px = self.project(x)
        return px, np.asarray(x, dtype=float) - px

    def decompose_many(self, xs):
        """Row-wise :meth:`decompose` of a stack of states."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        px = self.project_many(xs)
        return px, xs - px

    def sample(self, rng, count=1):
        """Points of the set, obtained by projecting Gaussian vectors."""
        return self.project_many(2.0 * rng.standard_normal((count, self.space.dim)))


class Box(ConvexSet):
    """``{v : lo <= v <= hi}`` nodewise; bounds may be infinite."""

    pointwise = True

    def __init__(self, space, lo=0.0, hi=1.0):
        self.space = space
        self.lo = np.broadcast_to(np.asarray(lo, dtype=float), (space.dim,)).copy()
        self.hi = np.broadcast_to(np.asarray(hi, dtype=float), (space.dim,)).copy()
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            raise ValidationError("box bounds must not be NaN")
        if np.any(self.lo > self.hi):
            raise ValidationError("box has lo > hi")
        # without finite bounds the clamp is the identity, exact in any geometry
        self.pointwise = bool(np.any(np.isfinite(self.lo)) or np.any(np.isfinite(self.hi)))
        self._check_geometry()

    def project(self, x):
        return np.clip(self.space._vec(x, "x"), self.lo, self.hi)

    def project_many(self, xs):
        return np.clip(np.asarray(xs, dtype=float), self.lo, self.hi)

    def decompose(self, x):
        """``x - Px = (x - hi)_+ - (lo - x)_+``, evaluated nodewise."""
        x = self.space._vec(x, "x")
        with np.errstate(invalid="ignore"):
            above = np.where(np.isfinite(self.hi), np.maximum(x - self.hi, 0.0), 0.0)
            below = np.where(np.isfinite(self.lo), np.maximum(self.lo - x, 0.0), 0.0)
        return self.project(x), above - below

    def decompose_many(self, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        with np.errstate(invalid="ignore"):
            above = np.where(np.isfinite(self.hi), np.maximum(xs - self.hi, 0.0), 0.0)
            below = np.where(np.isfinite(self.lo), np.maximum(self.lo - xs, 0.0), 0.0)
        return self.project_many(xs), above - below

    def sample(self, rng, count=1):
        lo = np.where(np.isfinite(self.lo), self.lo, -2.0)
        hi = np.where(np.isfinite(self.hi), self.hi, lo + 4.0)
        return rng.uniform(lo, hi, size=(count, self.space.dim))

    def __repr__(self):
        return f"Box(lo={self.lo.min()}, hi={self.hi.max()}, dim={self.space.dim})"


class NonnegCone(Box):
    """The cone ``{v >= 0}`` nodewise."""

    def __init__(self, space):
        super().__init__(space, 0.0, np.inf)

    def __repr__(self):
        return f"NonnegCone(dim={self.space.dim})"


def whole_space(space):
    """``C = H`` as the degenerate box ``(-inf, inf)``; ``P`` is the identity.

    Unlike proper boxes it is allowed with consistent mass.
    """
    return Box(space, -np.inf, np.inf)


class Ball(ConvexSet):
    """Closed H-ball of radius ``radius`` around ``center``."""

    def __init__(self, space, center=None, radius=1.0):
        super().__init__(space)
        self.center = (np.zeros(space.dim) if center is None
                       else space._vec(center, "center").copy())
        if not radius > 0:
            raise ValidationError("radius must be positive")
        self.radius = float(radius)

    def project(self, x):
        x = self.space._vec(x, "x")
        d = self.space.h_norm(x - self.center)
        if d <= self.radius:
            return x.copy()
        return self.center + (self.radius / d) * (x - self.center)

    def __repr__(self):
        return f"Ball(radius={self.radius}, dim={self.space.dim})"


class HalfSpace(ConvexSet):
    """``{v : (v | normal)_H <= offset}``."""

    def __init__(self, space, normal, offset=0.0):
        super().__init__(space)
        self.normal = space._vec(normal, "normal").copy()
        self._nn = space.h_norm(self.normal) ** 2
        if self._nn == 0:
            raise ValidationError("normal must be nonzero")
        self.offset = float(offset)

    def project(self, x):
        x = self.space._vec(x, "x")
        excess = self.space.h_inner(x, self.normal) - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / self._nn) * self.normal

    def __repr__(self):
        return f"HalfSpace(offset={self.offset}, dim={self.space.dim})"

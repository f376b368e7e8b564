"""Round closed balls in S^n, stored as unit spacelike Minkowski vectors.

The vector ``w = (w_s, w_t)`` encodes the cap ``{x : <x, w_s> <= w_t}``.  A
Lorentz map ``A`` sends the cap of ``w`` to the cap of ``A w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conformal import LorentzMap, NumericalError, check_dimension, minkowski_form

TOL_CAP = 1e-9
TOL_ANGLE = 1e-9


class CapDomainError(ValueError):
    """A predicate was called on caps larger than its supported range."""


@dataclass(frozen=True, eq=False)
class Cap:
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 1 or w.size < 3:
            raise ValueError(f"cap vector must have length n+2 >= 3, got shape {w.shape}")
        q = minkowski_form(w, w)
        if q <= 0:
            raise ValueError("cap vector must be spacelike")
        w = w / math.sqrt(q)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.size - 2


@dataclass(frozen=True)
class CenterRadius:
    center: np.ndarray
    radius: float


def base_cap(n: int) -> Cap:
    """The southern hemisphere ``x_{n+1} <= 0``."""
    n = check_dimension(n)
    w = np.zeros(n + 2)
    w[n] = 1.0
    return Cap(w)


def transform_cap(f: LorentzMap, cap: Cap) -> Cap:
    if f.n != cap.n:
        raise ValueError(f"dimension mismatch: n={f.n} vs n={cap.n}")
    return Cap(f.matrix @ cap.w)


def cap_center_radius(cap: Cap) -> CenterRadius:
    ws, wt = cap.w[:-1], cap.w[-1]
    q = max(minkowski_form(cap.w, cap.w), 0.0)
    return CenterRadius(-ws / np.linalg.norm(ws), math.atan2(math.sqrt(q), -wt))


def point_in_cap(cap: Cap, x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(x @ cap.w[:-1] - cap.w[-1] <= TOL_CAP)


def sphere_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between unit vectors, accurate for nearly equal or opposite inputs."""
    return 2.0 * math.atan2(np.linalg.norm(a - b), np.linalg.norm(a + b))


def containment_margin(outer: Cap, inner: Cap) -> float:
    """``rho_outer - rho_inner - angle``; non-negative (up to tolerance) iff contained."""
    o, i = cap_center_radius(outer), cap_center_radius(inner)
    return o.radius - i.radius - sphere_angle(o.center, i.center)


def disjointness_margin(a: Cap, b: Cap) -> float:
    """``angle - rho_a - rho_b``; non-negative (up to tolerance) iff interiors are disjoint."""
    ca, cb = cap_center_radius(a), cap_center_radius(b)
    return sphere_angle(ca.center, cb.center) - ca.radius - cb.radius


def cap_contains(outer: Cap, inner: Cap) -> bool:
    bound = math.pi / 2 + TOL_ANGLE
    if cap_center_radius(outer).radius > bound or cap_center_radius(inner).radius > bound:
        raise CapDomainError("cap_contains is only defined for caps of radius <= pi/2")
    return containment_margin(outer, inner) >= -TOL_ANGLE


def caps_disjoint_interiors(a: Cap, b: Cap) -> bool:
    if cap_center_radius(a).radius + cap_center_radius(b).radius > math.pi + TOL_ANGLE:
        raise CapDomainError("caps_disjoint_interiors needs rho_a + rho_b <= pi")
    return disjointness_margin(a, b) >= -TOL_ANGLE


def cap_plane_ball(cap: Cap) -> tuple[np.ndarray, float]:
    """Center and radius of the cap in the chart from p+.

    Only caps avoiding p+ map to bounded balls.
    """
    n = cap.n
    a = cap.w[n] - cap.w[n + 1]
    if a <= 1e-12:
        raise NumericalError("cap contains the projection pole p+")
    return -cap.w[:n] / a, 1.0 / a

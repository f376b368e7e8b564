"""Conformal diffeomorphisms of S^n as Lorentz matrices.

A point ``x`` of the unit sphere ``S^n`` in ``R^{n+1}`` is identified with the
null ray through ``(x, 1)`` in Minkowski space ``R^{n+1,1}`` with quadratic
form ``y_1^2 + ... + y_{n+1}^2 - y_{n+2}^2``.  Orientation-preserving
conformal maps of the sphere are then exactly the orthochronous Lorentz
matrices of determinant one, acting linearly on the light cone.

Light-cone coordinates used by the generator formulas::

    x' = (y_1, ..., y_n),  u = y_{n+2} - y_{n+1},  v = y_{n+2} + y_{n+1}

so that the form reads ``|x'|^2 - u v``.  The north pole ``p+`` lifts to
``u = 0`` and the south pole ``p-`` to ``v = 0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

TOL_LORENTZ = 1e-9
TOL_POINT = 1e-9
MAX_DIMENSION = 8
# relative defect below which a matrix is treated as exactly Lorentz
ROUNDING_FLOOR = 1e-13


class NumericalError(ArithmeticError):
    """Raised when a computation leaves its well-conditioned domain."""


class Pole(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def check_dimension(n: int) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValueError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if not 1 <= n <= MAX_DIMENSION:
        raise ValueError(f"dimension must satisfy 1 <= n <= {MAX_DIMENSION}, got {n}")
    return n


def eta(n: int) -> np.ndarray:
    """The Minkowski metric diag(1, ..., 1, -1) of size n+2."""
    d = np.ones(n + 2)
    d[-1] = -1.0
    return np.diag(d)


def minkowski_form(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[:-1] @ b[:-1] - a[-1] * b[-1])


def north_pole(n: int) -> np.ndarray:
    p = np.zeros(n + 1)
    p[-1] = 1.0
    return p


def south_pole(n: int) -> np.ndarray:
    return -north_pole(n)


def pole_point(pole: Pole, n: int) -> np.ndarray:
    return north_pole(n) if pole is Pole.PLUS else south_pole(n)


@dataclass(frozen=True, eq=False)
class LorentzMap:
    """An element of SO+(n+1, 1), i.e. a conformal diffeomorphism of S^n."""

    matrix: np.ndarray

    def __post_init__(self):
        a = np.array(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 3:
            raise ValueError(f"expected a square matrix of size >= 3, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 2

    def __matmul__(self, other: "LorentzMap") -> "LorentzMap":
        return lorentz_compose(self, other)

    def __repr__(self):
        return f"LorentzMap(n={self.n}, matrix={self.matrix.tolist()!r})"


def _lightcone_matrix(n: int, action) -> np.ndarray:
    """Matrix of a linear map given by its action on light-cone coordinates.

    ``action(xp, u, v)`` returns the image ``(xp, u, v)`` of one vector.
    """
    a = np.empty((n + 2, n + 2))
    for k in range(n + 2):
        e = np.zeros(n + 2)
        e[k] = 1.0
        xp, u, v = e[:n], e[n + 1] - e[n], e[n + 1] + e[n]
        xp2, u2, v2 = action(xp, u, v)
        a[:n, k] = xp2
        a[n, k] = (v2 - u2) / 2.0
        a[n + 1, k] = (v2 + u2) / 2.0
    return a


def lorentz_identity(n: int) -> LorentzMap:
    n = check_dimension(n)
    return LorentzMap(np.eye(n + 2))


def lorentz_defect(f) -> float:
    """Distance from the identity component of the Lorentz group.

    Sum of ``||A^T eta A - eta||_F``, ``|det A - 1|`` and the amount by which
    the time-time entry is negative.
    """
    a = f.matrix if isinstance(f, LorentzMap) else np.asarray(f, dtype=float)
    e = eta(a.shape[0] - 2)
    return float(
        np.linalg.norm(a.T @ e @ a - e)
        + abs(np.linalg.det(a) - 1.0)
        + max(0.0, -a[-1, -1])
    )


def matrix_scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(a))))


def relative_defect(f) -> float:
    """``lorentz_defect`` divided by the squared entry scale of the matrix.

    Rounding alone leaves ``A^T eta A`` off by about eps times the square of
    the largest entry, so this is the quantity that tolerances can bound.
    """
    a = f.matrix if isinstance(f, LorentzMap) else np.asarray(f, dtype=float)
    return lorentz_defect(a) / matrix_scale(a) ** 2


def renormalize(a, scale: float | None = None) -> LorentzMap:
    """Project a slightly perturbed Lorentz matrix back onto SO+(n+1, 1).

    Runs Gram-Schmidt on the columns with respect to the Minkowski form:
    spatial columns first, the time column last.  Matrices already at the
    rounding floor are returned unchanged; recomputing their columns would
    only amplify that noise by the square of the entry scale.

    ``scale`` is the entry scale the rounding floor is measured against.  For
    a product it should be the product of the factors' scales, since
    cancellation can leave the result much smaller than its rounding error.
    """
    a = np.array(a.matrix if isinstance(a, LorentzMap) else a, dtype=float)
    scale = max(matrix_scale(a), scale or 0.0)
    if lorentz_defect(a) <= ROUNDING_FLOOR * scale**2 and a[-1, -1] > 0:
        return LorentzMap(a)
    size = a.shape[0]
    signs = np.ones(size)
    signs[-1] = -1.0
    out = np.empty_like(a)
    for k in range(size):
        col = a[:, k].copy()
        for i in range(k):
            e = out[:, i]
            col -= signs[i] * minkowski_form(col, e) * e
        q = minkowski_form(col, col)
        if abs(q) < 1e-6 or np.sign(q) != signs[k]:
            raise NumericalError(f"degenerate Gram-Schmidt pivot in column {k} (q = {q:g})")
        out[:, k] = col / np.sqrt(abs(q))
    if out[-1, -1] < 0:
        raise NumericalError("input is not orthochronous")
    return LorentzMap(out)


def _same_dim(f: LorentzMap, g: LorentzMap):
    if f.matrix.shape != g.matrix.shape:
        raise ValueError(f"dimension mismatch: n={f.n} vs n={g.n}")


def lorentz_compose(f: LorentzMap, g: LorentzMap) -> LorentzMap:
    """The map x -> f(g(x))."""
    _same_dim(f, g)
    return renormalize(f.matrix @ g.matrix, matrix_scale(f.matrix) * matrix_scale(g.matrix))


def lorentz_inverse(f: LorentzMap) -> LorentzMap:
    e = eta(f.n)
    return renormalize(e @ f.matrix.T @ e)


def compose_all(*maps: LorentzMap) -> LorentzMap:
    """Left-to-right product ``maps[0] o maps[1] o ...``, renormalized once."""
    a = maps[0].matrix
    scale = matrix_scale(a)
    for g in maps[1:]:
        _same_dim(maps[0], g)
        a = a @ g.matrix
        scale *= matrix_scale(g.matrix)
    return renormalize(a, scale)


def apply_point(f: LorentzMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n + 1,):
        raise ValueError(f"expected a point of length {f.n + 1}, got shape {x.shape}")
    y = f.matrix[:, :-1] @ x + f.matrix[:, -1]
    if y[-1] <= 1e-12:
        raise NumericalError(f"non-positive time coordinate {y[-1]:g} in apply_point")
    p = y[:-1] / y[-1]
    return p / np.linalg.norm(p)


def pi_map(n: int) -> LorentzMap:
    """Rotation by 180 degrees about S^{n-2}; swaps the two poles."""
    n = check_dimension(n)
    d = np.ones(n + 2)
    d[n - 1] = d[n] = -1.0
    return LorentzMap(np.diag(d))


def translate_plus(b) -> LorentzMap:
    """Translation by ``b`` in the chart from p+ (fixes p+)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = check_dimension(b.size)
    if not np.all(np.isfinite(b)):
        raise ValueError("translation vector must be finite")
    bb = b @ b

    def act(xp, u, v):
        return xp + u * b, u, v + 2.0 * (xp @ b) + u * bb

    return LorentzMap(_lightcone_matrix(n, act))


def translate_minus(b) -> LorentzMap:
    """Translation by ``b`` in the chart from p- (fixes p-)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = check_dimension(b.size)
    if not np.all(np.isfinite(b)):
        raise ValueError("translation vector must be finite")
    bb = b @ b

    def act(xp, u, v):
        return xp + v * b, u + 2.0 * (xp @ b) + v * bb, v

    return LorentzMap(_lightcone_matrix(n, act))


def scale_plus(s: float, n: int) -> LorentzMap:
    """Dilation ``b -> s b`` in the chart from p+ (fixes both poles)."""
    n = check_dimension(n)
    if not s > 0:
        raise ValueError(f"scale factor must be positive, got {s!r}")
    a = np.eye(n + 2)
    c, sh = (s + 1.0 / s) / 2.0, (s - 1.0 / s) / 2.0
    a[n, n] = a[n + 1, n + 1] = c
    a[n, n + 1] = a[n + 1, n] = sh
    return LorentzMap(a)


def _check_special_orthogonal(r: np.ndarray, size: int):
    if r.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} rotation, got shape {r.shape}")
    if (np.linalg.norm(r.T @ r - np.eye(size)) > TOL_LORENTZ
            or abs(np.linalg.det(r) - 1.0) > TOL_LORENTZ):
        raise ValueError("matrix is not special orthogonal")


def rotation_axis(r) -> LorentzMap:
    """Rotation of S^n about the polar axis, ``diag(R, 1, 1)`` with R in SO(n)."""
    r = np.atleast_2d(np.asarray(r, dtype=float))
    n = check_dimension(r.shape[0])
    _check_special_orthogonal(r, n)
    a = np.eye(n + 2)
    a[:n, :n] = r
    return LorentzMap(a)


def rotation_ambient(r) -> LorentzMap:
    """Isometry of S^n given by R in SO(n+1), as ``diag(R, 1)``."""
    r = np.atleast_2d(np.asarray(r, dtype=float))
    n = check_dimension(r.shape[0] - 1)
    _check_special_orthogonal(r, n + 1)
    a = np.eye(n + 2)
    a[: n + 1, : n + 1] = r
    return LorentzMap(a)


def stereo_project(pole: Pole, x) -> np.ndarray:
    """Stereographic projection from ``pole`` onto the plane through the equator."""
    x = np.asarray(x, dtype=float)
    n = x.size - 1
    if np.linalg.norm(x - pole_point(pole, n)) <= 1e-9:
        raise NumericalError("point coincides with the projection pole")
    if pole is Pole.PLUS:
        return x[:n] / (1.0 - x[n])
    return x[:n] / (1.0 + x[n])


def stereo_unproject(pole: Pole, b) -> np.ndarray:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    bb = b @ b
    last = bb - 1.0 if pole is Pole.PLUS else 1.0 - bb
    return np.append(2.0 * b, last) / (bb + 1.0)


def random_rotation(rng: np.random.Generator, size: int) -> np.ndarray:
    """Haar-random element of SO(size)."""
    if size == 1:
        return np.ones((1, 1))
    z = rng.standard_normal((size, size))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def matrix_distance(f: LorentzMap, g: LorentzMap) -> float:
    """Largest entrywise deviation between two maps, relative to their entry scale.

    For maps with entries of size at most one this is the plain entrywise
    deviation.
    """
    scale = max(matrix_scale(f.matrix), matrix_scale(g.matrix))
    return float(np.max(np.abs(f.matrix - g.matrix))) / scale

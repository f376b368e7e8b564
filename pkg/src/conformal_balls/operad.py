"""The operad of conformal n-balls and its cyclic structure.

A configuration of arity ``j`` is a tuple ``(pi, f_1, ..., f_j)`` of conformal
maps of ``S^n`` whose images of the southern hemisphere ``D`` lie in ``D`` and
have pairwise disjoint interiors.  Slot 0 always holds ``pi`` so that the
cyclic action can index it like any other slot.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .caps import TOL_ANGLE
from .conformal import (
    TOL_LORENTZ,
    TOL_POINT,
    LorentzMap,
    apply_point,
    check_dimension,
    compose_all,
    relative_defect,
    lorentz_identity,
    lorentz_inverse,
    matrix_distance,
    north_pole,
    pi_map,
)

MAX_ARITY = 16
TOL_EQUAL = 1e-9

# Revalidate every composition/action result.  Off by default: composition is
# closed, so this only guards against numerical drift.
DEBUG = os.environ.get("CONFORMAL_BALLS_DEBUG", "") not in ("", "0")


class InvalidConfiguration(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__(report.message)
        self.report = report


@dataclass(frozen=True, eq=False)
class Configuration:
    n: int
    maps: tuple[LorentzMap, ...]

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def arity(self) -> int:
        return len(self.maps) - 1

    @property
    def slots(self) -> tuple[LorentzMap, ...]:
        return self.maps[1:]

    def __repr__(self):
        return f"Configuration(n={self.n}, arity={self.arity})"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None
    message: str = "ok"
    margin: float = math.inf
    slots: tuple[int, ...] = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ExtendedPermutation:
    """A bijection of {0, 1, ..., j}, stored as its list of images."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))) or len(images) < 2:
            raise ValueError(f"not a permutation of {{0..j}} with j >= 1: {self.images!r}")
        object.__setattr__(self, "images", images)

    @property
    def arity(self) -> int:
        return len(self.images) - 1

    def __call__(self, k: int) -> int:
        return self.images[k]

    def __mul__(self, other: "ExtendedPermutation") -> "ExtendedPermutation":
        # (sigma * eps)(m) = sigma(eps(m)), matching the right action
        if other.arity != self.arity:
            raise ValueError("permutations of different size")
        return ExtendedPermutation(tuple(self.images[e] for e in other.images))

    def inverse(self) -> "ExtendedPermutation":
        inv = [0] * len(self.images)
        for k, v in enumerate(self.images):
            inv[v] = k
        return ExtendedPermutation(tuple(inv))

    @classmethod
    def identity(cls, j: int) -> "ExtendedPermutation":
        return cls(tuple(range(j + 1)))

    @classmethod
    def parse(cls, text: str) -> "ExtendedPermutation":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))


def tau_generator(j: int) -> ExtendedPermutation:
    """The cycle k -> k+1 mod (j+1)."""
    if j < 1:
        raise ValueError("tau needs arity j >= 1")
    return ExtendedPermutation(tuple((k + 1) % (j + 1) for k in range(j + 1)))


def slot_cap_vectors(maps: Sequence[LorentzMap]) -> np.ndarray:
    """Minkowski vectors of the images of D, one row per map.

    D is the cap of the basis vector e_n, so its image under A is column n.
    """
    if not maps:
        return np.empty((0, 0))
    n = maps[0].n
    w = np.array([f.matrix[:, n] for f in maps])
    return _normalize_rows(w)


def _normalize_rows(w: np.ndarray) -> np.ndarray:
    q = np.einsum("...j,...j->...", w[..., :-1], w[..., :-1]) - w[..., -1] ** 2
    return w / np.sqrt(q)[..., None]


def _angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * np.arctan2(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def _centers_radii(w: np.ndarray):
    w = _normalize_rows(w)
    ws, wt = w[..., :-1], w[..., -1]
    norms = np.linalg.norm(ws, axis=-1)
    centers = -ws / norms[..., None]
    q = np.maximum(norms**2 - wt**2, 0.0)
    radii = np.arctan2(np.sqrt(q), -wt)
    return centers, radii


def slot_margins(n: int, maps: Sequence[LorentzMap]):
    """Containment margins per slot and the pairwise disjointness margin matrix."""
    return cap_vector_margins(n, slot_cap_vectors(maps))


def cap_vector_margins(n: int, w: np.ndarray):
    """As ``slot_margins``, from the cap vectors directly.

    ``w`` has shape ``(..., j, n+2)``; leading axes are batch axes.
    """
    if w.shape[-2] == 0:
        return np.empty(w.shape[:-1]), np.empty(w.shape[:-1] + (0,))
    centers, radii = _centers_radii(w)
    south = np.zeros(n + 1)
    south[-1] = -1.0
    contain = math.pi / 2 - radii - _angle(centers, south)
    angles = _angle(centers[..., :, None, :], centers[..., None, :, :])
    disjoint = angles - radii[..., :, None] - radii[..., None, :]
    j = w.shape[-2]
    disjoint[..., np.arange(j), np.arange(j)] = math.inf
    return contain, disjoint


def is_valid_slots(n: int, maps: Sequence[LorentzMap]) -> bool:
    """Containment and disjointness only."""
    return bool(cap_vectors_valid(n, slot_cap_vectors(maps)))


def cap_vectors_valid(n: int, w: np.ndarray, tol: float = TOL_ANGLE):
    """Validity of each batch entry of cap vectors shaped ``(..., j, n+2)``."""
    contain, disjoint = cap_vector_margins(n, w)
    return (contain.min(axis=-1) >= -tol) & (disjoint.min(axis=(-2, -1)) >= -tol)


def validate_config(c: Configuration) -> ValidationReport:
    """Check that ``c`` lies in the space of little conformal n-balls."""
    try:
        n = check_dimension(c.n)
    except ValueError as exc:
        return ValidationReport(False, "dimension", str(exc))
    if c.arity < 1 or c.arity > MAX_ARITY:
        return ValidationReport(False, "arity", f"arity {c.arity} outside 1..{MAX_ARITY}")
    for i, f in enumerate(c.maps):
        if f.n != n:
            return ValidationReport(False, "dimension", f"slot {i} has n={f.n}, expected {n}", slots=(i,))
    d0 = matrix_distance(c.maps[0], pi_map(n))
    if d0 > TOL_LORENTZ:
        return ValidationReport(False, "slot-0", f"slot 0 differs from pi by {d0:.3g}", -d0, (0,))
    for i, f in enumerate(c.slots, start=1):
        defect = relative_defect(f)
        if not defect <= TOL_LORENTZ:
            return ValidationReport(False, "lorentz", f"slot {i} has Lorentz defect {defect:.3g}", -defect, (i,))
    contain, disjoint = slot_margins(n, c.slots)
    for i, m in enumerate(contain, start=1):
        if m < -TOL_ANGLE:
            return ValidationReport(
                False, "containment", f"image of slot {i} is not inside D (margin {m:.3g})", float(m), (i,)
            )
    for i in range(c.arity):
        for k in range(i + 1, c.arity):
            m = disjoint[i, k]
            if m < -TOL_ANGLE:
                return ValidationReport(
                    False, "disjointness",
                    f"images of slots {i + 1} and {k + 1} overlap (margin {m:.3g})",
                    float(m), (i + 1, k + 1),
                )
    margin = float(min(contain.min(), disjoint.min()))
    return ValidationReport(True, margin=margin)


def make_config(n: int, slots: Sequence[LorentzMap]) -> Configuration:
    """Build ``(pi, *slots)`` and validate it, raising InvalidConfiguration."""
    n = check_dimension(n)
    c = Configuration(n, (pi_map(n), *slots))
    report = validate_config(c)
    if not report.ok:
        raise InvalidConfiguration(report)
    return c


def _checked(c: Configuration) -> Configuration:
    if DEBUG:
        report = validate_config(c)
        if not report.ok:
            raise InvalidConfiguration(report)
    return c


def unit_config(n: int) -> Configuration:
    n = check_dimension(n)
    return Configuration(n, (pi_map(n), lorentz_identity(n)))


def _same_n(f: Configuration, g: Configuration):
    if f.n != g.n:
        raise ValueError(f"dimension mismatch: n={f.n} vs n={g.n}")


def partial_compose(f: Configuration, k: int, g: Configuration) -> Configuration:
    """Insert ``g`` into slot ``k`` of ``f``."""
    _same_n(f, g)
    if not 1 <= k <= f.arity:
        raise IndexError(f"slot {k} out of range 1..{f.arity}")
    fk = f.maps[k]
    block = tuple(compose_all(fk, gm) for gm in g.slots)
    return _checked(Configuration(f.n, f.maps[:k] + block + f.maps[k + 1:]))


def full_compose(f: Configuration, gs: Sequence[Configuration]) -> Configuration:
    if len(gs) != f.arity:
        raise ValueError(f"expected {f.arity} inputs, got {len(gs)}")
    maps = [f.maps[0]]
    for fi, g in zip(f.slots, gs):
        _same_n(f, g)
        maps.extend(compose_all(fi, gm) for gm in g.slots)
    return _checked(Configuration(f.n, tuple(maps)))


def _check_sigma(sigma: Sequence[int], j: int) -> tuple[int, ...]:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, j + 1)):
        raise ValueError(f"not a permutation of 1..{j}: {sigma!r}")
    return sigma


def permute(f: Configuration, sigma: Sequence[int]) -> Configuration:
    """Right action of the symmetric group: slot i of the result is f_{sigma(i)}.

    ``sigma`` lists the images of 1..j.
    """
    sigma = _check_sigma(sigma, f.arity)
    return Configuration(f.n, (f.maps[0],) + tuple(f.maps[s] for s in sigma))


def cyclic_act(f: Configuration, sigma: ExtendedPermutation) -> Configuration:
    """Slot m of the result is ``pi f_{sigma(0)}^{-1} f_{sigma(m)}``, with f_0 = pi."""
    if sigma.arity != f.arity:
        raise ValueError(f"permutation of {{0..{sigma.arity}}} acting on arity {f.arity}")
    pi = f.maps[0]
    prefix = compose_all(pi, lorentz_inverse(f.maps[sigma(0)]))
    slots = tuple(compose_all(prefix, f.maps[sigma(m)]) for m in range(1, f.arity + 1))
    return _checked(Configuration(f.n, (pi,) + slots))


def is_framed(f: Configuration) -> bool:
    """True when every slot map fixes the north pole."""
    p = north_pole(f.n)
    return all(np.linalg.norm(apply_point(g, p) - p) <= TOL_POINT for g in f.slots)


def config_distance(a: Configuration, b: Configuration) -> float:
    """Largest entrywise deviation between corresponding slot matrices."""
    if a.n != b.n or a.arity != b.arity:
        return math.inf
    return max(matrix_distance(x, y) for x, y in zip(a.maps, b.maps))


def configs_equal(a: Configuration, b: Configuration, tol: float = TOL_EQUAL) -> bool:
    return config_distance(a, b) <= tol


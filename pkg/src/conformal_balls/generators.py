"""Random configurations for the axiom suites."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conformal import (
    check_dimension,
    compose_all,
    pi_map,
    random_rotation,
    rotation_axis,
    scale_plus,
    translate_minus,
    translate_plus,
)
from .operad import (
    MAX_ARITY,
    Configuration,
    ExtendedPermutation,
    cyclic_act,
    make_config,
    validate_config,
)

MAX_DARTS = 10_000
MIN_RADIUS = 0.05
MAX_RADIUS = 0.9
Q_MAX = 0.3
Q_RETRIES = 100


class GenerationError(RuntimeError):
    pass


class Twist(enum.Enum):
    FRAMED = "framed"
    CYCLIC = "cyclic"
    Q = "q"

    @classmethod
    def parse(cls, value) -> "Twist":
        if isinstance(value, cls):
            return value
        aliases = {"cyclic-twisted": "cyclic", "q-perturbed": "q"}
        return cls(aliases.get(value, value))


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    arity: int
    margin: float = 0.02
    seed: int = 0
    twist: Twist = Twist.FRAMED

    def __post_init__(self):
        check_dimension(self.n)
        if not 1 <= self.arity <= MAX_ARITY:
            raise ValueError(f"arity must lie in 1..{MAX_ARITY}, got {self.arity}")
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        object.__setattr__(self, "twist", Twist.parse(self.twist))


def _uniform_in_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    return direction * radius * rng.uniform() ** (1.0 / n)


def framed_slot(b, s: float, m=None):
    """The map ``translate_plus(b) scale_plus(s) rotation_axis(m)``: the plane ball B(b, s)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = b.size
    m = np.eye(n) if m is None else m
    return compose_all(translate_plus(b), scale_plus(s, n), rotation_axis(m))


def framed_config_from_balls(balls: Sequence[tuple], rotations=None) -> Configuration:
    """Validated framed configuration from plane balls ``(center, radius)``."""
    n = np.atleast_1d(balls[0][0]).size
    rotations = rotations or [None] * len(balls)
    return make_config(n, [framed_slot(b, s, m) for (b, s), m in zip(balls, rotations)])


def throw_darts(rng: np.random.Generator, n: int, arity: int, margin: float):
    """Disjoint plane balls inside the unit ball, with ``margin`` clearance."""
    s_min = MIN_RADIUS
    s_max = min(MAX_RADIUS, MAX_RADIUS / arity ** (1.0 / n))
    balls: list[tuple[np.ndarray, float]] = []
    while len(balls) < arity:
        for _ in range(MAX_DARTS):
            b = _uniform_in_ball(rng, n, max(1.0 - margin - s_min, 0.0))
            room = 1.0 - margin - np.linalg.norm(b)
            for c, s in balls:
                room = min(room, np.linalg.norm(b - c) - s - margin)
            if room >= s_min:
                balls.append((b, float(rng.uniform(s_min, max(s_min, min(room, s_max))))))
                break
        else:
            s_min /= 2
            if s_min < 1e-3:
                raise GenerationError(f"cannot place {arity} balls with margin {margin}")
    return balls


def _framed(rng, n: int, arity: int, margin: float) -> Configuration:
    balls = throw_darts(rng, n, arity, margin)
    rotations = [random_rotation(rng, n) for _ in balls]
    return framed_config_from_balls(balls, rotations)


def _q_perturbed(rng, n: int, arity: int, margin: float) -> Configuration:
    """Slots ``F_i T-(q_i)`` with F_i framed, whose images are dart-thrown balls.

    The chart-from-p+ image of D under ``T-(q)`` is the ball
    ``B(-q / (1 - |q|^2), 1 / (1 - |q|^2))``, so the framed factor is solved
    for from the target ball.  Only the composite is required to be valid;
    the framed factors alone may overlap, which is what makes the retraction
    rescale.
    """
    radius = Q_MAX
    for _ in range(Q_RETRIES):
        balls = throw_darts(rng, n, arity, margin)
        slots = []
        for center, rho in balls:
            q = _uniform_in_ball(rng, n, radius)
            m = random_rotation(rng, n)
            s = rho * (1.0 - q @ q)
            y = center + rho * (m @ q)
            slots.append(compose_all(framed_slot(y, s, m), translate_minus(q)))
        c = Configuration(n, (pi_map(n), *slots))
        if validate_config(c).ok:
            return c
        radius *= 0.95
    raise GenerationError("q-perturbation rejected too often")


def generate(rng: np.random.Generator, n: int, arity: int, margin: float = 0.02,
             twist: Twist = Twist.FRAMED) -> Configuration:
    """Random configuration drawn from an explicit RNG stream."""
    twist = Twist.parse(twist)
    if twist is Twist.FRAMED:
        return _framed(rng, n, arity, margin)
    if twist is Twist.CYCLIC:
        base = _framed(rng, n, arity, margin)
        return cyclic_act(base, random_permutation(rng, arity))
    return _q_perturbed(rng, n, arity, margin)


def random_framed_config(spec: GeneratorSpec) -> Configuration:
    return _framed(np.random.default_rng(spec.seed), spec.n, spec.arity, spec.margin)


def random_config(spec: GeneratorSpec) -> Configuration:
    return generate(np.random.default_rng(spec.seed), spec.n, spec.arity, spec.margin, spec.twist)


def random_permutation(rng: np.random.Generator, j: int) -> ExtendedPermutation:
    return ExtendedPermutation(tuple(int(k) for k in rng.permutation(j + 1)))


def random_sigma(rng: np.random.Generator, j: int) -> tuple[int, ...]:
    """Random permutation of 1..j as its image list."""
    return tuple(int(k) + 1 for k in rng.permutation(j))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per trial, so trial order never changes results."""
    return np.random.default_rng([int(seed) & (2**64 - 1), trial])


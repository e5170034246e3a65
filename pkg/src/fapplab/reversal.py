"""Classical irreversibility on the torus: a reversible chaotic map, the
momentum-flip reversal protocol with an imperfect reverse flow, Monte-Carlo
reversal probabilities, and the Lyapunov decay bound.

The concrete flow is the symmetrized (split-kick) standard map

    p += (K/2) sin q;  q += p;  p += (K/2) sin q      (all mod 2pi)

which is area-preserving, has a closed-form inverse, and satisfies the
momentum-flip involution identity pi f pi = f^{-1} exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhasePoint:
    """Point on the 2-torus; both coordinates are reduced modulo 2pi."""

    q: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q) % TWO_PI)
        object.__setattr__(self, "p", float(self.p) % TWO_PI)


def involution(point: PhasePoint) -> PhasePoint:
    """Momentum flip pi(q, p) = (q, -p); pi squared is the identity."""
    return PhasePoint(point.q, -point.p)


@dataclass(frozen=True)
class ReversibleMap:
    """Symmetrized standard map with kick strength K >= 0."""

    kick_strength: float

    def __post_init__(self):
        if self.kick_strength < 0:
            raise ValueError("kick strength must be non-negative")

    def step_arrays(self, q, p, direction: str = "forward"):
        """One map step on coordinate arrays (vectorized Monte-Carlo core)."""
        half_kick = 0.5 * self.kick_strength
        if direction == "forward":
            p = (p + half_kick * np.sin(q)) % TWO_PI
            q = (q + p) % TWO_PI
            p = (p + half_kick * np.sin(q)) % TWO_PI
        elif direction == "backward":
            p = (p - half_kick * np.sin(q)) % TWO_PI
            q = (q - p) % TWO_PI
            p = (p - half_kick * np.sin(q)) % TWO_PI
        else:
            raise ValueError(f"unknown direction {direction!r}")
        return q, p

    def evolve_arrays(self, q, p, steps: int, direction: str = "forward"):
        for _ in range(steps):
            q, p = self.step_arrays(q, p, direction)
        return q, p


def step(mapping: ReversibleMap, x: PhasePoint, direction: str = "forward") -> PhasePoint:
    """Single map step on one phase point."""
    q, p = mapping.step_arrays(np.float64(x.q), np.float64(x.p), direction)
    return PhasePoint(float(q), float(p))


@dataclass(frozen=True)
class CellRegion:
    """Square phase-space cell of side full_width around a center point."""

    center: PhasePoint
    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("cell half-width must be positive")
        if (2 * self.half_width) ** 2 >= TWO_PI ** 2:
            raise ValueError("cell area must be smaller than the torus")

    @property
    def full_width(self) -> float:
        return 2 * self.half_width

    @property
    def area(self) -> float:
        return self.full_width ** 2

    def sample(self, rng: np.random.Generator, n: int):
        q = (self.center.q + rng.uniform(-self.half_width, self.half_width, n)) % TWO_PI
        p = (self.center.p + rng.uniform(-self.half_width, self.half_width, n)) % TWO_PI
        return q, p

    def contains(self, q, p) -> np.ndarray:
        dq = np.abs((q - self.center.q + np.pi) % TWO_PI - np.pi)
        dp = np.abs((p - self.center.p + np.pi) % TWO_PI - np.pi)
        return (dq <= self.half_width) & (dp <= self.half_width)


@dataclass(frozen=True)
class ReversalConfig:
    """Full description of one momentum-flip reversal experiment."""

    map: ReversibleMap
    perturbed_kick: float
    steps: int
    region: CellRegion
    samples: int
    seed: int

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("step count must be non-negative")
        if self.samples < 100:
            raise ValueError("need at least 100 Monte-Carlo samples")
        if self.perturbed_kick < 0:
            raise ValueError("perturbed kick strength must be non-negative")


@dataclass(frozen=True)
class ReversalResult:
    probability: float
    std_error: float
    lyapunov_estimate: float
    bound: float


def reversal_probability(cfg: ReversalConfig) -> ReversalResult:
    """Monte-Carlo estimate of the probability of returning to the start cell.

    Protocol per sample: draw x0 uniformly in the cell, run the true map
    forward for `steps`, flip the momentum, run the perturbed map forward for
    `steps` (the flip conjugation makes this the imperfect reverse flow),
    flip again, and test membership in the start cell. With an unperturbed
    reverse flow the return is exact by the involution identity.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0,)))
    q, p = cfg.region.sample(rng, cfg.samples)
    q, p = cfg.map.evolve_arrays(q, p, cfg.steps, "forward")
    p = (-p) % TWO_PI
    perturbed = ReversibleMap(cfg.perturbed_kick)
    q, p = perturbed.evolve_arrays(q, p, cfg.steps, "forward")
    p = (-p) % TWO_PI
    hits = int(np.count_nonzero(cfg.region.contains(q, p)))
    prob = hits / cfg.samples
    std_error = float(np.sqrt(prob * (1 - prob) / cfg.samples))
    lam = lyapunov(cfg.map, seed=_derived_seed(cfg.seed, 1))
    return ReversalResult(probability=prob, std_error=std_error,
                          lyapunov_estimate=lam, bound=bound(lam, cfg.steps))


def _derived_seed(seed: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(stream,))


def lyapunov(mapping: ReversibleMap, steps: int = 4000, transient: int = 100,
             seed=0, n_init: int = 32) -> float:
    """Largest Lyapunov exponent by tangent-map iteration with renormalization,
    averaged over random initial points. Non-chaotic regimes give ~0.
    """
    if steps < 1000:
        raise ValueError("need at least 1e3 tangent-map steps")
    if n_init < 32:
        raise ValueError("need at least 32 initial points")
    if isinstance(seed, np.random.SeedSequence):
        rng = np.random.default_rng(seed)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed)))
    half_kick = 0.5 * mapping.kick_strength
    total = 0.0
    for _ in range(n_init):
        q = rng.uniform(0.0, TWO_PI)
        p = rng.uniform(0.0, TWO_PI)
        q, p = mapping.evolve_arrays(q, p, transient, "forward")
        v = np.array([1.0, 0.0])
        acc = 0.0
        for _ in range(steps):
            # tangent map of the split step: kick at q, drift, kick at the new q
            c1 = half_kick * np.cos(q)
            p1 = (p + half_kick * np.sin(q)) % TWO_PI
            q_new = (q + p1) % TWO_PI
            c2 = half_kick * np.cos(q_new)
            # J = J_kick(q_new) @ J_drift @ J_kick(q), multiplied out by hand
            v = np.array([v[0] + v[1] + c1 * v[0],
                          c2 * (v[0] + v[1] + c1 * v[0]) + c1 * v[0] + v[1]])
            norm = np.hypot(v[0], v[1])
            acc += np.log(norm)
            v /= norm
            p = (p1 + half_kick * np.sin(q_new)) % TWO_PI
            q = q_new
        total += acc / steps
    return total / n_init


def bound(lyapunov_exponent: float, t: int) -> float:
    """Reversal-probability decay bound e^(-lambda t).

    The 2-D area-preserving map has the exponent pair (lambda, -lambda), so
    the sum over positive exponents has a single term.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    return float(np.exp(-lyapunov_exponent * t))

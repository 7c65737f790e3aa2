"""Orbit balls at finite resolution and horizon, and density ratios against them.

The orbit ball B_{m,T}(x) collects the points whose column trace at
resolution m equals x's for all times 0..T. On configuration spaces it is a
finite union of cylinders on the dependence window W_rho, so conditional
measures of the form mu(B_{m,T}(x) | B_n(x)) have an exact path (enumerate
W_rho words, sum cylinder masses) next to the Monte Carlo path (sample the
conditioning ball, count trace agreement). Rotations get the analytic arc
formulas instead; their orbit balls equal plain balls at every horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import (
    DEFAULT_ENUMERATION_CAP,
    CirclePoint,
    Configuration,
    ball_cylinder,
    circle_distance,
    count_words,
    iter_words,
    window_cells,
    Cylinder,
)
from .errors import (
    EnumerationTooLarge,
    InsufficientRadius,
    NullBall,
    UnsupportedSystem,
)
from .measures import CantorMeasure, LebesgueMeasure, Measure
from .rng import derive_seed, pmap, substream
from .systems import (
    CantorSystem,
    Rotation,
    System,
    cell_sizes,
    column_trace,
    dependence_radius,
    step,
    system_sided,
    trace_agreement_batch,
)


@dataclass(frozen=True)
class OrbitBallEvent:
    """Explicit cylinder description of an orbit ball on the window W_rho."""

    sided: str
    m: int
    horizon: int
    rho: int
    base_word: tuple[int, ...]
    words: frozenset[tuple[int, ...]]

    def contains_word(self, word: tuple[int, ...]) -> bool:
        return tuple(word) in self.words

    def contains(self, x: Configuration) -> bool:
        return x.window(self.rho) in self.words

    def cylinders(self, alphabet) -> list[Cylinder]:
        return [Cylinder(alphabet, self.sided, self.rho, w) for w in sorted(self.words)]


def orbit_ball_member(system: System, x, y, m: int, horizon: int) -> bool:
    """Does y share x's column trace at resolution m through the horizon?"""
    if isinstance(system, Rotation):
        if not (isinstance(x, CirclePoint) and isinstance(y, CirclePoint)):
            raise UnsupportedSystem("rotation orbit balls take circle points")
        if m < 1:
            raise ValueError("circle resolution needs m >= 1")
        # rigid rotations are isometries, so the horizon does not matter
        return circle_distance(x, y) <= Fraction(1, m)
    target = column_trace(system, x, m, horizon)
    cur = y
    for i, want in enumerate(target):
        if cur.window(m) != want:
            return False
        if i < horizon:
            cur = step(system, cur)
    return True


def orbit_ball_event(
    system: CantorSystem,
    x: Configuration,
    m: int,
    horizon: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> OrbitBallEvent:
    """Enumerate the orbit ball as the set of W_rho words reproducing x's trace."""
    if isinstance(system, Rotation):
        raise UnsupportedSystem("rotation orbit balls are arcs, not cylinder events")
    rho = dependence_radius(system, m, horizon)
    sided = system_sided(system)
    cells = list(window_cells(sided, rho))
    sizes = cell_sizes(system, cells)
    total = count_words(sizes)
    if total > cap:
        raise EnumerationTooLarge(total, cap, "orbit ball enumeration")
    target = column_trace(system, x, m, horizon)
    hits = []
    for word in iter_words(sizes):
        cfg = Configuration(system.alphabet, sided, word)
        cur = cfg
        ok = True
        for i, want in enumerate(target):
            if cur.window(m) != want:
                ok = False
                break
            if i < horizon:
                cur = step(system, cur)
        if ok:
            hits.append(word)
    return OrbitBallEvent(
        sided=sided,
        m=m,
        horizon=horizon,
        rho=rho,
        base_word=x.window(rho),
        words=frozenset(hits),
    )


def _rotation_ball_mass(n: int) -> Fraction:
    """Arc length of a circle ball of metric radius 1/n."""
    if n < 1:
        raise ValueError("circle balls need n >= 1")
    return min(Fraction(1), Fraction(2, n))


def _rotation_ratio(m: int, n: int) -> float:
    if m < 1:
        raise ValueError("circle resolution needs m >= 1")
    # concentric balls nest, so the intersection is the smaller ball
    return float(_rotation_ball_mass(max(m, n)) / _rotation_ball_mass(n))


def density_ratio_exact(
    system: System,
    mu: Measure,
    x,
    m: int,
    n: int,
    horizon: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """mu(B_{m,horizon}(x) intersect B_n(x)) / mu(B_n(x)), computed exactly."""
    if isinstance(system, Rotation):
        _require_lebesgue(mu)
        return _rotation_ratio(m, n)
    mu = _require_cantor_measure(mu)
    ball = ball_cylinder(x, n)
    mball = mu.cylinder_probability(ball)
    if mball == 0.0:
        raise NullBall(f"conditioning ball of radius 1/{n} has measure zero")
    rho = dependence_radius(system, m, horizon)
    if n >= rho:
        # the conditioning ball fixes the whole dependence window, and x's own
        # word reproduces x's trace, so every point of the ball is in the event
        if x.radius < rho:
            raise InsufficientRadius(f"need valid radius {rho}, have {x.radius}")
        return 1.0
    event = orbit_ball_event(system, x, m, horizon, cap=cap)
    anchor = x.window(n)
    sided = event.sided
    hits = 0
    masses = []
    for word in event.words:
        cfg = Configuration(system.alphabet, sided, word)
        if cfg.window(n) != anchor:
            continue
        hits += 1
        masses.append(mu.cylinder_probability(Cylinder(system.alphabet, sided, rho, word)))
    inner = set(window_cells(sided, n))
    free = [i for i in window_cells(sided, rho) if i not in inner]
    if hits == count_words(cell_sizes(system, free)):
        # the event contains every extension of the ball word, so the ratio
        # is 1 by inclusion; skip the float sum, whose rounding can land a
        # hair below
        return 1.0
    return math.fsum(masses) / mball


@dataclass(frozen=True)
class RatioEstimate:
    """Monte Carlo estimate of a conditional orbit-ball mass."""

    p_hat: float
    stderr: float
    n_samples: int
    seed: int
    m: int
    n: int
    horizon: int

    def to_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "m": self.m,
            "n": self.n,
            "horizon": self.horizon,
        }


def _binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def density_ratio_estimate(
    system: System,
    mu: Measure,
    x,
    m: int,
    n: int,
    horizon: int,
    n_samples: int = 10_000,
    seed: int = 0,
) -> RatioEstimate:
    """Sample the conditioning ball and count trace agreement with x."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if isinstance(system, Rotation):
        _require_lebesgue(mu)
        if m < 1 or n < 1:
            raise ValueError("circle resolutions need m, n >= 1")
        rng = substream(seed, 0)
        u = rng.random(n_samples)
        if n <= 2:
            # the conditioning ball is the whole circle
            gap = np.abs(u - float(x.angle))
            dist = np.minimum(gap, 1.0 - gap)
        else:
            dist = np.abs((2.0 * u - 1.0) / n)
        p_hat = float((dist <= 1.0 / m).mean())
        return RatioEstimate(p_hat, _binomial_stderr(p_hat, n_samples), n_samples, seed, m, n, horizon)
    mu = _require_cantor_measure(mu)
    ball = ball_cylinder(x, n)
    if mu.cylinder_probability(ball) == 0.0:
        raise NullBall(f"conditioning ball of radius 1/{n} has measure zero")
    rho = dependence_radius(system, m, horizon)
    radius = max(n, rho)
    if x.radius < radius:
        raise InsufficientRadius(f"need valid radius {radius}, have {x.radius}")
    target = column_trace(system, x, m, horizon)
    batch = mu.conditional_batch(ball, radius, n_samples, substream(seed, 0))
    mask = trace_agreement_batch(system, target, batch, m, radius)
    p_hat = float(mask.mean())
    return RatioEstimate(p_hat, _binomial_stderr(p_hat, n_samples), n_samples, seed, m, n, horizon)


def equicontinuity_point_test(
    system: System,
    x,
    m: int,
    n: int,
    horizon: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> bool:
    """Is B_n(x) entirely inside the orbit ball B_{m,horizon}(x)?"""
    if isinstance(system, Rotation):
        if m < 1 or n < 1:
            raise ValueError("circle resolutions need m, n >= 1")
        return n >= m
    rho = dependence_radius(system, m, horizon)
    if n >= rho:
        if x.radius < rho:
            raise InsufficientRadius(f"need valid radius {rho}, have {x.radius}")
        return True
    sided = system_sided(system)
    cells = list(window_cells(sided, rho))
    inner = set(window_cells(sided, n))
    free = [i for i in cells if i not in inner]
    sizes = cell_sizes(system, free)
    total = count_words(sizes)
    if total > cap:
        raise EnumerationTooLarge(total, cap, "ball extension enumeration")
    target = column_trace(system, x, m, horizon)
    fixed = dict(zip(window_cells(sided, n), x.window(n)))
    for combo in iter_words(sizes):
        assign = dict(fixed)
        assign.update(zip(free, combo))
        word = tuple(assign[i] for i in cells)
        cfg = Configuration(system.alphabet, sided, word)
        cur = cfg
        for i, want in enumerate(target):
            if cur.window(m) != want:
                return False
            if i < horizon:
                cur = step(system, cur)
    return True


@dataclass(frozen=True)
class PointCurve:
    """Density ratio curve over the n grid for one sampled base point."""

    point: str
    ratios: tuple[float, ...]
    exact: bool
    stderrs: Optional[tuple[float, ...]]

    def to_dict(self) -> dict:
        out = {"point": self.point, "ratios": list(self.ratios), "exact": self.exact}
        if self.stderrs is not None:
            out["stderrs"] = list(self.stderrs)
        return out


@dataclass(frozen=True)
class EquicontinuityReport:
    """Per-point ratio curves plus the fraction that look equicontinuous."""

    m: int
    n_list: tuple[int, ...]
    horizon: int
    points: int
    n_samples: int
    delta: float
    seed: int
    curves: tuple[PointCurve, ...]
    fraction: float

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n_list": list(self.n_list),
            "horizon": self.horizon,
            "points": self.points,
            "n_samples": self.n_samples,
            "delta": self.delta,
            "seed": self.seed,
            "curves": [c.to_dict() for c in self.curves],
            "fraction": self.fraction,
        }


def mu_equicontinuity_report(
    system: System,
    mu: Measure,
    m: int,
    n_list: Sequence[int],
    horizon: int,
    points: int = 50,
    n_samples: int = 10_000,
    delta: float = 0.05,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
    threads: int = 1,
) -> EquicontinuityReport:
    """Sample base points from mu and chart their density ratio curves.

    A point counts as equicontinuous at this scale when its ratio at the
    largest n reaches 1 - delta. Exact enumeration is used whenever the
    dependence window fits under the cap; otherwise each (point, n) cell is
    estimated with its own derived seed, so thread count never changes output.
    """
    if points < 1:
        raise ValueError("need at least one base point")
    ns = sorted(set(int(n) for n in n_list))
    if not ns or ns[0] < 1:
        raise ValueError("n_list entries must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")

    if isinstance(system, Rotation):
        _require_lebesgue(mu)
        if m < 1:
            raise ValueError("circle resolution needs m >= 1")

        def rotation_curve(i: int) -> PointCurve:
            angle = mu.sample_point(substream(seed, 0, i))
            ratios = tuple(_rotation_ratio(m, n) for n in ns)
            return PointCurve(point=str(float(angle.angle)), ratios=ratios, exact=True, stderrs=None)

        curves = pmap(rotation_curve, range(points), threads)
    else:
        cantor_mu = _require_cantor_measure(mu)
        sided = system_sided(system)
        rho = dependence_radius(system, m, horizon)
        radius = max(max(ns), rho)
        enum_total = count_words(cell_sizes(system, window_cells(sided, rho)))
        use_exact = enum_total <= cap
        from .core import word_to_str

        def cantor_curve(i: int) -> PointCurve:
            x = cantor_mu.sample_config(sided, radius, substream(seed, 0, i))
            label = word_to_str(x.symbols, x.alphabet)
            if use_exact:
                ratios = tuple(
                    density_ratio_exact(system, cantor_mu, x, m, n, horizon, cap=cap) for n in ns
                )
                return PointCurve(point=label, ratios=ratios, exact=True, stderrs=None)
            ests = [
                density_ratio_estimate(
                    system, cantor_mu, x, m, n, horizon,
                    n_samples=n_samples, seed=derive_seed(seed, 1, i, j),
                )
                for j, n in enumerate(ns)
            ]
            return PointCurve(
                point=label,
                ratios=tuple(e.p_hat for e in ests),
                exact=False,
                stderrs=tuple(e.stderr for e in ests),
            )

        curves = pmap(cantor_curve, range(points), threads)

    hits = sum(1 for c in curves if c.ratios[-1] >= 1.0 - delta)
    return EquicontinuityReport(
        m=m,
        n_list=tuple(ns),
        horizon=horizon,
        points=points,
        n_samples=n_samples,
        delta=delta,
        seed=seed,
        curves=tuple(curves),
        fraction=hits / points,
    )


def _require_lebesgue(mu: Measure) -> LebesgueMeasure:
    if not isinstance(mu, LebesgueMeasure):
        raise UnsupportedSystem("rotation experiments use the Lebesgue measure")
    return mu


def _require_cantor_measure(mu: Measure) -> CantorMeasure:
    if isinstance(mu, LebesgueMeasure):
        raise UnsupportedSystem("configuration-space experiments need a cylinder measure")
    return mu

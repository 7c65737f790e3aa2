"""Product-type measures on configuration spaces, with exact cylinder algebra.

Bernoulli, stationary Markov, and per-coordinate uniform (Haar on a product
of cyclic groups) measures give exact cylinder probabilities; sampling and
conditional sampling are deterministic given a generator or seed. Finite
unions of cylinders support exact density ratios and exact Vitali covers by
clopen refinement, because two cylinders over the same space either nest or
are disjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .core import (
    ONE_SIDED,
    DEFAULT_ENUMERATION_CAP,
    Alphabet,
    CirclePoint,
    Configuration,
    Cylinder,
    ball_cylinder,
    check_sided,
    compare_cylinders,
    count_words,
    iter_words,
    window_cells,
    window_size,
)
from .errors import AlphabetMismatch, EnumerationTooLarge, NullBall, NullCylinder
from .rng import substream

RandomState = Union[int, np.random.Generator]


def as_generator(random_state: RandomState) -> np.random.Generator:
    if isinstance(random_state, np.random.Generator):
        return random_state
    return substream(int(random_state))


def _prob_product(factors: Iterable[float]) -> float:
    """Product of probabilities; log-space once the factor count passes 64."""
    fs = [float(f) for f in factors]
    if any(f == 0.0 for f in fs):
        return 0.0
    if len(fs) <= 64:
        out = 1.0
        for f in fs:
            out *= f
        return out
    return math.exp(math.fsum(math.log(f) for f in fs))


def _inverse_cdf(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Symbols drawn by inverting the cumulative row `cum` at uniforms `u`."""
    out = np.searchsorted(cum, u, side="right")
    return np.minimum(out, len(cum) - 1)


class BernoulliMeasure:
    """i.i.d. symbols with the given weights."""

    def __init__(self, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) < 2:
            raise ValueError("need a weight per symbol, at least two symbols")
        if (w < 0).any():
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
        self.alphabet = Alphabet(len(w))
        self.weights = tuple(float(p) for p in w)
        self._cum = np.cumsum(w)

    def __repr__(self):
        return f"BernoulliMeasure({list(self.weights)})"

    def cell_size(self, i: int) -> int:
        return self.alphabet.size

    def _check_cylinder(self, c: Cylinder) -> None:
        if c.alphabet != self.alphabet:
            raise AlphabetMismatch(
                f"cylinder over alphabet {c.alphabet.size}, measure over {self.alphabet.size}"
            )

    def cylinder_probability(self, c: Cylinder) -> float:
        self._check_cylinder(c)
        return _prob_product(self.weights[s] for s in c.word)

    def sample_config(self, sided: str, radius: int, random_state: RandomState) -> Configuration:
        check_sided(sided)
        rng = as_generator(random_state)
        k = window_size(sided, radius)
        word = tuple(int(s) for s in _inverse_cdf(self._cum, rng.random(k)))
        return Configuration(self.alphabet, sided, word)

    def sample_batch(self, sided: str, radius: int, n: int, rng: np.random.Generator) -> np.ndarray:
        k = window_size(sided, radius)
        return _inverse_cdf(self._cum, rng.random((n, k)))

    def conditional_sample(self, c: Cylinder, radius: int, random_state: RandomState) -> Configuration:
        word = self._conditional_words(c, radius, 1, as_generator(random_state))[0]
        return Configuration(self.alphabet, c.sided, tuple(int(s) for s in word))

    def conditional_batch(self, c: Cylinder, radius: int, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._conditional_words(c, radius, n, rng)

    def _conditional_words(self, c: Cylinder, radius: int, n: int, rng) -> np.ndarray:
        _require_extendable(self, c, radius)
        k = window_size(c.sided, radius)
        out = _inverse_cdf(self._cum, rng.random((n, k)))
        _paste_word(out, c, radius)
        return out


class MarkovMeasure:
    """Stationary Markov chain; two-sided words are anchored by stationarity."""

    def __init__(self, transition: Sequence[Sequence[float]], stationary: Sequence[float] | None = None):
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise ValueError(f"transition matrix must be square (size >= 2), got shape {P.shape}")
        if (P < 0).any():
            raise ValueError("transition probabilities must be non-negative")
        rowsums = P.sum(axis=1)
        if np.abs(rowsums - 1.0).max() > 1e-12:
            raise ValueError("each transition row must sum to 1 within 1e-12")
        if stationary is None:
            pi = self._solve_stationary(P)
        else:
            pi = np.asarray(stationary, dtype=float)
            if pi.shape != (P.shape[0],):
                raise ValueError("stationary vector has the wrong length")
        if (pi <= 0).any():
            raise ValueError("stationary vector must be strictly positive")
        if abs(pi.sum() - 1.0) > 1e-10:
            raise ValueError("stationary vector must sum to 1 within 1e-10")
        if np.abs(pi @ P - pi).max() > 1e-10:
            raise ValueError("stationary vector fails pi P = pi within 1e-10")
        self.alphabet = Alphabet(P.shape[0])
        self.transition = P
        self.stationary = pi
        # time reversal: probability of seeing b one step to the left of a
        self._reverse = (pi[None, :] * P.T) / pi[:, None]
        self._cum_pi = np.cumsum(pi)
        self._cum_rows = np.cumsum(P, axis=1)
        self._cum_rev = np.cumsum(self._reverse, axis=1)
        for M in (self.transition, self.stationary, self._reverse):
            M.setflags(write=False)

    @staticmethod
    def _solve_stationary(P: np.ndarray) -> np.ndarray:
        k = P.shape[0]
        lhs = np.vstack([P.T - np.eye(k), np.ones((1, k))])
        rhs = np.zeros(k + 1)
        rhs[-1] = 1.0
        pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        return pi

    def __repr__(self):
        return f"MarkovMeasure(P={self.transition.tolist()})"

    def cell_size(self, i: int) -> int:
        return self.alphabet.size

    def _check_cylinder(self, c: Cylinder) -> None:
        if c.alphabet != self.alphabet:
            raise AlphabetMismatch(
                f"cylinder over alphabet {c.alphabet.size}, measure over {self.alphabet.size}"
            )

    def cylinder_probability(self, c: Cylinder) -> float:
        self._check_cylinder(c)
        w = c.word
        factors = [float(self.stationary[w[0]])]
        factors.extend(float(self.transition[a, b]) for a, b in zip(w, w[1:]))
        return _prob_product(factors)

    def sample_config(self, sided: str, radius: int, random_state: RandomState) -> Configuration:
        check_sided(sided)
        rng = as_generator(random_state)
        k = window_size(sided, radius)
        word = self._chain_words(k, 1, rng)[0]
        return Configuration(self.alphabet, sided, tuple(int(s) for s in word))

    def sample_batch(self, sided: str, radius: int, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._chain_words(window_size(sided, radius), n, rng)

    def _chain_words(self, k: int, n: int, rng) -> np.ndarray:
        out = np.empty((n, k), dtype=np.int64)
        out[:, 0] = _inverse_cdf(self._cum_pi, rng.random(n))
        for j in range(1, k):
            u = rng.random(n)
            rows = self._cum_rows[out[:, j - 1]]
            out[:, j] = np.minimum(
                (u[:, None] >= rows).sum(axis=1), self.alphabet.size - 1
            )
        return out

    def conditional_sample(self, c: Cylinder, radius: int, random_state: RandomState) -> Configuration:
        word = self._conditional_words(c, radius, 1, as_generator(random_state))[0]
        return Configuration(self.alphabet, c.sided, tuple(int(s) for s in word))

    def conditional_batch(self, c: Cylinder, radius: int, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._conditional_words(c, radius, n, rng)

    def _conditional_words(self, c: Cylinder, radius: int, n: int, rng) -> np.ndarray:
        _require_extendable(self, c, radius)
        k = window_size(c.sided, radius)
        out = np.empty((n, k), dtype=np.int64)
        _paste_word(out, c, radius)
        fixed = window_size(c.sided, c.radius)
        if c.sided == ONE_SIDED:
            lo, hi = 0, fixed  # occupied slots [lo, hi)
        else:
            lo = radius - c.radius
            hi = lo + fixed
        for j in range(hi, k):  # extend rightward with the forward kernel
            u = rng.random(n)
            rows = self._cum_rows[out[:, j - 1]]
            out[:, j] = np.minimum((u[:, None] >= rows).sum(axis=1), self.alphabet.size - 1)
        for j in range(lo - 1, -1, -1):  # extend leftward with the reversed kernel
            u = rng.random(n)
            rows = self._cum_rev[out[:, j + 1]]
            out[:, j] = np.minimum((u[:, None] >= rows).sum(axis=1), self.alphabet.size - 1)
        return out


class ProductMeasure:
    """Independent uniform digits: coordinate i uniform on {0..sizes_at(i)-1}.

    One-sided only; the factor list repeats its last entry for coordinates
    past its end. This is Haar measure on the matching product of cyclic
    groups, the natural invariant measure of the matching odometer.
    """

    def __init__(self, sizes: Sequence[int]):
        sz = tuple(int(s) for s in sizes)
        if not sz or any(s < 2 for s in sz):
            raise ValueError("need at least one factor, every factor size >= 2")
        self.sizes = sz
        self.alphabet = Alphabet(max(sz))

    def __repr__(self):
        return f"ProductMeasure(sizes={list(self.sizes)})"

    def size_at(self, i: int) -> int:
        if i < 0:
            raise ValueError("product measures are one-sided; no negative coordinates")
        return self.sizes[min(i, len(self.sizes) - 1)]

    def cell_size(self, i: int) -> int:
        return self.size_at(i)

    def _check_cylinder(self, c: Cylinder) -> None:
        if c.alphabet != self.alphabet:
            raise AlphabetMismatch(
                f"cylinder over alphabet {c.alphabet.size}, measure over {self.alphabet.size}"
            )
        if c.sided != ONE_SIDED:
            raise AlphabetMismatch("product measures live on one-sided configurations")

    def cylinder_probability(self, c: Cylinder) -> float:
        self._check_cylinder(c)
        factors = []
        for i, s in zip(window_cells(ONE_SIDED, c.radius), c.word):
            if s >= self.size_at(i):
                return 0.0  # outside the digit carrier
            factors.append(1.0 / self.size_at(i))
        return _prob_product(factors)

    def sample_config(self, sided: str, radius: int, random_state: RandomState) -> Configuration:
        if check_sided(sided) != ONE_SIDED:
            raise AlphabetMismatch("product measures live on one-sided configurations")
        rng = as_generator(random_state)
        word = tuple(int(rng.integers(0, self.size_at(i))) for i in range(radius + 1))
        return Configuration(self.alphabet, ONE_SIDED, word)

    def sample_batch(self, sided: str, radius: int, n: int, rng: np.random.Generator) -> np.ndarray:
        if sided != ONE_SIDED:
            raise AlphabetMismatch("product measures live on one-sided configurations")
        cols = [rng.integers(0, self.size_at(i), size=n) for i in range(radius + 1)]
        return np.stack(cols, axis=1)

    def conditional_sample(self, c: Cylinder, radius: int, random_state: RandomState) -> Configuration:
        word = self._conditional_words(c, radius, 1, as_generator(random_state))[0]
        return Configuration(self.alphabet, ONE_SIDED, tuple(int(s) for s in word))

    def conditional_batch(self, c: Cylinder, radius: int, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._conditional_words(c, radius, n, rng)

    def _conditional_words(self, c: Cylinder, radius: int, n: int, rng) -> np.ndarray:
        _require_extendable(self, c, radius)
        out = np.empty((n, radius + 1), dtype=np.int64)
        for i in range(radius + 1):
            out[:, i] = rng.integers(0, self.size_at(i), size=n)
        _paste_word(out, c, radius)
        return out


class LebesgueMeasure:
    """Arc length on the circle; rotations use it analytically, never via cylinders."""

    def __repr__(self):
        return "LebesgueMeasure()"

    def sample_point(self, random_state: RandomState) -> CirclePoint:
        rng = as_generator(random_state)
        return CirclePoint(Fraction(float(rng.random())))

    def sample_angles(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random(n)


CantorMeasure = Union[BernoulliMeasure, MarkovMeasure, ProductMeasure]
Measure = Union[CantorMeasure, LebesgueMeasure]


def _require_extendable(mu: CantorMeasure, c: Cylinder, radius: int) -> None:
    mu._check_cylinder(c)
    if radius < c.radius:
        raise ValueError(
            f"target radius {radius} smaller than the conditioning radius {c.radius}"
        )
    if mu.cylinder_probability(c) == 0.0:
        raise NullCylinder(f"cylinder {c.word} has measure zero; cannot condition on it")


def _paste_word(batch: np.ndarray, c: Cylinder, radius: int) -> None:
    """Overwrite the conditioned window inside rows covering W_radius."""
    fixed = len(c.word)
    if c.sided == ONE_SIDED:
        batch[:, :fixed] = np.asarray(c.word)
    else:
        lo = radius - c.radius
        batch[:, lo : lo + fixed] = np.asarray(c.word)


# -- cylinder-set algebra ------------------------------------------------------

def maximal_cylinders(parts: Sequence[Cylinder]) -> list[Cylinder]:
    """Drop cylinders nested in others; survivors are pairwise disjoint."""
    keep: list[Cylinder] = []
    for c in parts:
        absorbed = False
        survivors: list[Cylinder] = []
        for k in keep:
            rel = compare_cylinders(c, k)
            if rel in ("equal", "a_in_b"):
                absorbed = True  # c adds nothing; keep cannot contain pieces of c
                break
            if rel != "b_in_a":
                survivors.append(k)  # disjoint survives; nested-in-c drops
        if not absorbed:
            survivors.append(c)
            keep = survivors
    return keep


def union_probability(mu: CantorMeasure, parts: Sequence[Cylinder]) -> float:
    """Exact measure of a finite union of cylinders."""
    return float(sum(mu.cylinder_probability(c) for c in maximal_cylinders(parts)))


def lebesgue_density_ratio(
    mu: CantorMeasure, parts: Sequence[Cylinder], x: Configuration, n: int
) -> float:
    """mu(A intersect B_n(x)) / mu(B_n(x)) for A a finite union of cylinders."""
    ball = ball_cylinder(x, n)
    mball = mu.cylinder_probability(ball)
    if mball == 0.0:
        raise NullBall(f"ball of radius 1/{n} around the point has measure zero")
    num = 0.0
    for c in maximal_cylinders(parts):
        rel = compare_cylinders(c, ball)
        if rel in ("equal", "b_in_a"):
            return 1.0  # the ball sits inside one piece of A
        if rel == "a_in_b":
            num += mu.cylinder_probability(c)
    return num / mball


@dataclass(frozen=True)
class BallFamily:
    """Pairwise disjoint balls, each given as (center configuration, radius)."""

    balls: tuple[tuple[Configuration, int], ...]

    def __post_init__(self):
        cyls = self.cylinders()
        for i in range(len(cyls)):
            for j in range(i + 1, len(cyls)):
                if compare_cylinders(cyls[i], cyls[j]) != "disjoint":
                    raise ValueError(
                        f"balls {i} and {j} are not disjoint (words clash on the shorter radius)"
                    )

    def cylinders(self) -> list[Cylinder]:
        return [ball_cylinder(center, n) for center, n in self.balls]

    def total_mass(self, mu: CantorMeasure) -> float:
        return float(sum(mu.cylinder_probability(c) for c in self.cylinders()))


def vitali_cover(
    mu: CantorMeasure,
    parts: Sequence[Cylinder],
    min_radius: int,
    eps: float = 0.0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> BallFamily:
    """Disjoint balls of radius >= min_radius covering a cylinder union exactly.

    Clopen refinement: every maximal piece either already is a ball of large
    enough radius, or splits into all of its extensions at min_radius. The
    leftover mu(A minus union of balls) is exactly zero, so any eps >= 0 is met.
    """
    if min_radius < 1:
        raise ValueError("balls need radius >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    pieces = maximal_cylinders(parts)
    if not pieces:
        return BallFamily(())
    sided = pieces[0].sided
    total = 0
    for c in pieces:
        if c.radius < min_radius:
            free = [i for i in window_cells(sided, min_radius) if i not in set(window_cells(sided, c.radius))]
            total += count_words([mu.cell_size(i) for i in free])
        else:
            total += 1
    if total > cap:
        raise EnumerationTooLarge(total, cap, "clopen refinement")
    balls: list[tuple[Configuration, int]] = []
    for c in pieces:
        if c.radius >= min_radius:
            balls.append((c.as_configuration(), c.radius))
            continue
        cells = list(window_cells(sided, min_radius))
        inner = set(window_cells(sided, c.radius))
        free = [i for i in cells if i not in inner]
        fixed = dict(zip(window_cells(sided, c.radius), c.word))
        for combo in iter_words([mu.cell_size(i) for i in free]):
            assign = dict(fixed)
            assign.update(zip(free, combo))
            word = tuple(assign[i] for i in cells)
            center = Configuration(mu.alphabet, sided, word)
            balls.append((center, min_radius))
    return BallFamily(tuple(balls))


# -- external interface --------------------------------------------------------

def measure_from_dict(d: dict) -> Measure:
    kind = d.get("type")
    if kind == "bernoulli":
        return BernoulliMeasure(d["weights"])
    if kind == "markov":
        return MarkovMeasure(d["P"], d.get("pi"))
    if kind == "haar":
        return ProductMeasure(d["sizes"])
    if kind == "lebesgue":
        return LebesgueMeasure()
    raise ValueError(f"unknown measure type {kind!r}")


def measure_to_dict(mu: Measure) -> dict:
    if isinstance(mu, BernoulliMeasure):
        return {"type": "bernoulli", "weights": list(mu.weights)}
    if isinstance(mu, MarkovMeasure):
        return {
            "type": "markov",
            "P": [[float(v) for v in row] for row in mu.transition],
            "pi": [float(v) for v in mu.stationary],
        }
    if isinstance(mu, ProductMeasure):
        return {"type": "haar", "sizes": list(mu.sizes)}
    if isinstance(mu, LebesgueMeasure):
        return {"type": "lebesgue"}
    raise ValueError(f"not a known measure: {mu!r}")

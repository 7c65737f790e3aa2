"""Dynamical systems: cellular automata, the shift, odometers, rotations.

A radius-r cellular automaton maps a configuration of valid radius R to one
of valid radius R - r: only cells whose full neighborhood is known get an
image, and nothing is ever padded. Odometers act on one-sided digit strings
(add one, carry to the right) and keep the valid radius, since the first
R + 1 digits of the successor depend only on the first R + 1 digits of the
argument. Rotations act on exact circle points.

Scalar dynamics work on Configuration objects; `step_batch` runs the same
rules over numpy sample matrices for the Monte Carlo paths. The two
implementations are deliberately independent of each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .core import (
    ONE_SIDED,
    TWO_SIDED,
    Alphabet,
    CirclePoint,
    Configuration,
    check_sided,
    word_from_str,
    word_to_str,
)
from .errors import InsufficientRadius, UnsupportedSystem


@dataclass(frozen=True)
class CARule:
    """Total rule table over neighborhoods of radius r.

    One-sided neighborhoods look rightward: cell i maps under the word at
    {i, .., i+r}. Two-sided neighborhoods are centered: {i-r, .., i+r}.
    """

    alphabet: Alphabet
    sided: str
    radius: int
    table: dict[tuple[int, ...], int]

    def __post_init__(self):
        check_sided(self.sided)
        if self.radius < 0:
            raise ValueError(f"rule radius must be >= 0, got {self.radius}")
        width = self.neighborhood_size
        expected = self.alphabet.size ** width
        if len(self.table) != expected:
            raise ValueError(
                f"rule table must be total: need {expected} neighborhoods, got {len(self.table)}"
            )
        for nb, out in self.table.items():
            if len(nb) != width or any(not 0 <= s < self.alphabet.size for s in nb):
                raise ValueError(f"bad neighborhood {nb!r}")
            if not 0 <= out < self.alphabet.size:
                raise ValueError(f"bad output symbol {out!r} for {nb!r}")

    @property
    def neighborhood_size(self) -> int:
        return self.radius + 1 if self.sided == ONE_SIDED else 2 * self.radius + 1

    def flat_table(self) -> np.ndarray:
        """Outputs indexed by the neighborhood word read as a base-|A| number."""
        size = self.alphabet.size
        width = self.neighborhood_size
        flat = np.zeros(size ** width, dtype=np.int64)
        for nb, out in self.table.items():
            code = 0
            for s in nb:
                code = code * size + s
            flat[code] = out
        return flat


@dataclass(frozen=True)
class Shift:
    """The one-sided shift as a primitive: (Tx)_i = x_{i+1}."""

    alphabet: Alphabet = Alphabet(2)


@dataclass(frozen=True)
class Odometer:
    """Adding machine on a product of cyclic groups; the last factor repeats."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes or any(s < 2 for s in self.sizes):
            raise ValueError("need at least one factor, every factor size >= 2")

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(max(self.sizes))

    def size_at(self, i: int) -> int:
        if i < 0:
            raise ValueError("odometer digits are one-sided")
        return self.sizes[min(i, len(self.sizes) - 1)]

    def window_period(self, m: int) -> int:
        """Cycle length of the digits in W_m: the product of their sizes."""
        out = 1
        for i in range(m + 1):
            out *= self.size_at(i)
        return out


@dataclass(frozen=True)
class Rotation:
    """Rigid rotation of the circle by alpha, held exactly as a rational."""

    alpha: Fraction

    def __post_init__(self):
        a = self.alpha if isinstance(self.alpha, Fraction) else Fraction(self.alpha)
        object.__setattr__(self, "alpha", a)
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie strictly between 0 and 1, got {self.alpha}")


System = Union[CARule, Shift, Odometer, Rotation]
CantorSystem = Union[CARule, Shift, Odometer]


# -- rule constructors ---------------------------------------------------------

def identity_rule(alphabet: Alphabet, sided: str = ONE_SIDED, radius: int = 0) -> CARule:
    """Rule mapping every neighborhood to the symbol at its own cell."""
    check_sided(sided)
    width = radius + 1 if sided == ONE_SIDED else 2 * radius + 1
    center = 0 if sided == ONE_SIDED else radius
    table = {}
    for nb in _all_words(alphabet.size, width):
        table[nb] = nb[center]
    return CARule(alphabet, sided, radius, table)


def shift_as_ca(alphabet: Alphabet = Alphabet(2)) -> CARule:
    """The one-sided shift written as a radius-1 one-sided rule table."""
    table = {(a, b): b for a in alphabet.symbols() for b in alphabet.symbols()}
    return CARule(alphabet, ONE_SIDED, 1, table)


def eca_rule(number: int) -> CARule:
    """Elementary CA: binary, two-sided, radius 1, Wolfram numbering."""
    if not 0 <= number <= 255:
        raise ValueError(f"Wolfram numbers run 0..255, got {number}")
    table = {}
    for l in (0, 1):
        for c in (0, 1):
            for r in (0, 1):
                code = 4 * l + 2 * c + r
                table[(l, c, r)] = (number >> code) & 1
    return CARule(Alphabet(2), TWO_SIDED, 1, table)


def wolfram_number(rule: CARule) -> int:
    """Inverse of eca_rule; defined only for binary two-sided radius-1 rules."""
    if rule.alphabet.size != 2 or rule.sided != TWO_SIDED or rule.radius != 1:
        raise ValueError("Wolfram numbering needs a binary two-sided radius-1 rule")
    number = 0
    for (l, c, r), out in rule.table.items():
        number |= out << (4 * l + 2 * c + r)
    return number


def _all_words(size: int, width: int):
    import itertools

    return itertools.product(range(size), repeat=width)


# -- scalar dynamics -----------------------------------------------------------

def step(system: System, x):
    """One application of the map; CA output loses r of valid radius."""
    if isinstance(system, CARule):
        return _step_ca(system, x)
    if isinstance(system, Shift):
        return _step_shift(system, x)
    if isinstance(system, Odometer):
        return _step_odometer(system, x)
    if isinstance(system, Rotation):
        if not isinstance(x, CirclePoint):
            raise UnsupportedSystem("rotations act on circle points")
        return CirclePoint(x.angle + system.alpha)
    raise UnsupportedSystem(f"unknown system {system!r}")


def _check_cantor_arg(system: CantorSystem, x: Configuration, sided: str) -> None:
    if not isinstance(x, Configuration):
        raise UnsupportedSystem(f"{type(system).__name__} acts on configurations")
    if x.alphabet != system.alphabet:
        raise ValueError(
            f"configuration over alphabet {x.alphabet.size}, system over {system.alphabet.size}"
        )
    if x.sided != sided:
        raise ValueError(f"system needs {sided!r}-sided configurations, got {x.sided!r}")


def _step_ca(rule: CARule, x: Configuration) -> Configuration:
    _check_cantor_arg(rule, x, rule.sided)
    r = rule.radius
    R = x.radius
    if R - r < 0:
        raise InsufficientRadius(
            f"radius-{r} rule needs valid radius >= {r}, configuration has {R}"
        )
    w = x.symbols
    width = rule.neighborhood_size
    out = tuple(
        rule.table[w[j : j + width]] for j in range(len(w) - width + 1)
    )
    return Configuration(x.alphabet, x.sided, out)


def _step_shift(system: Shift, x: Configuration) -> Configuration:
    _check_cantor_arg(system, x, ONE_SIDED)
    if x.radius < 1:
        raise InsufficientRadius("shifting needs valid radius >= 1")
    return Configuration(x.alphabet, ONE_SIDED, x.symbols[1:])


def _step_odometer(system: Odometer, x: Configuration) -> Configuration:
    _check_cantor_arg(system, x, ONE_SIDED)
    digits = list(x.symbols)
    for i, d in enumerate(digits):
        if d >= system.size_at(i):
            raise ValueError(f"digit {d} at coordinate {i} exceeds factor size {system.size_at(i)}")
    for i in range(len(digits)):
        if digits[i] + 1 < system.size_at(i):
            digits[i] += 1
            break
        digits[i] = 0  # carry rolls rightward; past the window it is invisible here
    return Configuration(x.alphabet, ONE_SIDED, tuple(digits))


def system_sided(system: CantorSystem) -> str:
    if isinstance(system, CARule):
        return system.sided
    return ONE_SIDED


def step_cost(system: CantorSystem) -> int:
    """Valid radius lost per application of the map."""
    if isinstance(system, CARule):
        return system.radius
    if isinstance(system, Shift):
        return 1
    return 0


def dependence_radius(system: CantorSystem, m: int, horizon: int) -> int:
    """Input radius that determines the column trace at resolution m to `horizon`."""
    if isinstance(system, Rotation):
        raise UnsupportedSystem("rotations have no window dependence radius")
    return m + step_cost(system) * horizon


def cell_sizes(system: CantorSystem, cells) -> list[int]:
    """Symbol count available at each cell (odometer digits vary by coordinate)."""
    if isinstance(system, Odometer):
        return [system.size_at(i) for i in cells]
    return [system.alphabet.size for _ in cells]


def column_trace(system: CantorSystem, x: Configuration, m: int, horizon: int) -> list[tuple[int, ...]]:
    """Words (T^i x)_{W_m} for i = 0..horizon."""
    if isinstance(system, Rotation):
        raise UnsupportedSystem("rotations have no symbolic column trace")
    if m < 0 or horizon < 0:
        raise ValueError("resolution and horizon must be >= 0")
    need = dependence_radius(system, m, horizon)
    if x.radius < need:
        raise InsufficientRadius(
            f"trace to horizon {horizon} at resolution {m} needs valid radius {need}, "
            f"configuration has {x.radius}"
        )
    words = []
    cur = x
    for i in range(horizon + 1):
        words.append(cur.window(m))
        if i < horizon:
            cur = step(system, cur)
    return words


# -- vectorized dynamics -------------------------------------------------------

def step_batch(system: CantorSystem, arr: np.ndarray) -> np.ndarray:
    """Apply the map to every row of `arr` (rows list window cells ascending).

    Output rows cover a window narrower by step_cost(system) cells per side
    that the dynamics consumes, exactly matching the scalar `step`.
    """
    if isinstance(system, CARule):
        size = system.alphabet.size
        width = system.neighborhood_size
        if arr.shape[1] < width:
            raise InsufficientRadius("batch window narrower than one neighborhood")
        flat = system.flat_table()
        code = np.zeros((arr.shape[0], arr.shape[1] - width + 1), dtype=np.int64)
        for k in range(width):
            code = code * size + arr[:, k : arr.shape[1] - width + 1 + k]
        return flat[code]
    if isinstance(system, Shift):
        if arr.shape[1] < 2:
            raise InsufficientRadius("batch window narrower than two cells")
        return arr[:, 1:]
    if isinstance(system, Odometer):
        out = arr.copy()
        carry = np.ones(arr.shape[0], dtype=bool)
        for i in range(arr.shape[1]):
            if not carry.any():
                break
            bumped = out[:, i] + carry
            wrap = carry & (bumped >= system.size_at(i))
            out[:, i] = np.where(wrap, 0, bumped)
            carry = wrap
        return out
    raise UnsupportedSystem(f"no batch stepper for {system!r}")


def window_slice(sided: str, covered_radius: int, m: int, arr: np.ndarray) -> np.ndarray:
    """Columns of `arr` (covering W_covered_radius) that form W_m."""
    if m > covered_radius:
        raise InsufficientRadius(f"window W_{m} not covered at radius {covered_radius}")
    if sided == ONE_SIDED:
        return arr[:, : m + 1]
    mid = covered_radius
    return arr[:, mid - m : mid + m + 1]


def trace_agreement_batch(
    system: CantorSystem,
    trace_words: Sequence[tuple[int, ...]],
    arr: np.ndarray,
    m: int,
    covered_radius: int,
) -> np.ndarray:
    """Boolean row mask: does the row's column trace equal `trace_words`?

    `arr` rows must cover W_covered_radius with covered_radius at least the
    dependence radius for (m, len(trace_words) - 1).
    """
    horizon = len(trace_words) - 1
    sided = system_sided(system)
    need = dependence_radius(system, m, horizon)
    if covered_radius < need:
        raise InsufficientRadius(
            f"batch covers radius {covered_radius}, trace needs {need}"
        )
    alive = np.ones(arr.shape[0], dtype=bool)
    cur = arr
    radius = covered_radius
    for i, target in enumerate(trace_words):
        win = window_slice(sided, radius, m, cur)
        alive &= (win == np.asarray(target)).all(axis=1)
        if not alive.any() or i == horizon:
            break
        cur = step_batch(system, cur)
        radius -= step_cost(system)
    return alive


# -- external interface --------------------------------------------------------

def system_from_dict(d: dict) -> System:
    kind = d.get("type")
    if kind == "eca":
        return eca_rule(int(d["rule"]))
    if kind == "ca":
        alphabet = Alphabet(int(d.get("alphabet", 2)))
        sided = d.get("sided", TWO_SIDED)
        radius = int(d["radius"])
        table = {
            word_from_str(key, alphabet): int(val) for key, val in d["table"].items()
        }
        return CARule(alphabet, sided, radius, table)
    if kind == "shift":
        return Shift(Alphabet(int(d.get("alphabet", 2))))
    if kind == "odometer":
        return Odometer(tuple(d["sizes"]))
    if kind == "rotation":
        return Rotation(Fraction(str(d["alpha"])))
    raise ValueError(f"unknown system type {kind!r}")


def system_to_dict(system: System) -> dict:
    if isinstance(system, CARule):
        w = wolfram_number(system) if (
            system.alphabet.size == 2 and system.sided == TWO_SIDED and system.radius == 1
        ) else None
        if w is not None:
            return {"type": "eca", "rule": w}
        return {
            "type": "ca",
            "alphabet": system.alphabet.size,
            "sided": system.sided,
            "radius": system.radius,
            "table": {
                word_to_str(nb, system.alphabet): out for nb, out in sorted(system.table.items())
            },
        }
    if isinstance(system, Shift):
        return {"type": "shift", "alphabet": system.alphabet.size}
    if isinstance(system, Odometer):
        return {"type": "odometer", "sizes": list(system.sizes)}
    if isinstance(system, Rotation):
        return {"type": "rotation", "alpha": str(system.alpha)}
    raise ValueError(f"not a known system: {system!r}")

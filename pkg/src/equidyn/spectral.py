"""Continuous Koopman eigenfunction candidates built from locally periodic points.

A point y whose column trace at resolution m is genuinely periodic (an LP
certificate with q = 0, period p) yields candidate eigenfunctions

    f_k = sum_{j=0..p-1} lambda^{j k} 1_{B(T^j y)},   lambda = e^{2 pi i / p},

with the orbit balls taken at a finite horizon. The composition relation
f_k(Tx) = lambda^k f_k(x) holds exactly for isometric systems and is
measured, not assumed, everywhere else: residuals and inner products are
integrated exactly over the coarsest cylinder partition that refines every
ball event, or sampled when that partition is too large.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

from .core import (
    DEFAULT_ENUMERATION_CAP,
    Configuration,
    Cylinder,
    count_words,
    iter_words,
    window_cells,
)
from .errors import EnumerationTooLarge, InsufficientRadius, OverlappingBalls
from .measures import CantorMeasure
from .periodicity import lep_certificate
from .rng import substream
from .systems import (
    CantorSystem,
    cell_sizes,
    dependence_radius,
    step,
    step_cost,
    system_sided,
)


def root_of_unity(p: int, j: int) -> complex:
    """exp(2 pi i j / p), with j reduced mod p before the exponential."""
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    return cmath.exp(2j * math.pi * (j % p) / p)


@dataclass(frozen=True)
class EigenfunctionSpec:
    """Candidate eigenfunction from an LP-certified base point.

    eigenvalue() gives lambda^k as the pair (k, p) turned into a root of
    unity, so the phase stays exact until the final complex conversion.
    """

    system: CantorSystem
    y: Configuration
    m: int
    k: int
    period: int
    cert_horizon: int

    def eigenvalue(self) -> complex:
        return root_of_unity(self.period, self.k)

    def eigenvalue_exponent(self) -> tuple[int, int]:
        return (self.k % self.period, self.period)


def build_eigenfunction(
    system: CantorSystem, y: Configuration, m: int, k: int, cert_horizon: int
) -> EigenfunctionSpec:
    """Certify y as genuinely periodic at resolution m, then wrap (y, m, k)."""
    cert = lep_certificate(system, y, m, cert_horizon)
    if cert is None:
        raise ValueError(
            f"no periodicity certificate at resolution {m}, horizon {cert_horizon}"
        )
    if cert.q != 0:
        raise ValueError(
            f"base point is only eventually periodic (preperiod {cert.q}); "
            "eigenfunctions need genuine periodicity (q = 0)"
        )
    if not 0 <= k < cert.p:
        raise ValueError(f"k must lie in [0, {cert.p}), got {k}")
    return EigenfunctionSpec(
        system=system, y=y, m=m, k=k, period=cert.p, cert_horizon=cert_horizon
    )


@dataclass(frozen=True)
class _EvalTable:
    """word on W_rho -> orbit index j, for the p pairwise disjoint ball events."""

    rho: int
    period: int
    index: dict

    def lookup(self, x: Configuration) -> Optional[int]:
        if x.radius < self.rho:
            raise InsufficientRadius(
                f"evaluation needs valid radius {self.rho}, have {x.radius}"
            )
        return self.index.get(x.window(self.rho))

    def lookup_word(self, word: tuple) -> Optional[int]:
        return self.index.get(word)


def _orbit_points(spec: EigenfunctionSpec, rho: int) -> list[Configuration]:
    pts = [spec.y]
    cost = step_cost(spec.system)
    need = rho + cost * (spec.period - 1)
    if spec.y.radius < need:
        raise InsufficientRadius(
            f"base point needs valid radius {need} to trace its whole cycle, "
            f"have {spec.y.radius}"
        )
    for _ in range(spec.period - 1):
        pts.append(step(spec.system, pts[-1]))
    return pts


def event_table(
    spec: EigenfunctionSpec, horizon: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> _EvalTable:
    """Build the p ball events at this horizon and verify pairwise disjointness."""
    from .orbit import orbit_ball_event

    rho = dependence_radius(spec.system, spec.m, horizon)
    index: dict = {}
    for j, point in enumerate(_orbit_points(spec, rho)):
        event = orbit_ball_event(spec.system, point, spec.m, horizon, cap=cap)
        for word in event.words:
            if word in index:
                raise OverlappingBalls(
                    f"orbit balls {index[word]} and {j} share the word {word} "
                    f"at horizon {horizon}; the horizon is too short to separate them"
                )
            index[word] = j
    return _EvalTable(rho=rho, period=spec.period, index=index)


def eigenfunction_eval(
    spec: EigenfunctionSpec,
    x: Configuration,
    horizon: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
    table: Optional[_EvalTable] = None,
) -> complex:
    """f_k(x): lambda^{j k} on the j-th orbit ball, 0 outside all of them."""
    tab = table if table is not None else event_table(spec, horizon, cap)
    j = tab.lookup(x)
    if j is None:
        return 0j
    return root_of_unity(spec.period, j * spec.k)


def _partition_sizes(system: CantorSystem, radius: int, cap: int):
    sided = system_sided(system)
    cells = list(window_cells(sided, radius))
    sizes = cell_sizes(system, cells)
    total = count_words(sizes)
    if total > cap:
        raise EnumerationTooLarge(total, cap, "cylinder partition")
    return sided, sizes


def koopman_residual(
    spec: EigenfunctionSpec,
    mu: CantorMeasure,
    horizon: int,
    mode: str = "exact",
    n_samples: int = 10_000,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """L2(mu) norm of f_k(T x) - lambda^k f_k(x) at this horizon.

    Exact mode integrates over the cylinder partition at the dependence
    radius of x -> (f(x), f(Tx)); sampled mode draws x from mu.
    """
    tab = event_table(spec, horizon, cap)
    lam = spec.eigenvalue()
    system = spec.system
    part_radius = tab.rho + step_cost(system)

    def defect(x: Configuration) -> complex:
        fx = eigenfunction_eval(spec, x, horizon, table=tab)
        ftx = eigenfunction_eval(spec, step(system, x), horizon, table=tab)
        return ftx - lam * fx

    if mode == "exact":
        sided, sizes = _partition_sizes(system, part_radius, cap)
        total = 0.0
        for word in iter_words(sizes):
            cfg = Configuration(system.alphabet, sided, word)
            v = defect(cfg)
            if v != 0:
                mass = mu.cylinder_probability(Cylinder(system.alphabet, sided, part_radius, word))
                total += (v.real * v.real + v.imag * v.imag) * mass
        return math.sqrt(total)
    if mode == "sampled":
        sided = system_sided(system)
        batch = mu.sample_batch(sided, part_radius, n_samples, substream(seed, 0))
        acc = 0.0
        for row in batch:
            cfg = Configuration(system.alphabet, sided, tuple(int(s) for s in row))
            v = defect(cfg)
            acc += v.real * v.real + v.imag * v.imag
        return math.sqrt(acc / n_samples)
    raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")


def inner_product(
    a: EigenfunctionSpec,
    b: EigenfunctionSpec,
    mu: CantorMeasure,
    horizon: int,
    mode: str = "exact",
    n_samples: int = 10_000,
    seed: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> complex:
    """<f_a, f_b> in L2(mu), integrating f_a conj(f_b) at this horizon."""
    if a.system != b.system:
        raise ValueError("inner products need eigenfunctions over the same system")
    tab_a = event_table(a, horizon, cap)
    tab_b = event_table(b, horizon, cap)
    system = a.system
    radius = max(tab_a.rho, tab_b.rho)
    sided = system_sided(system)

    def value(cfg: Configuration) -> complex:
        fa = eigenfunction_eval(a, cfg, horizon, table=tab_a)
        if fa == 0:
            return 0j
        fb = eigenfunction_eval(b, cfg, horizon, table=tab_b)
        return fa * fb.conjugate()

    if mode == "exact":
        sided2, sizes = _partition_sizes(system, radius, cap)
        total = 0j
        for word in iter_words(sizes):
            cfg = Configuration(system.alphabet, sided2, word)
            v = value(cfg)
            if v != 0:
                total += v * mu.cylinder_probability(
                    Cylinder(system.alphabet, sided2, radius, word)
                )
        return total
    if mode == "sampled":
        batch = mu.sample_batch(sided, radius, n_samples, substream(seed, 0))
        total = 0j
        for row in batch:
            cfg = Configuration(system.alphabet, sided, tuple(int(s) for s in row))
            total += value(cfg)
        return total / n_samples
    raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")

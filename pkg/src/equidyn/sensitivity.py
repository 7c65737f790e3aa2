"""Pairwise sensitivity at scale eps, and the sensitivity/equicontinuity dichotomy.

A pair (x, y) is eps-separated by horizon T when some iterate 1 <= n <= T
has d(T^n x, T^n y) >= eps. Since the attainable distance values are
2 > 3/2 > 1 > 1/2 > ..., the test "d >= eps" reduces to disagreement on an
explicit witness window, which keeps the finite-radius computation exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .core import CirclePoint, check_compatible, circle_distance
from .errors import InsufficientRadius, UnsupportedSystem
from .measures import Measure
from .orbit import EquicontinuityReport, mu_equicontinuity_report, _require_cantor_measure, _require_lebesgue
from .rng import derive_seed, substream
from .systems import (
    Rotation,
    System,
    step,
    step_batch,
    step_cost,
    system_sided,
    window_slice,
)

EpsLike = Union[int, float, Fraction]


def separation_window(eps: EpsLike) -> int:
    """Smallest w such that agreement on W_w refutes d >= eps.

    Distance values by largest agreement radius L: d = 2 for L = -1 (origin
    mismatch), 3/2 for L = 0, 1/L for L >= 1. "d >= eps" says L <= L(eps);
    agreement on W_{L(eps)+1} rules it out.
    """
    e = eps if isinstance(eps, Fraction) else Fraction(eps)
    if not 0 < e <= 2:
        raise ValueError(f"eps must lie in (0, 2], got {eps}")
    if e > Fraction(3, 2):
        return 0
    if e > 1:
        return 1
    return int(1 / e) + 1


def sensitive_pair_test(system: System, x, y, eps: EpsLike, horizon: int) -> bool:
    """Does some iterate 1 <= n <= horizon push x and y at least eps apart?"""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(system, Rotation):
        if not (isinstance(x, CirclePoint) and isinstance(y, CirclePoint)):
            raise UnsupportedSystem("rotation sensitivity takes circle points")
        e = eps if isinstance(eps, Fraction) else Fraction(eps)
        # isometry: every iterate keeps the starting distance
        return circle_distance(x, y) >= e
    check_compatible(x, y)
    w = separation_window(eps)
    need = w + step_cost(system) * horizon
    if x.radius < need or y.radius < need:
        raise InsufficientRadius(
            f"horizon {horizon} at eps={eps} needs valid radius {need}, "
            f"have {x.radius} and {y.radius}"
        )
    cx, cy = x, y
    for _ in range(horizon):
        cx = step(system, cx)
        cy = step(system, cy)
        if cx.window(w) != cy.window(w):
            return True
    return False


@dataclass(frozen=True)
class SensitivityEstimate:
    """Monte Carlo estimate of the mu x mu mass of eps-separated pairs."""

    eps: float
    horizon: int
    p_hat: float
    stderr: float
    n_samples: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "T": self.horizon,
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def mu_sensitivity_estimate(
    system: System,
    mu: Measure,
    eps: EpsLike,
    horizon: int,
    n_samples: int = 10_000,
    seed: int = 0,
) -> SensitivityEstimate:
    """Sample independent pairs from mu and count eps-separation by the horizon."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if isinstance(system, Rotation):
        _require_lebesgue(mu)
        ax = substream(seed, 0).random(n_samples)
        ay = substream(seed, 1).random(n_samples)
        gap = np.abs(ax - ay)
        dist = np.minimum(gap, 1.0 - gap)
        p_hat = float((dist >= float(eps)).mean())
    else:
        cantor_mu = _require_cantor_measure(mu)
        sided = system_sided(system)
        w = separation_window(eps)
        cost = step_cost(system)
        radius = w + cost * horizon
        bx = cantor_mu.sample_batch(sided, radius, n_samples, substream(seed, 0))
        by = cantor_mu.sample_batch(sided, radius, n_samples, substream(seed, 1))
        separated = np.zeros(n_samples, dtype=bool)
        cur = radius
        for _ in range(horizon):
            bx = step_batch(system, bx)
            by = step_batch(system, by)
            cur -= cost
            wx = window_slice(sided, cur, w, bx)
            wy = window_slice(sided, cur, w, by)
            separated |= (wx != wy).any(axis=1)
            if separated.all():
                break
        p_hat = float(separated.mean())
    stderr = math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_samples)
    return SensitivityEstimate(
        eps=float(eps), horizon=horizon, p_hat=p_hat, stderr=stderr,
        n_samples=n_samples, seed=seed,
    )


@dataclass(frozen=True)
class DichotomyReport:
    """Sensitivity curve, equicontinuity cross-check, and the scale verdict.

    The verdicts deliberately leave room: "inconclusive at scale" is the
    honest answer whenever neither side of the dichotomy shows up cleanly
    at the chosen resolutions and horizons.
    """

    eps_list: tuple[float, ...]
    horizon: int
    delta_s: float
    delta_e: float
    sensitivity: tuple[SensitivityEstimate, ...]
    equicontinuity: EquicontinuityReport
    verdict: str

    def to_dict(self) -> dict:
        return {
            "eps_list": list(self.eps_list),
            "T": self.horizon,
            "delta_s": self.delta_s,
            "delta_e": self.delta_e,
            "sensitivity": [e.to_dict() for e in self.sensitivity],
            "equicontinuity": self.equicontinuity.to_dict(),
            "verdict": self.verdict,
        }


def dichotomy_report(
    system: System,
    mu: Measure,
    eps_list: Sequence[EpsLike],
    horizon: int,
    equi_params: dict,
    n_samples: int = 10_000,
    delta_s: float = 0.05,
    delta_e: float = 0.05,
    seed: int = 0,
    threads: int = 1,
) -> DichotomyReport:
    """Run both sides of the dichotomy and pronounce a scale-level verdict.

    mu-sensitive: some eps separates a 1 - delta_s mass of pairs while the
    equicontinuity fraction stays under delta_e. mu-equicontinuous: the
    mirrored situation (fraction over 1 - delta_e, no eps anywhere near
    full separation). Anything else is inconclusive at this scale.
    """
    if not eps_list:
        raise ValueError("need at least one eps")
    estimates = tuple(
        mu_sensitivity_estimate(
            system, mu, eps, horizon,
            n_samples=n_samples, seed=derive_seed(seed, 0, idx),
        )
        for idx, eps in enumerate(eps_list)
    )
    equi = mu_equicontinuity_report(
        system, mu,
        m=equi_params["m"],
        n_list=equi_params["n_list"],
        horizon=equi_params["horizon"],
        points=equi_params.get("points", 50),
        n_samples=equi_params.get("n_samples", n_samples),
        delta=equi_params.get("delta", 0.05),
        seed=derive_seed(seed, 1),
        threads=threads,
    )
    fires = any(e.p_hat >= 1.0 - delta_s for e in estimates)
    if fires and equi.fraction <= delta_e:
        verdict = "mu-sensitive"
    elif equi.fraction >= 1.0 - delta_e and not fires:
        verdict = "mu-equicontinuous"
    else:
        verdict = "inconclusive at scale"
    return DichotomyReport(
        eps_list=tuple(float(e) for e in eps_list),
        horizon=horizon,
        delta_s=delta_s,
        delta_e=delta_e,
        sensitivity=estimates,
        equicontinuity=equi,
        verdict=verdict,
    )

"""Local periodicity certificates for column traces, and their statistics.

A certificate (p, q) for a trace t_0..t_T says t_i = t_{i+p} for all
q <= i <= T - p, with at least two full periods of evidence after the
preperiod (T - q >= 2p). Detection returns the smallest p admitting any
valid q, then the smallest q for that p. A certificate only ever claims
periodicity at the certified (resolution, horizon) scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Configuration
from .measures import CantorMeasure
from .rng import derive_seed, pmap, substream
from .systems import CantorSystem, column_trace, dependence_radius, system_sided


@dataclass(frozen=True)
class PeriodCertificate:
    """Eventual periodicity of a column trace, certified at one horizon."""

    p: int
    q: int
    horizon: int
    m: Optional[int] = None

    def __post_init__(self):
        if self.p < 1 or self.q < 0:
            raise ValueError(f"need p >= 1 and q >= 0, got ({self.p}, {self.q})")
        if self.horizon - self.q < 2 * self.p:
            raise ValueError(
                f"horizon {self.horizon} leaves under two periods of evidence "
                f"for (p={self.p}, q={self.q})"
            )

    @property
    def kind(self) -> str:
        return "LP" if self.q == 0 else "LEP"

    def to_dict(self) -> dict:
        return {"m": self.m, "T": self.horizon, "p": self.p, "q": self.q, "kind": self.kind}


def certificate_holds(trace: Sequence, p: int, q: int) -> bool:
    """Does (p, q) satisfy the periodic relation and evidence bound on `trace`?"""
    horizon = len(trace) - 1
    if p < 1 or q < 0 or horizon - q < 2 * p:
        return False
    return all(trace[i] == trace[i + p] for i in range(q, horizon - p + 1))


def detect_eventual_period(trace: Sequence, m: Optional[int] = None) -> Optional[PeriodCertificate]:
    """Smallest p with a valid preperiod, then smallest q for that p; or None."""
    horizon = len(trace) - 1
    if horizon < 0:
        raise ValueError("empty trace")
    for p in range(1, horizon // 2 + 1):
        q_min = 0
        for i in range(horizon - p, -1, -1):
            if trace[i] != trace[i + p]:
                q_min = i + 1
                break
        if horizon - q_min >= 2 * p:
            return PeriodCertificate(p=p, q=q_min, horizon=horizon, m=m)
    return None


def lep_certificate(
    system: CantorSystem, x: Configuration, m: int, horizon: int
) -> Optional[PeriodCertificate]:
    """Certify eventual periodicity of x's column trace at resolution m."""
    trace = column_trace(system, x, m, horizon)
    return detect_eventual_period(trace, m=m)


@dataclass(frozen=True)
class LepStatistics:
    """Sampled certificate statistics at one resolution."""

    m: int
    eps: float
    horizon: int
    n_samples: int
    seed: int
    certified_fraction: float
    lp_fraction: float  # certified with q == 0
    p_quantile: Optional[int]
    q_quantile: Optional[int]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "eps": self.eps,
            "T": self.horizon,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "certified_fraction": self.certified_fraction,
            "lp_fraction": self.lp_fraction,
            "p_quantile": self.p_quantile,
            "q_quantile": self.q_quantile,
        }


def lep_statistics(
    system: CantorSystem,
    mu: CantorMeasure,
    m: int,
    eps: float = 0.05,
    n_samples: int = 1000,
    horizon: int = 16,
    seed: int = 0,
    threads: int = 1,
) -> LepStatistics:
    """Sample points from mu and certify each; report fraction and quantiles.

    The (p, q) bounds are the empirical 1-eps quantiles over the certified
    subsample, each coordinate on its own.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    sided = system_sided(system)
    radius = dependence_radius(system, m, horizon)

    def one(i: int) -> Optional[PeriodCertificate]:
        x = mu.sample_config(sided, radius, substream(seed, 0, i))
        return lep_certificate(system, x, m, horizon)

    certs = [c for c in pmap(one, range(n_samples), threads) if c is not None]
    fraction = len(certs) / n_samples
    lp_fraction = sum(1 for c in certs if c.q == 0) / n_samples
    if certs:
        k = math.ceil((1.0 - eps) * len(certs))
        p_q = sorted(c.p for c in certs)[k - 1]
        q_q = sorted(c.q for c in certs)[k - 1]
    else:
        p_q = q_q = None
    return LepStatistics(
        m=m,
        eps=eps,
        horizon=horizon,
        n_samples=n_samples,
        seed=seed,
        certified_fraction=fraction,
        lp_fraction=lp_fraction,
        p_quantile=p_q,
        q_quantile=q_q,
    )


@dataclass(frozen=True)
class LepClassification:
    """Certificate statistics across resolutions plus the scale verdict."""

    m_list: tuple[int, ...]
    eps: float
    verdict: str
    per_m: tuple[LepStatistics, ...]
    equicontinuity: Optional[object]  # EquicontinuityReport when attached

    def to_dict(self) -> dict:
        return {
            "m_list": list(self.m_list),
            "eps": self.eps,
            "verdict": self.verdict,
            "per_m": [s.to_dict() for s in self.per_m],
            "equicontinuity": self.equicontinuity.to_dict() if self.equicontinuity else None,
        }


def mu_lep_classify(
    system: CantorSystem,
    mu: CantorMeasure,
    m_list: Sequence[int],
    eps: float = 0.05,
    n_samples: int = 1000,
    horizon: int = 16,
    seed: int = 0,
    equi_params: Optional[dict] = None,
    threads: int = 1,
) -> LepClassification:
    """Verdict mu-LP / mu-LEP / neither from certificate fractions at every m.

    mu-LP needs a 1-eps fraction of samples certified with q = 0 at every
    resolution; mu-LEP needs a 1-eps certified fraction of any preperiod.
    Either positive verdict attaches a density-ratio cross-check report.
    """
    ms = sorted(set(int(m) for m in m_list))
    if not ms or ms[0] < 0:
        raise ValueError("m_list entries must be >= 0")
    per_m = tuple(
        lep_statistics(
            system, mu, m,
            eps=eps, n_samples=n_samples, horizon=horizon,
            seed=derive_seed(seed, 0, idx), threads=threads,
        )
        for idx, m in enumerate(ms)
    )
    if all(s.lp_fraction >= 1.0 - eps for s in per_m):
        verdict = "mu-LP"
    elif all(s.certified_fraction >= 1.0 - eps for s in per_m):
        verdict = "mu-LEP"
    else:
        verdict = "neither"
    equi = None
    if verdict != "neither":
        from .orbit import mu_equicontinuity_report

        params = {
            "m": ms[0],
            "n_list": [1, 2, 3],
            "horizon": min(horizon, 4),
            "points": 20,
            "n_samples": 2000,
            "delta": 0.05,
        }
        if equi_params:
            params.update(equi_params)
        equi = mu_equicontinuity_report(
            system, mu,
            m=params["m"], n_list=params["n_list"], horizon=params["horizon"],
            points=params["points"], n_samples=params["n_samples"],
            delta=params["delta"], seed=derive_seed(seed, 1), threads=threads,
        )
    return LepClassification(
        m_list=tuple(ms), eps=eps, verdict=verdict, per_m=per_m, equicontinuity=equi
    )

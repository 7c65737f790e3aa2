"""Command line front end: run configured experiments and write reports.

Every subcommand reads a JSON config, resolves defaults, runs the
experiment, and atomically writes a JSON report (plus a CSV sibling for
tabular results). Reports contain no timestamps and all sampling is keyed
by (seed, index) substreams, so identical configs give byte-identical
reports regardless of thread count.

Exit codes: 0 success, 2 invalid config, 3 enumeration over the cap,
4 domain failure / invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .core import (
    DEFAULT_ENUMERATION_CAP,
    CirclePoint,
    Configuration,
    Cylinder,
    count_words,
    window_cells,
    word_from_str,
    word_to_str,
)
from .errors import ConfigInvalid, EnumerationTooLarge, EquidynError
from .measures import (
    LebesgueMeasure,
    measure_from_dict,
    measure_to_dict,
    union_probability,
    vitali_cover,
)
from .orbit import (
    density_ratio_estimate,
    density_ratio_exact,
    mu_equicontinuity_report,
)
from .periodicity import mu_lep_classify
from .rng import substream
from .sensitivity import dichotomy_report, mu_sensitivity_estimate
from .spectral import build_eigenfunction, inner_product, koopman_residual
from .systems import (
    Rotation,
    cell_sizes,
    dependence_radius,
    system_from_dict,
    system_sided,
    system_to_dict,
)

DEFAULT_DELTA = 0.05
DEFAULT_SAMPLES = 10_000
DEFAULT_HORIZON = 16

COMMANDS = ("density", "classify", "lep", "spectral", "sensitivity", "dichotomy", "vitali")


def fmt_prob(x: float) -> float:
    """Probabilities go out with 12 significant digits."""
    return float(f"{float(x):.12g}")


def atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _need(d: dict, field: str, prefix: str = ""):
    if not isinstance(d, dict) or field not in d:
        raise ConfigInvalid(f"{prefix}{field}", "missing")
    return d[field]


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalid("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("config", f"not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config", "top level must be an object")
    return cfg


def _build_system(cfg: dict):
    raw = _need(cfg, "system")
    try:
        return system_from_dict(raw)
    except KeyError as exc:
        raise ConfigInvalid(f"system.{exc.args[0]}", "missing")
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid("system", str(exc))


def _build_measure(cfg: dict, system=None):
    raw = cfg.get("measure")
    if raw is None:
        if isinstance(system, Rotation):
            return LebesgueMeasure()
        raise ConfigInvalid("measure", "missing")
    try:
        return measure_from_dict(raw)
    except KeyError as exc:
        raise ConfigInvalid(f"measure.{exc.args[0]}", "missing")
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid("measure", str(exc))


def _int_param(params: dict, field: str, default=None, minimum=None):
    if field in params:
        value = params[field]
    elif default is not None:
        value = default
    else:
        raise ConfigInvalid(f"params.{field}", "missing")
    try:
        value = int(value)
    except (ValueError, TypeError):
        raise ConfigInvalid(f"params.{field}", f"not an integer: {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigInvalid(f"params.{field}", f"must be >= {minimum}, got {value}")
    return value


def _list_param(params: dict, field: str, default=None):
    if field in params:
        value = params[field]
    elif default is not None:
        value = default
    else:
        raise ConfigInvalid(f"params.{field}", "missing")
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigInvalid(f"params.{field}", "must be a non-empty list")
    return list(value)


def _word_config(alphabet, sided, text: str, field: str) -> Configuration:
    try:
        return Configuration(alphabet, sided, word_from_str(text, alphabet))
    except ValueError as exc:
        raise ConfigInvalid(field, str(exc))


def _point_from_params(system, mu, params, radius: int, seed: int):
    sided = system_sided(system)
    if "point" in params:
        x = _word_config(system.alphabet, sided, str(params["point"]), "params.point")
        if x.radius < radius:
            raise ConfigInvalid("params.point", f"needs valid radius >= {radius}")
        return x
    return mu.sample_config(sided, radius, substream(seed, 9))


# -- subcommand runners --------------------------------------------------------

def _run_density(system, mu, params, seed, threads, cap):
    m = _int_param(params, "m", minimum=0)
    horizon = _int_param(params, "T", minimum=0)
    n_list = sorted(set(int(n) for n in _list_param(params, "n_list")))
    if n_list[0] < 1:
        raise ConfigInvalid("params.n_list", "entries must be >= 1")
    n_samples = _int_param(params, "n_samples", default=DEFAULT_SAMPLES, minimum=1)
    if isinstance(system, Rotation):
        if m < 1:
            raise ConfigInvalid("params.m", "rotation resolution needs m >= 1")
        angle = params.get("point")
        if angle is not None:
            try:
                x = CirclePoint(Fraction(str(angle)))
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigInvalid("params.point", f"not a circle angle: {exc}")
        else:
            x = mu.sample_point(substream(seed, 9))
        point_label = str(float(x.angle))
        feasible = True
    else:
        rho = dependence_radius(system, m, horizon)
        radius = max(max(n_list), rho)
        x = _point_from_params(system, mu, params, radius, seed)
        point_label = word_to_str(x.symbols, x.alphabet)
        sided = system_sided(system)
        feasible = count_words(cell_sizes(system, window_cells(sided, rho))) <= cap
    rows = []
    for j, n in enumerate(n_list):
        exact = density_ratio_exact(system, mu, x, m, n, horizon, cap=cap) if feasible else None
        est = density_ratio_estimate(system, mu, x, m, n, horizon, n_samples=n_samples, seed=seed * 1000 + j)
        rows.append({
            "n": n,
            "exact": fmt_prob(exact) if exact is not None else None,
            "p_hat": fmt_prob(est.p_hat),
            "stderr": fmt_prob(est.stderr),
        })
    results = {"point": point_label, "m": m, "T": horizon, "n_samples": n_samples, "rows": rows}
    csv_rows = [(r["n"], r["exact"], r["p_hat"], r["stderr"]) for r in rows]
    return results, ("n", "exact", "p_hat", "stderr"), csv_rows


def _run_classify(system, mu, params, seed, threads, cap):
    report = mu_equicontinuity_report(
        system, mu,
        m=_int_param(params, "m", minimum=0),
        n_list=_list_param(params, "n_list"),
        horizon=_int_param(params, "T", minimum=0),
        points=_int_param(params, "points", default=50, minimum=1),
        n_samples=_int_param(params, "n_samples", default=DEFAULT_SAMPLES, minimum=1),
        delta=float(params.get("delta", DEFAULT_DELTA)),
        seed=seed,
        cap=cap,
        threads=threads,
    )
    payload = report.to_dict()
    payload["fraction"] = fmt_prob(payload["fraction"])
    for curve in payload["curves"]:
        curve["ratios"] = [fmt_prob(v) for v in curve["ratios"]]
        if "stderrs" in curve:
            curve["stderrs"] = [fmt_prob(v) for v in curve["stderrs"]]
    csv_rows = [
        (i, n, curve["ratios"][j], curve["exact"])
        for i, curve in enumerate(payload["curves"])
        for j, n in enumerate(payload["n_list"])
    ]
    return payload, ("point_index", "n", "ratio", "exact"), csv_rows


def _run_lep(system, mu, params, seed, threads, cap):
    report = mu_lep_classify(
        system, mu,
        m_list=_list_param(params, "m_list"),
        eps=float(params.get("eps", DEFAULT_DELTA)),
        n_samples=_int_param(params, "n_samples", default=1000, minimum=1),
        horizon=_int_param(params, "T", minimum=2),
        seed=seed,
        equi_params=params.get("equi"),
        threads=threads,
    )
    payload = report.to_dict()
    for stats in payload["per_m"]:
        stats["certified_fraction"] = fmt_prob(stats["certified_fraction"])
        stats["lp_fraction"] = fmt_prob(stats["lp_fraction"])
    if payload["equicontinuity"]:
        payload["equicontinuity"]["fraction"] = fmt_prob(payload["equicontinuity"]["fraction"])
        for curve in payload["equicontinuity"]["curves"]:
            curve["ratios"] = [fmt_prob(v) for v in curve["ratios"]]
            if "stderrs" in curve:
                curve["stderrs"] = [fmt_prob(v) for v in curve["stderrs"]]
    csv_rows = [
        (s["m"], s["certified_fraction"], s["lp_fraction"], s["p_quantile"], s["q_quantile"])
        for s in payload["per_m"]
    ]
    return payload, ("m", "certified_fraction", "lp_fraction", "p_quantile", "q_quantile"), csv_rows


def _run_spectral(system, mu, params, seed, threads, cap):
    m = _int_param(params, "m", minimum=0)
    horizon = _int_param(params, "T", minimum=0)
    cert_horizon = _int_param(params, "cert_T", default=max(horizon, 2), minimum=2)
    sided = system_sided(system)
    if "y" in params:
        y = _word_config(system.alphabet, sided, str(params["y"]), "params.y")
    else:
        radius = dependence_radius(system, m, horizon + cert_horizon)
        y = mu.sample_config(sided, radius, substream(seed, 9))
    base = build_eigenfunction(system, y, m, 0, cert_horizon)
    p = base.period
    k_list = [int(k) for k in params.get("k_list", list(range(min(p, 16))))]
    mode = params.get("mode", "exact")
    if mode not in ("exact", "sampled"):
        raise ConfigInvalid("params.mode", "must be 'exact' or 'sampled'")
    n_samples = _int_param(params, "n_samples", default=DEFAULT_SAMPLES, minimum=1)
    specs = {k: build_eigenfunction(system, y, m, k, cert_horizon) for k in k_list}
    rows = []
    for k in k_list:
        spec = specs[k]
        lam = spec.eigenvalue()
        residual = koopman_residual(spec, mu, horizon, mode=mode, n_samples=n_samples, seed=seed * 100 + k, cap=cap)
        norm_sq = inner_product(spec, spec, mu, horizon, mode=mode, n_samples=n_samples, seed=seed * 100 + k, cap=cap)
        rows.append({
            "k": k,
            "p": p,
            "eigenvalue": [lam.real, lam.imag],
            "residual": residual,
            "norm": abs(norm_sq) ** 0.5,
        })
    max_cross = 0.0
    for i, ka in enumerate(k_list):
        for kb in k_list[i + 1:]:
            val = inner_product(specs[ka], specs[kb], mu, horizon, mode=mode, n_samples=n_samples, seed=seed, cap=cap)
            max_cross = max(max_cross, abs(val))
    results = {
        "y": word_to_str(y.symbols, y.alphabet),
        "m": m,
        "T": horizon,
        "cert_T": cert_horizon,
        "p": p,
        "mode": mode,
        "rows": rows,
        "max_cross_inner_product": max_cross,
    }
    csv_rows = [(r["k"], r["p"], r["residual"], r["norm"]) for r in rows]
    return results, ("k", "p", "residual", "norm"), csv_rows


def _run_sensitivity(system, mu, params, seed, threads, cap):
    eps_list = _list_param(params, "eps_list")
    horizon = _int_param(params, "T", minimum=1)
    n_samples = _int_param(params, "n_samples", default=DEFAULT_SAMPLES, minimum=1)
    rows = []
    for idx, eps in enumerate(eps_list):
        est = mu_sensitivity_estimate(system, mu, eps, horizon, n_samples=n_samples, seed=seed * 1000 + idx)
        rows.append({
            "eps": float(eps),
            "p_hat": fmt_prob(est.p_hat),
            "stderr": fmt_prob(est.stderr),
        })
    results = {"T": horizon, "n_samples": n_samples, "rows": rows}
    csv_rows = [(r["eps"], r["p_hat"], r["stderr"]) for r in rows]
    return results, ("eps", "p_hat", "stderr"), csv_rows


def _equi_params_from(params: dict) -> dict:
    raw = _need(params, "equi", "params.")
    return {
        "m": int(_need(raw, "m", "params.equi.")),
        "n_list": _need(raw, "n_list", "params.equi."),
        "horizon": int(_need(raw, "T", "params.equi.")),
        "points": int(raw.get("points", 50)),
        "n_samples": int(raw.get("n_samples", 2000)),
        "delta": float(raw.get("delta", DEFAULT_DELTA)),
    }


def _run_dichotomy(system, mu, params, seed, threads, cap):
    report = dichotomy_report(
        system, mu,
        eps_list=_list_param(params, "eps_list"),
        horizon=_int_param(params, "T", minimum=1),
        equi_params=_equi_params_from(params),
        n_samples=_int_param(params, "n_samples", default=DEFAULT_SAMPLES, minimum=1),
        delta_s=float(params.get("delta_s", DEFAULT_DELTA)),
        delta_e=float(params.get("delta_e", DEFAULT_DELTA)),
        seed=seed,
        threads=threads,
    )
    payload = report.to_dict()
    for row in payload["sensitivity"]:
        row["p_hat"] = fmt_prob(row["p_hat"])
        row["stderr"] = fmt_prob(row["stderr"])
    payload["equicontinuity"]["fraction"] = fmt_prob(payload["equicontinuity"]["fraction"])
    for curve in payload["equicontinuity"]["curves"]:
        curve["ratios"] = [fmt_prob(v) for v in curve["ratios"]]
        if "stderrs" in curve:
            curve["stderrs"] = [fmt_prob(v) for v in curve["stderrs"]]
    csv_rows = [(r["eps"], r["p_hat"], r["stderr"]) for r in payload["sensitivity"]]
    return payload, ("eps", "p_hat", "stderr"), csv_rows


def _run_vitali(mu, params, seed, threads, cap):
    sided = params.get("sided", "one")
    raw_parts = _list_param(params, "cylinders")
    parts = []
    for idx, item in enumerate(raw_parts):
        field = f"params.cylinders[{idx}]"
        radius = int(_need(item, "radius", field + "."))
        try:
            word = word_from_str(str(_need(item, "word", field + ".")), mu.alphabet)
            parts.append(Cylinder(mu.alphabet, sided, radius, word))
        except ValueError as exc:
            raise ConfigInvalid(field, str(exc))
    min_radius = _int_param(params, "min_radius", minimum=1)
    eps = float(params.get("eps", 0.0))
    family = vitali_cover(mu, parts, min_radius, eps=eps, cap=cap)
    union_mass = union_probability(mu, parts)
    covered = family.total_mass(mu)
    balls = [
        {
            "radius": n,
            "word": word_to_str(center.symbols, center.alphabet),
            "mass": fmt_prob(mu.cylinder_probability(cyl)),
        }
        for (center, n), cyl in zip(family.balls, family.cylinders())
    ]
    results = {
        "count": len(balls),
        "balls": balls,
        "union_mass": fmt_prob(union_mass),
        "covered_mass": fmt_prob(covered),
        "leftover": fmt_prob(union_mass - covered),
        "eps": eps,
        "min_radius": min_radius,
    }
    csv_rows = [(i, b["radius"], b["word"], b["mass"]) for i, b in enumerate(balls)]
    return results, ("index", "radius", "word", "mass"), csv_rows


# -- orchestration --------------------------------------------------------------

def run_command(command: str, cfg: dict, seed: int, threads: int, out_path: str) -> str:
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid("params", "must be an object")
    cap = int(cfg.get("cap", DEFAULT_ENUMERATION_CAP))

    if command == "vitali":
        mu = _build_measure(cfg)
        results, header, rows = _run_vitali(mu, params, seed, threads, cap)
        resolved_system = cfg.get("system")
    else:
        system = _build_system(cfg)
        mu = _build_measure(cfg, system)
        runner = {
            "density": _run_density,
            "classify": _run_classify,
            "lep": _run_lep,
            "spectral": _run_spectral,
            "sensitivity": _run_sensitivity,
            "dichotomy": _run_dichotomy,
        }[command]
        results, header, rows = runner(system, mu, params, seed, threads, cap)
        resolved_system = system_to_dict(system)

    payload = {
        "command": command,
        "config": {
            "system": resolved_system,
            "measure": measure_to_dict(mu),
            "params": params,
            "seed": seed,
            "cap": cap,
        },
        "results": results,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    atomic_write_text(out_path, text)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(os.path.splitext(out_path)[0] + ".csv", buf.getvalue())
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="equidyn",
        description="Finite-scale equicontinuity experiments on symbolic systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} experiment")
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="report path (default from config or derived)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (or EQUIDYN_THREADS)")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        if args.threads is not None:
            threads = args.threads
        elif os.environ.get("EQUIDYN_THREADS"):
            threads = int(os.environ["EQUIDYN_THREADS"])
        else:
            threads = int(cfg.get("threads", 1))
        if threads < 1:
            raise ConfigInvalid("threads", f"must be >= 1, got {threads}")
        out_path = args.out or cfg.get("out") or f"equidyn-{args.command}.json"
        written = run_command(args.command, cfg, seed, threads, out_path)
    except ConfigInvalid as exc:
        print(f"equidyn: {exc}", file=sys.stderr)
        return 2
    except EnumerationTooLarge as exc:
        print(f"equidyn: {exc}", file=sys.stderr)
        return 3
    except (EquidynError, ValueError, AssertionError) as exc:
        print(f"equidyn: {exc}", file=sys.stderr)
        return 4
    print(written)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

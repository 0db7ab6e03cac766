"""Command line front end: ``fpplab <command> [options]``.

Exit codes: 0 success, 1 experiment failure (including failed acceptance
criteria), 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, engine, lattice
from .config import ExperimentConfig, parse_floats, parse_point
from .errors import ConfigError, FppError

log = logging.getLogger("fpplab")

COMMANDS = ("ball", "avgdist", "fluct", "sagstar", "sag-seq", "monotone", "hull-check", "cauchy",
            "shape", "certify", "reproduce")


@dataclass
class RunManifest:
    command: str
    config_hash: str
    version: str
    outputs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    status: str = "ok"


# ------------------------------------------------------------------ output

def _num(v):
    if isinstance(v, Fraction):
        v = float(v)
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return _num(obj)


class Writer:
    """Only the orchestrator writes files; workers return values."""

    def __init__(self, outdir: Path, manifest: RunManifest):
        self.outdir = outdir
        self.manifest = manifest
        outdir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list, rows):
        path = self.outdir / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(_num(v)) if isinstance(_num(v), float) else _num(v) for v in row])
        self.manifest.outputs.append(name)
        return path

    def json(self, name: str, payload: dict):
        path = self.outdir / name
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
        self.manifest.outputs.append(name)
        return path


# ------------------------------------------------------------------ oracles

def _oracle(cfg: ExperimentConfig, kind: str, reach: float):
    from .geodesicity import AverageMetric, NormMetric, OmegaMetric, WordMetric
    from .weights import OmegaField

    lat = cfg.lattice_obj()
    if kind == "word":
        return WordMetric(lat)
    if kind in ("l1", "l2", "linf"):
        return NormMetric(kind, cfg.dim, lat)
    if kind == "omega":
        return OmegaMetric(OmegaField(cfg.law_obj(), cfg.seed, lat))
    if kind == "dbar":
        law = cfg.law_obj()
        from .weights import law_min
        a = law_min(law)
        if a <= 0:
            raise ConfigError("the d-bar oracle needs a law with positive essential infimum")
        return AverageMetric.estimate(lat, law, cfg.seed, cfg.replicas, int(math.ceil(reach / a)))
    raise ConfigError(f"unknown oracle '{kind}'")


# ------------------------------------------------------------------ commands

def cmd_ball(cfg, out):
    from .engine import omega_ball
    from .weights import OmegaField

    f = OmegaField(cfg.law_obj(), cfg.seed, cfg.lattice_obj())
    ball = omega_ball((0,) * cfg.dim, cfg.radius, f)
    out.csv("ball.csv", [f"x{i}" for i in range(cfg.dim)] + ["distance"],
            (list(p) + [d] for p, d in zip(ball.points.points.tolist(), ball.distances.tolist())))
    return True


def cmd_avgdist(cfg, out):
    from .average import mean_distance

    est = mean_distance(parse_point(cfg.x), parse_point(cfg.y), cfg.law_obj(), cfg.seed, cfg.replicas,
                        cfg.lattice_obj())
    row = [";".join(map(str, est.x)), ";".join(map(str, est.y)), est.replicas, est.mean, est.std_error]
    out.csv("avgdist.csv", ["x", "y", "replicas", "mean", "std_error"], [row])
    out.json("avgdist.json", {"x": est.x, "y": est.y, "replicas": est.replicas, "mean": est.mean,
                              "std_error": est.std_error, "law": cfg.law})
    return True


def cmd_fluct(cfg, out):
    from .average import fluctuation_sup, fluctuation_table

    r = int(cfg.radius)
    lat, law = cfg.lattice_obj(), cfg.law_obj()
    o = (0,) * cfg.dim
    half = tuple([r // 2, r - r // 2] + [0] * (cfg.dim - 2)) if cfg.dim >= 2 else (r,)
    pairs = [(o, tuple([r] + [0] * (cfg.dim - 1))), (o, half)]
    tab = fluctuation_table(pairs, law, cfg.seed, max(cfg.replicas, 100), cfg.thresholds, lat)
    rows = []
    for j, (x, y) in enumerate(tab.pairs):
        for k, u in enumerate(tab.thresholds):
            rows.append([";".join(map(str, x)), ";".join(map(str, y)), tab.word_distance[j], u,
                         tab.frequencies[j, k], tab.bound[j, k]])
    out.csv("fluct_table.csv", ["x", "y", "word_distance", "threshold", "frequency", "bound"], rows)
    sup = fluctuation_sup(o, r, law, cfg.seed, cfg.pair_samples, cfg.replicas, lat)
    out.json("fluct.json", {"radius": r, "sup": sup.value, "std_error": sup.std_error,
                            "envelope": sup.envelope, "ratio": sup.ratio, "pairs": sup.n_pairs,
                            "replicas": sup.replicas, "C1": tab.C1, "C2": tab.C2})
    return True


def cmd_sagstar(cfg, out):
    from .geodesicity import empirical_sagstar_via_geodesics, sagstar_deficiency

    x, y = parse_point(cfg.x), parse_point(cfg.y)
    if cfg.oracle == "geodesic":
        e = empirical_sagstar_via_geodesics(x, y, cfg.lam, cfg.law_obj(), cfg.seed, cfg.replicas,
                                            cfg.lattice_obj())
        payload = {"z": e.z, "eps": e.eps, "std_error": e.std_error, "total": e.mean_total}
    else:
        reach = 2 * max(abs(c) for c in x + y) + cfg.search_radius + 2
        res = sagstar_deficiency(x, y, cfg.lam, _oracle(cfg, cfg.oracle, reach), cfg.search_radius)
        payload = {"z": res.z, "eps": res.eps, "std_error": res.std_error, "total": res.total}
    payload.update({"x": x, "y": y, "lambda": cfg.lam, "oracle": cfg.oracle})
    out.json("sagstar.json", payload)
    return True


def cmd_sag_seq(cfg, out):
    from .geodesicity import sag_sequence

    x, y = parse_point(cfg.x), parse_point(cfg.y)
    reach = 2 * max(abs(c) for c in x + y) + cfg.search_radius + 2
    res = sag_sequence(x, y, cfg.parts, _oracle(cfg, cfg.oracle, reach), cfg.search_radius, cfg.alpha0)
    out.json("sag-seq.json", {"points": res.points, "distances": res.distances, "total": res.total,
                              "eps": res.eps, "A": res.A, "budget": res.budget, "oracle": cfg.oracle})
    return True


def cmd_monotone(cfg, out):
    from .geodesicity import SagProfile, monotone_ball_check

    prof = SagProfile(*cfg.profile, alpha0=cfg.alpha0)
    reach = 2 * cfg.radius + 4
    rep = monotone_ball_check((0,) * cfg.dim, cfg.radius, prof, _oracle(cfg, cfg.oracle, reach))
    out.json("monotone.json", {**asdict(rep), "radius": cfg.radius, "oracle": cfg.oracle})
    return rep.holds


def cmd_hull_check(cfg, out):
    from .geometry import PointCloud
    from .shape import hull_identity_check
    from .suite import random_symmetric_set

    if cfg.points:
        K = PointCloud([parse_point(p) for p in cfg.points.split(";") if p.strip()])
    else:
        K = random_symmetric_set(np.random.default_rng(cfg.seed))
    rep = hull_identity_check(K, cfg.n)
    out.json("hull-check.json", {"K": K.points, "n": rep.n, "support_gap": rep.support_gap,
                                 "raster_ok": rep.raster_ok, "dh_power": rep.dh_power,
                                 "dh_base": rep.dh_base, "inequality_ok": rep.inequality_ok,
                                 "passed": rep.passed})
    return rep.passed


def cmd_cauchy(cfg, out):
    from .shape import cauchy_defect_with_error

    oracle = _oracle(cfg, cfg.oracle, 2 * max(cfg.r1, cfg.r2) + 2)
    d, se = cauchy_defect_with_error(oracle, cfg.r1, cfg.r2)
    out.json("cauchy.json", {"r1": cfg.r1, "r2": cfg.r2, "defect": float(d), "std_error": se,
                             "oracle": cfg.oracle})
    return True


def cmd_shape(cfg, out):
    from .shape import limit_norm_estimate, shape_error_series

    r_max = cfg.r_max or 2 * max(cfg.radii)
    oracle = _oracle(cfg, cfg.oracle, 2 * r_max)
    series = shape_error_series(oracle, cfg.radii, limit_norm_estimate(oracle, r_max))
    out.csv("shape.csv", ["n", "delta_in", "delta_out", "stderr"],
            zip(series.radii, series.delta_in, series.delta_out, series.std_error))
    out.json("shape.json", {"radii": series.radii, "C": series.C, "exponent": series.exponent,
                            "residuals": series.residuals, "normalized": series.normalized,
                            "r_max": r_max, "oracle": cfg.oracle})
    return True


def cmd_certify(cfg, out):
    from .bounds import lower_bound_certificate

    q = cfg.degree or cfg.lattice_obj().degree
    cert = lower_bound_certificate(cfg.law_obj(), q)
    out.json("certify.json", {**cert.to_dict(), "law": cfg.law})
    print(json.dumps(_jsonable(cert.to_dict()), indent=2))
    return True


def cmd_reproduce(cfg, out):
    from .suite import run_suite

    results = run_suite(quick=cfg.quick)
    rows = []
    for res in results:
        for k in sorted(res.values):
            rows.append([res.number, k, res.values[k]])
    out.csv("reproduce.csv", ["criterion", "quantity", "value"], rows)
    out.json("reproduce.json", {"quick": cfg.quick, "criteria": [
        {"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail} for r in results]})
    out.manifest.timings.update({f"criterion_{r.number}": r.seconds for r in results})
    return all(r.passed for r in results)


HANDLERS = {
    "ball": cmd_ball, "avgdist": cmd_avgdist, "fluct": cmd_fluct, "sagstar": cmd_sagstar,
    "sag-seq": cmd_sag_seq, "monotone": cmd_monotone, "hull-check": cmd_hull_check,
    "cauchy": cmd_cauchy, "shape": cmd_shape, "certify": cmd_certify, "reproduce": cmd_reproduce,
}


def run_experiment(cfg: ExperimentConfig, command: str) -> RunManifest:
    if command not in HANDLERS:
        raise ConfigError(f"unknown command '{command}'")
    if cfg.threads and "FPP_THREADS" not in os.environ:
        os.environ["FPP_THREADS"] = str(cfg.threads)
    manifest = RunManifest(command, cfg.hash(), __version__)
    out = Writer(Path(cfg.output), manifest)
    t = time.perf_counter()
    saved = engine.DEFAULT_MAX_VOLUME, lattice.DEFAULT_POINT_BUDGET
    engine.DEFAULT_MAX_VOLUME, lattice.DEFAULT_POINT_BUDGET = cfg.vertex_budget, cfg.point_budget
    try:
        ok = HANDLERS[command](cfg, out)
    finally:
        engine.DEFAULT_MAX_VOLUME, lattice.DEFAULT_POINT_BUDGET = saved
    manifest.timings["total"] = time.perf_counter() - t
    manifest.status = "ok" if ok else "failed"
    out.json("manifest.json", asdict(manifest))
    manifest.outputs.pop()
    return manifest


# ------------------------------------------------------------------ parsing

OVERRIDES = {
    # flag: (config key, converter)
    "law": ("law", str), "lattice": ("lattice", str), "dim": ("dim", int), "seed": ("seed", int),
    "replicas": ("replicas", int), "pairs": ("pair_samples", int), "output": ("output", str),
    "threads": ("threads", int), "point_budget": ("point_budget", int),
    "vertex_budget": ("vertex_budget", int), "radii": ("radii", lambda s: [int(v) for v in parse_floats(s)]),
    "x": ("x", lambda s: list(parse_point(s))), "y": ("y", lambda s: list(parse_point(s))),
    "lam": ("lam", float), "parts": ("parts", int), "radius": ("radius", float),
    "thresholds": ("thresholds", parse_floats), "degree": ("degree", int), "r1": ("r1", float),
    "r2": ("r2", float), "n": ("n", int), "points": ("points", str), "oracle": ("oracle", str),
    "search_radius": ("search_radius", int), "alpha0": ("alpha0", float),
    "profile": ("profile", parse_floats), "r_max": ("r_max", int),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpplab", description="First-passage percolation experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat TOML config; flags override its values")
        sp.add_argument("--law")
        sp.add_argument("--lattice")
        sp.add_argument("--dim", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--replicas", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--output", "-o")
        sp.add_argument("--point-budget", type=int)
        sp.add_argument("--vertex-budget", type=int)
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    s = common(sub.add_parser("ball", help="omega-ball around the origin"))
    s.add_argument("--radius", "-r")
    s = common(sub.add_parser("avgdist", help="Monte Carlo average distance"))
    s.add_argument("--x")
    s.add_argument("--y")
    s = common(sub.add_parser("fluct", help="fluctuation table and sup estimate"))
    s.add_argument("--radius", "-r")
    s.add_argument("--thresholds")
    s.add_argument("--pairs", type=int)
    s = common(sub.add_parser("sagstar", help="near-lambda-point deficiency"))
    s.add_argument("--from", dest="x")
    s.add_argument("--to", dest="y")
    s.add_argument("--lambda", dest="lam")
    s.add_argument("--oracle", help="geodesic | word | dbar | l1 | l2 | linf | omega")
    s.add_argument("--search-radius", type=int)
    s = common(sub.add_parser("sag-seq", help="m-part near-equipartition"))
    s.add_argument("--from", dest="x")
    s.add_argument("--to", dest="y")
    s.add_argument("--parts", type=int)
    s.add_argument("--oracle")
    s.add_argument("--search-radius", type=int)
    s.add_argument("--alpha0")
    s = common(sub.add_parser("monotone", help="ball absorption check"))
    s.add_argument("--radius", "-r")
    s.add_argument("--oracle")
    s.add_argument("--profile", help="c,u,v")
    s.add_argument("--alpha0")
    s = common(sub.add_parser("hull-check", help="hull identity for a symmetric set"))
    s.add_argument("--points", help="x,y;x,y;... (random when omitted)")
    s.add_argument("--n", type=int)
    s = common(sub.add_parser("cauchy", help="Hausdorff gap between two rescaled balls"))
    s.add_argument("--r1")
    s.add_argument("--r2")
    s.add_argument("--oracle")
    s = common(sub.add_parser("shape", help="inner/outer shape defects per radius"))
    s.add_argument("--radii")
    s.add_argument("--oracle")
    s.add_argument("--r-max", type=int)
    s = common(sub.add_parser("certify", help="path-counting lower bound certificate"))
    s.add_argument("--degree", type=int)
    s = common(sub.add_parser("reproduce", help="run the acceptance suite"))
    s.add_argument("--quick", action="store_true", help="reduced sizes (smoke run)")
    return p


def config_from_args(args) -> ExperimentConfig:
    base = {}
    if args.config:
        try:
            base = ExperimentConfig.loads(Path(args.config).read_text()).to_dict()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    ns = vars(args)
    for flag, (key, conv) in OVERRIDES.items():
        v = ns.get(flag)
        if v is not None:
            try:
                base[key] = conv(v)
            except ValueError as exc:
                raise ConfigError(f"bad value for --{flag}: {v}") from exc
    if ns.get("quick"):
        base["quick"] = True
    if "x" not in base and "dim" in base:
        base["x"] = [0] * base["dim"]
    return ExperimentConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        manifest = run_experiment(cfg, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FppError, OSError) as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 1
    return 0 if manifest.status == "ok" else 1


if __name__ == "__main__":
    sys.exit(main())

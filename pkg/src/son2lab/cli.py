"""Command-line pipelines: ``son2lab <subcommand> [options]``.

Every subcommand writes its outputs plus ``manifest.json`` (inputs,
package versions, SHA-256 of every output) into ``--out``.  Outputs carry
no timestamps, so identical inputs and seed give byte-identical files.
Errors exit with status 1 and a ``[stage]`` tag on stderr; the manifest of
a failed run is written with ``"valid": false``.

Config files are JSON; see :class:`ExperimentConfig` for the keys.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from . import __version__
from .asymptotics import (BOUNDARY_TOL, CONTINUITY_ABS_TOL, DEFAULT_APERTURES, RANK_TOL,
                          analyze, anosov_gap, direction_grid, zariski_span_rank)
from .bending import as_q, bend_sweep, sweep_files
from .datasets import bundled_names, bundled_path
from .enumeration import (CartanCloud, ball, cartan_cloud, load_ball, load_generators,
                          stream_cloud)
from .liegroup import CHAMBER_TOL, lie_dim

CONE_MONOTONE_TOL = 0.02
CONFIG_DIR = Path(__file__).resolve().parent / "data" / "configs"


class StageError(RuntimeError):
    def __init__(self, stage, message):
        super().__init__(message)
        self.stage = stage


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def resolve_generators(ref, base=None):
    """``bundled:<name>`` or a path (relative paths resolve against ``base``)."""
    ref = str(ref)
    if ref.startswith("bundled:"):
        name = ref.split(":", 1)[1]
        if name not in bundled_names():
            raise ValueError(f"unknown bundled system {name!r}; choose from {bundled_names()}")
        return bundled_path(name)
    p = Path(ref)
    if not p.is_absolute() and base is not None:
        p = Path(base) / p
    return p


@dataclass
class ExperimentConfig:
    """Validated experiment configuration.

    JSON keys (defaults in parentheses): ``generators`` (required; path or
    ``bundled:<name>``), ``radius`` (required, >= 1), ``q`` (none; list of
    positive rationals such as ``"21/20"``), ``directions`` (9; a count or
    a list of ``[v1, v2]``), ``apertures`` ([0.3, 0.2, 0.1]), ``T_min``
    (half the largest norm), ``check_property_T`` (n >= 3),
    ``zariski`` ({"enabled": true, "sample_size": 2 D^2}),
    ``tolerances`` ({"chamber": 1e-8, "rank": 1e-8, "boundary": 0.05,
    "continuity_abs": 0.05, "cone_monotone": 0.02}), ``output`` ("out"),
    ``seed`` (0), ``threads`` (1).
    """

    generators: Path
    radius: int
    q: list = field(default_factory=list)
    directions: list = field(default_factory=direction_grid)
    apertures: tuple = DEFAULT_APERTURES
    T_min: float | None = None
    check_property_T: bool | None = None
    zariski: bool = True
    sample_size: int | None = None
    tol_chamber: float = CHAMBER_TOL
    tol_rank: float = RANK_TOL
    tol_boundary: float = BOUNDARY_TOL
    tol_continuity: float = CONTINUITY_ABS_TOL
    tol_cone: float = CONE_MONOTONE_TOL
    output: Path = Path("out")
    seed: int = 0
    threads: int = 1
    source: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc, base=None):
        known = {"generators", "radius", "q", "directions", "apertures", "T_min",
                 "check_property_T", "zariski", "tolerances", "output", "seed", "threads",
                 "name", "description"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "generators" not in doc or "radius" not in doc:
            raise ValueError("config needs 'generators' and 'radius'")
        gens = resolve_generators(doc["generators"], base)
        if not gens.exists():
            raise ValueError(f"generator file {gens} does not exist")
        radius = int(doc["radius"])
        if radius < 1:
            raise ValueError("radius must be >= 1")
        q = [str(as_q(v)) for v in doc.get("q", [])]
        dirs = doc.get("directions", 9)
        if isinstance(dirs, int):
            dirs = direction_grid(dirs)
        else:
            dirs = sorted((float(a), float(b)) for a, b in dirs)
        aps = tuple(float(a) for a in doc.get("apertures", DEFAULT_APERTURES))
        if not aps or min(aps) <= 0:
            raise ValueError("apertures must be positive")
        tol = dict(doc.get("tolerances", {}))
        zar = doc.get("zariski", {})
        if isinstance(zar, bool):
            zar = {"enabled": zar}
        out = Path(doc.get("output", "out"))
        return cls(gens, radius, q, dirs, aps, doc.get("T_min"), doc.get("check_property_T"),
                   bool(zar.get("enabled", True)), zar.get("sample_size"),
                   float(tol.get("chamber", CHAMBER_TOL)), float(tol.get("rank", RANK_TOL)),
                   float(tol.get("boundary", BOUNDARY_TOL)),
                   float(tol.get("continuity_abs", CONTINUITY_ABS_TOL)),
                   float(tol.get("cone_monotone", CONE_MONOTONE_TOL)),
                   out, int(doc.get("seed", 0)), int(doc.get("threads", 1)), dict(doc))

    @classmethod
    def load(cls, path):
        path = Path(path)
        with open(path) as fh:
            doc = json.load(fh)
        return cls.from_dict(doc, base=path.parent)


def bundled_config(name):
    """Path of a bundled experiment config (``sl2z_n2``, ``bianchi_n3``, ``bending_sweep``, ...)."""
    return CONFIG_DIR / f"{name}.json"


# ---------------------------------------------------------------------------
# manifest handling
# ---------------------------------------------------------------------------

class Run:
    """Collects outputs of one invocation and writes the manifest."""

    def __init__(self, out, command, params):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.params = params
        self.inputs = {}
        self.outputs = []

    def add_input(self, label, path):
        self.inputs[label] = {"path": Path(path).name, "sha256": _sha256(path)}

    def write(self, name, text):
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.outputs.append(name)
        return path

    def record(self, name):
        self.outputs.append(name)

    def finish(self, valid=True, error=None):
        files = [{"file": f, "sha256": _sha256(self.out / f)} for f in sorted(set(self.outputs))
                 if (self.out / f).exists()]
        doc = {"command": self.command, "params": self.params, "inputs": self.inputs,
               "outputs": files, "valid": valid,
               "versions": {"son2lab": __version__, "numpy": np.__version__,
                            "mpmath": mpmath.__version__,
                            "python": platform.python_version()}}
        if error is not None:
            doc["error"] = error
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _stage(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with a stage tag
        raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc


# ---------------------------------------------------------------------------
# pipeline pieces
# ---------------------------------------------------------------------------

def zariski_ball(system, sample_size=None, max_radius=12):
    """Smallest ball with at least ``4 * sample_size`` elements (or radius ``max_radius``)."""
    D = lie_dim(system.n)
    sample_size = 2 * D * D if sample_size is None else sample_size
    r = 1
    while True:
        b = ball(system, r)
        if len(b) >= 4 * sample_size or r >= max_radius or b.layer_counts[-1] == 0:
            return b
        r += 1


def _write_report(run, rep, prefix=""):
    run.write(f"{prefix}growth_report.json", rep.to_json())
    run.write(f"{prefix}counts.csv", rep.counts_csv())
    run.write(f"{prefix}gap.csv", rep.gap_csv())


def run_system(run, cfg, system, prefix=""):
    """ball -> cloud -> asymptotics for one system; returns the GrowthReport."""
    cloud = _stage("enumerate", stream_cloud, system, cfg.radius, cfg.threads,
                   tol=cfg.tol_chamber)
    if not cloud.complete:
        raise StageError("enumerate", "memory budget exceeded; ball is incomplete")
    path = run.out / f"{prefix}cloud.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    _stage("write", cloud.save, path)
    run.record(f"{prefix}cloud.csv")
    run.record(f"{prefix}cloud.csv.meta.json")
    zb = _stage("zariski", zariski_ball, system, cfg.sample_size) if cfg.zariski else None
    rep = _stage("growth", analyze, cloud, system.name, cfg.directions, cfg.apertures, cfg.T_min,
                 cfg.check_property_T, cfg.tol_boundary, zb, cfg.sample_size, cfg.seed,
                 cfg.tol_rank)
    _write_report(run, rep, prefix)
    return rep


def sweep_checks(rows, cfg):
    """Cone opening and exponent continuity across a bending sweep.

    ``rows`` are ``(q, report)`` pairs; returns a dict of check results.
    """
    base = next((r for q, r in rows if Fraction(q) == 1), None)
    bent = sorted(((abs(math.log(Fraction(q))), q, r) for q, r in rows if Fraction(q) != 1))
    out = {}
    chats = [r.cone.c_hat if r.cone else math.nan for _, _, r in bent]
    out["c_hat_positive"] = bool(chats) and all(c > 1e-3 for c in chats)
    out["c_hat_monotone"] = all(b >= a - cfg.tol_cone for a, b in zip(chats, chats[1:]))
    if base is not None and bent and "rho" in base.exponents and "rho" in bent[0][2].exponents:
        e0, e1 = base.exponents["rho"], bent[0][2].exponents["rho"]
        tol = 2 * math.hypot(e0.stderr, e1.stderr) + cfg.tol_continuity
        out["continuity"] = {"q": bent[0][1], "difference": e1.delta - e0.delta,
                             "tolerance": tol, "ok": abs(e1.delta - e0.delta) <= tol}
    if base is not None and base.zariski_rank is not None:
        out["zariski_jump"] = all(r.zariski_rank == r.zariski_dim for _, _, r in bent) \
            and base.zariski_rank < base.zariski_dim
    return out


def run_config(cfg, out=None):
    """Full pipeline for a config; returns ``(summary_text, reports)``."""
    out = Path(out) if out is not None else cfg.output
    params = {k: v for k, v in cfg.source.items() if k != "output"}
    params["seed"] = cfg.seed
    run = Run(out, "report", params)
    try:
        system = _stage("load", load_generators, cfg.generators)
        run.add_input("generators", cfg.generators)
        lines = []
        reports = []
        if cfg.q:
            systems = _stage("bend", bend_sweep, system, cfg.q, out / "bent")
            run.record("bent/manifest.json")
            for q, s in zip(cfg.q, systems):
                qq = as_q(q)
                run.record(f"bent/{system.name or 'system'}_q{qq.numerator}-{qq.denominator}.json")
            for q, s in zip(cfg.q, systems):
                qq = as_q(q)
                rep = run_system(run, cfg, s, prefix=f"q{qq.numerator}-{qq.denominator}/")
                reports.append((q, rep))
            lines.append(f"bending sweep of {system.name} (R={cfg.radius})")
            lines.append("q        c_hat        delta_rho  stderr   verdict       zariski")
            for q, rep in reports:
                e = rep.exponents.get("rho")
                lines.append(f"{q:<8} {rep.cone.c_hat if rep.cone else float('nan'):<12.6g} "
                             f"{e.delta if e else float('nan'):<10.4f} "
                             f"{e.stderr if e else float('nan'):<8.4f} "
                             f"{rep.verdict.verdict if rep.verdict else '-':<13} "
                             f"{rep.zariski_rank}/{rep.zariski_dim}")
            checks = sweep_checks(reports, cfg)
            run.write("sweep_checks.json", json.dumps(checks, indent=1, sort_keys=True) + "\n")
            for k, v in sorted(checks.items()):
                lines.append(f"check {k}: {v}")
        else:
            rep = run_system(run, cfg, system)
            reports.append((None, rep))
            lines.extend(rep.summary_lines())
        text = "\n".join(lines) + "\n"
        run.write("summary.txt", text)
    except StageError as exc:
        run.finish(valid=False, error={"stage": exc.stage, "message": str(exc)})
        raise
    run.finish()
    return text, reports


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------

def _load_cfg(args):
    if args.config is None:
        return None
    try:
        return ExperimentConfig.load(args.config)
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise StageError("config", str(exc)) from exc


def _pick(value, cfg, attr, default=None):
    if value is not None:
        return value
    if cfg is not None:
        return getattr(cfg, attr)
    return default


def _generators_path(args, cfg):
    if args.generators is not None:
        try:
            return resolve_generators(args.generators)
        except ValueError as exc:
            raise StageError("load", str(exc)) from exc
    if cfg is not None:
        return cfg.generators
    raise StageError("config", "no generator file (use --generators or --config)")


def cmd_enumerate(args, cfg):
    gpath = _generators_path(args, cfg)
    R = _pick(args.radius, cfg, "radius")
    if R is None:
        raise StageError("config", "no radius (use --radius or --config)")
    run = Run(args.out, "enumerate", {"radius": R})
    system = _stage("load", load_generators, gpath)
    run.add_input("generators", gpath)
    wb = _stage("enumerate", ball, system, R, _pick(args.threads, cfg, "threads", 1))
    run.write("ball.json", wb.to_json())
    run.write("ball_stats.csv", wb.stats_csv())
    run.finish(valid=wb.complete, error=None if wb.complete else {"stage": "enumerate",
                                                                    "message": wb.note})
    print(f"{len(wb)} elements, layers {wb.layer_counts}")


def cmd_project(args, cfg):
    if args.ball is None:
        raise StageError("config", "project needs --ball")
    run = Run(args.out, "project", {})
    wb = _stage("load", load_ball, args.ball)
    run.add_input("ball", args.ball)
    tol = cfg.tol_chamber if cfg else CHAMBER_TOL
    cloud = _stage("project", cartan_cloud, wb, False, tol)
    cloud.save(run.out / "cloud.csv")
    run.record("cloud.csv")
    run.record("cloud.csv.meta.json")
    run.finish()
    print(f"{len(cloud)} points, {len(cloud.diagnostics)} projection diagnostics")


def _load_cloud(args):
    if args.cloud is None:
        raise StageError("config", "this subcommand needs --cloud")
    return _stage("load", CartanCloud.load, args.cloud)


def cmd_growth(args, cfg):
    cloud = _load_cloud(args)
    run = Run(args.out, "growth", {"seed": _pick(args.seed, cfg, "seed", 0)})
    run.add_input("cloud", args.cloud)
    kw = {}
    if cfg is not None:
        kw = dict(directions=cfg.directions, apertures=cfg.apertures, T_min=cfg.T_min,
                  check_property_T=cfg.check_property_T, boundary_tol=cfg.tol_boundary)
    name = Path(args.cloud).stem
    rep = _stage("growth", analyze, cloud, name, **kw)
    _write_report(run, rep)
    text = "\n".join(rep.summary_lines()) + "\n"
    run.write("summary.txt", text)
    run.finish()
    print(text, end="")


def cmd_anosov(args, cfg):
    cloud = _load_cloud(args)
    run = Run(args.out, "anosov", {})
    run.add_input("cloud", args.cloud)
    fit = _stage("anosov", anosov_gap, cloud)
    run.write("anosov.json", json.dumps(asdict(fit), indent=1, sort_keys=True) + "\n")
    lines = ["layer,min_alpha1"] + [f"{k},{y!r}" for k, y in zip(fit.layers, fit.minima)]
    run.write("gap.csv", "\n".join(lines) + "\n")
    run.finish()
    tag = " [gap-degenerate]" if fit.degenerate else ""
    print(f"slope {fit.slope:.6g} intercept {fit.intercept:.6g} R^2 {fit.r2:.6g}{tag}")


def cmd_zariski(args, cfg):
    seed = _pick(args.seed, cfg, "seed", 0)
    sample = cfg.sample_size if cfg else None
    rank_tol = cfg.tol_rank if cfg else RANK_TOL
    run = Run(args.out, "zariski", {"seed": seed, "sample_size": sample})
    if args.ball is not None:
        wb = _stage("load", load_ball, args.ball)
        run.add_input("ball", args.ball)
    else:
        gpath = _generators_path(args, cfg)
        system = _stage("load", load_generators, gpath)
        run.add_input("generators", gpath)
        wb = _stage("enumerate", zariski_ball, system, sample)
    rank = _stage("zariski", zariski_span_rank, wb, sample, seed, rank_tol)
    D = lie_dim(wb.system.n)
    run.write("zariski.json", json.dumps({"rank": rank, "full": D * D, "seed": seed,
                                          "ball_radius": wb.radius, "ball_size": len(wb)},
                                         indent=1, sort_keys=True) + "\n")
    run.finish()
    print(f"zariski span rank {rank} / {D * D}")


def cmd_bend(args, cfg):
    gpath = _generators_path(args, cfg)
    qs = args.q or (cfg.q if cfg else [])
    if not qs:
        raise StageError("config", "bend needs at least one --q")
    system = _stage("load", load_generators, gpath)
    run = Run(args.out, "bend", {"q": [str(as_q(q)) for q in qs]})
    run.add_input("generators", gpath)
    systems = _stage("bend", bend_sweep, system, qs)
    files, sweep = sweep_files(system, qs, systems)
    for fname, text in files.items():
        run.write(fname, text)
    run.write("sweep.json", json.dumps(sweep, indent=1, sort_keys=True) + "\n")
    run.finish()
    print(f"wrote {len(systems)} bent systems to {run.out}")


def cmd_report(args, cfg):
    if cfg is None:
        raise StageError("config", "report needs --config")
    if args.threads is not None:
        cfg.threads = args.threads
    if args.seed is not None:
        cfg.seed = args.seed
    text, _ = run_config(cfg, args.out if args.out is not None else None)
    print(text, end="")


COMMANDS = {
    "enumerate": (cmd_enumerate, "exact word ball -> ball.json, ball_stats.csv"),
    "project": (cmd_project, "ball file -> Cartan cloud CSV"),
    "growth": (cmd_growth, "cloud -> growth report (cone, exponents, verdicts)"),
    "bend": (cmd_bend, "colored generator file -> bent generator files + manifest"),
    "anosov": (cmd_anosov, "cloud -> Anosov gap fit"),
    "zariski": (cmd_zariski, "ball or generators -> adjoint span rank"),
    "report": (cmd_report, "full pipeline from a config file"),
}


def build_parser():
    p = argparse.ArgumentParser(prog="son2lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", help="experiment config (JSON)")
        s.add_argument("--out", help="output directory")
        s.add_argument("--threads", type=int, help="worker processes for enumeration")
        s.add_argument("--seed", type=int, help="seed for sampling (u64)")
        if name in ("enumerate", "bend", "zariski"):
            s.add_argument("--generators", help="generator file or bundled:<name>")
        if name == "enumerate":
            s.add_argument("--radius", type=int, help="ball radius R")
        if name in ("project", "zariski"):
            s.add_argument("--ball", help="ball file from 'enumerate'")
        if name in ("growth", "anosov"):
            s.add_argument("--cloud", help="cloud CSV (with .meta.json sidecar)")
        if name == "bend":
            s.add_argument("--q", action="append", help="bending parameter, e.g. 21/20")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
        if args.out is None and args.command != "report":
            args.out = str(cfg.output) if cfg is not None else "out"
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise StageError("config", "seed must be an unsigned 64-bit integer")
        COMMANDS[args.command][0](args, cfg)
    except StageError as exc:
        print(f"son2lab: [{exc.stage}] {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

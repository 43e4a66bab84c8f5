"""
Command-line front end.

Exit codes: 0 success, 1 computational failure, 2 usage error.  Every output
embeds the resolved run configuration under ``"config"`` (JSON), as ``#``
comment lines (CSV) or in the PGM header, and ``vortexbell rerun FILE``
replays a run from any JSON output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (
    CLASSICAL_BOUND,
    EXPERIMENT_SETTINGS,
    BellSettings,
    bell_sum,
    optimize_settings,
    violation_curve,
)
from .errors import VortexBellError
from .interferometer import NoiseModel, run_bell_experiment, write_pgm
from .modes import BeamSpec, Family, GridSpec, ModeIndex, sample_grid
from .wigner import PhaseSpacePoint, pi2w_lg, pi2w_numeric

OUT_ENV = "VORTEXBELL_OUT"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, **self.params}

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        # output location is not part of the echo so results are path-independent
        params = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
        return cls(args.command, params)


# ---------------------------------------------------------------- parsing

_TERM = re.compile(
    r"\s*(?P<sign>[+-]?)\s*(?:(?P<coef>\([^()]*\)|[0-9.eE]*[ij]|[0-9.eE]+)\s*\*\s*)?"
    r"(?P<family>hg|lg):(?P<m>\d+),(?P<n>\d+)\s*",
    re.IGNORECASE,
)


def _parse_complex(text: str) -> complex:
    t = text.strip().strip("()").replace(" ", "").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    if t.endswith("j") and t[:-1] and t[:-1][-1] in "+-":
        t = t[:-1] + "1j"
    return complex(t)


def parse_beam_terms(text: str) -> list[tuple[complex, ModeIndex]]:
    """Parse the ``family:m,n`` mini-grammar, e.g. ``hg:1,0+i*hg:0,1``."""
    terms, pos = [], 0
    text = text.strip()
    if not text:
        raise UsageError("empty beam specification")
    while pos < len(text):
        match = _TERM.match(text, pos)
        if not match or match.end() == pos or (terms and not match.group("sign")):
            raise UsageError(f"cannot parse beam specification {text!r} at position {pos}")
        try:
            coef = _parse_complex(match.group("coef")) if match.group("coef") else 1.0
        except ValueError as exc:
            raise UsageError(f"bad coefficient in {text!r}: {exc}") from None
        if match.group("sign") == "-":
            coef = -coef
        mode = ModeIndex(Family(match.group("family").upper()), int(match.group("m")), int(match.group("n")))
        terms.append((coef, mode))
        pos = match.end()
    return terms


def build_beam(beam: str, weights: str | None) -> BeamSpec:
    terms = parse_beam_terms(beam)
    if weights:
        w = _floats(weights, "weights")
        if len(w) != len(terms):
            raise UsageError(f"{len(w)} weights given for {len(terms)} beam terms")
        terms = [(c * wk, mode) for (c, mode), wk in zip(terms, w)]
    try:
        return BeamSpec(tuple(terms))
    except VortexBellError as exc:
        raise UsageError(str(exc)) from None


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None


def parse_grid(text: str) -> GridSpec:
    try:
        half, n = text.split(":")
        return GridSpec(float(half), int(n))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r} (expected L:N with odd N): {exc}") from None


def parse_points(text: str) -> list[PhaseSpacePoint]:
    points = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        vals = _floats(chunk, "point")
        if len(vals) != 4:
            raise UsageError(f"point {chunk!r} needs four coordinates x,px,y,py")
        try:
            points.append(PhaseSpacePoint(*vals))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not points:
        raise UsageError("no phase-space points given")
    return points


def parse_settings(text: str) -> BellSettings:
    """``x,px,y,py;x',px',y',py'`` -> unprimed and primed settings on both sides."""
    chunks = [c for c in text.split(";") if c.strip()]
    if len(chunks) != 2:
        raise UsageError("settings need two groups: 'x,px,y,py;x2,px2,y2,py2'")
    a, b = (_floats(c, "settings") for c in chunks)
    if len(a) != 4 or len(b) != 4:
        raise UsageError("each settings group needs four coordinates")
    try:
        return BellSettings((a[0], a[1]), (b[0], b[1]), (a[2], a[3]), (b[2], b[3]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_noise(text: str, seed: int) -> NoiseModel | None:
    if text.strip().lower() in ("off", "none", "0"):
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("noise must be 'sI,sC' (sC may be 'auto') or 'off'")
    try:
        jitter = float(parts[0])
        ccd = None if parts[1].strip().lower() == "auto" else float(parts[1])
        return NoiseModel(jitter, ccd, seed)
    except ValueError as exc:
        raise UsageError(f"bad noise {text!r}: {exc}") from None


# ---------------------------------------------------------------- output

def _out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "."))


def _resolve(path: str | None, default_name: str) -> Path:
    p = Path(path) if path else _out_dir() / default_name
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)
        print(f"wrote {path}")


def _beam_json(beam: BeamSpec) -> list[dict]:
    return [{"mode": str(mode), "re": c.real, "im": c.imag} for c, mode in beam.terms]


# ---------------------------------------------------------------- commands

def cmd_modes(args, cfg: RunConfig) -> int:
    beam = build_beam(args.beam, args.weights)
    grid = parse_grid(args.grid)
    suffix = Path(args.out).suffix.lstrip(".") if args.out else ""
    fmt = args.format or (suffix if suffix in ("pgm", "csv", "json") else "pgm")
    if fmt not in ("pgm", "csv", "json"):
        raise UsageError(f"unsupported format {fmt!r} for modes")
    target = _resolve(args.out, f"beam.{fmt}")
    stem = target.with_suffix("")
    field_ = sample_grid(beam, grid)
    amplitude, phase = np.abs(field_.values), np.angle(field_.values)
    meta = {
        "config": cfg.to_dict(),
        "beam": _beam_json(beam),
        "grid": {"half_extent": grid.half_extent, "samples_per_axis": grid.samples_per_axis},
        "total_power": field_.total_power(),
        "amplitude_max": float(amplitude.max()),
        "phase_range": [-math.pi, math.pi],
    }
    if fmt == "pgm":
        comment = "config " + json.dumps(cfg.to_dict(), sort_keys=True)
        for name, data, lo, hi in (
            ("amplitude", amplitude, 0.0, float(amplitude.max())),
            ("phase", phase, -math.pi, math.pi),
        ):
            path = Path(f"{stem}_{name}.pgm")
            write_pgm(path, data, lo, hi, comment)
            meta[f"{name}_file"] = path.name
            print(f"wrote {path}")
    elif fmt == "csv":
        for name, data in (("amplitude", amplitude), ("phase", phase)):
            path = Path(f"{stem}_{name}.csv")
            path.write_text(_csv_with_config(cfg, None, data.tolist()))
            meta[f"{name}_file"] = path.name
            print(f"wrote {path}")
    else:
        meta["amplitude"] = amplitude.tolist()
        meta["phase"] = phase.tolist()
    _emit(_dump_json(meta), Path(f"{stem}.json"))
    return 0


def _csv_with_config(cfg: RunConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write("# config " + json.dumps(cfg.to_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


_AXES = {"X": 0, "PX": 1, "P_X": 1, "Y": 2, "PY": 3, "P_Y": 3}


def _slice_points(slice_axes: str, span: str, at: str) -> np.ndarray:
    names = [a.strip().upper() for a in slice_axes.split(",")]
    if len(names) != 2 or any(a not in _AXES for a in names) or _AXES[names[0]] == _AXES[names[1]]:
        raise UsageError(f"slice needs two distinct axes from X,PX,Y,PY, got {slice_axes!r}")
    try:
        lo, hi, num = span.split(":")
        axis = np.linspace(float(lo), float(hi), int(num))
    except ValueError:
        raise UsageError(f"bad span {span!r}, expected lo:hi:n") from None
    base = _floats(at, "base point")
    if len(base) != 4:
        raise UsageError("base point needs four coordinates")
    u, v = np.meshgrid(axis, axis, indexing="ij")
    pts = np.tile(np.asarray(base, dtype=float), (u.size, 1))
    pts[:, _AXES[names[0]]] = u.ravel()
    pts[:, _AXES[names[1]]] = v.ravel()
    if np.any(np.abs(pts) > 10):
        raise UsageError("slice leaves the supported coordinate range [-10, 10]")
    return pts


def cmd_wigner(args, cfg: RunConfig) -> int:
    beam = build_beam(args.beam, args.weights)
    if args.slice:
        pts = _slice_points(args.slice, args.span, args.at)
    else:
        pts = np.array([p.as_tuple() for p in parse_points(args.points)])
    mode = beam.single_lg()
    method = args.method
    if method == "auto":
        method = "both" if mode is not None else "numeric"
    if method in ("analytic", "both") and mode is None:
        raise UsageError("analytic Wigner values exist only for a single LG mode")
    cols = pts.T
    analytic = pi2w_lg(mode.m, mode.n, *cols) if mode is not None and method != "numeric" else None
    numeric = pi2w_numeric(beam, *cols) if method in ("numeric", "both") else None
    pi2w = np.atleast_1d(analytic if analytic is not None else numeric)
    status = 0
    if analytic is not None and numeric is not None:
        gap = float(np.max(np.abs(np.atleast_1d(analytic) - np.atleast_1d(numeric))))
        if gap > args.tol:
            print(f"error: numeric and analytic Wigner values differ by {gap:.3g} > tol {args.tol}", file=sys.stderr)
            status = 1
    rows = [(*p, w / math.pi ** 2, w) for p, w in zip(pts, pi2w)]
    header = ["X", "P_X", "Y", "P_Y", "W", "pi2W"]
    fmt = args.format or "csv"
    if fmt == "csv":
        text = _csv_with_config(cfg, header, rows)
    elif fmt == "json":
        text = _dump_json({"config": cfg.to_dict(), "columns": header, "rows": [[float(v) for v in r] for r in rows]})
    else:
        raise UsageError(f"unsupported format {fmt!r} for wigner")
    _emit(text, _resolve(args.out, "wigner." + fmt) if args.out else None)
    return status


def cmd_bell(args, cfg: RunConfig) -> int:
    beam = build_beam(args.beam, args.weights)
    out = {"config": cfg.to_dict(), "beam": _beam_json(beam)}
    if args.curve:
        if not 1 <= args.curve <= 6:
            raise UsageError("curve n_max must lie in 1..6")
        curve = violation_curve(args.curve, args.optimize or "diag2", args.budget, args.seed)
        out["curve"] = [{"n": n, "abs_B": v, "violated": v >= CLASSICAL_BOUND} for n, v in curve]
        out["increasing"] = all(b[1] > a[1] for a, b in zip(curve, curve[1:]))
    elif args.optimize:
        res = optimize_settings(beam, args.optimize, args.budget, args.seed)
        out.update(
            settings=res.settings.to_dict(),
            B=res.bell,
            abs_B=res.bell_abs,
            violated=res.bell_abs >= CLASSICAL_BOUND,
            evaluations=res.evaluations,
            converged=res.converged,
        )
    else:
        s = parse_settings(args.settings) if args.settings else EXPERIMENT_SETTINGS
        b = bell_sum(beam, s)
        out.update(settings=s.to_dict(), B=b, abs_B=abs(b), violated=abs(b) >= CLASSICAL_BOUND)
    _emit(_dump_json(out), _resolve(args.out, "bell.json") if args.out else None)
    return 0


SUITES = {
    "superposition": [("hg10", "hg:1,0+i*hg:0,1", "1,0"), ("mix_0.4_0.6", "hg:1,0+i*hg:0,1", "0.4,0.6"),
             ("lg10", "hg:1,0+i*hg:0,1", "0.5,0.5")],
    "lg20": [("lg10", "lg:1,0", None), ("lg20", "lg:2,0", None)],
}


def cmd_experiment(args, cfg: RunConfig) -> int:
    if args.trials < 1:
        raise UsageError("trials must be at least 1")
    if args.suite:
        if args.suite not in SUITES:
            raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
        beams = [(label, build_beam(b, w)) for label, b, w in SUITES[args.suite]]
    elif args.beam:
        beams = [("beam", build_beam(args.beam, args.weights))]
    else:
        raise UsageError("give --beam or --suite")
    grid = parse_grid(args.grid)
    settings = parse_settings(args.settings) if args.settings else EXPERIMENT_SETTINGS
    noise = parse_noise(args.noise, args.seed)
    out_dir = Path(args.out) if args.out else _out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    comment = "config " + json.dumps(cfg.to_dict(), sort_keys=True)

    summary = []
    for label, beam in beams:
        report = run_bell_experiment(beam, settings, args.trials, grid, None, noise)
        data = report.to_dict()
        data["config"] = cfg.to_dict()
        data["beam"] = _beam_json(beam)
        data["theory"] = bell_sum(beam, settings)
        (out_dir / f"report_{label}.json").write_text(_dump_json(data))
        for k, frame in enumerate(report.frames):
            write_pgm(out_dir / f"{label}_setting{k}.pgm", frame.intensity, 0.0, float(frame.intensity.max()), comment)
        summary.append(
            {"beam": label, "theory": data["theory"], "mean": report.mean, "q25": report.q25,
             "q75": report.q75, "min": report.min, "max": report.max, "iqr": report.iqr}
        )

    cols = ["beam", "theory", "mean", "q25", "q75", "min", "max", "iqr"]
    buf = io.StringIO()
    buf.write("# config " + json.dumps(cfg.to_dict(), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in summary:
        writer.writerow([row["beam"]] + [repr(float(row[c])) for c in cols[1:]])
    (out_dir / "summary.csv").write_text(buf.getvalue())
    (out_dir / "summary.json").write_text(_dump_json({"config": cfg.to_dict(), "rows": summary}))
    for row in summary:
        print("{beam:>12}  theory {theory:+.4f}  mean {mean:+.4f}  q25 {q25:+.4f}  q75 {q75:+.4f}  "
              "min {min:+.4f}  max {max:+.4f}".format(**row))
    print(f"wrote {out_dir / 'summary.json'}")
    return 0


def cmd_rerun(args, cfg: RunConfig) -> int:
    try:
        data = json.loads(Path(args.file).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config from {args.file}: {exc}") from None
    config = dict(data.get("config", data))
    command = config.pop("command", None)
    if command not in COMMANDS or command == "rerun":
        raise UsageError(f"{args.file} does not hold a replayable config")
    config["out"] = args.out
    ns = argparse.Namespace(command=command, **config)
    return COMMANDS[command](ns, RunConfig.from_namespace(ns))


COMMANDS = {
    "modes": cmd_modes,
    "wigner": cmd_wigner,
    "bell": cmd_bell,
    "experiment": cmd_experiment,
    "rerun": cmd_rerun,
}


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vortexbell", description="Wigner-function CHSH tests for vortex beams")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def beam_opts(p, required=True):
        p.add_argument("--beam", required=required, help="e.g. lg:1,0 or hg:1,0+i*hg:0,1")
        p.add_argument("--weights", help="unnormalized per-term weights, e.g. 0.4,0.6")

    p = sub.add_parser("modes", help="amplitude and phase grids of a beam")
    beam_opts(p)
    p.add_argument("--grid", default="6:241", help="half extent and odd sample count, L:N")
    p.add_argument("--out")
    p.add_argument("--format", choices=["pgm", "csv", "json"])

    p = sub.add_parser("wigner", help="Wigner values at points or on a 2D slice")
    beam_opts(p)
    p.add_argument("--points", default="0,0,0,0", help="x,px,y,py;...")
    p.add_argument("--slice", help="two axes from X,PX,Y,PY, e.g. X,PY")
    p.add_argument("--span", default="-2:2:41", help="lo:hi:n for both slice axes")
    p.add_argument("--at", default="0,0,0,0", help="base point for the fixed slice coordinates")
    p.add_argument("--method", default="auto", choices=["auto", "analytic", "numeric", "both"])
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])

    p = sub.add_parser("bell", help="Bell sums and optimized settings")
    beam_opts(p)
    p.add_argument("--settings", help="x,px,y,py;x2,px2,y2,py2 (default: measured-suite settings)")
    p.add_argument("--optimize", choices=["diag2", "full8"])
    p.add_argument("--curve", type=_positive_int, help="violation curve for LG_n0, n=1..N")
    p.add_argument("--budget", type=_positive_int, default=60000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"])

    p = sub.add_parser("experiment", help="simulated parity interferometer with noise statistics")
    beam_opts(p, required=False)
    p.add_argument("--suite", choices=sorted(SUITES))
    p.add_argument("--settings")
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--noise", default="0.01,auto", help="sI,sC ('auto' = 1e-5 x frame peak) or 'off'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", default="6:241")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=["json"])

    p = sub.add_parser("rerun", help="replay a run from the config embedded in a JSON output")
    p.add_argument("file")
    p.add_argument("--out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_namespace(args)
    try:
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (VortexBellError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

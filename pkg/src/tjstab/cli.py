"""Command-line front end: ``analyze``, ``sweep``, ``trace`` and ``render``."""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, TJStabError
from .geometry import PartitionConfig, build_config, build_dimensionless, emit_geometry_svg
from .spectral import determinants as dt
from .spectral.verdict import INCONCLUSIVE, STABLE, UNSTABLE, StabilityReport, oracle_check, scan_and_verdict

EXIT_CODES = {STABLE: 0, UNSTABLE: 2, INCONCLUSIVE: 3}
EXIT_ERROR = 1
OUT_ENV = "TJSTAB_OUT"


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs; geometry is either physical
    ``(kappa, l, L)`` or dimensionless ``(l_star, L_star)`` with
    ``kappa = 1``, never both."""

    kappa: float | None = None
    l: float | None = None
    L: float | None = None
    l_star: float | None = None
    L_star: float | None = None
    l_star_range: tuple[float, float, int] = (0.1, 0.5, 5)
    L_star_range: tuple[float, float, int] = (0.01, 2.0, 20)
    grid_n: int = 400
    scan_n: int = 2048
    tol: float = 1e-12
    oracle: bool = False
    trace_axis: str = "x"
    trace_samples: int = 512
    trace_x_max: float = 1.0
    trace_L_range: tuple[float, float] = (0.01, 20.0)
    out: str = "."
    emit_svg: bool = False
    emit_csv: bool = True
    emit_traces: bool = True
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        phys = [v is not None for v in (self.l, self.L)]
        dim = [v is not None for v in (self.l_star, self.L_star)]
        if any(phys) and any(dim):
            raise ConfigError("give either (kappa, l, L) or (l_star, L_star), not both")
        if any(phys) and not all(phys):
            raise ConfigError("physical geometry needs both l and L")
        if any(dim) and not all(dim):
            raise ConfigError("dimensionless geometry needs both l_star and L_star")
        if any(dim) and self.kappa not in (None, 1.0):
            raise ConfigError("dimensionless geometry implies kappa = 1")
        for name in ("l_star_range", "L_star_range"):
            lo, hi, steps = getattr(self, name)
            if int(steps) < 1:
                raise ConfigError(f"{name}: steps must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.grid_n < 8 or self.scan_n < 64 or self.trace_samples < 2 or self.jobs < 1:
            raise ConfigError("grid_n >= 8, scan >= 64, trace samples >= 2 and jobs >= 1 are required")
        if self.trace_axis not in ("x", "L"):
            raise ConfigError("trace axis must be 'x' or 'L'")
        return self

    def has_geometry(self) -> bool:
        return self.L is not None or self.L_star is not None

    def partition(self) -> PartitionConfig:
        if self.l is not None:
            return build_config(1.0 if self.kappa is None else self.kappa, self.l, self.L)
        if self.l_star is not None:
            return build_dimensionless(self.l_star, self.L_star)
        raise ConfigError("no geometry given")


# ---------------------------------------------------------------------------
# config ingestion


def _get(section, key, conv):
    if key not in section:
        return None
    raw = section[key].strip()
    try:
        if conv is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return conv(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: cannot parse {raw!r}") from None


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read an INI file with optional sections ``[geometry]``, ``[sweep]``,
    ``[numerics]`` and ``[output]``; missing keys keep their defaults."""
    run = RunConfig()
    if path is None:
        return run
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keys are case sensitive: l and L differ
    try:
        cp.read(p, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {p}: {exc}") from None
    known = {"geometry", "sweep", "numerics", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    upd = {}
    if cp.has_section("geometry"):
        g = cp["geometry"]
        for key in ("kappa", "l", "L", "l_star", "L_star"):
            v = _get(g, key, float)
            if v is not None:
                upd[key] = v
    if cp.has_section("sweep"):
        s = cp["sweep"]
        for name, default in (("l_star", run.l_star_range), ("L_star", run.L_star_range)):
            lo = _get(s, f"{name}_start", float)
            hi = _get(s, f"{name}_stop", float)
            n = _get(s, f"{name}_steps", int)
            upd[f"{name}_range"] = (
                default[0] if lo is None else lo,
                default[1] if hi is None else hi,
                default[2] if n is None else n,
            )
    if cp.has_section("numerics"):
        nm = cp["numerics"]
        for key, conv, dest in (
            ("grid_n", int, "grid_n"),
            ("scan", int, "scan_n"),
            ("tol", float, "tol"),
            ("oracle", bool, "oracle"),
            ("trace_axis", str, "trace_axis"),
            ("trace_samples", int, "trace_samples"),
            ("trace_x_max", float, "trace_x_max"),
            ("jobs", int, "jobs"),
        ):
            v = _get(nm, key, conv)
            if v is not None:
                upd[dest] = v
    if cp.has_section("output"):
        o = cp["output"]
        for key, conv, dest in (("dir", str, "out"), ("svg", bool, "emit_svg"), ("csv", bool, "emit_csv"), ("traces", bool, "emit_traces")):
            v = _get(o, key, conv)
            if v is not None:
                upd[dest] = v
    return replace(run, **upd)


def resolve_run(args: argparse.Namespace) -> RunConfig:
    run = load_config(args.config)
    upd = {}
    for key in ("kappa", "l", "L", "l_star", "L_star"):
        v = getattr(args, key, None)
        if v is not None:
            upd[key] = v
    # geometry given on the command line replaces the file's geometry
    if any(k in upd for k in ("l_star", "L_star")):
        for k in ("kappa", "l", "L"):
            upd.setdefault(k, None)
    elif any(k in upd for k in ("l", "L")):
        upd.setdefault("l_star", None)
        upd.setdefault("L_star", None)
    for key, dest in (("jobs", "jobs"), ("oracle_n", "grid_n"), ("tol", "tol"), ("scan", "scan_n"), ("samples", "trace_samples"), ("axis", "trace_axis"), ("x_max", "trace_x_max")):
        v = getattr(args, key, None)
        if v is not None:
            upd[dest] = v
    if getattr(args, "oracle", False):
        upd["oracle"] = True
    if getattr(args, "svg", False):
        upd["emit_svg"] = True
    for flag in ("l_star_range", "L_star_range"):
        v = getattr(args, flag, None)
        if v is not None:
            upd[flag] = (float(v[0]), float(v[1]), int(v[2]))
    if getattr(args, "L_range", None) is not None:
        upd["trace_L_range"] = (float(args.L_range[0]), float(args.L_range[1]))
    # precedence for the output directory: --out, then the environment
    if args.out is not None:
        upd["out"] = args.out
    elif os.environ.get(OUT_ENV):
        upd["out"] = os.environ[OUT_ENV]
    return replace(run, **upd).validate()


# ---------------------------------------------------------------------------
# commands


def _out_dir(run: RunConfig) -> Path:
    p = Path(run.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_record(report: StabilityReport, path: Path) -> None:
    """JSON record; floats use the shortest repr that round-trips exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_record(path: str | os.PathLike) -> StabilityReport:
    with open(path, encoding="utf-8") as fh:
        return StabilityReport.from_dict(json.load(fh))


def format_report(r: StabilityReport) -> str:
    lines = [
        f"kappa = {r.kappa!r}  l = {r.l!r}  L = {r.L!r}",
        f"l* = {r.l_star!r}  L* = {r.L_star!r}",
        f"verdict: {r.verdict}",
    ]
    if r.verdict == UNSTABLE:
        lines.append(f"  mu = {r.mu!r} (mu/kappa^2 = {r.mu_star!r}), case {r.verdict_case}, x = {r.verdict_x!r}")
    for scan in r.cases:
        lines.append(f"case {scan.case}: {len(scan.roots)} root(s), {len(scan.touches)} touch(es), grid {scan.grid_points}")
        for root in scan.roots:
            lines.append(
                f"  {root.branch:13s} x = {root.x!r} mu/kappa^2 = {root.mu_star!r} "
                f"certified = {root.certified} sv_ratio = {root.sv_ratio:.3e}"
            )
        for k, v in scan.residuals.items():
            lines.append(f"  residual[{k}] = {v!r}")
    lines.append(f"case II cutoff x0 = {r.x0!r} (asymptotic regime reached: {r.x0_converged})")
    lines.append(f"(tan l* + sqrt3) L* < 4: {r.lemma_hypothesis}")
    s = r.screen
    lines.append(f"constant-variation screen: J_min = {s.j_min!r}, f != 0 branch feasible: {s.feasible} (sufficient test only)")
    if r.oracle is not None:
        o = r.oracle
        lines.append(f"oracle n = {o.n}/{2 * o.n}: mu = {list(o.mu_extrapolated)} agrees = {o.agrees}")
    for note in r.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def analyze_point(config: PartitionConfig, run: RunConfig) -> StabilityReport:
    report = scan_and_verdict(config, grid_n=run.scan_n, tol=run.tol)
    if run.oracle:
        report = oracle_check(report, config, run.grid_n)
    return report


def cmd_analyze(run: RunConfig) -> int:
    config = run.partition()
    report = analyze_point(config, run)
    out = _out_dir(run)
    write_record(report, out / "report.json")
    text = format_report(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    if run.emit_svg:
        emit_geometry_svg(config, out / "geometry.svg")
    sys.stdout.write(text)
    return EXIT_CODES[report.verdict]


def _sweep_point(args):
    l_star, L_star, run = args
    t0 = time.perf_counter()
    report = analyze_point(build_dimensionless(l_star, L_star), run)
    return report, time.perf_counter() - t0


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def sweep_points(run: RunConfig) -> list[tuple[float, float]]:
    ls = np.linspace(*run.l_star_range[:2], int(run.l_star_range[2])) if run.l_star_range[2] > 1 else np.array([run.l_star_range[0]])
    Ls = np.linspace(*run.L_star_range[:2], int(run.L_star_range[2])) if run.L_star_range[2] > 1 else np.array([run.L_star_range[0]])
    return [(float(a), float(b)) for a in ls for b in Ls]


def frontier(rows: list[tuple[float, float, str]]) -> list[tuple[float, float | None]]:
    """Largest grid ``L_star`` with every smaller grid value Stable, per ``l_star``."""
    out = {}
    for l_star, L_star, verdict in rows:
        state = out.setdefault(l_star, [None, True])
        if state[1] and verdict == STABLE:
            state[0] = L_star
        else:
            state[1] = False
    return [(k, v[0]) for k, v in out.items()]


def cmd_sweep(run: RunConfig) -> int:
    pts = sweep_points(run)
    for l_star, L_star in pts:
        dt.check_params(l_star, L_star)
    work = [(a, b, run) for a, b in pts]
    if run.jobs > 1:
        with ProcessPoolExecutor(max_workers=run.jobs) as pool:
            results = list(pool.map(_sweep_point, work))
    else:
        results = [_sweep_point(w) for w in work]
    out = _out_dir(run)
    rows = []
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh, open(
        out / "sweep_timing.csv", "w", newline="", encoding="utf-8"
    ) as th:
        w = csv.writer(fh)
        tw = csv.writer(th)
        w.writerow(["l_star", "L_star", "verdict", "mu_star", "case", "x", "oracle_mu_star", "screen_j_min"])
        tw.writerow(["l_star", "L_star", "runtime_s"])
        for (l_star, L_star), (rep, dt_s) in zip(pts, results):
            omu = None if rep.oracle is None else rep.oracle.mu_extrapolated[0] / rep.kappa**2
            w.writerow([_fmt(l_star), _fmt(L_star), rep.verdict, _fmt(rep.mu_star), rep.verdict_case or "", _fmt(rep.verdict_x), _fmt(omu), _fmt(rep.screen.j_min)])
            tw.writerow([_fmt(l_star), _fmt(L_star), f"{dt_s:.4f}"])
            rows.append((l_star, L_star, rep.verdict))
    with open(out / "frontier.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["l_star", "L_star_max"])
        for l_star, lmax in frontier(rows):
            w.writerow([_fmt(l_star), _fmt(lmax)])
    counts = {v: sum(1 for r in rows if r[2] == v) for v in (STABLE, UNSTABLE, INCONCLUSIVE)}
    sys.stdout.write(f"{len(rows)} points: " + ", ".join(f"{k} {v}" for k, v in counts.items()) + f"\nwrote {out / 'sweep.csv'}\n")
    return 0


def trace_rows(run: RunConfig) -> tuple[list[str], list[list[float | None]]]:
    """Sampled condition curves along ``x`` (fixed geometry) or ``L_star``.

    Along ``x`` the D2 column is ``det_D2 / (z e^{2 x l_star})``.  Along
    ``L_star`` the D1 and D2 columns hold the smallest value over the
    corresponding ``x`` scan.
    """
    config = run.partition()
    ls = config.l_star
    n = run.trace_samples
    if run.trace_axis == "x":
        Ls = config.L_star
        xs = np.linspace(0.0, run.trace_x_max, n + 2)[1:-1]
        d2 = dt.d2_scaled(xs, ls, Ls)
        d1 = dt.d1_stable(xs, ls, Ls)
        r3, r4 = dt.case_III_residual(ls, Ls), dt.case_IV_residual(ls, Ls)
        rows = [[float(x), float(a) if x < 1 else None, float(b), r3, r4] for x, a, b in zip(xs, d1, d2)]
        return ["x", "D1", "D2", "residual_III", "residual_IV"], rows
    lo, hi = run.trace_L_range
    Lgrid = np.linspace(lo, hi, n)
    xs1 = np.linspace(1e-6, 1 - 1e-6, 256)
    rows = []
    for Ls in Lgrid:
        Ls = float(Ls)
        x0, _ = dt.choose_x0(ls, Ls, n=64)
        xs2 = np.concatenate([np.linspace(dt.MP_SWITCH_X, min(x0, 10.0), 128), np.geomspace(10.0, max(x0, 10.0), 64)])
        rows.append(
            [
                Ls,
                float(np.min(dt.d1_stable(xs1, ls, Ls))),
                float(np.min(dt.d2_scaled(xs2, ls, Ls))),
                dt.case_III_residual(ls, Ls),
                dt.case_IV_residual(ls, Ls),
            ]
        )
    return ["L_star", "D1", "D2", "residual_III", "residual_IV"], rows


def cmd_trace(run: RunConfig) -> int:
    header, rows = trace_rows(run)
    out = _out_dir(run)
    path = out / f"trace_{run.trace_axis}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    sys.stdout.write(f"wrote {path}\n")
    return 0


def cmd_render(run: RunConfig) -> int:
    config = run.partition()
    out = _out_dir(run)
    path = out / "geometry.svg"
    emit_geometry_svg(config, path)
    sys.stdout.write(f"wrote {path}\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [geometry], [sweep], [numerics], [output]")
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or the config, else .)")
    common.add_argument("--jobs", type=_positive_int, help="worker processes for sweeps")
    common.add_argument("--oracle", action="store_true", help="cross-check with the discretized eigenvalue oracle")
    common.add_argument("--oracle-n", dest="oracle_n", type=int, help="oracle cells per leaf (default 400)")
    common.add_argument("--tol", type=float, help="root bisection tolerance in x (default 1e-12)")
    common.add_argument("--scan", type=int, help="determinant scan points (default 2048)")
    geo = common.add_argument_group("geometry")
    geo.add_argument("--kappa", type=float)
    geo.add_argument("--l", type=float, help="curved leaf length")
    geo.add_argument("--L", type=float, help="flat leaf length")
    geo.add_argument("--l-star", dest="l_star", type=float, help="kappa*l (kappa = 1)")
    geo.add_argument("--L-star", dest="L_star", type=float, help="kappa*L (kappa = 1)")

    p = argparse.ArgumentParser(prog="tjstab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", parents=[common], help="verdict for one configuration")
    a.add_argument("--svg", action="store_true", help="also write geometry.svg")
    s = sub.add_parser("sweep", parents=[common], help="stability map over (l*, L*)")
    s.add_argument("--l-star-range", dest="l_star_range", nargs=3, metavar=("START", "STOP", "STEPS"))
    s.add_argument("--L-star-range", dest="L_star_range", nargs=3, metavar=("START", "STOP", "STEPS"))
    t = sub.add_parser("trace", parents=[common], help="sampled determinant curves")
    t.add_argument("--axis", choices=("x", "L"))
    t.add_argument("--samples", type=int)
    t.add_argument("--x-max", dest="x_max", type=float)
    t.add_argument("--L-range", dest="L_range", nargs=2, metavar=("START", "STOP"))
    sub.add_parser("render", parents=[common], help="write geometry.svg")
    return p


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "trace": cmd_trace, "render": cmd_render}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = resolve_run(args)
        if args.command in ("analyze", "render", "trace") and not run.has_geometry():
            raise ConfigError("no geometry: pass --l-star/--L-star, --l/--L or a [geometry] section")
        return COMMANDS[args.command](run)
    except TJStabError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

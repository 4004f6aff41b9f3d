"""Command-line front end: ``hypbergman {kernel,verify,symd,injectivity}``.

Settings come from defaults, then a JSON ``--config`` file, then flags.
Each command writes ``<command>.json`` (and CSV tables) into ``--out``.
Exit codes: 0 ok, 2 invalid input, 3 a bound check failed, 4 element cap hit.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, tolerances
from ._backend import BACKEND
from .bounds import (asymptotic_kernel_check, check_theorem1, constant_CX, corollary1_scan,
                     kernel_upper_chain)
from .errors import BudgetExceeded, ValidationError
from .grassmann import (SUBSTITUTION_CAVEAT, GrassmannDims, SymPoint, corollary2_scan,
                        symd_hyp_volume_density, symd_volume_ratio, theorem2_rhs)
from .groups import DEFAULT_ELEMENT_CAP, GroupSpec, bolza_group, enumerate_elements, injectivity_radius
from .hyperbolic import HPoint
from .kernel import bergman_kernel_X, check_weight, series_sums

EXIT_OK, EXIT_INVALID, EXIT_FAILED, EXIT_BUDGET = 0, 2, 3, 4
THREADS_ENV = "HYPBERGMAN_THREADS"
DEFAULT_GRID = "grid:-0.6,0.6,5,0.5,1.7,5"


@dataclass
class RunConfig:
    group: str = "bolza"
    k_values: list = field(default_factory=lambda: list(range(3, 13)))
    points: object = DEFAULT_GRID
    max_word_length: int = 10
    displacement_cutoff: float = 10.0
    element_cap: int = DEFAULT_ELEMENT_CAP
    d: int | None = None
    r_x: float | None = None
    injectivity_word_lengths: list = field(default_factory=lambda: [6, 8, 10])
    convergence_extra_length: int = 2
    output: str = "hypbergman_out"
    threads: int = 1
    tolerances: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        # execution details are left out so payloads compare across runs
        d = asdict(self)
        d.pop("threads")
        d.pop("output")
        d["points"] = [[p.x, p.y] for p in parse_points(self.points)]
        return d


def parse_k_list(spec) -> list:
    if isinstance(spec, (list, tuple)):
        ks = [int(k) for k in spec]
    else:
        ks = []
        for part in str(spec).split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = part.split("-")
                ks.extend(range(int(lo), int(hi) + 1))
            else:
                ks.append(int(part))
    if not ks:
        raise ValidationError("no k values given")
    for k in ks:
        check_weight(k)
    return sorted(set(ks))


def parse_points(spec) -> list:
    """``"x,y;x,y"``, ``"grid:x0,x1,nx,y0,y1,ny"``, a list of pairs or ``{"grid": [...]}``."""
    try:
        if isinstance(spec, dict):
            spec = "grid:" + ",".join(str(v) for v in spec["grid"])
        if isinstance(spec, str) and spec.startswith("grid:"):
            x0, x1, nx, y0, y1, ny = (float(v) for v in spec[5:].split(","))
            nx, ny = int(nx), int(ny)
            xs = [x0 + (x1 - x0) * i / (nx - 1) if nx > 1 else x0 for i in range(nx)]
            ys = [y0 + (y1 - y0) * j / (ny - 1) if ny > 1 else y0 for j in range(ny)]
            pts = [HPoint(x, y) for y in ys for x in xs]
        elif isinstance(spec, str):
            pts = [HPoint(*(float(v) for v in item.split(","))) for item in spec.split(";") if item.strip()]
        else:
            pts = [HPoint(float(x), float(y)) for x, y in spec]
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad point spec {spec!r}: {exc}") from None
    if not pts:
        raise ValidationError("point list is empty")
    return pts


def load_group(name) -> GroupSpec:
    if name in (None, "", "bolza"):
        return bolza_group()
    return GroupSpec.load(name)


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        known = set(RunConfig.__dataclass_fields__)
        bad = set(data) - known
        if bad:
            raise ValidationError(f"unknown config keys: {sorted(bad)}")
        for key, val in data.items():
            setattr(cfg, key, val)
    env_threads = os.environ.get(THREADS_ENV)
    if env_threads:
        cfg.threads = int(env_threads)
    overrides = {"group": args.group, "k_values": args.k, "points": args.points,
                 "max_word_length": args.word_length, "displacement_cutoff": args.cutoff,
                 "element_cap": args.element_cap, "d": args.d, "r_x": args.r_x,
                 "output": args.out, "threads": args.threads}
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    cfg.k_values = parse_k_list(cfg.k_values)
    cfg.max_word_length = int(cfg.max_word_length)
    cfg.displacement_cutoff = float(cfg.displacement_cutoff)
    cfg.element_cap = int(cfg.element_cap)
    cfg.threads = max(1, int(cfg.threads))
    if cfg.max_word_length < 0:
        raise ValidationError("word length must be >= 0")
    parse_points(cfg.points)
    if cfg.d is not None:
        cfg.d = int(cfg.d)
        if cfg.d < 1:
            raise ValidationError("d must be >= 1")
    return cfg


class Runner:
    """Shared state for one command: group, per-point element balls, r_X."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.group = load_group(cfg.group)
        self.points = parse_points(cfg.points)
        self._balls = {}

    def map(self, fn, items):
        items = list(items)
        if self.cfg.threads == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.cfg.threads) as pool:
            return list(pool.map(fn, items))

    def prepare(self, points, length):
        todo = [p for p in dict.fromkeys(points) if (p, length) not in self._balls]
        balls = self.map(lambda p: enumerate_elements(
            self.group, length, prune=(p, self.cfg.displacement_cutoff),
            element_cap=self.cfg.element_cap), todo)
        self._balls.update({(p, length): b for p, b in zip(todo, balls)})

    def ball(self, p, length=None):
        length = self.cfg.max_word_length if length is None else length
        if (p, length) not in self._balls:
            self.prepare([p], length)
        return self._balls[(p, length)]

    def r_x(self):
        if self.cfg.r_x is not None:
            return float(self.cfg.r_x), "config"
        L = max(self.cfg.injectivity_word_lengths)
        est = injectivity_radius(self.group, self.points, L, element_cap=self.cfg.element_cap)
        return est.r_upper, f"enumeration upper bound (word length {L})"


def _header(cfg, command, runner):
    return {"tool": "hypbergman", "version": __version__, "backend": BACKEND,
            "command": command, "config": cfg.resolved(), "group": runner.group.to_dict(),
            "tolerances": tolerances.as_dict()}


def _write(cfg, name, payload, tables=None):
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")
    for tname, rows in (tables or {}).items():
        if not rows:
            continue
        with open(out / f"{tname}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    return path


def cmd_kernel(cfg: RunConfig) -> int:
    run = Runner(cfg)
    L, L2 = cfg.max_word_length, cfg.max_word_length + cfg.convergence_extra_length
    run.prepare(run.points, L2)
    tasks = [(p, k) for p in run.points for k in cfg.k_values]

    def one(task):
        p, k = task
        big = run.ball(p, L2)
        ev = bergman_kernel_X(p, k, big.restrict(L))
        ref = bergman_kernel_X(p, k, big)
        conv = abs(ref.value - ev.value) / abs(ref.value)
        return {"x": p.x, "y": p.y, "k": k, "BkX": ev.value.real, "BkX_imag": ev.value.imag,
                "n_terms": ev.n_terms, "truncation_word_length": ev.truncation_word_length,
                "last_shell_magnitude": ev.last_shell_magnitude,
                "tail_estimate": ev.tail_estimate, "BkX_check": ref.value.real,
                "check_word_length": L2, "convergence_rel": conv}

    rows = run.map(one, tasks)
    asym = run.map(lambda p: {"z": [p.x, p.y], "rows": asymptotic_kernel_check(
        p, cfg.k_values, run.ball(p, L))}, run.points)
    payload = _header(cfg, "kernel", run) | {"rows": rows, "asymptotics": asym}
    _write(cfg, "kernel", payload, {"kernel": rows})
    print(f"kernel: {len(rows)} rows -> {Path(cfg.output) / 'kernel.json'}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    run = Runner(cfg)
    r_x, r_src = run.r_x()
    run.prepare(run.points, cfg.max_word_length)
    tasks = [(p, k) for p in run.points for k in cfg.k_values]

    def one(task):
        p, k = task
        elems = run.ball(p)
        s = series_sums(p, k, elems)
        return (check_theorem1(p, k, elems, r_x, s).to_dict(),
                kernel_upper_chain(p, k, elems, r_x, s).to_dict())

    results = run.map(one, tasks)
    scans = run.map(lambda p: corollary1_scan(p, cfg.k_values, run.ball(p)), run.points)
    t1 = [a for a, _ in results]
    chain = [b for _, b in results]
    n_fail = sum(not r["passed"] for r in t1) + sum(not r["passed"] for r in chain)
    summary = {"theorem1_passed": sum(r["passed"] for r in t1), "theorem1_total": len(t1),
               "chain_passed": sum(r["passed"] for r in chain), "chain_total": len(chain),
               "all_passed": n_fail == 0}
    payload = _header(cfg, "verify", run) | {
        "r_X": r_x, "r_X_source": r_src, "theorem1": t1, "kernel_chain": chain,
        "corollary1": scans, "summary": summary}
    table = [{"x": r["inputs"]["z"][0], "y": r["inputs"]["z"][1], "k": r["inputs"]["k"],
              "lhs": r["lhs"], "rhs": r["rhs"], "ratio": r["details"]["ratio"],
              "BkX": r["details"]["BkX"], "passed": r["passed"]} for r in t1]
    _write(cfg, "verify", payload, {"verify": table})
    print(f"verify: theorem1 {summary['theorem1_passed']}/{summary['theorem1_total']}, "
          f"chain {summary['chain_passed']}/{summary['chain_total']}")
    return EXIT_OK if n_fail == 0 else EXIT_FAILED


def _sym_points(cfg, run):
    d = cfg.d
    if d is None:
        raise ValidationError("symd needs d")
    pts = run.points
    if len(pts) % d:
        raise ValidationError(f"{len(pts)} points do not split into groups of d={d}")
    return [SymPoint(tuple(pts[i:i + d])) for i in range(0, len(pts), d)]


def cmd_symd(cfg: RunConfig) -> int:
    run = Runner(cfg)
    for k in cfg.k_values:
        GrassmannDims(run.group.genus, k, cfg.d if cfg.d is not None else 1)
    syms = _sym_points(cfg, run)
    r_x, r_src = run.r_x()
    run.prepare(run.points, cfg.max_word_length)
    g = run.group.genus
    tasks = [(sp, k) for sp in syms for k in cfg.k_values]

    def one(task):
        sp, k = task
        dims = GrassmannDims(g, k, sp.d)
        ratio = symd_volume_ratio(sp, k, run.ball, g)
        hyp = symd_hyp_volume_density(sp)
        return {"points": [[q.x, q.y] for q in sp.points], "k": k, "d": sp.d,
                "n_k": dims.n_k, "r_k": dims.r_k, "hyp_volume_density": hyp,
                "fs_volume_estimate": ratio * hyp, "volume_ratio": ratio,
                "lhs": abs(ratio), "theorem2_rhs": theorem2_rhs(sp, k, run.ball, r_x, g),
                "C_X": constant_CX(k, r_x)}

    rows = run.map(one, tasks)
    scans = run.map(lambda sp: corollary2_scan(sp, cfg.k_values, run.ball, g), syms)
    payload = _header(cfg, "symd", run) | {"r_X": r_x, "r_X_source": r_src, "rows": rows,
                                            "corollary2": scans, "caveat": SUBSTITUTION_CAVEAT}
    flat = [{"points": ";".join(f"{x},{y}" for x, y in r["points"]),
             **{k: v for k, v in r.items() if k != "points"}} for r in rows]
    _write(cfg, "symd", payload, {"symd": flat})
    print(f"symd: {len(rows)} rows (d={cfg.d}); caveat: {SUBSTITUTION_CAVEAT}")
    return EXIT_OK


def cmd_injectivity(cfg: RunConfig) -> int:
    run = Runner(cfg)
    table = []
    for L in sorted(set(int(x) for x in cfg.injectivity_word_lengths)):
        est = injectivity_radius(run.group, run.points, L, element_cap=cfg.element_cap)
        table.append(est.to_dict())
    best = table[-1]
    stable = len(table) > 1 and abs(table[-1]["r_upper"] - table[-2]["r_upper"]) <= 1e-9
    payload = _header(cfg, "injectivity", run) | {
        "r_upper": best["r_upper"], "argmin_word": best["argmin_word_text"],
        "convergence": table, "stable_in_last_two": stable}
    _write(cfg, "injectivity", payload, {"injectivity": [
        {"word_length": r["word_length_budget"], "r_upper": r["r_upper"],
         "argmin_word": r["argmin_word_text"]} for r in table]})
    print(f"injectivity: r_upper = {best['r_upper']:.10f} ({best['argmin_word_text']})")
    return EXIT_OK


COMMANDS = {"kernel": cmd_kernel, "verify": cmd_verify, "symd": cmd_symd,
            "injectivity": cmd_injectivity}


def make_parser():
    ap = argparse.ArgumentParser(prog="hypbergman", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--group", help="group spec JSON file, or 'bolza'")
        p.add_argument("--k", help="weights, e.g. '3-12' or '3,6,9'")
        p.add_argument("--points", help="'x,y;x,y' or 'grid:x0,x1,nx,y0,y1,ny'")
        p.add_argument("--word-length", type=int)
        p.add_argument("--cutoff", type=float, help="displacement cutoff for pruning")
        p.add_argument("--element-cap", type=int)
        p.add_argument("--d", type=int, help="symmetric product degree")
        p.add_argument("--r-x", type=float, help="use this r_X instead of estimating it")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        with tolerances.overridden(**cfg.tolerances):
            return COMMANDS[args.command](cfg)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValidationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())

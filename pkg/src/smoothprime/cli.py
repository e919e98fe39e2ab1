"""Command-line front end: eval, scan, table and resonance.

Settings are layered: built-in defaults, then a ``key = value`` config file
(``--config`` or $SMOOTHPRIME_CONFIG), then command-line flags.
Exit codes: 0 success, 2 argument or config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

from .integration import METHODS, IntegrationSpec, NonFiniteIntegrandError
from .kernels import BELL_FAMILIES, BUMP_FAMILIES, KERNEL_FAMILIES, Bell, Bump, Kernel
from .oracle import is_prime
from .primality import (
    DEFAULT_THRESHOLD,
    VARIANTS,
    DegenerateLocalizationError,
    ParamSchedule,
    SmoothParams,
    evaluate,
    resolve_schedule,
)
from .resonance import MomentSpec, detect_composite, resonance_map

CONFIG_ENV = "SMOOTHPRIME_CONFIG"
FORMATS = ("pretty", "csv", "json")
DELTA_RULES = ("fixed", "inverse-square", "inverse-log")


class UsageError(Exception):
    """Bad argument or config value; exit status 2."""


@dataclass
class RunConfig:
    variant: str = "summed-triple"
    delta: float = 0.05
    eps: float = 1e-5
    p: int = 8
    sigma: float = 0.05
    c: float = 1.0
    kernel: str = "sine"
    bump: str = "sine-squared"
    bell: str = "gaussian"
    method: str = "simpson"
    grid: int = 32
    outer_grid: int = 2048
    samples: int = 10_000
    seed: int = 0
    tol: float = 1e-8
    threshold: float = DEFAULT_THRESHOLD
    schedule_delta: str = "fixed"
    schedule_eps: str = "fixed"
    truncation_order: int = 4
    rel_threshold: float = 0.02
    format: str = "pretty"
    jobs: int = 1
    timing: bool = True

    def params(self) -> SmoothParams:
        return SmoothParams(
            delta=self.delta,
            kernel=Kernel(self.kernel, self.eps, self.p, self.c),
            bump=Bump(self.bump),
            bell=Bell(self.bell, self.sigma),
        )

    def schedule(self) -> ParamSchedule:
        rule, _, exponent = self.schedule_eps.partition(":")
        return ParamSchedule(self.schedule_delta, rule, epsilon_exponent=float(exponent) if exponent else 2.0)

    def params_at(self, n) -> SmoothParams:
        return resolve_schedule(self.schedule(), self.params(), n)

    def integ(self) -> IntegrationSpec:
        return IntegrationSpec(self.method, self.grid, self.samples, self.seed, self.tol)

    def outer(self) -> IntegrationSpec:
        return IntegrationSpec("simpson", self.outer_grid)


def _choice(options):
    def check(v):
        return None if v in options else f"must be one of {', '.join(options)}"
    return check


def _positive(v):
    return None if v > 0 else "must be > 0"


def _positive_int(v):
    return None if v >= 1 else "must be >= 1"


def _eps_rule(v):
    rule, _, exponent = v.partition(":")
    if rule == "fixed" and not exponent:
        return None
    if rule == "power":
        try:
            return None if not exponent or float(exponent) > 0 else "power exponent must be > 0"
        except ValueError:
            return "power exponent must be a number"
    return "must be fixed or power[:c]"


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, check returning an error message or None)
FIELDS = {
    "variant": (str, _choice(VARIANTS)),
    "delta": (float, lambda v: None if 0 < v < 1 else ("must be > 0" if v <= 0 else "must be < 1")),
    "eps": (float, _positive),
    "p": (int, _positive_int),
    "sigma": (float, _positive),
    "c": (float, _positive),
    "kernel": (str, _choice(KERNEL_FAMILIES)),
    "bump": (str, _choice(BUMP_FAMILIES)),
    "bell": (str, _choice(BELL_FAMILIES)),
    "method": (str, _choice(METHODS)),
    "grid": (int, _positive_int),
    "outer_grid": (int, _positive_int),
    "samples": (int, _positive_int),
    "seed": (int, lambda v: None if 0 <= v < 2**64 else "must be a 64-bit unsigned integer"),
    "tol": (float, _positive),
    "threshold": (float, lambda v: None if 0 < v < 1 else "must lie in (0, 1)"),
    "schedule_delta": (str, _choice(DELTA_RULES)),
    "schedule_eps": (str, _eps_rule),
    "truncation_order": (int, lambda v: None if 0 <= v <= 8 else "must be in 0..8"),
    "rel_threshold": (float, lambda v: None if 0 < v < 1 else "must lie in (0, 1)"),
    "format": (str, _choice(FORMATS)),
    "jobs": (int, _positive_int),
    "timing": (_bool, lambda v: None),
}
ALIASES = {"epsilon": "eps", "q": "grid", "abs_tol": "tol"}


def convert(key: str, text: str):
    """Parse and validate one setting; raises UsageError naming the key."""
    parse, check = FIELDS[key]
    try:
        value = parse(text)
    except ValueError:
        raise UsageError(f"{key}: malformed value {text!r}") from None
    problem = check(value)
    if problem:
        raise UsageError(f"{key} {problem}")
    return value


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    """Read ``key = value`` lines (``#`` comments, blank lines ignored) over ``base``."""
    cfg = replace(base) if base is not None else RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, text = line.partition("=")
        key = key.strip().replace("-", "_")
        key = ALIASES.get(key, key)
        if not sep or key not in FIELDS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}" if sep else f"{path}:{lineno}: expected key = value")
        try:
            setattr(cfg, key, convert(key, text.strip()))
        except UsageError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from None
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(parser):
    g = parser.add_argument_group("settings (defaults in brackets)")
    d = RunConfig()
    g.add_argument("--variant", choices=VARIANTS, help=f"P(n) variant [{d.variant}]")
    g.add_argument("--delta", help=f"perturbation amplitude [{d.delta}]")
    g.add_argument("--eps", help=f"kernel sharpness epsilon [{d.eps}]")
    g.add_argument("--p", help=f"suppression exponent [{d.p}]")
    g.add_argument("--sigma", help=f"bell width [{d.sigma}]")
    g.add_argument("--c", help=f"singular-exponential constant [{d.c}]")
    g.add_argument("--kernel", help=f"{', '.join(KERNEL_FAMILIES)} [{d.kernel}]")
    g.add_argument("--bump", help=f"{', '.join(BUMP_FAMILIES)} [{d.bump}]")
    g.add_argument("--bell", help=f"{', '.join(BELL_FAMILIES)} [{d.bell}]")
    g.add_argument("--method", help=f"{', '.join(METHODS)} [{d.method}]")
    g.add_argument("--grid", help=f"intervals per axis q [{d.grid}]")
    g.add_argument("--outer-grid", dest="outer_grid", help=f"outer m intervals per bell [{d.outer_grid}]")
    g.add_argument("--samples", help=f"Monte Carlo samples [{d.samples}]")
    g.add_argument("--seed", help=f"Monte Carlo seed [{d.seed}]")
    g.add_argument("--tol", help=f"adaptive absolute tolerance [{d.tol}]")
    g.add_argument("--threshold", help=f"likely-prime threshold tau [{d.threshold}]")
    g.add_argument("--schedule-delta", dest="schedule_delta", help=f"{', '.join(DELTA_RULES)} [{d.schedule_delta}]")
    g.add_argument("--schedule-eps", dest="schedule_eps", help=f"fixed or power[:c] [{d.schedule_eps}]")
    g.add_argument("--truncation-order", dest="truncation_order", help=f"moment order R [{d.truncation_order}]")
    g.add_argument("--rel-threshold", dest="rel_threshold", help=f"resonance drop threshold [{d.rel_threshold}]")
    g.add_argument("--format", help=f"{', '.join(FORMATS)} [{d.format}]")
    g.add_argument("--jobs", help=f"worker count [{d.jobs}]")
    g.add_argument("--no-timing", dest="timing", action="store_const", const="false",
                   help="omit elapsed-time fields")
    g.add_argument("--config", help=f"key = value settings file [${CONFIG_ENV}]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smoothprime", description="Smooth integral primality filter P(n).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_eval = sub.add_parser("eval", help="evaluate P(n)")
    p_eval.add_argument("n", help="input n (real for smoothed variants)")
    p_scan = sub.add_parser("scan", help="evaluate P over an integer range")
    p_scan.add_argument("start")
    p_scan.add_argument("end")
    sub.add_parser("table", help="summed-triple vs reduced-1d for n = 2..13")
    p_res = sub.add_parser("resonance", help="resonance map A_k(n) and detection")
    p_res.add_argument("n")
    for p in (p_eval, p_scan, sub.choices["table"], p_res):
        _common(p)
    return parser


def resolve_config(args) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = load_config(path) if path else RunConfig()
    for f in fields(RunConfig):
        text = getattr(args, f.name, None)
        if text is not None:
            setattr(cfg, f.name, convert(f.name, str(text)))
    return cfg


def _number(text, name="n"):
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"{name} must be a number, got {text!r}") from None
    return int(value) if value.is_integer() else value


def _g(x):
    return f"{x:.6g}"


def _emit_rows(out, rows, columns, cfg: RunConfig, header: dict | None = None):
    if cfg.format == "json":
        doc = {"params": header, "rows": rows} if header is not None else rows
        json.dump(doc, out, indent=2)
        out.write("\n")
        return
    text = [[_g(r[c]) if isinstance(r[c], float) else str(r[c]).lower() if isinstance(r[c], bool) else str(r[c])
             for c in columns] for r in rows]
    if cfg.format == "csv":
        out.write(",".join(columns) + "\n")
        for t in text:
            out.write(",".join(t) + "\n")
        return
    widths = [max(len(c), *(len(t[i]) for t in text)) if text else len(c) for i, c in enumerate(columns)]
    out.write("  ".join(c.rjust(w) for c, w in zip(columns, widths)) + "\n")
    for t in text:
        out.write("  ".join(v.rjust(w) for v, w in zip(t, widths)) + "\n")


def _header(cfg: RunConfig, params: SmoothParams | None = None) -> dict:
    head = (params or cfg.params()).as_dict()
    head.update(variant=cfg.variant, method=cfg.method, grid=cfg.grid, schedule_delta=cfg.schedule_delta,
                schedule_eps=cfg.schedule_eps, threshold=cfg.threshold)
    if cfg.method == "monte-carlo":
        head.update(samples=cfg.samples, seed=cfg.seed)
    if cfg.method == "adaptive":
        head.update(tol=cfg.tol)
    return head


def _evaluate(n, cfg: RunConfig, variant: str | None = None, jobs: int = 1):
    t0 = time.perf_counter()
    res = evaluate(n, variant or cfg.variant, cfg.params_at(n), cfg.integ(), integ_outer=cfg.outer(), jobs=jobs)
    return res, time.perf_counter() - t0


def cmd_eval(args, cfg: RunConfig, out) -> int:
    n = _number(args.n)
    if n < 2:
        raise UsageError("n must be >= 2")
    res, elapsed = _evaluate(n, cfg, jobs=cfg.jobs)
    row = {"n": n, "variant": res.variant, "value": res.value, "error_estimate": res.error_estimate,
           "evaluations": res.evaluations}
    if cfg.timing:
        row["elapsed"] = elapsed
    if cfg.format == "json":
        row["params"] = _header(cfg, res.params)
        json.dump(row, out, indent=2)
        out.write("\n")
    elif cfg.format == "csv":
        _emit_rows(out, [row], list(row), cfg)
    else:
        out.write(f"P({n}) = {res.value:.6f} +/- {res.error_estimate:.2g}  [{res.variant}, "
                  f"{res.evaluations} evaluations" + (f", {elapsed:.3f} s]" if cfg.timing else "]") + "\n")
        if res.note:
            out.write(f"note: {res.note}\n")
    return 0


def _scan_one(item):
    n, cfg = item
    res, elapsed = _evaluate(n, cfg)
    return n, res.value, elapsed


def cmd_scan(args, cfg: RunConfig, out) -> int:
    start, end = _number(args.start, "start"), _number(args.end, "end")
    if not (isinstance(start, int) and isinstance(end, int)) or not 2 <= start <= end:
        raise UsageError("scan range needs integers 2 <= start <= end")
    items = [(n, cfg) for n in range(start, end + 1)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_scan_one, items))
    else:
        results = [_scan_one(i) for i in items]
    rows = []
    for n, value, elapsed in results:
        row = {"n": n, "value": value, "likely_prime": value > cfg.threshold, "is_prime": is_prime(n)}
        if cfg.timing:
            row["elapsed"] = elapsed
        rows.append(row)
    _emit_rows(out, rows, list(rows[0]), cfg, header=_header(cfg))
    return 0


def cmd_table(args, cfg: RunConfig, out) -> int:
    rows = []
    for n in range(2, 14):
        triple, _ = _evaluate(n, cfg, "summed-triple", cfg.jobs)
        reduced, _ = _evaluate(n, cfg, "reduced-1d", cfg.jobs)
        rows.append({"n": n, "class": "prime" if is_prime(n) else "composite",
                     "triple": triple.value, "reduced": reduced.value})
    if cfg.format == "pretty":
        out.write("  n  class      triple   reduced\n")
        for r in rows:
            out.write(f"{r['n']:3d}  {r['class']:<9}  {r['triple']:.4f}    {r['reduced']:.4f}\n")
    else:
        _emit_rows(out, rows, ["n", "class", "triple", "reduced"], cfg)
    return 0


def cmd_resonance(args, cfg: RunConfig, out) -> int:
    n = _number(args.n)
    if n < 4:
        raise UsageError("resonance needs n >= 4")
    rmap = resonance_map(n, cfg.params_at(n), MomentSpec(cfg.truncation_order), cfg.integ())
    hit = detect_composite(rmap, cfg.rel_threshold)
    rows = [{"k": e.k, "a_k": e.amplitude, "baseline": e.baseline, "relative_drop": e.relative_drop}
            for e in rmap.entries]
    if hit is None:
        summary = "no resonance detected"
    else:
        summary = f"resonance at k={hit.k} (drop {hit.relative_drop:.3g}): divisor hint {hit.divisor_hint}"
    if cfg.format == "json":
        det = None if hit is None else asdict(hit)
        json.dump({"params": _header(cfg, rmap.params), "n": n, "rows": rows, "sum": rmap.total,
                   "detection": det, "summary": summary}, out, indent=2)
        out.write("\n")
        return 0
    _emit_rows(out, rows, ["k", "a_k", "baseline", "relative_drop"], cfg)
    out.write(("# " if cfg.format == "csv" else "") + summary + "\n")
    return 0


COMMANDS = {"eval": cmd_eval, "scan": cmd_scan, "table": cmd_table, "resonance": cmd_resonance}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    buf = io.StringIO()
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        cfg.params()
        cfg.schedule()
        status = COMMANDS[args.command](args, cfg, buf)
    except UsageError as exc:
        err.write(f"smoothprime: error: {exc}\n")
        return 2
    except (NonFiniteIntegrandError, DegenerateLocalizationError) as exc:
        err.write(f"smoothprime: numerical failure: {exc}\n")
        return 3
    except ValueError as exc:
        err.write(f"smoothprime: error: {exc}\n")
        return 2
    out.write(buf.getvalue())
    return status


if __name__ == "__main__":
    sys.exit(main())

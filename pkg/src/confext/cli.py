"""Command-line front end.

    confext constants --n 3 --alpha 0 --beta 1
    confext verify --suite gap --n 4 --alpha -1 --beta 2 --format csv
    confext deficit --family quadratic --eps 0.1,0.05,0.025 --n 3 --alpha 0 --beta 1
    confext sweep --grid grid.csv --suite gap --jobs 4 --out sweep.csv
    confext extension --n 3 --alpha 0.3 --beta 0.5

Exit codes: 0 every check passed, 2 at least one check failed (including
parameter validity under verify and sweep), 1 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .constants import RADIAL_ORDER, constant_set
from .operators import UnsupportedCase, boundary_limit_check
from .params import InvalidParams, Params
from .specfun import DomainError
from .stability import FAMILIES, StabilityConfig, optimality_sweep
from .verifier import SUITES, VerifierConfig, grid_records, run_suite, sweep_grid

__all__ = ["Command", "UsageError", "parse", "run", "main", "write_records"]

VERBS = ("constants", "verify", "deficit", "sweep", "extension")
FORMATS = ("csv", "json")
DEFICIT_COLUMNS = ("eps", "deficit", "dist2", "distp", "ratio2", "ratiop")
VERIFY_COLUMNS = ("suite", "check", "lhs", "rhs", "margin", "tol", "passed")
SWEEP_COLUMNS = ("n", "alpha", "beta") + VERIFY_COLUMNS
EXTENSION_COLUMNS = (
    "n", "alpha", "beta", "xn", "scaled", "extrapolated",
    "stated_constant", "derived_constant", "ratio_stated", "ratio_derived", "richardson_change",
)  # fmt: skip
DEFAULT_EPS = (0.1, 0.05, 0.025)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class Command:
    verb: str
    params: Params | None
    grid: Path | None
    suite: str
    family: str
    eps: tuple[float, ...]
    format: str
    out: Path | None
    jobs: int
    lmax: int
    resolution: int


def _eps_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid eps list {text!r}") from exc
    if not vals or any(not math.isfinite(v) or v < 0 for v in vals):
        raise argparse.ArgumentTypeError("eps values must be finite and nonnegative")
    return vals


def _build_parser() -> _Parser:
    p = _Parser(prog="confext", description="Sharp constants, identities and stability checks for Q and S.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p.add_argument("--family", default="quadratic", choices=FAMILIES)
    p.add_argument("--eps", type=_eps_list, default=DEFAULT_EPS)
    p.add_argument("--grid", type=Path)
    p.add_argument("--format", default="csv", choices=FORMATS)
    p.add_argument("--out", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--lmax", type=int, default=200)
    p.add_argument("--resolution", type=int, default=RADIAL_ORDER, help="radial quadrature order")
    return p


def parse(argv: Sequence[str]) -> Command:
    """Parse argv; raises UsageError on unknown flags or missing parameters."""
    ns = _build_parser().parse_args(list(argv))
    triple = (ns.n, ns.alpha, ns.beta)
    if ns.verb == "sweep":
        if any(v is not None for v in triple):
            raise UsageError("sweep takes --grid, not --n/--alpha/--beta")
        prm = None
    else:
        if any(v is None for v in triple):
            raise UsageError(f"{ns.verb} requires --n, --alpha and --beta")
        if ns.grid is not None:
            raise UsageError("--grid applies to sweep only")
        try:
            prm = Params(*triple)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
    if ns.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if ns.lmax < 50:
        raise UsageError("--lmax must be at least 50")
    if ns.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    return Command(ns.verb, prm, ns.grid, ns.suite, ns.family, tuple(ns.eps), ns.format, ns.out, ns.jobs, ns.lmax, ns.resolution)


# ------------------------------------------------------------------ output


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(records: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        rows = [{c: _json_value(r[c]) for c in columns} for r in records]
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def write_records(records: Sequence[dict], columns: Sequence[str], fmt: str, out: Path | None) -> None:
    """Write to ``out`` through a temporary file and an atomic rename, or to stdout."""
    text = render(records, columns, fmt)
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    fd, tmp = tempfile.mkstemp(dir=out.parent if str(out.parent) else ".", prefix=f".{out.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_grid(path: Path) -> list[tuple]:
    """Triples from a CSV with columns n, alpha, beta or a JSON list of objects or triples."""
    text = Path(path).read_text()
    if path.suffix.lower() == ".json":
        rows = json.loads(text)
        return [(int(r["n"]), float(r["alpha"]), float(r["beta"])) if isinstance(r, dict) else (int(r[0]), float(r[1]), float(r[2])) for r in rows]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"n", "alpha", "beta"} <= set(reader.fieldnames):
        raise UsageError("grid CSV needs columns n, alpha, beta")
    return [(int(r["n"]), float(r["alpha"]), float(r["beta"])) for r in reader]


# ------------------------------------------------------------------ dispatch


def _verifier_config(cmd: Command) -> VerifierConfig:
    return VerifierConfig(radial_order=cmd.resolution, l_max=cmd.lmax)


def _run_constants(cmd: Command) -> int:
    rec = constant_set(cmd.params.require_valid(), 10, cmd.resolution).record()
    write_records([rec], list(rec), cmd.format, cmd.out)
    return EXIT_OK


def _run_verify(cmd: Command) -> int:
    try:
        rep = run_suite(cmd.params, cmd.suite, _verifier_config(cmd))
    except InvalidParams as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    write_records(rep.records(), VERIFY_COLUMNS, cmd.format, cmd.out)
    for c in rep.checks:
        if not c.passed:
            print(f"FAILED {c.name}: lhs={c.lhs!r} rhs={c.rhs!r} margin={c.margin!r} {c.diagnostic}".rstrip(), file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAILED


def _run_deficit(cmd: Command) -> int:
    prm = cmd.params.require_valid()
    cfg = replace(StabilityConfig.for_dimension(prm.n), radial_order=cmd.resolution)
    rows = optimality_sweep(prm, cmd.family, cmd.eps, cfg)
    write_records([r.record() for r in rows], DEFICIT_COLUMNS, cmd.format, cmd.out)
    bad = [r for r in rows if r.flagged or r.deficit < -1e-8]
    for r in bad:
        print(f"FAILED eps={r.eps!r}: deficit={r.deficit!r} flagged={r.flagged}", file=sys.stderr)
    return EXIT_FAILED if bad else EXIT_OK


def _run_sweep(cmd: Command) -> int:
    grid = read_grid(cmd.grid) if cmd.grid is not None else None
    reports = sweep_grid(grid, cmd.suite, cmd.jobs, _verifier_config(cmd))
    write_records(grid_records(reports), SWEEP_COLUMNS, cmd.format, cmd.out)
    for rep in reports:
        for c in rep.checks:
            if not c.passed:
                print(f"FAILED {rep.params} {c.name}: {c.diagnostic or f'margin={c.margin!r}'}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def _bump(y):
    return np.exp(-np.sum(np.atleast_2d(y) ** 2, axis=1) / (2 * 0.3**2))


def _run_extension(cmd: Command) -> int:
    prm = cmd.params.require_valid()
    res = boundary_limit_check(prm, _bump, np.full(prm.n - 1, 0.05), 3.0)
    recs = [
        {
            "n": prm.n,
            "alpha": prm.alpha,
            "beta": prm.beta,
            "xn": h,
            "scaled": s,
            "extrapolated": res.extrapolated,
            "stated_constant": res.stated_constant,
            "derived_constant": res.derived_constant,
            "ratio_stated": s / res.stated_constant,
            "ratio_derived": s / res.derived_constant,
            "richardson_change": res.richardson_change,
        }
        for h, s in zip(res.xn, res.scaled)
    ]
    write_records(recs, EXTENSION_COLUMNS, cmd.format, cmd.out)
    return EXIT_OK


_DISPATCH = {
    "constants": _run_constants,
    "verify": _run_verify,
    "deficit": _run_deficit,
    "sweep": _run_sweep,
    "extension": _run_extension,
}


def run(cmd: Command) -> int:
    try:
        return _DISPATCH[cmd.verb](cmd)
    except (InvalidParams, UnsupportedCase, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cmd = parse(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cmd)

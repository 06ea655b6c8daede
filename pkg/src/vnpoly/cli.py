"""Command-line front end.

    vnpoly compute --n 1 --pd "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
    vnpoly batch --in knots.tsv --n 2 --out results.tsv --jobs 4
    vnpoly sieve --in results.tsv
    vnpoly check --in results.tsv --table knots.tsv --strict
    vnpoly cable --pd "..." [--whitehead]
    vnpoly recurse --family torus2 --n 2 --range -3..2
    vnpoly plan --pd "..." --explain
    vnpoly verify-bundle --n 2 --mode sampled

Bundles come from --bundle PATH or, with --n, from the directory named by
VNPOLY_BUNDLE_DIR (default: the bundles shipped with the package).
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import analysis
from .diagram import PDCode, PDError, cable_2_1, parse_pd, whitehead_double
from .engine import OpCounter, choose_best_long, evaluate, explain
from .poly import to_text
from .rmatrix import RMatrixBundle, default_bundle, load_bundle, verify_bundle

log = logging.getLogger("vnpoly")

COMMANDS = ("compute", "batch", "sieve", "check", "cable", "recurse", "plan", "verify-bundle")


@dataclass
class JobConfig:
    command: str
    bundle_path: str | None = None
    n: int | None = None
    inputs: list[str] = field(default_factory=list)
    output: str | None = None
    jobs: int = 1
    strict: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


# ---------------------------------------------------------------- inputs


def ingest_table(path: str | Path, strict: bool = False) -> tuple[list[tuple[str, PDCode]], list[str]]:
    """Rows of (name, pd_code) from a TSV or CSV file, in input order.

    Bad rows are reported in the second return value, or raise with strict.
    A header row starting with `name` is skipped.
    """
    path = Path(path)
    delim = "," if path.suffix.lower() == ".csv" else "\t"
    out, errors = [], []
    with path.open(newline="") as f:
        for lineno, row in enumerate(csv.reader(f, delimiter=delim), 1):
            if not row or not "".join(row).strip() or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() == "name":
                continue
            if len(row) < 2:
                msg = f"{path}:{lineno}: expected name and pd_code"
            else:
                name, pd_text = row[0].strip(), delim.join(row[1:]).strip()
                try:
                    out.append((name, parse_pd(pd_text)))
                    continue
                except PDError as e:
                    msg = f"{path}:{lineno}: {name}: {e}"
            if strict:
                raise PDError(msg)
            log.warning("skipping row: %s", msg)
            errors.append(msg)
    return out, errors


def data_path(*parts: str) -> Path:
    """Path inside the package data directory (census tables, shipped results)."""
    return Path(__file__).parent.joinpath("data", *parts)


def resolve_bundle(bundle_path: str | None, n: int | None) -> RMatrixBundle:
    if bundle_path:
        return load_bundle(bundle_path)
    if n is None:
        raise SystemExit("need --bundle PATH or --n N")
    return default_bundle(n)


def parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"range must look like A..B, got {text!r}")
    return int(lo), int(hi)


# ---------------------------------------------------------------- batch workers

_WORKER: dict = {}


def _init_worker(bundle_path, n, method):
    _WORKER["bundle"] = resolve_bundle(bundle_path, n)
    _WORKER["method"] = method


def _compute_row(item):
    name, pd = item
    b = _WORKER["bundle"]
    poly = evaluate(pd, b, method=_WORKER["method"])
    return name, poly, analysis.alexander_oracle(pd)


def build_record(name: str, n: int, poly, alexander, ann: analysis.Annotation | None) -> analysis.InvariantRecord:
    genus, flags = analysis.annotate_flags(poly, ann)
    rec = analysis.InvariantRecord(name, n, poly, genus, flags)
    spec = analysis.SpecializationReport(
        analysis.substitute_monomial(poly, {"t": (1, 0, 1)}).is_one(),
        analysis.substitute_monomial(poly, {"q": (1, 0, 0)}) == alexander * alexander,
    )
    rec.status["sym"] = "ok" if analysis.check_symmetry(poly) else "FAIL"
    rec.status["spec"] = "ok" if spec.ok else "FAIL"
    g = rec.genus_status()
    if g is not None:
        rec.status["genus"] = g
    return rec


def run_batch(rows, bundle_path, n, jobs, method="packed", annotations=None):
    """Evaluate rows in input order; jobs > 1 uses a process pool with an ordered merge."""
    annotations = annotations or {}
    b_n = n if bundle_path is None else load_bundle(bundle_path).n
    if jobs == 1:
        _init_worker(bundle_path, n, method)
        results = map(_compute_row, rows)
        yield from (build_record(nm, b_n, p, a, annotations.get(nm)) for nm, p, a in results)
        return
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(bundle_path, n, method)) as ex:
        for nm, p, a in ex.map(_compute_row, rows, chunksize=4):
            yield build_record(nm, b_n, p, a, annotations.get(nm))


# ---------------------------------------------------------------- commands


def _pd_arg(args) -> PDCode:
    if args.pd is None:
        raise SystemExit("need --pd")
    return parse_pd(args.pd)


def cmd_compute(args, out) -> int:
    b = resolve_bundle(args.bundle, args.n)
    pd = _pd_arg(args)
    counter = OpCounter()
    p = evaluate(pd, b, method=args.method, counter=counter)
    out.write(to_text(p) + "\n")
    log.info("multiplications: %d", counter.mults)
    return 0


def cmd_batch(args, out) -> int:
    rows, errors = ingest_table(args.input, strict=args.strict)
    ann = analysis.read_annotations(args.annotations) if args.annotations else None
    records = run_batch(rows, args.bundle, args.n, args.jobs, args.method, ann)
    failed = 0
    sink = open(args.out, "w") if args.out else out
    try:
        sink.write("\t".join(analysis.TSV_COLUMNS) + "\n")
        for rec in records:
            sink.write(analysis.format_record(rec) + "\n")
            sink.flush()
            failed += any(v in ("FAIL", "violation") for v in rec.status.values())
    finally:
        if args.out:
            sink.close()
    if failed:
        log.warning("%d records failed an audit", failed)
    return 1 if args.strict and (failed or errors) else 0


def cmd_sieve(args, out) -> int:
    records = analysis.read_records(args.input)
    classes = analysis.sieve_classes(records, mirror_fold=args.mirror_fold)
    text = "".join(str(c) + "\n" for c in classes)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return 0


def cmd_check(args, out) -> int:
    records = analysis.read_records(args.input)
    pds = dict(ingest_table(args.table)[0]) if args.table else {}
    ann = analysis.read_annotations(args.annotations) if args.annotations else {}
    bad = 0
    for r in records:
        if r.knot_name in ann and r.genus is None:
            r.genus, r.flags = analysis.annotate_flags(r.poly, ann[r.knot_name])
        checks = {"sym": analysis.check_symmetry(r.poly)}
        if r.knot_name in pds:
            rep = analysis.check_specialization(r.poly, pds[r.knot_name])
            checks["t=q"], checks["q=1"] = rep.at_t_equals_q, rep.at_q_equals_1
        else:
            checks["t=q"] = analysis.substitute_monomial(r.poly, {"t": (1, 0, 1)}).is_one()
        g = r.genus_status()
        if g is not None:
            checks["genus"] = g != "violation" and (r.n != 2 or g == "equality")
        if args.positivity and "alternating" in r.flags:
            checks["positivity"] = analysis.positive_at_minus_q(r.poly)
        ok = all(checks.values())
        bad += not ok
        detail = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items())
        out.write(f"{r.knot_name}\t{'pass' if ok else 'FAIL'}\t{detail}\n")
    out.write(f"# {len(records) - bad}/{len(records)} passed\n")
    return 1 if args.strict and bad else 0


def cmd_cable(args, out) -> int:
    pd = _pd_arg(args)
    res = whitehead_double(pd) if args.whitehead else cable_2_1(pd)
    out.write(res.to_text() + "\n")
    return 0


def cmd_recurse(args, out) -> int:
    if args.family != "torus2":
        raise SystemExit(f"unknown family {args.family!r}")
    lo, hi = args.range
    for b, p in analysis.torus_family_range(args.n, lo, hi).items():
        out.write(f"{b}\t{to_text(p)}\n")
    return 0


def cmd_plan(args, out) -> int:
    pd = _pd_arg(args)
    if args.explain:
        out.write(explain(pd))
    else:
        _ld, plan = choose_best_long(pd)
        out.write(f"max_log_cost: {plan.max_log_cost}\n")
    return 0


def cmd_verify_bundle(args, out) -> int:
    b = resolve_bundle(args.bundle, args.n)
    rep = verify_bundle(b, mode=args.mode, samples=args.samples, seed=args.seed)
    for line in rep.lines():
        out.write(line + "\n")
    out.write("bundle ok\n" if rep.ok else "bundle FAILED\n")
    return 0 if rep.ok or not args.strict else 1


HANDLERS = {
    "compute": cmd_compute,
    "batch": cmd_batch,
    "sieve": cmd_sieve,
    "check": cmd_check,
    "cable": cmd_cable,
    "recurse": cmd_recurse,
    "plan": cmd_plan,
    "verify-bundle": cmd_verify_bundle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bundle", help="bundle file (.rmx)")
    common.add_argument("--n", type=int, help="use the default bundle v<n>.rmx")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--strict", action="store_true", help="nonzero exit on any audit failure")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--method", choices=("packed", "sparse"), default="packed")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="vnpoly", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compute", parents=[common])
    p.add_argument("--pd")
    p = sub.add_parser("batch", parents=[common])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--annotations", help="sidecar CSV name,genus,alternating,thin")
    p = sub.add_parser("sieve", parents=[common])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--mirror-fold", dest="mirror_fold", action=argparse.BooleanOptionalAction, default=True)
    p = sub.add_parser("check", parents=[common])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--table", help="PD table, enables the Alexander comparison")
    p.add_argument("--annotations")
    p.add_argument("--positivity", action="store_true", help="also check V(t,-q) >= 0 on alternating knots")
    p = sub.add_parser("cable", parents=[common])
    p.add_argument("--pd")
    p.add_argument("--whitehead", action="store_true", help="Whitehead double instead of the (2,1)-cable")
    p = sub.add_parser("recurse", parents=[common])
    p.add_argument("--family", default="torus2")
    p.add_argument("--range", type=parse_range, default=(-3, 2))
    p = sub.add_parser("plan", parents=[common])
    p.add_argument("--pd")
    p.add_argument("--explain", action="store_true")
    p = sub.add_parser("verify-bundle", parents=[common])
    p.add_argument("--mode", choices=("full", "sampled"), default="sampled")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    return ap


def config_argv(config: JobConfig) -> list[str]:
    """Argument vector equivalent to a JobConfig; options map flag names to values (True = bare flag)."""
    argv = [config.command]
    if config.bundle_path:
        argv += ["--bundle", config.bundle_path]
    if config.n is not None:
        argv += ["--n", str(config.n)]
    for path in config.inputs:
        argv += ["--in", path]
    if config.output:
        argv += ["--out", config.output]
    argv += ["--jobs", str(config.jobs)]
    if config.strict:
        argv.append("--strict")
    for k, v in config.options.items():
        flag = "--" + k.replace("_", "-")
        if v is True:
            argv.append(flag)
        elif v is not False and v is not None:
            argv += [flag, str(v)]
    return argv


def run(config: JobConfig, out=None) -> int:
    """Dispatch a JobConfig; returns the exit status."""
    args = build_parser().parse_args(_glue_range(config_argv(config)))
    return HANDLERS[args.command](args, out or sys.stdout)


def _glue_range(argv: Sequence[str]) -> list[str]:
    """Let `--range -3..2` through argparse, which would read -3..2 as an option."""
    out = list(argv)
    for i in range(len(out) - 1):
        if out[i] == "--range":
            out[i:i + 2] = [f"--range={out[i + 1]}", ""]
    return [a for a in out if a != ""]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(_glue_range(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        raise SystemExit("--jobs must be >= 1")
    try:
        return HANDLERS[args.command](args, sys.stdout)
    except (PDError, ValueError, ArithmeticError, FileNotFoundError) as e:
        log.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())

import argparse
import csv
import io
import logging
import os
import shlex
import sys

import numpy as np

import config
import formulas
import geometry
import verify
from exact import DomainError
from grassmann import DegenerateFrameError, frame_for, frame_stream
from helpers import atomic_write_text, canonical_json, format_float, generate_progress_bar
from report_store import ReportStore
from symbolic import AtomKind, SymbolicError, poly_eval

logger = logging.getLogger("CLI")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

INDEX_FLAGS = ("n", "r", "l", "i", "q", "s", "t", "j")

# Errors caused by what the user asked for, not by the workbench.
USAGE_ERRORS = (
    DomainError, SymbolicError, geometry.GeometryError, geometry.BodySpecError, geometry.FrameError,
    DegenerateFrameError, verify.UnknownCheckError, verify.IncompleteConfigError,
)


class UsageError(ValueError):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ==========================================
# OUTPUT
# ==========================================

def _emit(records, fmt, text_lines):
    """Prints records as JSON lines, CSV, or the given text rendering."""
    if fmt == "json":
        for record in records:
            print(canonical_json(record))
    elif fmt == "csv":
        if not records:
            return
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        keys = list(records[0].keys())
        writer.writerow(keys)
        for record in records:
            writer.writerow([_csv_cell(record.get(k)) for k in keys])
        sys.stdout.write(buffer.getvalue())
    else:
        for line in text_lines:
            print(line)


def _csv_cell(value):
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (dict, list)):
        return canonical_json(value)
    return value


def _echo(argv):
    """The effective invocation, so any run can be repeated exactly."""
    line = " ".join(shlex.quote(a) for a in argv)
    print(f"# workbench {config.TOOL_VERSION}: {line} "
          f"[seed={config.DEFAULT_SEED} threads={config.DEFAULT_THREADS}]", file=sys.stderr)


# ==========================================
# BODIES & BINDINGS
# ==========================================

def _load_body_arg(path, dim=None):
    spec = geometry.read_body_spec(path)
    if spec.get("family") == "ball" and "dim" not in spec and dim is None:
        dim = 3
    return spec, geometry.load_body(spec, dim)


def _resolution_used(dim, resolution):
    if resolution:
        return int(resolution)
    return {2: config.QUAD_2D_NODES, 3: config.QUAD_3D_ORDER}.get(dim, 2)


def numeric_bindings(poly, body, args):
    """Binds every atom of `poly` from the body (and its projection) plus --rho/--sigma/--h."""
    bindings = {}
    projections = {}

    def projection(r):
        if r not in projections:
            projections[r] = geometry.project(body, frame_for(body.dim, r, args.frame_seed))
        return projections[r]

    for atom in poly.atoms():
        kind, idx = atom.kind, atom.indices
        if kind is AtomKind.RHO:
            if args.rho is None:
                raise UsageError("formula needs --rho")
            bindings[atom] = args.rho
        elif kind is AtomKind.SIGMA:
            if args.sigma is None:
                raise UsageError("formula needs --sigma")
            bindings[atom] = args.sigma
        elif kind is AtomKind.WIDTH:
            bindings[atom] = args.h if args.h is not None else geometry.width(body, geometry.first_axis(body.dim))
        elif kind is AtomKind.VOL_PROJ:
            bindings[atom] = geometry.volume(projection(idx[0]))
        elif kind is AtomKind.MCI_PROJ:
            bindings[atom] = geometry.mean_curvature_integral(projection(idx[0]), idx[1])
        elif kind is AtomKind.QUERMASS_PROJ:
            bindings[atom] = geometry.quermassintegrals(projection(idx[0]))[idx[1]]
        elif kind is AtomKind.MCI_BODY:
            bindings[atom] = geometry.mean_curvature_integral(body, idx[1])
        elif kind is AtomKind.QUERMASS:
            bindings[atom] = geometry.quermassintegrals(body)[idx[1]]
        elif kind is AtomKind.MCI_FLAT:
            if args.r is None:
                raise UsageError("flattened-body atoms need --r")
            bindings[atom] = geometry.flattened_mci(idx[0], projection(args.r), idx[1])
    return bindings


# ==========================================
# SUBCOMMANDS
# ==========================================

def cmd_eval(args):
    if args.formula_id not in formulas.FORMULA_REGISTRY:
        raise UsageError(f"unknown formula id {args.formula_id!r}; known: {', '.join(formulas.FORMULA_REGISTRY)}")
    spec = formulas.FORMULA_REGISTRY[args.formula_id]
    poly = spec.build(**{k: getattr(args, k) for k in INDEX_FLAGS})
    record = {"formula_id": spec.formula_id, "params": {p: getattr(args, p) for p in spec.params},
              "canonical": str(poly)}
    if args.body:
        body_spec, body = _load_body_arg(args.body, args.n)
        value = poly_eval(poly, numeric_bindings(poly, body, args))
        record.update({"body": body_spec, "value": value})
        _emit([record], args.format, [format_float(value)])
    else:
        _emit([record], args.format, [str(poly)])
    return EXIT_OK


def cmd_body(args):
    spec, body = _load_body_arg(args.spec, args.dim)
    resolution = _resolution_used(body.dim, args.resolution)
    quantity = args.quantity

    if quantity in ("project", "parallel"):
        if quantity == "project":
            if args.r is None:
                raise UsageError("body project needs --r")
            derived = geometry.project(body, frame_for(body.dim, args.r, args.frame_seed))
        else:
            if args.rho is None:
                raise UsageError("body parallel needs --rho")
            derived = geometry.parallel(body, args.rho)
        text = canonical_json(derived.to_spec())
        if args.out:
            atomic_write_text(args.out, text + "\n")
            logger.info(f"Wrote {quantity} body spec to {args.out}")
        print(text)
        return EXIT_OK

    if quantity == "mci":
        if args.i is None:
            raise UsageError("body mci needs --i")
        value = geometry.mean_curvature_integral(body, args.i, resolution=resolution)
        record = {"quantity": "mci", "i": args.i, "value": value, "resolution": resolution}
        lines = [f"{format_float(value)}  # M_{args.i}, resolution {resolution}"]
    elif quantity == "volume":
        value = geometry.volume(body, resolution=resolution)
        record = {"quantity": "volume", "value": value, "resolution": resolution}
        lines = [f"{format_float(value)}  # volume, resolution {resolution}"]
    elif args.all:
        low, high = geometry.width_extremes(body)
        record = {"quantity": "width", "min": low, "max": high}
        lines = [f"max {format_float(high)}", f"min {format_float(low)}"]
    else:
        u = np.array(args.u, dtype=float) if args.u else geometry.first_axis(body.dim)
        u = u / np.linalg.norm(u)
        value = geometry.width(body, u)
        record = {"quantity": "width", "direction": u.tolist(), "value": value}
        lines = [format_float(value)]
    record["body"] = spec
    _emit([record], args.format, lines)
    return EXIT_OK


def _check_configuration(args):
    configuration = {k: getattr(args, k) for k in INDEX_FLAGS if getattr(args, k) is not None}
    for key in ("rho", "radius", "samples", "seed", "frame_seed"):
        if getattr(args, key) is not None:
            configuration[key] = getattr(args, key)
    if args.body:
        spec, body = _load_body_arg(args.body, args.n)
        if spec.get("family") == "ball" and "n" not in configuration:
            configuration["n"] = body.dim
        configuration["body"] = spec
    return configuration


def _select_tasks(args):
    if args.target in verify.SUITES:
        overrides = {"samples": args.samples, "seed": args.seed}
        return args.target, verify.suite_tasks(args.target, args.n_max, overrides)

    check = verify.get_check(args.target)
    configuration = _check_configuration(args)
    if all(key in configuration or key in check.defaults for key in check.required):
        return args.target, [(args.target, configuration)]

    # Partial configuration narrows the declared sweep.
    fixed = {k: v for k, v in configuration.items() if k in INDEX_FLAGS or k == "body"}
    extra = {k: v for k, v in configuration.items() if k not in fixed}
    tasks = [(args.target, {**c, **extra})
             for c in verify.sweep_configs(args.target, args.n_max)
             if all(c.get(k) == v for k, v in fixed.items())]
    if not tasks:
        missing = [key for key in check.required if key not in configuration]
        raise verify.IncompleteConfigError(args.target, missing)
    return args.target, tasks


def cmd_verify(args):
    label, tasks = _select_tasks(args)
    workers = args.threads or config.DEFAULT_THREADS
    logger.info(f"verify {label}: {len(tasks)} check(s) on {workers} worker(s)")
    reports = verify.run_tasks(tasks, workers)
    status = verify.exit_status(reports)

    if args.out:
        out = args.out if os.path.dirname(args.out) else os.path.join(config.REPORTS_DIR, args.out)
        jsonl_path, csv_path = verify.write_reports(reports, out)
        logger.info(f"Reports written to {jsonl_path} and {csv_path}")
    if args.archive:
        store = ReportStore(config.DATABASE_FILE)
        store.record_run(" ".join(args.argv), label, reports, status, workers)

    counts = verify.verdict_counts(reports)
    if args.format == "json":
        sys.stdout.write(verify.reports_to_jsonl(reports))
    elif args.format == "csv":
        sys.stdout.write(verify.reports_to_csv(reports))
    else:
        for report in reports:
            print(f"{report.verdict:<24} {report.check_id:<18} {report.config_hash}  "
                  f"rel_error={format_float(report.rel_error)}")
        settled = counts[verify.PASS] + counts[verify.DOCUMENTED]
        bar = generate_progress_bar(100 * settled // max(1, len(reports)))
        print(f"# {bar} {counts[verify.PASS]} pass, {counts[verify.FAIL]} fail, "
              f"{counts[verify.DOCUMENTED]} discrepancy-documented")
    return EXIT_FAILURE if status else EXIT_OK


def cmd_sample(args):
    seed = config.DEFAULT_SEED if args.seed is None else args.seed
    records = [{"index": k, "vectors": frame.to_list()}
               for k, frame in enumerate(frame_stream(args.n, args.r, args.count, seed))]
    text = [f"{rec['index']}: " + "; ".join(" ".join(format_float(x) for x in row) for row in rec["vectors"])
            for rec in records]
    if args.out:
        atomic_write_text(args.out, "".join(canonical_json(r) + "\n" for r in records))
        logger.info(f"Wrote {len(records)} frames to {args.out}")
    _emit(records, args.format, text)
    return EXIT_OK


def cmd_history(args):
    store = ReportStore(config.DATABASE_FILE)
    if args.nuke:
        return EXIT_OK if store.nuke() else EXIT_FAILURE
    if args.run is not None:
        records = store.get_reports(args.run, args.verdict)
        text = [f"{r['verdict']:<24} {r['check_id']:<18} rel_error={format_float(r['rel_error'])}" for r in records]
        counts = store.verdict_counts(args.run)
        text.append(f"# run {args.run}: " + ", ".join(f"{v} {k}" for k, v in sorted(counts.items())))
        _emit(records, args.format, text)
        return EXIT_OK
    runs = store.get_runs(args.limit)
    text = [f"{run['id']:>5}  {run['created']}  exit={run['exit_status']}  {run['suite']}  ({run['invocation']})"
            for run in runs]
    _emit(runs, args.format, text or ["# no archived runs"])
    return EXIT_OK


# ==========================================
# PARSER
# ==========================================

def _index_flags(parser):
    for key in INDEX_FLAGS:
        parser.add_argument(f"--{key}", type=int)


def build_parser():
    common = _ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="debug logging")
    common.add_argument("--threads", type=int, help="worker threads (default: WORKBENCH_THREADS or CPU count)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")

    parser = _ArgumentParser(prog="workbench", description="Mean curvature integral workbench")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser("eval", parents=[common], help="build (and optionally evaluate) a formula by id")
    p.add_argument("formula_id")
    _index_flags(p)
    p.add_argument("--body", help="body spec file; binds the formula's measures numerically")
    p.add_argument("--rho", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--h", type=float, help="width (default: width of the body along e1)")
    p.add_argument("--frame-seed", type=int, help="random projection frame instead of the first r axes")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("body", parents=[common], help="geometric quantities of a body spec")
    p.add_argument("quantity", choices=("mci", "volume", "width", "project", "parallel"))
    p.add_argument("spec")
    p.add_argument("--dim", type=int, help="dimension for specs that do not carry one (default 3)")
    p.add_argument("--i", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--all", action="store_true", help="width extremes over the validation grid")
    p.add_argument("--u", type=float, nargs="+", help="width direction")
    p.add_argument("--frame-seed", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_body)

    p = sub.add_parser("verify", parents=[common], help="run a check or a suite")
    p.add_argument("target", help=f"check id or suite ({', '.join(verify.SUITES)})")
    _index_flags(p)
    p.add_argument("--body")
    p.add_argument("--rho", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--frame-seed", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--out", help="JSONL report path (bare names go to Reports/); a CSV summary is written next to it")
    p.add_argument("--archive", action="store_true", help="record the run in the report store")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sample", parents=[common], help="dump uniform Grassmann frames")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("history", parents=[common], help="archived verification runs")
    p.add_argument("--limit", type=int, default=20)
    p.add_argument("--run", type=int)
    p.add_argument("--verdict", choices=(verify.PASS, verify.FAIL, verify.DOCUMENTED))
    p.add_argument("--nuke", action="store_true", help="wipe the archive")
    p.set_defaults(handler=cmd_history)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    args.argv = argv

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    if args.threads is not None and args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    _echo(argv)

    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(f"{e}")
        return EXIT_USAGE
    except USAGE_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        return EXIT_FAILURE

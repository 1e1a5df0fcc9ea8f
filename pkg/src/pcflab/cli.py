"""Command-line frontend.

Machine-readable output (JSON, or CSV for delta maps) goes to stdout;
diagnostics to stderr.  Exit codes: 0 success, 1 no result, 2 usage error,
3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import mpmath as mp

EXIT_OK = 0
EXIT_NO_RESULT = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _emit(payload) -> None:
    json.dump(payload, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def _parse_fraction(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    return Fraction(text)


def _load_field(spec: str):
    from pcflab.cmf import MatrixField, catalog_field

    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return MatrixField.from_json(fh.read())
    if spec.startswith("zeta2_4d"):
        c = 1
        if "(" in spec:
            c = int(spec[spec.index("(") + 1 : spec.rindex(")")].split("=")[-1])
        return catalog_field("zeta2_4d", C=c)
    return catalog_field(spec)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def _fraction_list(text: str) -> list[Fraction]:
    return [_parse_fraction(x) for x in text.split(",") if x != ""]


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def cmd_pcf_eval(args) -> int:
    from pcflab.pcf import Pcf, pcf_limit, pcf_limit_richardson

    pcf = Pcf.from_text(args.a, args.b)
    if args.richardson:
        report = pcf_limit_richardson(pcf, target_digits=args.digits)
    else:
        report = pcf_limit(pcf, args.depth, args.digits)
    _emit(
        {
            "a": str(pcf.a),
            "b": str(pcf.b),
            "depth": report.depth,
            "certified_digits": report.certified_digits,
            "value": report.value_str()[: args.digits + 10],
            "exact": str(report.exact) if report.exact is not None else None,
        }
    )
    return EXIT_OK


def cmd_pcf_fr(args) -> int:
    from pcflab.fr import classify_fr
    from pcflab.pcf import Pcf

    estimate = classify_fr(Pcf.from_text(args.a, args.b), args.max_depth)
    _emit({"a": args.a, "b": args.b, **estimate.to_json()})
    return EXIT_OK


def cmd_match(args) -> int:
    from pcflab.pcf import Pcf, pcf_limit
    from pcflab.relations import LowConfidence, NoMatch, extended_match, mobius_match

    constants = [c.strip() for c in args.constants.split(",") if c.strip()]
    if not constants:
        return _fail("--constants must name at least one constant", EXIT_USAGE)
    if args.value is not None:
        digits = min(len(args.value.replace(".", "").lstrip("-0")), args.digits)
        with mp.workdps(digits + 20):
            value = mp.mpf(args.value)
        validated = False
    elif args.from_pcf is not None:
        a_text, b_text = args.from_pcf.split(";")
        report = pcf_limit(Pcf.from_text(a_text, b_text), args.depth, args.digits)
        value = report.value
        digits = min(report.certified_digits, args.digits)
    else:
        return _fail("need --value or --from-pcf", EXIT_USAGE)
    try:
        if len(constants) == 1:
            relation = mobius_match(value, digits, constants[0], margin=args.margin)
        else:
            relation = extended_match(value, digits, constants, margin=args.margin)
    except (NoMatch, LowConfidence) as exc:
        print(f"no relation: {exc}", file=sys.stderr)
        return EXIT_NO_RESULT
    _emit({**relation.to_json(), "validated_at_2x": False})
    return EXIT_OK


def cmd_family(args) -> int:
    from pcflab.families import make_family_pcf

    params = json.loads(args.params)
    pcf = make_family_pcf(args.kind, params)
    _emit(pcf.to_json())
    return EXIT_OK


def cmd_cmf_verify(args) -> int:
    from pcflab.cmf import cocycle_check

    field = _load_field(args.field)
    report = cocycle_check(field, args.grid)
    _emit(
        {
            "field": args.field,
            "grid": args.grid,
            "passed": report.passed,
            "violations": [
                {"axes": [i, j], "point": list(pt)} for i, j, pt, *_ in report.violations[:10]
            ],
        }
    )
    return EXIT_OK if report.passed else EXIT_NO_RESULT


def cmd_cmf_limit(args) -> int:
    from pcflab.cmf import Trajectory, traj_limit

    field = _load_field(args.field)
    start = _fraction_list(args.start) if args.start else [Fraction(1)] * field.dimension
    traj = Trajectory(tuple(start), tuple(_int_list(args.dir)))
    report = traj_limit(field, traj, args.steps, args.digits)
    _emit(
        {
            "field": args.field,
            "start": [str(s) for s in start],
            "direction": list(traj.direction),
            "depth": report.depth,
            "certified_digits": report.certified_digits,
            "value": report.value_str()[: args.digits + 10],
        }
    )
    return EXIT_OK


def cmd_cmf_topcf(args) -> int:
    from pcflab.cmf import Trajectory, cmf_to_pcf

    field = _load_field(args.field)
    start = _fraction_list(args.start) if args.start else [Fraction(1)] * field.dimension
    conversion = cmf_to_pcf(field, Trajectory(tuple(start), tuple(_int_list(args.dir))))
    out = {"a": str(conversion.a_sym), "b": str(conversion.b_sym)}
    if conversion.prefix is not None:
        out["moebius_prefix"] = [
            [conversion.prefix.a, conversion.prefix.b],
            [conversion.prefix.c, conversion.prefix.d],
        ]
        out["index_offset"] = conversion.index_offset
    _emit(out)
    return EXIT_OK


def cmd_cmf_construct(args) -> int:
    from pcflab.cmf import ConstructionParams, construct

    c = tuple(_int_list(args.c))
    field = construct(ConstructionParams(args.degree, c, args.family), strict=not args.lenient)
    payload = field.to_json()
    payload["conditions"] = getattr(field, "condition_report", {})
    _emit(payload)
    return EXIT_OK


def cmd_cmf_coboundary(args) -> int:
    from pcflab.cmf import coboundary
    from pcflab.exactmath import Mat2, parse_poly

    field = _load_field(args.field)
    entries = json.loads(args.u)
    if len(entries) != 4:
        return _fail("--u must be a JSON list of four polynomial texts", EXIT_USAGE)
    U = Mat2(*(parse_poly(t, field.vars) for t in entries))
    out = coboundary(field, U)
    _emit(out.to_json())
    return EXIT_OK


def cmd_delta_map(args) -> int:
    from pcflab.cmf import Trajectory, traj_limit
    from pcflab.delta import delta_map

    field = _load_field(args.field)
    origin = _fraction_list(args.origin) if args.origin else [Fraction(1), Fraction(1)]
    digits = args.digits
    if args.constant:
        from pcflab.constants import get_constant

        L = get_constant(args.constant, digits)
    else:
        rep = traj_limit(field, Trajectory(tuple(origin), (1, 1)), args.steps, digits)
        L = rep.value
        digits = min(digits, rep.certified_digits)
    dmap = delta_map(field, args.xmax, args.ymax, L, digits, origin=tuple(origin))
    if args.out == "-":
        dmap.to_csv(sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            dmap.to_csv(fh)
        print(f"wrote {len(dmap.values)} cells to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_delta_closed(args) -> int:
    from pcflab.delta import delta_closed_form

    field = _load_field(args.field)
    report = delta_closed_form(field, tuple(_int_list(args.dir)), steps=args.steps)
    _emit({"field": args.field, "direction": _int_list(args.dir), **report.to_json()})
    return EXIT_OK


def cmd_delta_optimize(args) -> int:
    from pcflab.cmf import Trajectory, traj_limit
    from pcflab.delta import optimize_greedy, optimize_lls

    field = _load_field(args.field)
    origin = _fraction_list(args.origin) if args.origin else [Fraction(1), Fraction(1)]
    digits = args.digits
    if args.constant:
        from pcflab.constants import get_constant

        L = get_constant(args.constant, digits)
    else:
        rep = traj_limit(field, Trajectory(tuple(origin), (1, 1)), args.steps, digits)
        L = rep.value
        digits = min(digits, rep.certified_digits)
    if args.method == "greedy":
        path, report = optimize_greedy(field, L, args.horizon, digits, origin=tuple(origin))
        _emit({"method": "greedy", "path_end": list(path[-1]), **report.to_json()})
    else:
        direction, report = optimize_lls(field, L, args.horizon, digits, origin=tuple(origin))
        _emit({"method": "lls", "direction": list(direction), **report.to_json()})
    return EXIT_OK


def cmd_zeta5_combine(args) -> int:
    from pcflab.delta import zeta5_combination

    rs = _int_list(args.r)
    if len(rs) != 4:
        return _fail("--r takes four R values, for s = 2,3,4,5", EXIT_USAGE)
    r_values = {s: r for s, r in zip((2, 3, 4, 5), rs)}
    plan, report = zeta5_combination(r_values, args.depth)
    _emit({"plan": plan.to_json(), **report.to_json()})
    return EXIT_OK


def cmd_serve(args) -> int:
    from pcflab.grid import ResultStore, serve_coordinator
    from pcflab.grid.schemes import SearchScheme

    with open(args.scheme, encoding="utf-8") as fh:
        schemes = [SearchScheme.from_json(record) for record in json.load(fh)]
    store = ResultStore(args.store)
    lease = int(os.environ.get("RM_LEASE_SECONDS", args.lease_seconds))
    coordinator, httpd, thread = serve_coordinator(
        schemes, store, port=args.port, chunk_size=args.chunk_size, lease_seconds=lease
    )
    print(f"coordinator on port {httpd.server_address[1]}", file=sys.stderr)
    try:
        while not coordinator.drained():
            thread.join(timeout=1.0)
        print("all chunks complete", file=sys.stderr)
    except KeyboardInterrupt:
        pass
    finally:
        httpd.shutdown()
    return EXIT_OK


def cmd_work(args) -> int:
    from pcflab.grid import WorkerError, worker_run

    server = args.server or os.environ.get("RM_SERVER_ADDR")
    if not server:
        return _fail("need --server or RM_SERVER_ADDR", EXIT_USAGE)
    parallelism = args.parallelism or int(os.environ.get("RM_WORKER_PARALLELISM", "1"))
    try:
        completed = worker_run(server, args.worker_id, parallelism=parallelism)
    except WorkerError as exc:
        return _fail(str(exc), EXIT_RUNTIME)
    _emit({"completed_chunks": completed})
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcflab")
    sub = parser.add_subparsers(dest="command", required=True)

    pcf = sub.add_parser("pcf").add_subparsers(dest="pcf_command", required=True)
    p = pcf.add_parser("eval", help="evaluate a continued fraction limit")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--depth", type=int, default=10_000)
    p.add_argument("--digits", type=int, default=100)
    p.add_argument("--richardson", action="store_true")
    p.set_defaults(fn=cmd_pcf_eval)
    p = pcf.add_parser("fr", help="factorial-reduction classification")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--max-depth", dest="max_depth", type=int, default=4096)
    p.set_defaults(fn=cmd_pcf_fr)

    p = sub.add_parser("match", help="integer-relation match against constants")
    p.add_argument("--value")
    p.add_argument("--from-pcf", dest="from_pcf", help='"a-text;b-text"')
    p.add_argument("--constants", required=True)
    p.add_argument("--margin", type=int, default=10)
    p.add_argument("--depth", type=int, default=10_000)
    p.add_argument("--digits", type=int, default=100)
    p.set_defaults(fn=cmd_match)

    p = sub.add_parser("family", help="generate a parametric family member")
    p.add_argument("--kind", required=True)
    p.add_argument("--params", required=True, help="JSON parameters")
    p.set_defaults(fn=cmd_family)

    cmf = sub.add_parser("cmf").add_subparsers(dest="cmf_command", required=True)
    p = cmf.add_parser("verify")
    p.add_argument("--field", required=True)
    p.add_argument("--grid", type=int, default=50)
    p.set_defaults(fn=cmd_cmf_verify)
    p = cmf.add_parser("limit")
    p.add_argument("--field", required=True)
    p.add_argument("--start", default=None)
    p.add_argument("--dir", required=True)
    p.add_argument("--steps", type=int, default=1500)
    p.add_argument("--digits", type=int, default=60)
    p.set_defaults(fn=cmd_cmf_limit)
    p = cmf.add_parser("topcf")
    p.add_argument("--field", required=True)
    p.add_argument("--start", default=None)
    p.add_argument("--dir", required=True)
    p.set_defaults(fn=cmd_cmf_topcf)
    p = cmf.add_parser("construct")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--family", default="f1")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(fn=cmd_cmf_construct)
    p = cmf.add_parser("coboundary")
    p.add_argument("--field", required=True)
    p.add_argument("--u", required=True, help="JSON list of four polynomial texts")
    p.set_defaults(fn=cmd_cmf_coboundary)

    delta = sub.add_parser("delta").add_subparsers(dest="delta_command", required=True)
    p = delta.add_parser("map")
    p.add_argument("--field", required=True)
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--ymax", type=int, required=True)
    p.add_argument("--constant", default=None)
    p.add_argument("--origin", default=None)
    p.add_argument("--digits", type=int, default=600)
    p.add_argument("--steps", type=int, default=600)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=cmd_delta_map)
    p = delta.add_parser("closed")
    p.add_argument("--field", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--steps", type=int, default=1500)
    p.set_defaults(fn=cmd_delta_closed)
    p = delta.add_parser("optimize")
    p.add_argument("--method", choices=("greedy", "lls"), required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--constant", default=None)
    p.add_argument("--origin", default=None)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--digits", type=int, default=900)
    p.add_argument("--steps", type=int, default=600)
    p.set_defaults(fn=cmd_delta_optimize)

    zeta5 = sub.add_parser("zeta5").add_subparsers(dest="zeta5_command", required=True)
    p = zeta5.add_parser("combine")
    p.add_argument("--r", required=True, help="four R values: 1,1,1,1")
    p.add_argument("--depth", type=int, default=9)
    p.set_defaults(fn=cmd_zeta5_combine)

    p = sub.add_parser("serve", help="run the chunk coordinator")
    p.add_argument("--port", type=int, default=8177)
    p.add_argument("--scheme", required=True, help="JSON file with a list of schemes")
    p.add_argument("--store", default="results.jsonl")
    p.add_argument("--chunk-size", dest="chunk_size", type=int, default=10_000)
    p.add_argument("--lease-seconds", dest="lease_seconds", type=int, default=1800)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("work", help="run a worker loop")
    p.add_argument("--server", default=None)
    p.add_argument("--parallelism", type=int, default=None)
    p.add_argument("--worker-id", dest="worker_id", default=f"worker-{os.getpid()}")
    p.set_defaults(fn=cmd_work)

    return parser


# flags whose values are free text that may begin with '-' (e.g. --b "-n^6");
# argparse would read those as options, so they get joined with '='
_TEXT_FLAGS = {
    "--a",
    "--b",
    "--value",
    "--from-pcf",
    "--params",
    "--c",
    "--u",
    "--r",
    "--dir",
    "--start",
    "--origin",
    "--constants",
}


def _join_text_flags(argv: list[str]) -> list[str]:
    out = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in _TEXT_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
        else:
            out.append(token)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_text_flags(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ValueError, KeyError) as exc:
        return _fail(f"error: {exc}", EXIT_USAGE)
    except ArithmeticError as exc:
        return _fail(f"computation failed: {exc}", EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())

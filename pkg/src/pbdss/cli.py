"""Command-line front end: construct codes, encode arrays, simulate repairs,
reproduce the benchmark tables, and run verification sweeps.

Exit codes: 0 success, 2 parameter validation, 3 unrecoverable erasure
pattern, 4 verification failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import sys

from . import metrics, oracle
from .class_a import UnrecoverableErasureError
from .class_b import construct1_parities
from .gf import FieldSpec
from .layout import DataArray, read_code_array, write_code_array
from .repair import CodeSpec, encode, puncture, repair_data_node, repair_multi, repair_parity_node

EXIT_VALIDATION = 2
EXIT_UNRECOVERABLE = 3
EXIT_VERIFY_FAILED = 4


def _default_seed() -> int:
    return int(os.environ.get("PBDSS_SEED", "0"))


def _write_out(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _build_spec(args) -> CodeSpec:
    field = None
    if args.field_p:
        field = FieldSpec(args.field_p, args.field_m)
    return CodeSpec.build(
        args.k,
        args.n_a,
        args.n_b,
        args.tau,
        construction=args.construction,
        field=field,
        remark1=getattr(args, "remark1", False),
    )


def _load_spec(path: str) -> CodeSpec:
    with open(path) as fh:
        return CodeSpec.from_json(fh.read())


def cmd_construct(args) -> int:
    spec = _build_spec(args)
    report = metrics.formula_bundle(spec.n, spec.k, spec.n_a, spec.tau, spec.field)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(spec.to_json())
    print(f"({spec.n},{spec.k}) code, n_a={spec.n_a} n_b={spec.n_b} tau={spec.tau} "
          f"construction={spec.class_b.construction} field={spec.field!r}")
    print(f"fault tolerance f = {report.fault_tolerance} (xi = {report.xi:.4f})")
    print(f"rate R = {report.rate:.4f} in [{report.rate_lower:.4f}, {report.rate_upper:.4f}]")
    if report.lambda_bound is not None:
        print(f"repair bandwidth bound = {report.lambda_bound:.4f}")
    if args.out:
        print(f"spec written to {args.out}")
    return 0


def cmd_encode(args) -> int:
    spec = _load_spec(args.spec)
    if args.data:
        with open(args.data) as fh:
            rows = json.load(fh)["symbols"]
        data = DataArray(spec.field, rows)
    else:
        data = DataArray.random(spec.field, spec.k, random.Random(args.seed))
    array = encode(spec, data)
    with open(args.out, "wb") as fh:
        fh.write(write_code_array(array))
    print(f"encoded {spec.k}x{spec.n} array written to {args.out}")
    return 0


def cmd_repair_sim(args) -> int:
    spec = _load_spec(args.spec)
    if args.punctured:
        spec = puncture(spec, args.punctured)
    if args.array:
        with open(args.array, "rb") as fh:
            array = read_code_array(fh.read())
        data = DataArray(spec.field, [row[: spec.k] for row in array.rows])
    else:
        data = DataArray.random(spec.field, spec.k, random.Random(args.seed))
        array = encode(spec, data)

    if args.nodes:
        failed = sorted(int(x) for x in args.nodes.split(","))
        array.erase_nodes(failed)
        columns = repair_multi(array, failed, spec)
        print(f"repaired nodes {failed}")
        for node in failed:
            print(f"  node {node}: {columns[node]}")
        return 0

    nodes = [args.node] if args.node is not None else list(range(spec.k))
    traces = []
    for j in nodes:
        column, trace = repair_data_node(array, j, spec)
        expect = [data.rows[i][j] for i in range(spec.k)]
        status = "ok" if column == expect else "MISMATCH"
        print(f"node {j}: {trace.total} reads ({status})")
        traces.append(trace)
    lam = sum(t.total for t in traces) / len(traces) / spec.k
    print(f"average lambda = {lam:.4f}")
    if args.trace_out:
        payload = [t.to_json_dict() for t in traces]
        with open(args.trace_out, "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"traces written to {args.trace_out}")
    return 0


def cmd_parity_sim(args) -> int:
    spec = _load_spec(args.spec)
    data = DataArray.random(spec.field, spec.k, random.Random(args.seed))
    array = encode(spec, data)
    for node in range(spec.k, spec.n):
        column, trace = repair_parity_node(array, node, spec)
        expect = [array.rows[i][node] for i in range(spec.k)]
        status = "ok" if column == expect else "MISMATCH"
        per = [trace.per_symbol[(node, i)] for i in range(spec.k)]
        print(f"parity node {node}: per-symbol reads {per} ({status})")
    return 0


def cmd_tables(args) -> int:
    rows = metrics.table2_rows(args.seed) if args.table == 2 else metrics.table3_rows(args.seed)
    if args.format == "json":
        _write_out(json.dumps(rows, indent=2), args.out)
    else:
        _write_out(metrics.rows_to_csv(rows), args.out)
    return 0


def cmd_verify(args) -> int:
    from .class_a import ClassASpec, fault_tolerance

    failures = []
    checked_patterns = 0
    max_k = 5 if args.quick else args.max_k
    rng = random.Random(args.seed)

    for k in range(4, max_k + 1):
        for n_a in range(k + 2, min(k + 4, 2 * k - 1) + 1):
            for tau in range(1, n_a - k):
                spec_a = ClassASpec.build(n_a, k, tau)
                want = fault_tolerance(n_a, k, tau).f
                got = oracle.brute_force_fault_tolerance(spec_a, processes=args.jobs)
                checked_patterns += sum(
                    len(list(itertools.combinations(range(n_a), t))) for t in range(1, got + 2)
                )
                if got != want:
                    failures.append(
                        f"fault tolerance mismatch at (n_a={n_a}, k={k}, tau={tau}): "
                        f"formula {want}, exhaustive {got}"
                    )
                n_b = 2 * k - tau - 1
                spec = CodeSpec(spec_a.field, spec_a, construct1_parities(k, n_a, n_b, tau))
                data = DataArray.random(spec.field, k, rng)
                array = encode(spec, data)
                for j in range(k):
                    col, trace = repair_data_node(array, j, spec)
                    if col != [data.rows[i][j] for i in range(k)]:
                        failures.append(f"repair mismatch at (n_a={n_a}, k={k}, tau={tau}) node {j}")
                    report = metrics.formula_bundle(spec.n, k, n_a, tau, spec.field)
                    if report.lambda_bound is not None and trace.total / k > report.lambda_bound + 1e-9:
                        failures.append(
                            f"bandwidth bound violated at (n_a={n_a}, k={k}, tau={tau}) node {j}"
                        )

    print(f"checked {checked_patterns} erasure patterns")
    if failures:
        for f in failures:
            print("FAIL:", f)
        return EXIT_VERIFY_FAILED
    print("PASS")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbdss",
        description="Two-class erasure codes: construction, repair simulation, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shape(p):
        p.add_argument("--k", type=int, required=True, help="number of data nodes")
        p.add_argument("--n-a", type=int, required=True, help="length of the MDS/piggyback part")
        p.add_argument("--n-b", type=int, required=True, help="length of the sum-parity part")
        p.add_argument("--tau", type=int, required=True, help="piggybacks per row")
        p.add_argument("--construction", type=int, choices=(1, 2), default=1)
        p.add_argument("--field-p", type=int, default=0, help="field characteristic override")
        p.add_argument("--field-m", type=int, default=1, help="field extension degree override")

    p = sub.add_parser("construct", help="build a code spec and print its figures")
    add_shape(p)
    p.add_argument("--remark1", action="store_true",
                   help="drop row sums from the sum parities (full complement only)")
    p.add_argument("--out", help="write the spec JSON here")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("encode", help="encode a data array with a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--data", help="JSON file with {'symbols': [[...]]}")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out", required=True, help="output array (binary)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("repair-sim", help="simulate node repairs and report reads")
    p.add_argument("--spec", required=True)
    p.add_argument("--array", help="encoded array file; otherwise random data")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--node", type=int, help="single data node to repair (default: all)")
    p.add_argument("--nodes", help="comma-separated multi-node failure pattern")
    p.add_argument("--punctured", type=int, default=0, help="drop this many trailing sum-parity nodes")
    p.add_argument("--trace-out", help="write read traces as JSON")
    p.set_defaults(func=cmd_repair_sim)

    p = sub.add_parser("parity-sim", help="simulate parity node repairs")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_parity_sim)

    p = sub.add_parser("tables", help="emit benchmark table rows")
    p.add_argument("--table", type=int, choices=(2, 3), required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--out")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("verify", help="run formula-vs-oracle sweeps")
    p.add_argument("--max-k", type=int, default=8)
    p.add_argument("--quick", action="store_true", help="small sweep (k <= 5)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=_default_seed())
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnrecoverableErasureError as exc:
        print(f"unrecoverable: {exc} (rank {exc.rank}, need {exc.needed})", file=sys.stderr)
        return EXIT_UNRECOVERABLE
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

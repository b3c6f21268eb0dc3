"""Command-line front end.

JSON results go to stdout (or ``--output``); a one-line summary goes to
stderr.  Exit codes: 0 ok / isomorphic, 1 usage, 2 parse or validation
error, 3 distinguished, 4 inconclusive, 5 numeric check failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bratteli import (
    DiagramError,
    NotStabilized,
    decompose,
    export_dot,
    parse,
    path_classes,
    serialize,
)
from .factors import FactorError, parse_factor, parse_triple
from .ktheory import TABLE_MODES, k0_of
from .limits import LimitError, compare, limit_presentation, obstructions, telescope_invariant
from .morphisms import MorphismClass, MorphismError, parse_block
from .numerics import (
    NumericsError,
    PreconditionFailed,
    matrix_from_json,
    matrix_to_json,
    realize_factor,
    realize_standard_morphism,
    spin_checks,
    tripotent_approx,
    verify_morphism,
)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_DISTINGUISHED, EXIT_INCONCLUSIVE, EXIT_NUMERIC = 0, 1, 2, 3, 4, 5


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--depth", type=int, default=8, help="rows to unroll (default 8)")
    p.add_argument("--budget", type=int, default=100_000, help="search node budget")
    p.add_argument(
        "--table-mode",
        choices=TABLE_MODES,
        default=None,
        help="Δ table for types II/III (default: $JBTK_TABLE_MODE or oracle)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--output", "-o", default=None, help="write the result here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="jbtk", description="K± invariants, morphisms and limits of finite JB*-triples")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, *args):
        sp = sub.add_parser(name, help=help_text, parents=[common])
        for a in args:
            sp.add_argument(a)
        return sp

    add("validate", "parse and validate a diagram", "file")
    add("invariant", "K± invariant of a triple (JSON array) or diagram (JSON object)", "file")
    add("limit", "limit presentation of a principal diagram", "file")
    add("compare", "decide isomorphism of two principal limits", "a", "b")
    add("decompose", "split a diagram into P, E, S, H parts", "file")
    add("paths", "path classes of a multiplicity-one diagram", "file")
    add("verify-morphism", "numerically verify a standard-form morphism", "spec")
    sp = add("tripotent-approx", "nearest tripotent of an almost-tripotent element", "file")
    sp.add_argument("--eps", type=float, required=True)
    sp = sub.add_parser("spin-check", help="spin factor formula checks", parents=[common])
    sp.add_argument("n", type=int)
    add("export-dot", "Graphviz DOT of a diagram", "file")
    return parser


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise DiagramError(f"cannot read {path}: {exc.strerror}") from exc


def _load_json(path: str):
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _diagram_json(d) -> dict:
    return json.loads(serialize(d))


def _table_mode(args) -> str:
    mode = args.table_mode or os.environ.get("JBTK_TABLE_MODE", "oracle")
    if mode not in TABLE_MODES:
        raise _Usage(f"JBTK_TABLE_MODE must be one of {TABLE_MODES}, got {mode!r}")
    return mode


def _cmd_validate(args):
    d = parse(_read(args.file))
    out = {
        "valid": True,
        "rows": len(d.rows),
        "edges": len(d.edges),
        "periodic": d.infinite,
    }
    return out, EXIT_OK, f"valid diagram ({len(d.rows)} explicit rows{', periodic' if d.infinite else ''})"


def _cmd_invariant(args):
    mode = _table_mode(args)
    obj = _load_json(args.file)
    if isinstance(obj, list):
        k = k0_of(parse_triple(obj), mode)
        return k.to_json(), EXIT_OK, f"K0 of rank {k.rank} ({mode} mode)"
    d = parse(_read(args.file))
    t = telescope_invariant(d, args.depth, mode)
    out = {
        "tableMode": mode,
        "levels": [lv.to_json() for lv in t.levels],
        "maps": [m.tolist() for m in t.maps],
    }
    return out, EXIT_OK, f"invariant telescope with {len(t.levels)} levels ({mode} mode)"


def _cmd_limit(args):
    mode = _table_mode(args)
    t = telescope_invariant(parse(_read(args.file)), args.depth, mode)
    lp = limit_presentation(t, t.depth)
    out = lp.to_json()
    out["obstructions"] = obstructions(t)
    return out, EXIT_OK, f"limit presentation at level {t.depth}"


def _cmd_compare(args):
    mode = _table_mode(args)
    da, db = parse(_read(args.a)), parse(_read(args.b))
    res = compare(da, db, args.depth, args.budget, mode)
    summary = res.verdict
    if res.obstruction:
        summary += f" by {res.obstruction['name']}: {res.obstruction['A']} vs {res.obstruction['B']}"
    return res.to_json(), res.exit_code, summary


def _cmd_decompose(args):
    parts = decompose(parse(_read(args.file)), args.depth)
    out = {c: _diagram_json(parts[c]) for c in "PESH"}
    out["transient"] = parts["transient"]
    sizes = ", ".join(f"{c}={sum(len(r) for r in parts[c].rows)}" for c in "PESH")
    return out, EXIT_OK, f"vertex counts {sizes}; {len(parts['transient'])} transient"


def _cmd_paths(args):
    classes = path_classes(parse(_read(args.file)), args.depth)
    return {"classes": classes}, EXIT_OK, f"{len(classes)} path classes"


def _cmd_verify_morphism(args):
    spec = _load_json(args.spec)
    try:
        src, tgt = parse_triple(spec["source"]), parse_triple(spec["target"])
        blocks = tuple(tuple(parse_block(b) for b in row) for row in spec["blocks"])
    except (KeyError, TypeError) as exc:
        raise DiagramError(f"morphism spec needs source, target and blocks: {exc}") from exc
    m = MorphismClass(src, tgt, blocks)
    phi = realize_standard_morphism(m)
    report = verify_morphism(
        phi,
        [realize_factor(f) for f in src],
        [realize_factor(f) for f in tgt],
        samples=50,
        seed=args.seed,
        tolerance=args.tolerance,
    )
    code = EXIT_OK if report["pass"] else EXIT_NUMERIC
    return report, code, f"max residual {report['maxResidual']:.3e}"


def _cmd_tripotent(args):
    spec = _load_json(args.file)
    try:
        f = parse_factor(spec["factor"])
        z = matrix_from_json(spec["element"])
    except (KeyError, TypeError) as exc:
        raise DiagramError(f"input needs factor and element: {exc}") from exc
    T = realize_factor(f, args.tolerance)
    try:
        e, report = tripotent_approx(z, args.eps, T, args.tolerance)
    except PreconditionFailed as exc:
        return {"error": str(exc), "measured": exc.measured}, EXIT_NUMERIC, f"precondition failed: {exc}"
    report["tripotent"] = matrix_to_json(e)
    code = EXIT_OK if report["pass"] else EXIT_NUMERIC
    return report, code, f"distance {report['distance']:.3e} < {report['bound']:.3e}"


def _cmd_spin(args):
    if not 2 <= args.n <= 12:
        raise _Usage("spin-check needs 2 <= N <= 12")
    report = spin_checks(args.n, seed=args.seed, tolerance=args.tolerance)
    code = EXIT_OK if report["pass"] else EXIT_NUMERIC
    return report, code, "spin checks " + ("passed" if report["pass"] else "FAILED")


def _cmd_dot(args):
    d = parse(_read(args.file))
    return export_dot(d, args.depth).decode("utf-8"), EXIT_OK, "DOT written"


_COMMANDS = {
    "validate": _cmd_validate,
    "invariant": _cmd_invariant,
    "limit": _cmd_limit,
    "compare": _cmd_compare,
    "decompose": _cmd_decompose,
    "paths": _cmd_paths,
    "verify-morphism": _cmd_verify_morphism,
    "tripotent-approx": _cmd_tripotent,
    "spin-check": _cmd_spin,
    "export-dot": _cmd_dot,
}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    """Run the CLI and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.depth < 1 or args.budget < 1:
            raise _Usage("--depth and --budget must be >= 1")
        result, code, summary = _COMMANDS[args.command](args)
    except _Usage as exc:
        print(f"jbtk: usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (DiagramError, FactorError, MorphismError, LimitError) as exc:
        if isinstance(exc, NotStabilized):
            print(f"jbtk: {exc}", file=sys.stderr)
            return EXIT_INCONCLUSIVE
        print(f"jbtk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericsError as exc:
        print(f"jbtk: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"jbtk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = result if isinstance(result, str) else dumps(result) + "\n"
    _emit(text, args.output)
    print(f"jbtk {args.command}: {summary}", file=sys.stderr)
    return code


def _flat(x) -> bool:
    return isinstance(x, list) and all(not isinstance(v, (list, dict)) for v in x)


def dumps(obj, indent: int = 0) -> str:
    """JSON with flat lists kept on one line."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict) and obj:
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)) and obj and not _flat(list(obj)):
        items = [inner + dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return json.dumps(obj, ensure_ascii=False, default=_default)


def _default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command line: list, count, verify and show catalog entries."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .blowup import BlowupError
from .catalog import (
    FAMILIES,
    CatalogError,
    expand_all,
    family_counts,
    find_type,
    load_catalog,
    realize,
)
from .dualgraph import GraphError, build_dual_graph, to_dict, to_dot
from .verifier import reports_json, run_all


class UsageError(Exception):
    pass


def _parse_params(items: list[str] | None) -> dict[str, int]:
    out = {}
    for item in items or []:
        for part in item.replace(",", " ").split():
            name, eq, val = part.partition("=")
            if not eq:
                raise UsageError(f"--params expects name=value, got {part!r}")
            try:
                out[name.strip()] = int(val)
            except ValueError:
                raise UsageError(f"--params value for {name} must be an integer") from None
    return out


def _select(args) -> list:
    specs = load_catalog(args.catalog)
    if args.family:
        specs = [s for s in specs if s.family == args.family]
    if args.type:
        types = find_type(specs, args.type)
        if not types:
            raise UsageError(f"unknown type id {args.type!r}")
    else:
        types = expand_all(specs)
    params = _parse_params(args.params)
    if params:
        types = [t for t in types if all(t.values.get(k) == v for k, v in params.items())]
        if not types:
            raise UsageError(f"no concrete type matches parameters {params}")
    return types


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        print(text.rstrip("\n"))


def cmd_list(args) -> int:
    if args.expand or args.type or args.params:
        lines = [f"{t.family}\t{t.id}" for t in _select(args)]
    else:
        specs = load_catalog(args.catalog)
        lines = [f"{s.family}\t{s.template}" for s in specs if not args.family or s.family == args.family]
    _emit("\n".join(lines), args.out)
    return 0


def cmd_count(args) -> int:
    counts = family_counts(load_catalog(args.catalog))
    fams = [args.family] if args.family else FAMILIES
    _emit(", ".join(f"{f}: {counts[f]}" for f in fams), args.out)
    return 0


def cmd_verify(args) -> int:
    types = _select(args)
    reports, summary = run_all(types, concrete=True)
    if args.format == "json":
        text = reports_json(reports)
    else:
        lines = []
        for r in reports:
            lines.append(f"{'PASS' if r.ok else 'FAIL'} {r.type_id}  {r.computed_em}")
            for c in r.failures():
                lines.append(f"    {c.id}: {c.detail} [{c.condition}]")
            if r.computed_em != r.expected_em and not r.check("symbol"):
                lines.append(f"    symbol: computed {r.computed_em}, expected {r.expected_em}")
        lines.append(summary.text())
        text = "\n".join(lines)
    _emit(text, args.out)
    return 0 if summary.ok else 1


def cmd_show(args) -> int:
    if not args.type:
        raise UsageError("show needs --type")
    types = _select(args)
    if len(types) > 1:
        ids = ", ".join(t.id for t in types)
        raise UsageError(f"{args.type} is parameterized; pick one with --params ({ids})")
    t = types[0]
    r = realize(t, strict=False)
    try:
        st = r.stage(args.stage)
    except KeyError:
        raise UsageError(f"{t.id} has no stage {args.stage}") from None
    coeffs = {cid: k for cid, k in r.coeffs[args.stage].items() if k > 0}
    g = build_dual_graph(coeffs, st)
    if args.format == "json":
        doc = {"type": t.id, "stage": args.stage, "graph": to_dict(g)}
        text = json.dumps(doc, ensure_ascii=False, indent=2)
    else:
        text = to_dot(g, name=f"E_{args.stage}")
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delpezzo3", description=__doc__)
    p.add_argument("--catalog", help="catalog file or directory (default: $DELPEZZO3_CATALOG or the shipped data)")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, fmt=None):
        sp.add_argument("--family", choices=FAMILIES)
        sp.add_argument("--type", help="type id in bracket notation or its ASCII alias")
        sp.add_argument("--params", nargs="*", help="parameter values such as c=1 d=1")
        sp.add_argument("--out", help="write output to this file")
        if fmt:
            sp.add_argument("--format", choices=fmt, default=fmt[0])

    sp = sub.add_parser("list", help="print type ids")
    common(sp)
    sp.add_argument("--expand", action="store_true", help="one line per concrete parameter tuple")
    sp.set_defaults(func=cmd_list)
    sp = sub.add_parser("count", help="print per-family counts")
    sp.add_argument("--family", choices=FAMILIES)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_count)
    sp = sub.add_parser("verify", help="verify catalog entries")
    common(sp, ["text", "json"])
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("show", help="export the divisor dual graph of one stage")
    common(sp, ["dot", "json"])
    sp.add_argument("--stage", choices=["X", "Z", "M"], default="M")
    sp.set_defaults(func=cmd_show)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BlowupError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.  Exit codes: 0 success, 1 check failed, 2 input or usage error."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .errors import CheckFailure, InputError

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"usage: {message}")


def _compact(obj) -> bool:
    if isinstance(obj, dict):
        return all(not isinstance(v, (dict, list)) or (isinstance(v, list) and _compact(v)) for v in obj.values())
    if isinstance(obj, list):
        return all(not isinstance(v, (dict, list)) or (isinstance(v, list) and _compact(v)) for v in obj)
    return True


def _format(obj, indent=0) -> str:
    """Deterministic JSON: containers of scalars (or of scalar lists) stay on one line."""
    if _compact(obj):
        return json.dumps(obj, separators=(", ", ": "))
    pad = " " * (indent + 1)
    if isinstance(obj, dict):
        items = [f"{pad}{json.dumps(k)}: {_format(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + " " * indent + "}"
    items = [pad + _format(v, indent + 1) for v in obj]
    return "[\n" + ",\n".join(items) + "\n" + " " * indent + "]"


def _dump(obj) -> str:
    return _format(obj) + "\n"


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e})") from None


def _window(args):
    from .series import Window

    return Window(N=args.N, K=args.K, D=args.D, G=args.G, L=args.L)


def cmd_vertex(args):
    from .vertex import product_vertex

    p = product_vertex(_window(args))
    _write(_dump(p.to_json()), args.out)
    return EXIT_OK


def cmd_act(args):
    from .flow import act
    from .loopgrp import LoopElement
    from .potential import Potential

    p = Potential.from_json(_read_json(args.potential))
    el = LoopElement.from_json(_read_json(args.element))
    q, info = act(p, el, inverse=args.inverse)
    _write(_dump(q.to_json()), args.out)
    print(f"act: {el.kind} element, {info['orders']} Taylor orders, exact region {info['exact'] or 'window'}", file=sys.stderr)
    return EXIT_OK


def _load_relations(specs):
    from .relations import BUILTINS, builtin, parse_relations

    rels = []
    for spec in specs:
        for item in spec.split(","):
            item = item.strip()
            if not item:
                continue
            if item in BUILTINS:
                rels.append(builtin(item))
            else:
                path = Path(item)
                if not path.is_file():
                    raise InputError(f"relation file not found: {item}")
                text = path.read_text()
                if path.suffix == ".json":
                    from .relations import Relation

                    data = json.loads(text)
                    rels.extend(Relation.from_json(d) for d in (data if isinstance(data, list) else [data]))
                else:
                    rels.extend(parse_relations(text))
    if not rels:
        raise InputError("no relations given")
    return rels


def cmd_check(args):
    from .potential import Potential
    from .relations import evaluate_relation

    p = Potential.from_json(_read_json(args.potential))
    rels = _load_relations(args.relations)
    reports = [evaluate_relation(r, p) for r in rels]
    ok = all(r.ok for r in reports)
    out = {"ok": ok, "reports": [r.to_json() for r in reports]}
    if args.report:
        Path(args.report).write_text(_dump(out))
    for r in reports:
        status = "0" if r.ok else "NONZERO"
        print(f"{r.relation}: residual {status} ({r.asserted_coefficients} asserted coefficients, "
              f"{r.assignments_checked} assignments)")
        for v in r.violations[:3]:
            print(f"  assignment {v['assignment']}: {v['residual_terms']}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_cone(args):
    from .cone import check_cone_axioms
    from .potential import Potential

    p = Potential.from_json(_read_json(args.potential))
    rep = check_cone_axioms(p, args.samples, args.jet, seed=args.seed)
    _write(_dump(rep), args.report)
    if args.report:
        for a in rep["axioms"]:
            print(f"axiom {a['axiom']}: {'pass' if a['ok'] else 'FAIL'} ({a['checked']} coefficients)")
    return EXIT_OK if rep["ok"] else EXIT_CHECK


def cmd_flowcheck(args):
    from .acceptance import flow_test_window
    from .flow import flow_derivative, operator_derivatives
    from .loopgrp import LoopElement
    from .potential import CorrelatorIndex, _mult_factor
    from .quantize import all_monomials, quantize_upper_explicit
    from .series import decode
    from .vertex import product_vertex

    el = LoopElement.from_json(_read_json(args.element))
    w = _window(args)
    if w.N != el.N:
        raise InputError("flowcheck: --N must match the element")
    p = product_vertex(w)
    dF = operator_derivatives(p, quantize_upper_explicit(el, p.unit, w.K))
    wt = flow_test_window(w, el.l_max)
    if wt.K < 0 or wt.D < 0 or wt.L < 0:
        raise InputError("flowcheck: window too small for an exact comparison")
    bad = 0
    print("genus\tinsertions\tflow\toperator\tdifference")
    for g in range(w.G + 1):
        for m in all_monomials(wt):
            ins = tuple(decode(v) for v in m)
            op_val = dF[g].coeff(m) * _mult_factor(m)
            fl = flow_derivative(p, el, CorrelatorIndex(g, ins))
            bad += fl != op_val
            if fl or op_val or args.all:
                print(f"{g}\t{' '.join(f'{mu}:{k}' for mu, k in ins) or '-'}\t{fl}\t{op_val}\t{fl - op_val}")
    return EXIT_OK if not bad else EXIT_CHECK


def cmd_intersections(args):
    from .vertex import intersection_table

    lines = ["# genus\tlevels\tvalue"]
    for g, ks, v in intersection_table(args.G, args.n):
        lines.append(f"{g}\t{','.join(map(str, ks))}\t{v}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_element(args):
    from .randgen import random_element

    rng = random.Random(args.seed)
    el = random_element(rng, args.kind, N=args.N, l_max=args.l_max)
    _write(_dump(el.to_json()), args.out)
    return EXIT_OK


def cmd_selfcheck(args):
    from . import acceptance

    golden = Path(args.golden).read_text() if args.golden else None
    results = []
    numbers = args.only or range(1, len(acceptance.CRITERIA) + 1)
    for n in numbers:
        if not 1 <= n <= len(acceptance.CRITERIA):
            raise InputError(f"selfcheck: no criterion {n}")
        kw = {"golden_text": golden} if n == 1 else {}
        res = acceptance.run_criterion(n, quick=args.quick, seed=args.seed, **kw)
        results.append(res)
        print(res.line(), flush=True)
        if not res.passed:
            for d in res.extra.get("diff", [])[:20]:
                print(f"    diff: {d}")
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="loopquant", description="Quantized loop-group actions on truncated descendant potentials.")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized elements and samples")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def window_args(p, defaults):
        for name, val in defaults.items():
            p.add_argument(f"--{name}", type=int, default=val, required=val is None and name != "L")

    p = sub.add_parser("vertex", help="write the product vertex potential")
    window_args(p, {"N": None, "G": None, "D": None, "K": None, "L": None})
    p.add_argument("--out")
    p.set_defaults(func=cmd_vertex)

    p = sub.add_parser("act", help="apply exp of a quantized loop-algebra element")
    p.add_argument("--potential", required=True)
    p.add_argument("--element", required=True)
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("check", help="evaluate relations on a potential")
    p.add_argument("--potential", required=True)
    p.add_argument("--relations", required=True, nargs="+", help="built-in names (comma separated) or relation files")
    p.add_argument("--report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("cone", help="check the cone axioms on the genus-zero part")
    p.add_argument("--potential", required=True)
    p.add_argument("--jet", type=int, default=3)
    p.add_argument("--samples", type=int, default=2)
    p.add_argument("--report")
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("flowcheck", help="compare the correlator flow with the operator action")
    p.add_argument("--element", required=True)
    window_args(p, {"N": None, "G": 1, "D": 6, "K": 5, "L": 6})
    p.add_argument("--all", action="store_true", help="also list indices where both values vanish")
    p.set_defaults(func=cmd_flowcheck)

    p = sub.add_parser("intersections", help="dump intersection numbers as TSV")
    p.add_argument("--G", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_intersections)

    p = sub.add_parser("element", help="write a random infinitesimally symplectic element")
    p.add_argument("--kind", choices=("upper", "lower"), required=True)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--l-max", dest="l_max", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_element)

    p = sub.add_parser("selfcheck", help="run the acceptance suite")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--golden", help="alternative golden intersection table")
    p.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these criteria")
    p.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CheckFailure as e:
        print(f"check failed: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 solvable, 1 unsolvable, 2 unknown, 3 input error, 4 conflict
(the two exact criteria disagree, or the numeric oracle found an irreducible
tuple for an unsolvable instance).  ``roots``, ``reflect`` and ``classify``
exit 0 on success; ``validate-cert`` exits 0 when the certificate checks out
and 1 when it does not.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from . import __version__
from .certify import validate_verdict_text
from .docio import DocumentError, dump, format_alpha, format_value, parse_instance, verdict_to_dict
from .quiver import BoxTooLarge, parse_vertex, vertex_label
from .spectral import EncodingError, q_from_xi, xi_char

# the decider, reflections and oracle are imported inside the commands that
# use them; validate-cert must run without any decision code loaded

log = logging.getLogger("dspsolve")

EXIT = {"solvable": 0, "unsolvable": 1, "unknown": 2}
EXIT_INPUT = 3
EXIT_CONFLICT = 4


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(str(exc)) from None


def _guards(args):
    from .decider import Guards

    env = Guards.from_env()
    return Guards(
        max_box=args.max_box if args.max_box is not None else env.max_box,
        max_decomps=args.max_decomps if args.max_decomps is not None else env.max_decomps,
    )


def _pair_dict(quiver, pair) -> dict:
    return {
        "q": {vertex_label(v): format_value(x) for v, x in zip(quiver.vertices, pair.q.values)},
        "alpha": format_alpha(quiver, pair.alpha),
    }


def _case_dict(quiver, case) -> dict | None:
    if case is None:
        return None
    name = type(case).__name__
    out: dict = {"case": {"CaseI": "I", "CaseII": "II", "CaseIII": "III"}[name]}
    for key, val in vars(case).items():
        if isinstance(val, tuple):
            out[key] = format_alpha(quiver, val)
        elif key in ("i", "j", "k"):
            out[key] = vertex_label(quiver.vertices[val])
        else:
            out[key] = val
    return out


def _conflict(exc: Exception) -> int:
    print(f"conflict: {exc}", file=sys.stderr)
    return EXIT_CONFLICT


def cmd_decide(args) -> int:
    from .decider import PathDisagreement, decide_dsp

    inst = parse_instance(_read(args.file))
    try:
        verdict = decide_dsp(inst, _guards(args), method=args.method)
    except PathDisagreement as exc:
        return _conflict(exc)
    print(dump(verdict_to_dict(inst, verdict)), end="")
    return EXIT[verdict.status.value]


def cmd_roots(args) -> int:
    inst = parse_instance(_read(args.file))
    q = inst.quiver
    guards = _guards(args)
    roots = q.positive_roots_below(inst.alpha, max_box=guards.max_box)
    out = []
    for r in roots:
        c = xi_char(q, inst.xi, r)
        kind = q.root_kind(r)
        out.append(
            {
                "alpha": format_alpha(q, r),
                "kind": kind.value,
                "p": q.p(r),
                "xi_char": format_value(c),
                "trivial": c.is_one(),
            }
        )
    print(dump({"format": 1, "kind": "roots", "bound": format_alpha(q, inst.alpha), "count": len(out), "roots": out}), end="")
    return 0


def _start_pair(inst):
    from .reflections import Pair

    return Pair(q_from_xi(inst.quiver, inst.xi), inst.alpha)


def cmd_reflect(args) -> int:
    from .reflections import InadmissibleReflection, Tri, in_Fq, orbit_explore, reflect_pair

    inst = parse_instance(_read(args.file))
    q = inst.quiver
    pair = _start_pair(inst)
    out: dict = {"format": 1, "kind": "reflection", "pair": _pair_dict(q, pair)}
    if args.vertex is not None:
        try:
            v = q.index[parse_vertex(args.vertex)]
        except (KeyError, ValueError):
            raise InputError(f"no vertex {args.vertex!r} in quiver {list(q.weights)}") from None
        try:
            reflected = reflect_pair(q, v, pair)
        except InadmissibleReflection as exc:
            raise InputError(f"reflection not admissible: {exc}") from None
        out["vertex"] = vertex_label(q.vertices[v])
        out["reflected"] = _pair_dict(q, reflected)
        out["p_invariant"] = q.p(reflected.alpha) == q.p(pair.alpha)
    orbit = orbit_explore(q, pair, args.depth)
    out["orbit"] = {"depth": args.depth, "size": len(orbit)}
    out["in_Fq"] = in_Fq(q, pair, args.depth).value if q.is_positive_root(pair.alpha) else Tri.NO.value
    print(dump(out), end="")
    return 0


def cmd_classify(args) -> int:
    from .reflections import classify_case, orbit_explore

    inst = parse_instance(_read(args.file))
    q = inst.quiver
    cls = q.classify()
    out: dict = {
        "format": 1,
        "kind": "classification",
        "quiver": {
            "weights": list(q.weights),
            "type": cls.kind.value,
            "name": cls.name,
        },
    }
    if cls.delta is not None:
        out["quiver"]["delta"] = format_alpha(q, cls.delta)
        out["quiver"]["extending_vertices"] = [vertex_label(v) for v in cls.extending_vertices]
    pair = _start_pair(inst)
    out["root_kind"] = q.root_kind(inst.alpha).value
    out["reduced_case"] = _case_dict(q, classify_case(q, pair))
    found = None
    for p in sorted(orbit_explore(q, pair, args.depth), key=lambda p: (sum(p.alpha), p.alpha)):
        case = classify_case(q, p)
        if case is not None:
            found = {"pair": _pair_dict(q, p), **_case_dict(q, case)}
            break
    out["reduced_case_in_orbit"] = found
    print(dump(out), end="")
    return 0


def cmd_oracle(args) -> int:
    from .decider import PathDisagreement
    from .oracle import Agreement, cross_validate

    inst = parse_instance(_read(args.file))
    try:
        cv = cross_validate(inst, args.restarts, args.iters, args.tol, args.seed, _guards(args), maxlen=args.maxlen)
    except PathDisagreement as exc:
        return _conflict(exc)
    rep = cv.report
    out = {
        "format": 1,
        "kind": "oracle",
        "agreement": cv.agreement.value,
        "exact_status": cv.verdict.status.value,
        "seed": args.seed,
        "found": rep.found,
        "residual": rep.residual,
        "irreducible": rep.irreducible,
        "word_rank": rep.word_rank,
        "n_squared": inst.n**2,
        "restarts_used": rep.restarts_used,
        "candidates": [{"residual": r, "word_rank": k} for r, k in rep.candidates],
    }
    print(dump(out), end="")
    if cv.agreement is Agreement.CONFLICT:
        return EXIT_CONFLICT
    return EXIT[cv.verdict.status.value]


def cmd_validate(args) -> int:
    check = validate_verdict_text(_read(args.file))
    print(dump({"format": 1, "kind": "certificate_check", "certificate": check.kind, "valid": check.valid, "problems": check.problems}), end="")
    return 0 if check.valid else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dspsolve", description="Exact Deligne-Simpson decisions for star quivers.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def guarded(p):
        p.add_argument("--max-box", type=int, default=None, help="largest box volume to scan (env DSPSOLVE_MAX_BOX)")
        p.add_argument(
            "--max-decomps", type=int, default=None, help="largest number of decompositions to enumerate (env DSPSOLVE_MAX_DECOMPS)"
        )

    p = sub.add_parser("decide", help="decide solvability of an instance")
    p.add_argument("file")
    p.add_argument("--method", choices=("dp", "enumerate"), default="dp", help="how the definition criterion is evaluated")
    guarded(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("roots", help="list the positive roots below alpha")
    p.add_argument("file")
    guarded(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("reflect", help="apply an admissible reflection to [q_C, alpha]")
    p.add_argument("file")
    p.add_argument("--vertex", help="vertex label, '*' or 'i,j'")
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("classify", help="quiver type and reduced case of [q_C, alpha]")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="numeric search cross-checked against the exact decision")
    p.add_argument("file")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--maxlen", type=int, default=None)
    guarded(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate-cert", help="re-check the certificate in a verdict document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (InputError, DocumentError, EncodingError, BoxTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())

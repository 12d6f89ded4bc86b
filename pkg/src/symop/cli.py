"""Command line entry point.

Every command prints a JSON report on stdout and a one-line summary on
stderr, and exits with status 0 exactly when all its checks pass.  Operads
may be given as JSON files or as ``builtin:NAME`` with NAME one of
``com3``, ``ass3``, ``free2``, ``broken_ass`` (any bound works for com/ass).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Callable

from .algebra import (
    LaxMorphismData,
    LaxNatData,
    ShapeMismatch,
    commutativize,
    commutativize_up,
    data_to_action,
    strict_algebra,
    validate_colax_morphism,
    validate_colax_natural,
    validate_lax_action,
    validate_lax_morphism,
    validate_lax_natural,
)
from .fincat import FinFunctor, InvalidCategory, category_violations, validate_category
from .operad import (
    InvalidOperad,
    TruncatedOperad,
    ass,
    broken_ass,
    com,
    free2,
    from_polynomial,
    operad_violations,
    sigma_free,
    to_polynomial,
    validate_operad,
)
from .poly import Polynomial, classify_over_S, compose_polynomials, monad_from_dict, monad_to_dict, truncated_s, validate_poly_morphism
from .tmonad import ObjOverI, apply_T, check_monad_laws, quotient, quotient_oracle

_BUILTIN: dict[str, Callable[[], TruncatedOperad]] = {"free2": free2, "broken_ass": broken_ass}


class UsageError(ValueError):
    pass


class ParseError(UsageError):
    """The file is not JSON, or not the kind of file the command expects."""


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: not valid JSON ({e})") from None


def _raw_operad(ref: str) -> dict:
    if ref.startswith("builtin:"):
        name = ref[len("builtin:") :]
        if name in _BUILTIN:
            return _BUILTIN[name]().to_dict()
        for prefix, make in (("com", com), ("ass", ass)):
            if name.startswith(prefix) and name[len(prefix) :].isdigit():
                return make(int(name[len(prefix) :])).to_dict()
        raise UsageError(f"unknown builtin operad {name!r}")
    return _read_json(ref)


def _expect(raw: Any, key: str, kind: str, path: str) -> Any:
    if not isinstance(raw, dict) or key not in raw:
        raise ParseError(f"{path}: not {kind} file (no {key!r} key)")
    return raw


def _operad(ref: str) -> TruncatedOperad:
    return validate_operad(_expect(_raw_operad(ref), "arity_bound", "an operad", ref))


def _monad(path: str):
    return monad_from_dict(_expect(_read_json(path), "polynomial", "a polynomial monad", path))


def _polynomial(path: str) -> Polynomial:
    """A bare polynomial, or the carrier of a polynomial monad file."""
    raw = _read_json(path)
    if isinstance(raw, dict) and "polynomial" in raw:
        raw = raw["polynomial"]
    return Polynomial.from_dict(_expect(raw, "I", "a polynomial", path))


def _base(T: TruncatedOperad, path: str) -> ObjOverI:
    """A category file, optionally with ``"colours": {object: colour}``."""
    raw = _expect(_read_json(path), "objects", "a category", path)
    X = validate_category(raw, name=Path(path).stem)
    colours = raw.get("colours")
    if colours is None:
        if len(T.colours) != 1:
            raise UsageError("the category file needs a 'colours' map for a coloured operad")
        colours = {x: T.colours[0] for x in X.objects}
    return ObjOverI.over(X, colours, T.colours)


_INPUTS = ("file", "operad", "poly", "category", "algebra", "outer", "inner")


def _inputs(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    for name in _INPUTS:
        path = getattr(args, name, None)
        if path is None:
            continue
        if path.startswith("builtin:"):
            out[path] = "builtin"
        else:
            out[path] = "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return out


def _checks(report: dict) -> list[dict]:
    """One entry per check, carrying the first witness of each failure."""
    if "checks" in report:
        return report.pop("checks")
    violations = report.get("violations") or []
    coverage = report.get("coverage")
    if isinstance(coverage, dict) and {"kept", "total"} <= coverage.keys():
        coverage = coverage["kept"] / coverage["total"] if coverage["total"] else 1.0
    elif isinstance(coverage, dict) and any(isinstance(c, dict) for c in coverage.values()):
        # nested {"checked"|"defined": k, "total"|"candidates": n} entries
        done = total = 0
        for c in coverage.values():
            if isinstance(c, dict):
                n = c.get("total", c.get("candidates"))
                if n is not None:
                    done += c.get("checked", c.get("defined", 0))
                    total += n
        coverage = done / total if total else 1.0
    elif not isinstance(coverage, (int, float)):
        coverage = 1.0
    return [{
        "name": "all",
        "status": "pass" if report.get("ok", True) else "fail",
        "coverage": coverage,
        "witness": violations[0] if violations else None,
    }]


def _emit(args: argparse.Namespace, report: dict, payload: Any = None) -> int:
    ok = bool(report.get("ok", True))
    report["command"] = args.command
    report["inputs"] = _inputs(args)
    report["checks"] = _checks(report)
    report["outputs"] = []
    if payload is not None and args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"{args.command}.json"
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        report["outputs"] = [str(target)]
    elif payload is not None:
        report["result"] = payload
    if args.format == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for k in sorted(report):
            print(f"{k}: {json.dumps(report[k], sort_keys=True)}")
    print(f"{args.command}: {'ok' if ok else 'FAILED'}", file=sys.stderr)
    return 0 if ok else 1


# commands


def cmd_validate(args) -> int:
    raw = _raw_operad(args.file) if args.file.startswith("builtin:") else _read_json(args.file)
    if "polynomial" in raw:
        M, over_s = monad_from_dict(raw)
        S = truncated_s(int(raw["arity_bound"]))
        found = validate_poly_morphism(M.unit) + validate_poly_morphism(M.mult)
        found += validate_poly_morphism(over_s, monads=(M, S.monad))
        return _emit(args, {"kind": "polynomial monad", "ok": not found, "violations": [v.as_dict() for v in found]})
    if "arity_bound" in raw:
        try:
            T = TruncatedOperad.from_dict(raw)
        except (KeyError, ValueError) as e:
            return _emit(args, {"kind": "operad", "ok": False, "violations": [{"kind": "BadShape", "detail": str(e)}]})
        found, coverage = operad_violations(T)
        return _emit(args, {"kind": "operad", "ok": not found, "violations": [v.as_dict() for v in found], "coverage": coverage})
    if "fibres" in raw:
        rep = validate_lax_morphism(_algebra_from(raw, Path(args.file).parent))
        return _emit(args, dict(rep.to_dict(), kind="algebra"))
    found = category_violations(raw)
    return _emit(args, {"kind": "category", "ok": not found, "violations": [v.as_dict() for v in found]})


def cmd_to_poly(args) -> int:
    T = _operad(args.operad)
    M, over_s = to_polynomial(T)
    report = {
        "ok": True,
        "B": len(M.carrier.B.objects),
        "E": len(M.carrier.E.objects),
        "multiplication_coverage": {"defined": M.coverage[0], "total": M.coverage[1]},
    }
    return _emit(args, report, monad_to_dict(M, over_s))


def cmd_from_poly(args) -> int:
    M, over_s = _monad(args.poly)
    T = from_polynomial(M, over_s, name=args.name)
    found, coverage = operad_violations(T)
    return _emit(args, {"ok": not found, "violations": [v.as_dict() for v in found], "coverage": coverage}, T.to_dict())


def cmd_classify(args) -> int:
    M, over_s = _monad(args.poly)
    return _emit(args, {"ok": True, "classes": classify_over_S(M.carrier, over_s)})


def cmd_sigma_free(args) -> int:
    routes = sigma_free(_operad(args.operad))
    agree = len(set(routes.values())) == 1
    return _emit(args, {"ok": agree, "sigma_free": routes["direct"], "routes": routes})


def cmd_apply(args) -> int:
    T = _operad(args.operad)
    TX = apply_T(T, _base(T, args.category))
    report = {
        "ok": True,
        "objects": len(TX.cat.objects),
        "arrows": len(TX.cat.arrows),
        "coverage": {"kept": TX.coverage[0], "total": TX.coverage[1]},
    }
    return _emit(args, report, TX.cat.to_dict() if args.out else None)


def cmd_monad_laws(args) -> int:
    T = _operad(args.operad)
    rep = check_monad_laws(T, _base(T, args.category), all_arrows=args.all_arrows)
    return _emit(args, rep.to_dict())


def cmd_quotient(args) -> int:
    T = _operad(args.operad)
    TX = apply_T(T, _base(T, args.category))
    res = quotient(TX)
    report = {
        "ok": True,
        "objects": len(res.Q.objects),
        "arrows": len(res.Q.arrows),
        "discrete": res.Q.is_discrete(),
        "refined": res.refined,
    }
    if args.oracle:
        Q2, q2 = quotient_oracle(TX)
        same = Q2.signature() == res.Q.signature() and q2.same_as(res.q)
        report["oracle_agrees"] = same
        report["ok"] = same
    return _emit(args, report, {"category": res.Q.to_dict(), "map": res.q.to_dict()} if args.out else None)


def _algebra_from(raw: dict, here: Path) -> LaxMorphismData:
    """Operad and fibres may be inline, ``builtin:NAME`` or paths relative to the algebra file."""

    def resolve(ref):
        if not isinstance(ref, str):
            return ref
        if ref.startswith("builtin:"):
            return _raw_operad(ref)
        return _read_json(str(here / ref))

    raw = dict(raw, operad=resolve(raw["operad"]), fibres={i: resolve(c) for i, c in raw["fibres"].items()})
    return LaxMorphismData.from_dict(raw)


def _algebra(path: str) -> LaxMorphismData:
    return _algebra_from(_expect(_read_json(path), "fibres", "an algebra", path), Path(path).parent)


def cmd_check_algebra(args) -> int:
    D = _algebra(args.algebra)
    rep = validate_colax_morphism(D) if args.colax else validate_lax_morphism(D)
    report = rep.to_dict()
    if args.both_routes and not args.colax:
        act = validate_lax_action(data_to_action(D))
        agree = act.locations() == rep.locations() and act.ok == rep.ok
        report["action_route"] = {"ok": act.ok, "agrees": agree}
        report["ok"] = rep.ok and agree
    return _emit(args, report)


def cmd_check_transformation(args) -> int:
    raw = _read_json(args.file)
    here = Path(args.file).parent
    H, K = (_algebra(str(here / raw[k])) if isinstance(raw[k], str) else _algebra_from(raw[k], here) for k in ("dom", "cod"))
    comps = {i: FinFunctor.from_dict(H.fibres[i], K.fibres[i], f) for i, f in raw["components"].items()}
    F = LaxNatData(H, K, comps, {a: dict(c) for a, c in raw.get("cells", {}).items()})
    rep = validate_colax_natural(F) if raw.get("colax") else validate_lax_natural(F)
    return _emit(args, rep.to_dict())


def cmd_commutativize(args) -> int:
    A = strict_algebra(_algebra(args.algebra))
    res = commutativize(A)
    C = res.algebra
    laws = C.law_violations()
    report: dict = {
        "objects": len(C.base.X.objects),
        "arrows": len(C.base.X.arrows),
        "commutative": C.is_commutative(),
        "law_violations": [v.as_dict() for v in laws],
        "already_commutative": A.is_commutative(),
        "map_is_iso": res.r.is_bijective(),
    }
    ok = C.is_commutative() and not laws
    if args.max_size > 0:
        up = commutativize_up(res, args.max_size)
        report["universal_property"] = {"ok": up.ok, "probes": up.probes, "functors": up.functors, "failures": up.failures}
        ok = ok and up.ok
    report["ok"] = ok
    return _emit(args, report, {"category": C.base.X.to_dict(), "map": res.r.to_dict()} if args.out else None)


def cmd_compose_poly(args) -> int:
    P2, P1 = _polynomial(args.outer), _polynomial(args.inner)
    C = compose_polynomials(P2, P1)
    report = {"ok": True, "B": len(C.B.objects), "E": len(C.E.objects)}
    return _emit(args, report, C.to_dict())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symop", description="Checks for truncated operads, their polynomials and algebras.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="write the constructed object into this directory")
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--max-size", type=int, default=6, help="probe size for bounded universal-property checks (0 skips them)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn, *positional: str, help: str = ""):
        sp = sub.add_parser(name, parents=[common], help=help)
        for arg in positional:
            sp.add_argument(arg)
        sp.set_defaults(fn=fn)
        return sp

    add("validate", cmd_validate, "file", help="validate a category, operad, polynomial monad or algebra file")
    add("to-poly", cmd_to_poly, "operad", help="polynomial monad of an operad")
    sp = add("from-poly", cmd_from_poly, "poly", help="operad of a polynomial monad over S")
    sp.add_argument("--name", default="")
    add("classify", cmd_classify, "poly", help="operad / sigma-free / club flags")
    add("sigma-free", cmd_sigma_free, "operad", help="whether the symmetric group actions are free")
    add("apply", cmd_apply, "operad", "category", help="the category TX")
    sp = add("monad-laws", cmd_monad_laws, "operad", "category", help="monad laws at a category")
    sp.add_argument("--all-arrows", action="store_true")
    sp = add("quotient", cmd_quotient, "operad", "category", help="TX modulo symmetries")
    sp.add_argument("--oracle", action="store_true", help="compare with the congruence-closure quotient")
    sp = add("check-algebra", cmd_check_algebra, "algebra", help="axioms of a lax (or colax) morphism")
    sp.add_argument("--colax", action="store_true")
    sp.add_argument("--both-routes", action="store_true", help="also check the corresponding lax action")
    add("check-transformation", cmd_check_transformation, "file", help="axioms of a lax or colax transformation")
    add("commutativize", cmd_commutativize, "algebra", help="commutative reflection of a strict algebra")
    add("compose-poly", cmd_compose_poly, "outer", "inner", help="composite of two polynomials")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, InvalidOperad, InvalidCategory, ShapeMismatch) as e:
        print(json.dumps({"ok": False, "error": type(e).__name__, "detail": str(e)}, indent=2))
        print(f"{args.command}: error: {e}", file=sys.stderr)
        return 2


def run() -> None:
    """Console script: exit with the status returned by ``main``."""
    sys.exit(main())


if __name__ == "__main__":
    run()

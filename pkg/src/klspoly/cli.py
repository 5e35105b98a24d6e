"""Command line for the package: validate, solve, localize, verify, count.

Subcommands::

    klspoly check PATH                 validate a document, report per check
    klspoly kls PATH --what f|g|z|h|toric-h [--kernel eulerian|FILE]
                                        [--interval Z ZP | --all]
    klspoly local PATH [--kernel ...] [--equivariant GROUP] [--all]
                                        [--relative-g]
    klspoly verify [PATH ...] --suite NAME [--kernel FILE]
    klspoly ehrhart PATH --what hstar|local-hstar|series|reciprocity
                                        [--order M]

All inputs are versioned JSON documents (see :mod:`klspoly.schemas`); a
path of the form ``fixture:NAME`` resolves to the bundled fixture NAME.
Output is deterministic for fixed input and flags: elements are listed in
index order, conjugacy classes by their smallest element id, polynomials
as comma-joined coefficients with the constant term first.  ``--format
json`` switches from aligned text to a single JSON object.

Exit status: 0 on success, 1 when a verification fails (an identity does
not hold, a kernel or action is rejected), 2 on input errors (unreadable
files, malformed documents, impossible flag combinations).

The environment variable ``KLS_MAX_GROUP`` overrides the default bound on
generated group sizes.
"""

import argparse
import json
import os
import sys

from . import schemas
from . import verify as verify_mod
from .ehrhart import (ComplexError, HStarData, ehr_series,
                      hstar_from_subdivision, localhstar_via_localh,
                      polynomial_action_check, reciprocity_check)
from .equivariant import (GroupTooLarge, NotAutomorphism, classpoly_json,
                          equiv_constant, equiv_kernel_validate,
                          equiv_local_invariants, is_eulerian_action,
                          validate_action)
from .fans import FanError, fan_kernel
from .incidence import (MirrorConstraintViolated, eulerian_kernel,
                        h_polynomial, solve_f, solve_g, toric_h_boundary,
                        validate_kernel, z_function)
from .poset import PosetError
from .subdivision import (SubdivisionError, local_invariants, mapping_cylinder,
                          relative_g, triple_to_sfs)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2


class InputProblem(Exception):
    """Anything that makes the request unanswerable (exit code 2)."""


def _max_group():
    raw = os.environ.get("KLS_MAX_GROUP")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise InputProblem(f"KLS_MAX_GROUP must be an integer, got {raw!r}")


def _resolve(path):
    if path.startswith("fixture:"):
        return verify_mod.fixture_path(path[len("fixture:"):])
    return path


def _poly_str(p):
    coeffs = p.to_json()
    return ",".join(coeffs) if coeffs else "0"


def _emit(args, payload, lines):
    if args.format == "json":
        payload.setdefault("v", 1)
        print(json.dumps(payload, sort_keys=True, indent=1))
    else:
        for line in lines:
            print(line)


def _check_lines(results):
    lines = []
    checks = []
    ok = True
    for name, res in results:
        ok = ok and bool(res)
        lines.append(f"{name}: {res.describe()}")
        entry = {"name": name, "ok": bool(res)}
        if not res:
            entry["reason"] = res.reason
            if res.witness is not None:
                entry["witness"] = res.witness
            if res.detail:
                entry["detail"] = res.detail
        checks.append(entry)
    return ok, lines, checks


# -- check ------------------------------------------------------------------

def _document_checks(tag, payload, max_group):
    from .status import CheckResult

    results = []
    if tag == "poset":
        poset = schemas.build_poset(payload)
        results.append(("poset-structure", CheckResult.passed()))
        results.append(("lower-eulerian", poset.is_lower_eulerian()))
    elif tag == "sfs":
        sfs = schemas.build_sfs(payload)
        results.append(("sfs-structure", CheckResult.passed()))
        results.append(("strong-formal-subdivision", sfs.validate()))
    elif tag == "triple":
        triple = schemas.build_triple(payload)
        results.append(("triple-structure", CheckResult.passed()))
        results.append(("lower-eulerian",
                        triple.gamma.is_lower_eulerian()))
        results.append(("strong-formal-subdivision",
                        triple_to_sfs(triple).validate()))
    elif tag == "fan":
        fan, faction = schemas.build_fan(payload, max_group=max_group)
        results.append(("fan-structure", CheckResult.passed()))
        results.append(("lower-eulerian",
                        fan.face_poset.is_lower_eulerian()))
        if faction is not None:
            results.append(("action-eulerian",
                            is_eulerian_action(faction.action)))
            kappa = fan_kernel(fan, faction, validate=False)
            results.append(("equivariant-kernel",
                            equiv_kernel_validate(kappa)))
    elif tag == "complex":
        cx = schemas.build_complex(payload, max_group=max_group)
        results.append(("complex-structure", CheckResult.passed()))
        results.append(("action-eulerian", is_eulerian_action(cx.action)))
        HStarData(cx)
        results.append(("hstar-data", CheckResult.passed()))
        if cx.coarse_poset is not None:
            from .ehrhart import ComplexCylinder
            ComplexCylinder(cx)
            results.append(("coarse-cylinder", CheckResult.passed()))
    elif tag == "group":
        gens = payload.get("generators")
        if not isinstance(gens, list) or not gens:
            raise schemas.DocumentError("group document needs generators")
        sizes = {len(g) for g in gens}
        okperm = len(sizes) == 1 and all(
            sorted(g) == list(range(len(g))) for g in gens)
        results.append(("permutations",
                        CheckResult.passed() if okperm else
                        CheckResult.failed("not-a-permutation")))
    return results


def cmd_check(args):
    tag, payload = schemas.load_document(_resolve(args.path))
    results = _document_checks(tag, payload, _max_group())
    ok, lines, checks = _check_lines(results)
    _emit(args, {"command": "check", "schema": tag,
                 "status": "ok" if ok else "fail", "checks": checks}, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- kls ----------------------------------------------------------------------

def _load_carrier(args):
    """The poset a kls computation runs on (poset, triple or fan doc)."""
    tag, payload = schemas.load_document(_resolve(args.path),
                                         expect=("poset", "triple", "fan"))
    if tag == "poset":
        return schemas.build_poset(payload)
    if tag == "triple":
        return schemas.build_triple(payload).gamma
    fan, _action = schemas.build_fan(payload, max_group=_max_group())
    return fan.face_poset


def _kernel_for(args, poset):
    if args.kernel == "eulerian":
        return eulerian_kernel(poset)
    return schemas.load_kernel_file(_resolve(args.kernel), poset)


def _interval_list(args, poset):
    if args.interval is not None and args.all:
        raise InputProblem("--interval and --all are mutually exclusive")
    if args.interval is not None:
        z, zp = args.interval
        if not (0 <= z < poset.n and 0 <= zp < poset.n and poset.leq(z, zp)):
            raise InputProblem(f"({z}, {zp}) is not an interval of the poset")
        return [(z, zp)], True
    if args.all:
        return sorted(poset.intervals()), False
    maxs = poset.maximal_elements()
    if len(maxs) == 1:
        return [(poset.bottom(), maxs[0])], True
    raise InputProblem("poset has no unique maximum; pass --interval or --all")


def cmd_kls(args):
    poset = _load_carrier(args)
    if args.what in ("h", "toric-h"):
        if args.kernel != "eulerian":
            raise InputProblem(f"--what {args.what} is defined for the "
                               "Eulerian kernel only")
        poly = h_polynomial(poset) if args.what == "h" \
            else toric_h_boundary(poset)
        _emit(args, {"command": "kls", "what": args.what,
                     "status": "ok", "coeffs": poly.to_json()},
              [_poly_str(poly)])
        return EXIT_OK
    kappa = _kernel_for(args, poset)
    res = validate_kernel(kappa)
    if not res:
        _emit(args, {"command": "kls", "status": "fail",
                     "reason": res.reason, "witness": res.witness},
              [f"kernel rejected: {res.describe()}"])
        return EXIT_FAIL
    solver = {"f": solve_f, "g": solve_g, "z": z_function}[args.what]
    element = solver(kappa)
    pairs, single = _interval_list(args, poset)
    values = [[z, zp, element.value(z, zp).to_json()] for z, zp in pairs]
    if single:
        lines = [_poly_str(element.value(*pairs[0]))]
    else:
        lines = [f"{z} {zp}: {_poly_str(element.value(z, zp))}"
                 for z, zp in pairs]
    _emit(args, {"command": "kls", "what": args.what, "status": "ok",
                 "values": values}, lines)
    return EXIT_OK


# -- local --------------------------------------------------------------------

def _load_triple(args):
    tag, payload = schemas.load_document(_resolve(args.path),
                                         expect=("triple", "sfs"))
    if tag == "triple":
        return schemas.build_triple(payload)
    return mapping_cylinder(schemas.build_sfs(payload))


def _headline_pair(triple):
    gamma = triple.gamma
    maxs = gamma.maximal_elements()
    if len(maxs) == 1 and gamma.leq(triple.q, maxs[0]):
        return (gamma.bottom(), maxs[0])
    return None


def _table_pairs(triple, args):
    if not args.all:
        pair = _headline_pair(triple)
        if pair is not None:
            return [pair]
    return sorted(triple.xy_pairs())


def cmd_local(args):
    triple = _load_triple(args)
    gamma = triple.gamma
    if args.relative_g:
        if args.equivariant or args.kernel != "eulerian":
            raise InputProblem("--relative-g uses the Eulerian kernel and "
                               "no group")
        poly = relative_g(gamma, triple.q)
        _emit(args, {"command": "local", "what": "relative-g",
                     "status": "ok", "coeffs": poly.to_json()},
              [_poly_str(poly)])
        return EXIT_OK
    kappa = _kernel_for(args, gamma)
    pairs = _table_pairs(triple, args)
    if args.equivariant is None:
        res = validate_kernel(kappa)
        if not res:
            _emit(args, {"command": "local", "status": "fail",
                         "reason": res.reason, "witness": res.witness},
                  [f"kernel rejected: {res.describe()}"])
            return EXIT_FAIL
        inv = local_invariants(triple, kappa.weak_rank, kappa)
        tables = {"h_sigma": inv.h_sigma, "ell_sigma": inv.ell_sigma,
                  "delta_ell": inv.delta_ell}
        lines = []
        values = {}
        for name in ("h_sigma", "ell_sigma", "delta_ell"):
            element = tables[name]
            values[name] = [[z, zp, element.value(z, zp).to_json()]
                            for z, zp in pairs]
            if len(pairs) == 1:
                lines.append(f"{name}: {_poly_str(element.value(*pairs[0]))}")
            else:
                lines.append(f"{name}:")
                lines.extend(f"  {z} {zp}: {_poly_str(element.value(z, zp))}"
                             for z, zp in pairs)
        _emit(args, {"command": "local", "status": "ok", "values": values},
              lines)
        return EXIT_OK

    # equivariant tables from a permutation group document
    gtag, gpayload = schemas.load_document(_resolve(args.equivariant),
                                           expect="group")
    action = schemas.build_group(gpayload, gamma, max_group=_max_group())
    res = validate_action(action, gamma, q=triple.q)
    if not res:
        raise InputProblem(f"group incompatible with the triple: "
                           f"{res.describe()}")
    res = is_eulerian_action(action)
    if not res:
        _emit(args, {"command": "local", "status": "fail",
                     "reason": res.reason, "witness": res.witness},
              [f"action rejected: {res.describe()}"])
        return EXIT_FAIL
    try:
        ekappa = equiv_constant(action, kappa)
    except ValueError as exc:
        raise InputProblem(str(exc))
    res = equiv_kernel_validate(ekappa)
    if not res:
        _emit(args, {"command": "local", "status": "fail",
                     "reason": res.reason, "witness": res.witness},
              [f"kernel rejected equivariantly: {res.describe()}"])
        return EXIT_FAIL
    inv = equiv_local_invariants(triple, ekappa.weak_rank, action, ekappa)
    tables = {"h_sigma": inv.h_sigma, "ell_sigma": inv.ell_sigma,
              "delta_ell": inv.delta_ell}
    lines = [f"group order {len(action)}"]
    values = {"group_order": len(action)}
    for name in ("h_sigma", "ell_sigma", "delta_ell"):
        element = tables[name]
        table = []
        lines.append(f"{name}:")
        for z, zp in pairs:
            data = classpoly_json(action, element.value(z, zp))
            table.append([z, zp, data])
            for wid, coeffs in data["values"]:
                lines.append(f"  {z} {zp} w{wid}: "
                             f"{','.join(coeffs) if coeffs else '0'}")
        values[name] = table
    _emit(args, {"command": "local", "status": "ok", "values": values}, lines)
    return EXIT_OK


# -- verify -------------------------------------------------------------------

def _verify_paths(args):
    """Checks for explicitly supplied documents, dispatched on schema."""
    from .status import CheckResult

    docs = [(p,) + schemas.load_document(_resolve(p)) for p in args.paths]
    results = []
    triple_checks = {"theorem-g": "check_theorem_g",
                     "corollary-f": "check_corollary_f",
                     "corollary-z": "check_corollary_z"}
    group_doc = next(((p, pay) for p, t, pay in docs if t == "group"), None)
    for path, tag, payload in docs:
        if tag == "group":
            continue
        if tag == "triple" and args.suite in triple_checks:
            from . import subdivision
            triple = schemas.build_triple(payload)
            kappa = _kernel_for(args, triple.gamma)
            check = getattr(subdivision, triple_checks[args.suite])
            results.append((f"{args.suite} on {path}", check(triple, kappa)))
        elif tag in ("poset", "triple") and args.suite == "equivariant" \
                and group_doc is not None:
            poset = schemas.build_poset(payload["poset"]) if tag == "triple" \
                else schemas.build_poset(payload)
            action = schemas.build_group(group_doc[1], poset,
                                         max_group=_max_group())
            results.append((f"eulerian-action on {path}",
                            is_eulerian_action(action)))
        elif tag == "fan" and args.suite == "equivariant":
            fan, faction = schemas.build_fan(payload,
                                             max_group=_max_group())
            if faction is None:
                raise InputProblem(f"{path} carries no action")
            kappa = fan_kernel(fan, faction, validate=False)
            results.append((f"kernel on {path}",
                            equiv_kernel_validate(kappa)))
            results.append((f"solvers on {path}",
                            verify_mod.solver_crosscheck(kappa)))
        elif tag == "complex" and args.suite == "ehrhart-reciprocity":
            cx = schemas.build_complex(payload, max_group=_max_group())
            results.append((f"counting vs assembled h* on {path}",
                            polynomial_action_check(cx,
                                                    order=2 * (cx.dim + 1))))
            for w in sorted(cx.action.elements):
                results.append((f"reciprocity w={list(w)} on {path}",
                                reciprocity_check(cx, w, order=6)))
        elif tag == "poset" and args.kernel != "eulerian":
            poset = schemas.build_poset(payload)
            kappa = _kernel_for(args, poset)
            res = validate_kernel(kappa)
            results.append((f"kernel axioms on {path}", res))
            if res:
                try:
                    solve_g(kappa)
                    solve_f(kappa)
                    results.append((f"solvers on {path}",
                                    CheckResult.passed()))
                except MirrorConstraintViolated as exc:
                    results.append((
                        f"solvers on {path}",
                        CheckResult.failed("mirror-constraint",
                                           detail=str(exc))))
        else:
            raise InputProblem(
                f"don't know how to verify a {tag} document under suite "
                f"{args.suite!r}")
    if not results:
        raise InputProblem("no verifiable documents among the given paths")
    return results


def cmd_verify(args):
    if args.paths:
        results = _verify_paths(args)
    else:
        try:
            results = verify_mod.run_suite(args.suite)
        except ValueError as exc:
            raise InputProblem(str(exc))
    ok, lines, checks = _check_lines(results)
    passed = sum(1 for _n, r in results if r)
    lines.append(f"passed {passed}/{len(results)}")
    _emit(args, {"command": "verify", "suite": args.suite,
                 "status": "ok" if ok else "fail",
                 "passed": passed, "total": len(results),
                 "checks": checks}, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- ehrhart ------------------------------------------------------------------

def _class_lines(action, cp, prefix=""):
    data = classpoly_json(action, cp)
    return [f"{prefix}w{wid}: {','.join(coeffs) if coeffs else '0'}"
            for wid, coeffs in data["values"]], data


def cmd_ehrhart(args):
    tag, payload = schemas.load_document(_resolve(args.path),
                                         expect="complex")
    cx = schemas.build_complex(payload, max_group=_max_group())
    action = cx.action
    elements = [list(w) for w in sorted(action.elements)]
    order = args.order if args.order is not None else cx.default_order()
    if args.what == "hstar":
        cp = hstar_from_subdivision(cx)
        lines, data = _class_lines(action, cp)
        _emit(args, {"command": "ehrhart", "what": "hstar", "status": "ok",
                     "elements": elements, "hstar": data}, lines)
        return EXIT_OK
    if args.what == "local-hstar":
        if cx.coarse_poset is None:
            raise InputProblem("local-hstar needs a complex with a coarse "
                               "face structure")
        cp = localhstar_via_localh(cx)
        lines, data = _class_lines(action, cp)
        _emit(args, {"command": "ehrhart", "what": "local-hstar",
                     "status": "ok", "elements": elements,
                     "local_hstar": data}, lines)
        return EXIT_OK
    if args.what == "series":
        lines = []
        table = []
        for cls in action.conjugacy_classes():
            rep = min(cls)
            series = ehr_series(cx, rep, order=order)
            counts = [series.coeff(m) for m in range(order + 1)]
            wid = action.element_id(rep)
            table.append([wid, [str(c) for c in counts]])
            lines.append(f"w{wid}: {','.join(str(c) for c in counts)}")
        _emit(args, {"command": "ehrhart", "what": "series", "status": "ok",
                     "order": order, "elements": elements, "series": table},
              lines)
        return EXIT_OK
    # reciprocity
    results = []
    for cls in action.conjugacy_classes():
        rep = min(cls)
        results.append((f"reciprocity w{action.element_id(rep)}",
                        reciprocity_check(cx, rep, order=order)))
    ok, lines, checks = _check_lines(results)
    _emit(args, {"command": "ehrhart", "what": "reciprocity",
                 "status": "ok" if ok else "fail", "order": order,
                 "elements": elements, "checks": checks}, lines)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="klspoly",
        description="Kazhdan-Lusztig-Stanley polynomials, subdivisions, "
                    "and equivariant Ehrhart series over exact arithmetic.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("check", help="validate a document")
    p.add_argument("path")
    add_format(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("kls", help="kernel solvers and h-polynomials")
    p.add_argument("path")
    p.add_argument("--kernel", default="eulerian",
                   help="'eulerian' or a kernel file path")
    p.add_argument("--what", required=True,
                   choices=("f", "g", "z", "h", "toric-h"))
    p.add_argument("--interval", nargs=2, type=int, metavar=("Z", "ZP"))
    p.add_argument("--all", action="store_true",
                   help="print every interval")
    add_format(p)
    p.set_defaults(func=cmd_kls)

    p = sub.add_parser("local", help="local invariants of a subdivision")
    p.add_argument("path")
    p.add_argument("--kernel", default="eulerian")
    p.add_argument("--equivariant", metavar="GROUP",
                   help="group document acting on the poset")
    p.add_argument("--relative-g", action="store_true",
                   help="print the relative g-polynomial of (poset, q)")
    p.add_argument("--all", action="store_true",
                   help="full tables instead of the top interval")
    add_format(p)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("paths", nargs="*",
                   help="documents to verify; bundled corpus when omitted")
    p.add_argument("--suite", default="all", choices=verify_mod.SUITES)
    p.add_argument("--kernel", default="eulerian")
    add_format(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ehrhart", help="equivariant lattice point counting")
    p.add_argument("path")
    p.add_argument("--what", required=True,
                   choices=("hstar", "local-hstar", "series", "reciprocity"))
    p.add_argument("--order", type=int, default=None,
                   help="truncation order (default 2(dim+1))")
    add_format(p)
    p.set_defaults(func=cmd_ehrhart)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputProblem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except schemas.DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GroupTooLarge, NotAutomorphism) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MirrorConstraintViolated as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (PosetError, SubdivisionError, ComplexError, FanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

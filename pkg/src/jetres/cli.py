"""Batch command-line front end.

One job per invocation; parameters come from a JSON job file (--job) and/or
command-line flags, results go to stdout and optionally to --out as a JSON
document.  Output is deterministic: keys are sorted, rationals are serialized
as num/den string pairs, and the only non-reproducible field is
elapsed_seconds, which sits at the top level so tools can drop it before
diffing.  Exit status is nonzero only for errors; negative mathematical
findings (a failed certificate, say) still exit 0.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction as Q
from typing import Any, Mapping, Sequence

from .exactalg import DPoly, HD_CTX, JetresError, MultiPoly, VarContext, truncate_h
from .ggl import (
    GGLConfig,
    ample_condition,
    assemble_intersection_from_tables,
    build_intersection_polynomial,
    estimate_checks,
    euler_characteristic,
    expansion_diagnostics,
    fujiwara_certificate,
    ggl_threshold_check,
)
from .localization import fibre_integral_fixed_points
from .polyparse import parse_poly, parse_residue_form
from .residue import (
    DEFAULT_TERM_CAP,
    ResidueForm,
    fibre_residue_integrand,
    hypersurface_integrand,
    integrate_over_X,
    residue_expand,
    residue_stepwise,
    tower_context,
)
from .tower import DEFAULT_POINT_CAP, enumerate_fixed_points

SCHEMA_VERSION = 1

COMMANDS = (
    "fibre-integral",
    "integral",
    "ggl",
    "diagnostics",
    "euler-char",
    "ample-check",
    "residue",
    "fixed-points",
)


class VerifyMismatchError(JetresError):
    code = "verify-mismatch"


def _q_doc(q: Q) -> dict[str, str]:
    return {"num": str(q.numerator), "den": str(q.denominator)}


def _dpoly_doc(p: DPoly) -> dict[str, Any]:
    return {
        "type": "dpoly",
        "variable": "d",
        "coefficients": [_q_doc(c) for c in p.coeffs],
        "text": p.to_text(),
    }


def _poly_doc(p: MultiPoly) -> dict[str, Any]:
    terms = []
    for e, c in p.sorted_terms():
        mono = {name: exp for name, exp in zip(p.ctx.names, e) if exp}
        terms.append({"monomial": mono, "coeff": _q_doc(c)})
    return {"type": "poly", "text": p.to_text(), "terms": terms}


def _parse_q(text: str | int) -> Q:
    if isinstance(text, int):
        return Q(text)
    return Q(text)


def _lambda_values(params: Mapping[str, Any], n: int) -> list[Q]:
    if "lambdas" in params and params["lambdas"] is not None:
        vals = [_parse_q(v) for v in params["lambdas"]]
        if len(vals) != n:
            raise JetresError(f"need {n} lambda values")
        return vals
    seed = int(params.get("lambda_seed", 1))
    import random

    rng = random.Random(seed)
    while True:
        vals = [Q(rng.randint(-60, 60), rng.randint(1, 13)) for _ in range(n)]
        if len(set(vals)) == n and all(vals):
            return vals


def _require(params: Mapping[str, Any], *names: str) -> None:
    missing = [x for x in names if params.get(x) is None]
    if missing:
        raise JetresError(f"missing parameters: {', '.join(missing)}")


def run_job(command: str, params: Mapping[str, Any]) -> dict[str, Any]:
    """Execute one job, returning the result document (without timing)."""
    verify = bool(params.get("verify"))
    max_terms = int(params.get("max_terms") or DEFAULT_TERM_CAP)
    point_cap = int(params.get("max_points") or DEFAULT_POINT_CAP)
    budgets: dict[str, Any] = {"max_terms": max_terms, "max_points": point_cap}
    result: dict[str, Any]
    verify_doc: dict[str, Any] | None = None

    if command == "fibre-integral":
        _require(params, "n", "k", "polynomial")
        n, k = int(params["n"]), int(params["k"])
        method = params.get("method", "fixed-point")
        ctx = tower_context(k)
        P = parse_poly(params["polynomial"], ctx)
        lams = _lambda_values(params, n)
        budgets["lambdas"] = [_q_doc(v) for v in lams]
        if method == "fixed-point":
            value = fibre_integral_fixed_points(n, k, P, lams, point_cap)
        elif method == "residue":
            value = residue_expand(fibre_residue_integrand(n, k, P, lams), max_terms)
        else:
            raise JetresError(f"unknown method {method!r}")
        if verify:
            other = (
                residue_expand(fibre_residue_integrand(n, k, P, lams), max_terms)
                if method == "fixed-point"
                else fibre_integral_fixed_points(n, k, P, lams, point_cap)
            )
            if other != value:
                raise VerifyMismatchError("fixed-point and residue methods disagree")
            verify_doc = {"method": "dual-route", "match": True}
        result = {"value": _poly_doc(value)}

    elif command == "integral":
        _require(params, "n", "k", "polynomial")
        n, k = int(params["n"]), int(params["k"])
        ctx = tower_context(k)
        P = parse_poly(params["polynomial"], ctx)
        form = hypersurface_integrand(n, k, P)
        value = integrate_over_X(truncate_h(residue_expand(form, max_terms).restrict(HD_CTX), n))
        if verify:
            other = integrate_over_X(
                truncate_h(residue_stepwise(form, max_terms).restrict(HD_CTX), n)
            )
            if other != value:
                raise VerifyMismatchError("expansion and stepwise residues disagree")
            verify_doc = {"method": "expand-vs-stepwise", "match": True}
        result = {
            "value": _dpoly_doc(value),
            "degree_matched": form.degree_matched,
        }

    elif command == "residue":
        _require(params, "form")
        zvars = params.get("zvars")
        if zvars is None:
            # infer z1..zk from the variables appearing in the form text
            import re as _re

            found = {int(m) for m in _re.findall(r"[uz](\d+)", params["form"])}
            kk = max(found) if found else 1
            zvars = [f"z{i}" for i in range(1, kk + 1)]
        ctx = VarContext(tuple(zvars) + ("h", "d"))
        numerator, factors = parse_residue_form(params["form"], ctx)
        form = ResidueForm(numerator, factors, zvars)
        value = residue_expand(form, max_terms)
        if verify:
            other = residue_stepwise(form, max_terms)
            if other != value:
                raise VerifyMismatchError("expansion and stepwise residues disagree")
            verify_doc = {"method": "expand-vs-stepwise", "match": True}
        result = {"value": _poly_doc(value.restrict(HD_CTX))}

    elif command == "fixed-points":
        _require(params, "n", "k")
        n, k = int(params["n"]), int(params["k"])
        points = enumerate_fixed_points(n, k, point_cap)
        result = {
            "count": len(points),
            "points": [[list(w.coeffs) for w in fp.weights] for fp in points],
        }

    elif command == "ggl":
        _require(params, "n")
        n = int(params["n"])
        if params.get("a") is not None:
            a = tuple(int(x) for x in params["a"])
            delta = _parse_q(params.get("delta", 0))
            k = int(params.get("k", len(a)))
            cfg = GGLConfig(n=n, k=k, a=a, delta=delta)
            I, p = build_intersection_polynomial(cfg, max_terms)
            bound = _parse_q(params["bound"]) if params.get("bound") is not None else 3 * n ** (8 * n)
            cert = fujiwara_certificate(p, bound)
            spots = [(int(2 * bound) + 1, I(int(2 * bound) + 1) > 0)]
            report_doc = {
                "intersection": _dpoly_doc(I),
                "p": _dpoly_doc(p),
                "bound": _q_doc(Q(bound)),
                "certificate": cert,
                "spot_checks": [{"d": dv, "positive": ok} for dv, ok in spots],
            }
        else:
            rep = ggl_threshold_check(n, max_terms)
            cfg = rep.config
            report_doc = {
                "config": {
                    "a": list(cfg.a),
                    "delta": _q_doc(cfg.delta),
                    "k": cfg.k,
                },
                "p": _dpoly_doc(rep.p),
                "bound": _q_doc(Q(rep.bound)),
                "certificate": rep.certificate,
                "positivity_threshold": 2 * rep.bound,
                "spot_checks": [{"d": dv, "positive": ok} for dv, ok in rep.spot_checks],
            }
            I, p = None, rep.p
        if verify:
            cfgv = cfg
            table = expansion_diagnostics(cfgv.n, defect_cap=4 * cfgv.n + 2, config=cfgv)
            assembled = assemble_intersection_from_tables(table)
            engine = build_intersection_polynomial(cfgv, max_terms)[0]
            if assembled != engine:
                raise VerifyMismatchError("table assembly and residue engine disagree")
            verify_doc = {"method": "coefficient-table-assembly", "match": True}
        result = report_doc

    elif command == "diagnostics":
        _require(params, "n")
        n = int(params["n"])
        defect_cap = int(params.get("defect_cap", 4))
        rep = estimate_checks(n, defect_cap)
        result = {
            "all_passed": rep.all_passed,
            "checks": [
                {"name": name, "passed": ok, "required": req, "details": details}
                for name, ok, req, details in rep.checks
            ],
        }

    elif command == "euler-char":
        _require(params, "n", "k", "a")
        n, k = int(params["n"]), int(params["k"])
        a = [int(x) for x in params["a"]]
        budget = params.get("budget")
        budget = int(budget) if budget is not None else None
        value = euler_characteristic(n, k, a, budget, max_terms)
        if verify:
            dim = n + k * (n - 1)
            base = budget if budget is not None else dim + n
            other = euler_characteristic(n, k, a, base + 2, max_terms)
            if other != value:
                raise VerifyMismatchError("Euler characteristic unstable under budget increase")
            verify_doc = {"method": "budget-stability", "match": True}
        budgets["budget"] = budget
        result = {"value": _dpoly_doc(value)}

    elif command == "ample-check":
        _require(params, "a")
        a = [int(x) for x in params["a"]]
        result = {"classification": ample_condition(a)}

    else:
        raise JetresError(f"unknown command {command!r}")

    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": _echo_params(params),
        "result": result,
        "budgets": budgets,
    }
    if verify_doc is not None:
        doc["verify"] = verify_doc
    return doc


def _echo_params(params: Mapping[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in sorted(params.items()) if v is not None and k != "out"}


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="jetres",
        description="Exact tautological intersection numbers on jet towers.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--job", help="JSON job file with parameters")
    ap.add_argument("--verify", action="store_true", help="run the dual method and compare")
    ap.add_argument("--max-points", type=int, help="fixed-point enumeration cap")
    ap.add_argument("--max-terms", type=int, help="sparse-term cap for residues")
    ap.add_argument("--budget", type=int, help="series truncation budget (euler-char)")
    ap.add_argument("--out", help="write the result document to this file")
    ap.add_argument("-n", type=int, dest="n")
    ap.add_argument("-k", type=int, dest="k")
    ap.add_argument("--polynomial", "-P", help="payload polynomial (u1..uk, h)")
    ap.add_argument("--form", help="residue form numerator/(factors)")
    ap.add_argument("--method", choices=("fixed-point", "residue"))
    ap.add_argument("--lambdas", help="comma-separated rational weight values")
    ap.add_argument("--lambda-seed", type=int, dest="lambda_seed")
    ap.add_argument("--a", help="comma-separated weight vector")
    ap.add_argument("--delta", help="twist parameter (rational)")
    ap.add_argument("--bound", help="certificate bound (rational)")
    ap.add_argument("--defect-cap", type=int, dest="defect_cap")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = _build_argparser()
    ns = ap.parse_args(argv)
    params: dict[str, Any] = {}
    if ns.job:
        try:
            with open(ns.job, "r", encoding="utf-8") as fh:
                job = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            _emit_error("validation", f"cannot read job file: {exc}", ns.out)
            return 2
        if job.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            _emit_error("validation", "unsupported schema_version", ns.out)
            return 2
        if "command" in job and job["command"] != ns.command:
            _emit_error("validation", "job command does not match CLI command", ns.out)
            return 2
        params.update(job.get("parameters", {}))
    for key in (
        "n",
        "k",
        "polynomial",
        "form",
        "method",
        "lambda_seed",
        "delta",
        "bound",
        "defect_cap",
        "budget",
    ):
        val = getattr(ns, key, None)
        if val is not None:
            params[key] = val
    if ns.lambdas:
        params["lambdas"] = [s.strip() for s in ns.lambdas.split(",")]
    if ns.a:
        params["a"] = [int(s) for s in ns.a.split(",")]
    if ns.verify:
        params["verify"] = True
    if ns.max_points is not None:
        params["max_points"] = ns.max_points
    if ns.max_terms is not None:
        params["max_terms"] = ns.max_terms

    start = time.monotonic()
    try:
        doc = run_job(ns.command, params)
    except JetresError as exc:
        _emit_error(getattr(exc, "code", "internal"), str(exc), ns.out)
        return 3
    except (ValueError, ZeroDivisionError) as exc:
        _emit_error("validation", str(exc), ns.out)
        return 2
    doc["elapsed_seconds"] = round(time.monotonic() - start, 6)
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return 0


def _emit_error(code: str, message: str, out: str | None) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "error": {"code": code, "message": message}}
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text, file=sys.stderr)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


if __name__ == "__main__":
    sys.exit(main())

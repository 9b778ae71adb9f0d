"""Command-line front end.

Every command prints one JSON document on stdout.  Exit codes: 0 for
success or a true verdict, 1 for a false verdict, 2 for usage and parse
errors, 3 for internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import numeric as nm
from . import prooflab
from .canonical import classify, specs_equivalent
from .errors import ClassifyError, NotTripleMorphism, SchemaError
from .numeric import EXACT, FLOAT, TolerancePolicy
from .supermaps import (
    ALL_FLAGS,
    CanonicalSpec,
    ScalarAuto,
    SuperMap,
    Variant,
    from_canonical,
    is_sym_triple_morphism,
    is_triple_morphism,
    random_canonical,
    spec_from_json,
    spec_to_json,
    supermap_from_json,
    supermap_to_json,
)

OK, FALSE, USAGE, INTERNAL = 0, 1, 2, 3
LAB_CHECKS = ("five-tripotents", "m2-search", "dim1", "additivity-chain", "jordan")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="triplekit", description="Jordan triple automorphisms of M_n(C).")
    ap.add_argument("--backend", choices=(EXACT, FLOAT), default=None,
                    help="arithmetic backend (default: exact for gen, the file's backend otherwise)")
    ap.add_argument("--rel-eps", type=float, default=1e-9, help="relative tolerance for the float backend")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a canonical map")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--c", type=int, choices=(1, -1))
    gen.add_argument("--variant", choices=[v.value for v in Variant])
    gen.add_argument("--scalar-auto", choices=[s.value for s in ScalarAuto])

    for name, text in (("verify", "check the triple law"), ("canon", "recover canonical parameters")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--in", dest="path", required=True, help="JSON file, or - for stdin")

    lab = sub.add_parser("lab", help="run a lab check")
    lab.add_argument("check", choices=LAB_CHECKS)
    lab.add_argument("--in", dest="path", help="map file (additivity-chain, jordan)")
    lab.add_argument("--seed", type=int)
    lab.add_argument("--trials", type=int, default=100_000)
    lab.add_argument("--size", type=int, default=4, help="number of tripotents (m2-search)")
    lab.add_argument("--samples", type=int, default=10_000)
    lab.add_argument("--pairs", type=int, default=50)

    sub.add_parser("version", help="print the package version")
    return ap


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_map(path: str, backend: str | None) -> tuple[SuperMap, CanonicalSpec | None]:
    """A bare SuperMap document or a ``{"spec", "supermap"}`` pair."""
    doc = _read_json(path)
    spec = None
    if isinstance(doc, dict) and "supermap" in doc:
        if "spec" in doc:
            spec = spec_from_json(doc["spec"])
        doc = doc["supermap"]
    phi = supermap_from_json(doc)
    if backend is not None and backend != phi.backend:
        phi = phi.to_backend(backend)
        if spec is not None:
            spec = CanonicalSpec(spec.c, spec.variant, spec.scalar_auto, spec.T.to_backend(backend))
    return phi, spec


def _emit(doc) -> None:
    print(json.dumps(doc))


def _gen(args, tol) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    backend = args.backend or EXACT
    spec = random_canonical(args.n, args.seed, backend)
    c = spec.c if args.c is None else args.c
    variant = args.variant or spec.variant
    auto = args.scalar_auto or spec.scalar_auto
    spec = CanonicalSpec(c, variant, auto, spec.T)
    _emit({"spec": spec_to_json(spec), "supermap": supermap_to_json(from_canonical(spec, tol))})
    return OK


def _verify(args, tol) -> int:
    phi, _ = _load_map(args.path, args.backend)
    verdict = is_triple_morphism(phi, tol)
    _emit({"check": "triple_law", "n": phi.n, "backend": phi.backend, "verdict": verdict,
           "sym_verdict": is_sym_triple_morphism(phi, tol)})
    return OK if verdict else FALSE


def _canon(args, tol) -> int:
    phi, spec = _load_map(args.path, args.backend)
    try:
        report = classify(phi, tol)
    except ClassifyError as exc:
        _emit({"error": type(exc).__name__, "step": exc.step, "message": str(exc)})
        return FALSE
    out = report.to_json()
    if spec is not None:
        out["matches_input_spec"] = specs_equivalent(report.spec, spec, tol)
    _emit(out)
    return OK


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"lab {args.check} needs --seed")
    return args.seed


def _lab(args, tol) -> int:
    backend = args.backend or EXACT
    check = args.check
    if check == "five-tripotents":
        mats = prooflab.five_tripotents(backend)
        table = prooflab.annihilation_table(mats, tol)
        score = prooflab.check_quadruple(mats, tol).value
        verdict = all(table["tripotent"]) and all(table["rank_one"]) and all(table["annihilating"].values())
        report = prooflab.lab_report(check, {"backend": backend}, verdict, table, score)
    elif check == "m2-search":
        seed = _need_seed(args)
        cand, score = prooflab.m2_quadruple_search(args.trials, seed, tol, size=args.size)
        verdict = score.value > prooflab.M2_SCORE_FLOOR
        params = {"trials": args.trials, "seed": seed, "size": args.size, "floor": prooflab.M2_SCORE_FLOOR}
        report = prooflab.lab_report(check, params, verdict, cand.to_json(), score.value)
    elif check == "dim1":
        seed = _need_seed(args)
        laws = prooflab.dim1_laws(args.samples, seed)
        verdict = laws["multiplicative"] and laws["additivity_witness"]["gap"] == 2
        report = prooflab.lab_report(check, {"samples": args.samples, "seed": seed}, verdict, laws)
    else:
        if args.path is None:
            raise UsageError(f"lab {check} needs --in")
        phi, _ = _load_map(args.path, args.backend)
        if check == "jordan":
            verdict = prooflab.jordan_implies_triple_check(phi, tol)
            report = prooflab.lab_report(check, {"n": phi.n}, verdict)
        else:
            seed = _need_seed(args)
            rng = np.random.default_rng(seed)
            verdict, broken = True, None
            for k in range(args.pairs):
                a = nm.random_matrix(phi.n, rng, phi.backend)
                b = nm.random_matrix(phi.n, rng, phi.backend)
                try:
                    res = prooflab.additivity_chain(phi, a, b, tol)
                except NotTripleMorphism as exc:
                    # precondition failure is reported as a false verdict
                    verdict, broken = False, {"error": type(exc).__name__, "message": str(exc)}
                    break
                if not res["holds"]:
                    verdict, broken = False, {"pair": k, **res}
                    break
            report = prooflab.lab_report(check, {"n": phi.n, "pairs": args.pairs, "seed": seed}, verdict, broken)
    _emit(report)
    return OK if report["verdict"] else FALSE


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.rel_eps > 0:
            raise UsageError("--rel-eps must be positive")
        tol = TolerancePolicy(rel_eps=args.rel_eps)
        if args.command == "version":
            _emit({"version": __version__})
            return OK
        handler = {"gen": _gen, "verify": _verify, "canon": _canon, "lab": _lab}[args.command]
        return handler(args, tol)
    except (UsageError, SchemaError) as exc:
        print(f"triplekit: {exc}", file=sys.stderr)
        return USAGE
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else OK
    except Exception as exc:  # noqa: BLE001
        print(f"triplekit: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL


def main(argv=None) -> None:
    sys.exit(run(argv))


__all__ = ["ALL_FLAGS", "build_parser", "main", "run"]

"""Command-line front end.

Exit status: 0 when every check passes, 1 on a verification failure, 2 on a
usage or input error.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import braid as bc
from .fusion import (
    FusionSystem,
    TwistSolveError,
    load,
    ribbon_residual,
    solve_twists,
    transparent_labels,
    validate,
)
from .models import ALIASES, load_model
from .state_space import (
    SpectrumError,
    braid_map,
    build_basis,
    enumerate_shapes,
    left_comb,
    shape_str,
    superselection_spectrum,
    uniqueness_search,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GREEK = {"σ": "sigma", "ψ": "psi", "τ": "tau"}


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    # adding 0.0 turns a negative zero into zero
    return f"{x + 0.0:.12g}"


def fmt_c(z: complex) -> str:
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}i"


def resolve_model(spec: str, tol: float | None) -> FusionSystem:
    path = Path(spec)
    try:
        if path.is_file():
            model = load(path)
        elif path.stem.lower() in ALIASES:
            model = load_model(path.stem)
        else:
            raise UsageError(f"no model file or bundled model named {spec!r}")
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load model {spec!r}: {exc}") from exc
    if tol is not None:
        model = model.replace(tol=tol)
    return model


def parse_leaves(text: str | None, model: FusionSystem) -> list[str]:
    if not text:
        raise UsageError("--leaves is required")
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        tok = GREEK.get(tok, tok)
        if tok not in model.labels:
            raise UsageError(f"unknown label {tok!r}; model has {list(model.labels)}")
        out.append(tok)
    return out


def _need(args, *names):
    for n in names:
        if getattr(args, n.replace("-", "_")) is None:
            raise UsageError(f"--{n} is required for '{args.verb}'")


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=1, ensure_ascii=False))
    else:
        print("\n".join(lines))


# -- verbs -------------------------------------------------------------------


def cmd_validate(args) -> int:
    _need(args, "model")
    model = resolve_model(args.model, args.tol)
    rep = validate(model)
    lines = [f"model {model.name or args.model}: {len(model.labels)} labels, tol {fmt(model.tol)}"]
    for c in rep.checks:
        extra = f"  residual {fmt(c.residual)}" if c.residual else ""
        detail = f"  ({c.detail})" if c.detail and not c.passed else ""
        lines.append(f"  {'PASS' if c.passed else 'FAIL'}  {c.name}{extra}{detail}")
    lines.append("valid" if rep.passed else "INVALID")
    _emit(args, rep.to_dict(), lines)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_identities(args) -> int:
    n = args.n if args.n is not None else bc.MAX_IDENTITY_N
    if n < 1:
        raise UsageError("--n must be at least 1")
    results = {}
    for name, (n_min, _) in bc.IDENTITIES.items():
        if n >= n_min:
            results[name] = bool(bc.verify_identity(name, n))
    ok = all(results.values())
    lines = [f"  {'PASS' if v else 'FAIL'}  {k}" for k, v in results.items()]
    lines.append(f"{sum(results.values())}/{len(results)} identities hold at n={n}")
    _emit(args, {"n": n, "passed": ok, "identities": results}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_spectrum(args) -> int:
    _need(args, "model")
    model = resolve_model(args.model, args.tol)
    leaves = parse_leaves(args.leaves, model)
    basis = build_basis(model, left_comb(len(leaves)), leaves)
    try:
        phases = superselection_spectrum(model, basis)
    except SpectrumError as exc:
        _emit(args, {"passed": False, "error": str(exc)}, [f"FAIL  {exc}"])
        return EXIT_FAIL
    order = {q: i for i, q in enumerate(model.labels)}
    rows = sorted(phases.items(), key=lambda kv: order[kv[0]])
    lines = [f"leaves {','.join(leaves)}", f"  {'Q':<8} {'dim':>4}  phase                              arg/pi"]
    payload = {"leaves": leaves, "passed": True, "sectors": []}
    for q, z in rows:
        dim = len(basis.vectors[basis.charge_ranges[q]])
        arg = cmath.phase(z) / math.pi
        lines.append(f"  {q:<8} {dim:>4}  {fmt_c(z):<34} {fmt(arg)}")
        payload["sectors"].append({"charge": q, "dim": dim, "phase": [z.real, z.imag], "arg_over_pi": arg})
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_twists(args) -> int:
    _need(args, "model")
    model = resolve_model(args.model, args.tol)
    try:
        th = solve_twists(model)
    except TwistSolveError as exc:
        _emit(args, {"passed": False, "error": str(exc)}, [f"FAIL  {exc}"])
        return EXIT_FAIL
    res = ribbon_residual(model, th.theta)
    lines = [f"  theta_{q:<8} {fmt_c(th[q])}   arg/pi {fmt(cmath.phase(th[q]) / math.pi)}" for q in model.labels]
    transparent = sorted(transparent_labels(model), key=model.labels.index)
    lines.append(f"ribbon residual {fmt(res)}; transparent labels {transparent}")
    payload = {
        "theta": {q: [th[q].real, th[q].imag] for q in model.labels},
        "ribbon_residual": res,
        "transparent": transparent,
        "passed": res <= model.tol,
    }
    _emit(args, payload, lines)
    return EXIT_OK if res <= model.tol else EXIT_FAIL


def cmd_braid_act(args) -> int:
    _need(args, "model", "word")
    model = resolve_model(args.model, args.tol)
    leaves = parse_leaves(args.leaves, model)
    try:
        w = bc.BraidWord.parse(args.word, len(leaves))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    basis = build_basis(model, left_comb(len(leaves)), leaves)
    M = braid_map(model, basis, w)
    unit, cross = M.unitarity_residual(), M.cross_block_residual()
    ok = unit <= model.tol and cross <= model.tol
    payload = M.to_dict()
    payload.update({"word": str(w), "unitarity_residual": unit, "cross_block_residual": cross, "passed": ok})
    lines = [f"word {w} on leaves {','.join(leaves)}: {len(M.source)} -> {len(M.target)}"]
    lines.append("source: " + "; ".join(str(t) for t in M.source.vectors))
    lines.append("target: " + "; ".join(str(t) for t in M.target.vectors))
    for row in M.matrix:
        lines.append("  " + "  ".join(fmt_c(z) for z in row))
    lines.append(f"unitarity residual {fmt(unit)}, cross-charge residual {fmt(cross)}")
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_trees(args) -> int:
    if args.leaves and args.model:
        model = resolve_model(args.model, args.tol)
        leaves = parse_leaves(args.leaves, model)
        out = {}
        lines = []
        for s in enumerate_shapes(len(leaves)):
            b = build_basis(model, s, leaves)
            out[shape_str(s)] = [str(t) for t in b.vectors]
            lines.append(f"{shape_str(s)}: {len(b)} trees")
            lines += [f"  {t}" for t in b.vectors]
        _emit(args, {"leaves": leaves, "bases": out}, lines)
        return EXIT_OK
    _need(args, "n")
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    shapes = enumerate_shapes(args.n)
    catalan = math.comb(2 * args.n - 2, args.n - 1) // args.n
    ok = len(shapes) == catalan
    lines = [shape_str(s) for s in shapes] + [f"{len(shapes)} shapes (Catalan C_{args.n - 1} = {catalan})"]
    _emit(args, {"n": args.n, "count": len(shapes), "catalan": catalan, "shapes": [shape_str(s) for s in shapes]}, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_uniqueness(args) -> int:
    n = args.n if args.n is not None else 3
    max_len = args.max_len if args.max_len is not None else n * (n - 1) // 2 + 1
    names = args.model.split(",") if args.model else ["fibonacci", "ising"]
    systems = [resolve_model(m.strip(), args.tol) for m in names]
    try:
        found = uniqueness_search(systems, n, max_len)
    except OverflowError as exc:
        raise UsageError(str(exc)) from exc
    expected = {bc.canonical_word(bc.beta(n)), bc.canonical_word(bc.invert(bc.beta(n)))}
    if max_len < n * (n - 1) // 2:
        expected = set()
    ok = found == expected
    words = sorted(str(w) for w in found)
    lines = [f"  {w}" for w in words] + [
        f"{len(found)} sector-resolving primitive braid(s) for n={n}, length <= {max_len}"
        + ("" if ok else "; expected exactly the superselection braid and its inverse")
    ]
    _emit(args, {"n": n, "max_len": max_len, "words": words, "passed": ok}, lines)
    return EXIT_OK if ok else EXIT_FAIL


VERBS = {
    "validate": cmd_validate,
    "identities": cmd_identities,
    "spectrum": cmd_spectrum,
    "twists": cmd_twists,
    "braid-act": cmd_braid_act,
    "trees": cmd_trees,
    "uniqueness": cmd_uniqueness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="braidsector", description="Superselection braids on anyon fusion spaces.")
    parser.add_argument("verb", choices=sorted(VERBS))
    parser.add_argument("--model", help="model JSON path or bundled name (fib, ising, toric, semion, trivial, z2boson)")
    parser.add_argument("--leaves", help="comma-separated leaf labels")
    parser.add_argument("--n", type=int)
    parser.add_argument("--word", help="braid word such as \"s1 s2 s1'\"")
    parser.add_argument("--max-len", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--json", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return VERBS[args.verb](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


def run(argv: Sequence[str]) -> int:
    return main(list(argv))


if __name__ == "__main__":
    raise SystemExit(main())

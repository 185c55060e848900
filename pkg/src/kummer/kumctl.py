"""kumctl: build, persist and verify universal Kummer equations.

Machine-readable JSON goes to stdout, human summaries to stderr.  All
randomness comes from --seed flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .bundle import (
    BundleError,
    EquationBundle,
    kernel_bundle,
    load,
    load_manifest,
    save,
    schottky_json,
)
from .igusakern import STRATEGIES, BudgetExceeded, in_span, kernel, matrix_estimate
from .linalg import ReconstructionError

log = logging.getLogger("kumctl")

# (genus -> largest degree run without --allow-long)
BUDGET = {1: 8, 2: 8, 3: 4, 4: 4}
# pairs that always need --allow-long, whatever the degree
LONG_RUNS = {(4, "modular_reconstruct")}


class UsageError(Exception):
    pass


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")
    sys.stdout.flush()


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _writable(path: str) -> Path:
    p = Path(path)
    if not p.parent.exists() or not p.parent.is_dir():
        raise UsageError(f"cannot write {path}: directory does not exist")
    return p


# ---------------------------------------------------------------------------
# basis
# ---------------------------------------------------------------------------


def basis_bundle(genus: int, family: str) -> EquationBundle:
    from .heis import even_quadrics, heisenberg_basis, lifted_basis

    if family in ("pT", "quadrics") and not 1 <= genus <= 4:
        raise UsageError("--genus must be between 1 and 4 for this family")
    if family == "lifted" and not 1 <= genus <= 3:
        raise UsageError("--genus (the source genus) must be between 1 and 3 for lifted quartics")
    if family == "pT":
        b = heisenberg_basis(genus)
        return EquationBundle("pT_basis", genus, b.polynomials, b.labels(), degree=4,
                              provenance={"family": "pT"})
    if family == "quadrics":
        from .f2lin import characteristic_label

        q = even_quadrics(genus)
        return EquationBundle("quadrics", genus, [p for _, p in q],
                              [f"Q[{characteristic_label(e, f, genus)}]" for (e, f), _ in q],
                              degree=2, provenance={"family": "quadrics"})
    b = lifted_basis(genus)
    return EquationBundle("pT_basis", genus + 1, b.polynomials, b.labels(), degree=4,
                          provenance={"family": "lifted", "source_genus": genus,
                                      "character": b.character.to_json()})


def cmd_basis(args) -> int:
    out = _writable(args.out)
    b = basis_bundle(args.genus, args.family)
    save(b, out)
    _emit({"command": "basis", "count": len(b), "labels": list(b.labels),
           "content_hash": b.content_hash, "out": str(out)})
    _say(f"{len(b)} polynomials ({args.family}, genus {args.genus}) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------


def check_budget(genus: int, degree: int, strategy: str, allow_long: bool) -> None:
    if allow_long:
        return
    cap = BUDGET.get(genus)
    if cap is None or degree > cap or (genus, strategy) in LONG_RUNS:
        est = matrix_estimate(genus, degree) if genus <= 6 else {}
        raise BudgetExceeded(
            f"(genus={genus}, degree={degree}, strategy={strategy}) is outside the default "
            "budget; rerun with --allow-long", est)


def compute_kernel(args):
    check_budget(args.genus, args.degree, args.strategy, args.allow_long)
    strategy = args.strategy
    kw = {"seed": args.seed, "threads": args.threads, "allow_long": args.allow_long}
    if args.prime is not None:
        kw["prime"] = args.prime
    return kernel(args.genus, args.degree, strategy, **kw)


def cmd_kernel(args) -> int:
    out = _writable(args.out)
    t0 = time.perf_counter()
    kern = compute_kernel(args)
    b, manifest = kernel_bundle(kern, seed=args.seed)
    save(b, out, manifest)
    _emit({"command": "kernel", "genus": kern.genus, "degree": kern.degree,
           "dimension": kern.dimension, "strategy": kern.strategy,
           "primes": [str(p) for p in kern.primes], "verified": kern.verified,
           "content_hash": b.content_hash, "out": str(out),
           "seconds": round(time.perf_counter() - t0, 3)})
    _say(f"kernel g={kern.genus} d={kern.degree}: dimension {kern.dimension} "
         f"({kern.strategy}{', verified' if kern.verified else ''}) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# lift
# ---------------------------------------------------------------------------


def _verified_kernel(path: str) -> EquationBundle:
    b = load(path)
    m = load_manifest(path)
    if b.construction != "kernel":
        raise UsageError(f"{path} is not a kernel bundle")
    if m is None or not m.get("verified") or m.get("content_hash") != b.content_hash:
        raise UsageError(f"{path} is not a verified kernel (missing or unverified manifest)")
    return b


def lift_bundle(src: EquationBundle, kind: str) -> EquationBundle:
    from .lift import f_r, moduli_equation, tilde_lift_kummer

    g = src.genus
    prov = {"source": src.content_hash, "kind": kind}
    if kind == "kummer":
        eqs = [f_r(R, g) for R in src.polynomials]
        bideg = eqs[0].bidegree if eqs else None
        return EquationBundle("f_r", g, [e.poly for e in eqs], src.labels, bidegree=bideg,
                              provenance=prov)
    if kind == "nonheis":
        eqs = [tilde_lift_kummer(R, g) for R in src.polynomials]
        bideg = eqs[0].bidegree if eqs else None
        return EquationBundle("tilde_lift", g + 1, [e.poly for e in eqs], src.labels,
                              bidegree=bideg, provenance=dict(prov, source_genus=g))
    if kind == "moduli":
        polys = [moduli_equation(R, g) for R in src.polynomials]
        deg = polys[0].degree() if polys else None
        return EquationBundle("moduli", g + 1, polys, src.labels, degree=deg,
                              provenance=dict(prov, source_genus=g))
    raise UsageError(f"unknown lift kind {kind!r}")


def cmd_lift(args) -> int:
    out = _writable(args.out)
    src = _verified_kernel(args.input)
    if args.kind == "schottky":
        from .data import igusa_quartic
        from .lift import schottky_build

        if src.genus != 2 or len(src) != 1 or not in_span(igusa_quartic(), list(src.polynomials)):
            raise UsageError("--kind schottky needs the genus-2 quartic kernel")
        data = schottky_build()
        blob = schottky_json(data)
        if out.exists() and out.read_bytes() != blob:
            raise BundleError(f"{out} exists with different contents")
        out.write_bytes(blob)
        h = json.loads(blob)["content_hash"]
        _emit({"command": "lift", "kind": "schottky", "count": len(data.quadratic_expressions),
               "characteristics": len(data.characteristics), "fbar8_terms": len(data.fbar8),
               "content_hash": h, "out": str(out)})
        _say(f"Schottky data: {len(data.fbar8)} terms in fbar8 -> {out}")
        return 0
    if args.kind == "nonheis" and src.genus > 3:
        raise UsageError("--kind nonheis needs a kernel of genus at most 3")
    if args.kind == "moduli" and src.genus > 3:
        raise UsageError("--kind moduli needs a kernel of genus at most 3")
    b = lift_bundle(src, args.kind)
    save(b, out)
    _emit({"command": "lift", "kind": args.kind, "count": len(b), "genus": b.genus,
           "degree": b.degree, "bidegree": list(b.bidegree) if b.bidegree else None,
           "nvars": b.polynomials[0].ring.nvars if len(b) else 0,
           "content_hash": b.content_hash, "out": str(out)})
    _say(f"{len(b)} {args.kind} equations -> {out}")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .checks import run_suite

    report = run_suite(args.suite, args.genus, trials=args.trials, seed=args.seed,
                       precision=args.precision, tol=args.tol)
    lines = report.to_jsonl()
    if args.out:
        _writable(args.out).write_text(lines, "utf-8")
    sys.stdout.write(lines)
    s = report.summary()
    _say(f"{s['suite']}: {s['passed']}/{s['total']} checks passed")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    result: dict = {"command": "bench", "task": args.task, "genus": args.genus,
                    "threads": args.threads}
    if args.task == "matrix_build":
        from .igusakern import blocks, build_matrix

        if args.genus >= 4:
            est = matrix_estimate(args.genus, args.degree)
            blk = blocks(args.genus, args.degree)
            result.update(columns=est["columns"], blocks=len(blk),
                          largest_block=max(len(v) for v in blk.values()))
        else:
            m = build_matrix(args.genus, args.degree)
            result.update(columns=m.ncols, rows=m.nrows)
    elif args.task == "kernel":
        check_budget(args.genus, args.degree, args.strategy, args.allow_long)
        kern = kernel(args.genus, args.degree, args.strategy, seed=args.seed,
                      threads=args.threads, allow_long=args.allow_long)
        b, _ = kernel_bundle(kern, seed=args.seed)
        result.update(degree=args.degree, dimension=kern.dimension, content_hash=b.content_hash)
    else:
        from .thetanum import sample_tau, theta_constants_all

        g = args.genus
        prec = args.precision or 160
        tau = sample_tau(g, args.seed)
        if g == 4:
            from .lift import sj_characteristics

            eps = sorted({a[0] for a, _ in sj_characteristics()})
            consts = theta_constants_all(tau, prec, eps)
            result.update(products=len(sj_characteristics()))
        else:
            consts = theta_constants_all(tau, prec)
        result.update(precision=prec, constants=len(consts))
    result["seconds"] = round(time.perf_counter() - t0, 3)
    _emit(result)
    _say(f"bench {args.task} g={args.genus}: {result['seconds']} s")
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kumctl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="write a basis of quartics or quadrics")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--family", choices=["pT", "quadrics", "lifted"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("kernel", help="compute ker x* in one degree")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default=None,
                   help="default: exact for g <= 3, modular_only for g >= 4")
    p.add_argument("--out", required=True)
    p.add_argument("--prime", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--allow-long", action="store_true")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("lift", help="derive equations from a verified kernel bundle")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", choices=["kummer", "nonheis", "moduli", "schottky"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=["symbolic", "numeric", "all"], required=True)
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time a computation")
    p.add_argument("--task", choices=["matrix_build", "kernel", "theta"], required=True)
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--strategy", choices=STRATEGIES, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision", type=int, default=None)
    p.add_argument("--allow-long", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "strategy", "x") is None:
        args.strategy = "modular_only" if args.genus >= 4 else "exact"
    try:
        return args.func(args)
    except (UsageError, BundleError, ReconstructionError, ValueError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        _say(f"error: {exc}")
        return 2
    except BudgetExceeded as exc:
        _emit({"error": "BudgetExceeded", "message": str(exc), "estimate": exc.estimate})
        _say(f"error: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())

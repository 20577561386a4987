"""Command-line interface: analyze, generate, verify, degradation.

Exit codes: 0 = success / certified, 2 = rejected (violation witness or
exhausted search) or failed verification suite, 1 = usage, I/O or
validation errors.  ``OPMOD_SEED`` overrides the default seed when no
``--seed`` flag is given.  A single ``--tol`` flag rescales every internal
tolerance proportionally from the documented defaults.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analysis import (
    AnalysisReport,
    VERDICT_CERTIFIED,
    analyze_bundle,
    degradation_table,
    dumps_report,
)
from .errors import OpmodError
from .instances import (
    GALLERY_NAMES,
    dumps_instance,
    gallery,
    gen_adversarial,
    gen_algebra,
    gen_module,
    gen_perturbed,
    gen_planted_preserver,
    load_instance,
)
from .suites import SUITE_NAMES, run_suite
from .tolerances import DEFAULT_TOLERANCES

__all__ = ["main"]


def _default_seed() -> int:
    try:
        return int(os.environ.get("OPMOD_SEED", "0"))
    except ValueError:
        return 0


def _profile(tol: float | None):
    if tol is None:
        return DEFAULT_TOLERANCES
    return DEFAULT_TOLERANCES.with_certification(tol)


def _sig6(x: float) -> str:
    return format(float(x), ".6g")


def _print_matrix_blocks(blocks, indent: str = "    ", file=sys.stdout) -> None:
    for b, m in enumerate(blocks):
        arr = np.array([[complex(v[0], v[1]) for v in row] for row in m])
        print(f"{indent}block {b}:", file=file)
        for row in arr:
            cells = ", ".join(
                f"{_sig6(v.real)}{'+' if v.imag >= 0 else '-'}{_sig6(abs(v.imag))}j"
                for v in row
            )
            print(f"{indent}  [{cells}]", file=file)


def _print_human_report(report: AnalysisReport, file=sys.stdout) -> None:
    print(f"verdict: {report.verdict}", file=file)
    print(f"map norm^2: {_sig6(report.norms['map_norm_sq'])}", file=file)
    if report.certificate is not None:
        cert = report.certificate
        print("witness (central positive, per-block scalars):", file=file)
        print(f"    support blocks: {cert['support']}", file=file)
        print(f"    scalars: [{', '.join(_sig6(s) for s in cert['scalars'])}]", file=file)
        print(f"    residual: {_sig6(cert['residual'])}", file=file)
        print(f"witness norm: {_sig6(report.norms['witness_norm'])}", file=file)
        print(f"fresh-sample residual: {_sig6(report.residuals['fresh_samples'])}", file=file)
        dec = report.decomposition
        print("factorization:", file=file)
        print(f"    kernel dim: {dec['kernel_dim']}", file=file)
        print(f"    isometry residual: {_sig6(dec['isometry_residual'])}", file=file)
        print(f"    factorization residual: {_sig6(dec['factorization_residual'])}", file=file)
        print(f"    image support: {dec['image_support']}", file=file)
        inj = report.injectivity
        print(f"injectivity: kernel dim {inj['kernel_dim']}, injective={inj['injective']}", file=file)
        link = report.linking
        print("linking identities (worst residuals):", file=file)
        for key in (
            "flat_vs_componentwise",
            "twisted_product_identity",
            "multiplicative_extension_law",
            "involutive_extension_law",
            "embedding_intertwine",
        ):
            print(f"    {key}: {_sig6(link[key])}", file=file)
    if report.rejection is not None:
        rej = report.rejection
        print(f"rejection residual: {_sig6(rej['residual'])} (scale {_sig6(rej['scale'])})", file=file)
        for reason in rej["reasons"]:
            print(f"    {reason}", file=file)
    if report.violation is not None:
        vio = report.violation
        print("violating pair found:", file=file)
        print(f"    magnitude: {_sig6(vio['magnitude'])}", file=file)
        print(
            f"    orthogonality residual: {_sig6(vio['orthogonality_residual'])}",
            file=file,
        )
        print("  x =", file=file)
        _print_matrix_blocks(vio["x"], file=file)
        print("  y =", file=file)
        _print_matrix_blocks(vio["y"], file=file)
    if report.search is not None:
        s = report.search
        print(
            f"search exhausted after {s['trials']} trials "
            f"(sup restricted norm {_sig6(s['sup_restricted_norm'])})",
            file=file,
        )
    print(f"time: {_sig6(report.timing['total_s'])} s", file=file)


def _cmd_analyze(args) -> int:
    profile = _profile(args.tol)
    bundle = load_instance(args.input, profile)
    report = analyze_bundle(
        bundle,
        tol=args.tol,
        budget=args.budget,
        seed=args.seed,
        samples=args.samples,
        profile=profile,
    )
    if args.format == "machine":
        text = dumps_report(report)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                f.write(text)
        else:
            sys.stdout.write(text)
    else:
        out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
        try:
            _print_human_report(report, file=out)
        finally:
            if args.out:
                out.close()
    return 0 if report.verdict == VERDICT_CERTIFIED else 2


def _cmd_generate(args) -> int:
    kind = args.kind
    seed = args.seed
    if kind.startswith("gallery:"):
        bundle = gallery(kind.split(":", 1)[1])
    else:
        alg = gen_algebra(seed, args.max_blocks, args.max_dim)
        rng = np.random.Generator(np.random.PCG64(seed + 1))
        domain = gen_module(rng, alg, args.generators)
        min_ranks = tuple(
            min(domain.block_rank(b), args.cogenerators * nb)
            for b, nb in enumerate(alg.blocks)
        )
        codomain = gen_module(rng, alg, args.cogenerators, min_ranks=min_ranks)
        if kind == "planted":
            bundle = gen_planted_preserver(seed, domain, codomain)
        elif kind == "adversarial":
            bundle = gen_adversarial(seed, domain, codomain)
        elif kind == "perturbed":
            bundle = gen_perturbed(seed, domain, codomain, args.magnitude)
        else:
            raise OpmodError(f"unknown kind {kind!r}")
    text = dumps_instance(bundle)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(text)
    print(f"wrote {args.out}")
    print(f"provenance: {bundle.provenance}")
    print(f"algebra blocks: {list(bundle.algebra.blocks)}")
    print(
        f"domain: {bundle.domain.n} generators, complex dim {bundle.domain.complex_dim}; "
        f"codomain: {bundle.codomain.n} generators, complex dim {bundle.codomain.complex_dim}"
    )
    if bundle.domain.has_trivial_orthogonality():
        print(
            "note: the domain has trivial orthogonality "
            "(every supported block has rank one), so every module map certifies"
        )
    return 0


def _cmd_verify(args) -> int:
    profile = _profile(args.tol)
    checks = run_suite(args.suite, seed=args.seed, samples=args.samples, profile=profile)
    width = max(len(c.name) for c in checks)
    ok = True
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"[{status}] {c.name.ljust(width)}  worst={_sig6(c.worst)}  bound={_sig6(c.threshold)}"
        if c.detail:
            line += f"  ({c.detail})"
        print(line)
        ok = ok and c.passed
    print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return 0 if ok else 2


def _cmd_degradation(args) -> int:
    sizes = [int(s) for s in args.n_list.split(",") if s.strip()]
    if not sizes:
        raise OpmodError("empty grid-size list")
    rows = degradation_table(sizes, args.gallery, _profile(args.tol))
    lines = ["N  inverse_root_norm  certification_residual  unitary_residual"]
    for r in rows:
        lines.append(
            f"{r.grid_size}  {_sig6(r.inverse_root_norm)}  "
            f"{_sig6(r.certification_residual)}  {_sig6(r.unitary_residual)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opmod",
        description=(
            "Certify orthogonality-preserving module maps over finite-dimensional "
            "C*-algebras, factor them through central scalings, and verify the "
            "linking-algebra extension identities."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed_default = _default_seed()

    p = sub.add_parser("analyze", help="decide one instance file and report")
    p.add_argument("--input", required=True, help="instance document to analyze")
    p.add_argument("--tol", type=float, default=None, help="certification tolerance")
    p.add_argument("--budget", type=int, default=200, help="violation-search trials")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--samples", type=int, default=64, help="fresh-sample count")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("human", "machine"), default="human")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("generate", help="write an instance file")
    p.add_argument(
        "--kind",
        required=True,
        help=(
            "planted | adversarial | perturbed | gallery:<name>; gallery names: "
            + ", ".join(GALLERY_NAMES)
        ),
    )
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--out", required=True)
    p.add_argument("--max-blocks", type=int, default=3, help="shape bound for random algebras")
    p.add_argument("--max-dim", type=int, default=4, help="largest matrix block size")
    p.add_argument("--generators", type=int, default=2, help="domain module generators")
    p.add_argument("--cogenerators", type=int, default=2, help="codomain module generators")
    p.add_argument("--magnitude", type=float, default=1e-2, help="perturbation size")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("verify", help="run a seeded invariant suite")
    p.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("degradation", help="scaling study over interval discretizations")
    p.add_argument("--gallery", default="interval-C0-halfopen")
    p.add_argument("--N-list", dest="n_list", default="4,8,16,32")
    p.add_argument("--out", default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_degradation)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OpmodError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

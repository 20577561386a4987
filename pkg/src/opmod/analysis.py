"""End-to-end analysis of an instance and the report document.

``analyze_bundle`` runs witness extraction; on success it adds the isometric
factorization, the ideal and injectivity diagnostics and a batch of
linking-identity residuals; on failure it searches for a violating pair.
Reports are plain-data objects that serialize to the same strict document
format as instances (verdicts and values are deterministic given the seed;
the timing field is informational only).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalInconsistencyError, ValidationError
from .instances import InstanceBundle, gallery
from .linking import PreserverExtension
from .modules import random_element
from .preserver import (
    NotPreserver,
    PreserverCertificate,
    SearchExhausted,
    ViolationWitness,
    bijective_analysis,
    decompose,
    extract_witness,
    find_violating_pair,
    image_ideal_check,
    injectivity_analysis,
    verify_certificate,
)
from .serialize import (
    SCHEMA_VERSION,
    check_keys,
    emit_document,
    encode_blocks,
    expect_schema,
    parse_document,
)
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "AnalysisReport",
    "analyze_bundle",
    "linking_residuals",
    "degradation_table",
    "DegradationRow",
    "report_to_document",
    "report_from_document",
    "dumps_report",
    "loads_report",
    "save_report",
    "load_report",
]

VERDICT_CERTIFIED = "certified"
VERDICT_REJECTED = "rejected"
VERDICT_EXHAUSTED = "exhausted-search"


@dataclass(frozen=True)
class AnalysisReport:
    """Verdict plus every diagnostic, in document-ready plain data."""

    verdict: str
    certificate: dict | None
    rejection: dict | None
    violation: dict | None
    search: dict | None
    residuals: dict
    norms: dict
    decomposition: dict | None
    ideals: dict | None
    injectivity: dict | None
    linking: dict | None
    timing: dict = field(compare=False)


def linking_residuals(
    phi,
    cert: PreserverCertificate,
    pairs: int = 16,
    seed: int = 0,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> dict:
    """Worst residuals of the corner-extension identities over random pairs."""
    ext = PreserverExtension(phi, cert, profile)
    dom = ext.domain_linking
    rng = np.random.Generator(np.random.PCG64(seed))

    flat_vs_componentwise = 0.0
    star_compat = 0.0
    twisted_product = 0.0
    multiplicative_law = 0.0
    involutive_law = 0.0
    intertwine = 0.0
    for _ in range(pairs):
        c = dom.random_element(rng)
        d = dom.random_element(rng)
        flat_vs_componentwise = max(
            flat_vs_componentwise, (c.mul(d) - c.mul_flat(d)).norm()
        )
        star_compat = max(
            star_compat,
            (ext.corner_map(c.adjoint()) - ext.corner_map(c).adjoint()).norm(),
        )
        lhs = ext.corner_map(c).mul(ext.witness_multiplier.apply(ext.corner_map(d), "left"))
        rhs = ext.product_multiplier.apply(ext.corner_map(c.mul(d)), "left")
        twisted_product = max(twisted_product, (lhs - rhs).norm())

        g_c, d_c = ext.extension_pair(c)
        g_d, d_d = ext.extension_pair(d)
        g_cd, _ = ext.extension_pair(c.mul(d))
        multiplicative_law = max(
            multiplicative_law,
            (g_c.mul(g_d) - ext.product_multiplier.apply(g_cd, "left")).norm(),
        )
        _, d_cstar_d = ext.extension_pair(c.adjoint().mul(d))
        involutive_law = max(
            involutive_law,
            (d_c.adjoint().mul(d_d) - ext.mixed_multiplier.apply(d_cstar_d, "left")).norm(),
        )

        x = random_element(phi.domain, rng)
        g_j, d_j = ext.extension_pair(dom.embed(x))
        j_img = ext.image_linking.embed(ext.phi0(x))
        intertwine = max(
            intertwine, (g_j - j_img).norm(), (d_j - j_img).norm()
        )

    return {
        "flat_vs_componentwise": flat_vs_componentwise,
        "corner_star_compatibility": star_compat,
        "twisted_product_identity": twisted_product,
        "multiplicative_extension_law": multiplicative_law,
        "involutive_extension_law": involutive_law,
        "embedding_intertwine": intertwine,
        "pairs": pairs,
        "seed": seed,
    }


def analyze_bundle(
    bundle: InstanceBundle,
    tol: float | None = None,
    budget: int = 200,
    seed: int = 0,
    samples: int = 64,
    linking_pairs: int = 16,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> AnalysisReport:
    """Full decision pipeline for one instance."""
    t0 = time.perf_counter()
    phi = bundle.phi
    result = extract_witness(phi, tol, profile=profile)

    certificate = rejection = violation = search = None
    decomposition = ideals = injectivity = linking = None
    residuals: dict = {}
    norms: dict = {"map_norm_sq": phi.norm() ** 2}

    if isinstance(result, NotPreserver):
        rejection = {
            "residual": result.residual,
            "scale": result.scale,
            "block_lambdas": [[z.real, z.imag] for z in result.block_lambdas],
            "block_residuals": list(result.block_residuals),
            "reasons": list(result.reasons),
        }
        vio = find_violating_pair(phi, None, budget, seed, profile=profile)
        if isinstance(vio, ViolationWitness):
            verdict = VERDICT_REJECTED
            violation = {
                "x": encode_blocks(vio.x.data),
                "y": encode_blocks(vio.y.data),
                "magnitude": vio.magnitude,
                "orthogonality_residual": vio.orthogonality_residual,
                "trial": vio.trial,
            }
        else:
            verdict = VERDICT_EXHAUSTED
            assert isinstance(vio, SearchExhausted)
            search = {
                "trials": vio.trials,
                "sup_restricted_norm": vio.sup_restricted_norm,
            }
    else:
        verdict = VERDICT_CERTIFIED
        cert = result
        certificate = {
            "support": sorted(cert.witness.ideal.support),
            "scalars": list(cert.witness.scalars),
            "root_scalars": list(cert.root.scalars),
            "residual": cert.residual,
            "scale": cert.scale,
            "determined": list(cert.determined),
        }
        norms["witness_norm"] = cert.witness.norm()
        norms["norm_gap"] = norms["witness_norm"] - norms["map_norm_sq"]
        residuals["certification"] = cert.residual
        fresh = verify_certificate(phi, cert.witness, samples, seed)
        residuals["fresh_samples"] = fresh.max_residual

        dec = decompose(phi, cert, profile)
        decomposition = {
            "kernel_dim": dec.kernel_dim,
            "root_kernel_dim": dec.root_kernel_dim,
            "isometry_residual": dec.isometry_residual,
            "factorization_residual": dec.factorization_residual,
            "adjoint_residual": dec.adjoint_residual,
            "image_support": sorted(dec.image.ideal(profile).support),
        }
        ic = image_ideal_check(phi, cert, profile)
        ideals = {
            "image_support": sorted(ic.image_support),
            "witness_support": sorted(ic.witness_support),
            "domain_support": sorted(ic.domain_support),
            "matches_witness_support": ic.matches_witness_support,
            "contained_in_domain_ideal": ic.contained_in_domain_ideal,
        }
        inj = injectivity_analysis(phi, cert, profile)
        injectivity = {
            "kernel_dim": inj.kernel_dim,
            "injective": inj.injective,
            "ideals_equal": inj.ideals_equal,
            "root_image_is_domain": inj.root_image_is_domain,
            "inverse_witness_scalars": (
                list(inj.inverse_witness.scalars) if inj.inverse_witness else None
            ),
            "inverse_residual": inj.inverse_residual,
            "reciprocal_deviation": inj.reciprocal_deviation,
        }
        linking = linking_residuals(phi, cert, linking_pairs, seed, profile)

    return AnalysisReport(
        verdict=verdict,
        certificate=certificate,
        rejection=rejection,
        violation=violation,
        search=search,
        residuals=residuals,
        norms=norms,
        decomposition=decomposition,
        ideals=ideals,
        injectivity=injectivity,
        linking=linking,
        timing={"total_s": time.perf_counter() - t0},
    )


# ---------------------------------------------------------------------------
# degradation study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegradationRow:
    grid_size: int
    inverse_root_norm: float
    certification_residual: float
    unitary_residual: float


def degradation_table(
    grid_sizes: list[int],
    gallery_base: str = "interval-C0-halfopen",
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> list[DegradationRow]:
    """||w^{-1}|| as the grid refines: the finite shadow of a non-invertible scaling."""
    rows = []
    for n in grid_sizes:
        bundle = gallery(f"{gallery_base}({n})")
        cert = extract_witness(bundle.phi, profile=profile)
        if isinstance(cert, NotPreserver):
            raise InternalInconsistencyError(
                f"gallery instance {gallery_base}({n}) failed to certify"
            )
        rep = bijective_analysis(bundle.phi, profile=profile)
        rows.append(
            DegradationRow(
                grid_size=n,
                inverse_root_norm=rep.inverse_root_norm,
                certification_residual=cert.residual,
                unitary_residual=rep.unitary_residual,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# report serialization
# ---------------------------------------------------------------------------

_REPORT_FIELDS = [
    "verdict",
    "certificate",
    "rejection",
    "violation",
    "search",
    "residuals",
    "norms",
    "decomposition",
    "ideals",
    "injectivity",
    "linking",
    "timing",
]


def report_to_document(report: AnalysisReport) -> dict:
    doc = {"schema": SCHEMA_VERSION, "kind": "report"}
    for name in _REPORT_FIELDS:
        doc[name] = getattr(report, name)
    return doc


def report_from_document(doc) -> AnalysisReport:
    expect_schema(doc, "report")
    check_keys(doc, ["schema", "kind"] + _REPORT_FIELDS, [], "report")
    if doc["verdict"] not in (VERDICT_CERTIFIED, VERDICT_REJECTED, VERDICT_EXHAUSTED):
        raise ValidationError(f"verdict: unknown value {doc['verdict']!r}")
    return AnalysisReport(**{name: doc[name] for name in _REPORT_FIELDS})


def dumps_report(report: AnalysisReport) -> str:
    return emit_document(report_to_document(report)) + "\n"


def loads_report(text: str) -> AnalysisReport:
    return report_from_document(parse_document(text))


def save_report(report: AnalysisReport, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_report(report))


def load_report(path) -> AnalysisReport:
    with open(path, "r", encoding="utf-8") as f:
        return loads_report(f.read())

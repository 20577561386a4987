"""Seeded property suites behind the ``verify`` command.

Each check draws its own deterministic instances, measures a worst residual
and compares it against the documented threshold.  The suites dual-purpose
as executable documentation of the library's invariants.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .algebra import (
    AlgebraElement,
    AmplifiedElement,
    CentralPositive,
    IdealDescriptor,
    central_cover,
    is_positive,
    make_algebra,
    spectral_projection,
    support_projection,
)
from .instances import (
    gen_adversarial,
    gen_algebra,
    gen_module,
    gen_planted_preserver,
)
from .linking import PreserverExtension, build_linking
from .modules import (
    ModuleMap,
    complex_basis,
    image_submodule,
    random_element,
    rank_one_operator,
)
from .preserver import (
    NotPreserver,
    PreserverCertificate,
    SearchExhausted,
    ViolationWitness,
    decompose,
    extract_witness,
    find_violating_pair,
    verify_certificate,
)
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = ["SuiteCheck", "run_suite", "SUITE_NAMES"]

SUITE_NAMES = ("core", "linking", "lemmas", "all")


@dataclass(frozen=True)
class SuiteCheck:
    name: str
    passed: bool
    worst: float
    threshold: float
    detail: str = ""


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _random_shapes(rng: np.random.Generator, count: int):
    """A stream of (algebra, domain, codomain) triples at desk scale."""
    out = []
    for _ in range(count):
        alg = gen_algebra(int(rng.integers(0, 2**63)), 3, 3)
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        domain = gen_module(rng, alg, n)
        min_ranks = tuple(
            min(domain.block_rank(b), m * nb) for b, nb in enumerate(alg.blocks)
        )
        try:
            codomain = gen_module(rng, alg, m, min_ranks=min_ranks)
        except Exception:
            continue
        if any(domain.block_rank(b) > codomain.block_rank(b) for b in range(alg.num_blocks)):
            continue
        out.append((alg, domain, codomain))
    return out


def _planted(rng: np.random.Generator, count: int, invertible: bool = False):
    plants = []
    for alg, domain, codomain in _random_shapes(rng, count):
        if invertible:
            codomain = domain
        seed = int(rng.integers(0, 2**63))
        try:
            plants.append(gen_planted_preserver(seed, domain, codomain, invertible=invertible))
        except Exception:
            continue
    return plants


# ---------------------------------------------------------------------------
# core suite
# ---------------------------------------------------------------------------


def _core_checks(seed: int, samples: int, profile: ToleranceProfile) -> list[SuiteCheck]:
    rng = _rng(seed)
    checks: list[SuiteCheck] = []
    shapes = _random_shapes(rng, max(6, samples // 8))

    worst_herm = worst_def = worst_normdef = worst_assoc = worst_lin = worst_adj = 0.0
    for alg, domain, codomain in shapes:
        phi = ModuleMap(
            domain,
            codomain,
            tuple(
                (rng.standard_normal((codomain.n * nb, domain.n * nb))
                 + 1j * rng.standard_normal((codomain.n * nb, domain.n * nb)))
                for nb in alg.blocks
            ),
        )
        for _ in range(4):
            x = random_element(domain, rng)
            y = random_element(domain, rng)
            a = alg.random_element(rng)
            b = alg.random_element(rng)
            worst_herm = max(worst_herm, (x.inner(y).adjoint() - y.inner(x)).norm())
            gram = x.inner(x)
            if not is_positive(gram, profile.projection):
                worst_def = max(worst_def, 1.0)
            worst_normdef = max(worst_normdef, abs(x.norm() ** 2 - gram.norm()))
            worst_assoc = max(
                worst_assoc, (x.right(a).right(b) - x.right(a * b)).norm()
            )
            worst_lin = max(worst_lin, (phi(x.right(a)) - phi(x).right(a)).norm())
            z = random_element(codomain, rng)
            worst_adj = max(
                worst_adj, (phi(x).inner(z) - x.inner(phi.adjoint()(z))).norm()
            )
    checks.append(SuiteCheck("inner-product-hermitian", worst_herm <= 1e-12, worst_herm, 1e-12))
    checks.append(SuiteCheck("inner-product-positive", worst_def == 0.0, worst_def, 0.0))
    checks.append(
        SuiteCheck("module-norm-definition", worst_normdef <= 1e-12, worst_normdef, 1e-12)
    )
    checks.append(SuiteCheck("right-action-associative", worst_assoc <= 1e-10, worst_assoc, 1e-10))
    checks.append(SuiteCheck("map-module-linearity", worst_lin <= 1e-10, worst_lin, 1e-10))
    checks.append(SuiteCheck("adjoint-pairing", worst_adj <= 1e-9, worst_adj, 1e-9))

    # operator norm vs brute-force supremum over random unit vectors
    worst_gap = 0.0
    for alg, domain, codomain in shapes[:3]:
        phi = ModuleMap(
            domain,
            codomain,
            tuple(
                (rng.standard_normal((codomain.n * nb, domain.n * nb))
                 + 1j * rng.standard_normal((codomain.n * nb, domain.n * nb)))
                for nb in alg.blocks
            ),
        )
        top = phi.norm()
        if top == 0:
            continue
        best = 0.0
        for _ in range(10_000):
            x = random_element(domain, rng, normalize=True)
            best = max(best, phi(x).norm())
        if best > top * (1 + 1e-9):
            worst_gap = max(worst_gap, best / top - 1)
        if best < 0.99 * top:
            worst_gap = max(worst_gap, 1 - best / top)
    checks.append(SuiteCheck("map-norm-bruteforce", worst_gap <= 0.01, worst_gap, 0.01))

    # planted witnesses: recovery, soundness, uniqueness, scaling, kernels
    plants = _planted(rng, max(8, samples // 4))
    worst_rec = worst_fresh = worst_perm = worst_scaleq = worst_bound = 0.0
    kernel_ok = True
    for inst in plants:
        res = extract_witness(inst.phi, profile=profile)
        if isinstance(res, NotPreserver):
            worst_rec = max(worst_rec, 1.0)
            continue
        for lam_hat, lam in zip(res.witness.scalars, inst.planted.scalars):
            worst_rec = max(worst_rec, abs(lam_hat - lam) / max(1.0, lam))
        fresh = verify_certificate(inst.phi, res.witness, 32, inst.seed)
        worst_fresh = max(worst_fresh, fresh.max_residual)

        basis = complex_basis(inst.domain)
        perm = list(range(len(basis)))
        rng.shuffle(perm)
        res_perm = extract_witness(inst.phi, basis=[basis[i] for i in perm], profile=profile)
        if isinstance(res_perm, NotPreserver):
            worst_perm = max(worst_perm, 1.0)
        else:
            worst_perm = max(
                worst_perm,
                max(
                    abs(a - b)
                    for a, b in zip(res.witness.scalars, res_perm.witness.scalars)
                ),
            )

        c = complex(rng.standard_normal(), rng.standard_normal())
        res_scaled = extract_witness(c * inst.phi, profile=profile)
        if isinstance(res_scaled, NotPreserver):
            worst_scaleq = max(worst_scaleq, 1.0)
        else:
            worst_scaleq = max(
                worst_scaleq,
                max(
                    abs(s - abs(c) ** 2 * t)
                    for s, t in zip(res_scaled.witness.scalars, res.witness.scalars)
                ),
            )

        worst_bound = max(worst_bound, inst.phi.norm() ** 2 - res.witness.norm())
        dec = decompose(inst.phi, res, profile)
        kernel_ok = kernel_ok and dec.kernel_dim == dec.root_kernel_dim
    checks.append(SuiteCheck("plant-recovery", worst_rec <= 1e-9, worst_rec, 1e-9))
    checks.append(
        SuiteCheck(
            "certificate-soundness-fresh-samples",
            worst_fresh <= 10 * profile.certification,
            worst_fresh,
            10 * profile.certification,
        )
    )
    checks.append(SuiteCheck("witness-uniqueness-permuted", worst_perm <= 1e-9, worst_perm, 1e-9))
    checks.append(SuiteCheck("scale-equivariance", worst_scaleq <= 1e-10, worst_scaleq, 1e-10))
    checks.append(SuiteCheck("norm-bound", worst_bound <= 1e-8, worst_bound, 1e-8))
    checks.append(
        SuiteCheck("kernel-identity", kernel_ok, 0.0 if kernel_ok else 1.0, 0.0)
    )

    # zero map certifies with the zero witness
    alg0, dom0, cod0 = shapes[0]
    zero_phi = ModuleMap(
        dom0,
        cod0,
        tuple(np.zeros((cod0.n * nb, dom0.n * nb)) for nb in alg0.blocks),
    )
    res0 = extract_witness(zero_phi, profile=profile)
    zero_ok = isinstance(res0, PreserverCertificate) and res0.witness.norm() == 0.0
    checks.append(SuiteCheck("zero-map-certifies", zero_ok, 0.0 if zero_ok else 1.0, 0.0))

    # adversarial rejection completeness (statistical)
    tried = found = 0
    for alg, domain, codomain in shapes:
        if domain.has_trivial_orthogonality():
            continue
        inst = gen_adversarial(int(rng.integers(0, 2**63)), domain, codomain)
        res = extract_witness(inst.phi, profile=profile)
        if not isinstance(res, NotPreserver):
            continue
        tried += 1
        vio = find_violating_pair(inst.phi, trial_budget=200, seed=inst.seed, profile=profile)
        if isinstance(vio, ViolationWitness):
            found += 1
    rate = found / tried if tried else 1.0
    checks.append(
        SuiteCheck(
            "violation-search-completeness",
            rate >= 0.9,
            1 - rate,
            0.1,
            detail=f"{found}/{tried} rejected instances yielded a witness pair",
        )
    )
    return checks


# ---------------------------------------------------------------------------
# lemma suite
# ---------------------------------------------------------------------------


def _lemma_checks(seed: int, samples: int, profile: ToleranceProfile) -> list[SuiteCheck]:
    rng = _rng(seed)
    checks: list[SuiteCheck] = []

    worst_supp = 0.0
    worst_cover_norm = 0.0
    worst_cover_act = 0.0
    cover_minimal = True
    worst_cstar = 0.0
    for _ in range(max(8, samples // 4)):
        alg = gen_algebra(int(rng.integers(0, 2**63)), 3, 3)
        x = alg.random_element(rng)
        a = x.adjoint() * x
        q = support_projection(a, profile)
        worst_supp = max(
            worst_supp,
            (a * q - a).norm(),
            (q * a - a).norm(),
            (q * q - q).norm(),
            (q - q.adjoint()).norm(),
        )
        worst_cstar = max(worst_cstar, abs((x.adjoint() * x).norm() - x.norm() ** 2))

        # scaled central cover of a block-scalar element compressed by a projection
        proj_blocks = []
        mus = []
        for nb in alg.blocks:
            r = int(rng.integers(0, nb + 1))
            if r == 0:
                proj_blocks.append(np.zeros((nb, nb)))
            else:
                g = (rng.standard_normal((nb, r)) + 1j * rng.standard_normal((nb, r)))
                qb, _ = np.linalg.qr(g)
                proj_blocks.append(qb @ qb.conj().T)
            mus.append(float(rng.uniform(0, 2)) if r > 0 else 0.0)
        p = AlgebraElement(alg, tuple(proj_blocks))
        b = AlgebraElement(alg, tuple(m * blk for m, blk in zip(mus, proj_blocks)))
        v = alg.diagonal([m if m > profile.zero else 0.0 for m in mus])
        if b.norm() > 0:
            worst_cover_norm = max(worst_cover_norm, abs(v.norm() - b.norm()))
        worst_cover_act = max(worst_cover_act, (v * p - b).norm())

        # central cover minimality by enumeration over central projections
        z = central_cover(b, profile)
        B = alg.num_blocks
        if B <= 8:
            for bits in product((0.0, 1.0), repeat=B):
                cand = alg.diagonal(bits)
                if (cand * b - b).norm() <= 1e-10:
                    if not (cand * z - z).norm() <= 1e-10:
                        cover_minimal = False
    checks.append(SuiteCheck("support-projection-identities", worst_supp <= 1e-10, worst_supp, 1e-10))
    checks.append(
        SuiteCheck("central-cover-norm", worst_cover_norm <= 1e-10, worst_cover_norm, 1e-10)
    )
    checks.append(
        SuiteCheck("central-cover-action", worst_cover_act <= 1e-10, worst_cover_act, 1e-10)
    )
    checks.append(
        SuiteCheck(
            "central-cover-minimal",
            cover_minimal,
            0.0 if cover_minimal else 1.0,
            0.0,
            detail="enumerated all central projections",
        )
    )
    checks.append(SuiteCheck("cstar-norm-identity", worst_cstar <= 1e-10, worst_cstar, 1e-10))

    # spectral partition at a gap point
    worst_part = 0.0
    for _ in range(8):
        alg = gen_algebra(int(rng.integers(0, 2**63)), 2, 4)
        x = alg.random_element(rng)
        a = x.adjoint() * x
        nrm = a.norm()
        if nrm <= 0:
            continue
        a = (1.0 / nrm) * a
        evals = np.concatenate([np.linalg.eigvalsh((m + m.conj().T) / 2) for m in a.data])
        delta = 0.5
        if np.any(np.abs(evals - delta) < 1e-3):
            delta = 0.37
        low = spectral_projection(a, 0.0, delta, "open_closed", profile)
        high = spectral_projection(a, delta, 1.0, "open_closed", profile)
        full = spectral_projection(a, 0.0, 1.0, "open_closed", profile)
        worst_part = max(worst_part, (low + high - full).norm())
    checks.append(SuiteCheck("spectral-partition", worst_part <= 1e-10, worst_part, 1e-10))

    # module-level support identities, including through certified maps
    rng2 = _rng(seed + 1)
    worst_xq = worst_phixq = worst_commute = 0.0
    subset_ok = True
    plants = _planted(rng2, 6)
    for inst in plants:
        res = extract_witness(inst.phi, profile=profile)
        if isinstance(res, NotPreserver):
            continue
        for _ in range(4):
            x = random_element(inst.domain, rng2)
            nrm = x.norm()
            if nrm <= profile.zero:
                continue
            a = (1.0 / nrm**2) * x.inner(x)
            qx = support_projection(a, profile)
            worst_xq = max(worst_xq, (x.right(qx) - x).norm())
            worst_phixq = max(worst_phixq, (inst.phi(x).right(qx) - inst.phi(x)).norm())

            # a u = a v forces agreement against every spectral tail of a
            m = inst.algebra.random_element(rng2)
            ker = inst.algebra.identity() - qx
            u_el = inst.algebra.random_element(rng2)
            v_el = u_el + ker * m
            qd = spectral_projection(a, 0.3, 1.0 + 1e-6, "open_closed", profile)
            if (a * u_el - a * v_el).norm() <= 1e-9:
                worst_commute = max(worst_commute, (qd * u_el - qd * v_el).norm())
        image = image_submodule(inst.phi, profile)
        if not image.ideal(profile).support <= inst.domain.ideal(profile).support:
            subset_ok = False
    checks.append(SuiteCheck("element-support-fixture", worst_xq <= 1e-10, worst_xq, 1e-10))
    checks.append(
        SuiteCheck("mapped-support-fixture", worst_phixq <= 1e-10, worst_phixq, 1e-10)
    )
    checks.append(
        SuiteCheck("tail-agreement-transfer", worst_commute <= 1e-9, worst_commute, 1e-9)
    )
    checks.append(
        SuiteCheck("image-ideal-contained", subset_ok, 0.0 if subset_ok else 1.0, 0.0)
    )
    return checks


# ---------------------------------------------------------------------------
# linking suite
# ---------------------------------------------------------------------------


def _linking_checks(seed: int, samples: int, profile: ToleranceProfile) -> list[SuiteCheck]:
    rng = _rng(seed)
    checks: list[SuiteCheck] = []

    worst_flat = worst_inv = worst_embed = worst_dc = 0.0
    for alg, domain, _ in _random_shapes(rng, 6):
        link = build_linking(domain, profile)
        for _ in range(max(4, samples // 16)):
            c = link.random_element(rng)
            d = link.random_element(rng)
            worst_flat = max(worst_flat, (c.mul(d) - c.mul_flat(d)).norm())
            worst_inv = max(
                worst_inv, (c.adjoint().flatten() - c.flatten().adjoint()).norm()
            )
            x = random_element(domain, rng)
            y = random_element(domain, rng)
            jx, jy = link.embed(x), link.embed(y)
            prod = jx.adjoint().mul(jy)
            worst_embed = max(
                worst_embed,
                (prod.corner - x.inner(y)).norm(),
                prod.operator.norm(),
                prod.column.norm(),
                prod.row.norm(),
                abs(jx.norm() - x.norm()),
            )
            scal = [float(rng.uniform(0, 2)) for _ in alg.blocks]
            ideal = link.ideal
            v = CentralPositive(
                ideal, tuple(s if b in ideal.support else 0.0 for b, s in enumerate(scal))
            )
            scal2 = [float(rng.uniform(0, 2)) for _ in alg.blocks]
            u = CentralPositive(
                ideal, tuple(s if b in ideal.support else 0.0 for b, s in enumerate(scal2))
            )
            from .linking import LinkingMultiplier

            mult = LinkingMultiplier(v, u)
            worst_dc = max(
                worst_dc,
                (mult.apply(c, "right").mul(d) - c.mul(mult.apply(d, "left"))).norm(),
            )
    checks.append(SuiteCheck("componentwise-vs-flat-product", worst_flat <= 1e-12, worst_flat, 1e-12))
    checks.append(SuiteCheck("involution-matches-flat", worst_inv <= 1e-12, worst_inv, 1e-12))
    checks.append(SuiteCheck("embedding-corner-identity", worst_embed <= 1e-10, worst_embed, 1e-10))
    checks.append(SuiteCheck("double-centralizer", worst_dc <= 1e-10, worst_dc, 1e-10))

    # certified transport identities
    rng2 = _rng(seed + 1)
    plants = _planted(rng2, 6)
    worst_rank1 = worst_opid = worst_star = worst_laws = worst_inter = worst_disjoint = 0.0
    for inst in plants:
        res = extract_witness(inst.phi, profile=profile)
        if isinstance(res, NotPreserver):
            continue
        ext = PreserverExtension(inst.phi, res, profile)
        dom_link = ext.domain_linking
        u_el = res.witness.as_element()
        for _ in range(4):
            x = random_element(inst.domain, rng2)
            y = random_element(inst.domain, rng2)
            z = random_element(inst.domain, rng2)
            theta = rank_one_operator(x, y)
            pushed = ext.induced_compact_map(theta)
            direct = rank_one_operator(ext.phi0(x), ext.phi0(y))
            worst_rank1 = max(worst_rank1, (pushed - direct).norm())
            worst_opid = max(
                worst_opid,
                (
                    pushed(ext.phi0(z)) - ext.phi0(theta(z)).right(u_el)
                ).norm(),
            )
            worst_star = max(
                worst_star,
                (
                    ext.induced_compact_map(theta.adjoint())
                    - ext.induced_compact_map(theta).adjoint()
                ).norm(),
            )
            c = dom_link.random_element(rng2)
            d = dom_link.random_element(rng2)
            g_c, d_c = ext.extension_pair(c)
            g_d, d_d = ext.extension_pair(d)
            g_cd, _ = ext.extension_pair(c.mul(d))
            _, d_cstard = ext.extension_pair(c.adjoint().mul(d))
            worst_laws = max(
                worst_laws,
                (g_c.mul(g_d) - ext.product_multiplier.apply(g_cd, "left")).norm(),
                (d_c.adjoint().mul(d_d) - ext.mixed_multiplier.apply(d_cstard, "left")).norm(),
            )
            g_j, d_j = ext.extension_pair(dom_link.embed(x))
            j_img = ext.image_linking.embed(ext.phi0(x))
            worst_inter = max(worst_inter, (g_j - j_img).norm(), (d_j - j_img).norm())

        # disjoint block supports annihilate through the involutive extension
        supp = sorted(inst.domain.ideal(profile).support)
        if len(supp) >= 2:
            half = set(supp[: len(supp) // 2])
            c = dom_link.random_element(rng2)
            d = dom_link.random_element(rng2)
            c = _mask_blocks(c, half)
            d = _mask_blocks(d, set(supp) - half)
            if c.adjoint().mul(d).norm() <= 1e-12:
                _, d_c = ext.extension_pair(c)
                _, d_d = ext.extension_pair(d)
                worst_disjoint = max(worst_disjoint, d_c.adjoint().mul(d_d).norm())
    checks.append(SuiteCheck("rank-one-pushforward", worst_rank1 <= 1e-10, worst_rank1, 1e-10))
    checks.append(SuiteCheck("pushforward-operator-identity", worst_opid <= 1e-9, worst_opid, 1e-9))
    checks.append(SuiteCheck("pushforward-star-compatible", worst_star <= 1e-9, worst_star, 1e-9))
    checks.append(SuiteCheck("extension-product-laws", worst_laws <= 1e-9, worst_laws, 1e-9))
    checks.append(SuiteCheck("embedding-intertwine", worst_inter <= 1e-10, worst_inter, 1e-10))
    checks.append(
        SuiteCheck("disjointness-preserved", worst_disjoint <= 1e-10, worst_disjoint, 1e-10)
    )

    # broken maps break the disjointness implication on embedded witnesses
    converse_ok = True
    tried = 0
    for alg, domain, codomain in _random_shapes(rng2, 8):
        if domain.has_trivial_orthogonality():
            continue
        inst = gen_adversarial(int(rng2.integers(0, 2**63)), domain, codomain)
        if not isinstance(extract_witness(inst.phi, profile=profile), NotPreserver):
            continue
        vio = find_violating_pair(inst.phi, trial_budget=100, seed=inst.seed, profile=profile)
        if not isinstance(vio, ViolationWitness):
            continue
        tried += 1
        img = inst.phi(vio.x).inner(inst.phi(vio.y)).norm()
        if img <= 1e-6:
            converse_ok = False
    checks.append(
        SuiteCheck(
            "violation-breaks-disjointness",
            converse_ok,
            0.0 if converse_ok else 1.0,
            0.0,
            detail=f"checked on {tried} rejected instances",
        )
    )
    return checks


def _mask_blocks(c, keep: set[int]):
    """Zero a linking element outside the given blocks (stays in the corner)."""
    from .algebra import AlgebraElement
    from .linking import LinkingElement
    from .modules import CompactOperator, ModuleElement

    mod = c.algebra.module
    def mask(arrs, builder):
        return builder(
            tuple(
                np.array(m) if b in keep else np.zeros_like(m) for b, m in enumerate(arrs)
            )
        )

    return LinkingElement(
        c.algebra,
        mask(c.operator.data, lambda d: CompactOperator(mod, d)),
        mask(c.column.data, lambda d: ModuleElement(mod, d)),
        mask(c.row.data, lambda d: ModuleElement(mod, d)),
        mask(c.corner.data, lambda d: AlgebraElement(mod.algebra, d)),
    )


def run_suite(
    name: str,
    seed: int = 0,
    samples: int = 64,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> list[SuiteCheck]:
    if name == "core":
        return _core_checks(seed, samples, profile)
    if name == "lemmas":
        return _lemma_checks(seed, samples, profile)
    if name == "linking":
        return _linking_checks(seed, samples, profile)
    if name == "all":
        return (
            _core_checks(seed, samples, profile)
            + _lemma_checks(seed, samples, profile)
            + _linking_checks(seed, samples, profile)
        )
    raise ValueError(f"unknown suite {name!r}")

"""Certificates for orthogonality-preserving module maps.

The decision procedure reduces the sesquilinear identity
``<T x, T y> = u <x, y>`` to a per-block scalar least-squares problem over a
complex basis of the domain: blocks never interact, and on each supported
block the witness scalar is the Frobenius projection of the mapped Gram
matrix onto the domain Gram matrix.  Acceptance demands a small
scale-normalized residual and a (clamped) nonnegative real solution.

The converse search looks for an orthogonal pair that the map breaks: for a
random x the orthogonal complement is an exact complex nullspace, and the
restriction of ``y -> <T x, T y>`` to it is a small linear operator whose
top singular pair decides the trial exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .algebra import CentralPositive, IdealDescriptor
from .errors import (
    InternalInconsistencyError,
    InvalidInputError,
    PreconditionError,
)
from .modules import (
    HilbertModule,
    ModuleElement,
    ModuleMap,
    _projection_column_bases,
    complex_basis,
    corestrict,
    image_submodule,
    right_multiplication_map,
)
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "PreserverCertificate",
    "NotPreserver",
    "ViolationWitness",
    "SearchExhausted",
    "Decomposition",
    "IdealCheckReport",
    "InjectivityReport",
    "BijectivityReport",
    "SampleResidualReport",
    "extract_witness",
    "verify_certificate",
    "find_violating_pair",
    "decompose",
    "image_ideal_check",
    "injectivity_analysis",
    "bijective_analysis",
]


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PreserverCertificate:
    """Witness for an orthogonality-preserving module map.

    ``witness`` is the central positive multiplier u of the domain ideal with
    ``<T x, T y> = u <x, y>``; ``root`` is its blockwise square root, the
    right-scaling factor of the isometric factorization.  ``residual`` is the
    worst deviation of the identity over all basis pairs, ``scale`` the
    normalization it was accepted against, and ``determined`` flags per block
    that the least-squares solve had full numerical rank.
    """

    phi: ModuleMap
    witness: CentralPositive
    root: CentralPositive
    residual: float
    scale: float
    determined: tuple[bool, ...]


@dataclass(frozen=True, eq=False)
class NotPreserver:
    """Rejection record: best per-block fit and where it failed."""

    residual: float
    scale: float
    block_lambdas: tuple[complex, ...]
    block_residuals: tuple[float, ...]
    reasons: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class ViolationWitness:
    """An orthogonal pair whose images fail to be orthogonal."""

    x: ModuleElement
    y: ModuleElement
    magnitude: float
    orthogonality_residual: float
    trial: int


@dataclass(frozen=True, eq=False)
class SearchExhausted:
    """No violating pair found within the trial budget."""

    trials: int
    sup_restricted_norm: float


@dataclass(frozen=True, eq=False)
class SampleResidualReport:
    """Fresh-sample check of a certificate."""

    max_residual: float
    samples: int
    seed: int


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Isometric factorization T = Theta . R_w of a certified map.

    ``isometry`` maps the scaled submodule Ew onto the image submodule and
    preserves inner products; ``root`` is w.  The diagnostics record how well
    the factorization and its adjoint identity hold.
    """

    root: CentralPositive
    isometry: ModuleMap
    image: HilbertModule
    scaled_domain: HilbertModule
    kernel_dim: int
    root_kernel_dim: int
    isometry_residual: float
    factorization_residual: float
    adjoint_residual: float


@dataclass(frozen=True, eq=False)
class IdealCheckReport:
    image_support: frozenset[int]
    witness_support: frozenset[int]
    domain_support: frozenset[int]

    @property
    def matches_witness_support(self) -> bool:
        return self.image_support == self.witness_support

    @property
    def contained_in_domain_ideal(self) -> bool:
        return self.image_support <= self.domain_support


@dataclass(frozen=True, eq=False)
class InjectivityReport:
    kernel_dim: int
    injective: bool
    ideals_equal: bool
    root_image_is_domain: bool | None
    inverse_witness: CentralPositive | None
    inverse_residual: float | None
    reciprocal_deviation: float | None


@dataclass(frozen=True, eq=False)
class BijectivityReport:
    ideals_equal: bool
    witness_invertible: bool
    min_witness_scalar: float
    unitary_residual: float
    inverse_root_norm: float
    surjectivity_defect: float


# ---------------------------------------------------------------------------
# witness extraction
# ---------------------------------------------------------------------------


def _pair_norm_max(m: np.ndarray, d: int, nb: int) -> float:
    """Max spectral norm over the d x d grid of nb x nb sub-blocks of m."""
    if d == 0:
        return 0.0
    grid = m.reshape(d, nb, d, nb).transpose(0, 2, 1, 3)
    return float(np.max(np.linalg.norm(grid, ord=2, axis=(-2, -1))))


def _group_basis_by_block(basis: list[ModuleElement]) -> dict[int, list[ModuleElement]]:
    groups: dict[int, list[ModuleElement]] = {}
    for e in basis:
        mass = [float(np.linalg.norm(m)) for m in e.data]
        b = int(np.argmax(mass))
        off_block = sum(v for i, v in enumerate(mass) if i != b)
        if off_block > 1e-12 * max(1.0, mass[b]):
            raise InvalidInputError("basis elements must be supported on a single block")
        groups.setdefault(b, []).append(e)
    return groups


def extract_witness(
    phi: ModuleMap,
    tol: float | None = None,
    basis: list[ModuleElement] | None = None,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> PreserverCertificate | NotPreserver:
    """Solve for the central positive witness, or reject with a residual profile.

    Per supported block of the domain ideal the scalar is the least-squares
    fit of the mapped Gram matrix against the domain Gram matrix over the
    (given or canonical) complex basis.  Acceptance requires every scalar to
    be real and nonnegative within ``tol`` (small negatives are clamped to
    zero) and the worst pairwise residual to stay below ``tol`` times
    ``max(1, max||H|| * max lambda)``.
    """
    if tol is None:
        tol = profile.certification
    if tol <= 0:
        raise InvalidInputError("certification tolerance must be positive")
    E = phi.domain
    ideal = E.ideal(profile)
    if basis is None:
        basis = complex_basis(E)
    groups = _group_basis_by_block(basis)

    B = E.algebra.num_blocks
    lambdas_raw: list[complex] = [0.0 + 0.0j] * B
    lambdas: list[float] = [0.0] * B
    block_res: list[float] = [0.0] * B
    determined: list[bool] = [True] * B
    reasons: list[str] = []
    max_h = 0.0

    for b in sorted(ideal.support):
        nb = E.algebra.blocks[b]
        elems = groups.get(b, [])
        if not elems:
            determined[b] = False
            reasons.append(f"block {b}: no basis elements supplied")
            continue
        d = len(elems)
        x_stack = np.hstack([e.data[b] for e in elems])
        y_stack = np.hstack([phi(e).data[b] for e in elems])
        gram = x_stack.conj().T @ x_stack
        mapped = y_stack.conj().T @ y_stack
        denom = float(np.vdot(gram, gram).real)
        determined[b] = bool(denom > profile.rank)
        lam_raw = complex(np.vdot(gram, mapped) / denom) if determined[b] else 0.0 + 0.0j
        lambdas_raw[b] = lam_raw
        ref = max(1.0, abs(lam_raw))
        lam_re = lam_raw.real
        if abs(lam_raw.imag) > tol * ref:
            reasons.append(f"block {b}: witness scalar not real ({lam_raw:.3g})")
        if lam_re < -tol * ref:
            reasons.append(f"block {b}: witness scalar negative ({lam_re:.3g})")
        lam = max(lam_re, 0.0)
        lambdas[b] = lam
        block_res[b] = _pair_norm_max(mapped - lam * gram, d, nb)
        max_h = max(max_h, _pair_norm_max(gram, d, nb))

    residual = max(block_res) if block_res else 0.0
    lam_max = max(lambdas) if lambdas else 0.0
    scale = max(1.0, max_h * lam_max)
    if residual > tol * scale:
        reasons.append(f"residual {residual:.3g} above {tol:.3g} * scale {scale:.3g}")
    if reasons:
        return NotPreserver(
            residual=residual,
            scale=scale,
            block_lambdas=tuple(lambdas_raw),
            block_residuals=tuple(block_res),
            reasons=tuple(reasons),
        )
    witness = CentralPositive(ideal, tuple(lambdas))
    return PreserverCertificate(
        phi=phi,
        witness=witness,
        root=witness.sqrt(),
        residual=residual,
        scale=scale,
        determined=tuple(determined),
    )


def verify_certificate(
    phi: ModuleMap,
    witness: CentralPositive,
    sample_count: int = 100,
    seed: int = 0,
) -> SampleResidualReport:
    """Check the witness identity on fresh random pairs; deterministic per seed."""
    from .modules import random_element

    rng = np.random.Generator(np.random.PCG64(seed))
    u_el = witness.as_element()
    worst = 0.0
    for _ in range(sample_count):
        x = random_element(phi.domain, rng)
        y = random_element(phi.domain, rng)
        lhs = phi(x).inner(phi(y))
        rhs = u_el * x.inner(y)
        denom = max(x.norm() * y.norm(), np.finfo(float).tiny)
        worst = max(worst, (lhs - rhs).norm() / denom)
    return SampleResidualReport(max_residual=worst, samples=sample_count, seed=seed)


# ---------------------------------------------------------------------------
# violation search
# ---------------------------------------------------------------------------


def find_violating_pair(
    phi: ModuleMap,
    tol: float | None = None,
    trial_budget: int = 200,
    seed: int = 0,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> ViolationWitness | SearchExhausted:
    """Randomized-but-exact search for an orthogonal pair with non-orthogonal images.

    Each trial draws a random x, computes the exact complex nullspace of
    ``y -> <x, y>`` blockwise, and takes the top singular pair of the
    restriction of ``y -> <T x, T y>`` to it.  A trial either produces a
    certified witness pair or proves that no unit y orthogonal to this x
    violates beyond ``tol``.
    """
    if tol is None:
        tol = profile.violation
    if trial_budget < 1:
        raise InvalidInputError("trial budget must be >= 1")
    E = phi.domain
    alg = E.algebra
    rng = np.random.Generator(np.random.PCG64(seed))

    bases = _projection_column_bases(E.projection)
    # per supported block: stacked basis tensors and their images under phi
    blocks_data = []
    for b, nb in enumerate(alg.blocks):
        cols = bases[b]
        r = cols.shape[1]
        if r == 0:
            blocks_data.append(None)
            continue
        tensor = np.zeros((r * nb, E.n * nb, nb), dtype=np.complex128)
        for t in range(nb):
            tensor[t::nb, :, t] = cols.T
        mapped = np.einsum("ab,jbk->jak", phi.matrix[b], tensor)
        blocks_data.append((tensor, mapped))

    sup_seen = 0.0
    for trial in range(trial_budget):
        coeffs = (
            rng.standard_normal(E.complex_dim) + 1j * rng.standard_normal(E.complex_dim)
        ) / np.sqrt(2)
        x = E.from_coefficients(coeffs)
        xn = x.norm()
        if xn <= profile.zero:
            continue
        x = (1.0 / xn) * x
        phix = phi(x)

        best: tuple[float, int, np.ndarray] | None = None
        idx = 0
        for b, nb in enumerate(alg.blocks):
            if blocks_data[b] is None:
                continue
            tensor, mapped = blocks_data[b]
            d_b = tensor.shape[0]
            constraints = np.einsum("ba,jbk->jak", x.data[b].conj(), tensor)
            k_mat = constraints.reshape(d_b, nb * nb).T
            u_svd, s, vh = np.linalg.svd(k_mat, full_matrices=True)
            lead = s[0] if s.size else 0.0
            null_mask = np.concatenate(
                [s <= 1e-12 * max(1.0, lead), np.ones(d_b - len(s), dtype=bool)]
            )
            null_basis = vh.conj().T[:, null_mask]
            if null_basis.shape[1] == 0:
                idx += d_b
                continue
            viol = np.einsum("ba,jbk->jak", phix.data[b].conj(), mapped)
            m_mat = viol.reshape(d_b, nb * nb).T @ null_basis
            sv = np.linalg.svd(m_mat, compute_uv=False)
            top = float(sv[0]) if sv.size else 0.0
            sup_seen = max(sup_seen, top)
            if top > tol and (best is None or top > best[0]):
                _, _, vh_m = np.linalg.svd(m_mat, full_matrices=False)
                local = null_basis @ vh_m.conj().T[:, 0]
                full = np.zeros(E.complex_dim, dtype=np.complex128)
                full[idx : idx + d_b] = local
                best = (top, b, full)
            idx += d_b

        if best is None:
            continue
        y = E.from_coefficients(best[2])
        yn = y.norm()
        if yn <= profile.zero:
            continue
        y = (1.0 / yn) * y
        magnitude = phi(x).inner(phi(y)).norm()
        orth = x.inner(y).norm()
        if magnitude > tol and orth <= 1e-10:
            return ViolationWitness(
                x=x, y=y, magnitude=magnitude, orthogonality_residual=orth, trial=trial
            )
    return SearchExhausted(trials=trial_budget, sup_restricted_norm=sup_seen)


# ---------------------------------------------------------------------------
# factorization and structural analyses
# ---------------------------------------------------------------------------


def _scaled_domain(phi: ModuleMap, cert: PreserverCertificate,
                   profile: ToleranceProfile) -> HilbertModule:
    """The submodule Ew: the domain restricted to blocks where the witness acts."""
    E = phi.domain
    support = cert.witness.support(profile.zero)
    blocks = [
        np.array(m) if b in support else np.zeros_like(m)
        for b, m in enumerate(E.projection.data)
    ]
    from .algebra import AmplifiedElement

    return HilbertModule(E.algebra, E.n, AmplifiedElement(E.algebra, E.n, tuple(blocks)))


def decompose(
    phi: ModuleMap,
    cert: PreserverCertificate,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> Decomposition:
    """Factor a certified map as an inner-product isometry after central scaling."""
    E = phi.domain
    lam = cert.witness.scalars
    support = cert.witness.support(profile.zero)

    kernel_dim = phi.kernel_dim(profile)
    root_kernel_dim = sum(
        E.block_rank(b) * nb
        for b, nb in enumerate(E.algebra.blocks)
        if b not in support
    )
    if kernel_dim != root_kernel_dim:
        raise InternalInconsistencyError(
            f"kernel dimensions disagree ({kernel_dim} vs {root_kernel_dim}); "
            "the certificate does not match the map"
        )

    scaled = _scaled_domain(phi, cert, profile)
    image = image_submodule(phi, profile)
    theta_blocks = tuple(
        (t / np.sqrt(lam[b])) if b in support else np.zeros_like(t)
        for b, t in enumerate(phi.matrix)
    )
    isometry = ModuleMap(scaled, image, theta_blocks)

    # inner-product preservation over the basis of Ew
    basis = complex_basis(scaled)
    iso_res = 0.0
    if basis:
        mapped = [isometry(z) for z in basis]
        for i, zi in enumerate(basis):
            for j, zj in enumerate(basis):
                iso_res = max(
                    iso_res,
                    (mapped[i].inner(mapped[j]) - zi.inner(zj)).norm(),
                )

    fact_res = max(
        float(np.linalg.norm(np.sqrt(lam[b]) * isometry.matrix[b] - phi.matrix[b], 2))
        if phi.matrix[b].size
        else 0.0
        for b in range(E.algebra.num_blocks)
    )

    # R_w . Theta^{-1} coincides with the adjoint of the induced map onto the image
    adjoint = phi.adjoint()
    adj_res = max(
        float(
            np.linalg.norm(
                np.sqrt(lam[b]) * isometry.matrix[b].conj().T - adjoint.matrix[b], 2
            )
        )
        if adjoint.matrix[b].size
        else 0.0
        for b in range(E.algebra.num_blocks)
    )

    return Decomposition(
        root=cert.root,
        isometry=isometry,
        image=image,
        scaled_domain=scaled,
        kernel_dim=kernel_dim,
        root_kernel_dim=root_kernel_dim,
        isometry_residual=iso_res,
        factorization_residual=fact_res,
        adjoint_residual=adj_res,
    )


def image_ideal_check(
    phi: ModuleMap,
    cert: PreserverCertificate,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> IdealCheckReport:
    """Compare the image ideal with the witness support inside the domain ideal."""
    image = image_submodule(phi, profile)
    return IdealCheckReport(
        image_support=image.ideal(profile).support,
        witness_support=cert.witness.support(profile.zero) & phi.domain.ideal(profile).support,
        domain_support=phi.domain.ideal(profile).support,
    )


def injectivity_analysis(
    phi: ModuleMap,
    cert: PreserverCertificate,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> InjectivityReport:
    """Kernel data; for injective maps, certify the inverse on the image."""
    kernel_dim = phi.kernel_dim(profile)
    injective = kernel_dim == 0
    image = image_submodule(phi, profile)
    ideals_equal = image.ideal(profile).support == phi.domain.ideal(profile).support

    inverse_witness = None
    inverse_residual = None
    reciprocal_dev = None
    if injective and not image.is_zero(profile):
        phi0 = corestrict(phi, image)
        inv_blocks = tuple(np.linalg.pinv(t, rcond=1e-12) for t in phi0.matrix)
        inverse = ModuleMap(image, phi.domain, inv_blocks)
        res = extract_witness(inverse, profile.certification, profile=profile)
        if isinstance(res, NotPreserver):
            raise InternalInconsistencyError(
                "inverse of a certified injective preserver failed certification"
            )
        inverse_witness = res.witness
        inverse_residual = res.residual
        expected = cert.witness.pinv(profile.zero)
        reciprocal_dev = max(
            abs(a - b) for a, b in zip(inverse_witness.scalars, expected.scalars)
        )

    root_image_is_domain = None
    if ideals_equal:
        root_image_is_domain = cert.witness.support(profile.zero) >= phi.domain.ideal(
            profile
        ).support

    return InjectivityReport(
        kernel_dim=kernel_dim,
        injective=injective,
        ideals_equal=ideals_equal,
        root_image_is_domain=root_image_is_domain,
        inverse_witness=inverse_witness,
        inverse_residual=inverse_residual,
        reciprocal_deviation=reciprocal_dev,
    )


def bijective_analysis(
    phi: ModuleMap,
    tol: float | None = None,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> BijectivityReport:
    """For a bijective certified map, verify that central rescaling is unitary.

    Builds ``x -> T(x) w^{-1}`` and measures how far it is from preserving
    inner products; also reports ``||w^{-1}||``, the degradation metric for
    the discretized interval galleries.
    """
    res = extract_witness(phi, tol, profile=profile)
    if isinstance(res, NotPreserver):
        raise PreconditionError("map is not a certified orthogonality preserver")
    kernel_dim = phi.kernel_dim(profile)
    if kernel_dim != 0:
        raise PreconditionError(f"map is not injective (kernel dimension {kernel_dim})")
    image = image_submodule(phi, profile)
    defect = (image.projection - phi.codomain.projection).norm()
    if defect > 1e-8:
        raise PreconditionError(f"map is not surjective (projection defect {defect:.3g})")

    domain_support = phi.domain.ideal(profile).support
    codomain_support = phi.codomain.ideal(profile).support
    lam = res.witness.scalars
    supported = [lam[b] for b in sorted(domain_support)]
    min_scalar = min(supported) if supported else 0.0
    invertible = min_scalar > profile.zero

    inv_root = res.root.pinv(profile.zero)
    psi = ModuleMap(
        phi.domain,
        phi.codomain,
        tuple(s * t for s, t in zip(inv_root.scalars, phi.matrix)),
    )
    basis = complex_basis(phi.domain)
    mapped = [psi(z) for z in basis]
    unitary_res = 0.0
    for i, zi in enumerate(basis):
        for j, zj in enumerate(basis):
            unitary_res = max(
                unitary_res, (mapped[i].inner(mapped[j]) - zi.inner(zj)).norm()
            )

    return BijectivityReport(
        ideals_equal=domain_support == codomain_support,
        witness_invertible=invertible,
        min_witness_scalar=min_scalar,
        unitary_residual=unitary_res,
        inverse_root_norm=inv_root.norm(),
        surjectivity_defect=defect,
    )

"""Instance generation and serialization.

Instances bundle an algebra, a domain and codomain module, a module map,
and optionally the central multiplier that was planted when the map was
constructed.  Generators are deterministic per seed; the random source is
numpy's PCG64 generator so the draws are reproducible from the documented
algorithm and the 64-bit seed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

import numpy as np

from .algebra import (
    AlgebraElement,
    AmplifiedElement,
    CentralPositive,
    FdCStarAlgebra,
    IdealDescriptor,
    make_algebra,
)
from .errors import GenerationError, InvalidInputError, ValidationError
from .modules import HilbertModule, ModuleMap, make_module
from .serialize import (
    SCHEMA_VERSION,
    check_keys,
    decode_blocks,
    emit_document,
    encode_blocks,
    expect_int,
    expect_schema,
    parse_document,
)
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "InstanceBundle",
    "gen_algebra",
    "gen_module",
    "gen_planted_preserver",
    "gen_adversarial",
    "gen_perturbed",
    "gallery",
    "GALLERY_NAMES",
    "bundle_to_document",
    "bundle_from_document",
    "save_instance",
    "load_instance",
    "dumps_instance",
    "loads_instance",
]


@dataclass(frozen=True, eq=False)
class InstanceBundle:
    """A generated problem instance with its provenance."""

    algebra: FdCStarAlgebra
    domain: HilbertModule
    codomain: HilbertModule
    phi: ModuleMap
    planted: CentralPositive | None
    seed: int
    provenance: str


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def _haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Orthonormal columns from QR of a Ginibre draw, R-diagonal phases absorbed."""
    q, r = np.linalg.qr(_ginibre(rng, rows, cols))
    d = np.diagonal(r)
    safe = np.where(np.abs(d) > 0, d, 1.0)
    return q * (safe / np.abs(safe))


def gen_algebra(seed: int, max_blocks: int, max_dim: int) -> FdCStarAlgebra:
    """Uniform block count in [1, max_blocks], sizes in [1, max_dim]."""
    if max_blocks < 1 or max_dim < 1:
        raise InvalidInputError("bounds must be >= 1")
    rng = _rng(seed)
    count = int(rng.integers(1, max_blocks + 1))
    sizes = [int(rng.integers(1, max_dim + 1)) for _ in range(count)]
    return make_algebra(sizes)


def gen_module(
    rng: np.random.Generator,
    algebra: FdCStarAlgebra,
    n: int,
    min_ranks: tuple[int, ...] | None = None,
) -> HilbertModule:
    """Random module pA^n: per block a Haar-rotated projection of random rank.

    ``min_ranks`` forces a lower bound per block (used to build codomains
    large enough to receive isometric images).  At least one block is forced
    nonzero.
    """
    ranks = []
    for b, nb in enumerate(algebra.blocks):
        top = n * nb
        low = min_ranks[b] if min_ranks is not None else 0
        if low > top:
            raise GenerationError(
                f"block {b}: cannot fit rank {low} inside {n} generators of size {nb}"
            )
        ranks.append(int(rng.integers(low, top + 1)))
    if all(r == 0 for r in ranks):
        ranks[int(rng.integers(0, len(ranks)))] = 1
    blocks = []
    for nb, r in zip(algebra.blocks, ranks):
        if r == 0:
            blocks.append(np.zeros((n * nb, n * nb)))
        else:
            q = _haar_isometry(rng, n * nb, r)
            blocks.append(q @ q.conj().T)
    return make_module(algebra, n, AmplifiedElement(algebra, n, tuple(blocks)))


def _planted_map(
    rng: np.random.Generator,
    domain: HilbertModule,
    codomain: HilbertModule,
    invertible: bool = False,
) -> tuple[ModuleMap, CentralPositive]:
    """Central scaling followed by a random per-block module isometry."""
    alg = domain.algebra
    ideal = domain.ideal()
    lams = np.zeros(alg.num_blocks)
    supp = sorted(ideal.support)
    for b in supp:
        if invertible or rng.uniform() >= 0.25:
            lams[b] = rng.uniform(0.25, 2.0)
    if not invertible and all(lams[b] == 0.0 for b in supp):
        lams[supp[0]] = rng.uniform(0.25, 2.0)

    matrix = []
    for b, nb in enumerate(alg.blocks):
        rows = codomain.n * nb
        cols = domain.n * nb
        if lams[b] <= 0.0:
            matrix.append(np.zeros((rows, cols)))
            continue
        r = domain.block_rank(b)
        r_target = codomain.block_rank(b)
        if r_target < r:
            raise GenerationError(
                f"codomain block {b} has rank {r_target} < {r}: "
                "no isometric image of the scaled domain fits"
            )
        w_dom, v_dom = np.linalg.eigh(
            (domain.projection.data[b] + domain.projection.data[b].conj().T) / 2
        )
        u_dom = v_dom[:, w_dom > 0.5]
        w_cod, v_cod = np.linalg.eigh(
            (codomain.projection.data[b] + codomain.projection.data[b].conj().T) / 2
        )
        u_cod = v_cod[:, w_cod > 0.5]
        frame = u_cod @ _haar_isometry(rng, r_target, r)
        matrix.append(np.sqrt(lams[b]) * frame @ u_dom.conj().T)
    phi = ModuleMap(domain, codomain, tuple(matrix))
    witness = CentralPositive(ideal, tuple(lams))
    return phi, witness


def gen_planted_preserver(
    seed: int, domain: HilbertModule, codomain: HilbertModule, invertible: bool = False
) -> InstanceBundle:
    """Instance with a known witness: plant the scaling, then a random isometry."""
    rng = _rng(seed)
    phi, witness = _planted_map(rng, domain, codomain, invertible=invertible)
    return InstanceBundle(
        algebra=domain.algebra,
        domain=domain,
        codomain=codomain,
        phi=phi,
        planted=witness,
        seed=seed,
        provenance="planted-preserver",
    )


def gen_adversarial(seed: int, domain: HilbertModule, codomain: HilbertModule) -> InstanceBundle:
    """Dense random map, generically not a preserver on rich shapes.

    On modules with trivial orthogonality (every supported block of rank
    one) every module map certifies; ``domain.has_trivial_orthogonality()``
    flags such instances.
    """
    rng = _rng(seed)
    matrix = [
        _ginibre(rng, codomain.n * nb, domain.n * nb) for nb in domain.algebra.blocks
    ]
    phi = ModuleMap(domain, codomain, tuple(matrix))
    nrm = phi.norm()
    if nrm > 0:
        phi = (1.0 / nrm) * phi
    return InstanceBundle(
        algebra=domain.algebra,
        domain=domain,
        codomain=codomain,
        phi=phi,
        planted=None,
        seed=seed,
        provenance="adversarial",
    )


def gen_perturbed(
    seed: int, domain: HilbertModule, codomain: HilbertModule, magnitude: float
) -> InstanceBundle:
    """A planted preserver plus ``magnitude`` times a normalized dense map."""
    rng = _rng(seed)
    phi, witness = _planted_map(rng, domain, codomain)
    noise = ModuleMap(
        domain,
        codomain,
        tuple(_ginibre(rng, codomain.n * nb, domain.n * nb) for nb in domain.algebra.blocks),
    )
    nrm = noise.norm()
    if nrm > 0:
        noise = (1.0 / nrm) * noise
    return InstanceBundle(
        algebra=domain.algebra,
        domain=domain,
        codomain=codomain,
        phi=phi + float(magnitude) * noise,
        planted=witness,
        seed=seed,
        provenance="perturbed",
    )


# ---------------------------------------------------------------------------
# gallery
# ---------------------------------------------------------------------------

GALLERY_NAMES = (
    "example-3.6d",
    "conjugate-module(k)",
    "interval-C01(N)",
    "interval-C0-halfopen(N)",
    "vanishing-at-midpoint(N)",
)

_GALLERY_RE = re.compile(r"^(?P<base>[A-Za-z0-9.\-]+?)(?:\((?P<param>\d+)\))?$")


def _matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.complex128)
    m[i, j] = 1.0
    return m


def _interval_instance(name: str, grid_size: int) -> InstanceBundle:
    """Diagonal discretization of the unit interval: one 1x1 block per grid point.

    The map is right multiplication by the grid function t -> t, so the
    planted multiplier is its square.  The continuum pathologies (a
    non-invertible scaling, a missing isometry) survive only as the growth
    of ||w^{-1}|| = N as the grid refines.
    """
    if grid_size < 1:
        raise InvalidInputError("grid size must be >= 1")
    alg = make_algebra([1] * grid_size)
    eye = AmplifiedElement.identity(alg, 1)
    module = make_module(alg, 1, eye)
    ts = [(i + 1) / grid_size for i in range(grid_size)]
    phi = ModuleMap(module, module, tuple(np.array([[t]]) for t in ts))
    witness = CentralPositive(alg.full_ideal(), tuple(t * t for t in ts))
    return InstanceBundle(
        algebra=alg,
        domain=module,
        codomain=module,
        phi=phi,
        planted=witness,
        seed=0,
        provenance=f"gallery:{name}",
    )


def gallery(name: str) -> InstanceBundle:
    """Named exact instances; parenthesized names take an integer parameter."""
    m = _GALLERY_RE.match(name)
    if not m:
        raise InvalidInputError(f"unrecognized gallery name {name!r}")
    base = m.group("base")
    param = int(m.group("param")) if m.group("param") else None

    if base == "example-3.6d":
        if param is not None:
            raise InvalidInputError("example-3.6d takes no parameter")
        alg = make_algebra([1, 1])
        eye = AmplifiedElement.identity(alg, 1)
        domain = make_module(alg, 1, eye)
        proj = AmplifiedElement(alg, 1, (np.array([[1.0]]), np.array([[0.0]])))
        codomain = make_module(alg, 1, proj)
        phi = ModuleMap(domain, codomain, (np.array([[1.0]]), np.array([[0.0]])))
        witness = CentralPositive(alg.full_ideal(), (1.0, 0.0))
        return InstanceBundle(
            algebra=alg,
            domain=domain,
            codomain=codomain,
            phi=phi,
            planted=witness,
            seed=0,
            provenance="gallery:example-3.6d",
        )

    if base == "conjugate-module":
        k = 2 if param is None else param
        if k < 2:
            raise InvalidInputError("conjugate-module needs block size >= 2")
        alg = make_algebra([k])
        p = AmplifiedElement(alg, 1, (_matrix_unit(k, 0, 0),))
        module = make_module(alg, 1, p)
        phi = ModuleMap(module, module, (2.0 * _matrix_unit(k, 0, 0),))
        witness = CentralPositive(alg.full_ideal(), (4.0,))
        return InstanceBundle(
            algebra=alg,
            domain=module,
            codomain=module,
            phi=phi,
            planted=witness,
            seed=0,
            provenance=f"gallery:conjugate-module({k})",
        )

    if base in ("interval-C01", "interval-C0-halfopen"):
        grid = 4 if param is None else param
        return _interval_instance(f"{base}({grid})", grid)

    if base == "vanishing-at-midpoint":
        grid = 4 if param is None else param
        if grid < 3:
            raise InvalidInputError("vanishing-at-midpoint needs grid size >= 3")
        points = grid - 1  # interior grid i/N, i = 1..N-1
        mid = grid // 2 - 1  # block of the point nearest 1/2
        alg = make_algebra([1] * points)
        p_blocks = tuple(
            np.array([[0.0 if b == mid else 1.0]]) for b in range(points)
        )
        p = AmplifiedElement(alg, 1, p_blocks)
        domain = make_module(alg, 1, p)
        codomain = make_module(alg, 1, AmplifiedElement.identity(alg, 1))
        phi = ModuleMap(domain, codomain, tuple(np.array(b) for b in p_blocks))
        ideal = IdealDescriptor(alg, frozenset(b for b in range(points) if b != mid))
        witness = CentralPositive(
            ideal, tuple(0.0 if b == mid else 1.0 for b in range(points))
        )
        return InstanceBundle(
            algebra=alg,
            domain=domain,
            codomain=codomain,
            phi=phi,
            planted=witness,
            seed=0,
            provenance=f"gallery:vanishing-at-midpoint({grid})",
        )

    raise InvalidInputError(f"unknown gallery name {name!r}")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _module_doc(module: HilbertModule) -> dict:
    return {"n": module.n, "p": encode_blocks(module.projection.data)}


def bundle_to_document(bundle: InstanceBundle) -> dict:
    doc = {
        "schema": SCHEMA_VERSION,
        "kind": "instance",
        "provenance": bundle.provenance,
        "seed": bundle.seed,
        "algebra": {"blocks": list(bundle.algebra.blocks)},
        "module": _module_doc(bundle.domain),
        "codomain": _module_doc(bundle.codomain),
        "map": encode_blocks(bundle.phi.matrix),
    }
    if bundle.planted is not None:
        doc["planted_u"] = {
            "support": sorted(bundle.planted.ideal.support),
            "scalars": list(bundle.planted.scalars),
        }
    return doc


def _decode_module(
    doc, algebra: FdCStarAlgebra, where: str, profile: ToleranceProfile
) -> HilbertModule:
    check_keys(doc, ["n", "p"], [], where)
    n = expect_int(doc["n"], f"{where}.n")
    if n < 1:
        raise ValidationError(f"{where}.n: must be >= 1")
    shapes = [(n * nb, n * nb) for nb in algebra.blocks]
    blocks = decode_blocks(doc["p"], shapes, f"{where}.p")
    p = AmplifiedElement(algebra, n, blocks)
    defect = p.projection_defect()
    if defect > profile.projection:
        raise ValidationError(f"{where}.p: not a projection (defect {defect:.3g})")
    if p.norm() <= profile.zero:
        raise ValidationError(f"{where}.p: the zero projection is not a valid module")
    return HilbertModule(algebra, n, p)


def bundle_from_document(
    doc, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> InstanceBundle:
    expect_schema(doc, "instance")
    check_keys(
        doc,
        ["schema", "kind", "provenance", "seed", "algebra", "module", "codomain", "map"],
        ["planted_u"],
        "instance",
    )
    check_keys(doc["algebra"], ["blocks"], [], "algebra")
    blocks = doc["algebra"]["blocks"]
    if not isinstance(blocks, list) or not blocks:
        raise ValidationError("algebra.blocks: expected a nonempty list")
    if any(isinstance(b, bool) or not isinstance(b, int) or b < 1 for b in blocks):
        raise ValidationError("algebra.blocks: entries must be positive integers")
    algebra = make_algebra(blocks)
    domain = _decode_module(doc["module"], algebra, "module", profile)
    codomain = _decode_module(doc["codomain"], algebra, "codomain", profile)
    shapes = [(codomain.n * nb, domain.n * nb) for nb in algebra.blocks]
    matrix = decode_blocks(doc["map"], shapes, "map")
    phi = ModuleMap(domain, codomain, matrix)

    planted = None
    if "planted_u" in doc:
        check_keys(doc["planted_u"], ["support", "scalars"], [], "planted_u")
        support = doc["planted_u"]["support"]
        scalars = doc["planted_u"]["scalars"]
        if not isinstance(support, list) or any(
            isinstance(b, bool) or not isinstance(b, int) for b in support
        ):
            raise ValidationError("planted_u.support: expected integer block indices")
        if not isinstance(scalars, list) or len(scalars) != algebra.num_blocks:
            raise ValidationError("planted_u.scalars: expected one value per block")
        try:
            planted = CentralPositive(
                IdealDescriptor(algebra, frozenset(support)),
                tuple(float(s) for s in scalars),
            )
        except InvalidInputError as e:
            raise ValidationError(f"planted_u: {e}") from e

    seed = expect_int(doc["seed"], "seed")
    if not isinstance(doc["provenance"], str):
        raise ValidationError("provenance: expected a string")
    return InstanceBundle(
        algebra=algebra,
        domain=domain,
        codomain=codomain,
        phi=phi,
        planted=planted,
        seed=seed,
        provenance=doc["provenance"],
    )


def dumps_instance(bundle: InstanceBundle) -> str:
    return emit_document(bundle_to_document(bundle)) + "\n"


def loads_instance(text: str, profile: ToleranceProfile = DEFAULT_TOLERANCES) -> InstanceBundle:
    return bundle_from_document(parse_document(text), profile)


def save_instance(bundle: InstanceBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_instance(bundle))


def load_instance(path, profile: ToleranceProfile = DEFAULT_TOLERANCES) -> InstanceBundle:
    with open(path, "r", encoding="utf-8") as f:
        return loads_instance(f.read(), profile)

"""Linking algebra of a module and the corner extensions of certified maps.

The linking algebra of E = pA^n is the corner of Mat_{n+1}(A) whose entries
are a module operator, a column, a conjugated row and an ideal element.  The
componentwise product below is the primary representation; flattening into
Mat_{n+1}(A) and multiplying there is the independent oracle every identity
is checked against.

For a certified orthogonality preserver the corner data transports to the
image module: rank-one operators push forward through the map, and the two
central multipliers built from the witness and its square root turn the
transported corner map into a pair of twisted homomorphisms (one
multiplicative, one compatible with the involution).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraElement,
    AmplifiedElement,
    CentralPositive,
    IdealDescriptor,
)
from .errors import IncompatibilityError, PreconditionError
from .modules import (
    CompactOperator,
    HilbertModule,
    ModuleElement,
    ModuleMap,
    corestrict,
    image_submodule,
    random_element,
    rank_one_operator,
)
from .preserver import PreserverCertificate
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "LinkingAlgebra",
    "LinkingElement",
    "LinkingMultiplier",
    "build_linking",
    "embed_element",
    "multiplier_apply",
    "PreserverExtension",
    "induced_compact_map",
    "corner_extension",
    "extension_pair",
]


@dataclass(frozen=True, eq=False)
class LinkingAlgebra:
    """Corner algebra combining module operators, columns, rows and the ideal."""

    module: HilbertModule
    ideal: IdealDescriptor

    def element(
        self,
        theta: CompactOperator,
        x: ModuleElement,
        y: ModuleElement,
        a: AlgebraElement,
    ) -> "LinkingElement":
        return LinkingElement(self, theta, x, y, self.ideal.compress(a))

    def zero(self) -> "LinkingElement":
        return LinkingElement(
            self,
            CompactOperator.zero(self.module),
            self.module.zero_element(),
            self.module.zero_element(),
            self.module.algebra.zero(),
        )

    def embed(self, x: ModuleElement) -> "LinkingElement":
        """Canonical embedding of a module element into the top-right corner."""
        return LinkingElement(
            self,
            CompactOperator.zero(self.module),
            x,
            self.module.zero_element(),
            self.module.algebra.zero(),
        )

    def random_element(
        self, rng: np.random.Generator, normalize: bool = True
    ) -> "LinkingElement":
        mod = self.module
        theta = CompactOperator(
            mod,
            tuple(
                (rng.standard_normal((mod.n * nb, mod.n * nb))
                 + 1j * rng.standard_normal((mod.n * nb, mod.n * nb))) / np.sqrt(2)
                for nb in mod.algebra.blocks
            ),
        )
        c = LinkingElement(
            self,
            theta,
            random_element(mod, rng),
            random_element(mod, rng),
            self.ideal.compress(mod.algebra.random_element(rng)),
        )
        if normalize:
            nrm = c.norm()
            if nrm > 0:
                c = (1.0 / nrm) * c
        return c


def build_linking(
    module: HilbertModule, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> LinkingAlgebra:
    """The linking algebra of a module, over its inner-product ideal."""
    return LinkingAlgebra(module, module.ideal(profile))


@dataclass(frozen=True, eq=False)
class LinkingElement:
    """Corner element (theta, x, conj-row(y), a).

    The stored ``row`` component is the module element whose adjoint forms
    the bottom-left row of the flattened matrix.
    """

    algebra: LinkingAlgebra
    operator: CompactOperator
    column: ModuleElement
    row: ModuleElement
    corner: AlgebraElement

    def _check_same(self, other: "LinkingElement") -> None:
        if self.algebra.module is not other.algebra.module:
            raise IncompatibilityError("linking elements over different modules")

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "LinkingElement") -> "LinkingElement":
        self._check_same(other)
        return LinkingElement(
            self.algebra,
            self.operator + other.operator,
            self.column + other.column,
            self.row + other.row,
            self.corner + other.corner,
        )

    def __sub__(self, other: "LinkingElement") -> "LinkingElement":
        self._check_same(other)
        return LinkingElement(
            self.algebra,
            self.operator - other.operator,
            self.column - other.column,
            self.row - other.row,
            self.corner - other.corner,
        )

    def __rmul__(self, scalar) -> "LinkingElement":
        return LinkingElement(
            self.algebra,
            complex(scalar) * self.operator,
            complex(scalar) * self.column,
            # the row sits under a conjugation in the flat picture
            complex(np.conj(scalar)) * self.row,
            complex(scalar) * self.corner,
        )

    # -- *-algebra structure --------------------------------------------------

    def adjoint(self) -> "LinkingElement":
        return LinkingElement(
            self.algebra,
            self.operator.adjoint(),
            self.row,
            self.column,
            self.corner.adjoint(),
        )

    def mul(self, other: "LinkingElement") -> "LinkingElement":
        """Componentwise corner product (the flat matrix product, spelled out)."""
        self._check_same(other)
        theta, x, y, a = self.operator, self.column, self.row, self.corner
        theta2, x2, y2, a2 = other.operator, other.column, other.row, other.corner
        return LinkingElement(
            self.algebra,
            theta * theta2 + rank_one_operator(x, y2),
            theta(x2) + x.right(a2),
            theta2.adjoint()(y) + y2.right(a.adjoint()),
            y.inner(x2) + a * a2,
        )

    def __matmul__(self, other: "LinkingElement") -> "LinkingElement":
        return self.mul(other)

    # -- flat oracle ----------------------------------------------------------

    def flatten(self) -> AmplifiedElement:
        """Assemble the (n+1) x (n+1) A-matrix realization."""
        mod = self.algebra.module
        n = mod.n
        blocks = []
        for b, nb in enumerate(mod.algebra.blocks):
            flat = np.zeros(((n + 1) * nb, (n + 1) * nb), dtype=np.complex128)
            flat[: n * nb, : n * nb] = self.operator.data[b]
            flat[: n * nb, n * nb :] = self.column.data[b]
            flat[n * nb :, : n * nb] = self.row.data[b].conj().T
            flat[n * nb :, n * nb :] = self.corner.data[b]
            blocks.append(flat)
        return AmplifiedElement(mod.algebra, n + 1, tuple(blocks))

    def mul_flat(self, other: "LinkingElement") -> "LinkingElement":
        """Multiply in Mat_{n+1}(A) and read the corners back (oracle path)."""
        self._check_same(other)
        prod = self.flatten() * other.flatten()
        return _from_flat(self.algebra, prod)

    def norm(self) -> float:
        return self.flatten().norm()


def _from_flat(algebra: LinkingAlgebra, flat: AmplifiedElement) -> LinkingElement:
    mod = algebra.module
    n = mod.n
    theta, col, row, corner = [], [], [], []
    for b, nb in enumerate(mod.algebra.blocks):
        m = flat.data[b]
        theta.append(m[: n * nb, : n * nb])
        col.append(m[: n * nb, n * nb :])
        row.append(m[n * nb :, : n * nb].conj().T)
        corner.append(m[n * nb :, n * nb :])
    return LinkingElement(
        algebra,
        CompactOperator(mod, tuple(theta)),
        ModuleElement(mod, tuple(col)),
        ModuleElement(mod, tuple(row)),
        algebra.ideal.compress(AlgebraElement(mod.algebra, tuple(corner))),
    )


def embed_element(algebra: LinkingAlgebra, x: ModuleElement) -> LinkingElement:
    return algebra.embed(x)


@dataclass(frozen=True, eq=False)
class LinkingMultiplier:
    """Central multiplier pair of a linking algebra.

    ``op_scale`` acts on the operator corner (and one off-diagonal slot),
    ``ideal_scale`` on the ideal corner (and the other slot); the flat
    realization is the central matrix diag(op_scale x 1_n, ideal_scale).
    """

    op_scale: CentralPositive
    ideal_scale: CentralPositive

    def apply(self, c: LinkingElement, side: str) -> LinkingElement:
        v, u = self.op_scale, self.ideal_scale
        if side == "left":
            return LinkingElement(
                c.algebra,
                c.operator.scale_right(v),
                c.column.right(v),
                c.row.right(u),
                c.corner * u.as_element(),
            )
        if side == "right":
            return LinkingElement(
                c.algebra,
                c.operator.scale_right(v),
                c.column.right(u),
                c.row.right(v),
                c.corner * u.as_element(),
            )
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def flatten(self, algebra: LinkingAlgebra) -> AmplifiedElement:
        mod = algebra.module
        n = mod.n
        blocks = []
        for b, nb in enumerate(mod.algebra.blocks):
            m = np.zeros(((n + 1) * nb, (n + 1) * nb), dtype=np.complex128)
            m[: n * nb, : n * nb] = self.op_scale.scalars[b] * np.eye(n * nb)
            m[n * nb :, n * nb :] = self.ideal_scale.scalars[b] * np.eye(nb)
            blocks.append(m)
        return AmplifiedElement(mod.algebra, n + 1, tuple(blocks))


def multiplier_apply(mult: LinkingMultiplier, c: LinkingElement, side: str) -> LinkingElement:
    return mult.apply(c, side)


# ---------------------------------------------------------------------------
# corner extension of a certified preserver
# ---------------------------------------------------------------------------


class PreserverExtension:
    """Transport of linking-corner data through a certified preserver.

    Exposes the pushforward of module operators, the componentwise corner
    map into the linking algebra of the image, and the two multiplier-twisted
    extensions whose product laws characterize orthogonality preservation.
    """

    def __init__(
        self,
        phi: ModuleMap,
        cert: PreserverCertificate,
        profile: ToleranceProfile = DEFAULT_TOLERANCES,
    ) -> None:
        if cert.phi is not phi:
            raise PreconditionError("certificate does not belong to this map")
        self.phi = phi
        self.cert = cert
        self.profile = profile
        self.image = image_submodule(phi, profile)
        self.phi0 = corestrict(phi, self.image)
        self.domain_linking = build_linking(phi.domain, profile)
        self.image_linking = LinkingAlgebra(self.image, self.image.ideal(profile))

        img_support = self.image_linking.ideal.support
        img_ideal = self.image_linking.ideal
        alg = phi.domain.algebra
        self.witness_on_image = CentralPositive(
            img_ideal,
            tuple(
                cert.witness.scalars[b] if b in img_support else 0.0
                for b in range(alg.num_blocks)
            ),
        )
        self.root_on_image = self.witness_on_image.sqrt()
        self.unit_on_image = CentralPositive(
            img_ideal,
            tuple(1.0 if b in img_support else 0.0 for b in range(alg.num_blocks)),
        )

    # multipliers of the image linking algebra
    @property
    def witness_multiplier(self) -> LinkingMultiplier:
        """Pair (1, u): the twist applied before products."""
        return LinkingMultiplier(self.unit_on_image, self.witness_on_image)

    @property
    def root_multiplier(self) -> LinkingMultiplier:
        """Pair (1, u^(1/2))."""
        return LinkingMultiplier(self.unit_on_image, self.root_on_image)

    @property
    def product_multiplier(self) -> LinkingMultiplier:
        """Pair (u, u): the twist appearing in the product law."""
        return LinkingMultiplier(self.witness_on_image, self.witness_on_image)

    @property
    def mixed_multiplier(self) -> LinkingMultiplier:
        """Pair (u, u^(1/2)): the twist in the adjoint product law."""
        return LinkingMultiplier(self.witness_on_image, self.root_on_image)

    def induced_compact_map(self, theta: CompactOperator) -> CompactOperator:
        """Pushforward of a module operator through the map and its adjoint."""
        t = self.phi0.matrix
        return CompactOperator(
            self.image,
            tuple(tm @ th @ tm.conj().T for tm, th in zip(t, theta.data)),
        )

    def corner_map(self, c: LinkingElement) -> LinkingElement:
        """Componentwise transport of a corner element to the image linking algebra."""
        if c.algebra.module is not self.phi.domain:
            raise IncompatibilityError("corner element does not live over the domain")
        ja = self.image_linking.ideal.compress(c.corner)
        return LinkingElement(
            self.image_linking,
            self.induced_compact_map(c.operator),
            self.phi0(c.column),
            self.phi0(c.row),
            ja,
        )

    def extension_pair(self, c: LinkingElement) -> tuple[LinkingElement, LinkingElement]:
        """The multiplicative and involutive extensions of the corner map.

        The first satisfies G(c) G(d) = M_(u,u) G(cd); the second satisfies
        D(c)* D(d) = M_(u,u^(1/2)) D(c* d).
        """
        base = self.corner_map(c)
        return (
            self.witness_multiplier.apply(base, "left"),
            self.root_multiplier.apply(base, "left"),
        )


def induced_compact_map(
    phi: ModuleMap,
    cert: PreserverCertificate,
    theta: CompactOperator,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> CompactOperator:
    return PreserverExtension(phi, cert, profile).induced_compact_map(theta)


def corner_extension(
    phi: ModuleMap,
    cert: PreserverCertificate,
    c: LinkingElement,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> LinkingElement:
    return PreserverExtension(phi, cert, profile).corner_map(c)


def extension_pair(
    phi: ModuleMap,
    cert: PreserverCertificate,
    c: LinkingElement,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> tuple[LinkingElement, LinkingElement]:
    return PreserverExtension(phi, cert, profile).extension_pair(c)

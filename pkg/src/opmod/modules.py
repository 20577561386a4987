"""Hilbert C*-modules E = pA^n over a block algebra, maps between them.

Elements are A-columns stored per block as (n*n_b) x n_b complex matrices
fixed by the module projection; module maps are A-matrices acting from the
left, which makes A-linearity automatic.  Everything is a pure computation
on immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    AmplifiedElement,
    CentralPositive,
    FdCStarAlgebra,
    IdealDescriptor,
)
from .errors import IncompatibilityError, InvalidInputError, ZeroModuleError
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "HilbertModule",
    "ModuleElement",
    "ModuleMap",
    "CompactOperator",
    "make_module",
    "inner_product",
    "module_norm",
    "right_action",
    "is_orthogonal",
    "compute_ideal",
    "complex_basis",
    "make_module_map",
    "apply_map",
    "map_norm",
    "adjoint_map",
    "rank_one_operator",
    "image_submodule",
    "corestrict",
    "random_element",
]


@dataclass(frozen=True, eq=False)
class HilbertModule:
    """E = pA^n for a projection p in Mat_n(A)."""

    algebra: FdCStarAlgebra
    n: int
    projection: AmplifiedElement

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError("module needs at least one generator")
        if self.projection.algebra != self.algebra or self.projection.order != self.n:
            raise InvalidInputError("projection does not match the module shape")

    # -- structure ------------------------------------------------------------

    def block_rank(self, b: int) -> int:
        return self.projection.block_rank(b)

    @property
    def complex_dim(self) -> int:
        return sum(
            self.block_rank(b) * n for b, n in enumerate(self.algebra.blocks)
        )

    def ideal(self, profile: ToleranceProfile = DEFAULT_TOLERANCES) -> IdealDescriptor:
        """Ideal generated by all inner products: the blocks carrying mass."""
        support = frozenset(
            b
            for b in range(self.algebra.num_blocks)
            if np.any(np.abs(self.projection.data[b]) > profile.zero)
        )
        return IdealDescriptor(self.algebra, support)

    def is_zero(self, profile: ToleranceProfile = DEFAULT_TOLERANCES) -> bool:
        return self.projection.norm() <= profile.zero

    def has_rank_one_blocks(self) -> bool:
        """True when every supported block has projection rank one.

        The compression corners p Mat_n(A) p are then scalar per block, so
        every module map out of this module certifies automatically; with a
        single supported block no two nonzero elements are orthogonal at all
        (the conjugate-module situation).
        """
        ranks = [self.block_rank(b) for b in range(self.algebra.num_blocks)]
        supported = [r for r in ranks if r > 0]
        return bool(supported) and all(r == 1 for r in supported)

    def zero_element(self) -> "ModuleElement":
        return ModuleElement(
            self,
            tuple(
                np.zeros((self.n * nb, nb)) for nb in self.algebra.blocks
            ),
        )

    def element(self, data: Sequence[np.ndarray]) -> "ModuleElement":
        return ModuleElement(self, tuple(data))

    def from_coefficients(self, coeffs: np.ndarray) -> "ModuleElement":
        """Linear combination of the deterministic complex basis."""
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if len(coeffs) != self.complex_dim:
            raise InvalidInputError("coefficient count does not match basis size")
        bases = _projection_column_bases(self.projection)
        data = []
        idx = 0
        for b, nb in enumerate(self.algebra.blocks):
            cols = bases[b]
            r = cols.shape[1]
            # basis order within a block is (eigenvector j, internal column t)
            block_coeffs = coeffs[idx : idx + r * nb].reshape(r, nb)
            idx += r * nb
            data.append(cols @ block_coeffs)
        return ModuleElement(self, tuple(data))


def make_module(
    algebra: FdCStarAlgebra,
    n: int,
    p: AmplifiedElement,
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> HilbertModule:
    """Validated module constructor: p must be a nonzero projection."""
    if p.algebra != algebra or p.order != n:
        raise InvalidInputError("projection shape does not match (algebra, n)")
    defect = p.projection_defect()
    if defect > profile.projection:
        raise InvalidInputError(f"p is not a projection (defect {defect:.3g})")
    if p.norm() <= profile.zero:
        raise ZeroModuleError("the zero projection defines the zero module")
    return HilbertModule(algebra, n, p)


@dataclass(frozen=True, eq=False)
class ModuleElement:
    """A-column of a module, stored per block as an (n*n_b) x n_b matrix."""

    module: HilbertModule
    data: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        n = self.module.n
        if len(self.data) != self.module.algebra.num_blocks:
            raise InvalidInputError("one block per algebra block required")
        frozen = []
        for nb, m in zip(self.module.algebra.blocks, self.data):
            if np.shape(m) != (n * nb, nb):
                raise InvalidInputError(
                    f"element block of shape {np.shape(m)}, expected {(n * nb, nb)}"
                )
            arr = np.array(m, dtype=np.complex128, order="C")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "data", tuple(frozen))

    def _check_same(self, other: "ModuleElement") -> None:
        if self.module is not other.module and (
            self.module.algebra != other.module.algebra or self.module.n != other.module.n
        ):
            raise IncompatibilityError("elements of incompatible modules")

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        self._check_same(other)
        return ModuleElement(self.module, tuple(a + b for a, b in zip(self.data, other.data)))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        self._check_same(other)
        return ModuleElement(self.module, tuple(a - b for a, b in zip(self.data, other.data)))

    def __rmul__(self, scalar) -> "ModuleElement":
        return ModuleElement(self.module, tuple(complex(scalar) * a for a in self.data))

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.module, tuple(-a for a in self.data))

    def inner(self, other: "ModuleElement") -> AlgebraElement:
        """A-valued inner product <self, other>, conjugate-linear on the left."""
        self._check_same(other)
        return AlgebraElement(
            self.module.algebra,
            tuple(a.conj().T @ b for a, b in zip(self.data, other.data)),
        )

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self).norm()))

    def right(self, a) -> "ModuleElement":
        """Right action x*a for an algebra element or central multiplier."""
        if isinstance(a, CentralPositive):
            a = a.as_element()
        if a.algebra != self.module.algebra:
            raise IncompatibilityError("right action by an element of another algebra")
        return ModuleElement(
            self.module, tuple(x @ m for x, m in zip(self.data, a.data))
        )

    def fixed_by_projection_residual(self) -> float:
        p = self.module.projection
        return max(
            float(np.linalg.norm(pm @ xm - xm, 2)) if xm.size else 0.0
            for pm, xm in zip(p.data, self.data)
        )


def inner_product(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    return x.inner(y)


def module_norm(x: ModuleElement) -> float:
    return x.norm()


def right_action(x: ModuleElement, a) -> ModuleElement:
    return x.right(a)


def is_orthogonal(x: ModuleElement, y: ModuleElement, tol: float) -> bool:
    """Relative orthogonality test: ||<x,y>|| <= tol * max(1, ||x||*||y||)."""
    if tol < 0:
        raise InvalidInputError("tolerance must be nonnegative")
    return x.inner(y).norm() <= tol * max(1.0, x.norm() * y.norm())


def compute_ideal(
    module: HilbertModule, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> IdealDescriptor:
    return module.ideal(profile)


def _projection_column_bases(
    p: AmplifiedElement, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> list[np.ndarray]:
    """Orthonormal column-space basis of each projection block, eigh order."""
    out = []
    for m in p.data:
        w, v = np.linalg.eigh((m + m.conj().T) / 2)
        out.append(v[:, w > 0.5])
    return out


def complex_basis(module: HilbertModule) -> list[ModuleElement]:
    """Deterministic complex basis of E, each element supported on one block.

    Ordering: blocks in algebra order, then the column-space basis of p_b in
    eigendecomposition order, then the internal column index.  The basis is
    orthonormal for the global Frobenius pairing.
    """
    bases = _projection_column_bases(module.projection)
    alg = module.algebra
    n = module.n
    out: list[ModuleElement] = []
    for b, nb in enumerate(alg.blocks):
        cols = bases[b]
        for j in range(cols.shape[1]):
            v = cols[:, j]
            for t in range(nb):
                data = [np.zeros((n * m, m), dtype=np.complex128) for m in alg.blocks]
                block = np.zeros((n * nb, nb), dtype=np.complex128)
                block[:, t] = v
                data[b] = block
                out.append(ModuleElement(module, tuple(data)))
    return out


def basis_block_index(x: ModuleElement) -> int:
    """Block carrying a single-block-supported element (largest mass wins)."""
    norms = [float(np.linalg.norm(m)) for m in x.data]
    return int(np.argmax(norms))


def random_element(
    module: HilbertModule, rng: np.random.Generator, normalize: bool = False
) -> ModuleElement:
    """Gaussian element: standard complex normal coefficients over the basis."""
    d = module.complex_dim
    coeffs = (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2)
    x = module.from_coefficients(coeffs)
    if normalize:
        nrm = x.norm()
        if nrm > 0:
            x = (1.0 / nrm) * x
    return x


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """A-linear map E -> F given by a per-block A-matrix, compressed to qTp."""

    domain: HilbertModule
    codomain: HilbertModule
    matrix: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        E, F = self.domain, self.codomain
        if E.algebra != F.algebra:
            raise IncompatibilityError("module maps require one common algebra")
        frozen = []
        for nb, pm, qm, tm in zip(
            E.algebra.blocks, E.projection.data, F.projection.data, self.matrix
        ):
            if np.shape(tm) != (F.n * nb, E.n * nb):
                raise InvalidInputError(
                    f"map block of shape {np.shape(tm)}, expected {(F.n * nb, E.n * nb)}"
                )
            arr = np.asarray(qm @ np.asarray(tm, dtype=np.complex128) @ pm, order="C")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "matrix", tuple(frozen))

    def __call__(self, x: ModuleElement) -> ModuleElement:
        if x.module.algebra != self.domain.algebra or x.module.n != self.domain.n:
            raise IncompatibilityError("element does not live in the domain module")
        return ModuleElement(
            self.codomain, tuple(t @ xm for t, xm in zip(self.matrix, x.data))
        )

    def __rmul__(self, scalar) -> "ModuleMap":
        return ModuleMap(
            self.domain, self.codomain, tuple(complex(scalar) * t for t in self.matrix)
        )

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(
            self.domain, self.codomain, tuple(a + b for a, b in zip(self.matrix, other.matrix))
        )

    def __sub__(self, other: "ModuleMap") -> "ModuleMap":
        return ModuleMap(
            self.domain, self.codomain, tuple(a - b for a, b in zip(self.matrix, other.matrix))
        )

    def norm(self) -> float:
        """Operator norm: sup ||T x|| over module-norm-one x (max block singular value)."""
        return max(float(np.linalg.norm(t, 2)) if t.size else 0.0 for t in self.matrix)

    def adjoint(self) -> "ModuleMap":
        return ModuleMap(
            self.codomain, self.domain, tuple(t.conj().T for t in self.matrix)
        )

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self after other."""
        return ModuleMap(
            other.domain, self.codomain, tuple(a @ b for a, b in zip(self.matrix, other.matrix))
        )

    def kernel_dim(self, profile: ToleranceProfile = DEFAULT_TOLERANCES) -> int:
        """Complex dimension of ker T inside E, per-block SVD ranks."""
        total = 0
        bases = _projection_column_bases(self.domain.projection)
        for b, nb in enumerate(self.domain.algebra.blocks):
            cols = bases[b]
            r = cols.shape[1]
            if r == 0:
                continue
            m = self.matrix[b] @ cols
            s = np.linalg.svd(m, compute_uv=False)
            rank = int(np.sum(s > profile.rank * max(1.0, s[0] if s.size else 0.0)))
            total += (r - rank) * nb
        return total


def make_module_map(
    domain: HilbertModule, codomain: HilbertModule, matrix: Sequence[np.ndarray]
) -> ModuleMap:
    return ModuleMap(domain, codomain, tuple(matrix))


def apply_map(phi: ModuleMap, x: ModuleElement) -> ModuleElement:
    return phi(x)


def map_norm(phi: ModuleMap) -> float:
    return phi.norm()


def adjoint_map(phi: ModuleMap) -> ModuleMap:
    return phi.adjoint()


def identity_map(module: HilbertModule) -> ModuleMap:
    return ModuleMap(
        module,
        module,
        tuple(np.eye(module.n * nb) for nb in module.algebra.blocks),
    )


def right_multiplication_map(module: HilbertModule, c: CentralPositive) -> ModuleMap:
    """The right action by a central multiplier, as a module map E -> E."""
    return ModuleMap(
        module,
        module,
        tuple(
            s * np.eye(module.n * nb)
            for s, nb in zip(c.scalars, module.algebra.blocks)
        ),
    )


@dataclass(frozen=True, eq=False)
class CompactOperator:
    """Module operator in the corner p Mat_n(A) p, the span of rank-one operators."""

    module: HilbertModule
    data: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        p = self.module.projection
        frozen = []
        for nb, pm, m in zip(self.module.algebra.blocks, p.data, self.data):
            k = self.module.n * nb
            if np.shape(m) != (k, k):
                raise InvalidInputError(f"operator block of shape {np.shape(m)}, expected {(k, k)}")
            arr = np.asarray(pm @ np.asarray(m, dtype=np.complex128) @ pm, order="C")
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "data", tuple(frozen))

    def __call__(self, x: ModuleElement) -> ModuleElement:
        return ModuleElement(self.module, tuple(m @ xm for m, xm in zip(self.data, x.data)))

    def __add__(self, other: "CompactOperator") -> "CompactOperator":
        return CompactOperator(self.module, tuple(a + b for a, b in zip(self.data, other.data)))

    def __mul__(self, other):
        if isinstance(other, CompactOperator):
            return CompactOperator(
                self.module, tuple(a @ b for a, b in zip(self.data, other.data))
            )
        return CompactOperator(self.module, tuple(other * a for a in self.data))

    def __rmul__(self, scalar) -> "CompactOperator":
        return CompactOperator(self.module, tuple(scalar * a for a in self.data))

    def __sub__(self, other: "CompactOperator") -> "CompactOperator":
        return CompactOperator(self.module, tuple(a - b for a, b in zip(self.data, other.data)))

    def adjoint(self) -> "CompactOperator":
        return CompactOperator(self.module, tuple(a.conj().T for a in self.data))

    def norm(self) -> float:
        return max(float(np.linalg.norm(a, 2)) if a.size else 0.0 for a in self.data)

    def scale_right(self, c: CentralPositive) -> "CompactOperator":
        """The composite with the central right action (theta . R_v = theta * v)."""
        return CompactOperator(
            self.module, tuple(s * a for s, a in zip(c.scalars, self.data))
        )

    @staticmethod
    def zero(module: HilbertModule) -> "CompactOperator":
        return CompactOperator(
            module,
            tuple(np.zeros((module.n * nb, module.n * nb)) for nb in module.algebra.blocks),
        )

    @staticmethod
    def identity(module: HilbertModule) -> "CompactOperator":
        """Unit of the corner algebra: the module projection itself."""
        return CompactOperator(module, tuple(np.array(m) for m in module.projection.data))


def rank_one_operator(y: ModuleElement, x: ModuleElement) -> CompactOperator:
    """z -> y <x, z>, realized as the A-matrix y x*."""
    y._check_same(x)
    return CompactOperator(
        y.module, tuple(ym @ xm.conj().T for ym, xm in zip(y.data, x.data))
    )


def image_submodule(
    phi: ModuleMap, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> HilbertModule:
    """The image of a module map as a submodule p'A^m of the codomain.

    Per block the complex span of the image columns is closed under the
    right action, so the orthogonal projection onto it acts from the left
    and is automatically A-linear.  Rank decisions use singular values with
    the profile's relative cutoff.  (The image of the zero map is the zero
    module; callers that forbid zero modules must check.)
    """
    basis = complex_basis(phi.domain)
    alg = phi.domain.algebra
    m = phi.codomain.n
    blocks = []
    for b, nb in enumerate(alg.blocks):
        cols = [phi(e).data[b] for e in basis if not np.allclose(e.data[b], 0)]
        if cols:
            stack = np.hstack(cols)
            u, s, _ = np.linalg.svd(stack, full_matrices=False)
            keep = s > profile.rank * max(1.0, s[0] if s.size else 0.0)
            q = u[:, keep]
            blocks.append(q @ q.conj().T)
        else:
            blocks.append(np.zeros((m * nb, m * nb)))
    proj = AmplifiedElement(alg, m, tuple(blocks))
    return HilbertModule(alg, m, proj)


def corestrict(phi: ModuleMap, image: HilbertModule) -> ModuleMap:
    """The same A-matrix viewed as a map onto a submodule of the codomain."""
    if image.algebra != phi.codomain.algebra or image.n != phi.codomain.n:
        raise IncompatibilityError("image module does not sit inside the codomain")
    return ModuleMap(phi.domain, image, phi.matrix)

"""Finite-dimensional C*-algebras as direct sums of complex matrix blocks.

An algebra is stored abstractly by its list of block side lengths
(Wedderburn form); elements carry one dense complex matrix per block.  In
this setting every two-sided ideal is a block subset, the center consists of
block-scalar elements, multiplier algebras coincide with the (unital)
algebra itself, and spectral projections reduce to Hermitian
eigendecompositions per block.  All values are immutable after construction
and all operations are pure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, IncompatibilityError, InvalidInputError
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile

__all__ = [
    "FdCStarAlgebra",
    "AlgebraElement",
    "AmplifiedElement",
    "IdealDescriptor",
    "CentralPositive",
    "BoundaryAmbiguityWarning",
    "make_algebra",
    "norm",
    "is_positive",
    "spectral_projection",
    "support_projection",
    "center_basis",
    "central_cover",
    "ideal_generated_by",
]


class BoundaryAmbiguityWarning(UserWarning):
    """An eigenvalue sits within the spectral tolerance of an interval endpoint."""


def _freeze(arrays: Iterable[np.ndarray]) -> tuple[np.ndarray, ...]:
    out = []
    for a in arrays:
        a = np.array(a, dtype=np.complex128, order="C")
        a.setflags(write=False)
        out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class FdCStarAlgebra:
    """Direct sum of full matrix algebras, identified by block side lengths."""

    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) == 0:
            raise InvalidInputError("an algebra needs at least one block")
        if any((not isinstance(n, (int, np.integer))) or n < 1 for n in self.blocks):
            raise InvalidInputError(f"block sizes must be positive integers, got {self.blocks}")
        object.__setattr__(self, "blocks", tuple(int(n) for n in self.blocks))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        """Complex dimension, sum of squared block sizes."""
        return int(sum(n * n for n in self.blocks))

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.zeros((n, n)) for n in self.blocks))

    def identity(self) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.eye(n) for n in self.blocks))

    def element(self, data: Sequence[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, tuple(data))

    def diagonal(self, entries: Sequence[complex]) -> "AlgebraElement":
        """Block-scalar element with the given per-block diagonal values."""
        if len(entries) != self.num_blocks:
            raise InvalidInputError("one diagonal entry per block required")
        return AlgebraElement(
            self, tuple(c * np.eye(n) for c, n in zip(entries, self.blocks))
        )

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "AlgebraElement":
        data = [
            scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
            for n in self.blocks
        ]
        return AlgebraElement(self, tuple(data))

    def full_ideal(self) -> "IdealDescriptor":
        return IdealDescriptor(self, frozenset(range(self.num_blocks)))

    def __repr__(self) -> str:
        return f"FdCStarAlgebra(blocks={list(self.blocks)})"


def make_algebra(blocks: Sequence[int]) -> FdCStarAlgebra:
    """Build the algebra with the given block sizes."""
    return FdCStarAlgebra(tuple(blocks))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """One complex matrix per block of the parent algebra."""

    algebra: FdCStarAlgebra
    data: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.data) != self.algebra.num_blocks:
            raise InvalidInputError("element needs one matrix per block")
        for n, m in zip(self.algebra.blocks, self.data):
            if np.shape(m) != (n, n):
                raise InvalidInputError(f"block of shape {np.shape(m)} does not match size {n}")
        object.__setattr__(self, "data", _freeze(self.data))

    # -- arithmetic ---------------------------------------------------------

    def _check_same(self, other: "AlgebraElement") -> None:
        if self.algebra is not other.algebra and self.algebra != other.algebra:
            raise IncompatibilityError("elements of different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.data, other.data)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.algebra, tuple(a - b for a, b in zip(self.data, other.data)))

    def __mul__(self, other):
        """Algebra product for elements, scaling for complex scalars."""
        if isinstance(other, AlgebraElement):
            self._check_same(other)
            return AlgebraElement(
                self.algebra, tuple(a @ b for a, b in zip(self.data, other.data))
            )
        return AlgebraElement(self.algebra, tuple(other * a for a in self.data))

    def __rmul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(scalar * a for a in self.data))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(-a for a in self.data))

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(a.conj().T for a in self.data))

    # -- metrics ------------------------------------------------------------

    def norm(self) -> float:
        """C*-norm: the largest singular value over all blocks."""
        return max(float(np.linalg.norm(a, 2)) for a in self.data)

    def block_is_zero(self, b: int, threshold: float = DEFAULT_TOLERANCES.zero) -> bool:
        return bool(np.all(np.abs(self.data[b]) <= threshold))

    def support_blocks(self, threshold: float = DEFAULT_TOLERANCES.zero) -> frozenset[int]:
        return frozenset(
            b for b in range(self.algebra.num_blocks) if not self.block_is_zero(b, threshold)
        )

    def is_projection(self, tol: float = DEFAULT_TOLERANCES.projection) -> bool:
        return (self * self - self).norm() <= tol and (self - self.adjoint()).norm() <= tol

    def __repr__(self) -> str:
        return f"AlgebraElement(blocks={list(self.algebra.blocks)}, norm={self.norm():.6g})"


def norm(a: AlgebraElement) -> float:
    """C*-norm of an element (max singular value over blocks)."""
    return a.norm()


def is_positive(a: AlgebraElement, tol: float = DEFAULT_TOLERANCES.projection) -> bool:
    """Self-adjoint within ``tol`` and no eigenvalue of the Hermitian part below ``-tol``."""
    if tol < 0:
        raise InvalidInputError("tolerance must be nonnegative")
    if (a - a.adjoint()).norm() > tol:
        return False
    for m in a.data:
        if m.shape[0] and float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()) < -tol:
            return False
    return True


def _hermitian_eig(a: AlgebraElement):
    """Eigendecompositions of the Hermitian parts, one per block."""
    return [np.linalg.eigh((m + m.conj().T) / 2) for m in a.data]


def spectral_projection(
    a: AlgebraElement,
    lower: float,
    upper: float,
    kind: str = "open_closed",
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> AlgebraElement:
    """Spectral projection of a positive element onto an interval of eigenvalues.

    ``open_closed`` selects eigenvalues in (lower, upper], ``open_open`` in
    (lower, upper); membership is decided with a band of half-width
    ``profile.spectral`` around each endpoint, and eigenvalues inside a band
    trigger a :class:`BoundaryAmbiguityWarning` on the result.
    """
    if kind not in ("open_open", "open_closed"):
        raise InvalidInputError(f"unknown interval kind {kind!r}")
    if not lower < upper:
        raise InvalidInputError("need lower < upper")
    if not is_positive(a, profile.projection):
        raise DomainError("spectral projections are defined for positive elements only")
    eps = profile.spectral
    out = []
    ambiguous = False
    for w, v in _hermitian_eig(a):
        if kind == "open_closed":
            keep = (w > lower + eps) & (w <= upper + eps)
        else:
            keep = (w > lower + eps) & (w < upper - eps)
        if np.any(np.abs(w - lower) <= eps) or np.any(np.abs(w - upper) <= eps):
            ambiguous = True
        cols = v[:, keep]
        out.append(cols @ cols.conj().T)
    if ambiguous:
        warnings.warn(
            "eigenvalue within spectral tolerance of an interval endpoint",
            BoundaryAmbiguityWarning,
            stacklevel=2,
        )
    return AlgebraElement(a.algebra, tuple(out))


def support_projection(
    a: AlgebraElement, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> AlgebraElement:
    """Projection onto the column space of a positive element; 0 for a = 0."""
    if not is_positive(a, profile.projection):
        raise DomainError("support projection is defined for positive elements only")
    top = a.norm()
    if top <= profile.zero:
        return a.algebra.zero()
    out = []
    for w, v in _hermitian_eig(a):
        keep = w / top > profile.spectral
        cols = v[:, keep]
        out.append(cols @ cols.conj().T)
    return AlgebraElement(a.algebra, tuple(out))


def central_cover(
    a: AlgebraElement, profile: ToleranceProfile = DEFAULT_TOLERANCES
) -> AlgebraElement:
    """Smallest central projection z with z*a = a (block-support indicator)."""
    out = []
    for n, m in zip(a.algebra.blocks, a.data):
        nz = bool(np.any(np.abs(m) > profile.zero))
        out.append(np.eye(n) if nz else np.zeros((n, n)))
    return AlgebraElement(a.algebra, tuple(out))


def ideal_generated_by(
    algebra: FdCStarAlgebra,
    elements: Sequence[AlgebraElement],
    profile: ToleranceProfile = DEFAULT_TOLERANCES,
) -> "IdealDescriptor":
    """Two-sided ideal generated by a family of elements: a block subset."""
    support: set[int] = set()
    for a in elements:
        if a.algebra != algebra:
            raise IncompatibilityError("generators from different algebras")
        support |= a.support_blocks(profile.zero)
    return IdealDescriptor(algebra, frozenset(support))


@dataclass(frozen=True)
class IdealDescriptor:
    """Two-sided closed ideal of a block algebra: the set of supported blocks."""

    algebra: FdCStarAlgebra
    support: frozenset[int]

    def __post_init__(self) -> None:
        bad = [b for b in self.support if not 0 <= b < self.algebra.num_blocks]
        if bad:
            raise InvalidInputError(f"block indices {bad} out of range")
        object.__setattr__(self, "support", frozenset(int(b) for b in self.support))

    def unit(self) -> AlgebraElement:
        """Central projection acting as the unit of the ideal."""
        return AlgebraElement(
            self.algebra,
            tuple(
                np.eye(n) if b in self.support else np.zeros((n, n))
                for b, n in enumerate(self.algebra.blocks)
            ),
        )

    def compress(self, a: AlgebraElement) -> AlgebraElement:
        """Zero out all blocks outside the ideal (the canonical map into M(I))."""
        return AlgebraElement(
            self.algebra,
            tuple(
                m if b in self.support else np.zeros_like(m) for b, m in enumerate(a.data)
            ),
        )

    def is_subset_of(self, other: "IdealDescriptor") -> bool:
        return self.support <= other.support

    def __le__(self, other: "IdealDescriptor") -> bool:
        return self.is_subset_of(other)


def center_basis(ideal: IdealDescriptor) -> list["CentralPositive"]:
    """One block-indicator generator per supported block; spans Z(M(I))."""
    out = []
    for b in sorted(ideal.support):
        scalars = np.zeros(ideal.algebra.num_blocks)
        scalars[b] = 1.0
        out.append(CentralPositive(ideal, tuple(scalars)))
    return out


@dataclass(frozen=True)
class CentralPositive:
    """Central positive multiplier of an ideal: nonnegative scalar per block.

    Scalars are zero off the ideal's support; as an algebra element this is
    the block-diagonal element with constant diagonal per block.
    """

    ideal: IdealDescriptor
    scalars: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.scalars) != self.ideal.algebra.num_blocks:
            raise InvalidInputError("one scalar per block required")
        vals = []
        for b, lam in enumerate(self.scalars):
            lam = float(lam)
            if lam < 0:
                raise InvalidInputError(f"negative scalar {lam} on block {b}")
            if lam > 0 and b not in self.ideal.support:
                raise InvalidInputError(f"scalar off the ideal support on block {b}")
            vals.append(lam)
        object.__setattr__(self, "scalars", tuple(vals))

    @property
    def algebra(self) -> FdCStarAlgebra:
        return self.ideal.algebra

    def as_element(self) -> AlgebraElement:
        return self.algebra.diagonal(self.scalars)

    def norm(self) -> float:
        return max(self.scalars)

    def sqrt(self) -> "CentralPositive":
        return CentralPositive(self.ideal, tuple(np.sqrt(s) for s in self.scalars))

    def square(self) -> "CentralPositive":
        return CentralPositive(self.ideal, tuple(s * s for s in self.scalars))

    def pinv(self, zero_cutoff: float = DEFAULT_TOLERANCES.zero) -> "CentralPositive":
        """Blockwise reciprocal where the scalar exceeds the cutoff, else 0."""
        return CentralPositive(
            self.ideal, tuple(1.0 / s if s > zero_cutoff else 0.0 for s in self.scalars)
        )

    def support(self, zero_cutoff: float = DEFAULT_TOLERANCES.zero) -> frozenset[int]:
        return frozenset(b for b, s in enumerate(self.scalars) if s > zero_cutoff)

    def __mul__(self, other: "CentralPositive") -> "CentralPositive":
        if self.algebra != other.algebra:
            raise IncompatibilityError("central multipliers over different algebras")
        merged = IdealDescriptor(self.algebra, self.ideal.support & other.ideal.support)
        return CentralPositive(
            merged,
            tuple(
                s * t if b in merged.support else 0.0
                for b, (s, t) in enumerate(zip(self.scalars, other.scalars))
            ),
        )


@dataclass(frozen=True, eq=False)
class AmplifiedElement:
    """Element of Mat_k(A): per block a (k*n_b) x (k*n_b) complex matrix.

    Rows and columns are indexed by s*n_b + t with s the amplification index
    and t the internal index.
    """

    algebra: FdCStarAlgebra
    order: int
    data: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if self.order < 1:
            raise InvalidInputError("amplification order must be >= 1")
        if len(self.data) != self.algebra.num_blocks:
            raise InvalidInputError("one matrix per block required")
        for n, m in zip(self.algebra.blocks, self.data):
            k = self.order * n
            if np.shape(m) != (k, k):
                raise InvalidInputError(
                    f"amplified block of shape {np.shape(m)} does not match order {self.order}"
                )
        object.__setattr__(self, "data", _freeze(self.data))

    def _check_same(self, other: "AmplifiedElement") -> None:
        if self.algebra != other.algebra or self.order != other.order:
            raise IncompatibilityError("amplified elements of different shapes")

    def __add__(self, other: "AmplifiedElement") -> "AmplifiedElement":
        self._check_same(other)
        return AmplifiedElement(
            self.algebra, self.order, tuple(a + b for a, b in zip(self.data, other.data))
        )

    def __sub__(self, other: "AmplifiedElement") -> "AmplifiedElement":
        self._check_same(other)
        return AmplifiedElement(
            self.algebra, self.order, tuple(a - b for a, b in zip(self.data, other.data))
        )

    def __mul__(self, other):
        if isinstance(other, AmplifiedElement):
            self._check_same(other)
            return AmplifiedElement(
                self.algebra, self.order, tuple(a @ b for a, b in zip(self.data, other.data))
            )
        return AmplifiedElement(self.algebra, self.order, tuple(other * a for a in self.data))

    def __rmul__(self, scalar) -> "AmplifiedElement":
        return AmplifiedElement(self.algebra, self.order, tuple(scalar * a for a in self.data))

    def adjoint(self) -> "AmplifiedElement":
        return AmplifiedElement(self.algebra, self.order, tuple(a.conj().T for a in self.data))

    def norm(self) -> float:
        return max(float(np.linalg.norm(a, 2)) for a in self.data)

    def projection_defect(self) -> float:
        return max((self * self - self).norm(), (self - self.adjoint()).norm())

    def block_rank(self, b: int) -> int:
        """Rank of a projection block, read off the trace."""
        return int(round(float(np.real(np.trace(self.data[b])))))

    @staticmethod
    def identity(algebra: FdCStarAlgebra, order: int) -> "AmplifiedElement":
        return AmplifiedElement(
            algebra, order, tuple(np.eye(order * n) for n in algebra.blocks)
        )

    @staticmethod
    def zero(algebra: FdCStarAlgebra, order: int) -> "AmplifiedElement":
        return AmplifiedElement(
            algebra, order, tuple(np.zeros((order * n, order * n)) for n in algebra.blocks)
        )

    @staticmethod
    def from_central(c: CentralPositive, order: int) -> "AmplifiedElement":
        """Central multiplier amplified to Mat_k(A) (scalar per block)."""
        return AmplifiedElement(
            c.algebra,
            order,
            tuple(s * np.eye(order * n) for s, n in zip(c.scalars, c.algebra.blocks)),
        )

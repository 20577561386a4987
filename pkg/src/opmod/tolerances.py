"""Numerical tolerance policy.

A single profile object carries every threshold used by the library, so the
whole stack can be tightened or loosened with one knob.  ``scaled`` keeps the
documented ratios between the individual tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvalidInputError


@dataclass(frozen=True)
class ToleranceProfile:
    """All thresholds, with the defaults used throughout the package.

    spectral: half-width of the ambiguity band around spectral-interval
        endpoints.
    zero: entrywise magnitude below which a block counts as zero (central
        covers, ideal supports, witness pseudo-inverses).
    projection: accepted residual for p*p = p and p = p*.
    rank: relative singular-value cutoff for rank/nullspace decisions.
    certification: scale-normalized acceptance residual for witness
        extraction.
    violation: smallest inner-product norm accepted as an orthogonality
        violation.  Kept two orders above ``certification`` so the decision
        procedure cannot flap.
    """

    spectral: float = 1e-10
    zero: float = 1e-12
    projection: float = 1e-10
    rank: float = 1e-10
    certification: float = 1e-8
    violation: float = 1e-6

    def scaled(self, factor: float) -> "ToleranceProfile":
        """Multiply every threshold by ``factor`` (ratios preserved)."""
        if factor <= 0:
            raise InvalidInputError("tolerance scale factor must be positive")
        return replace(
            self,
            spectral=self.spectral * factor,
            zero=self.zero * factor,
            projection=self.projection * factor,
            rank=self.rank * factor,
            certification=self.certification * factor,
            violation=self.violation * factor,
        )

    def with_certification(self, tol: float) -> "ToleranceProfile":
        """Profile scaled so that ``certification`` equals ``tol``."""
        if tol <= 0:
            raise InvalidInputError("tolerance must be positive")
        return self.scaled(tol / self.certification)


DEFAULT_TOLERANCES = ToleranceProfile()

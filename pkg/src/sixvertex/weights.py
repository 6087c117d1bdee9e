"""Highest-weight parameters: finite integer weights, integer Verma weights, generic weights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .scalars import Context, DomainError, as_scalar


@dataclass(frozen=True)
class Weight:
    """A highest weight ``J``.

    * ``Weight.finite(J)``: integer ``J >= 0``, the ``(J+1)``-dimensional module.
    * ``Weight.verma(J)``: integer ``J`` (any sign), the Verma module; index
      unbounded, normalization exponent ``m`` taken from the other weight.
    * ``Weight.generic(y)``: non-integer weight given by ``y = q^{J/2}``.

    Generic weights are parametrized by the half power ``q^{J/2}`` (not
    ``q^J``) so that the ``q^{IJ/2}`` normalization stays rational.
    """

    value: int | None = None
    y: Fraction | None = None
    is_finite: bool = False

    @classmethod
    def finite(cls, J: int) -> "Weight":
        if J < 0:
            raise DomainError("finite weights are nonnegative integers")
        return cls(value=int(J), is_finite=True)

    @classmethod
    def verma(cls, J: int) -> "Weight":
        return cls(value=int(J), is_finite=False)

    @classmethod
    def generic(cls, y) -> "Weight":
        y = as_scalar(y)
        if y == 0:
            raise DomainError("generic weight parameter must be nonzero")
        return cls(y=y, is_finite=False)

    @property
    def is_integer(self) -> bool:
        return self.value is not None

    def dim(self) -> int | None:
        return self.value + 1 if self.is_finite else None

    def indices(self, limit: int | None = None) -> range:
        if self.is_finite:
            return range(self.value + 1)
        if limit is None:
            raise DomainError("infinite-dimensional weight needs an index limit")
        return range(limit + 1)

    def in_range(self, i: int) -> bool:
        return i >= 0 and (not self.is_finite or i <= self.value)

    def p_pow(self, ctx: Context, k: int) -> Fraction:
        """``q^{kJ/2}``."""
        if self.value is not None:
            return ctx.p ** (k * self.value)
        return self.y**k

    def q_pow(self, ctx: Context, k: int) -> Fraction:
        """``q^{kJ}``."""
        return self.p_pow(ctx, 2 * k)

    def phi_pow(self, ctx: Context, k: int) -> Fraction:
        """``phi^{kJ}``; the field factor of a generic weight is stripped (1)."""
        if self.value is not None:
            return ctx.phi ** (k * self.value)
        return Fraction(1)

    def shifted_verma(self) -> "Weight":
        """The weight ``-J-2`` of the Verma submodule (integer weights only)."""
        if self.value is None:
            raise DomainError("only integer weights have a -J-2 partner here")
        return Weight.verma(-self.value - 2)

    def label(self) -> str:
        if self.is_finite:
            return str(self.value)
        if self.value is not None:
            return f"verma({self.value})"
        return f"generic(q^J/2={self.y})"


def as_weight(w) -> Weight:
    if isinstance(w, Weight):
        return w
    if isinstance(w, int):
        return Weight.finite(w)
    raise TypeError(f"not a weight: {w!r}")


def m_exponent(A: Weight, B: Weight) -> int | None:
    """Normalization exponent ``m``: min of the finite weights, ``None`` if neither is finite."""
    finite = [w.value for w in (A, B) if w.is_finite]
    return min(finite) if finite else None


def ab_half(A: Weight, B: Weight, ctx: Context) -> Fraction | None:
    """``q^{AB/2}`` when it is rational in the parameters, else ``None``."""
    if A.value is not None:
        return B.p_pow(ctx, A.value)
    if B.value is not None:
        return A.p_pow(ctx, B.value)
    return None

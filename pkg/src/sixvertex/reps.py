"""The Fock representation of the q-oscillator algebra and the Verma modules."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .scalars import Context, bracket
from .weights import Weight

# sparse operator: {row: {col: value}}, with <row| X |col>
Sparse = dict


@dataclass(frozen=True)
class FockRep:
    """``a+|n> = |n+1>``, ``a-|n> = (1-q^{2n})|n-1>``, ``q^N|n> = q^n|n>``."""

    q: Fraction
    cutoff: int = 8

    def a_plus(self, n: int) -> tuple[int, Fraction] | None:
        return (n + 1, Fraction(1))

    def a_minus(self, n: int) -> tuple[int, Fraction] | None:
        if n == 0:
            return None
        return (n - 1, 1 - self.q ** (2 * n))

    def qN(self, n: int, power: int = 1) -> Fraction:
        return self.q ** (power * n)

    # bra actions: <n| a+ = <n-1|, <n| a- = <n+1| (1 - q^{2+2n})
    def bra_a_plus(self, n: int):
        if n == 0:
            return None
        return (n - 1, Fraction(1))

    def bra_a_minus(self, n: int):
        return (n + 1, 1 - self.q ** (2 + 2 * n))

    def matrix(self, op: str) -> list[list[Fraction]]:
        """Dense ``cutoff x cutoff`` matrix ``M[row][col] = <row|op|col>``."""
        size = self.cutoff
        M = [[Fraction(0)] * size for _ in range(size)]
        for col in range(size):
            if op == "a+":
                hit = self.a_plus(col)
            elif op == "a-":
                hit = self.a_minus(col)
            elif op == "qN":
                hit = (col, self.qN(col))
            else:
                raise ValueError(op)
            if hit is not None and hit[0] < size:
                M[hit[0]][col] = hit[1]
        return M


@dataclass(frozen=True)
class VermaRep:
    """Action of ``E, F, q^{H/2}`` on the basis ``v_j`` of the module of weight ``J``."""

    weight: Weight
    ctx: Context

    def _qJ_half(self) -> Fraction:
        return self.weight.p_pow(self.ctx, 1)

    def h_half(self, j: int) -> Fraction:
        """``q^{H/2} v_j = q^{(J-2j)/2} v_j``."""
        return self._qJ_half() * self.ctx.q ** (-j)

    def E(self, j: int):
        """``E v_j = [q^j]/[q] v_{j-1}``."""
        if j == 0:
            return None
        q = self.ctx.q
        return (j - 1, bracket(q**j) / bracket(q))

    def F(self, j: int):
        """``F v_j = [q^{J-j}]/[q] v_{j+1}``."""
        q = self.ctx.q
        qJmj = self._qJ_half() ** 2 * q ** (-j)
        if self.weight.is_finite and j >= self.weight.value:
            return None
        return (j + 1, bracket(qJmj) / bracket(q))

    def casimir_on(self, j: int) -> Fraction:
        """Coefficient of ``v_j`` in ``([q]^2 F E + {q^{H+1}}) v_j``."""
        q = self.ctx.q
        val = Fraction(0)
        e = self.E(j)
        if e is not None:
            f = self.F(e[0])
            if f is not None:
                val += bracket(q) ** 2 * e[1] * f[1]
        qh1 = self.h_half(j) ** 2 * q
        return val + qh1 + 1 / qh1

    def commutator_on(self, j: int) -> Fraction:
        """Coefficient of ``v_j`` in ``(EF - FE) v_j``."""
        val = Fraction(0)
        f = self.F(j)
        if f is not None:
            e = self.E(f[0])
            if e is not None:
                val += f[1] * e[1]
        e = self.E(j)
        if e is not None:
            f = self.F(e[0])
            if f is not None:
                val -= e[1] * f[1]
        return val

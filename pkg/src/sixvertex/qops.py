"""Q-operator L-operators ``A_+`` and ``A_-`` and exact infinite traces.

The local operators act in ``F_q x V_I``; their entries are addressed as
``[A]_{n,i}^{n',i'}`` with the Fock index first.  Global operators are traces
of ``M``-fold auxiliary products, restricted to the sector where the
quantum indices add up to ``l``.

Every local entry along a fixed quantum transition ``(i, i')`` has the form
``rho^a * P(q^a)`` with ``a`` the bra index in the auxiliary space and ``P`` a
Laurent polynomial.  ``P`` is recovered by exact interpolation, after which
the infinite trace is a finite sum of geometric series.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .rmatrix import compositions
from .scalars import (
    ConvergenceError,
    Context,
    DomainError,
    LaurentPoly,
    as_scalar,
    phi_regularized,
    qpochhammer,
)
from .weights import Weight, as_weight


# ---------------------------------------------------------------------------
# sector blocks


@dataclass
class SectorBlock:
    """Square matrix of an operator restricted to the ``l``-th sector.

    ``matrix[r][c] = <basis[r]| X |basis[c]>``; basis in lexicographic order.
    """

    l: int
    M: int
    basis: list
    matrix: list
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def identity(cls, l: int, M: int, basis: list, scale=1) -> "SectorBlock":
        n = len(basis)
        s = as_scalar(scale)
        return cls(l, M, basis, [[s if r == c else Fraction(0) for c in range(n)] for r in range(n)])

    def _same(self, other: "SectorBlock"):
        if self.basis != other.basis:
            raise ValueError("blocks live on different sector bases")

    def __matmul__(self, other: "SectorBlock") -> "SectorBlock":
        self._same(other)
        n = self.dim
        out = [[sum((self.matrix[r][k] * other.matrix[k][c] for k in range(n)), Fraction(0)) for c in range(n)] for r in range(n)]
        return SectorBlock(self.l, self.M, self.basis, out)

    def __add__(self, other: "SectorBlock") -> "SectorBlock":
        self._same(other)
        return SectorBlock(self.l, self.M, self.basis, [[a + b for a, b in zip(x, y)] for x, y in zip(self.matrix, other.matrix)])

    def __sub__(self, other: "SectorBlock") -> "SectorBlock":
        return self + other.scale(-1)

    def scale(self, c) -> "SectorBlock":
        c = as_scalar(c) if not isinstance(c, Fraction) else c
        return SectorBlock(self.l, self.M, self.basis, [[c * v for v in row] for row in self.matrix])

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.matrix for v in row)

    def max_abs(self) -> Fraction:
        return max((abs(v) for row in self.matrix for v in row), default=Fraction(0))

    def is_scalar(self) -> Fraction | None:
        """The scalar ``c`` if the block equals ``c * identity``, else ``None``."""
        if not self.basis:
            return Fraction(0)
        c = self.matrix[0][0]
        for r, row in enumerate(self.matrix):
            for k, v in enumerate(row):
                if v != (c if r == k else 0):
                    return None
        return c

    def commutator(self, other: "SectorBlock") -> "SectorBlock":
        return self @ other - other @ self


def sector_basis(I: Weight, M: int, l: int) -> list[tuple[int, ...]]:
    """Quantum index tuples with total ``l`` (lexicographic)."""
    bound = I.value if I.is_finite else None
    return compositions(l, (bound,) * M)


# ---------------------------------------------------------------------------
# local L-operators


def _lam_phi(ctx: Context, lam, phi):
    return (ctx.lam if lam is None else as_scalar(lam), ctx.phi if phi is None else as_scalar(phi))


def _check_quantum(i, ip, I: Weight):
    if not (I.in_range(i) and I.in_range(ip)):
        raise DomainError(f"quantum indices {i}, {ip} outside the module {I.label()}")


def a_minus_element(n, i, np_, ip, I, ctx: Context, lam=None, phi=None) -> Fraction:
    """``[A_-(lambda)]_{n,i}^{n',i'}`` for an integer weight ``I``."""
    I = as_weight(I)
    if not I.is_finite:
        raise DomainError("use a_minus_reduced for a non-integer weight")
    lam, phi = _lam_phi(ctx, lam, phi)
    if n < 0 or np_ < 0:
        raise DomainError("Fock indices are nonnegative")
    _check_quantum(i, ip, I)
    if i + n != ip + np_:
        return Fraction(0)
    Iv = I.value
    q = ctx.q
    q2 = q * q
    l2 = lam * lam
    pre = (
        phi ** (2 * n)
        * lam ** (i - Iv)
        * q ** (i * Iv + i * ip + n * (Iv - i - ip))
        * qpochhammer(l2 * q ** (1 - Iv + 2 * (ip - n)), q2, Iv - i - ip)
        / qpochhammer(q2, q2, i)
    )
    series = phi_regularized(i, [q ** (-2 * ip), l2 * q ** (1 - Iv)], [q ** (-2 * Iv), q ** (2 * (1 + n - ip))], q2, q2)
    return pre * series


def a_minus_reduced(n, i, np_, ip, I, ctx: Context, lam=None, phi=None) -> Fraction:
    """``A_-`` entry divided by the index-independent ``(-lambda)^I (lambda^-2 q^{1-I}; q^2)_I``.

    What remains is rational in ``q^I``, so it is defined for any weight.
    """
    I = as_weight(I)
    lam, phi = _lam_phi(ctx, lam, phi)
    if n < 0 or np_ < 0:
        raise DomainError("Fock indices are nonnegative")
    _check_quantum(i, ip, I)
    if i + n != ip + np_:
        return Fraction(0)
    q = ctx.q
    q2 = q * q
    qI = I.q_pow(ctx, 1)
    l2 = lam * lam
    pre = (
        phi ** (2 * n)
        * lam ** (i)
        * qI ** (i + n - 2 * n + ip - i)
        * q ** (i * ip - n * (i + ip))
        * (-l2 * q ** (ip - i - 2 * n)) ** (-i - ip)
        * qpochhammer(q * qI / l2, q2, n - ip)
        / (qpochhammer(q2, q2, i) * qpochhammer(q / (l2 * qI), q2, n + i))
    )
    series = phi_regularized(i, [q ** (-2 * ip), l2 * q / qI], [qI**-2, q ** (2 * (1 + n - ip))], q2, q2)
    return pre * series


def a_minus_index_free_factor(I: int, ctx: Context, lam=None) -> Fraction:
    """``(-lambda)^I (lambda^-2 q^{1-I}; q^2)_I`` for integer ``I``."""
    lam = ctx.lam if lam is None else as_scalar(lam)
    return (-lam) ** I * qpochhammer(ctx.q ** (1 - I) / (lam * lam), ctx.q**2, I)


def a_plus_element(n, i, np_, ip, I, ctx: Context, lam=None, phi=None) -> Fraction:
    """``[A_+(lambda)]_{n,i}^{n',i'}``; analytic in ``q^I`` so any weight is allowed."""
    I = as_weight(I)
    lam, phi = _lam_phi(ctx, lam, phi)
    if n < 0 or np_ < 0:
        raise DomainError("Fock indices are nonnegative")
    _check_quantum(i, ip, I)
    if i + np_ != ip + n:
        return Fraction(0)
    q = ctx.q
    q2 = q * q
    qI = I.q_pow(ctx, 1)
    pre = (
        phi ** (-2 * n)
        * (-1) ** (i + ip)
        * lam ** (-i)
        * q ** (i * (i + 1) - ip * (ip + 1) + ip * i - n * (i + ip))
        * qI ** (ip + n)
        * qpochhammer(q2, q2, np_)
        / (qpochhammer(q2, q2, n) * qpochhammer(q2, q2, i))
    )
    series = phi_regularized(
        i, [q ** (-2 * ip), lam * lam * q / qI], [qI**-2, q ** (2 * (1 + n - i))], q2, q2
    )
    return pre * series


def a_plus_via_flip(n, i, np_, ip, I: int, ctx: Context, lam=None, phi=None) -> Fraction:
    """``A_+`` through the spin-flip definition: ``A_-`` at ``I-i, I-i'`` and ``1/phi``."""
    lam, phi = _lam_phi(ctx, lam, phi)
    return a_minus_element(n, I - i, np_, I - ip, I, ctx, lam, 1 / phi)


# ---------------------------------------------------------------------------
# band operators and exact traces


def _fit_in_u(f: Callable[[int], Fraction], q: Fraction, a_min: int, max_half_span: int, n_check: int = 4) -> LaurentPoly:
    """Laurent polynomial ``P`` with ``f(a) = P(q^a)`` for all ``a >= a_min``."""
    for d in range(max_half_span + 1):
        need = 2 * d + 1 + n_check
        a_nodes = list(range(a_min, a_min + need))
        try:
            return LaurentPoly.fit(
                lambda u, _map={q**a: a for a in a_nodes}: f(_map[u]),
                [q**a for a in a_nodes[: 2 * d + 1]],
                -d,
                d,
                check=[q**a for a in a_nodes[2 * d + 1 :]],
            )
        except ArithmeticError:
            continue
    raise ArithmeticError(f"auxiliary dependence is not Laurent of half-span <= {max_half_span}")


@dataclass
class FockBandOperator:
    """A local operator on ``aux x V_I`` whose entries are ``rho^a P_{i,i'}(q^a)``.

    ``entry(a, i, a', i')`` evaluates one element, ``shift(i, i')`` gives
    ``a' - a`` and ``rho`` the geometric field factor per unit of ``a``.
    """

    name: str
    quantum: Weight
    entry: Callable[[int, int, int, int], Fraction]
    shift: Callable[[int, int], int]
    rho: Fraction
    q: Fraction
    max_half_span: int = 8
    _polys: dict = field(default_factory=dict, repr=False)

    def poly(self, i: int, ip: int) -> LaurentPoly:
        key = (i, ip)
        if key not in self._polys:
            s = self.shift(i, ip)
            a_min = max(0, -s)
            f = lambda a: self.entry(a, i, a + s, ip) / self.rho**a
            self._polys[key] = _fit_in_u(f, self.q, a_min, self.max_half_span)
        return self._polys[key]

    def degree_profile(self) -> dict:
        """``{(i, i'): (lo, hi)}`` exponent spans in ``u = q^a``."""
        idx = self.quantum.indices()
        return {(i, ip): self.poly(i, ip).span() for i in idx for ip in idx}


def _loop_terms(op: FockBandOperator, row, col):
    """Offsets, starting index and the Laurent polynomial ``G`` of one trace element."""
    offsets = [0]
    for i, ip in zip(row, col):
        offsets.append(offsets[-1] + op.shift(i, ip))
    if offsets[-1] != 0:
        return None
    n0 = max(0, -min(offsets))
    G = LaurentPoly({0: Fraction(1)})
    const = Fraction(1)
    for k, (i, ip) in enumerate(zip(row, col)):
        P = op.poly(i, ip)
        if P.is_zero():
            return None
        G = G * P.scale_var(op.q ** offsets[k])
        const *= op.rho ** offsets[k]
    return n0, const, G


def geometric_tail(r: Fraction, n0: int, strict: bool = False) -> Fraction:
    """``sum_{n >= n0} r^n`` in closed form (analytically continued unless ``strict``)."""
    if r == 1:
        raise ConvergenceError("geometric ratio equals 1")
    if strict and abs(r) >= 1:
        raise ConvergenceError(f"geometric ratio {r} outside the unit disc")
    return r**n0 / (1 - r)


def band_trace(op: FockBandOperator, M: int, l: int, strict: bool = False) -> SectorBlock:
    """Exact trace over the auxiliary space of the ``M``-fold product, sector ``l``."""
    basis = sector_basis(op.quantum, M, l)
    n = len(basis)
    mat = [[Fraction(0)] * n for _ in range(n)]
    ratios = set()
    for r, row in enumerate(basis):
        for c, col in enumerate(basis):
            lt = _loop_terms(op, row, col)
            if lt is None:
                continue
            n0, const, G = lt
            total = Fraction(0)
            for e, coef in G.coeffs.items():
                ratio = op.rho**M * op.q**e
                ratios.add(ratio)
                total += coef * geometric_tail(ratio, n0, strict)
            mat[r][c] = const * total
    return SectorBlock(l, M, basis, mat, {"operator": op.name, "ratios": sorted(str(x) for x in ratios)})


def band_trace_truncated(op: FockBandOperator, M: int, l: int, terms: int) -> SectorBlock:
    """Direct partial sum over the first ``terms`` auxiliary states (oracle)."""
    basis = sector_basis(op.quantum, M, l)
    n = len(basis)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for r, row in enumerate(basis):
        for c, col in enumerate(basis):
            total = Fraction(0)
            for a0 in range(terms):
                a = a0
                prod = Fraction(1)
                for i, ip in zip(row, col):
                    b = a + op.shift(i, ip)
                    if b < 0:
                        prod = Fraction(0)
                        break
                    prod *= op.entry(a, i, b, ip)
                    if prod == 0:
                        break
                    a = b
                if a == a0:
                    total += prod
            mat[r][c] = total
    return SectorBlock(l, M, basis, mat)


def fock_band(sign: str, I, ctx: Context, lam=None, phi=None) -> FockBandOperator:
    """The local ``A_+`` (sign ``'+'``) or ``A_-`` (sign ``'-'``) as a band operator."""
    I = as_weight(I)
    lam, phi = _lam_phi(ctx, lam, phi)
    if sign == "-":
        if not I.is_finite:
            raise DomainError("the A_- trace needs an integer weight (its n-dependence is not polynomial otherwise)")
        return FockBandOperator(
            name="A-",
            quantum=I,
            entry=lambda n, i, np_, ip: a_minus_element(n, i, np_, ip, I, ctx, lam, phi),
            shift=lambda i, ip: i - ip,
            rho=phi**2,
            q=ctx.q,
            max_half_span=2 * I.value + 4,
        )
    if sign == "+":
        qI = I.q_pow(ctx, 1)
        bound = 2 * (I.value if I.is_finite else 4) + 4
        return FockBandOperator(
            name="A+",
            quantum=I,
            entry=lambda n, i, np_, ip: a_plus_element(n, i, np_, ip, I, ctx, lam, phi),
            shift=lambda i, ip: ip - i,
            rho=qI / phi**2,
            q=ctx.q,
            max_half_span=bound,
        )
    raise ValueError(f"sign must be '+' or '-', not {sign!r}")


def trace_denominator(I: Weight, M: int, l: int, ctx: Context, phi=None) -> Fraction:
    """``Tr(phi^{2N} q^{-N H})`` over the Fock space in sector ``l``: ``1/(1 - phi^{2M} q^{2l-IM})``."""
    phi = ctx.phi if phi is None else as_scalar(phi)
    r = phi ** (2 * M) * ctx.q ** (2 * l) / I.q_pow(ctx, M)
    return geometric_tail(r, 0)


def normalized_fock_trace(op: FockBandOperator, M: int, l: int, ctx: Context, phi=None, strict: bool = False) -> SectorBlock:
    """Trace divided by :func:`trace_denominator`."""
    block = band_trace(op, M, l, strict)
    return block.scale(1 / trace_denominator(op.quantum, M, l, ctx, phi))


def q_operator(sign: str, I, M: int, l: int, ctx: Context, lam=None, phi=None, strict: bool = False) -> SectorBlock:
    """The sector block of ``A_+`` or ``A_-`` at ``lambda``.

    ``Q_pm = lambda^{pm h M} A_pm`` with ``phi = q^h``; the non-rational
    prefactor is recorded in ``meta`` only.
    """
    I = as_weight(I)
    lam, phi = _lam_phi(ctx, lam, phi)
    op = fock_band(sign, I, ctx, lam, phi)
    block = normalized_fock_trace(op, M, l, ctx, phi, strict)
    block.meta.update({"sign": sign, "I": I.label(), "lambda": str(lam), "phi": str(phi), "Q_prefactor": f"lambda^({sign}h*{M})"})
    return block


def a_operator_laurent(sign: str, I, M: int, l: int, ctx: Context, max_half_span: int | None = None) -> list:
    """Entries of the ``A_pm`` block as Laurent polynomials in ``lambda``."""
    I = as_weight(I)
    bound = max_half_span if max_half_span is not None else (I.value if I.is_finite else 4) * M + 2
    nodes = [Fraction(3 * k + 7, 2 * k + 5) for k in range(2 * bound + 5)]
    samples = {x: q_operator(sign, I, M, l, ctx, lam=x) for x in nodes}
    first = next(iter(samples.values()))
    out = []
    for r in range(first.dim):
        row = []
        for c in range(first.dim):
            f = lambda x: samples[x].matrix[r][c]
            for d in range(bound + 1):
                try:
                    row.append(LaurentPoly.fit(f, nodes[: 2 * d + 1], -d, d, check=nodes[2 * d + 1 : 2 * d + 4]))
                    break
                except ArithmeticError:
                    continue
            else:
                raise ArithmeticError("A-operator entry is not Laurent within the bound")
        out.append(row)
    return out


def index_identity_holds(i: list, ip: list, n: list, np_: list) -> bool:
    """``sum (i_k - i'_k)(n_k + n'_k) == (sum (i_k - i'_k))^2`` along a periodic chain.

    The chain condition is ``i_k + n_k = i'_k + n'_k`` with ``n'_k = n_{k+1}``.
    """
    lhs = sum((a - b) * (c + d) for a, b, c, d in zip(i, ip, n, np_))
    return lhs == sum(a - b for a, b in zip(i, ip)) ** 2


# ---------------------------------------------------------------------------
# large-J limit of the Verma R-matrix


def large_j_ratio(n, i, np_, ip, I: int, J: int, ctx: Context, mu=None, phi=None) -> Fraction:
    """``R_{J,I}(mu q^{-(J+1)/2}; phi)`` entry divided by the ``A_-`` entry at ``mu``.

    Returned raw; multiplied by :func:`large_j_u_factor` it tends to a
    single ``J``-dependent constant, with corrections of order ``q^{2J}``.
    """
    from .rmatrix import rij_single_sum

    mu, phi = _lam_phi(ctx, mu, phi)
    lam = mu / ctx.p ** (J + 1)
    r = rij_single_sum(n, i, np_, ip, Weight.finite(J), Weight.finite(I), ctx, lam=lam, phi=phi)
    a = a_minus_element(n, i, np_, ip, I, ctx, mu, phi)
    if a == 0:
        return Fraction(0) if r == 0 else None
    return r / a


def large_j_u_factor(n, i, np_, ip, I: int, J: int, ctx: Context, mu=None) -> Fraction:
    """``(-1)^{I-i} mu^{-i'} q^{(i-i')(n+n') + J(3i'-i)/2 + (i'-i)/2}``."""
    mu = ctx.lam if mu is None else as_scalar(mu)
    p = ctx.p
    return (-1) ** (I - i) * mu ** (-ip) * p ** (2 * (i - ip) * (n + np_) + J * (3 * ip - i) + (ip - i))


def large_j_spread(I: int, J: int, ctx: Context, n_max: int = 3, mu=None, phi=None) -> tuple[Fraction, Fraction]:
    """``(K, spread)``: the common limit constant and ``max |ratio*U/K - 1|`` over entries with ``n <= n_max``."""
    vals = []
    for n in range(n_max + 1):
        for i in range(I + 1):
            for ip in range(I + 1):
                np_ = n + i - ip
                if np_ < 0:
                    continue
                r = large_j_ratio(n, i, np_, ip, I, J, ctx, mu, phi)
                if r:
                    vals.append(r * large_j_u_factor(n, i, np_, ip, I, J, ctx, mu))
    K = vals[0]
    return K, max(abs(v / K - 1) for v in vals)

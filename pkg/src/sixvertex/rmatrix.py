"""Higher-spin R-matrix ``R_{I,J}(lambda; phi)`` by four independent routes.

Entries are addressed as ``[R]_{i,j}^{i',j'} = <i, j| R |i', j'>`` with ``i``
in the first module (weight ``A``) and ``j`` in the second (weight ``B``).
Every route returns exact Fractions at the point fixed by a :class:`Context`.

Routes:

``single``
    prefactor times one regularized 4phi3 sum; canonical, pole free at
    resonant lambda.
``double``
    the (k, l) double sum obtained from the two-layer projection.
``pole``
    partial fractions in ``lambda^2`` with 4phi3 residues.
``two-layer``
    the two-layer contraction of 3D R-matrices, resummed in closed form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .reps import VermaRep
from .scalars import (
    Context,
    DomainError,
    LaurentPoly,
    PoleError,
    as_scalar,
    bracket,
    phi_regularized,
    qpochhammer,
    rank_exact,
    solve_exact,
)
from .tetra import r3_element, r3_n3_expansion
from .weights import Weight, ab_half, as_weight, m_exponent

ROUTES = ("single", "double", "pole", "two-layer")


def _check(i, j, ip, jp, A: Weight, B: Weight):
    if not (A.in_range(i) and A.in_range(ip) and B.in_range(j) and B.in_range(jp)):
        raise DomainError(f"indices ({i},{j};{ip},{jp}) outside the modules {A.label()}, {B.label()}")


def _poch_ratio(x, q, a: int, b: int):
    """``(x;q)_a / (x;q)_b`` with the common factors cancelled."""
    return qpochhammer(x * q**b, q, a - b)


def _poch_nd(x, q, n):
    """``(x;q)_n`` as a (numerator, denominator) pair without dividing."""
    if n >= 0:
        return qpochhammer(x, q, n), Fraction(1)
    return Fraction(1), qpochhammer(x * q**n, q, -n)


# ---------------------------------------------------------------------------
# single-sum route


def _single_raw(i, j, ip, jp, A: Weight, B: Weight, ctx: Context, lam, m: int, ab) -> Fraction:
    """The single-sum entry without the field factor ``phi^{2i-A}``."""
    q = ctx.q
    q2 = q * q
    qA = A.q_pow(ctx, 1)
    qB = B.q_pow(ctx, 1)
    lam2 = lam * lam
    pre = (
        (-1) ** i
        * q ** (i * (i - 1) + i * j + ip * jp)
        * qB ** (-2 * i)
        * qA ** (ip - j)
        * ab
        * ctx.p**m
        * lam ** (m - i - ip)
    )
    num_c, den_c = _poch_nd(qA / (qB * lam2), q2, j - ip)
    num_d = qpochhammer(1 / (lam2 * qA * qB), q2, m)
    den_d = qpochhammer(1 / (lam2 * qA * qB), q2, i + j) * qpochhammer(q2, q2, i)
    den = den_c * den_d
    if den == 0:
        raise PoleError(f"single-sum prefactor singular at ({i},{j};{ip},{jp})")
    pre = pre * _poch_ratio(qB**-2, q2, j, jp) * num_c * num_d / den
    series = phi_regularized(
        i,
        [q ** (-2 * ip), qB / (qA * lam2), lam2 * q2 * qB / qA],
        [qA**-2, q ** (2 * (1 + j - ip)), q2 * qB**2 * q ** (-2 * (i + j))],
        q2,
        q2,
    )
    return pre * series


def rij_single_sum(i, j, ip, jp, A, B, ctx: Context, lam=None, phi=None) -> Fraction:
    """Single-sum matrix element.

    For two infinite-dimensional weights the corner entry is normalized to 1
    and the field factor ``phi^{-A}`` of generic weights is dropped.
    """
    A, B = as_weight(A), as_weight(B)
    lam = ctx.lam if lam is None else as_scalar(lam)
    phi = ctx.phi if phi is None else as_scalar(phi)
    if i + j != ip + jp:
        return Fraction(0)
    _check(i, j, ip, jp, A, B)
    m = m_exponent(A, B)
    ab = ab_half(A, B, ctx)
    field = phi ** (2 * i) * A.phi_pow(ctx.with_phi(phi), -1)
    if m is None:
        ab = Fraction(1) if ab is None else ab
        corner = _single_raw(0, 0, 0, 0, A, B, ctx, lam, 0, ab)
        return field * _single_raw(i, j, ip, jp, A, B, ctx, lam, 0, ab) / corner
    try:
        return field * _single_raw(i, j, ip, jp, A, B, ctx, lam, m, ab)
    except PoleError:
        # removable: the entry is a Laurent polynomial in lambda of span [-m, m]
        f = lambda x: _single_raw(i, j, ip, jp, A, B, ctx, x, m, ab)
        nodes = laurent_nodes(2 * m + 4)
        poly = LaurentPoly.fit(f, nodes[: 2 * m + 1], -m, m, check=nodes[2 * m + 1 :])
        return field * poly(lam)


# ---------------------------------------------------------------------------
# double-sum route


def rij_double_sum(i, j, ip, jp, I, J, ctx: Context, lam=None, phi=None) -> Fraction:
    """Double (k, l)-sum; first weight must be a nonnegative integer."""
    A, B = as_weight(I), as_weight(J)
    if not A.is_finite:
        raise DomainError("double-sum route needs a finite first weight")
    lam = ctx.lam if lam is None else as_scalar(lam)
    phi = ctx.phi if phi is None else as_scalar(phi)
    if i + j != ip + jp:
        return Fraction(0)
    _check(i, j, ip, jp, A, B)
    I = A.value
    m = m_exponent(A, B)
    q = ctx.q
    q2 = q * q
    qJ = B.q_pow(ctx, 1)
    lam2 = lam * lam
    pre = (
        (-1) ** m
        * phi ** (2 * i - I)
        * lam ** (i - ip - m)
        * q ** (i * i - ip * (ip - j) + 2 * I - (I - i) * jp)
        * qJ ** (I - i)
        * ab_half(A, B, ctx)
        * ctx.p ** (-m)
        / (qpochhammer(q2, q2, i) * qpochhammer(q2, q2, I - i))
        * qpochhammer(lam2 * q**-I / qJ, q2, m + 1)
    )
    total = Fraction(0)
    for k in range(i + 1):
        fk = (
            (-1) ** k
            * q ** (2 * k * (ip - j) - k * (k + 1))
            * qpochhammer(q ** (-2 * i), q2, k)
            * qpochhammer(q ** (2 + 2 * j), q2, k)
            * qpochhammer(q ** (-2 * jp), q2, i - k)
            / qpochhammer(q2, q2, k)
        )
        if fk == 0:
            continue
        for l in range(I - i + 1):
            fl = (
                (-1) ** l
                * qJ ** (-2 * l)
                * q ** (2 * l * (I + j - i) - l * (l + 1))
                * qpochhammer(q ** (-2 * (I - i)), q2, l)
                * qpochhammer(q2 * qJ**2 * q ** (-2 * j), q2, l)
                * qpochhammer(qJ**-2 * q ** (2 * jp), q2, I - i - l)
                / qpochhammer(q2, q2, l)
            )
            if fl == 0:
                continue
            den = 1 - lam2 * q**I / qJ * q ** (-2 * k - 2 * l)
            if den == 0:
                raise PoleError("double-sum evaluated at a resonant lambda")
            total += fk * fl / den
    return pre * total


# ---------------------------------------------------------------------------
# pole-expansion route


def _c_coefficient_nd(i, j, ip, jp, I, s, X, q):
    """Residue coefficient as (numerator, denominator); ``X`` stands for ``q^{2J}``."""
    q2 = q * q
    n1, d1 = _poch_nd(q ** (2 * (I - s)) / X, q2, jp - i)
    n2 = qpochhammer(q ** (-2 * s) / X, q2, I)
    n3, d3 = _poch_nd(q ** (-2 * s) / X, q2, i + j)
    series = phi_regularized(
        i,
        [q ** (-2 * ip), q ** (-2 * s), q ** (2 * (1 - I + s)) * X],
        [q ** (-2 * I), q ** (2 * (1 + jp - i)), q ** (2 * (1 - i - j)) * X],
        q2,
        q2,
    )
    return n1 * n2 * d3 * series, d1 * n3


def _limit_at_one(num: LaurentPoly, den: LaurentPoly) -> Fraction:
    """Value at ``t = 1`` of ``num/den`` after cancelling common ``(t - 1)`` factors."""
    t_minus_1 = LaurentPoly({1: Fraction(1), 0: Fraction(-1)})
    while den(Fraction(1)) == 0:
        if num(Fraction(1)) != 0:
            raise PoleError("genuine pole in the pole-expansion coefficient")
        num = num.divexact(t_minus_1)
        den = den.divexact(t_minus_1)
    return num(Fraction(1)) / den(Fraction(1))


def c_coefficient(i, j, ip, jp, I: int, J: Weight, s: int, ctx: Context) -> Fraction:
    """Residue coefficient; at integer ``J`` the removable singularities are resolved."""
    q = ctx.q
    X = J.q_pow(ctx, 2)
    num, den = _c_coefficient_nd(i, j, ip, jp, I, s, X, q)
    if den != 0:
        return num / den
    t = LaurentPoly({1: X})
    num, den = _c_coefficient_nd(i, j, ip, jp, I, s, t, q)
    return _limit_at_one(LaurentPoly._lift(num), LaurentPoly._lift(den))


def rij_pole_expansion(i, j, ip, jp, I, J, ctx: Context, lam=None, phi=None) -> Fraction:
    """Partial-fraction (pole) expansion in ``lambda^2``.

    Valid as written for a finite first weight not exceeding the second;
    for ``I > J`` (both finite) the transposed expansion is used.
    """
    A, B = as_weight(I), as_weight(J)
    lam = ctx.lam if lam is None else as_scalar(lam)
    phi = ctx.phi if phi is None else as_scalar(phi)
    if not A.is_finite:
        raise DomainError("pole-expansion route needs a finite first weight")
    if i + j != ip + jp:
        return Fraction(0)
    _check(i, j, ip, jp, A, B)
    if B.is_finite and B.value < A.value:
        # transposed expansion: R_{I,J}(lam;1) = P R_{J,I}(lam;1) P
        return phi ** (2 * i - A.value) * rij_pole_expansion(j, i, jp, ip, B, A, ctx, lam, Fraction(1))
    I = A.value
    q = ctx.q
    q2 = q * q
    qJ = B.q_pow(ctx, 1)
    lam2 = lam * lam
    pre = (
        (-1) ** (i + I)
        * phi ** (2 * i - I)
        * lam ** (i - ip - I)
        * q ** (i * (i + I - 1) - (I - i) * j + ip * (I + jp))
        * qJ ** (I - 3 * i)
        * ctx.p ** (3 * I)
        * ab_half(A, B, ctx)
        * _poch_ratio(qJ**-2, q2, j, jp)
        * qpochhammer(lam2 * q**-I / qJ, q2, I + 1)
        / qpochhammer(q2, q2, i)
    )
    total = Fraction(0)
    for s in range(I + 1):
        den = 1 - lam2 * q**I / qJ * q ** (-2 * s)
        if den == 0:
            raise PoleError("pole expansion evaluated at a resonant lambda")
        w = (
            (-1) ** s
            * q ** (s * (s - 1) - 2 * i * s)
            / (qpochhammer(q2, q2, s) * qpochhammer(q2, q2, I - s))
        )
        total += w / den * c_coefficient(i, j, ip, jp, I, B, s, ctx)
    return pre * total


def lagrange_qgrid(values: list, x, q) -> Fraction:
    """Evaluate at ``x`` the degree-n polynomial with ``P(q^i) = values[i]``.

    This is the q-grid Lagrange formula that collapses the pole expansion
    into the single sum.
    """
    n = len(values) - 1
    total = Fraction(0)
    for i, v in enumerate(values):
        total += (
            (-1) ** i
            / (x - q**i)
            * q ** (i * (i + 1) // 2 - n * i)
            / (qpochhammer(q, q, i) * qpochhammer(q, q, n - i))
            * v
        )
    return x ** (n + 1) * qpochhammer(1 / x, q, n + 1) * total


# ---------------------------------------------------------------------------
# two-layer route


@dataclass(frozen=True)
class FieldSet:
    """Fields of the two-layer projection."""

    w: Fraction
    phi_h: Fraction = Fraction(1)
    phi_v: Fraction = Fraction(1)
    psi_h: Fraction = Fraction(1)
    psi_v: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("w", "phi_h", "phi_v", "psi_h", "psi_v"):
            v = as_scalar(getattr(self, name))
            if v == 0:
                raise DomainError(f"field {name} must be nonzero")
            object.__setattr__(self, name, v)

    def transposed(self) -> "FieldSet":
        return FieldSet(self.w, self.phi_v, self.phi_h, self.psi_v, self.psi_h)


def two_layer_terms(i, j, ip, jp, I: int, J: int, q) -> dict[int, Fraction]:
    """The k1-summand as ``{gamma: C}``: summand ``= sum_gamma C q^{gamma k1}`` for all k1 >= 0."""
    q = as_scalar(q)
    d = i - ip
    first = r3_n3_expansion(j, i, jp, ip, d, q)
    second = r3_n3_expansion(J - j, I - i, J - jp, I - ip, -d, q)
    out: dict[int, Fraction] = {}
    for a, c1 in first.items():
        for b, c2 in second.items():
            # second factor is evaluated at k2 = k1 + d
            out[a + b] = out.get(a + b, Fraction(0)) + c1 * c2 * q ** (b * d)
    return {g: c for g, c in out.items() if c != 0}


def rij_two_layer(i, j, ip, jp, I: int, J: int, fields: FieldSet, q, positivity: bool = False) -> Fraction:
    """Two-layer composite element with the infinite k1-sum done in closed form.

    ``positivity=True`` insists on the convergent regime ``0 < w < q^{I+J}``.
    """
    q = as_scalar(q)
    if not (0 <= i <= I and 0 <= ip <= I and 0 <= j <= J and 0 <= jp <= J):
        raise DomainError("two-layer indices out of range")
    if i + j != ip + jp:
        return Fraction(0)
    w = fields.w
    if positivity and not (0 < w < q ** (I + J)):
        raise DomainError("positivity mode needs 0 < w < q^(I+J)")
    total = Fraction(0)
    for g, c in two_layer_terms(i, j, ip, jp, I, J, q).items():
        ratio = w * q**g
        if ratio == 1:
            raise PoleError("two-layer sum evaluated on a pole in w")
        total += c / (1 - ratio)
    return (
        fields.phi_h**i
        * fields.phi_v**j
        * fields.psi_h ** (ip - i)
        * fields.psi_v ** (jp - j)
        * total
    )


def two_layer_partial_sum(i, j, ip, jp, I: int, J: int, fields: FieldSet, q, terms: int) -> Fraction:
    """Direct truncated k1-sum from 3D R-matrix elements (oracle for the closed form)."""
    q = as_scalar(q)
    if i + j != ip + jp:
        return Fraction(0)
    total = Fraction(0)
    for k1 in range(terms):
        k2 = i + k1 - ip
        if k2 < 0:
            continue
        total += (
            fields.w**k1
            * r3_element((j, i, k1), (jp, ip, k2), q)
            * r3_element((J - j, I - i, k2), (J - jp, I - ip, k1), q)
        )
    return (
        fields.phi_h**i
        * fields.phi_v**j
        * fields.psi_h ** (ip - i)
        * fields.psi_v ** (jp - j)
        * total
    )


def sigma_normalization(I: int, J: int, ctx: Context, lam) -> Fraction:
    m = min(I, J)
    q = ctx.q
    return (
        (-1) ** m
        * ctx.p ** (I * J - m)
        * lam ** (-m)
        * qpochhammer(lam * lam * q ** (-I - J), q * q, m + 1)
    )


def rij_two_layer_normalized(i, j, ip, jp, I: int, J: int, ctx: Context, lam=None, phi=None) -> Fraction:
    """Two-layer element at ``w = lambda^2, phi_h = phi^2, psi_v = lambda`` with the standard normalization."""
    lam = ctx.lam if lam is None else as_scalar(lam)
    phi = ctx.phi if phi is None else as_scalar(phi)
    fields = FieldSet(w=lam * lam, phi_h=phi * phi, phi_v=1, psi_h=1, psi_v=lam)
    raw = rij_two_layer(i, j, ip, jp, I, J, fields, ctx.q)
    return phi ** (-I) * sigma_normalization(I, J, ctx, lam) * ctx.q**I * raw


# ---------------------------------------------------------------------------
# dispatch and matrices


def r_entry(i, j, ip, jp, A, B, ctx: Context, route: str = "single", lam=None, phi=None) -> Fraction:
    A, B = as_weight(A), as_weight(B)
    if route == "single":
        return rij_single_sum(i, j, ip, jp, A, B, ctx, lam, phi)
    if route == "double":
        return rij_double_sum(i, j, ip, jp, A, B, ctx, lam, phi)
    if route == "pole":
        return rij_pole_expansion(i, j, ip, jp, A, B, ctx, lam, phi)
    if route == "two-layer":
        if not (A.is_finite and B.is_finite):
            raise DomainError("two-layer route needs finite weights")
        return rij_two_layer_normalized(i, j, ip, jp, A.value, B.value, ctx, lam, phi)
    raise ValueError(f"unknown route {route!r}")


@dataclass
class SpinRMatrix:
    """Nonzero entries ``{(i, j, i', j'): value}`` of ``R_{A,B}`` at one point."""

    A: Weight
    B: Weight
    ctx: Context
    route: str
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key) -> Fraction:
        return self.entries.get(tuple(key), Fraction(0))

    def rows(self):
        """All index tuples in lexicographic order (finite weights only)."""
        return itertools.product(self.A.indices(), self.B.indices(), self.A.indices(), self.B.indices())


def build_r_matrix(A, B, ctx: Context, route: str = "single", limit: int | None = None, lam=None, phi=None) -> SpinRMatrix:
    """All entries; ``limit`` bounds the indices of infinite-dimensional weights."""
    A, B = as_weight(A), as_weight(B)
    R = SpinRMatrix(A, B, ctx, route)
    for i, j, ip in itertools.product(A.indices(limit), B.indices(limit), A.indices(limit)):
        jp = i + j - ip
        if not B.in_range(jp) or (limit is not None and jp > limit):
            continue
        v = r_entry(i, j, ip, jp, A, B, ctx, route, lam, phi)
        if v != 0:
            R.entries[(i, j, ip, jp)] = v
    return R


def laurent_nodes(count: int) -> list[Fraction]:
    """Sample points for lambda-interpolation, chosen away from q-power resonances."""
    return [Fraction(3 * k + 7, 2 * k + 5) for k in range(count)]


def r_entry_laurent(i, j, ip, jp, A, B, ctx: Context, route: str = "single", half_span: int | None = None) -> LaurentPoly:
    """Entry as a Laurent polynomial in lambda, recovered by exact interpolation.

    The fit uses exponents ``[-half_span, half_span]`` and three further
    check points; a failed check raises ``ArithmeticError``.
    """
    A, B = as_weight(A), as_weight(B)
    if half_span is None:
        m = m_exponent(A, B)
        half_span = (m if m is not None else i + ip) + 2
    nodes = laurent_nodes(2 * half_span + 4)
    f = lambda lam: r_entry(i, j, ip, jp, A, B, ctx, route, lam=lam)
    return LaurentPoly.fit(f, nodes[: 2 * half_span + 1], -half_span, half_span, check=nodes[2 * half_span + 1 :])


# ---------------------------------------------------------------------------
# fundamental L-operator


def l_operator_fundamental(mu, J, ctx: Context, limit: int | None = None) -> dict:
    """``L(mu)`` on ``C^2 x V_J`` obtained from ``R_{1,J}(lambda; 1)``.

    Returns ``{(a, b): {(j, j'): value}}`` with ``mu = lambda q^{1/2}`` and the
    similarity ``diag(1, 1/lambda)`` applied in ``C^2``.
    """
    J = as_weight(J)
    lam = as_scalar(mu) / ctx.p
    one = Weight.finite(1)
    ops: dict = {}
    for a, b in itertools.product(range(2), repeat=2):
        block = {}
        for j in J.indices(limit):
            jp = a + j - b
            if not J.in_range(jp) or (limit is not None and jp > limit):
                continue
            v = rij_single_sum(a, j, b, jp, one, J, ctx, lam=lam, phi=Fraction(1))
            if v != 0:
                block[(j, jp)] = v * lam ** (b - a)
        ops[(a, b)] = block
    return ops


def l_operator_generators(mu, J, ctx: Context, limit: int | None = None) -> dict:
    """``L(mu)`` written directly through ``E, F, q^{H/2}`` (oracle)."""
    J = as_weight(J)
    mu = as_scalar(mu)
    rep = VermaRep(J, ctx)
    bq = bracket(ctx.q)
    ops = {(0, 0): {}, (0, 1): {}, (1, 0): {}, (1, 1): {}}
    for jp in J.indices(limit):
        k = rep.h_half(jp)
        ops[(0, 0)][(jp, jp)] = mu * k - 1 / (mu * k)
        ops[(1, 1)][(jp, jp)] = mu / k - k / mu
        f = rep.F(jp)
        if f is not None and (limit is None or f[0] <= limit):
            ops[(0, 1)][(f[0], jp)] = mu * bq * f[1] / k
        e = rep.E(jp)
        if e is not None:
            ops[(1, 0)][(e[0], jp)] = bq * rep.h_half(e[0]) * e[1] / mu
    return {key: {k: v for k, v in blk.items() if v != 0} for key, blk in ops.items()}


# ---------------------------------------------------------------------------
# Yang-Baxter equation


def compositions(total: int, bounds: tuple) -> list[tuple[int, ...]]:
    """Tuples with the given sum, entry ``k`` in ``[0, bounds[k]]`` (``None`` = unbounded), lex order."""
    out = []

    def rec(prefix, remaining, k):
        if k == len(bounds) - 1:
            b = bounds[k]
            if b is None or remaining <= b:
                out.append(prefix + (remaining,))
            return
        top = remaining if bounds[k] is None else min(bounds[k], remaining)
        for v in range(top + 1):
            rec(prefix + (v,), remaining - v, k + 1)

    rec((), total, 0)
    return out


def _embed(entry: Callable, legs: tuple[int, int], basis: list) -> list[list[Fraction]]:
    """Matrix of a two-leg operator acting on the legs of a three-leg sector basis."""
    index = {b: n for n, b in enumerate(basis)}
    size = len(basis)
    M = [[Fraction(0)] * size for _ in range(size)]
    a, b = legs
    for row, r in enumerate(basis):
        for col, c in enumerate(basis):
            if any(r[k] != c[k] for k in range(3) if k not in legs):
                continue
            if r[a] + r[b] != c[a] + c[b]:
                continue
            M[row][col] = entry(r[a], r[b], c[a], c[b])
    return M


def matmul(X, Y):
    n, m, p = len(X), len(Y), len(Y[0]) if Y else 0
    out = [[Fraction(0)] * p for _ in range(n)]
    for i in range(n):
        Xi = X[i]
        Oi = out[i]
        for k in range(m):
            x = Xi[k]
            if x == 0:
                continue
            Yk = Y[k]
            for j in range(p):
                if Yk[j]:
                    Oi[j] += x * Yk[j]
    return out


def _max_abs_diff(X, Y) -> Fraction:
    return max((abs(a - b) for rx, ry in zip(X, Y) for a, b in zip(rx, ry)), default=Fraction(0))


@dataclass
class YBEReport:
    weights: tuple
    params: dict
    sectors: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    @property
    def exact_zero(self) -> bool:
        return all(v == 0 for v in self.residuals.values())

    @property
    def max_abs(self) -> Fraction:
        return max(self.residuals.values(), default=Fraction(0))


def verify_ybe(W1, W2, W3, lam1, lam2, ctx: Context, max_total: int | None = None, route: str = "single") -> YBEReport:
    """``R12(l1;1) R13(l1 l2;phi) R23(l2;phi) = R23 R13 R12`` sector by sector.

    Sector totals run up to ``max_total`` (default: the sum of finite weights).
    """
    W1, W2, W3 = map(as_weight, (W1, W2, W3))
    lam1, lam2 = as_scalar(lam1), as_scalar(lam2)
    phi = ctx.phi
    bounds = tuple(w.value if w.is_finite else None for w in (W1, W2, W3))
    if max_total is None:
        if None in bounds:
            raise DomainError("infinite-dimensional weights need max_total")
        max_total = sum(bounds)
    report = YBEReport((W1.label(), W2.label(), W3.label()), {"lam1": str(lam1), "lam2": str(lam2), **ctx.describe()})
    cache: dict = {}

    def ent(A, B, lam, ph):
        def f(i, j, ip, jp):
            key = (A, B, lam, ph, i, j, ip, jp)
            if key not in cache:
                cache[key] = r_entry(i, j, ip, jp, A, B, ctx, route, lam=lam, phi=ph)
            return cache[key]

        return f

    e12 = ent(W1, W2, lam1, Fraction(1))
    e13 = ent(W1, W3, lam1 * lam2, phi)
    e23 = ent(W2, W3, lam2, phi)
    for t in range(max_total + 1):
        basis = compositions(t, bounds)
        if not basis:
            continue
        R12 = _embed(e12, (0, 1), basis)
        R13 = _embed(e13, (0, 2), basis)
        R23 = _embed(e23, (1, 2), basis)
        lhs = matmul(matmul(R12, R13), R23)
        rhs = matmul(matmul(R23, R13), R12)
        report.sectors.append(t)
        report.residuals[t] = _max_abs_diff(lhs, rhs)
    return report


def ybe_dependent_fields(f: FieldSet, f1: FieldSet, f2: FieldSet) -> tuple[FieldSet, FieldSet]:
    """Impose the field constraints; returns the corrected (R', R'') field sets.

    ``f1.phi_v`` and ``f2.phi_h``, ``f2.phi_v``, ``f2.psi_v`` are overwritten.
    """
    f1 = FieldSet(f1.w, f1.phi_h, f.phi_v, f1.psi_h, f1.psi_v)
    psi_v2 = f.psi_h * f1.psi_v * f2.psi_h / (f.phi_h * f.psi_v * f1.psi_h)
    f2 = FieldSet(f2.w, f1.phi_h, 1 / f.phi_h, f2.psi_h, psi_v2)
    return f1, f2


def verify_ybe_two_layer(I1: int, I2: int, I3: int, f: FieldSet, f1: FieldSet, f2: FieldSet, q) -> YBEReport:
    """Yang-Baxter equation for the raw two-layer matrices with independent field sets.

    ``f``, ``f1``, ``f2`` are the fields of ``R_{12}(w)``, ``R'_{13}(w w')`` and
    ``R''_{23}(w')``; the constrained ones are derived here, and ``f1.w`` is
    reset to ``f.w * f2.w``.
    """
    q = as_scalar(q)
    f1 = FieldSet(f.w * f2.w, f1.phi_h, f1.phi_v, f1.psi_h, f1.psi_v)
    f1, f2 = ybe_dependent_fields(f, f1, f2)
    report = YBEReport((I1, I2, I3), {"q": str(q), "w": str(f.w), "w'": str(f2.w)})
    e12 = lambda i, j, ip, jp: rij_two_layer(i, j, ip, jp, I1, I2, f, q)
    e13 = lambda i, j, ip, jp: rij_two_layer(i, j, ip, jp, I1, I3, f1, q)
    e23 = lambda i, j, ip, jp: rij_two_layer(i, j, ip, jp, I2, I3, f2, q)
    for t in range(I1 + I2 + I3 + 1):
        basis = compositions(t, (I1, I2, I3))
        R12 = _embed(e12, (0, 1), basis)
        R13 = _embed(e13, (0, 2), basis)
        R23 = _embed(e23, (1, 2), basis)
        lhs = matmul(matmul(R12, R13), R23)
        rhs = matmul(matmul(R23, R13), R12)
        report.sectors.append(t)
        report.residuals[t] = _max_abs_diff(lhs, rhs)
    return report


# ---------------------------------------------------------------------------
# symmetries


@dataclass
class SymmetryReport:
    I: int
    J: int
    residuals: dict = field(default_factory=dict)

    @property
    def exact_zero(self) -> bool:
        return all(v == 0 for v in self.residuals.values())


def verify_symmetries(I: int, J: int, ctx: Context, route: str = "single", fields: FieldSet | None = None) -> SymmetryReport:
    """Exact residuals of the permutation, spin-flip, inversion and two-layer transposition symmetries."""
    rep = SymmetryReport(I, J)
    A, B = Weight.finite(I), Weight.finite(J)
    lam, phi = ctx.lam, ctx.phi
    q = ctx.q
    m = min(I, J)
    perm = flip = inv = Fraction(0)
    ictx = ctx.inverted_q()
    for i, j, ip in itertools.product(range(I + 1), range(J + 1), range(I + 1)):
        jp = i + j - ip
        if not 0 <= jp <= J:
            continue
        r1 = r_entry(i, j, ip, jp, A, B, ctx, route, phi=Fraction(1))
        r1t = r_entry(j, i, jp, ip, B, A, ctx, route, phi=Fraction(1))
        perm = max(perm, abs(r1 - r1t))
        r = r_entry(i, j, ip, jp, A, B, ctx, route)
        rf = r_entry(I - i, J - j, I - ip, J - jp, A, B, ctx, route, phi=1 / phi)
        flip = max(flip, abs(r - rf))
        d1 = lambda a: q ** (-a * (a - 1))
        d2 = lambda b: q ** (-b * (b - 1) + b * (J - I))
        lhs = r_entry(i, j, ip, jp, A, B, ictx, route, lam=1 / lam)
        rhs = (-1) ** m * d1(i) * d2(j) / (d1(ip) * d2(jp)) * r
        inv = max(inv, abs(lhs - rhs))
    rep.residuals["permutation"] = perm
    rep.residuals["spin_flip"] = flip
    rep.residuals["inversion"] = inv
    if fields is None:
        fields = FieldSet(w=q ** (I + J + 2), phi_h=Fraction(2, 3), phi_v=Fraction(5, 7), psi_h=Fraction(3, 2), psi_v=Fraction(4, 5))
    tr = Fraction(0)
    for j, i, jp in itertools.product(range(J + 1), range(I + 1), range(J + 1)):
        ip = i + j - jp
        if not 0 <= ip <= I:
            continue
        lhs = rij_two_layer(j, i, jp, ip, J, I, fields, q)
        rhs = q ** (I - J) * fields.w ** (i - ip) * rij_two_layer(i, j, ip, jp, I, J, fields.transposed(), q)
        tr = max(tr, abs(lhs - rhs))
    rep.residuals["two_layer_transpose"] = tr
    return rep


# ---------------------------------------------------------------------------
# defining recurrences


def _S(A: Weight, B: Weight, ctx: Context, cache: dict):
    def S(i, j, ip, jp):
        if i + j != ip + jp or not (A.in_range(i) and A.in_range(ip) and B.in_range(j) and B.in_range(jp)):
            return Fraction(0)
        key = (i, j, ip, jp)
        if key not in cache:
            cache[key] = rij_single_sum(i, j, ip, jp, A, B, ctx, phi=Fraction(1))
        return cache[key]

    return S


def recurrence_terms(n: int, i, j, ip, jp, A: Weight, B: Weight, ctx: Context) -> list[tuple[Fraction, tuple]]:
    """Coefficient/index pairs of recurrence ``n`` (1, 2 or 3) anchored at ``(i, j, i', j')``."""
    q = ctx.q
    lam = ctx.lam
    l2 = lam * lam
    qI = A.q_pow(ctx, 1)
    qJ = B.q_pow(ctx, 1)
    if n == 1:
        return [
            ((1 - l2 * q ** (2 * (1 + i + j)) / (qI * qJ)) * (1 - q ** (2 + 2 * ip)), (i, j, ip, jp)),
            (-lam * q ** (ip - j) * (1 - q ** (2 * (1 + i + ip)) / qI**2) * (1 - q ** (2 + 2 * j)), (i, j + 1, ip + 1, jp)),
            (
                -q ** (3 * j - jp) / qJ * (1 - q ** (2 + 2 * i)) * (1 - l2 * q ** (2 * (1 + ip - j)) * qJ / qI),
                (i + 1, j, ip + 1, jp),
            ),
        ]
    if n == 2:
        return [
            (
                lam * q ** (i - j - 2 * ip - 2) * qJ * (1 - q ** (2 * (2 + j + jp)) / qJ**2) * (1 - q ** (2 + 2 * ip)),
                (i, j + 1, ip, jp + 1),
            ),
            (-(1 - l2 * q ** (2 * i - 2 * jp) * qJ / qI) * (1 - q ** (2 + 2 * jp)), (i, j + 1, ip + 1, jp)),
            (
                q ** (3 * i - ip - 1) / qI * (1 - l2 * qI * qJ * q ** (-2 * (1 + i + j))) * (1 - q ** (4 + 2 * j)),
                (i, j + 2, ip + 1, jp + 1),
            ),
        ]
    if n == 3:
        return [
            (
                lam * q ** (3 + 3 * i - j) * qJ / qI**2 * (1 - qI**2 * q ** (-2 * i)) * (1 - qJ**2 * q ** (-2 * (j + jp))),
                (i, j, ip, jp),
            ),
            ((1 - q ** (2 * (1 - j)) * qJ**2) * (1 - l2 * q ** (2 * (1 + i - jp)) * qJ / qI), (i + 1, j - 1, ip, jp)),
            (
                -q ** (3 + 3 * i - ip) / qI * (1 - qJ**2 * q ** (-2 * jp)) * (1 - l2 * qI * qJ * q ** (-2 * i - 2 * j)),
                (i + 1, j, ip, jp + 1),
            ),
        ]
    raise ValueError(n)


def recurrence_anchors(A: Weight, B: Weight, max_total: int | None = None):
    """Anchor tuples for the recurrences: conserved, each index at most one outside its module."""
    ia = range(-1, (A.value if A.is_finite else max_total) + 2)
    jb = range(-2, (B.value if B.is_finite else max_total) + 2)
    for i, j, ip in itertools.product(ia, jb, ia):
        jp = i + j - ip
        if jp < -2 or jp > jb[-1]:
            continue
        if max_total is not None and i + j > max_total:
            continue
        yield i, j, ip, jp


def _inside(idx, A: Weight, B: Weight) -> bool:
    i, j, ip, jp = idx
    return A.in_range(i) and A.in_range(ip) and B.in_range(j) and B.in_range(jp)


def _admissible(terms, A: Weight, B: Weight, max_total: int | None = None) -> bool:
    """Every term with a nonzero coefficient lies inside the modules (and the sector cap)."""
    live = [idx for c, idx in terms if c != 0]
    if not live:
        return False
    if max_total is not None and any(idx[0] + idx[1] > max_total for idx in live):
        return False
    return all(_inside(idx, A, B) for idx in live)


@dataclass
class RecurrenceReport:
    residuals: dict = field(default_factory=dict)
    checked: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def exact_zero(self) -> bool:
        return all(v == 0 for v in self.residuals.values())


def recurrence_oracle(A, B, ctx: Context, max_total: int | None = None) -> RecurrenceReport:
    """Apply the three recurrences to single-sum entries (``phi = 1``).

    An anchor is admissible when every term with a nonzero coefficient stays
    inside the modules; at the edges the recurrences do not hold with the
    outside entries simply set to zero.  For infinite-dimensional weights
    anchors are also limited to sector totals ``<= max_total``.
    """
    A, B = as_weight(A), as_weight(B)
    if not (A.is_finite and B.is_finite) and max_total is None:
        raise DomainError("infinite-dimensional weights need max_total")
    S = _S(A, B, ctx, {})
    rep = RecurrenceReport()
    for n in (1, 2, 3):
        worst = Fraction(0)
        count = 0
        for anchor in recurrence_anchors(A, B, max_total):
            terms = recurrence_terms(n, *anchor, A, B, ctx)
            if not _admissible(terms, A, B, max_total):
                continue
            res = sum((c * S(*idx) for c, idx in terms), Fraction(0))
            count += 1
            if res != 0:
                rep.failures.append((n, anchor, res))
            worst = max(worst, abs(res))
        rep.residuals[n] = worst
        rep.checked[n] = count
    return rep


def reconstruct_from_recurrences(I: int, J: int, ctx: Context) -> dict:
    """Solve the recurrences with ``S_{00}^{00} = 1`` as an exact linear system.

    Returns the unique solution ``{(i,j,i',j'): S}``; raises if it is not unique.
    """
    A, B = Weight.finite(I), Weight.finite(J)
    unknowns = [
        (i, j, ip, i + j - ip)
        for i, j, ip in itertools.product(range(I + 1), range(J + 1), range(I + 1))
        if 0 <= i + j - ip <= J
    ]
    col = {u: n for n, u in enumerate(unknowns)}
    rows, rhs = [], []
    for n in (1, 2, 3):
        for anchor in recurrence_anchors(A, B):
            terms = recurrence_terms(n, *anchor, A, B, ctx)
            if not _admissible(terms, A, B):
                continue
            row = [Fraction(0)] * len(unknowns)
            touched = False
            for c, idx in terms:
                if idx in col and c != 0:
                    row[col[idx]] += c
                    touched = True
            if touched:
                rows.append(row)
                rhs.append(Fraction(0))
    norm = [Fraction(0)] * len(unknowns)
    norm[col[(0, 0, 0, 0)]] = Fraction(1)
    rows.append(norm)
    rhs.append(Fraction(1))
    sol = solve_exact(rows, rhs)
    return dict(zip(unknowns, sol))


def recurrence_rank(I: int, J: int, ctx: Context) -> tuple[int, int]:
    """(rank of the homogeneous recurrence system, number of unknowns)."""
    A, B = Weight.finite(I), Weight.finite(J)
    unknowns = [
        (i, j, ip, i + j - ip)
        for i, j, ip in itertools.product(range(I + 1), range(J + 1), range(I + 1))
        if 0 <= i + j - ip <= J
    ]
    col = {u: n for n, u in enumerate(unknowns)}
    rows = []
    for n in (1, 2, 3):
        for anchor in recurrence_anchors(A, B):
            terms = recurrence_terms(n, *anchor, A, B, ctx)
            if not _admissible(terms, A, B):
                continue
            row = [Fraction(0)] * len(unknowns)
            for c, idx in terms:
                if idx in col:
                    row[col[idx]] += c
            if any(row):
                rows.append(row)
    return rank_exact(rows), len(unknowns)

"""The 3D R-matrix on three Fock spaces and the tetrahedron equation.

Index convention: ``element((n1, n2, n3), (m1, m2, m3), q)`` is the matrix
element ``<n1 n2 n3| R |m1 m2 m3>``; products of R-operators are ordinary
matrix products (bra index first).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .scalars import as_scalar, phi_regularized, qpochhammer

Triple = tuple[int, int, int]


def conserved(n: Triple, m: Triple) -> bool:
    return n[0] + n[1] == m[0] + m[1] and n[1] + n[2] == m[1] + m[2]


# ---------------------------------------------------------------------------
# the polynomials Q_n(x, y, z)


def qn_recurrence(n: int, x, y, z, q) -> Fraction:
    """``Q_n(x,y,z)`` by iterating the defining recurrence from ``Q_0 = 1``."""
    q = as_scalar(q)
    q2 = q * q

    @lru_cache(maxsize=None)
    def rec(k, a, b, c):
        # Q_k(x q^{2a}, y q^{2b}, z q^{2c})
        if k == 0:
            return Fraction(1)
        xx, yy, zz = x * q2**a, y * q2**b, z * q2**c
        return (xx - 1) * (zz - 1) * rec(k - 1, a + 1, b, c + 1) + xx * zz * (yy - 1) * q2 ** (
            k - 1
        ) * rec(k - 1, a, b + 1, c)

    return rec(n, 0, 0, 0)


def qn_closed(n: int, x, y, z, q) -> Fraction:
    """``Q_n`` from the closed regularized 2phi1 expression."""
    q = as_scalar(q)
    q2 = q * q
    x, y, z = map(as_scalar, (x, y, z))
    a = q ** (2 - 2 * n) / (x * y)
    b = q ** (2 - 2 * n) / x
    return (-x) ** n * q ** (n * (n - 1)) * phi_regularized(n, [a], [b], q2, y * z * q ** (2 * n))


# ---------------------------------------------------------------------------
# matrix elements


def _r_sum_terms(n1: int, n2: int, m1: int, q: Fraction) -> list[tuple[int, Fraction]]:
    """Terms ``(r, c_r)`` of the finite r-sum, independent of n3.

    The sum equals ``sum_r c_r q^{-2 r (n3 + m1 + 1)}``.
    """
    q2 = q * q
    out = []
    for r in range(n2 + 1):
        c = (
            qpochhammer(q ** (-2 * m1), q2, n2 - r)
            / qpochhammer(q2, q2, n2 - r)
            * qpochhammer(q ** (2 + 2 * n1), q2, r)
            / qpochhammer(q2, q2, r)
        )
        if c != 0:
            out.append((r, c))
    return out


def r3_formula(n: Triple, m: Triple, q) -> Fraction:
    """The single-sum expression evaluated verbatim (no index-range check).

    Negative ``n3``/``m3`` are allowed; this is what the vanishing property
    of the third index range refers to.
    """
    q = as_scalar(q)
    n1, n2, n3 = n
    m1, m2, m3 = m
    if not conserved(n, m):
        return Fraction(0)
    pre = q ** (n2 * (n2 + 1) - (n2 - m1) * (n2 - m3))
    s = sum((c * q ** (-2 * r * (n3 + m1 + 1)) for r, c in _r_sum_terms(n1, n2, m1, q)), Fraction(0))
    return pre * s


@lru_cache(maxsize=200_000)
def _r3_cached(n: Triple, m: Triple, q: Fraction) -> Fraction:
    return r3_formula(n, m, q)


def r3_element(n: Triple, m: Triple, q) -> Fraction:
    """``<n|R|m>``; zero outside the conservation laws and for negative indices."""
    if min(n) < 0 or min(m) < 0:
        return Fraction(0)
    if not conserved(n, m):
        return Fraction(0)
    return _r3_cached(tuple(n), tuple(m), as_scalar(q))


def r3_via_polynomial(n: Triple, m: Triple, q) -> Fraction:
    """Same element through the ``Q_n`` polynomial route (oracle)."""
    q = as_scalar(q)
    if min(n) < 0 or min(m) < 0 or not conserved(n, m):
        return Fraction(0)
    n1, n2, n3 = n
    m1, m2, m3 = m
    pre = q ** (n2 * (n2 + 1) - (n2 - m1) * (n2 - m3)) / qpochhammer(q * q, q * q, n2)
    return pre * qn_recurrence(n2, q ** (-2 * m1), q ** (-2 * m2), q ** (-2 * m3), q)


def r3_n3_expansion(n1: int, n2: int, m1: int, m2: int, shift: int, q) -> dict[int, Fraction]:
    """Element as a function of the third index: ``{alpha: c}`` with value ``sum c q^{alpha k}``.

    The element is ``<n1, n2, k| R |m1, m2, k + shift>`` where ``shift = n2 - m2``
    is forced by conservation.  Valid for every integer ``k`` where the verbatim
    formula applies (including the negative range covered by the vanishing
    property).
    """
    q = as_scalar(q)
    if n1 + n2 != m1 + m2 or shift != n2 - m2:
        return {}
    # q^{n2(n2+1) - (n2-m1)(n2-k-shift)} = const * q^{(n2-m1) k}
    const = q ** (n2 * (n2 + 1) - (n2 - m1) * (n2 - shift))
    out: dict[int, Fraction] = {}
    for r, c in _r_sum_terms(n1, n2, m1, q):
        alpha = (n2 - m1) - 2 * r
        out[alpha] = out.get(alpha, Fraction(0)) + const * c * q ** (-2 * r * (m1 + 1))
    return {a: v for a, v in out.items() if v != 0}


# ---------------------------------------------------------------------------
# dressing


@dataclass(frozen=True)
class DressingFields:
    """Per-space fields ``lambda_i, mu_i`` and similarity constants ``c_i``.

    Spaces are labelled ``1..6`` as in the tetrahedron equation.
    """

    lam: dict[int, Fraction] = field(default_factory=lambda: {i: Fraction(1) for i in range(1, 7)})
    mu: dict[int, Fraction] = field(default_factory=lambda: {i: Fraction(1) for i in range(1, 7)})
    c: dict[int, Fraction] = field(default_factory=lambda: {i: Fraction(1) for i in range(1, 7)})

    def __post_init__(self):
        for d in (self.lam, self.mu, self.c):
            if any(v == 0 for v in d.values()):
                raise ValueError("dressing fields must be nonzero")

    @classmethod
    def random(cls, rng: random.Random, spaces=range(1, 7)) -> "DressingFields":
        def pick():
            return Fraction(rng.randint(1, 9), rng.randint(1, 9))

        return cls(
            lam={i: pick() for i in spaces},
            mu={i: pick() for i in spaces},
            c={i: pick() for i in spaces},
        )


def r3_dressed(n: Triple, m: Triple, spaces: Triple, fields: DressingFields, q) -> Fraction:
    """Element of the dressed and similarity-transformed ``R_{ijk}``.

    ``spaces = (i, j, k)`` names the Fock spaces the three tensor legs act on.
    """
    base = r3_element(n, m, q)
    if base == 0:
        return base
    i, j, k = spaces
    lam, mu, c = fields.lam, fields.mu, fields.c
    value = base * (mu[k] / lam[i]) ** n[1] * (lam[j] / lam[k]) ** m[0] * (mu[i] / mu[j]) ** m[2]
    for leg, sp in enumerate(spaces):
        value *= c[sp] ** (n[leg] - m[leg])
    return value


# ---------------------------------------------------------------------------
# tetrahedron equation


def _elem_factory(q, fields: DressingFields | None):
    q = as_scalar(q)
    if fields is None:
        return lambda spaces, n, m: r3_element(n, m, q)
    return lambda spaces, n, m: r3_dressed(n, m, spaces, fields, q)


def tetrahedron_sides(
    ext_in: tuple[int, ...], ext_out: tuple[int, ...], q, fields: DressingFields | None = None
) -> tuple[Fraction, Fraction]:
    """Both sides of ``R123 R145 R246 R356 = R356 R246 R145 R123`` for one element.

    ``ext_in`` and ``ext_out`` hold the six bra and ket indices.  Internal
    sums are finite: every internal index is fixed by conservation once one
    free index per side is chosen, and all are bounded by the total of the
    external indices.
    """
    el = _elem_factory(q, fields)
    n1, n2, n3, n4, n5, n6 = ext_in
    o1, o2, o3, o4, o5, o6 = ext_out
    bound = sum(ext_in) + sum(ext_out)

    lhs = Fraction(0)
    for a2 in range(bound + 1):
        a1 = n1 + n2 - a2
        a3 = n2 + n3 - a2
        a4 = a1 + n4 - o1
        a5 = n4 + n5 - a4
        a6 = a4 + n6 - o4
        if min(a1, a3, a4, a5, a6) < 0:
            continue
        t = el((1, 2, 3), (n1, n2, n3), (a1, a2, a3))
        if t == 0:
            continue
        t *= el((1, 4, 5), (a1, n4, n5), (o1, a4, a5))
        if t == 0:
            continue
        t *= el((2, 4, 6), (a2, a4, n6), (o2, o4, a6))
        if t == 0:
            continue
        t *= el((3, 5, 6), (a3, a5, a6), (o3, o5, o6))
        lhs += t

    rhs = Fraction(0)
    for a5 in range(bound + 1):
        a3 = n3 + n5 - a5
        a6 = n5 + n6 - a5
        a4 = n4 + a6 - o6
        a2 = n2 + n4 - a4
        a1 = n1 + a4 - o4
        if min(a1, a2, a3, a4, a6) < 0:
            continue
        t = el((3, 5, 6), (n3, n5, n6), (a3, a5, a6))
        if t == 0:
            continue
        t *= el((2, 4, 6), (n2, n4, a6), (a2, a4, o6))
        if t == 0:
            continue
        t *= el((1, 4, 5), (n1, a4, a5), (a1, o4, o5))
        if t == 0:
            continue
        t *= el((1, 2, 3), (a1, a2, a3), (o1, o2, o3))
        rhs += t
    return lhs, rhs


def _brute_sides(ext_in, ext_out, q, fields=None):
    """Unpruned six-fold internal sum; oracle for :func:`tetrahedron_sides`."""
    el = _elem_factory(q, fields)
    n1, n2, n3, n4, n5, n6 = ext_in
    o1, o2, o3, o4, o5, o6 = ext_out
    bound = sum(ext_in) + sum(ext_out)
    rng = range(bound + 1)
    lhs = rhs = Fraction(0)
    for a1, a2, a3, a4, a5, a6 in itertools.product(rng, repeat=6):
        lhs += (
            el((1, 2, 3), (n1, n2, n3), (a1, a2, a3))
            * el((1, 4, 5), (a1, n4, n5), (o1, a4, a5))
            * el((2, 4, 6), (a2, a4, n6), (o2, o4, a6))
            * el((3, 5, 6), (a3, a5, a6), (o3, o5, o6))
        )
        rhs += (
            el((3, 5, 6), (n3, n5, n6), (a3, a5, a6))
            * el((2, 4, 6), (n2, n4, a6), (a2, a4, o6))
            * el((1, 4, 5), (n1, a4, a5), (a1, o4, o5))
            * el((1, 2, 3), (a1, a2, a3), (o1, o2, o3))
        )
    return lhs, rhs


@dataclass
class TetraReport:
    q: Fraction
    max_index: int
    dressed: bool
    cases: int = 0
    nonzero_cases: int = 0
    failures: list = field(default_factory=list)

    @property
    def exact_zero(self) -> bool:
        return not self.failures


def verify_tetrahedron(
    q,
    max_index: int = 1,
    fields: DressingFields | None = None,
    tuples=None,
) -> TetraReport:
    """Check the tetrahedron equation on every external tuple with entries <= max_index.

    ``tuples`` may supply an explicit iterable of ``(ext_in, ext_out)`` pairs
    instead of the full grid.
    """
    q = as_scalar(q)
    report = TetraReport(q=q, max_index=max_index, dressed=fields is not None)
    if tuples is None:
        grid = itertools.product(range(max_index + 1), repeat=12)
        tuples = ((t[:6], t[6:]) for t in grid)
    for ext_in, ext_out in tuples:
        lhs, rhs = tetrahedron_sides(tuple(ext_in), tuple(ext_out), q, fields)
        report.cases += 1
        if lhs != 0 or rhs != 0:
            report.nonzero_cases += 1
        if lhs != rhs:
            report.failures.append((tuple(ext_in), tuple(ext_out), lhs - rhs))
    return report


def random_nontrivial_tuples(count: int, max_index: int, seed: int, q=Fraction(1, 2)):
    """Random external tuples for which at least one side is nonzero.

    Uniform tuples almost never satisfy the conservation laws, so this draws
    the bra indices at random and then picks uniformly among the ket indices
    (entries ``<= max_index``) that give a nonzero side.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        ext_in = tuple(rng.randint(0, max_index) for _ in range(6))
        live = [
            ext_out
            for ext_out in itertools.product(range(max_index + 1), repeat=6)
            if tetrahedron_sides(ext_in, ext_out, q) != (0, 0)
        ]
        if live:
            out.append((ext_in, rng.choice(live)))
    return out


def random_tuples(count: int, max_index: int, seed: int):
    rng = random.Random(seed)
    return [
        (
            tuple(rng.randint(0, max_index) for _ in range(6)),
            tuple(rng.randint(0, max_index) for _ in range(6)),
        )
        for _ in range(count)
    ]

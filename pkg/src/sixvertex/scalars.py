"""Exact scalars, q-Pochhammer symbols and terminating basic hypergeometric sums.

Everything here is exact.  Scalars are :class:`fractions.Fraction`; the
series kernels are written against the ring operations only, so they also
accept :class:`LaurentPoly` arguments wherever no division by a parameter
is needed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Scalar = Fraction

__all__ = [
    "Scalar",
    "PoleError",
    "ConvergenceError",
    "DomainError",
    "Mode",
    "Context",
    "LaurentPoly",
    "as_scalar",
    "bracket",
    "brace",
    "qpochhammer",
    "phi_terminating",
    "phi_regularized",
    "solve_exact",
    "rank_exact",
    "decimal_str",
]


class PoleError(ArithmeticError):
    """A formula was evaluated exactly on one of its poles."""


class ConvergenceError(ArithmeticError):
    """A geometric series was asked for at a ratio where it has no value."""


class DomainError(ValueError):
    """Indices or parameters outside the admissible range."""


def as_scalar(value) -> Fraction:
    """Parse ``int``, ``Fraction`` or a ``"num/den"`` string into a Fraction.

    Floats are rejected on purpose: nothing in the exact pipeline should ever
    pass through binary floating point.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot make an exact scalar from {type(value).__name__}")


def bracket(x):
    """``[x] = x - 1/x``."""
    return x - 1 / x


def brace(x):
    """``{x} = x + 1/x``."""
    return x + 1 / x


def decimal_str(x: Fraction, digits: int = 12) -> str:
    """Fixed-precision decimal rendering, for reports only."""
    from decimal import Decimal, localcontext

    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


# ---------------------------------------------------------------------------
# Context


class Mode(enum.Enum):
    POINT = "point"
    LAURENT = "laurent"


@dataclass(frozen=True)
class Context:
    """Numeric point at which formulas are evaluated.

    ``p`` is the square root of ``q``: all half-integer powers of ``q`` are
    integer powers of ``p``.  ``lam`` is the spectral parameter and ``phi``
    the horizontal field.  In ``Mode.LAURENT`` the value of ``lam`` is only a
    default sample point; Laurent coefficients are recovered by exact
    interpolation (see :meth:`LaurentPoly.fit`).
    """

    p: Fraction
    lam: Fraction = Fraction(1)
    phi: Fraction = Fraction(1)
    mode: Mode = Mode.POINT

    def __post_init__(self):
        for name in ("p", "lam", "phi"):
            object.__setattr__(self, name, as_scalar(getattr(self, name)))
        if self.p == 0 or abs(self.p) == 1:
            raise DomainError("p must be nonzero and different from +-1")
        if self.lam == 0:
            raise DomainError("lambda must be nonzero")
        if self.phi == 0:
            raise DomainError("phi must be nonzero")

    @classmethod
    def from_q(cls, q, **kwargs) -> "Context":
        """Build a context from ``q``; ``q`` must be the square of a rational."""
        q = as_scalar(q)
        p = rational_sqrt(q)
        if p is None:
            raise DomainError(f"q = {q} is not the square of a rational; pass p instead")
        return cls(p=p, **kwargs)

    @property
    def q(self) -> Fraction:
        return self.p * self.p

    def qp(self, half_exponent: int) -> Fraction:
        """``q**(half_exponent/2)``, i.e. ``p**half_exponent``."""
        return self.p ** half_exponent

    def with_lam(self, lam) -> "Context":
        return replace(self, lam=as_scalar(lam))

    def with_phi(self, phi) -> "Context":
        return replace(self, phi=as_scalar(phi))

    def inverted_q(self) -> "Context":
        """Context with ``q -> 1/q`` (``p -> 1/p``)."""
        return replace(self, p=1 / self.p)

    def describe(self) -> dict:
        return {
            "p": str(self.p),
            "q": str(self.q),
            "lambda": str(self.lam),
            "phi": str(self.phi),
            "mode": self.mode.value,
        }


def _isqrt_exact(n: int) -> int | None:
    import math

    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Positive rational square root of ``x`` or ``None``."""
    x = as_scalar(x)
    a = _isqrt_exact(x.numerator)
    b = _isqrt_exact(x.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


# ---------------------------------------------------------------------------
# q-series kernel


def qpochhammer(x, q, n: int):
    """``(x; q)_n`` for any integer ``n``.

    For ``n < 0`` this is ``1/(x q^n; q)_{-n}``; a vanishing factor there is a
    genuine pole and raises :class:`PoleError`.
    """
    result = Fraction(1)
    if n >= 0:
        term = x
        for _ in range(n):
            result = result * (1 - term)
            term = term * q
        return result
    den = qpochhammer(x * q**n, q, -n)
    if den == 0:
        raise PoleError(f"(x; q)_{n} has a vanishing denominator")
    return 1 / den


def _check_lengths(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise ValueError("numerator and denominator parameter lists must have equal length")


def phi_terminating(n: int, a: Sequence, b: Sequence, q, z):
    """Plain terminating series ``_{r+1}phi_r(q^{-n}, a; b | q, z)``."""
    _check_lengths(a, b)
    if n < 0:
        raise DomainError("n must be nonnegative")
    qn = q ** (-n)
    total = Fraction(0)
    for k in range(n + 1):
        num = z**k * qpochhammer(qn, q, k)
        den = qpochhammer(q, q, k)
        for a_s, b_s in zip(a, b):
            num = num * qpochhammer(a_s, q, k)
            den = den * qpochhammer(b_s, q, k)
        if den == 0:
            raise PoleError(f"denominator parameter hits q^-m with m < {n}")
        total = total + num / den
    return total


def phi_regularized(n: int, a: Sequence, b: Sequence, q, z):
    """Regularized series: the plain one times ``prod_s (b_s; q)_n``.

    Computed directly as
    ``sum_k z^k (q^-n;q)_k/(q;q)_k prod_s (a_s;q)_k (b_s q^k;q)_{n-k}``,
    which never divides by a ``b``-dependent quantity.
    """
    _check_lengths(a, b)
    if n < 0:
        raise DomainError("n must be nonnegative")
    qn = q ** (-n)
    total = Fraction(0)
    zk = Fraction(1)
    for k in range(n + 1):
        term = zk * qpochhammer(qn, q, k) / qpochhammer(q, q, k)
        for a_s, b_s in zip(a, b):
            term = term * qpochhammer(a_s, q, k) * qpochhammer(b_s * q**k, q, n - k)
        total = total + term
        zk = zk * z
    return total


# ---------------------------------------------------------------------------
# Laurent polynomials


class LaurentPoly:
    """Finite Laurent polynomial ``sum_k c_k x^k`` with exact coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: dict[int, object] | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            if v != 0:
                c[int(k)] = v
        self._c = c

    @classmethod
    def monomial(cls, k: int, coeff=1) -> "LaurentPoly":
        return cls({k: coeff})

    @classmethod
    def var(cls) -> "LaurentPoly":
        return cls({1: Fraction(1)})

    @property
    def coeffs(self) -> dict[int, object]:
        return dict(self._c)

    def coeff(self, k: int):
        return self._c.get(k, Fraction(0))

    def is_zero(self) -> bool:
        return not self._c

    def span(self) -> tuple[int, int] | None:
        """``(min exponent, max exponent)``, or ``None`` for the zero polynomial."""
        if not self._c:
            return None
        return min(self._c), max(self._c)

    def __call__(self, x):
        total = 0
        for k, v in self._c.items():
            total = total + v * x**k
        return total

    def scale_var(self, c) -> "LaurentPoly":
        """The polynomial in ``c*x``."""
        return LaurentPoly({k: v * c**k for k, v in self._c.items()})

    # ring operations -------------------------------------------------------

    @staticmethod
    def _lift(other):
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly({0: other})

    def __add__(self, other):
        other = self._lift(other)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return LaurentPoly(c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return LaurentPoly({k: v * other for k, v in self._c.items()})
        c: dict[int, object] = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                c[k1 + k2] = c.get(k1 + k2, 0) + v1 * v2
        return LaurentPoly(c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LaurentPoly):
            return self.divexact(other)
        return LaurentPoly({k: v / other for k, v in self._c.items()})

    def __rtruediv__(self, other):
        return self._lift(other).divexact(self)

    def __pow__(self, n: int):
        if n < 0:
            return 1 / (self ** (-n))
        result = LaurentPoly({0: Fraction(1)})
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self._c == other._c
        if other == 0:
            return not self._c
        return self._c == {0: other}

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def divexact(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact quotient; raises :class:`ArithmeticError` if there is a remainder."""
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if self.is_zero():
            return LaurentPoly()
        lo_o, hi_o = other.span()
        lead = other._c[hi_o]
        rem = dict(self._c)
        quot: dict[int, object] = {}
        while rem:
            hi = max(rem)
            lo = min(rem)
            if hi - lo < hi_o - lo_o:
                raise ArithmeticError("Laurent division leaves a remainder")
            k = hi - hi_o
            c = rem[hi] / lead
            quot[k] = c
            for e, v in other._c.items():
                val = rem.get(e + k, 0) - c * v
                if val == 0:
                    rem.pop(e + k, None)
                else:
                    rem[e + k] = val
        return LaurentPoly(quot)

    def __repr__(self):
        if not self._c:
            return "LaurentPoly(0)"
        terms = " + ".join(f"({v})*x^{k}" for k, v in sorted(self._c.items()))
        return f"LaurentPoly({terms})"

    # interpolation ---------------------------------------------------------

    @classmethod
    def fit(
        cls,
        f: Callable[[object], object],
        points: Sequence,
        lo: int,
        hi: int,
        check: Sequence = (),
    ) -> "LaurentPoly":
        """Exact Laurent polynomial with exponents in ``[lo, hi]`` through ``f``.

        ``points`` supplies the nodes (at least ``hi - lo + 1`` of them, all
        distinct and nonzero); every point in ``check`` is then compared
        against ``f`` and a mismatch raises :class:`ArithmeticError`.
        """
        d = hi - lo
        xs = list(points)[: d + 1]
        if len(xs) < d + 1:
            raise ValueError("not enough interpolation nodes")
        ys = [f(x) * x ** (-lo) for x in xs]
        poly = _newton_to_monomial(xs, ys)
        result = cls({k + lo: v for k, v in enumerate(poly)})
        for x in check:
            if result(x) != f(x):
                raise ArithmeticError("interpolated Laurent polynomial fails its check point")
        return result


def _newton_to_monomial(xs: Sequence, ys: Sequence) -> list:
    """Coefficients (low to high) of the interpolating polynomial."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [coef[n - 1]]
    for i in range(n - 2, -1, -1):
        # poly <- poly * (x - xs[i]) + coef[i]
        new = [0] * (len(poly) + 1)
        for k, v in enumerate(poly):
            new[k + 1] = new[k + 1] + v
            new[k] = new[k] - v * xs[i]
        new[0] = new[0] + coef[i]
        poly = new
    return poly


def fit_laurent_auto(
    f: Callable[[object], object],
    nodes: Iterable,
    max_half_span: int,
    n_check: int = 3,
) -> LaurentPoly:
    """Fit ``f`` by a Laurent polynomial of unknown but bounded span.

    Tries symmetric spans ``[-d, d]`` for ``d = 0, 1, ...`` and returns the
    first fit that reproduces ``f`` on ``n_check`` further nodes.
    """
    nodes = list(nodes)
    cache: dict = {}

    def g(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    for d in range(max_half_span + 1):
        need = 2 * d + 1 + n_check
        if len(nodes) < need:
            break
        try:
            return LaurentPoly.fit(g, nodes[: 2 * d + 1], -d, d, check=nodes[2 * d + 1 : need])
        except ArithmeticError:
            continue
    raise ArithmeticError(f"no Laurent polynomial of half-span <= {max_half_span} fits")


# ---------------------------------------------------------------------------
# exact linear algebra


def _eliminate(rows: list[list[Fraction]], ncols: int):
    """Reduced row echelon form in place; returns pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def rank_exact(matrix: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(map(Fraction, row)) for row in matrix]
    if not rows:
        return 0
    return len(_eliminate(rows, len(rows[0])))


def solve_exact(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    """Unique solution of ``matrix @ x = rhs`` (overdetermined systems allowed).

    Raises :class:`ArithmeticError` when the system is inconsistent or the
    solution is not unique.
    """
    n = len(matrix[0])
    rows = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    pivots = _eliminate(rows, n)
    if len(pivots) < n:
        raise ArithmeticError(f"solution not unique: rank {len(pivots)} < {n}")
    for row in rows[n:]:
        if row[n] != 0:
            raise ArithmeticError("inconsistent linear system")
    return [rows[i][n] for i in range(n)]

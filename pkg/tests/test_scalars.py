import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixvertex.scalars import (
    Context,
    DomainError,
    LaurentPoly,
    PoleError,
    bracket,
    brace,
    fit_laurent_auto,
    phi_regularized,
    phi_terminating,
    qpochhammer,
    rank_exact,
    rational_sqrt,
    solve_exact,
)

small_rationals = st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=12)
q_values = st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(3, 2)])


def test_pochhammer_empty_product():
    assert qpochhammer(Fraction(7, 3), Fraction(1, 4), 0) == 1


def test_pochhammer_small_example():
    q = Fraction(1, 4)
    assert qpochhammer(q, q, 2) == Fraction(45, 64)


def test_pochhammer_negative_index_is_reciprocal():
    x, q = Fraction(5, 7), Fraction(1, 3)
    assert qpochhammer(x, q, -2) == 1 / qpochhammer(x * q**-2, q, 2)
    assert qpochhammer(x, q, -2) * qpochhammer(x * q**-2, q, 2) == 1


def test_pochhammer_pole():
    q = Fraction(1, 3)
    with pytest.raises(PoleError):
        qpochhammer(q, q, -1)


@given(x=small_rationals, q=q_values, m=st.integers(-3, 3), n=st.integers(-3, 3))
@settings(max_examples=150, deadline=None)
def test_pochhammer_splicing(x, q, m, n):
    try:
        lhs = qpochhammer(x, q, m + n)
        rhs = qpochhammer(x, q, m) * qpochhammer(x * q**m, q, n)
    except PoleError:
        return
    assert lhs == rhs


def test_phi_terminating_trivial_and_two_terms():
    q, z = Fraction(1, 3), Fraction(2, 5)
    a, b = Fraction(3, 7), Fraction(5, 11)
    assert phi_terminating(0, [a], [b], q, z) == 1
    expected = 1 + z * (1 - 1 / q) * (1 - a) / ((1 - q) * (1 - b))
    assert phi_terminating(1, [a], [b], q, z) == expected


def test_phi_terminating_against_loop():
    q, z = Fraction(2, 5), Fraction(3, 4)
    a = [Fraction(1, 3), Fraction(7, 2)]
    b = [Fraction(5, 9), Fraction(4, 3)]
    total = Fraction(0)
    for k in range(3):
        term = z**k
        for j in range(k):
            term *= (1 - q ** (j - 2)) / (1 - q ** (j + 1))
            for a_s, b_s in zip(a, b):
                term *= (1 - a_s * q**j) / (1 - b_s * q**j)
        total += term
    assert phi_terminating(2, a, b, q, z) == total


def test_phi_terminating_degenerate_denominator():
    q = Fraction(1, 2)
    with pytest.raises(PoleError):
        phi_terminating(2, [Fraction(3)], [1 / q], q, Fraction(1, 3))


def test_phi_regularized_trivial():
    assert phi_regularized(0, [Fraction(2)], [Fraction(3)], Fraction(1, 2), Fraction(5)) == 1


def test_phi_regularized_degenerate_b():
    q, a, z = Fraction(1, 2), Fraction(3, 5), Fraction(7, 4)
    b = 1 / q
    # two-term direct sum: (b;q)_2 + z (q^-2;q)_1/(q;q)_1 (a;q)_1 (bq;q)_1 + z^2 (...)
    expected = (
        qpochhammer(b, q, 2)
        + z * (1 - q**-2) / (1 - q) * (1 - a) * (1 - b * q)
        + z**2 * qpochhammer(q**-2, q, 2) / qpochhammer(q, q, 2) * qpochhammer(a, q, 2)
    )
    assert phi_regularized(2, [a], [b], q, z) == expected


@given(
    n=st.integers(0, 4),
    a=st.lists(small_rationals, min_size=2, max_size=2),
    b=st.lists(st.fractions(min_value=Fraction(1, 9), max_value=Fraction(5), max_denominator=9), min_size=2, max_size=2),
    q=q_values,
    z=small_rationals,
)
@settings(max_examples=120, deadline=None)
def test_regularization_consistency(n, a, b, q, z):
    try:
        plain = phi_terminating(n, a, b, q, z)
    except PoleError:
        return
    factor = qpochhammer(b[0], q, n) * qpochhammer(b[1], q, n)
    assert phi_regularized(n, a, b, q, z) == plain * factor


# --- classical transformations, used as oracles for the series kernel ------


def test_heine_vanishing():
    q = Fraction(1, 3)
    q2 = q * q
    for n2 in range(1, 5):
        for n2p in range(n2):
            for n1 in range(4):
                x = q ** (2 + 2 * n1)
                for k in range(1, n2 - n2p + 1):
                    assert phi_regularized(n2, [x], [x * q ** (-2 * n2p)], q2, q ** (2 * k)) == 0


def test_heine_transformation_plain_series():
    q = Fraction(1, 3)
    q2 = q * q
    for n2 in range(1, 5):
        for n2p in range(n2):
            d = n2 - n2p
            for x in (Fraction(2, 7), Fraction(5, 3), Fraction(3, 11)):
                for z in (Fraction(2, 7), Fraction(11, 5)):
                    lhs = phi_terminating(n2, [x], [x * q ** (-2 * n2p)], q2, z)
                    pre = qpochhammer(q2 / z, q2, d) * (-z / q2) ** d / q ** (d * (d - 1))
                    rhs = pre * phi_terminating(n2p, [x * q ** (2 * d)], [x * q ** (-2 * n2p)], q2, z * q ** (-2 * d))
                    assert lhs == rhs


def _balanced(rng, q, m):
    pick = lambda: Fraction(rng.randint(1, 9), rng.randint(10, 19))
    a, b, c, e = pick(), pick(), pick(), 3 * pick()
    f = Fraction(rng.randint(2, 9), 7)
    return a, b, c, a * b * c * q ** (1 - m) / (e * f), e, f


def test_sears_plain():
    rng = random.Random(1)
    q = Fraction(1, 3)
    P = lambda x, n: qpochhammer(x, q, n)
    for _ in range(20):
        m = rng.randint(0, 3)
        a, b, c, d, e, f = _balanced(rng, q, m)
        lhs = phi_terminating(m, [a, b, c], [d, e, f], q, q)
        pre = P(a, m) * P(e * f / (a * b), m) * P(e * f / (a * c), m) / (P(e, m) * P(f, m) * P(e * f / (a * b * c), m))
        rhs = pre * phi_terminating(m, [q ** (1 - m) / d, e / a, f / a], [q ** (1 - m) / a, e * f / (a * b), e * f / (a * c)], q, q)
        assert lhs == rhs


def test_sears_regularized():
    rng = random.Random(2)
    q = Fraction(1, 3)
    for _ in range(20):
        m = rng.randint(0, 3)
        a, b, c, d, e, f = _balanced(rng, q, m)
        lhs = phi_regularized(m, [a, b, c], [d, e, f], q, q)
        rhs = q ** (m * (m - 1)) * (a * d) ** m * phi_regularized(
            m, [q ** (1 - m) / d, e / a, f / a], [q ** (1 - m) / a, e * f / (a * b), e * f / (a * c)], q, q
        )
        assert lhs == rhs


def test_sears_iterated():
    rng = random.Random(3)
    q = Fraction(1, 3)
    pick = lambda: Fraction(rng.randint(1, 9), rng.randint(10, 19))
    for _ in range(30):
        n = rng.randint(1, 3)
        m = n + rng.randint(0, 2)
        a, b, c, e = pick(), pick(), pick(), 3 * pick()
        f = a * b * c / (e * q**n)
        lhs = phi_regularized(m, [a, b, c], [q ** (1 - m + n), e, f], q, q)
        pre = (
            (-1) ** (m + n)
            * (a * b) ** n
            * qpochhammer(a, q, m - n)
            * qpochhammer(b, q, m - n)
            * qpochhammer(c, q, m - n)
            / q ** (n + Fraction((m - n) * (m - n - 1), 2))
        )
        rhs = pre * phi_regularized(n, [q / a, q / b, c * q ** (m - n)], [q ** (1 - n + m), q * e / (a * b), q * f / (a * b)], q, q)
        assert lhs == rhs


def test_three_phi_two_reflection():
    rng = random.Random(4)
    q = Fraction(1, 3)
    q2 = q * q
    lam = Fraction(3, 5)
    P = lambda x, n: qpochhammer(x, q2, n)
    for _ in range(60):
        J = rng.randint(0, 4)
        j, jp = rng.randint(0, J), rng.randint(0, J)
        n = max(0, jp - j) + rng.randint(0, 3)
        lhs = (
            (-1) ** (j + jp)
            * P(q2, J - j)
            * P(lam**2 * q ** (1 - J - 2 * (n - jp)), J - j - jp)
            / (P(q ** (2 + 2 * n), j - jp) * P(q2, j))
            * phi_regularized(j, [q ** (-2 * jp), lam**2 * q ** (1 - J)], [q ** (-2 * J), q ** (2 * (1 + n - jp))], q2, q2)
        )
        rhs = q ** (j * (j - 1) - jp * (jp - 1) + 2 * J * (J - 2 * j - n) + 2 * n * (j + jp)) * phi_regularized(
            J - j, [q ** (-2 * (J - jp)), lam**2 * q ** (1 - J)], [q ** (-2 * J), q ** (2 * (1 + n - J + j))], q2, q2
        )
        assert lhs == rhs


# --- small utilities -----------------------------------------------------


def test_brackets():
    x = Fraction(2, 3)
    assert bracket(x) == Fraction(2, 3) - Fraction(3, 2)
    assert brace(x) == Fraction(2, 3) + Fraction(3, 2)


def test_context_validation():
    with pytest.raises(DomainError):
        Context(Fraction(1))
    with pytest.raises(DomainError):
        Context(Fraction(1, 2), lam=0)
    with pytest.raises(DomainError):
        Context.from_q(Fraction(1, 2))
    assert Context.from_q(Fraction(4, 9)).p == Fraction(2, 3)
    assert Context(Fraction(1, 2)).q == Fraction(1, 4)


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 16)) == Fraction(3, 4)
    assert rational_sqrt(Fraction(1, 2)) is None


def test_laurent_fit_recovers_polynomial():
    target = LaurentPoly({-2: Fraction(3), 0: Fraction(-1, 2), 1: Fraction(5, 7)})
    nodes = [Fraction(k + 2, k + 5) for k in range(12)]
    fitted = fit_laurent_auto(target, nodes, 4)
    assert fitted == target
    assert fitted.span() == (-2, 1)


def test_laurent_arithmetic():
    x = LaurentPoly.var()
    p = (x + 1 / x) ** 2
    assert p.coeffs == {-2: 1, 0: 2, 2: 1}
    assert p.divexact(x + 1 / x) == x + 1 / x
    assert p.scale_var(2)(Fraction(1)) == p(Fraction(2))


def test_exact_linear_algebra():
    A = [[Fraction(1), Fraction(2)], [Fraction(3), Fraction(4)], [Fraction(5), Fraction(6)]]
    assert rank_exact(A) == 2
    assert solve_exact(A, [Fraction(5), Fraction(11), Fraction(17)]) == [1, 2]
    with pytest.raises(ArithmeticError):
        solve_exact([[1, 1], [2, 2]], [1, 2])

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sixvertex.qops import (
    a_minus_element,
    a_minus_index_free_factor,
    a_minus_reduced,
    a_operator_laurent,
    a_plus_element,
    a_plus_via_flip,
    band_trace,
    band_trace_truncated,
    fock_band,
    geometric_tail,
    index_identity_holds,
    large_j_spread,
    q_operator,
    sector_basis,
    trace_denominator,
)
from sixvertex.scalars import Context, ConvergenceError, DomainError, brace, bracket, fit_laurent_auto
from sixvertex.weights import Weight

d = lambda a, b: 1 if a == b else 0


def spin_half_minus(n, i, np_, ip, ctx):
    q, lam, phi = ctx.q, ctx.lam, ctx.phi
    f = phi ** (2 * n)
    return f * {
        (0, 0): d(np_, n) * bracket(q**n / lam),
        (0, 1): d(n, np_ + 1) / lam,
        (1, 0): -d(np_, n + 1) / q * (1 - q ** (2 * np_)),
        (1, 1): d(np_, n) * q**n,
    }[(i, ip)]


def spin_half_plus(n, i, np_, ip, ctx):
    q, lam, phi = ctx.q, ctx.lam, ctx.phi
    f = phi ** (-2 * n)
    return f * {
        (0, 0): d(np_, n) * q**n,
        (0, 1): -d(np_, n + 1) / q * (1 - q ** (2 * np_)),
        (1, 0): d(n, np_ + 1) / lam,
        (1, 1): d(np_, n) * bracket(q**n / lam),
    }[(i, ip)]


def spin_one_plus(n, i, np_, ip, ctx):
    p, q, lam, phi = ctx.p, ctx.q, ctx.lam, ctx.phi
    return phi ** (-2 * n) * {
        (0, 0): d(np_, n) * q ** (2 * n),
        (0, 1): -d(np_, n + 1) * q ** (np_ - 1) * (1 - q ** (2 * np_)),
        (0, 2): d(np_, n + 2) / q**2 * (1 - q ** (2 * (n + 2))) * (1 - q ** (2 * (n + 1))),
        (1, 0): d(n, np_ + 1) * brace(q) / lam * q**np_,
        (1, 1): d(n, np_) * (brace(q) * q ** (2 * n) / lam - 1 / (q * lam) - lam),
        # p^-3 here; p^-5 breaks the factorization and TQ identities
        (1, 2): d(np_, n + 1) * p**-3 * brace(q) * (1 - q ** (2 * np_)) * bracket(lam * q ** (-np_) * p),
        (2, 0): d(n, np_ + 2) / lam**2,
        (2, 1): -d(n, np_ + 1) * p / lam * bracket(lam * q ** (-np_) / p),
        (2, 2): d(n, np_) * bracket(lam * q**-n / p) * bracket(lam * q**-n * p),
    }[(i, ip)]


def test_spin_half_operators(ctx):
    for n, np_, i, ip in itertools.product(range(5), range(5), range(2), range(2)):
        assert a_minus_element(n, i, np_, ip, 1, ctx) == spin_half_minus(n, i, np_, ip, ctx)
        assert a_plus_element(n, i, np_, ip, 1, ctx) == spin_half_plus(n, i, np_, ip, ctx)


def test_spin_one_plus_operator(ctx):
    for n, np_, i, ip in itertools.product(range(6), range(6), range(3), range(3)):
        assert a_plus_element(n, i, np_, ip, 2, ctx) == spin_one_plus(n, i, np_, ip, ctx)


@pytest.mark.parametrize("I", [1, 2, 3])
def test_plus_equals_flipped_minus(ctx, I):
    for n, np_, i, ip in itertools.product(range(5), range(5), range(I + 1), range(I + 1)):
        assert a_plus_element(n, i, np_, ip, I, ctx) == a_plus_via_flip(n, i, np_, ip, I, ctx)


@pytest.mark.parametrize("I", [1, 2, 3])
def test_minus_reduced_times_prefactor(ctx, I):
    for n, i, ip in itertools.product(range(5), range(I + 1), range(I + 1)):
        np_ = n + i - ip
        if np_ < 0:
            continue
        full = a_minus_element(n, i, np_, ip, I, ctx)
        assert full == a_minus_reduced(n, i, np_, ip, Weight.finite(I), ctx) * a_minus_index_free_factor(I, ctx)


def test_conservation_violating_entries_vanish(ctx):
    assert a_minus_element(0, 0, 1, 0, 2, ctx) == 0
    assert a_plus_element(2, 1, 2, 0, 2, ctx) == 0


def test_index_out_of_range(ctx):
    with pytest.raises(DomainError):
        a_minus_element(0, 3, 0, 3, 2, ctx)


@pytest.mark.parametrize("I", [1, 2])
def test_plus_is_transposed_minus_up_to_diagonal(ctx, I):
    # flip i -> I-i, transpose in both spaces, then row/column rescaling
    ratio = {}
    for n, np_, i, ip in itertools.product(range(5), range(5), range(I + 1), range(I + 1)):
        a = a_plus_element(n, i, np_, ip, I, ctx)
        b = a_minus_element(np_, I - ip, n, I - i, I, ctx, phi=1 / ctx.phi)
        assert (a == 0) == (b == 0)
        if a:
            ratio[(n, i), (np_, ip)] = a / b
    for (x, y), v in ratio.items():
        for (x2, y2), v2 in ratio.items():
            if (x, y2) in ratio and (x2, y) in ratio:
                assert v * v2 == ratio[x, y2] * ratio[x2, y]


@pytest.mark.parametrize("I", [1, 2])
def test_plus_lambda_degrees(ctx, I):
    nodes = [Fraction(3 * k + 7, 2 * k + 5) for k in range(16)]
    for n, i, ip in itertools.product(range(3), range(I + 1), range(I + 1)):
        np_ = n + ip - i
        if np_ < 0:
            continue
        L = fit_laurent_auto(lambda x: a_plus_element(n, i, np_, ip, I, ctx, lam=x), nodes, 4)
        if L.is_zero():
            continue
        expected = 2 * ip - i if i > ip else i
        assert L.span()[1] == expected, (n, i, ip)


def test_fock_degree_profile_bounded(ctx):
    for I in (1, 2, 3):
        for sign in "+-":
            prof = fock_band(sign, I, ctx).degree_profile()
            assert all(hi - lo <= 2 * I + 2 for lo, hi in filter(None, prof.values()))


def test_sector_basis_dimensions():
    assert len(sector_basis(Weight.finite(1), 3, 1)) == 3
    assert len(sector_basis(Weight.finite(2), 2, 2)) == 3
    assert sector_basis(Weight.finite(1), 2, 3) == []


def test_geometric_tail():
    assert geometric_tail(Fraction(1, 2), 0) == 2
    assert geometric_tail(Fraction(1, 3), 2) == Fraction(1, 6)
    with pytest.raises(ConvergenceError):
        geometric_tail(Fraction(3, 2), 0, strict=True)
    assert geometric_tail(Fraction(3, 2), 0) == -2


def test_trace_denominator_example():
    ctx = Context(Fraction(1, 2), lam=Fraction(3, 5), phi=Fraction(1, 3))
    assert trace_denominator(Weight.finite(1), 1, 0, ctx) == Fraction(9, 5)


def test_trace_against_truncated_sum(ctx):
    op = fock_band("-", 1, ctx)
    exact = band_trace(op, 2, 1)
    partial = band_trace_truncated(op, 2, 1, 60)
    # the slowest ratio is phi^4; the tail is that ratio to the 60th power times a modest constant
    assert 0 < (exact - partial).max_abs() < 1000 * ctx.phi ** (4 * 60)


def test_strict_mode_rejects_divergent_trace():
    ctx = Context(Fraction(1, 2), lam=Fraction(3, 5), phi=Fraction(3, 2))
    with pytest.raises(ConvergenceError):
        q_operator("-", 1, 1, 0, ctx, strict=True)
    q_operator("-", 1, 1, 0, ctx)


def test_generic_weight_minus_trace_unsupported(ctx):
    with pytest.raises(DomainError):
        fock_band("-", Weight.generic(Fraction(2, 7)), ctx)


@pytest.mark.parametrize("I,M", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_leading_terms(ctx, I, M):
    q, phi = ctx.q, ctx.phi
    for l in range(I * M + 1):
        for sign in "+-":
            P = a_operator_laurent(sign, I, M, l, ctx)
            top = l if sign == "+" else I * M - l
            lead = -((-1) ** l) * phi ** (2 * M) * q ** (2 * l - I * M) if sign == "+" else (-1) ** top
            for r, row in enumerate(P):
                for c, entry in enumerate(row):
                    assert entry.coeff(top) == (lead if r == c else 0)
                    span = entry.span()
                    if span:
                        assert span[1] <= top and span[0] >= -top


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=5), st.integers(0, 4))
def test_index_identity_on_chains(pairs, n0):
    i = [a for a, _ in pairs]
    ip = [b for _, b in pairs]
    if sum(i) != sum(ip):
        return
    n = [n0]
    for a, b in zip(i, ip):
        n.append(n[-1] + a - b)
    if min(n) < 0:
        return
    np_ = n[1:]
    assert index_identity_holds(i, ip, n[:-1], np_)


def test_large_j_limit():
    ctx = Context(Fraction(1, 2), lam=Fraction(3, 5), phi=Fraction(5, 7))
    for I in (1, 2):
        spreads = [large_j_spread(I, J, ctx)[1] for J in (20, 24, 28)]
        assert spreads[0] > spreads[1] > spreads[2]
        for J, s in zip((20, 24, 28), spreads):
            assert s < 100 * ctx.q**J

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixvertex.scalars import qpochhammer
from sixvertex.tetra import (
    DressingFields,
    _brute_sides,
    conserved,
    qn_closed,
    qn_recurrence,
    r3_dressed,
    r3_element,
    r3_formula,
    r3_via_polynomial,
    random_nontrivial_tuples,
    tetrahedron_sides,
    verify_tetrahedron,
)

Q = Fraction(1, 2)
rats = st.fractions(min_value=Fraction(-3), max_value=Fraction(3), max_denominator=9)


def test_q_polynomials_low_orders():
    x, y, z, q = Fraction(2, 3), Fraction(5, 7), Fraction(3, 11), Fraction(1, 3)
    assert qn_recurrence(0, x, y, z, q) == 1
    assert qn_recurrence(1, x, y, z, q) == 1 - (x + z) + x * y * z
    q2 = q * q
    Q2 = (
        (1 - x) * (1 - x * q2) * (1 - z) * (1 - z * q2)
        - x**2 * z**2 * q**4 * (1 - y**2)
        - x * z * q2 * (1 + q2) * (1 - y) * (1 - x - z)
    )
    assert qn_recurrence(2, x, y, z, q) == Q2


@given(n=st.integers(0, 3), x=rats, y=rats, z=rats)
@settings(max_examples=80, deadline=None)
def test_closed_form_matches_recurrence(n, x, y, z):
    if x == 0 or y == 0:
        return
    assert qn_closed(n, x, y, z, Fraction(1, 3)) == qn_recurrence(n, x, y, z, Fraction(1, 3))


def test_closed_form_at_unit_arguments():
    assert qn_closed(3, 1, 1, 1, Q) == qn_recurrence(3, 1, 1, 1, Q)
    assert qn_closed(0, 1, 1, 1, Q) == 1


def test_vacuum_element_and_conservation():
    assert r3_element((0, 0, 0), (0, 0, 0), Q) == 1
    assert r3_element((1, 0, 0), (0, 0, 0), Q) == 0
    assert r3_element((1, 1, 0), (1, 0, 1), Q) == 0


def test_positivity_and_conservation_grid():
    for n in itertools.product(range(4), repeat=3):
        for m in itertools.product(range(4), repeat=3):
            v = r3_element(n, m, Q)
            if conserved(n, m):
                assert v > 0
            else:
                assert v == 0


def test_polynomial_route_agrees():
    for n in itertools.product(range(4), repeat=3):
        for m in itertools.product(range(4), repeat=3):
            assert r3_element(n, m, Q) == r3_via_polynomial(n, m, Q)


def test_negative_third_index_vanishes():
    # the verbatim sum vanishes for n2 > n2' and -(n2 - n2') <= n3 <= -1
    checked = 0
    for n1, n2, m2 in itertools.product(range(4), range(5), range(5)):
        d = n2 - m2
        if not 0 < d <= 3:
            continue
        m1 = n1 + n2 - m2
        for n3 in range(-d, 0):
            m3 = n2 + n3 - m2
            assert r3_formula((n1, n2, n3), (m1, m2, m3), Q) == 0
            checked += 1
    assert checked > 50


def test_reflection_symmetries():
    q2 = Q * Q
    for n in itertools.product(range(4), repeat=3):
        for m in itertools.product(range(4), repeat=3):
            a = r3_element(n, m, Q)
            assert a == r3_element(n[::-1], m[::-1], Q)
            n1, n2, n3 = n
            m1, m2, m3 = m
            swapped = r3_element((n2, n1, m3), (m2, m1, n3), Q)
            factor = Q ** (n2 - n1 - n3**2 + m3**2) * qpochhammer(q2, q2, n3) / qpochhammer(q2, q2, m3)
            assert swapped == factor * a


def test_unit_dressing_is_identity():
    fields = DressingFields()
    for n in itertools.product(range(3), repeat=3):
        for m in itertools.product(range(3), repeat=3):
            assert r3_dressed(n, m, (1, 2, 3), fields, Q) == r3_element(n, m, Q)


def test_tetrahedron_trivial_case():
    assert tetrahedron_sides((0,) * 6, (0,) * 6, Q) == (1, 1)


def test_pruned_contraction_matches_brute_force():
    for ext_in, ext_out in random_nontrivial_tuples(4, 1, seed=11, q=Q):
        assert tetrahedron_sides(ext_in, ext_out, Q) == _brute_sides(ext_in, ext_out, Q)


def test_tetrahedron_full_grid():
    rep = verify_tetrahedron(Q, max_index=1)
    assert rep.cases == 4096
    assert rep.nonzero_cases > 100
    assert rep.exact_zero


def test_tetrahedron_random_entries_up_to_two():
    tuples = random_nontrivial_tuples(25, 2, seed=5, q=Q)
    rep = verify_tetrahedron(Q, 2, tuples=tuples)
    assert rep.nonzero_cases == 25 and rep.exact_zero


def test_tetrahedron_dressed():
    fields = DressingFields.random(random.Random(3))
    rep = verify_tetrahedron(Q, 1, fields=fields)
    assert rep.exact_zero


@pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(3, 2)])
def test_tetrahedron_other_q(q):
    tuples = random_nontrivial_tuples(10, 2, seed=1, q=q)
    assert verify_tetrahedron(q, 2, tuples=tuples).exact_zero

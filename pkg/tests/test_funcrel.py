import json
from fractions import Fraction

import pytest

from sixvertex import funcrel as fr
from sixvertex.scalars import Context, DomainError, bracket
from sixvertex.weights import Weight


@pytest.mark.parametrize("J,I,M", [(1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 2, 1)])
def test_factorization(ctx, J, I, M):
    assert fr.verify_factorization(J, I, M, ctx).residual_kind == "ExactZero"


def test_factorization_generic_auxiliary_weight(ctx):
    assert fr.verify_factorization(Weight.generic(Fraction(2, 7)), 1, 1, ctx).residual_kind == "ExactZero"


def test_single_site_factorization_by_hand(ctx):
    # one site, sector 0: both A-blocks are numbers and T_hat is known in closed form
    p, q, lam, phi = ctx.p, ctx.q, ctx.lam, ctx.phi
    J = 1
    y = p**J
    e0 = lam * phi**-J * p * y / (1 - phi**2 / q) - phi**-J / (lam * p * y * (1 - phi**2 * q))
    a_plus = fr._A("+", 1, 1, 0, ctx, lam / p ** (J + 1)).matrix[0][0]
    a_minus = fr._A("-", 1, 1, 0, ctx, lam * p ** (J + 1)).matrix[0][0]
    assert phi ** (J + 1) * fr.wronskian_value(1, 1, 0, ctx) * e0 == a_plus * a_minus


@pytest.mark.parametrize("I,M", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_wronskian(ctx, I, M):
    assert fr.verify_wronskian_relation(I, M, ctx).residual_kind == "ExactZero"


def test_wronskian_closed_form(ctx):
    q, phi = ctx.q, ctx.phi
    assert fr.wronskian_value(1, 2, 1, ctx) == -(phi**2) * q**-1 * (1 - phi**4)


def test_wronskian_degenerate_field():
    ctx = Context(Fraction(1, 2), lam=Fraction(3, 5), phi=1)
    assert fr.wronskian_value(1, 2, 1, ctx) == 0
    rep = fr.verify_wronskian_relation(1, 2, ctx)
    assert rep.residual_kind == "DegenerateField" and rep.ok
    assert rep.sectors == {}


@pytest.mark.parametrize("sign", "+-")
@pytest.mark.parametrize("I,M", [(1, 1), (1, 2), (2, 2)])
def test_tq(ctx, I, M, sign):
    assert fr.verify_tq(I, M, ctx, sign).residual_kind == "ExactZero"


@pytest.mark.parametrize("sign", "+-")
def test_higher_tq(ctx, sign):
    assert fr.verify_higher_tq(2, 1, 1, ctx, sign).residual_kind == "ExactZero"
    assert fr.verify_higher_tq(2, 2, 2, ctx, sign).residual_kind == "ExactZero"


@pytest.mark.parametrize("direction", ["up", "down"])
@pytest.mark.parametrize("J,I,M", [(1, 1, 1), (2, 1, 1), (1, 2, 1), (2, 2, 2), (1, 2, 2), (2, 1, 2)])
def test_fusion(ctx, J, I, M, direction):
    rep = fr.verify_fusion(J, I, M, ctx, direction)
    assert rep.residual_kind == "ExactZero", rep.sectors


def test_fusion_branches_are_distinct(ctx):
    lam, q = ctx.lam, ctx.q
    assert fr.fusion_f(2, 1, lam, ctx)[1] == 1
    assert fr.fusion_f(1, 2, lam, ctx)[1] == bracket(lam * q)
    assert fr.fusion_g(2, 1, lam, ctx)[1] == 1
    assert fr.fusion_f(1, 1, lam, ctx)[0] != fr.fusion_f(1, 2, lam, ctx)[0]


def test_fusion_detects_wrong_branch(ctx, monkeypatch):
    # feeding the I<J factors into an I>J case must leave a residual
    real = fr.fusion_f
    monkeypatch.setattr(fr, "fusion_f", lambda I, J, lam, c: real(I, J + 5, lam, c))
    assert fr.verify_fusion(1, 2, 1, ctx, "up").residual_kind == "NonZero"


def test_fusion_rejects_nonpositive_j(ctx):
    with pytest.raises(DomainError):
        fr.verify_fusion(0, 1, 1, ctx)


def test_commutativity(ctx):
    assert fr.verify_commutativity(2, 2, ctx).residual_kind == "ExactZero"


def test_plus_and_minus_blocks_are_independent(ctx):
    assert not fr.a_blocks_proportional(1, 2, 1, ctx)
    assert fr.a_blocks_proportional(1, 2, 0, ctx)  # one-dimensional sector


def test_report_json(ctx):
    rep = fr.verify_tq(1, 1, ctx)
    out = rep.as_json()
    assert set(out) == {"name", "params", "residual_kind", "max_abs", "seconds"}
    json.dumps(out)
    assert out["max_abs"] == "0"


def test_small_suite(ctx):
    for suite in fr.SUITES:
        reports = fr.run_suite(suite, "small", ctx)
        assert reports and all(r.residual_kind == "ExactZero" for r in reports), suite


@pytest.mark.parametrize("sign", "+-")
def test_bethe_roots(sign):
    ctx = Context(Fraction(1, 2), lam=Fraction(3, 5), phi=Fraction(9, 10))
    for l in range(3):
        roots = fr.bethe_roots(1, 2, l, ctx, sign)
        assert roots.counts_ok
        assert roots.expected_count == (l if sign == "+" else 2 - l)
        assert all(float(r) < 1e-20 for rs in roots.residuals for r in rs)

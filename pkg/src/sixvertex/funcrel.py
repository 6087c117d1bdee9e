"""Functional relations between transfer matrices and Q-operators, checked as exact block identities."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .qops import SectorBlock, q_operator, sector_basis
from .scalars import Context, ConvergenceError, DomainError, as_scalar, bracket, rank_exact
from .transfer import TransferSpec, h_factor, transfer_block
from .weights import Weight

SUITES = ("factorization", "wronskian", "tq", "higher-tq", "fusion")


class SingularSampleError(ArithmeticError):
    """A cleared denominator is singular at the sampled lambda; pick another sample."""


class NumericFailure(ArithmeticError):
    """The floating-point stage of the Bethe-root extraction is ill-conditioned."""


@dataclass
class IdentityReport:
    name: str
    params: dict
    residual_kind: str = "ExactZero"
    max_abs: Fraction = Fraction(0)
    seconds: float = 0.0
    sectors: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.residual_kind in ("ExactZero", "DegenerateField")

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "residual_kind": self.residual_kind,
            "max_abs": str(self.max_abs),
            "seconds": round(self.seconds, 3),
        }


def _finish(rep: IdentityReport, residuals: dict, start: float) -> IdentityReport:
    rep.sectors = {l: str(v) for l, v in residuals.items()}
    rep.max_abs = max(residuals.values(), default=Fraction(0))
    if rep.residual_kind != "DegenerateField":
        rep.residual_kind = "ExactZero" if rep.max_abs == 0 else "NonZero"
    rep.seconds = time.perf_counter() - start
    return rep


def wronskian_value(I: int, M: int, l: int, ctx: Context, phi=None) -> Fraction:
    """Eigenvalue of the Wronskian in sector ``l``."""
    phi = ctx.phi if phi is None else as_scalar(phi)
    q = ctx.q
    return -((-1) ** (I * M)) * phi**M * q ** (l - I * M) * (1 - phi ** (2 * M) * q ** (2 * l - I * M))


@lru_cache(maxsize=4096)
def _A(sign: str, I: int, M: int, l: int, ctx: Context, lam: Fraction) -> SectorBlock:
    return q_operator(sign, Weight.finite(I), M, l, ctx, lam=lam)


@lru_cache(maxsize=4096)
def _T(J: int, I: int, M: int, l: int, ctx: Context, lam: Fraction) -> SectorBlock:
    if J == 0:
        return SectorBlock.identity(l, M, sector_basis(Weight.finite(I), M, l))
    return transfer_block(TransferSpec(Weight.finite(J), I, M, "finite"), l, ctx, lam=lam)


def _sectors(I: int, M: int, sectors):
    return range(I * M + 1) if sectors is None else sectors


def _params(ctx: Context, **kw) -> dict:
    out = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in kw.items()}
    out.update({"p": str(ctx.p), "q": str(ctx.q), "lambda": str(ctx.lam), "phi": str(ctx.phi)})
    return out


def verify_factorization(J, I: int, M: int, ctx: Context, sectors=None) -> IdentityReport:
    """``phi^{(J+1)M} Wr T_hat_J(lambda) = A_+(lambda q^{-(J+1)/2}) A_-(lambda q^{(J+1)/2})``.

    ``J`` is an integer (Verma) or a generic :class:`Weight`; for the latter
    ``phi^{JM}`` is dropped together with ``phi^{-JM}`` in ``T_hat``.
    """
    start = time.perf_counter()
    Jw = J if isinstance(J, Weight) else Weight.verma(int(J))
    lam, phi = ctx.lam, ctx.phi
    shift = Jw.p_pow(ctx, 1) * ctx.p  # q^{(J+1)/2}
    phi_pow = Jw.phi_pow(ctx, M) * phi**M
    rep = IdentityReport("factorization", _params(ctx, J=Jw.label(), I=I, M=M))
    res = {}
    for l in _sectors(I, M, sectors):
        That = transfer_block(TransferSpec(Jw, I, M, "hat"), l, ctx)
        lhs = That.scale(phi_pow * wronskian_value(I, M, l, ctx))
        rhs = _A("+", I, M, l, ctx, lam / shift) @ _A("-", I, M, l, ctx, lam * shift)
        res[l] = (lhs - rhs).max_abs()
    return _finish(rep, res, start)


def verify_wronskian_relation(I: int, M: int, ctx: Context, sectors=None) -> IdentityReport:
    """``phi^{-M} A_-(lq^{1/2}) A_+(lq^{-1/2}) - phi^M A_+(lq^{1/2}) A_-(lq^{-1/2}) = Wr h_I(l)^M``."""
    start = time.perf_counter()
    lam, phi, p = ctx.lam, ctx.phi, ctx.p
    rep = IdentityReport("wronskian", _params(ctx, I=I, M=M))
    res = {}
    for l in _sectors(I, M, sectors):
        wr = wronskian_value(I, M, l, ctx)
        if wr == 0:
            # the Fock traces defining A_pm diverge in this sector
            rep.residual_kind = "DegenerateField"
            continue
        try:
            lhs = (_A("-", I, M, l, ctx, lam * p) @ _A("+", I, M, l, ctx, lam / p)).scale(phi**-M) - (
                _A("+", I, M, l, ctx, lam * p) @ _A("-", I, M, l, ctx, lam / p)
            ).scale(phi**M)
        except ConvergenceError:
            rep.residual_kind = "DegenerateField"
            continue
        rhs = SectorBlock.identity(l, M, lhs.basis, wr * h_factor(I, lam, ctx) ** M)
        res[l] = (lhs - rhs).max_abs()
    return _finish(rep, res, start)


def verify_tq(I: int, M: int, ctx: Context, sign: str = "+", sectors=None) -> IdentityReport:
    """``T_1 A_pm(l) = phi^{pm M}[l q^{(1-I)/2}]^M A_pm(q l) + phi^{-+M}[l q^{(1+I)/2}]^M A_pm(l/q)``."""
    start = time.perf_counter()
    lam, phi, p, q = ctx.lam, ctx.phi, ctx.p, ctx.q
    s = 1 if sign == "+" else -1
    rep = IdentityReport(f"tq{sign}", _params(ctx, I=I, M=M, sign=sign))
    res = {}
    c1 = phi ** (s * M) * bracket(lam * p ** (1 - I)) ** M
    c2 = phi ** (-s * M) * bracket(lam * p ** (1 + I)) ** M
    for l in _sectors(I, M, sectors):
        lhs = _T(1, I, M, l, ctx, lam) @ _A(sign, I, M, l, ctx, lam)
        rhs = _A(sign, I, M, l, ctx, lam * q).scale(c1) + _A(sign, I, M, l, ctx, lam / q).scale(c2)
        res[l] = (lhs - rhs).max_abs()
    return _finish(rep, res, start)


def _product(blocks, l, M, basis) -> SectorBlock:
    out = SectorBlock.identity(l, M, basis)
    for b in blocks:
        out = out @ b
    return out


def verify_higher_tq(J: int, I: int, M: int, ctx: Context, sign: str = "+", sectors=None) -> IdentityReport:
    """Higher-spin TQ relation with all denominators cleared.

    With ``B_k = A_pm(lambda q^{k-(J+1)/2})``, ``k = 0..J+1``, the checked identity is
    ``h_{I-J}^M T_J prod_{k=1}^{J} B_k = sum_k phi^{pm M(J-2k)} h_I(lambda q^{k-J/2})^M prod_{m != k,k+1} B_m``.
    """
    if J < 1:
        raise DomainError("J must be a positive integer")
    start = time.perf_counter()
    lam, phi, p = ctx.lam, ctx.phi, ctx.p
    s = 1 if sign == "+" else -1
    rep = IdentityReport(f"higher-tq{sign}", _params(ctx, J=J, I=I, M=M, sign=sign))
    res = {}
    for l in _sectors(I, M, sectors):
        B = [_A(sign, I, M, l, ctx, lam * p ** (2 * k - J - 1)) for k in range(J + 2)]
        basis = B[0].basis
        interior = _product(B[1 : J + 1], l, M, basis)
        if basis and rank_exact(interior.matrix) < len(basis):
            raise SingularSampleError(f"interior A{sign} product singular at lambda={lam}, sector {l}")
        lhs = (_T(J, I, M, l, ctx, lam) @ interior).scale(h_factor(I - J, lam, ctx) ** M)
        rhs = SectorBlock.identity(l, M, basis, 0)
        for k in range(J + 1):
            coef = phi ** (s * M * (J - 2 * k)) * h_factor(I, lam * p ** (2 * k - J), ctx) ** M
            rest = [B[m] for m in range(J + 2) if m not in (k, k + 1)]
            rhs = rhs + _product(rest, l, M, basis).scale(coef)
        res[l] = (lhs - rhs).max_abs()
    return _finish(rep, res, start)


def fusion_f(I: int, J: int, lam, ctx: Context) -> tuple[Fraction, Fraction]:
    """``(f^-, f^+)`` evaluated at the shifted arguments used in the upward relation."""
    p = ctx.p
    a = lam * p ** (1 - I)
    b = lam * p ** (1 + I)
    f_minus = bracket(a) * bracket(a * ctx.q ** (I + 1)) if I >= J else bracket(a)
    f_plus = Fraction(1) if I > J else bracket(b)
    return f_minus, f_plus


def fusion_g(I: int, J: int, lam, ctx: Context) -> tuple[Fraction, Fraction]:
    """``(g^-, g^+)`` evaluated at the shifted arguments used in the downward relation."""
    p, q = ctx.p, ctx.q
    a = lam * p ** (I - 1)
    b = lam * p ** (-1 - I)
    g_minus = bracket(q * a) * bracket(a / q**I) if I >= J else bracket(q * a)
    g_plus = Fraction(1) if I > J else bracket(q * b)
    return g_minus, g_plus


def verify_fusion(J: int, I: int, M: int, ctx: Context, direction: str = "up", sectors=None) -> IdentityReport:
    """Fusion of ``T_1`` with ``T_J`` at shifted arguments, upward or downward form."""
    if J < 1:
        raise DomainError("J must be a positive integer")
    start = time.perf_counter()
    lam, p = ctx.lam, ctx.p
    rep = IdentityReport(f"fusion-{direction}", _params(ctx, J=J, I=I, M=M, branch=_branch(I, J)))
    res = {}
    for l in _sectors(I, M, sectors):
        if direction == "up":
            fm, fp = fusion_f(I, J, lam, ctx)
            lhs = _T(1, I, M, l, ctx, lam) @ _T(J, I, M, l, ctx, lam * p ** (J + 1))
            rhs = _T(J - 1, I, M, l, ctx, lam * p ** (J + 2)).scale(fm**M) + _T(J + 1, I, M, l, ctx, lam * p**J).scale(fp**M)
        elif direction == "down":
            gm, gp = fusion_g(I, J, lam, ctx)
            lhs = _T(1, I, M, l, ctx, lam) @ _T(J, I, M, l, ctx, lam / p ** (J + 1))
            rhs = _T(J - 1, I, M, l, ctx, lam / p ** (J + 2)).scale(gm**M) + _T(J + 1, I, M, l, ctx, lam / p**J).scale(gp**M)
        else:
            raise ValueError("direction must be 'up' or 'down'")
        res[l] = (lhs - rhs).max_abs()
    return _finish(rep, res, start)


def _branch(I: int, J: int) -> str:
    return "I<J" if I < J else ("I=J" if I == J else "I>J")


def verify_commutativity(I: int, M: int, ctx: Context, other_lam=Fraction(11, 4), sectors=None) -> IdentityReport:
    """All pairwise commutators among ``T_1``, ``T_2``, ``A_+`` and ``A_-`` at ``lambda`` and ``other_lam``."""
    start = time.perf_counter()
    lams = (ctx.lam, as_scalar(other_lam))
    rep = IdentityReport("commutativity", _params(ctx, I=I, M=M, other_lambda=lams[1]))
    res = {}
    for l in _sectors(I, M, sectors):
        blocks = []
        for x in lams:
            blocks += [_T(1, I, M, l, ctx, x), _T(2, I, M, l, ctx, x), _A("+", I, M, l, ctx, x), _A("-", I, M, l, ctx, x)]
        worst = Fraction(0)
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                worst = max(worst, blocks[a].commutator(blocks[b]).max_abs())
        res[l] = worst
    return _finish(rep, res, start)


def a_blocks_proportional(I: int, M: int, l: int, ctx: Context) -> bool:
    """Whether ``A_+`` and ``A_-`` are proportional in sector ``l`` at the context point."""
    a = _A("+", I, M, l, ctx, ctx.lam)
    b = _A("-", I, M, l, ctx, ctx.lam)
    flat_a = [v for row in a.matrix for v in row]
    flat_b = [v for row in b.matrix for v in row]
    return rank_exact([flat_a, flat_b]) < 2


def run_suite(suite: str, grid: str, ctx: Context) -> list[IdentityReport]:
    """The fixed parameter grids behind the command line and the acceptance suite."""
    small = grid == "small"
    reports: list[IdentityReport] = []
    Ms = (1, 2)
    Is = (1, 2)
    if suite in ("factorization", "all"):
        reports.append(verify_factorization(Weight.generic(Fraction(2, 7)), 1, 1, ctx))
        for I in Is:
            for M in Ms:
                reports.append(verify_factorization(1, I, M, ctx))
        if not small:
            reports.append(verify_factorization(2, 2, 2, ctx))
    if suite in ("wronskian", "all"):
        for I in Is:
            for M in Ms:
                reports.append(verify_wronskian_relation(I, M, ctx))
    if suite in ("tq", "all"):
        for I in Is:
            for M in Ms:
                for sign in "+-":
                    reports.append(verify_tq(I, M, ctx, sign))
    if suite in ("higher-tq", "all"):
        for J, I, M in [(2, 1, 1), (2, 2, 2)] + ([] if small else [(2, 1, 2), (3, 1, 1)]):
            for sign in "+-":
                reports.append(verify_higher_tq(J, I, M, ctx, sign))
    if suite in ("fusion", "all"):
        cases = [(1, 1, 1), (2, 1, 1), (1, 2, 1), (2, 2, 2), (1, 2, 2), (2, 1, 2)]
        if not small:
            cases += [(3, 2, 2), (1, 1, 2)]
        for J, I, M in cases:
            for d in ("up", "down"):
                reports.append(verify_fusion(J, I, M, ctx, d))
    return reports


# ---------------------------------------------------------------------------
# Bethe roots (numeric)


@dataclass
class BetheRootSet:
    sign: str
    l: int
    roots: list
    rho: list
    residuals: list
    expected_count: int

    @property
    def counts_ok(self) -> bool:
        return all(len(r) == self.expected_count for r in self.roots)


def bethe_roots(I: int, M: int, l: int, ctx: Context, sign: str = "+", dps: int = 40) -> BetheRootSet:
    """Roots of every ``A_pm`` eigenvalue in sector ``l`` and the Bethe-equation residuals.

    The block entries are first recovered exactly as Laurent polynomials in
    ``lambda``; the only floating-point steps are the joint diagonalization
    and the polynomial root finding, both done with ``mpmath`` at ``dps``
    digits (plus guard digits).
    """
    import mpmath

    from .qops import a_operator_laurent

    d = l if sign == "+" else I * M - l
    polys = a_operator_laurent(sign, Weight.finite(I), M, l, ctx)
    dim = len(polys)
    q, phi = ctx.q, ctx.phi
    s = 1 if sign == "+" else -1
    with mpmath.workdps(dps + 20):
        mq = mpmath.mpf(q.numerator) / q.denominator
        mphi = mpmath.mpf(phi.numerator) / phi.denominator
        to_mp = lambda x: mpmath.mpf(x.numerator) / x.denominator
        # diagonalize at a generic sample point; all blocks share eigenvectors
        sample = Fraction(7, 3)
        A0 = mpmath.matrix([[to_mp(polys[r][c](sample)) for c in range(dim)] for r in range(dim)])
        _, V = mpmath.eig(A0)
        cond = mpmath.mnorm(V, 1) * mpmath.mnorm(V**-1, 1) if dim else 1
        if cond > mpmath.mpf(10) ** (dps // 2):
            raise NumericFailure(f"eigenvector matrix condition number {mpmath.nstr(cond, 5)} in sector {l}")
        Vinv = V**-1
        exps = range(-d, d + 1)
        coeff = {}
        for e in exps:
            Ce = mpmath.matrix([[to_mp(polys[r][c].coeff(e)) for c in range(dim)] for r in range(dim)])
            coeff[e] = Vinv * Ce * V
        roots_all, rho_all, res_all = [], [], []
        for k in range(dim):
            # eigenvalue  sum_e c_e lambda^e  ->  polynomial in x = lambda^2 of degree d
            cs = {e: coeff[e][k, k] for e in exps}
            poly_x = [cs[e] for e in range(d, -d - 1, -2)]  # highest power first
            lead = poly_x[0]
            if d == 0:
                roots_all.append([])
                rho_all.append(_fmt(lead, dps))
                res_all.append([])
                continue
            xs = mpmath.polyroots(poly_x, maxsteps=200, extraprec=4 * dps)
            lams = [mpmath.sqrt(x) for x in xs]

            def A_eval(z):
                return sum(cs[e] * z**e for e in exps)

            def h_eval(z):
                out = mpmath.mpf(1)
                for j in range(I):
                    w = z * mq ** (mpmath.mpf(I) / 2 - j)
                    out *= w - 1 / w
                return out

            res = []
            for z in lams:
                lhs = mphi ** (2 * s * M) * A_eval(mq * z) / A_eval(z / mq)
                rhs = (h_eval(z * mpmath.sqrt(mq)) / h_eval(z / mpmath.sqrt(mq))) ** M
                res.append(abs(lhs + rhs))
            roots_all.append([_fmt(z, dps) for z in lams])
            # rho from prod [lambda/lambda_k] = prod (lambda^2 - lambda_k^2)/(lambda lambda_k)
            rho = lead * mpmath.fprod(lams)
            rho_all.append(_fmt(rho, dps))
            res_all.append(res)
    return BetheRootSet(sign, l, roots_all, rho_all, res_all, d)


def _fmt(z, dps: int) -> str:
    import mpmath

    z = mpmath.mpc(z)
    tiny = mpmath.mpf(10) ** (-dps - 5) * max(1, abs(z))
    if abs(z.imag) <= tiny:
        return mpmath.nstr(z.real, dps)
    if abs(z.real) <= tiny:
        return mpmath.nstr(z.imag, dps) + "j"
    return mpmath.nstr(z, dps)

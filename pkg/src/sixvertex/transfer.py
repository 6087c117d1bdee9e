"""Transfer matrices over Verma and finite auxiliary spaces, sector by sector."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qops import FockBandOperator, SectorBlock, band_trace, sector_basis
from .rmatrix import rij_single_sum
from .scalars import Context, DomainError, LaurentPoly, as_scalar, bracket
from .weights import Weight, as_weight

KINDS = ("hat", "finite")


@dataclass(frozen=True)
class TransferSpec:
    """Auxiliary weight ``J``, quantum weight ``I``, chain length ``M`` and trace kind."""

    J: Weight
    I: Weight
    M: int
    kind: str = "hat"

    def __post_init__(self):
        object.__setattr__(self, "J", _aux_weight(self.J, self.kind))
        object.__setattr__(self, "I", as_weight(self.I))
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}")
        if self.kind == "finite" and not self.J.is_finite:
            raise DomainError("finite traces need an integer J >= 0")
        if not self.I.is_finite:
            raise DomainError("quantum weight must be a nonnegative integer")
        if self.M < 1:
            raise DomainError("M must be positive")


def _aux_weight(J, kind: str) -> Weight:
    if isinstance(J, Weight):
        if kind == "hat" and J.is_finite:
            return Weight.verma(J.value)
        return J
    if kind == "hat":
        return Weight.verma(int(J))
    return Weight.finite(int(J))


def verma_band(J: Weight, I: Weight, ctx: Context, lam, phi) -> FockBandOperator:
    """``R_{J,I}(lambda; phi)`` as a band operator in the auxiliary Verma index."""
    return FockBandOperator(
        name=f"R[{J.label()},{I.label()}]",
        quantum=I,
        entry=lambda j, i, jp, ip: rij_single_sum(j, i, jp, ip, J, I, ctx, lam=lam, phi=phi),
        shift=lambda i, ip: i - ip,
        rho=phi**2,
        q=ctx.q,
        max_half_span=2 * I.value + 4,
    )


def _finite_trace(J: int, I: Weight, M: int, l: int, ctx: Context, lam, phi) -> SectorBlock:
    A = Weight.finite(J)
    basis = sector_basis(I, M, l)
    cache: dict = {}

    def R(j, i, jp, ip):
        key = (j, i, jp, ip)
        if key not in cache:
            cache[key] = rij_single_sum(j, i, jp, ip, A, I, ctx, lam=lam, phi=phi)
        return cache[key]

    n = len(basis)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for r, row in enumerate(basis):
        for c, col in enumerate(basis):
            total = Fraction(0)
            for a0 in range(J + 1):
                a = a0
                prod = Fraction(1)
                for i, ip in zip(row, col):
                    b = a + i - ip
                    if not 0 <= b <= J:
                        prod = Fraction(0)
                        break
                    prod *= R(a, i, b, ip)
                    if prod == 0:
                        break
                    a = b
                if a == a0:
                    total += prod
            mat[r][c] = total
    return SectorBlock(l, M, basis, mat)


def transfer_block(spec: TransferSpec, l: int, ctx: Context, lam=None, phi=None, strict: bool = False) -> SectorBlock:
    """Sector ``l`` of ``T_hat_{J,I}`` (Verma trace) or ``T_{J,I}`` (finite trace).

    For generic ``J`` the overall ``phi^{-JM}`` is dropped (see :class:`Weight`).
    """
    lam = ctx.lam if lam is None else as_scalar(lam)
    phi = ctx.phi if phi is None else as_scalar(phi)
    if spec.kind == "finite":
        block = _finite_trace(spec.J.value, spec.I, spec.M, l, ctx, lam, phi)
    else:
        block = band_trace(verma_band(spec.J, spec.I, ctx, lam, phi), spec.M, l, strict)
    block.meta.update({"kind": spec.kind, "J": spec.J.label(), "I": spec.I.label(), "lambda": str(lam), "phi": str(phi)})
    return block


def h_factor(I: int, lam, ctx: Context) -> Fraction:
    """``h_I(lambda) = prod_{k<I} [lambda q^{I/2-k}]``, and 1 for ``I <= 0``."""
    lam = as_scalar(lam)
    out = Fraction(1)
    for k in range(max(I, 0)):
        out *= bracket(lam * ctx.p ** (I - 2 * k))
    return out


@dataclass
class SplittingReport:
    J: int
    I: int
    M: int
    residuals: dict

    @property
    def exact_zero(self) -> bool:
        return all(v == 0 for v in self.residuals.values())


def verify_splitting(J: int, I: int, M: int, ctx: Context, sectors=None, lam=None, phi=None) -> SplittingReport:
    """``h_{I-J}^M T_{J,I} = T_hat_{J,I} - T_hat_{-J-2,I}`` in each sector."""
    lam = ctx.lam if lam is None else as_scalar(lam)
    phi = ctx.phi if phi is None else as_scalar(phi)
    sectors = range(I * M + 1) if sectors is None else sectors
    res = {}
    hM = h_factor(I - J, lam, ctx) ** M
    for l in sectors:
        fin = transfer_block(TransferSpec(Weight.finite(J), I, M, "finite"), l, ctx, lam, phi)
        hat = transfer_block(TransferSpec(Weight.verma(J), I, M, "hat"), l, ctx, lam, phi)
        low = transfer_block(TransferSpec(Weight.verma(-J - 2), I, M, "hat"), l, ctx, lam, phi)
        res[l] = (fin.scale(hM) - (hat - low)).max_abs()
    return SplittingReport(J, I, M, res)


def laurent_nodes(count: int) -> list[Fraction]:
    return [Fraction(5 * k + 11, 3 * k + 7) for k in range(count)]


def transfer_laurent(spec: TransferSpec, l: int, ctx: Context, phi=None) -> list[list[LaurentPoly]]:
    """Entries of a transfer block as Laurent polynomials in ``lambda`` (span at most ``[-IM, IM]``)."""
    d = spec.I.value * spec.M
    nodes = laurent_nodes(2 * d + 4)
    samples = [transfer_block(spec, l, ctx, lam=x, phi=phi) for x in nodes]
    dim = samples[0].dim
    out = []
    for r in range(dim):
        row = []
        for c in range(dim):
            vals = {x: s.matrix[r][c] for x, s in zip(nodes, samples)}
            row.append(LaurentPoly.fit(vals.__getitem__, nodes[: 2 * d + 1], -d, d, check=nodes[2 * d + 1 :]))
        out.append(row)
    return out


@dataclass
class AsymptoticsReport:
    low: Fraction | None
    high: Fraction | None
    expected_low: Fraction
    expected_high: Fraction

    @property
    def matches(self) -> bool:
        return self.low == self.expected_low and self.high == self.expected_high


def transfer_asymptotics(spec: TransferSpec, l: int, ctx: Context, phi=None) -> AsymptoticsReport:
    """Extreme lambda-coefficients of ``T_hat`` compared with the closed forms.

    ``low``/``high`` are the scalars multiplying the identity at
    ``lambda^{-IM}`` and ``lambda^{IM}`` (``None`` if not a multiple of it).
    """
    if spec.kind != "hat":
        raise DomainError("asymptotics are stated for the Verma trace")
    phi = ctx.phi if phi is None else as_scalar(phi)
    I, M = spec.I.value, spec.M
    d = I * M
    polys = transfer_laurent(spec, l, ctx, phi)

    def scalar_of(k):
        dim = len(polys)
        c = polys[0][0].coeff(k) if dim else Fraction(0)
        for r in range(dim):
            for s in range(dim):
                if polys[r][s].coeff(k) != (c if r == s else 0):
                    return None
        return c

    p, q = ctx.p, ctx.q
    J = spec.J
    qJ_half = J.p_pow(ctx, 1)
    phiJ = J.phi_pow(ctx.with_phi(phi), -M)
    exp_low = (-p) ** (-d) * phiJ * qJ_half ** (-I * M) * J.q_pow(ctx, l) / (1 - phi ** (2 * M) * q ** (d - 2 * l))
    exp_high = p**d * phiJ * qJ_half ** (I * M) / J.q_pow(ctx, l) / (1 - phi ** (2 * M) * q ** (2 * l - d))
    return AsymptoticsReport(scalar_of(-d), scalar_of(d), exp_low, exp_high)

"""Courant vector bundles over a chart.

A bundle fixes a global frame, a constant nondegenerate symmetric pairing
in that frame, and a polynomial anchor matrix (row i is the vector field
the i-th frame section maps to).  The compatibility condition rho rho* = 0
reads A^T g^-1 A = 0 as a polynomial matrix identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple

from . import linalg
from .errors import ChartMismatchError, DegreeError, RankMismatchError
from .exterior import KForm, VectorField
from .poly import Chart, Poly, format_poly


class Section:
    """Element of the section module in the fixed frame: a rank-tuple of Poly."""

    __slots__ = ("bundle", "coeffs")

    def __init__(self, bundle: "CourantBundle", coeffs: Iterable[Poly]):
        cs = tuple(coeffs)
        if len(cs) != bundle.rank:
            raise RankMismatchError(f"expected {bundle.rank} coefficients, got {len(cs)}")
        for c in cs:
            if c.chart != bundle.chart:
                raise ChartMismatchError("section coefficient on a different chart")
        self.bundle = bundle
        self.coeffs = cs

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.bundle, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.bundle, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "Section":
        return Section(self.bundle, [-a for a in self.coeffs])

    def scale(self, f) -> "Section":
        """Multiply by a Poly or a rational scalar."""
        return Section(self.bundle, [c * f for c in self.coeffs])

    def _check(self, other: "Section") -> None:
        if self.bundle is not other.bundle and self.bundle != other.bundle:
            raise RankMismatchError("sections belong to different bundles")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Section)
            and self.bundle == other.bundle
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return f"Section[{format_section(self)}]"


class CourantBundle:
    """Chart + rank + constant pseudo-metric + polynomial anchor matrix."""

    def __init__(
        self,
        chart: Chart,
        rank: int,
        metric: Sequence[Sequence],
        anchor: Sequence[Sequence[Poly]],
    ):
        if rank < 1:
            raise ValueError("rank must be positive")
        self.chart = chart
        self.rank = rank
        self.metric = linalg.to_matrix(metric)
        if len(self.metric) != rank or any(len(row) != rank for row in self.metric):
            raise ValueError("metric must be rank x rank")
        rows = [tuple(row) for row in anchor]
        if len(rows) != rank or any(len(row) != chart.dim for row in rows):
            raise ValueError("anchor must be rank x dim")
        for row in rows:
            for p in row:
                if p.chart != chart:
                    raise ChartMismatchError("anchor entry on a different chart")
        self.anchor = tuple(rows)
        self._metric_inv = None

    @property
    def metric_inv(self):
        if self._metric_inv is None:
            self._metric_inv = linalg.invert(self.metric)
        return self._metric_inv

    # --- constructors ---------------------------------------------------

    def zero_section(self) -> Section:
        return Section(self, [Poly.zero(self.chart)] * self.rank)

    def frame(self, i: int) -> Section:
        cs = [Poly.zero(self.chart)] * self.rank
        cs[i] = Poly.const(self.chart, 1)
        return Section(self, cs)

    def frames(self) -> List[Section]:
        return [self.frame(i) for i in range(self.rank)]

    def section(self, coeffs: Iterable[Poly]) -> Section:
        return Section(self, coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CourantBundle)
            and self.chart == other.chart
            and self.rank == other.rank
            and self.metric == other.metric
            and self.anchor == other.anchor
        )

    def __repr__(self) -> str:
        return f"CourantBundle(rank={self.rank}, dim={self.chart.dim})"


@dataclass
class BundleReport:
    """Validation outcome with one entry per failed condition."""

    ok: bool
    failures: List[str] = field(default_factory=list)


def standard_bundle(chart: Chart) -> CourantBundle:
    """The generalized tangent bundle of the chart.

    Rank 2n; frames 0..n-1 are the coordinate tangent directions, frames
    n..2n-1 the coordinate cotangent directions; the pairing is the
    tangent/cotangent duality and the anchor projects onto the first block.
    """
    n = chart.dim
    metric = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        metric[i][n + i] = Fraction(1)
        metric[n + i][i] = Fraction(1)
    zero = Poly.zero(chart)
    one = Poly.const(chart, 1)
    anchor = [
        [one if j == i else zero for j in range(n)] if i < n else [zero] * n
        for i in range(2 * n)
    ]
    return CourantBundle(chart, 2 * n, metric, anchor)


def validate_bundle(b: CourantBundle) -> BundleReport:
    """Check the type invariants: metric symmetric and invertible,
    and A^T g^-1 A = 0 with witness entries on failure."""
    failures: List[str] = []
    if not linalg.is_symmetric(b.metric):
        failures.append("metric-not-symmetric")
    try:
        g_inv = linalg.invert(b.metric)
    except linalg.SingularMetricError:
        failures.append("metric-singular")
        return BundleReport(False, failures)
    # rho rho* = 0 in the frame: (A^T g^-1 A)_{mk} = sum_{i,j} A_im ginv_ij A_jk
    n, r = b.chart.dim, b.rank
    for m in range(n):
        for k in range(n):
            total = Poly.zero(b.chart)
            for i in range(r):
                for j in range(r):
                    if g_inv[i][j] != 0:
                        total = total + (b.anchor[i][m] * b.anchor[j][k]) * g_inv[i][j]
            if not total.is_zero():
                failures.append(
                    f"anchor-not-isotropic: (A^T g^-1 A)[{m + 1}][{k + 1}] = "
                    f"{format_poly(total)}"
                )
    return BundleReport(not failures, failures)


def pairing(e1: Section, e2: Section) -> Poly:
    """The pseudo-metric e1^T g e2; symmetric and Poly-bilinear."""
    e1._check(e2)
    b = e1.bundle
    out = Poly.zero(b.chart)
    for i, ci in enumerate(e1.coeffs):
        if ci.is_zero():
            continue
        for j, cj in enumerate(e2.coeffs):
            gij = b.metric[i][j]
            if gij != 0 and not cj.is_zero():
                out = out + (ci * cj) * gij
    return out


def anchor_apply(e: Section) -> VectorField:
    """The anchored vector field sum_i e_i rho(frame_i)."""
    b = e.bundle
    coeffs = []
    for m in range(b.chart.dim):
        c = Poly.zero(b.chart)
        for i, ei in enumerate(e.coeffs):
            if not ei.is_zero() and not b.anchor[i][m].is_zero():
                c = c + ei * b.anchor[i][m]
        coeffs.append(c)
    return VectorField(b.chart, coeffs)


def rho_star(b: CourantBundle, xi: KForm) -> Section:
    """The section s with <s, e> = xi(rho(e)) for every e: g^-1 (A xi)."""
    if xi.degree != 1:
        raise DegreeError("rho_star needs a 1-form")
    if xi.chart != b.chart:
        raise ChartMismatchError("form on a different chart")
    a_xi = []
    for i in range(b.rank):
        c = Poly.zero(b.chart)
        for m in range(b.chart.dim):
            coeff = xi.coefficient((m,))
            if not coeff.is_zero() and not b.anchor[i][m].is_zero():
                c = c + b.anchor[i][m] * coeff
        a_xi.append(c)
    g_inv = b.metric_inv
    return Section(
        b,
        [
            sum(
                (a_xi[j] * g_inv[i][j] for j in range(b.rank) if g_inv[i][j] != 0),
                Poly.zero(b.chart),
            )
            for i in range(b.rank)
        ],
    )


def dee(b: CourantBundle, f: Poly) -> Section:
    """The derivative section characterized by <D f, e> = rho(e) f."""
    df = KForm(b.chart, 1, {(m,): f.diff(m) for m in range(b.chart.dim)})
    return rho_star(b, df)


@dataclass
class CoisotropyPointReport:
    point: Tuple[Fraction, ...]
    anchor_rank: int
    ok: bool
    witness: str = ""


@dataclass
class CoisotropyReport:
    ok: bool
    points: List[CoisotropyPointReport]


def kernel_coisotropy_check(
    b: CourantBundle, points: Sequence[Sequence]
) -> CoisotropyReport:
    """At each rational point, check that (Ker rho)-perp lies inside Ker rho.

    The kernel is computed over the rationals from the evaluated anchor; the
    perp is taken with the metric.  A failing point is reported, not raised.
    """
    if not points:
        raise ValueError("need at least one sample point")
    reports: List[CoisotropyPointReport] = []
    for raw in points:
        pt = tuple(Fraction(x) for x in raw)
        # rho(e) = A^T e, so Ker rho at the point is the null space of A(p)^T
        a_t = [
            [b.anchor[i][m].eval(pt) for i in range(b.rank)]
            for m in range(b.chart.dim)
        ]
        kernel = linalg.kernel_basis(a_t, b.rank)
        anchor_rank = b.rank - len(kernel)
        constraints = [linalg.mat_vec(b.metric, v) for v in kernel]
        perp = linalg.kernel_basis(constraints, b.rank)
        bad = next(
            (w for w in perp if any(x != 0 for x in linalg.mat_vec(a_t, w))), None
        )
        if bad is None:
            reports.append(CoisotropyPointReport(pt, anchor_rank, True))
        else:
            witness = "perp-vector outside kernel: (" + ", ".join(map(str, bad)) + ")"
            reports.append(CoisotropyPointReport(pt, anchor_rank, False, witness))
    return CoisotropyReport(all(r.ok for r in reports), reports)


def format_section(e: Section) -> str:
    return ", ".join(format_poly(c) for c in e.coeffs)

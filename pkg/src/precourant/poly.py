"""Exact sparse multivariate polynomials over the rationals.

A polynomial is a map from exponent tuples to nonzero Fraction
coefficients.  The exponent tuple has one entry per chart coordinate.
The zero polynomial stores no terms, so representations are canonical and
equality is exact dict equality.  All arithmetic is arbitrary-precision
rational; nothing here ever rounds.

Monomials are ordered graded-lexicographically (total degree first, then
lexicographic on the exponent vector, largest first).  Every serialization
in the library sorts by this order, which is what makes golden-file tests
byte-stable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

from .errors import ChartMismatchError

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]


class Chart:
    """A single affine chart: a dimension and named coordinates."""

    __slots__ = ("var_names",)

    def __init__(self, var_names: Iterable[str]):
        names = tuple(var_names)
        if len(names) < 1:
            raise ValueError("chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for n in names:
            if not n.isidentifier():
                raise ValueError(f"coordinate name {n!r} is not an identifier")
        self.var_names = names

    @property
    def dim(self) -> int:
        return len(self.var_names)

    def index(self, name: str) -> int:
        return self.var_names.index(name)

    def __eq__(self, other) -> bool:
        return isinstance(other, Chart) and self.var_names == other.var_names

    def __hash__(self) -> int:
        return hash(self.var_names)

    def __repr__(self) -> str:
        return f"Chart({', '.join(self.var_names)})"


def _grlex_key(exp: Exponent):
    # sort() is ascending; negate so the leading monomial comes first
    return (-sum(exp), tuple(-e for e in exp))


class Poly:
    """An exact polynomial attached to a chart.

    Immutable.  `terms` never contains a zero coefficient.
    """

    __slots__ = ("chart", "terms")

    def __init__(self, chart: Chart, terms: Mapping[Exponent, Scalar]):
        clean: Dict[Exponent, Fraction] = {}
        dim = chart.dim
        for exp, coeff in terms.items():
            c = Fraction(coeff)
            if c == 0:
                continue
            if len(exp) != dim or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for chart of dim {dim}")
            clean[tuple(exp)] = c
        self.chart = chart
        self.terms = clean

    # --- constructors -------------------------------------------------

    @staticmethod
    def zero(chart: Chart) -> "Poly":
        return Poly(chart, {})

    @staticmethod
    def const(chart: Chart, value: Scalar) -> "Poly":
        return Poly(chart, {(0,) * chart.dim: Fraction(value)})

    @staticmethod
    def var(chart: Chart, index: int) -> "Poly":
        exp = [0] * chart.dim
        exp[index] = 1
        return Poly(chart, {tuple(exp): Fraction(1)})

    # --- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def total_degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        return max((sum(e) for e in self.terms), default=0)

    # --- arithmetic ---------------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError(f"{self.chart} vs {other.chart}")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, 0) + c
            if s == 0:
                out.pop(exp, None)
            else:
                out[exp] = s
        return Poly(self.chart, out)

    def __neg__(self) -> "Poly":
        return Poly(self.chart, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: Union["Poly", Scalar]) -> "Poly":
        if not isinstance(other, Poly):
            c = Fraction(other)
            if c == 0:
                return Poly.zero(self.chart)
            return Poly(self.chart, {e: v * c for e, v in self.terms.items()})
        self._check(other)
        out: Dict[Exponent, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exp = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(exp, 0) + ca * cb
                if s == 0:
                    out.pop(exp, None)
                else:
                    out[exp] = s
        return Poly(self.chart, out)

    def __rmul__(self, other: Scalar) -> "Poly":
        return self * other

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        result = Poly.const(self.chart, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Poly)
            and self.chart == other.chart
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.chart, frozenset(self.terms.items())))

    # --- calculus -----------------------------------------------------

    def diff(self, index: int) -> "Poly":
        """Partial derivative with respect to coordinate `index`."""
        out: Dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            k = exp[index]
            if k == 0:
                continue
            e = list(exp)
            e[index] = k - 1
            out[tuple(e)] = c * k
        return Poly(self.chart, out)

    def eval(self, point: Tuple[Scalar, ...]) -> Fraction:
        """Evaluate at a rational point."""
        if len(point) != self.chart.dim:
            raise ValueError("point has wrong dimension")
        pt = [Fraction(x) for x in point]
        total = Fraction(0)
        for exp, c in self.terms.items():
            v = c
            for x, e in zip(pt, exp):
                if e:
                    v *= x**e
            total += v
        return total

    # --- serialization ------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly({format_poly(self)})"


def format_scalar(c: Fraction) -> str:
    return str(c)


def format_poly(p: Poly) -> str:
    """Canonical string in graded-lex order, e.g. ``3/2*x1^2*x4 - x2``."""
    if p.is_zero():
        return "0"
    parts = []
    for exp in sorted(p.terms, key=_grlex_key):
        c = p.terms[exp]
        factors = []
        for name, e in zip(p.chart.var_names, exp):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mono = "*".join(factors)
        if not mono:
            body = format_scalar(abs(c))
        elif abs(c) == 1:
            body = mono
        else:
            body = f"{format_scalar(abs(c))}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text

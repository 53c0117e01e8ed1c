"""Vector fields and exterior differential forms on a chart.

Vector fields are derivations with polynomial coefficients; k-forms are
stored sparsely on strictly increasing coordinate index tuples (0-based
internally).  Conventions used throughout the library:

* the interior product inserts the vector in the first slot,
  ``(contract(X, a))(Y, ...) == a(X, Y, ...)``;
* evaluating a form on several fields feeds them in the listed order,
  ``a(X1, ..., Xk) == contract(Xk, ... contract(X1, a) ...)``;
* the Lie derivative is defined by the Cartan formula ``L_X = i_X d + d i_X``.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Tuple

from .errors import ChartMismatchError, DegreeError
from .poly import Chart, Poly, format_poly

Index = Tuple[int, ...]


class VectorField:
    """Polynomial vector field: one coefficient per coordinate derivation."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: Chart, coeffs: Iterable[Poly]):
        cs = tuple(coeffs)
        if len(cs) != chart.dim:
            raise ValueError("vector field needs one coefficient per coordinate")
        for c in cs:
            if c.chart != chart:
                raise ChartMismatchError("coefficient on a different chart")
        self.chart = chart
        self.coeffs = cs

    @staticmethod
    def zero(chart: Chart) -> "VectorField":
        return VectorField(chart, [Poly.zero(chart)] * chart.dim)

    @staticmethod
    def coordinate(chart: Chart, index: int) -> "VectorField":
        cs = [Poly.zero(chart)] * chart.dim
        cs[index] = Poly.const(chart, 1)
        return VectorField(chart, cs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.chart, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, [-a for a in self.coeffs])

    def scale(self, f: Poly) -> "VectorField":
        return VectorField(self.chart, [f * a for a in self.coeffs])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VectorField)
            and self.chart == other.chart
            and self.coeffs == other.coeffs
        )

    def __repr__(self) -> str:
        return f"VectorField({format_vector_field(self)})"


def vf_apply(x: VectorField, f: Poly) -> Poly:
    """Apply the derivation: sum_i X_i * df/dx_i."""
    if x.chart != f.chart:
        raise ChartMismatchError("vector field and function on different charts")
    out = Poly.zero(f.chart)
    for i, c in enumerate(x.coeffs):
        if not c.is_zero():
            out = out + c * f.diff(i)
    return out


def vf_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Commutator of derivations; coefficient j is X(Y_j) - Y(X_j)."""
    if x.chart != y.chart:
        raise ChartMismatchError("vector fields on different charts")
    return VectorField(
        x.chart,
        [vf_apply(x, yj) - vf_apply(y, xj) for xj, yj in zip(x.coeffs, y.coeffs)],
    )


class KForm:
    """Differential form of fixed degree with polynomial coefficients.

    `comps` maps strictly increasing 0-based index tuples to nonzero Poly
    coefficients.  Degree 0 uses the empty tuple.
    """

    __slots__ = ("chart", "degree", "comps")

    def __init__(self, chart: Chart, degree: int, comps: Mapping[Index, Poly]):
        # degree > dim is allowed but forces the form to be zero: no strictly
        # increasing index tuple of that length exists
        if degree < 0:
            raise DegreeError(f"negative degree {degree}")
        clean: Dict[Index, Poly] = {}
        for idx, p in comps.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index tuple {idx} has wrong length for degree {degree}")
            if any(not (0 <= i < chart.dim) for i in idx):
                raise ValueError(f"index out of range in {idx}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index tuple {idx} is not strictly increasing")
            if p.chart != chart:
                raise ChartMismatchError("component on a different chart")
            if not p.is_zero():
                clean[idx] = p
        self.chart = chart
        self.degree = degree
        self.comps = clean

    @staticmethod
    def zero(chart: Chart, degree: int) -> "KForm":
        return KForm(chart, degree, {})

    @staticmethod
    def from_function(f: Poly) -> "KForm":
        return KForm(f.chart, 0, {(): f})

    @staticmethod
    def basis(chart: Chart, indices: Iterable[int]) -> "KForm":
        """dx_{i1} ^ ... ^ dx_{ik} for strictly increasing 0-based indices."""
        idx = tuple(indices)
        return KForm(chart, len(idx), {idx: Poly.const(chart, 1)})

    def is_zero(self) -> bool:
        return not self.comps

    def coefficient(self, indices: Iterable[int]) -> Poly:
        return self.comps.get(tuple(indices), Poly.zero(self.chart))

    def __add__(self, other: "KForm") -> "KForm":
        self._check(other)
        out = dict(self.comps)
        for idx, p in other.comps.items():
            s = out.get(idx)
            out[idx] = p if s is None else s + p
        return KForm(self.chart, self.degree, out)

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def __neg__(self) -> "KForm":
        return KForm(self.chart, self.degree, {i: -p for i, p in self.comps.items()})

    def scale(self, f) -> "KForm":
        return KForm(self.chart, self.degree, {i: p * f for i, p in self.comps.items()})

    def _check(self, other: "KForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("forms on different charts")
        if self.degree != other.degree:
            raise DegreeError(f"degree {self.degree} vs {other.degree}")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KForm)
            and self.chart == other.chart
            and self.degree == other.degree
            and self.comps == other.comps
        )

    def __repr__(self) -> str:
        return f"KForm({format_kform(self)})"


def _merge_sign(left: Index, right: Index):
    """Merge two disjoint increasing tuples; return (merged, Koszul sign).

    Returns (None, 0) when the tuples share an index.
    """
    if set(left) & set(right):
        return None, 0
    merged = tuple(sorted(left + right))
    # count transpositions needed to interleave `right` past `left`
    inversions = sum(1 for i in left for j in right if j < i)
    return merged, -1 if inversions % 2 else 1


def wedge(a: KForm, b: KForm) -> KForm:
    """Graded-commutative exterior product."""
    if a.chart != b.chart:
        raise ChartMismatchError("forms on different charts")
    degree = a.degree + b.degree
    if degree > a.chart.dim:
        return KForm.zero(a.chart, degree)
    out: Dict[Index, Poly] = {}
    for ia, pa in a.comps.items():
        for ib, pb in b.comps.items():
            merged, sign = _merge_sign(ia, ib)
            if merged is None:
                continue
            term = pa * pb
            if sign < 0:
                term = -term
            s = out.get(merged)
            out[merged] = term if s is None else s + term
    return KForm(a.chart, degree, out)


def ext_d(a: KForm) -> KForm:
    """Exterior differential in coordinates; satisfies d(d(a)) = 0."""
    chart = a.chart
    if a.degree >= chart.dim:
        return KForm.zero(chart, a.degree + 1)
    out: Dict[Index, Poly] = {}
    for idx, p in a.comps.items():
        for m in range(chart.dim):
            dp = p.diff(m)
            if dp.is_zero() or m in idx:
                continue
            merged, sign = _merge_sign((m,), idx)
            term = dp if sign > 0 else -dp
            s = out.get(merged)
            out[merged] = term if s is None else s + term
    return KForm(chart, a.degree + 1, out)


def contract(x: VectorField, a: KForm) -> KForm:
    """Interior product i_X, inserting X in the first slot."""
    if x.chart != a.chart:
        raise ChartMismatchError("vector field and form on different charts")
    if a.degree == 0:
        raise DegreeError("cannot contract a 0-form")
    out: Dict[Index, Poly] = {}
    for idx, p in a.comps.items():
        for pos, i in enumerate(idx):
            xi = x.coeffs[i]
            if xi.is_zero():
                continue
            rest = idx[:pos] + idx[pos + 1 :]
            term = xi * p
            if pos % 2:
                term = -term
            s = out.get(rest)
            out[rest] = term if s is None else s + term
    return KForm(a.chart, a.degree - 1, out)


def lie_derivative(x: VectorField, a: KForm) -> KForm:
    """Cartan formula L_X = i_X d + d i_X, adopted as the definition."""
    d_a = ext_d(a)
    first = contract(x, d_a) if d_a.degree > 0 else KForm.zero(a.chart, 0)
    if a.degree == 0:
        # i_X on degree 0 is zero, so L_X f = i_X df = X(f)
        return first
    return first + ext_d(contract(x, a))


def evaluate(a: KForm, fields: Iterable[VectorField]) -> Poly:
    """Evaluate a k-form on exactly k vector fields, in the listed order."""
    current = a
    fields = tuple(fields)
    if len(fields) != a.degree:
        raise DegreeError(f"need {a.degree} fields, got {len(fields)}")
    for x in fields:
        current = contract(x, current)
    return current.comps.get((), Poly.zero(a.chart))


def format_vector_field(x: VectorField) -> str:
    parts = []
    for name, c in zip(x.chart.var_names, x.coeffs):
        if not c.is_zero():
            parts.append(f"({format_poly(c)})*d/d{name}")
    return " + ".join(parts) if parts else "0"


def format_kform(a: KForm) -> str:
    """Canonical form string using 1-based dx(i,...) basis terms."""
    if a.degree == 0:
        return format_poly(a.comps.get((), Poly.zero(a.chart)))
    if a.is_zero():
        return "0"
    parts = []
    for idx in sorted(a.comps):
        basis = "dx(" + ",".join(str(i + 1) for i in idx) + ")"
        parts.append(f"({format_poly(a.comps[idx])})*{basis}")
    return " + ".join(parts)

"""Pre-Courant algebroids: frame bracket tables and their Leibniz extension.

The structure is stored as the bracket of every frame pair.  Brackets of
arbitrary sections are produced by the two extension rules

    e1 o (f e2) = f (e1 o e2) + (rho(e1) f) e2
    (f e1) o e2 = f (e1 o e2) - (rho(e2) f) e1 + <e1, e2> D f

which determine the operation uniquely; the two possible expansion orders
agree, and a property test pins that down.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence

from .bundle import (
    CourantBundle,
    Section,
    anchor_apply,
    dee,
    format_section,
    pairing,
    validate_bundle,
)
from .errors import RankMismatchError
from .exterior import vf_apply, vf_bracket
from .poly import Poly, format_poly
from .reports import VerifyReport
from .sampling import random_poly, random_section


class PreCourantAlgebroid:
    """A Courant vector bundle with a frame bracket table."""

    def __init__(self, bundle: CourantBundle, table: Sequence[Sequence[Section]]):
        r = bundle.rank
        rows = [tuple(row) for row in table]
        if len(rows) != r or any(len(row) != r for row in rows):
            raise RankMismatchError("bracket table must be rank x rank")
        for row in rows:
            for s in row:
                if s.bundle != bundle:
                    raise RankMismatchError("table entry on a different bundle")
        self.bundle = bundle
        self.table = tuple(rows)

    @property
    def rank(self) -> int:
        return self.bundle.rank

    @property
    def chart(self):
        return self.bundle.chart

    def with_table(self, table) -> "PreCourantAlgebroid":
        return PreCourantAlgebroid(self.bundle, table)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PreCourantAlgebroid)
            and self.bundle == other.bundle
            and self.table == other.table
        )


def zero_table(bundle: CourantBundle) -> List[List[Section]]:
    zero = bundle.zero_section()
    return [[zero for _ in range(bundle.rank)] for _ in range(bundle.rank)]


def bracket(p: PreCourantAlgebroid, e1: Section, e2: Section) -> Section:
    """The unique Leibniz extension of the frame table."""
    b = p.bundle
    if e1.bundle != b or e2.bundle != b:
        raise RankMismatchError("sections not on this algebroid's bundle")
    r = b.rank
    rho_e1 = anchor_apply(e1)
    # cache D f_i and rho(u_j) f_i only for nonzero, nonconstant coefficients
    out = b.zero_section()
    frames = [b.frame(i) for i in range(r)]
    dees = {}
    for i, fi in enumerate(e1.coeffs):
        if not fi.is_zero() and not fi.is_constant():
            dees[i] = dee(b, fi)
    for j, gj in enumerate(e2.coeffs):
        if not gj.is_zero():
            # inner = e1 o u_j expanded by the first-argument rule
            inner = b.zero_section()
            rho_uj = anchor_apply(frames[j])
            for i, fi in enumerate(e1.coeffs):
                if fi.is_zero():
                    continue
                inner = inner + p.table[i][j].scale(fi)
                deriv = vf_apply(rho_uj, fi)
                if not deriv.is_zero():
                    inner = inner - frames[i].scale(deriv)
                gij = b.metric[i][j]
                if gij != 0 and i in dees:
                    inner = inner + dees[i].scale(gij)
            out = out + inner.scale(gj)
        # second-argument rule contributes (rho(e1) g_j) u_j
        d2 = vf_apply(rho_e1, gj)
        if not d2.is_zero():
            out = out + frames[j].scale(d2)
    return out


def jacobiator(p: PreCourantAlgebroid, e1: Section, e2: Section, e3: Section) -> Section:
    """Leibniz-identity defect e1o(e2oe3) - (e1oe2)oe3 - e2o(e1oe3)."""
    return (
        bracket(p, e1, bracket(p, e2, e3))
        - bracket(p, bracket(p, e1, e2), e3)
        - bracket(p, e2, bracket(p, e1, e3))
    )


def skew_bracket(p: PreCourantAlgebroid, e1: Section, e2: Section) -> Section:
    """Skew-symmetrization e1 o e2 - (1/2) D <e1, e2>."""
    out = bracket(p, e1, e2)
    pr = pairing(e1, e2)
    if not pr.is_zero():
        out = out - dee(p.bundle, pr).scale(Fraction(1, 2))
    return out


def _fmt_sections(*sections: Section) -> str:
    return " | ".join("(" + format_section(s) + ")" for s in sections)


def verify_axioms(
    p: PreCourantAlgebroid, trials: int = 16, seed: int = 0, max_degree: int = 2
) -> VerifyReport:
    """Check the three defining axioms on all frame tuples and on seeded
    random sections; the report carries the first counterexample."""
    report = VerifyReport("pre-courant axioms")
    bundle_report = validate_bundle(p.bundle)
    if not report.require(
        "bundle-valid", bundle_report.ok, "; ".join(bundle_report.failures)
    ):
        report.skipped = False
        return report
    b = p.bundle
    r = b.rank
    frames = b.frames()
    rho_frames = [anchor_apply(f) for f in frames]

    def check_triple(name: str, e1, e2, e3) -> Optional[str]:
        lhs = vf_apply(anchor_apply(e1), pairing(e2, e3))
        rhs = pairing(bracket(p, e1, e2), e3) + pairing(e2, bracket(p, e1, e3))
        if lhs != rhs:
            return (
                f"{name}: rho(e1)<e2,e3> = {format_poly(lhs)} but RHS = "
                f"{format_poly(rhs)} at {_fmt_sections(e1, e2, e3)}"
            )
        return None

    # axiom (i) on frames: rho(table[i][j]) = [rho(u_i), rho(u_j)]
    witness = ""
    ok = True
    for i in range(r):
        for j in range(r):
            lhs = anchor_apply(p.table[i][j])
            rhs = vf_bracket(rho_frames[i], rho_frames[j])
            if lhs != rhs:
                ok = False
                witness = f"frames ({i + 1},{j + 1})"
                break
        if not ok:
            break
    report.add("axiom-i-frames", ok, witness)

    # axiom (ii) via the symmetrized form on frames
    ok, witness = True, ""
    for i in range(r):
        for j in range(r):
            lhs = p.table[i][j] + p.table[j][i]
            rhs = dee(b, pairing(frames[i], frames[j]))
            if lhs != rhs:
                ok = False
                witness = (
                    f"frames ({i + 1},{j + 1}): t[i][j]+t[j][i] = "
                    f"({format_section(lhs)}) but D<u_i,u_j> = ({format_section(rhs)})"
                )
                break
        if not ok:
            break
    report.add("axiom-ii-frames", ok, witness)

    # axiom (iii) on frame triples
    ok, witness = True, ""
    for i in range(r):
        for j in range(r):
            for k in range(r):
                w = check_triple(f"frames ({i + 1},{j + 1},{k + 1})", frames[i], frames[j], frames[k])
                if w:
                    ok, witness = False, w
                    break
            if not ok:
                break
        if not ok:
            break
    report.add("axiom-iii-frames", ok, witness)

    # the random layer guards the extension rules themselves
    rng = random.Random(seed)
    ok_i = ok_ii = ok_iii = True
    wit_i = wit_ii = wit_iii = ""
    for _ in range(trials):
        e1 = random_section(rng, b, max_degree)
        e2 = random_section(rng, b, max_degree)
        e3 = random_section(rng, b, max_degree)
        if ok_i:
            lhs = anchor_apply(bracket(p, e1, e2))
            rhs = vf_bracket(anchor_apply(e1), anchor_apply(e2))
            if lhs != rhs:
                ok_i, wit_i = False, f"sections {_fmt_sections(e1, e2)}"
        if ok_ii:
            lhs = bracket(p, e1, e2) + bracket(p, e2, e1)
            rhs = dee(b, pairing(e1, e2))
            if lhs != rhs:
                ok_ii, wit_ii = False, f"sections {_fmt_sections(e1, e2)}"
        if ok_iii:
            w = check_triple("sections", e1, e2, e3)
            if w:
                ok_iii, wit_iii = False, w
    report.add("axiom-i-random", ok_i, wit_i)
    report.add("axiom-ii-random", ok_ii, wit_ii)
    report.add("axiom-iii-random", ok_iii, wit_iii)
    return report


def verify_derived_identities(
    p: PreCourantAlgebroid, trials: int = 16, seed: int = 0, max_degree: int = 2
) -> VerifyReport:
    """Check the bracket calculus that follows from the axioms:
    both extension rules, D-annihilation, and the symmetrization identity."""
    report = VerifyReport("derived bracket identities")
    b = p.bundle
    rng = random.Random(seed)
    functions = [Poly.var(b.chart, m) for m in range(b.chart.dim)]
    functions += [random_poly(rng, b.chart, max_degree) for _ in range(4)]

    names = [
        "right-function-rule",
        "left-function-rule",
        "derivative-left-zero",
        "derivative-right-chain",
        "anchor-kills-derivative",
        "symmetrization",
    ]
    status = {n: (True, "") for n in names}

    def fail(name: str, witness: str) -> None:
        if status[name][0]:
            status[name] = (False, witness)

    for t in range(trials):
        e1 = random_section(rng, b, max_degree)
        e2 = random_section(rng, b, max_degree)
        f = functions[t % len(functions)]
        df = dee(b, f)
        # the bracket differentiates functions in its second slot
        lhs = bracket(p, e1, e2.scale(f))
        rhs = bracket(p, e1, e2).scale(f) + e2.scale(vf_apply(anchor_apply(e1), f))
        if lhs != rhs:
            fail("right-function-rule", f"f = {format_poly(f)}, {_fmt_sections(e1, e2)}")
        # first-slot functions pick up a derivative and a pairing term
        lhs = bracket(p, e1.scale(f), e2)
        rhs = (
            bracket(p, e1, e2).scale(f)
            - e1.scale(vf_apply(anchor_apply(e2), f))
            + df.scale(pairing(e1, e2))
        )
        if lhs != rhs:
            fail("left-function-rule", f"f = {format_poly(f)}, {_fmt_sections(e1, e2)}")
        # derivative sections annihilate from the left
        lhs = bracket(p, df, e1)
        if not lhs.is_zero():
            fail("derivative-left-zero", f"f = {format_poly(f)}, e = ({format_section(e1)})")
        # bracketing into a derivative section chains through the anchor
        lhs = bracket(p, e1, df)
        rhs = dee(b, vf_apply(anchor_apply(e1), f))
        if lhs != rhs:
            fail("derivative-right-chain", f"f = {format_poly(f)}, e = ({format_section(e1)})")
        # the anchor kills every derivative section
        if not anchor_apply(df).is_zero():
            fail("anchor-kills-derivative", f"f = {format_poly(f)}")
        # symmetrization identity on random sections
        lhs = bracket(p, e1, e2) + bracket(p, e2, e1)
        rhs = dee(b, pairing(e1, e2))
        if lhs != rhs:
            fail("symmetrization", _fmt_sections(e1, e2))

    for n in names:
        ok, wit = status[n]
        report.add(n, ok, wit)
    return report

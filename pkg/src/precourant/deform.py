"""Deformations, B-fields, Pontryagin forms, naive cohomology, quotients.

A deformation is a kernel-valued alternating 2-cochain killed by every
D f; adding it to the bracket table yields another pre-Courant structure
on the same bundle.  The two Jacobiators differ by the covariant
derivative of the deformation plus half its square.

The obstruction form of a transitive structure is read off the Jacobiator
through a user-supplied right inverse of the anchor.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .algebroid import PreCourantAlgebroid, bracket, jacobiator, skew_bracket
from .bundle import (
    CourantBundle,
    Section,
    anchor_apply,
    format_section,
    pairing,
)
from .cochain import (
    Cochain,
    KerCochain,
    cobound_d,
    cochain_sharp,
    is_in_ckd,
    jacobiator_flat,
    partial_section_values,
    pullback_form,
)
from .errors import ConstructionError, DegreeError
from .exterior import KForm, VectorField, ext_d, format_kform
from .poly import Poly, format_poly
from .reports import VerifyReport
from .sampling import random_section

FrameTuple = Tuple[int, ...]


def twist_deformation(bundle: CourantBundle, h: KForm) -> KerCochain:
    """The deformation pulling a 3-form back through the anchor:
    omega(e1, e2) = rho*( h(rho(e1), rho(e2), .) )."""
    if h.degree != 3:
        raise DegreeError("twist deformation needs a 3-form")
    return KerCochain(pullback_form(bundle, h))


def validate_deformation(p: PreCourantAlgebroid, omega: KerCochain) -> VerifyReport:
    """The three invariants: kernel values, total alternation of the
    pairing, and the contraction-membership test."""
    report = VerifyReport("deformation validity")
    b = p.bundle
    if omega.degree != 2:
        report.add("degree-2", False, f"degree is {omega.degree}")
        return report
    report.add("degree-2", True)
    ok, witness = True, ""
    for i, j in combinations(range(b.rank), 2):
        if not anchor_apply(omega.value_at((i, j))).is_zero():
            ok, witness = False, f"omega(u{i + 1}, u{j + 1}) leaves the kernel"
            break
    report.add("kernel-valued", ok, witness)
    # total alternation is structural for the stored flat; verify the
    # diagonal, which flat storage alone does not force on evaluation
    ok, witness = True, ""
    for i in range(b.rank):
        if not omega.value_at((i, i)).is_zero():
            ok, witness = False, f"omega(u{i + 1}, u{i + 1}) nonzero"
            break
    report.add("alternating", ok, witness)
    member = is_in_ckd(omega.flat)
    report.add(
        "contraction-membership",
        member.ok,
        member.witnesses[0] if member.witnesses else "",
    )
    return report


def apply_deformation(
    p: PreCourantAlgebroid, omega: KerCochain, validate: bool = True
) -> PreCourantAlgebroid:
    """New structure with table[i][j] + omega(u_i, u_j)."""
    if validate:
        report = validate_deformation(p, omega)
        if not report.ok:
            fail = report.first_failure()
            raise ConstructionError("invalid-deformation", fail.name if fail else "")
    b = p.bundle
    table = [
        [p.table[i][j] + omega.value_at((i, j)) for j in range(b.rank)]
        for i in range(b.rank)
    ]
    return PreCourantAlgebroid(b, table)


def extract_deformation(
    p: PreCourantAlgebroid, deformed: PreCourantAlgebroid
) -> KerCochain:
    """Inverse of apply_deformation: omega(e1, e2) = e1 o~ e2 - e1 o e2."""
    b = p.bundle
    values: Dict[FrameTuple, Poly] = {}
    diffs = [
        [deformed.table[i][j] - p.table[i][j] for j in range(b.rank)]
        for i in range(b.rank)
    ]
    for idx in combinations(range(b.rank), 3):
        i, j, k = idx
        v = pairing(diffs[i][j], b.frame(k))
        if not v.is_zero():
            values[idx] = v
    return KerCochain(Cochain(b, 3, values))


def omega_square(
    p: PreCourantAlgebroid, omega: KerCochain, e1: Section, e2: Section, e3: Section
) -> Section:
    """omega^2(e1,e2,e3) = 2 (omega(e1, omega(e2,e3)) + cyclic)."""
    total = (
        omega.evaluate([e1, omega.evaluate([e2, e3])])
        + omega.evaluate([e2, omega.evaluate([e3, e1])])
        + omega.evaluate([e3, omega.evaluate([e1, e2])])
    )
    return total.scale(2)


def verify_deformation_identity(
    p: PreCourantAlgebroid,
    omega: KerCochain,
    trials: int = 16,
    seed: int = 0,
    max_degree: int = 2,
) -> VerifyReport:
    """Exact equality of the deformed Jacobiator with
    J + partial(omega) + (1/2) omega^2, on frames and seeded sections."""
    report = VerifyReport("deformation identity")
    validity = validate_deformation(p, omega)
    if not validity.ok:
        fail = validity.first_failure()
        report.add("precondition-valid-omega", False, fail.name if fail else "")
        report.skipped = True
        return report
    report.add("precondition-valid-omega", True)
    deformed = apply_deformation(p, omega, validate=False)
    b = p.bundle
    partial_omega = partial_section_values(p, omega)

    ok, witness = True, ""
    omega_sq_all_zero = True
    for idx in combinations(range(b.rank), 3):
        e = [b.frame(i) for i in idx]
        lhs = jacobiator(deformed, *e)
        sq = omega_square(p, omega, *e)
        if not sq.is_zero():
            omega_sq_all_zero = False
        rhs = jacobiator(p, *e) + partial_omega[idx] + sq.scale(Fraction(1, 2))
        if lhs != rhs:
            ok = False
            witness = (
                f"frames {tuple(i + 1 for i in idx)}: deformed J = "
                f"({format_section(lhs)}) vs ({format_section(rhs)})"
            )
            break
    report.add("identity-on-frames", ok, witness)
    report.notes.append(
        "omega-square vanishes on all frame triples"
        if omega_sq_all_zero
        else "omega-square is nonzero on some frame triple"
    )

    rng = random.Random(seed)
    ok, witness = True, ""
    from .cochain import cobound_partial

    # partial(omega) packaged once; evaluated on general sections via its flat
    pom = cobound_partial(p, omega)
    for _ in range(trials):
        es = [random_section(rng, b, max_degree) for _ in range(3)]
        lhs = jacobiator(deformed, *es)
        rhs = (
            jacobiator(p, *es)
            + pom.evaluate(es)
            + omega_square(p, omega, *es).scale(Fraction(1, 2))
        )
        if lhs != rhs:
            ok, witness = False, "seeded sections"
            break
    report.add("identity-on-sections", ok, witness)
    return report


# --- B-fields ----------------------------------------------------------


class BField:
    """A 2-form on the base, pulled back to a metric 2-cochain."""

    def __init__(self, bundle: CourantBundle, beta: KForm):
        if beta.degree != 2:
            raise DegreeError("B-field needs a 2-form")
        self.bundle = bundle
        self.beta = beta
        self.cochain = pullback_form(bundle, beta)

    def raise_map(self, e: Section) -> Section:
        """B-sharp: the section with <B#(e), e'> = B(e, e')."""
        b = self.bundle
        covector = [self.cochain.eval_section_first(e, (j,)) for j in range(b.rank)]
        g_inv = b.metric_inv
        return Section(
            b,
            [
                sum(
                    (covector[j] * g_inv[i][j] for j in range(b.rank) if g_inv[i][j] != 0),
                    Poly.zero(b.chart),
                )
                for i in range(b.rank)
            ],
        )

    def transform(self, e: Section) -> Section:
        """e^B(e) = e + B#(e)."""
        return e + self.raise_map(e)

    def inverse_transform(self, e: Section) -> Section:
        return e - self.raise_map(e)


def bfield_deformed_structure(
    p: PreCourantAlgebroid, beta: KForm
) -> PreCourantAlgebroid:
    """The equivalent structure o + rho*(d beta (rho ., rho ., .))."""
    return apply_deformation(
        p, twist_deformation(p.bundle, ext_d(beta)), validate=False
    )


def bfield_verify(
    p: PreCourantAlgebroid,
    beta: KForm,
    trials: int = 16,
    seed: int = 0,
    max_degree: int = 2,
) -> VerifyReport:
    """The five transformation properties of a B-field, exact."""
    report = VerifyReport("b-field transformation")
    b = p.bundle
    field = BField(b, beta)
    deformed = bfield_deformed_structure(p, beta)
    rng = random.Random(seed)
    sections = [b.frame(i) for i in range(b.rank)]
    sections += [random_section(rng, b, max_degree) for _ in range(trials)]

    # (1) conjugation property on frames and seeded sections
    ok, witness = True, ""
    for i, e1 in enumerate(sections):
        for e2 in sections[: len(sections) if i < b.rank else b.rank]:
            lhs = bracket(deformed, e1, e2)
            rhs = field.inverse_transform(
                bracket(p, field.transform(e1), field.transform(e2))
            )
            if lhs != rhs:
                ok, witness = False, _pair_witness(e1, e2)
                break
        if not ok:
            break
    report.add("conjugation", ok, witness)

    # (2) metric preserved
    ok, witness = True, ""
    for i, e1 in enumerate(sections):
        for e2 in sections:
            if pairing(field.transform(e1), field.transform(e2)) != pairing(e1, e2):
                ok, witness = False, _pair_witness(e1, e2)
                break
        if not ok:
            break
    report.add("metric-preserved", ok, witness)

    # (3) anchor preserved
    ok, witness = True, ""
    for e in sections:
        if anchor_apply(field.transform(e)) != anchor_apply(e):
            ok, witness = False, f"({format_section(e)})"
            break
    report.add("anchor-preserved", ok, witness)

    # (4) Jacobiator invariant on frame triples
    ok, witness = True, ""
    for idx in combinations(range(b.rank), 3):
        e = [b.frame(i) for i in idx]
        if jacobiator(deformed, *e) != jacobiator(p, *e):
            ok, witness = False, f"frames {tuple(i + 1 for i in idx)}"
            break
    report.add("jacobiator-invariant", ok, witness)

    # (5) closed 2-form leaves the bracket table unchanged
    if ext_d(beta).is_zero():
        same = all(
            deformed.table[i][j] == p.table[i][j]
            for i in range(b.rank)
            for j in range(b.rank)
        )
        report.add("closed-beta-identity", same, "" if same else "table differs")
        report.notes.append("d beta = 0: transformation is an automorphism")
    else:
        report.notes.append("d beta != 0: bracket deformed by the pullback of d beta")
    return report


def _pair_witness(e1: Section, e2: Section) -> str:
    return f"({format_section(e1)}) | ({format_section(e2)})"


# --- Pontryagin-type forms ----------------------------------------------


def kernel_generators_from_lift(
    p: PreCourantAlgebroid, lift: Sequence[Section]
) -> List[Section]:
    """Frame-level generators of the anchor kernel in the transitive case:
    kappa_a = u_a - sum_i A[a][i] sigma_i."""
    b = p.bundle
    out = []
    for a in range(b.rank):
        kappa = b.frame(a)
        for i in range(b.chart.dim):
            coeff = b.anchor[a][i]
            if not coeff.is_zero():
                kappa = kappa - lift[i].scale(coeff)
        out.append(kappa)
    return out


def check_lift(p: PreCourantAlgebroid, lift: Sequence[Section]) -> Optional[str]:
    """A lift must send each coordinate direction to a section anchored on it."""
    b = p.bundle
    if len(lift) != b.chart.dim:
        return f"lift must supply {b.chart.dim} sections"
    for i, sigma in enumerate(lift):
        rho = anchor_apply(sigma)
        expected = VectorField.coordinate(b.chart, i)
        if rho != expected:
            return (
                f"rho(sigma_{i + 1}) = ({', '.join(format_poly(c) for c in rho.coeffs)})"
                f" is not the coordinate direction {b.chart.var_names[i]}"
            )
    return None


def pontryagin_representative(
    p: PreCourantAlgebroid, lift: Sequence[Section]
) -> Tuple[Optional[KForm], VerifyReport]:
    """The 4-form H with H(d_{i1},...,d_{i4}) = <J(s_{i1},s_{i2},s_{i3}), s_{i4}>.

    Requires a transitive structure via the right-inverse lift; verifies that
    kernel slots kill J (so the form is well defined) and that d H = 0.
    """
    report = VerifyReport("pontryagin representative")
    b = p.bundle
    lift_problem = check_lift(p, lift)
    if not report.require("lift-is-right-inverse", lift_problem is None, lift_problem or ""):
        report.skipped = True
        return None, report

    kappas = kernel_generators_from_lift(p, lift)
    ok, witness = True, ""
    for a, kappa in enumerate(kappas):
        if kappa.is_zero():
            continue
        for i, j in combinations(range(b.rank), 2):
            if not jacobiator(p, kappa, b.frame(i), b.frame(j)).is_zero():
                ok = False
                witness = f"J(kappa_{a + 1}, u{i + 1}, u{j + 1}) != 0"
                break
        if not ok:
            break
    if not report.require("kernel-slots-vanish", ok, witness):
        report.skipped = True
        return None, report

    n = b.chart.dim
    comps: Dict[Tuple[int, ...], Poly] = {}
    for idx in combinations(range(n), 4):
        v = pairing(
            jacobiator(p, lift[idx[0]], lift[idx[1]], lift[idx[2]]), lift[idx[3]]
        )
        if not v.is_zero():
            comps[idx] = v
    h_form = KForm(b.chart, 4, comps)
    closed = ext_d(h_form).is_zero()
    report.add("d-h-zero", closed, "" if closed else format_kform(ext_d(h_form)))
    return h_form, report


def pontryagin_vanishing_check(
    p: PreCourantAlgebroid, h: KForm
) -> VerifyReport:
    """Whether the 3-form h exhibits the obstruction as a coboundary:
    J-flat = rho*(d h) on frame quadruples; if so, untwisting by h yields a
    structure whose Jacobiator vanishes on frame triples."""
    report = VerifyReport("pontryagin vanishing")
    if h.degree != 3:
        report.add("h-degree-3", False, f"degree {h.degree}")
        return report
    b = p.bundle
    jflat = jacobiator_flat(p)
    target = pullback_form(b, ext_d(h))
    ok, witness = True, ""
    for idx in combinations(range(b.rank), 4):
        lhs = jflat.value_at(idx)
        rhs = target.value_at(idx)
        if lhs != rhs:
            ok = False
            witness = (
                f"frames {tuple(i + 1 for i in idx)}: J-flat = {format_poly(lhs)}"
                f" but rho*(dh) = {format_poly(rhs)}"
            )
            break
    if not report.require("jflat-equals-pullback-dh", ok, witness):
        return report

    # untwist and confirm the Jacobiator dies
    minus_twist = KerCochain(-pullback_form(b, h))
    deformed = apply_deformation(p, minus_twist, validate=False)
    ok, witness = True, ""
    for idx in combinations(range(b.rank), 3):
        e = [b.frame(i) for i in idx]
        j = jacobiator(deformed, *e)
        if not j.is_zero():
            ok = False
            witness = f"frames {tuple(i + 1 for i in idx)}: J = ({format_section(j)})"
            break
    report.add("untwisted-jacobiator-zero", ok, witness)
    return report


# --- naive cohomology and the quotient -----------------------------------


def check_image_condition(
    p: PreCourantAlgebroid, kernel_generators: Sequence[Section]
) -> Tuple[bool, str]:
    """Whether every Jacobiator value pairs to zero with the kernel,
    i.e. lands in the kernel's orthogonal."""
    b = p.bundle
    for idx in combinations(range(b.rank), 3):
        j = jacobiator(p, b.frame(idx[0]), b.frame(idx[1]), b.frame(idx[2]))
        if j.is_zero():
            continue
        for a, kappa in enumerate(kernel_generators):
            v = pairing(j, kappa)
            if not v.is_zero():
                return False, (
                    f"<J(u{idx[0] + 1}, u{idx[1] + 1}, u{idx[2] + 1}), kappa_{a + 1}>"
                    f" = {format_poly(v)}"
                )
    return True, ""


def default_kernel_generators(
    p: PreCourantAlgebroid, lift: Optional[Sequence[Section]] = None
) -> List[Section]:
    """Kernel generators: lift-based in the transitive case, otherwise the
    frames whose anchor row vanishes."""
    b = p.bundle
    if lift is not None:
        return [k for k in kernel_generators_from_lift(p, lift) if not k.is_zero()]
    from .sampling import zero_anchor_frames

    return [b.frame(i) for i in zero_anchor_frames(b)]


def naive_cohomology_check(
    p: PreCourantAlgebroid,
    samples: Sequence[Cochain],
    kernel_generators: Sequence[Section],
) -> VerifyReport:
    """D squared and partial squared vanish exactly on each sample, once the
    Jacobiator lands in the kernel's orthogonal.  When the precondition
    fails the squares are still evaluated so the report can exhibit a
    counterexample."""
    report = VerifyReport("naive cohomology")
    cond, witness = check_image_condition(p, kernel_generators)
    report.add("jacobiator-in-orthogonal", cond, witness)
    for n, psi in enumerate(samples):
        member = is_in_ckd(psi)
        if not report.require(
            f"sample-{n + 1}-membership",
            member.ok,
            member.witnesses[0] if member.witnesses else "",
        ):
            continue
        dd = cobound_d(p, cobound_d(p, psi))
        ok = dd.is_zero()
        wit = ""
        if not ok:
            idx = sorted(dd.values)[0]
            wit = (
                f"D^2 at frames {tuple(i + 1 for i in idx)} = "
                f"{format_poly(dd.values[idx])}"
            )
        report.add(f"sample-{n + 1}-d-squared", ok, wit)
        from .cochain import cobound_partial

        phi = cochain_sharp(psi)
        pp = cobound_partial(p, cobound_partial(p, phi))
        ok = pp.flat.is_zero()
        wit = ""
        if not ok:
            idx = sorted(pp.flat.values)[0]
            wit = (
                f"partial^2 at frames {tuple(i + 1 for i in idx)} = "
                f"{format_poly(pp.flat.values[idx])}"
            )
        report.add(f"sample-{n + 1}-partial-squared", ok, wit)
    if not cond:
        report.notes.append(
            "precondition fails; any nonzero square above is the counterexample"
        )
    return report


def quotient_jacobi_check(
    p: PreCourantAlgebroid,
    complement: Sequence[Section],
    lift: Sequence[Section],
    trials: int = 16,
    seed: int = 0,
    max_degree: int = 2,
) -> VerifyReport:
    """Jacobi identity of the skew bracket modulo the kernel's orthogonal,
    on the supplied complement representatives and seeded combinations."""
    report = VerifyReport("quotient jacobi identity")
    b = p.bundle
    lift_problem = check_lift(p, lift)
    if not report.require(
        "lift-is-right-inverse", lift_problem is None, lift_problem or ""
    ):
        report.skipped = True
        return report
    kappas = [k for k in kernel_generators_from_lift(p, lift) if not k.is_zero()]
    cond, witness = check_image_condition(p, kappas)
    if not report.require("jacobiator-in-orthogonal", cond, witness):
        report.skipped = True
        report.notes.append("quotient bracket has no Lie algebroid structure")
        return report

    rng = random.Random(seed)
    tuples: List[Tuple[Section, Section, Section]] = []
    for idx in combinations(range(len(complement)), 3):
        tuples.append((complement[idx[0]], complement[idx[1]], complement[idx[2]]))
    for _ in range(trials):
        picks = []
        for _ in range(3):
            e = b.zero_section()
            for c in complement:
                from .sampling import random_poly

                e = e + c.scale(random_poly(rng, b.chart, max_degree))
            picks.append(e)
        tuples.append(tuple(picks))

    ok, witness = True, ""
    for e1, e2, e3 in tuples:
        defect = (
            skew_bracket(p, e1, skew_bracket(p, e2, e3))
            + skew_bracket(p, e2, skew_bracket(p, e3, e1))
            + skew_bracket(p, e3, skew_bracket(p, e1, e2))
        )
        for kappa in kappas:
            v = pairing(defect, kappa)
            if not v.is_zero():
                ok = False
                witness = f"defect pairs with a kernel generator: {format_poly(v)}"
                break
        if not ok:
            break
    report.add("jacobi-mod-orthogonal", ok, witness)
    return report

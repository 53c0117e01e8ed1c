"""Cochain spaces of a pre-Courant algebroid and their coboundaries.

A degree-k cochain is stored densely on strictly increasing frame index
tuples.  Members of the contraction-closed space (those killed by every
D f) are tensorial, so frame storage is lossless and evaluation on general
sections is multilinear expansion.  Kernel-valued cochains are stored as
their flat, one degree up.

Two coboundaries act here: the extension of D (anchor terms plus bracket
insertions) and the covariant derivative with left and right bracket
actions.  They are implemented from their own formulas so that the
commutation lemma D psi = (partial sharp(psi))-flat is a genuine
cross-check between independent code paths.
"""

from __future__ import annotations

import random
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

from .algebroid import PreCourantAlgebroid, bracket, jacobiator
from .bundle import CourantBundle, Section, anchor_apply, dee, format_section, pairing
from .errors import DegreeError, MembershipError
from .exterior import KForm, evaluate, vf_apply
from .poly import Poly, format_poly
from .reports import VerifyReport
from .sampling import random_poly, random_section

FrameTuple = Tuple[int, ...]


def _sort_sign(indices: Sequence[int]):
    """Sort an index tuple; returns (sorted_tuple, sign) or (None, 0) on repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    # insertion sort, counting swaps
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


class Cochain:
    """Alternating k-linear data on the frame, with Poly values."""

    __slots__ = ("bundle", "degree", "values")

    def __init__(
        self, bundle: CourantBundle, degree: int, values: Dict[FrameTuple, Poly]
    ):
        if degree < 0:
            raise DegreeError("cochain degree must be nonnegative")
        clean: Dict[FrameTuple, Poly] = {}
        for idx, p in values.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"tuple {idx} has wrong length for degree {degree}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"tuple {idx} is not strictly increasing")
            if any(not (0 <= i < bundle.rank) for i in idx):
                raise ValueError(f"frame index out of range in {idx}")
            if not p.is_zero():
                clean[idx] = p
        self.bundle = bundle
        self.degree = degree
        self.values = clean

    @staticmethod
    def zero(bundle: CourantBundle, degree: int) -> "Cochain":
        return Cochain(bundle, degree, {})

    def is_zero(self) -> bool:
        return not self.values

    def value_at(self, indices: Sequence[int]) -> Poly:
        """Value on an arbitrary (possibly unsorted) frame tuple."""
        key, sign = _sort_sign(indices)
        if key is None:
            return Poly.zero(self.bundle.chart)
        p = self.values.get(key)
        if p is None:
            return Poly.zero(self.bundle.chart)
        return p if sign > 0 else -p

    def eval_section_first(self, s: Section, rest: Sequence[int]) -> Poly:
        """Evaluate with a general section in the first slot, frames after."""
        out = Poly.zero(self.bundle.chart)
        for i, ci in enumerate(s.coeffs):
            if not ci.is_zero():
                v = self.value_at((i, *rest))
                if not v.is_zero():
                    out = out + ci * v
        return out

    def evaluate(self, sections: Sequence[Section]) -> Poly:
        """Full multilinear expansion on k general sections."""
        if len(sections) != self.degree:
            raise DegreeError(f"need {self.degree} sections")
        if self.degree == 0:
            return self.values.get((), Poly.zero(self.bundle.chart))
        out = Poly.zero(self.bundle.chart)
        from itertools import permutations

        for idx, base in self.values.items():
            for perm in permutations(range(self.degree)):
                # sections[t] takes frame index idx[perm[t]]
                coeff = Poly.const(self.bundle.chart, 1)
                zero = False
                for t, pt in enumerate(perm):
                    c = sections[t].coeffs[idx[pt]]
                    if c.is_zero():
                        zero = True
                        break
                    coeff = coeff * c
                if zero:
                    continue
                _, sign = _sort_sign(perm)
                term = coeff * base
                out = out + (term if sign > 0 else -term)
        return out

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        out = dict(self.values)
        for idx, p in other.values.items():
            s = out.get(idx)
            out[idx] = p if s is None else s + p
        return Cochain(self.bundle, self.degree, out)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def __neg__(self) -> "Cochain":
        return Cochain(
            self.bundle, self.degree, {i: -p for i, p in self.values.items()}
        )

    def _check(self, other: "Cochain") -> None:
        if self.bundle != other.bundle or self.degree != other.degree:
            raise DegreeError("cochain mismatch")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cochain)
            and self.bundle == other.bundle
            and self.degree == other.degree
            and self.values == other.values
        )

    def __repr__(self) -> str:
        return f"Cochain(degree={self.degree}, {format_cochain(self)})"


class KerCochain:
    """Kernel-valued k-cochain, stored as its flat (a (k+1)-cochain)."""

    __slots__ = ("flat",)

    def __init__(self, flat: Cochain):
        self.flat = flat

    @property
    def bundle(self) -> CourantBundle:
        return self.flat.bundle

    @property
    def degree(self) -> int:
        return self.flat.degree - 1

    @staticmethod
    def zero(bundle: CourantBundle, degree: int) -> "KerCochain":
        return KerCochain(Cochain.zero(bundle, degree + 1))

    def _raise(self, covector: List[Poly]) -> Section:
        """Solve <s, u_j> = covector_j with the inverse metric."""
        b = self.bundle
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

    def value_at(self, indices: Sequence[int]) -> Section:
        """Section value on a frame tuple."""
        b = self.bundle
        covector = [self.flat.value_at((*indices, j)) for j in range(b.rank)]
        return self._raise(covector)

    def eval_section_first(self, s: Section, rest: Sequence[int]) -> Section:
        b = self.bundle
        covector = [
            self.flat.eval_section_first(s, (*rest, j)) for j in range(b.rank)
        ]
        return self._raise(covector)

    def evaluate(self, sections: Sequence[Section]) -> Section:
        b = self.bundle
        covector = [
            self.flat.evaluate(list(sections) + [b.frame(j)]) for j in range(b.rank)
        ]
        return self._raise(covector)

    def __eq__(self, other) -> bool:
        return isinstance(other, KerCochain) and self.flat == other.flat


def pullback_form(bundle: CourantBundle, alpha: KForm) -> Cochain:
    """The cochain alpha(rho(.), ..., rho(.)); always killed by every D f."""
    k = alpha.degree
    rho_frames = [anchor_apply(bundle.frame(i)) for i in range(bundle.rank)]
    values = {}
    for idx in combinations(range(bundle.rank), k):
        values[idx] = evaluate(alpha, [rho_frames[i] for i in idx])
    return Cochain(bundle, k, values)


def section_covector(e: Section) -> Cochain:
    """A section viewed as the 1-cochain <e, .>."""
    b = e.bundle
    return Cochain(b, 1, {(j,): pairing(e, b.frame(j)) for j in range(b.rank)})


def contract_with_section(psi: Cochain, s: Section) -> Cochain:
    """Insert a section into the first slot: (i_s psi)(...) = psi(s, ...)."""
    if psi.degree == 0:
        raise DegreeError("cannot contract a degree-0 cochain")
    values = {}
    for rest in combinations(range(psi.bundle.rank), psi.degree - 1):
        values[rest] = psi.eval_section_first(s, rest)
    return Cochain(psi.bundle, psi.degree - 1, values)


class MembershipReport:
    def __init__(self, ok: bool, witnesses: List[str]):
        self.ok = ok
        self.witnesses = witnesses

    def __bool__(self) -> bool:
        return self.ok


def is_in_ckd(psi: Cochain) -> MembershipReport:
    """Contraction-membership: i_{D x_m} psi = 0 for every coordinate.

    D(fg) = f Dg + g Df together with Poly-linearity of contraction makes
    the coordinate functions sufficient.
    """
    if psi.degree == 0:
        return MembershipReport(True, [])
    b = psi.bundle
    witnesses = []
    for m in range(b.chart.dim):
        kappa = dee(b, Poly.var(b.chart, m))
        contracted = contract_with_section(psi, kappa)
        for idx, p in contracted.values.items():
            witnesses.append(
                f"i_D{b.chart.var_names[m]} psi at frames "
                f"{tuple(i + 1 for i in idx)} = {format_poly(p)}"
            )
    return MembershipReport(not witnesses, witnesses)


def cochain_sharp(psi: Cochain) -> KerCochain:
    """Lower a (k+1)-cochain to a kernel-valued k-cochain; requires membership."""
    if psi.degree < 1:
        raise DegreeError("sharp needs degree >= 1")
    member = is_in_ckd(psi)
    if not member.ok:
        raise MembershipError(member.witnesses[0])
    return KerCochain(psi)


def cochain_flat(phi: KerCochain) -> Cochain:
    """The stored flat; inverse of cochain_sharp by construction."""
    return phi.flat


def cobound_d(p: PreCourantAlgebroid, psi: Cochain) -> Cochain:
    """The coboundary extending D: anchor terms plus bracket insertions.

    D psi(e_1..e_{k+1}) = sum_i (-1)^{i+1} rho(e_i) psi(..no i..)
                        + sum_{i<j} (-1)^{i+j} psi(e_i o e_j, ..no i,j..)
    """
    member = is_in_ckd(psi)
    if not member.ok:
        raise MembershipError(member.witnesses[0])
    b = p.bundle
    k = psi.degree
    rho_frames = [anchor_apply(b.frame(i)) for i in range(b.rank)]
    values: Dict[FrameTuple, Poly] = {}
    for big in combinations(range(b.rank), k + 1):
        total = Poly.zero(b.chart)
        for t in range(k + 1):
            rest = big[:t] + big[t + 1 :]
            inner = psi.values.get(rest)
            if inner is not None:
                term = vf_apply(rho_frames[big[t]], inner)
                if not term.is_zero():
                    total = total + (term if t % 2 == 0 else -term)
        for s in range(k + 1):
            for t in range(s + 1, k + 1):
                rest = tuple(x for u, x in enumerate(big) if u != s and u != t)
                entry = p.table[big[s]][big[t]]
                if entry.is_zero():
                    continue
                term = psi.eval_section_first(entry, rest)
                if not term.is_zero():
                    # 1-based sign (-1)^{i+j} is (-1)^{s+t} on 0-based positions
                    total = total + (term if (s + t) % 2 == 0 else -term)
        if not total.is_zero():
            values[big] = total
    return Cochain(b, k + 1, values)


def partial_section_values(
    p: PreCourantAlgebroid, phi: KerCochain
) -> Dict[FrameTuple, Section]:
    """Covariant derivative values on increasing frame tuples.

    partial phi(e_1..e_{k+1}) = sum_{i<=k} (-1)^{i+1} e_i o phi(..no i..)
                              + (-1)^{k+1} phi(e_1..e_k) o e_{k+1}
                              + sum_{i<j} (-1)^{i+j} phi(e_i o e_j, ..no i,j..)
    """
    b = p.bundle
    k = phi.degree
    out: Dict[FrameTuple, Section] = {}
    for big in combinations(range(b.rank), k + 1):
        total = b.zero_section()
        # left actions on positions 0..k-1
        for t in range(k):
            rest = big[:t] + big[t + 1 :]
            inner = phi.value_at(rest)
            if not inner.is_zero():
                term = bracket(p, b.frame(big[t]), inner)
                total = total + (term if t % 2 == 0 else -term)
        # single right action on the last position, sign (-1)^{k+1}
        head = phi.value_at(big[:k])
        if not head.is_zero():
            term = bracket(p, head, b.frame(big[k]))
            total = total + (term if k % 2 == 1 else -term)
        # insertion terms
        for s in range(k + 1):
            for t in range(s + 1, k + 1):
                rest = tuple(x for u, x in enumerate(big) if u != s and u != t)
                entry = p.table[big[s]][big[t]]
                if entry.is_zero():
                    continue
                term = phi.eval_section_first(entry, rest)
                if not term.is_zero():
                    total = total + (term if (s + t) % 2 == 0 else -term)
        out[big] = total
    return out


def cobound_partial(p: PreCourantAlgebroid, phi: KerCochain) -> KerCochain:
    """Covariant derivative packaged as a kernel-valued cochain again."""
    b = p.bundle
    values = partial_section_values(p, phi)
    k = phi.degree
    flat_values: Dict[FrameTuple, Poly] = {}
    for big in combinations(range(b.rank), k + 2):
        head, last = big[:-1], big[-1]
        section = values.get(head)
        if section is None:
            continue
        v = pairing(section, b.frame(last))
        if not v.is_zero():
            flat_values[big] = v
    return KerCochain(Cochain(b, k + 2, flat_values))


def verify_comm_lemma(
    p: PreCourantAlgebroid, samples: Sequence[Cochain]
) -> VerifyReport:
    """Exact equality D psi = (partial sharp(psi))-flat on every frame tuple."""
    report = VerifyReport("commutation of D with the covariant derivative")
    for n, psi in enumerate(samples):
        member = is_in_ckd(psi)
        if not report.require(f"sample-{n + 1}-membership", member.ok,
                              member.witnesses[0] if member.witnesses else ""):
            continue
        lhs = cobound_d(p, psi)
        rhs = cobound_partial(p, cochain_sharp(psi)).flat
        ok = lhs == rhs
        witness = ""
        if not ok:
            for idx in sorted(set(lhs.values) | set(rhs.values)):
                a = lhs.value_at(idx)
                bb = rhs.value_at(idx)
                if a != bb:
                    witness = (
                        f"frames {tuple(i + 1 for i in idx)}: D side = "
                        f"{format_poly(a)}, partial side = {format_poly(bb)}"
                    )
                    break
        report.add(f"sample-{n + 1}-equal", ok, witness)
    return report


def jacobiator_flat(p: PreCourantAlgebroid) -> Cochain:
    """The 4-cochain <J(u_a, u_b, u_c), u_d> on increasing frame tuples.

    Only meaningful once total alternation has been verified.
    """
    b = p.bundle
    values: Dict[FrameTuple, Poly] = {}
    cache: Dict[FrameTuple, Section] = {}
    for triple in combinations(range(b.rank), 3):
        cache[triple] = jacobiator(
            p, b.frame(triple[0]), b.frame(triple[1]), b.frame(triple[2])
        )
    for quad in combinations(range(b.rank), 4):
        total = pairing(cache[quad[:3]], b.frame(quad[3]))
        if not total.is_zero():
            values[quad] = total
    return Cochain(b, 4, values)


def jacobiator_kercochain(p: PreCourantAlgebroid) -> KerCochain:
    return KerCochain(jacobiator_flat(p))


def verify_jacobiator_theorem(
    p: PreCourantAlgebroid,
    trials: int = 16,
    seed: int = 0,
    max_degree: int = 2,
    precheck: bool = True,
) -> VerifyReport:
    """The full Jacobiator theorem: skewness, tensoriality, kernel values,
    total alternation of the flat, D-annihilation, and partial J = 0."""
    from .algebroid import verify_axioms

    report = VerifyReport("jacobiator theorem suite")
    if precheck:
        axioms = verify_axioms(p, trials=min(trials, 4), seed=seed, max_degree=1)
        if not axioms.ok:
            fail = axioms.first_failure()
            report.add(
                "precondition-axioms", False,
                f"{fail.name}: {fail.witness}" if fail else "axioms failed",
            )
            report.skipped = True
            report.notes.append("theorem suite skipped: axioms do not hold")
            return report
        report.add("precondition-axioms", True)
    b = p.bundle
    r = b.rank
    frames = b.frames()

    jcache: Dict[FrameTuple, Section] = {}

    def jval(i: int, j: int, k: int) -> Section:
        key = (i, j, k)
        if key not in jcache:
            jcache[key] = jacobiator(p, frames[i], frames[j], frames[k])
        return jcache[key]

    # (1) skew-symmetry on frame triples (adjacent swaps + repeated arguments)
    ok, witness = True, ""
    for i, j, k in combinations(range(r), 3):
        base = jval(i, j, k)
        if (jval(j, i, k) + base).is_zero() and (jval(i, k, j) + base).is_zero():
            continue
        ok, witness = False, f"frames ({i + 1},{j + 1},{k + 1})"
        break
    if ok:
        for i in range(r):
            for j in range(r):
                if not (
                    jval(i, i, j).is_zero()
                    and jval(i, j, j).is_zero()
                    and jval(i, j, i).is_zero()
                ):
                    ok, witness = False, f"repeated frames ({i + 1},{j + 1})"
                    break
            if not ok:
                break
    report.add("skew-symmetric", ok, witness)

    # (2) tensoriality under function multiplication in the first slot
    rng = random.Random(seed)
    ok, witness = True, ""
    for _ in range(trials):
        f = random_poly(rng, b.chart, max_degree)
        e1 = random_section(rng, b, max_degree)
        e2 = random_section(rng, b, max_degree)
        e3 = random_section(rng, b, max_degree)
        lhs = jacobiator(p, e1.scale(f), e2, e3)
        rhs = jacobiator(p, e1, e2, e3).scale(f)
        if lhs != rhs:
            ok = False
            witness = f"f = {format_poly(f)}"
            break
    report.add("tensorial", ok, witness)

    # (3) values in the kernel of the anchor
    ok, witness = True, ""
    for i, j, k in combinations(range(r), 3):
        if not anchor_apply(jval(i, j, k)).is_zero():
            ok, witness = False, f"frames ({i + 1},{j + 1},{k + 1})"
            break
    report.add("kernel-valued", ok, witness)

    # (4) total alternation of <J(.,.,.), .> on frame quadruples
    ok, witness = True, ""
    for i, j, k, l in combinations(range(r), 4):
        a = pairing(jval(i, j, k), frames[l])
        bb = pairing(jval(i, j, l), frames[k])
        if not (a + bb).is_zero():
            ok, witness = False, f"frames ({i + 1},{j + 1},{k + 1},{l + 1})"
            break
    if ok:
        for i, j, k in combinations(range(r), 3):
            jv = jval(i, j, k)
            if not all(pairing(jv, frames[x]).is_zero() for x in (i, j, k)):
                ok, witness = False, f"frames ({i + 1},{j + 1},{k + 1}) self-pairing"
                break
    report.add("flat-alternating", ok, witness)

    # (5) J(D x_m, ., .) = 0
    ok, witness = True, ""
    for m in range(b.chart.dim):
        km = dee(b, Poly.var(b.chart, m))
        for i in range(r):
            for j in range(i, r):
                if not jacobiator(p, km, frames[i], frames[j]).is_zero():
                    ok = False
                    witness = f"D{b.chart.var_names[m]}, frames ({i + 1},{j + 1})"
                    break
            if not ok:
                break
        if not ok:
            break
    report.add("derivative-slot-vanishes", ok, witness)

    if not report.ok:
        report.notes.append("flat checks skipped: prerequisites failed")
        return report

    # storage of the flat is sound now that (1) and (4) hold
    jflat = jacobiator_flat(p)
    member = is_in_ckd(jflat)
    report.add(
        "flat-membership", member.ok, member.witnesses[0] if member.witnesses else ""
    )

    # (6) partial J = 0 on frame quadruples
    jker = KerCochain(jflat)
    values = partial_section_values(p, jker)
    ok, witness = True, ""
    for idx, section in sorted(values.items()):
        if not section.is_zero():
            ok = False
            witness = (
                f"frames {tuple(i + 1 for i in idx)}: partial J = "
                f"({format_section(section)})"
            )
            break
    report.add("partial-j-zero", ok, witness)

    # equivalent flat statement D(J-flat) = 0
    dflat = cobound_d(p, jflat)
    ok, witness = True, ""
    if not dflat.is_zero():
        idx = sorted(dflat.values)[0]
        ok = False
        witness = (
            f"frames {tuple(i + 1 for i in idx)}: D(J-flat) = "
            f"{format_poly(dflat.values[idx])}"
        )
    report.add("d-jflat-zero", ok, witness)
    return report


def format_cochain(psi: Cochain) -> str:
    if psi.is_zero():
        return "0"
    parts = []
    for idx in sorted(psi.values):
        label = ",".join(str(i + 1) for i in idx)
        parts.append(f"[{label}] {format_poly(psi.values[idx])}")
    return "; ".join(parts)

"""Task orchestration over a parsed manifest, with deterministic reports.

Tasks run in the requested order.  A failed bundle validation or axiom
check closes the gate: every later mathematical task is reported as
skipped-precondition rather than executed against a structure that is not
a pre-Courant algebroid.  Reports never embed wall-clock data; timing goes
to stderr so that two runs with one seed are byte-identical.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import __version__
from .algebroid import (
    PreCourantAlgebroid,
    verify_axioms,
    verify_derived_identities,
    zero_table,
)
from .bundle import (
    CourantBundle,
    Section,
    kernel_coisotropy_check,
    standard_bundle,
    validate_bundle,
)
from .cochain import pullback_form, verify_comm_lemma, verify_jacobiator_theorem
from .construct import (
    DissectionData,
    QuadraticLieAlgebra,
    TwistedAction,
    dissection_jacobiator_check,
    dissection_pontryagin,
    double,
    from_connection_beta,
    from_dissection,
    from_twisted_action,
    make_twisted_action,
    quadratic_lie_algebra,
    validate_lie,
    validate_quadratic_lie,
    validate_twisted_action,
)
from .deform import (
    apply_deformation,
    bfield_verify,
    default_kernel_generators,
    naive_cohomology_check,
    pontryagin_representative,
    pontryagin_vanishing_check,
    quotient_jacobi_check,
    twist_deformation,
    validate_deformation,
    verify_deformation_identity,
)
from .errors import ConstructionError, PrecourantError
from .exterior import format_kform
from .manifest import Manifest
from .poly import Poly
from .reports import VerifyReport
from .sampling import random_form
from .twoterm import (
    build_leibniz2,
    build_lie2,
    deformation_morphism,
    verify_leibniz2,
    verify_lie2,
    verify_morphism,
)

GATED_TASKS = {
    "verify-axioms",
    "verify-identities",
    "jacobiator-theorem",
    "comm-lemma",
    "leibniz2",
    "lie2",
    "deform",
    "bfield",
    "pontryagin",
    "pontryagin-vanishing",
    "naive-cohomology",
    "quotient-jacobi",
    "dissection-jacobiator",
    "dissection-pontryagin",
}

GATE_SETTERS = {"validate-bundle", "verify-axioms", "validate-algebra", "validate-action"}


@dataclass
class TaskResult:
    name: str
    status: str  # pass | fail | skipped-precondition
    failures: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)


@dataclass
class RunReport:
    manifest: str
    seed: int
    trials: int
    max_degree: int
    tasks: List[TaskResult] = field(default_factory=list)
    build_error: str = ""

    @property
    def ok(self) -> bool:
        return not self.build_error and all(t.status == "pass" for t in self.tasks)

    def to_text(self) -> str:
        lines = [
            "precourant-report",
            f"version = {__version__}",
            f"manifest = {self.manifest}",
            f"seed = {self.seed}",
            f"trials = {self.trials}",
            f"max-degree = {self.max_degree}",
        ]
        if self.build_error:
            lines.append(f"build = fail: {self.build_error}")
        for t in self.tasks:
            lines.append(f"task {t.name} = {t.status}")
            for f in t.failures:
                lines.append(f"  fail {f}")
            for n in t.notes:
                lines.append(f"  note {n}")
        lines.append(f"result = {'pass' if self.ok else 'fail'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "version": __version__,
            "manifest": self.manifest,
            "seed": self.seed,
            "trials": self.trials,
            "max_degree": self.max_degree,
            "build_error": self.build_error,
            "tasks": [
                {
                    "name": t.name,
                    "status": t.status,
                    "failures": t.failures,
                    "notes": t.notes,
                }
                for t in self.tasks
            ],
            "result": "pass" if self.ok else "fail",
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"


@dataclass
class BuildContext:
    manifest: Manifest
    bundle: CourantBundle
    algebroid: PreCourantAlgebroid
    algebra: Optional[QuadraticLieAlgebra] = None
    base_algebra: Optional[QuadraticLieAlgebra] = None
    action: Optional[TwistedAction] = None
    dissection: Optional[DissectionData] = None
    lift: Optional[List[Section]] = None
    complement: Optional[List[Section]] = None


def _algebra_from_manifest(m: Manifest) -> Tuple[QuadraticLieAlgebra, Optional[QuadraticLieAlgebra]]:
    base = quadratic_lie_algebra(m.algebra_dim, m.algebra_brackets, m.algebra_pairing)
    if m.algebra_double:
        return double(base), base
    return base, None


def build_context(m: Manifest) -> BuildContext:
    chart = m.chart
    algebra = base_algebra = action = dissection = None

    if m.bracket_entries is not None:
        bundle = CourantBundle(chart, m.rank, m.metric, m.anchor)
        table = zero_table(bundle)
        for (i, j), coeffs in m.bracket_entries.items():
            table[i][j] = bundle.section(coeffs)
        algebroid = PreCourantAlgebroid(bundle, table)
    elif m.builder_kind == "standard":
        bundle = standard_bundle(chart)
        algebroid = PreCourantAlgebroid(bundle, zero_table(bundle))
    elif m.builder_kind == "twisted_exact":
        bundle = standard_bundle(chart)
        base = PreCourantAlgebroid(bundle, zero_table(bundle))
        algebroid = apply_deformation(
            base, twist_deformation(bundle, m.builder_h), validate=False
        )
    elif m.builder_kind == "connection_beta":
        bundle = CourantBundle(chart, m.rank, m.metric, m.anchor)
        r, n = bundle.rank, chart.dim
        zero = Poly.zero(chart)
        gamma = [[[zero] * r for _ in range(r)] for _ in range(n)]
        for (mm, a), coeffs in m.gamma_entries.items():
            for bb in range(r):
                gamma[mm][bb][a] = coeffs[bb]
        zsec = bundle.zero_section()
        beta = [[zsec for _ in range(r)] for _ in range(r)]
        for (i, j), coeffs in m.beta_entries.items():
            s = bundle.section(coeffs)
            beta[i][j] = s
            if (j, i) not in m.beta_entries:
                beta[j][i] = -s
        algebroid = from_connection_beta(bundle, gamma, beta)
    elif m.builder_kind == "twisted_action":
        algebra, base_algebra = _algebra_from_manifest(m)
        points = m.points or [tuple(0 for _ in range(chart.dim))]
        action = make_twisted_action(algebra, chart, m.action_rho, m.action_k, points)
        algebroid = from_twisted_action(action)
        bundle = algebroid.bundle
    elif m.builder_kind == "dissection":
        n, g = chart.dim, m.aux_rank
        zero = Poly.zero(chart)
        gamma = [[[zero] * g for _ in range(g)] for _ in range(n)]
        for (mm, row), coeffs in m.diss_gamma.items():
            gamma[mm][row] = list(coeffs)
        curvature = {}
        for (i, j), coeffs in m.diss_r.items():
            if i >= j:
                raise ConstructionError(
                    "curvature-key-order", f"use increasing indices, got ({i + 1},{j + 1})"
                )
            curvature[(i, j)] = list(coeffs)
        fiber = {}
        for (i, j), coeffs in m.diss_gbracket.items():
            if i >= j:
                raise ConstructionError(
                    "fiber-key-order", f"use increasing indices, got ({i + 1},{j + 1})"
                )
            fiber[(i, j)] = list(coeffs)
        from .exterior import KForm

        dissection = DissectionData(
            chart=chart,
            aux_rank=g,
            aux_pairing=m.aux_pairing,
            gamma=gamma,
            curvature=curvature,
            psi=m.diss_psi if m.diss_psi is not None else KForm.zero(chart, 3),
            fiber_table=fiber,
        )
        algebroid = from_dissection(dissection)
        bundle = algebroid.bundle
    else:
        raise ConstructionError("unknown-builder", str(m.builder_kind))

    ctx = BuildContext(
        manifest=m,
        bundle=bundle,
        algebroid=algebroid,
        algebra=algebra,
        base_algebra=base_algebra,
        action=action,
        dissection=dissection,
    )
    if m.lift is not None:
        ctx.lift = [bundle.section(coeffs) for coeffs in m.lift]
    if m.complement is not None:
        ctx.complement = [bundle.section(coeffs) for coeffs in m.complement]
    return ctx


def _result_from_report(name: str, report: VerifyReport) -> TaskResult:
    if report.skipped:
        status = "skipped-precondition"
    else:
        status = "pass" if report.ok else "fail"
    failures = [
        f"{c.name}" + (f": {c.witness}" if c.witness else "")
        for c in report.checks
        if not c.ok
    ]
    return TaskResult(name, status, failures, list(report.notes))


def _run_task(name: str, ctx: BuildContext) -> TaskResult:
    m = ctx.manifest
    p = ctx.algebroid
    b = ctx.bundle
    seed, trials, deg = m.seed, m.trials, m.max_degree

    if name == "validate-bundle":
        rep = validate_bundle(b)
        result = TaskResult(name, "pass" if rep.ok else "fail", list(rep.failures))
        return result

    if name == "coisotropy":
        rep = kernel_coisotropy_check(b, m.points)
        failures = [
            f"point {tuple(map(str, r.point))}: {r.witness}"
            for r in rep.points
            if not r.ok
        ]
        notes = [
            f"point {tuple(map(str, r.point))}: anchor rank {r.anchor_rank}"
            for r in rep.points
        ]
        return TaskResult(name, "pass" if rep.ok else "fail", failures, notes)

    if name == "verify-axioms":
        return _result_from_report(name, verify_axioms(p, trials, seed, deg))

    if name == "verify-identities":
        return _result_from_report(name, verify_derived_identities(p, trials, seed, deg))

    if name == "jacobiator-theorem":
        return _result_from_report(
            name, verify_jacobiator_theorem(p, trials, seed, deg)
        )

    if name == "comm-lemma":
        rng = random.Random(seed)
        samples = [pullback_form(b, random_form(rng, b.chart, 2)) for _ in range(min(trials, 8))]
        return _result_from_report(name, verify_comm_lemma(p, samples))

    if name == "leibniz2":
        alg = build_leibniz2(p)
        return _result_from_report(name, verify_leibniz2(alg, trials, seed, deg))

    if name == "lie2":
        alg = build_lie2(p)
        return _result_from_report(
            name, verify_lie2(alg, trials, seed, deg, quad_trials=min(trials, 8))
        )

    if name == "deform":
        omega = twist_deformation(b, m.deform_h)
        rep = validate_deformation(p, omega)
        combined = VerifyReport("deform")
        combined.merge(rep, prefix="valid/")
        if rep.ok:
            combined.merge(
                verify_deformation_identity(p, omega, trials, seed, deg), prefix="identity/"
            )
            deformed = apply_deformation(p, omega, validate=False)
            morph = deformation_morphism(
                build_leibniz2(p), build_leibniz2(deformed), omega
            )
            combined.merge(verify_morphism(morph, trials, seed, deg), prefix="morphism/")
        return _result_from_report(name, combined)

    if name == "bfield":
        return _result_from_report(name, bfield_verify(p, m.bfield_beta, trials, seed, deg))

    if name == "pontryagin":
        form, rep = pontryagin_representative(p, ctx.lift)
        result = _result_from_report(name, rep)
        if form is not None:
            result.notes.append(f"H = {format_kform(form)}")
        return result

    if name == "pontryagin-vanishing":
        return _result_from_report(name, pontryagin_vanishing_check(p, m.pontryagin_h))

    if name == "naive-cohomology":
        rng = random.Random(seed)
        count = min(trials, 8)
        samples = [
            pullback_form(b, random_form(rng, b.chart, 2 if i % 2 == 0 else 1))
            for i in range(count)
        ]
        generators = default_kernel_generators(p, ctx.lift)
        return _result_from_report(name, naive_cohomology_check(p, samples, generators))

    if name == "quotient-jacobi":
        return _result_from_report(
            name, quotient_jacobi_check(p, ctx.complement, ctx.lift, trials, seed, deg)
        )

    if name == "validate-algebra":
        combined = VerifyReport("algebra")
        if ctx.base_algebra is not None:
            combined.merge(validate_lie(ctx.base_algebra), prefix="base/")
            combined.merge(validate_quadratic_lie(ctx.algebra), prefix="double/")
        elif ctx.algebra is not None:
            combined.merge(validate_quadratic_lie(ctx.algebra))
        else:
            combined.add("algebra-present", False, "manifest has no algebra block")
        return _result_from_report(name, combined)

    if name == "validate-action":
        return _result_from_report(name, validate_twisted_action(ctx.action))

    if name == "dissection-jacobiator":
        return _result_from_report(name, dissection_jacobiator_check(p, ctx.dissection))

    if name == "dissection-pontryagin":
        form, rep = dissection_pontryagin(p, ctx.dissection)
        result = _result_from_report(name, rep)
        result.notes.append(f"H = {format_kform(form)}")
        return result

    return TaskResult(name, "fail", [f"unknown task {name!r}"])


def run_manifest(
    m: Manifest,
    tasks: Optional[List[str]] = None,
    timings: Optional[List[Tuple[str, float]]] = None,
) -> RunReport:
    """Execute the manifest's tasks (or the given override list)."""
    import time

    todo = list(tasks) if tasks is not None else list(m.tasks)
    report = RunReport(m.name, m.seed, m.trials, m.max_degree)
    try:
        ctx = build_context(m)
    except (ConstructionError, PrecourantError) as exc:
        report.build_error = str(exc)
        report.tasks = [TaskResult(t, "skipped-precondition") for t in todo]
        return report

    gate_open = True
    for t in todo:
        if not gate_open and t in GATED_TASKS:
            report.tasks.append(TaskResult(t, "skipped-precondition"))
            continue
        t0 = time.monotonic()
        result = _run_task(t, ctx)
        if timings is not None:
            timings.append((t, time.monotonic() - t0))
        report.tasks.append(result)
        if result.status != "pass" and t in GATE_SETTERS:
            gate_open = False
    return report

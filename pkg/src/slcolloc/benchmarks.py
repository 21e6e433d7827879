"""Reference benchmarks: default plans, tolerances and scoring for the built-in problems."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .discretize import CHEBYSHEV, SINC, DiscretizationPlan
from .eigen import Spectrum, coeff_decay_report, solve, spectrum_partition
from .errors import NotApplicableError, NotFound, SLError
from .problems import FACTORIES, LEFT, RIGHT, SLProblem, classify_hard, get_problem

PLAN_FIELDS = frozenset(f.name for f in fields(DiscretizationPlan))


@dataclass(frozen=True)
class BenchmarkRun:
    """One discretization of a case and the reference column it is scored against.

    `column` is "values" (the problem's primary reference) or "printed"
    together with a provenance prefix selecting the printed column.
    """

    label: str
    plan: DiscretizationPlan
    column: str = "values"
    provenance_prefix: str = ""
    tolerance: Optional[float] = None


@dataclass(frozen=True)
class BenchmarkCase:
    name: str
    runs: tuple
    tolerance: float
    params: dict = field(default_factory=dict)
    # per-index overrides: index -> (tolerance, absolute?)
    index_tolerances: dict = field(default_factory=dict)
    # tolerance for a parameter variant, keyed by (param, value)
    variant_tolerances: dict = field(default_factory=dict)
    closed_form_count: int = 0
    sqrt_scale: bool = False
    description: str = ""


@dataclass(frozen=True)
class ScoreEntry:
    run: str
    index: int
    computed: float
    reference: float
    error: float
    tolerance: float
    absolute: bool
    passed: bool
    provenance: str

    def as_dict(self):
        return {
            "run": self.run, "index": self.index, "computed": self.computed, "reference": self.reference,
            "error": self.error, "tolerance": self.tolerance, "absolute": self.absolute,
            "passed": self.passed, "provenance": self.provenance,
        }


@dataclass
class ScoreCard:
    name: str
    entries: list
    passed: bool
    wall_time: float
    plans: dict
    notes: list = field(default_factory=list)
    hardness: list = field(default_factory=list)
    error: Optional[str] = None
    spectra: dict = field(default_factory=dict, repr=False, compare=False)

    def max_error(self, run: Optional[str] = None) -> float:
        errs = [e.error for e in self.entries if run is None or e.run == run]
        return max(errs) if errs else math.nan

    def as_dict(self):
        return {
            "name": self.name, "passed": self.passed, "wall_time": self.wall_time,
            "plans": self.plans, "entries": [e.as_dict() for e in self.entries],
            "notes": list(self.notes), "hardness": list(self.hardness), "error": self.error,
        }


CASES = {
    "legendre": BenchmarkCase(
        "legendre", (BenchmarkRun("chebyshev", DiscretizationPlan(n=128)),), tolerance=1e-9,
        closed_form_count=10, description="first ten eigenvalues against n(n+1)+1/4",
    ),
    "latzko_fichera": BenchmarkCase(
        "latzko_fichera", (BenchmarkRun("chebyshev", DiscretizationPlan(n=128)),), tolerance=1e-6,
    ),
    "rod": BenchmarkCase("rod", (BenchmarkRun("chebyshev", DiscretizationPlan(n=128)),), tolerance=1e-6),
    "boyd": BenchmarkCase(
        "boyd",
        (
            BenchmarkRun("chebyshev", DiscretizationPlan(n=1024)),
            BenchmarkRun("sinc", DiscretizationPlan(method=SINC, n=500, h=0.1),
                         column="printed", provenance_prefix="Boyd table, SiC column", tolerance=1e-3),
        ),
        tolerance=1e-2,
    ),
    "fokker_planck": BenchmarkCase(
        "fokker_planck", (BenchmarkRun("chebyshev", DiscretizationPlan(n=512)),), tolerance=1e-6,
        params={"length": 4.0}, index_tolerances={0: (1e-10, True)},
    ),
    "dunford_schwartz": BenchmarkCase(
        "dunford_schwartz", (BenchmarkRun("chebyshev", DiscretizationPlan(n=1024)),), tolerance=1e-2,
        params={"eps": 1e-8, "X": 15.0},
    ),
    "nasty": BenchmarkCase("nasty", (BenchmarkRun("chebyshev", DiscretizationPlan(n=512)),), tolerance=1e-6),
    "bessel": BenchmarkCase(
        "bessel", (BenchmarkRun("chebyshev", DiscretizationPlan(n=1024)),), tolerance=1e-4,
        params={"nu": 0.0}, sqrt_scale=True, description="sqrt(lambda) against zeros of J_nu",
    ),
    "bessel_generalized": BenchmarkCase(
        "bessel_generalized", (BenchmarkRun("chebyshev", DiscretizationPlan(n=2048)),), tolerance=1e-3,
        params={"tau_": 0.0, "nu": 1.0 / 3.0}, variant_tolerances={("tau_", 0.25): 1e-6},
    ),
}

assert tuple(CASES) == tuple(FACTORIES)

# problem parameter that plays the role of a truncation length
LENGTH_PARAMETERS = {"fokker_planck": "length", "dunford_schwartz": "X", "nasty": "b"}


def length_parameter(name: str) -> str:
    if name not in FACTORIES:
        raise NotFound(f"unknown problem {name!r}")
    try:
        return LENGTH_PARAMETERS[name]
    except KeyError:
        raise NotApplicableError(f"{name} has no truncation length parameter") from None


def case_names() -> list:
    return list(CASES)


def get_case(name: str) -> BenchmarkCase:
    try:
        return CASES[name]
    except KeyError:
        raise NotFound(f"unknown benchmark {name!r}; known: {', '.join(CASES)}") from None


def _split_overrides(case: BenchmarkCase, overrides: Optional[dict]):
    """Separate plan fields, problem parameters and an optional tolerance."""
    plan_kw, params, tol = {}, dict(case.params), None
    for key, value in (overrides or {}).items():
        if key == "tolerance":
            tol = float(value)
        elif key in PLAN_FIELDS:
            plan_kw[key] = value
        else:
            params[key] = value
    return plan_kw, params, tol


def _checks(problem: SLProblem, case: BenchmarkCase, run: BenchmarkRun):
    """Reference entries (index, value, provenance) for one run."""
    ref = problem.reference
    if ref is None:
        return []
    if run.column == "printed":
        return [v for v in ref.printed if v[2].startswith(run.provenance_prefix)]
    checks = list(ref.values)
    if case.closed_form_count and ref.closed_form is not None:
        have = {i for i, _, _ in checks}
        checks += [(n, float(ref.closed_form(n)), "closed form") for n in range(case.closed_form_count) if n not in have]
        checks.sort(key=lambda c: c[0])
    return checks


def _score(spectrum: Spectrum, checks, run_label: str, tol: float, case: BenchmarkCase):
    entries = []
    lam = spectrum.eigenvalues
    for index, ref, prov in checks:
        t, absolute = case.index_tolerances.get(index, (tol, False))
        if index >= lam.shape[0]:
            entries.append(ScoreEntry(run_label, index, math.nan, ref, math.inf, t, absolute, False, prov))
            continue
        computed, reference = float(lam[index]), float(ref)
        if case.sqrt_scale:
            computed, reference = math.sqrt(max(computed, 0.0)), math.sqrt(reference)
        if absolute or reference == 0.0:
            absolute = True
            err = abs(computed - reference)
        else:
            err = abs(computed - reference) / abs(reference)
        entries.append(ScoreEntry(run_label, index, computed, reference, err, t, absolute, bool(err <= t), prov))
    return entries


def _hardness(problem: SLProblem, spectrum: Spectrum, count: int = 3) -> list:
    out = []
    for j, lam in enumerate(spectrum.eigenvalues[:count]):
        for side in (LEFT, RIGHT):
            try:
                v = classify_hard(problem, float(lam), side)
            except SLError:
                continue
            out.append({"index": j, "lambda": float(lam), "endpoint": side, "hard": v.hard,
                        "tau_closest": float(v.tau_samples[-1])})
    return out


def _case_notes(name: str, problem: SLProblem, spectra: dict) -> list:
    notes = []
    cheb = spectra.get("chebyshev")
    if name == "boyd" and "sinc" in spectra and cheb is not None:
        k = min(6, len(cheb), len(spectra["sinc"]))
        a, b = cheb.eigenvalues[:k], spectra["sinc"].eigenvalues[:k]
        gap = float(np.max(np.abs(a - b) / np.abs(a)))
        notes.append(f"cross-method discrepancy: Chebyshev and sinc spectra differ by up to {gap:.3g} relative")
    if name == "nasty" and cheb is not None and len(cheb) > 23:
        pr = dict((i, v) for i, v, p in problem.reference.printed if "Pryce" in p)
        rel = abs(cheb.eigenvalues[23] - pr[23]) / pr[23]
        notes.append(f"Pryce lambda_23 = {pr[23]!r} differs from the computed value by {rel:.3g} relative (not matched)")
    if name == "bessel" and cheb is not None and problem.reference is not None:
        for i, v, _ in problem.reference.printed:
            if i < len(cheb):
                s = math.sqrt(cheb.eigenvalues[i])
                notes.append(f"listed value {v!r} at index {i} differs from sqrt(lambda) by {abs(v - s) / s:.3g} relative")
    if name == "dunford_schwartz" and cheb is not None:
        part = spectrum_partition(cheb, problem.reference)
        pos = part.tail[part.tail > 0]
        smallest = float(pos.min()) if pos.size else math.nan
        notes.append(f"matched {len(part.matched)} discrete eigenvalues; unmatched tail of {part.tail.size}, "
                     f"smallest positive {smallest:.6g}")
    if cheb is not None and cheb.coeff_decay.size:
        unresolved = [j for j, d in enumerate(coeff_decay_report(cheb)[:6]) if not d.resolved]
        if unresolved:
            notes.append(f"coefficient decay not resolved for vectors {unresolved}")
    return notes


def run_case(name: str, overrides: Optional[dict] = None) -> ScoreCard:
    """Assemble, solve and score one benchmark.

    `overrides` may hold plan fields (applied to the primary run), problem
    parameters, or "tolerance".
    """
    case = get_case(name)
    plan_kw, params, tol_override = _split_overrides(case, overrides)
    start = time.perf_counter()
    problem = get_problem(name, **params)
    tol = case.tolerance
    for (pname, pvalue), t in case.variant_tolerances.items():
        if params.get(pname) == pvalue:
            tol = t
    if tol_override is not None:
        tol = tol_override

    entries, spectra, plans, error = [], {}, {}, None
    for k, run in enumerate(case.runs):
        plan = run.plan
        if k == 0 and plan_kw:
            merged = {**plan.as_dict(), **plan_kw}
            if merged.get("method") == CHEBYSHEV:
                merged["h"] = None
            if merged.get("domain") is not None:
                merged["domain"] = tuple(merged["domain"])
            plan = DiscretizationPlan(**merged)
        plans[run.label] = plan.as_dict()
        checks = _checks(problem, case, run)
        count = max([c[0] for c in checks], default=-1) + 1
        try:
            spec = solve(problem, plan, count=max(count, 40))
        except SLError as exc:
            error = f"{run.label}: {type(exc).__name__}: {exc}"
            entries += [ScoreEntry(run.label, i, math.nan, v, math.inf, tol, False, False, p) for i, v, p in checks]
            continue
        spectra[run.label] = spec
        run_tol = run.tolerance if run.tolerance is not None else tol
        entries += _score(spec, checks, run.label, run_tol, case)

    notes = _case_notes(name, problem, spectra)
    if problem.reference is None or not entries:
        notes.append("no reference values for this configuration")
    hardness = _hardness(problem, spectra["chebyshev"]) if "chebyshev" in spectra else []
    wall = time.perf_counter() - start
    passed = bool(entries) and error is None and all(e.passed for e in entries)
    return ScoreCard(name, entries, passed, wall, plans, notes, hardness, error, spectra)


def run_all(filter: Optional[str] = None, max_workers: Optional[int] = None) -> list:
    """Score every registered case (optionally those whose problem has tag `filter`), in registry order."""
    names = case_names()
    if filter is not None:
        names = [n for n in names if filter in get_problem(n, **CASES[n].params).tags]
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(run_case, names))
    return [run_case(n) for n in names]

"""Dense pencil solves, spectrum filtering, drift, sweeps and decay diagnostics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as la
from scipy.interpolate import PchipInterpolator

from .discretize import CHEBYSHEV, DiscretizationPlan, Pencil, assemble, reinstate_boundary
from .errors import InvalidArgument, NumericalFailure, SLError
from .grid_diff import cheb_coeffs
from .problems import ReferenceSpectrum, SLProblem

INFINITE_TOL = 1e-10
DEFAULT_IMAG_TOL = 1e-8


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    residual_imag: np.ndarray
    vectors: np.ndarray
    nodes: np.ndarray
    coeff_decay: np.ndarray
    discarded_count: int
    residuals: np.ndarray
    method: str = CHEBYSHEV
    discarded: dict = field(default_factory=dict)

    def __len__(self):
        return self.eigenvalues.shape[0]


def _norm_inf(M):
    return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0


def _normalize(v):
    """Scale to unit max-norm with the first significant entry positive."""
    v = np.real_if_close(v, tol=1e6)
    if np.iscomplexobj(v):
        # rotate out a global phase before discarding the imaginary part
        k = int(np.argmax(np.abs(v)))
        v = (v * np.exp(-1j * np.angle(v[k]))).real
    peak = np.max(np.abs(v))
    if peak == 0:
        return v
    v = v / peak
    first = np.flatnonzero(np.abs(v) > 1e-8)[0]
    return v if v[first] > 0 else -v


def _diagonal(M):
    return np.count_nonzero(M - np.diag(np.diag(M))) == 0


WEIGHT_RANGE_MAX = 1e8


def _qz(A, B):
    ab, V = la.eig(A, B, homogeneous_eigvals=True)
    alpha, beta = ab
    na, nb = _norm_inf(A), _norm_inf(B)
    infinite = np.abs(beta) * na <= INFINITE_TOL * np.abs(alpha) * nb
    with np.errstate(all="ignore"):
        w = alpha / beta
    keep = ~infinite & np.isfinite(w)
    return w[keep], V[:, keep], int((~keep).sum())


def _raw_eigs(A, B):
    """Eigenvalues/vectors of A v = lambda B v plus the number of infinite ones removed.

    With diagonal B, rows of exactly zero weight are boundary constraints;
    their unknowns are condensed out as slaves of the rest.  What remains is
    solved as a standard eigenproblem when the weights are the identity or
    span at most WEIGHT_RANGE_MAX, and by QZ otherwise.
    """
    if not _diagonal(B):
        return _qz(A, B)
    m = A.shape[0]
    b = np.diag(B)
    zero = b == 0
    c_idx, f_idx = np.flatnonzero(zero), np.flatnonzero(~zero)
    if c_idx.size:
        Acf = A[np.ix_(c_idx, f_idx)]
        S = -np.linalg.solve(A[np.ix_(c_idx, c_idx)], Acf)
        Ared = A[np.ix_(f_idx, f_idx)] + A[np.ix_(f_idx, c_idx)] @ S
    else:
        S = None
        Ared = A
    bf = b[f_idx]
    absb = np.abs(bf)
    if np.all(bf == 1.0):
        w, Vf = la.eig(Ared)
        n_inf = 0
    elif absb.max() <= WEIGHT_RANGE_MAX * absb.min():
        w, Vf = la.eig(Ared / bf[:, None])
        n_inf = 0
    else:
        w, Vf, n_inf = _qz(Ared, np.diag(bf))
    if S is None:
        return w, Vf, n_inf
    V = np.zeros((m, Vf.shape[1]), dtype=Vf.dtype)
    V[f_idx] = Vf
    V[c_idx] = S @ Vf
    return w, V, n_inf + int(c_idx.size)


def solve_pencil(pencil: Pencil, imag_tol: float = DEFAULT_IMAG_TOL, count: Optional[int] = None,
                 lower_bound: Optional[float] = "pencil") -> Spectrum:
    """Solve the pencil, drop infinite/complex/spurious eigenvalues, sort ascending.

    An eigenvalue is kept when |Im lambda| <= imag_tol (1 + |Re lambda|).
    `lower_bound` (default: the problem's) discards eigenvalues below a
    known bound of the operator as spurious.
    """
    A, B = pencil.a_matrix, pencil.b_matrix
    if A.ndim != 2 or A.shape[0] != A.shape[1] or B.shape != A.shape:
        raise InvalidArgument(f"A and B must be square and of equal size, got {A.shape} and {B.shape}")
    m = A.shape[0]
    if count is not None and count > m:
        raise InvalidArgument(f"count {count} exceeds pencil size {m}")
    if lower_bound == "pencil":
        lower_bound = pencil.lower_bound
    try:
        w, V, n_inf = _raw_eigs(A, B)
    except (la.LinAlgError, ValueError) as exc:
        raise NumericalFailure(m, str(exc)) from exc
    if not np.all(np.isfinite(w)):
        bad = ~np.isfinite(w)
        n_inf += int(bad.sum())
        w, V = w[~bad], V[:, ~bad]

    im = np.abs(w.imag)
    real_ok = im <= imag_tol * (1.0 + np.abs(w.real))
    n_complex = int((~real_ok).sum())
    w, V, im = w[real_ok], V[:, real_ok], im[real_ok]
    lam = w.real
    n_spurious = 0
    if lower_bound is not None:
        ok = lam >= lower_bound - imag_tol * (1.0 + abs(lower_bound))
        n_spurious = int((~ok).sum())
        lam, V, im = lam[ok], V[:, ok], im[ok]

    order = np.argsort(lam, kind="stable")
    if count is not None:
        order = order[:count]
    lam, V, im = lam[order], V[:, order], im[order]

    na, nb = _norm_inf(A), _norm_inf(B)
    vecs = np.empty((pencil.n_full, lam.shape[0]))
    residuals = np.empty(lam.shape[0])
    for j in range(lam.shape[0]):
        v = _normalize(V[:, j])
        full = reinstate_boundary(v, pencil)
        vecs[:, j] = _normalize(full)
        scale = vecs[:, j][pencil.kept_indices]
        res = A @ scale - lam[j] * (B @ scale)
        residuals[j] = np.max(np.abs(res)) / (na + abs(lam[j]) * nb)

    if pencil.method == CHEBYSHEV and pencil.n_full >= 2 and lam.shape[0]:
        decay = np.abs(cheb_coeffs(vecs)).T
    else:
        # sinc coefficients are the nodal values
        decay = np.abs(vecs).T
    return Spectrum(
        eigenvalues=lam, residual_imag=im, vectors=vecs, nodes=pencil.full_nodes,
        coeff_decay=decay, discarded_count=n_inf + n_complex + n_spurious, residuals=residuals,
        method=pencil.method,
        discarded={"infinite": n_inf, "complex": n_complex, "below_bound": n_spurious},
    )


def solve(problem: SLProblem, plan: DiscretizationPlan, count: Optional[int] = None,
          imag_tol: float = DEFAULT_IMAG_TOL) -> Spectrum:
    """Assemble and solve in one call."""
    pencil = assemble(problem, plan)
    if count is not None:
        count = min(count, pencil.size)
    return solve_pencil(pencil, imag_tol=imag_tol, count=count)


# -- drift ---------------------------------------------------------------------


@dataclass
class DriftReport:
    alpha_name: str
    alpha1: float
    alpha2: float
    drifts: np.ndarray
    threshold: float
    good_indices: list
    absolute_flags: np.ndarray

    def as_dict(self):
        return {
            "alpha_name": self.alpha_name, "alpha1": self.alpha1, "alpha2": self.alpha2,
            "threshold": self.threshold, "drifts": [float(d) for d in self.drifts],
            "good_indices": [int(i) for i in self.good_indices],
            "absolute_flags": [bool(f) for f in self.absolute_flags],
        }


def _values(s):
    return s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s, dtype=float)


def relative_drift(s1, s2, alpha_name: str, alpha1, alpha2, threshold: float,
                   zero_tol: float = 1e-10) -> DriftReport:
    """|lambda_j(alpha1) - lambda_j(alpha2)| / |lambda_j(alpha1)| over the common index range.

    Where |lambda_j(alpha1)| <= zero_tol the absolute difference is reported
    instead and flagged.
    """
    l1, l2 = _values(s1), _values(s2)
    k = min(l1.shape[0], l2.shape[0])
    if k == 0:
        raise InvalidArgument("drift needs two non-empty spectra")
    l1, l2 = l1[:k], l2[:k]
    diff = np.abs(l1 - l2)
    flags = np.abs(l1) <= zero_tol
    drifts = np.where(flags, diff, diff / np.where(flags, 1.0, np.abs(l1)))
    good = [int(j) for j in np.flatnonzero(drifts <= threshold)]
    return DriftReport(alpha_name, alpha1, alpha2, drifts, float(threshold), good, flags)


# -- parameter sweeps ----------------------------------------------------------


@dataclass
class SweepResult:
    parameters: np.ndarray
    tracks: np.ndarray  # shape (len(parameters), track_count); NaN where a solve failed
    interpolants: list
    min_gap: float
    min_gap_parameter: float
    gaps: np.ndarray
    failures: dict

    def as_dict(self):
        return {
            "parameters": [float(t) for t in self.parameters],
            "tracks": [[None if not np.isfinite(v) else float(v) for v in row] for row in self.tracks],
            "gaps": [None if not np.isfinite(g) else float(g) for g in self.gaps],
            "min_gap": self.min_gap, "min_gap_parameter": self.min_gap_parameter,
            "failures": {str(k): v for k, v in self.failures.items()},
        }


def sweep(family: Callable[[float], SLProblem], tau_grid: Sequence[float], plan: DiscretizationPlan,
          track_count: int, max_workers: Optional[int] = None) -> SweepResult:
    """Solve the family at each parameter value and track eigenvalues by sorted index.

    Each track gets a shape-preserving piecewise cubic Hermite interpolant.
    min_gap is the smallest (lambda_1 - lambda_0)/|lambda_0| over the grid.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise InvalidArgument("parameter grid must be a non-empty vector")
    if np.any(np.diff(taus) <= 0):
        raise InvalidArgument("parameter grid must be strictly increasing")

    def one(t):
        try:
            spec = solve(family(t), plan, count=track_count)
            row = np.full(track_count, np.nan)
            row[: len(spec)] = spec.eigenvalues[:track_count]
            return row, None
        except SLError as exc:
            return np.full(track_count, np.nan), f"{type(exc).__name__}: {exc}"

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, taus))
    else:
        results = [one(t) for t in taus]

    tracks = np.vstack([r[0] for r in results])
    failures = {float(t): msg for t, (_, msg) in zip(taus, results) if msg is not None}

    interps = []
    for j in range(track_count):
        ok = np.isfinite(tracks[:, j])
        if ok.sum() >= 2:
            interps.append(PchipInterpolator(taus[ok], tracks[ok, j], extrapolate=False))
        else:
            interps.append(None)

    gaps = np.full(taus.size, np.nan)
    if track_count >= 2:
        with np.errstate(all="ignore"):
            gaps = (tracks[:, 1] - tracks[:, 0]) / np.abs(tracks[:, 0])
    if np.any(np.isfinite(gaps)):
        k = int(np.nanargmin(gaps))
        min_gap, min_tau = float(gaps[k]), float(taus[k])
    else:
        min_gap, min_tau = math.nan, math.nan
    return SweepResult(taus, tracks, interps, min_gap, min_tau, gaps, failures)


# -- diagnostics ---------------------------------------------------------------


@dataclass(frozen=True)
class DecaySummary:
    max_coeff: float
    plateau: float
    resolved: bool
    magnitudes: np.ndarray = field(repr=False, compare=False)


RESOLVED_RATIO = 1e-10


def coeff_decay_report(spectrum: Spectrum) -> list:
    """Max coefficient, plateau (median of the trailing 5%) and resolved flag per vector."""
    out = []
    for mags in spectrum.coeff_decay:
        mags = np.asarray(mags, dtype=float)
        tail = max(1, int(math.ceil(0.05 * mags.shape[0])))
        top = float(np.max(mags)) if mags.size else 0.0
        plateau = float(np.median(mags[-tail:])) if mags.size else 0.0
        out.append(DecaySummary(top, plateau, bool(plateau <= RESOLVED_RATIO * top), mags))
    return out


@dataclass
class Partition:
    matched: list  # (index, computed, reference)
    tail: np.ndarray
    tail_spacing: np.ndarray


def spectrum_partition(spectrum, reference: ReferenceSpectrum, rel_tol: float = 0.05) -> Partition:
    """Split a spectrum into values matching a reference (within rel_tol) and the rest.

    The unmatched remainder is what a discretization offers of a continuous
    spectrum; its spacing is reported alongside.
    """
    lam = _values(spectrum)
    if reference.values:
        refs = [(i, v) for i, v, _ in reference.values]
    elif reference.closed_form is not None:
        refs = [(i, float(reference.closed_form(i))) for i in range(lam.shape[0])]
    else:
        refs = []
    used = set()
    matched = []
    unmatched = []
    for j, value in enumerate(lam):
        best = None
        for i, ref in refs:
            if i in used:
                continue
            err = abs(value - ref) / abs(ref) if ref != 0 else abs(value)
            if err <= rel_tol and (best is None or err < best[0]):
                best = (err, i, ref)
        if best is None:
            unmatched.append(value)
        else:
            used.add(best[1])
            matched.append((best[1], float(value), best[2]))
    tail = np.array(unmatched, dtype=float)
    return Partition(matched, tail, np.diff(tail))

"""Assemble the collocation pencil (A, B) for a Sturm-Liouville problem.

Chebyshev collocation uses the expanded operator

    A = -diag(m p) D2 - diag(m p') D1 + diag(m q),   B = diag(m r)

with p' = D1 p.  Boundary conditions are enforced per endpoint:

remove             delete the boundary row and column (u = 0 there)
replace_row        overwrite the row with f u + g u'; the B row becomes zero
collocate_endpoint keep the degenerate equation at an endpoint where p = 0

Node 0 is the right endpoint; node n-1 the left one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateBCError, InvalidArgument, NotDegenerateError, SingularNodeError
from .grid_diff import AffineMap, ChebGrid, SincGrid, cheb_diff, map_matrices, sinc_grid
from .problems import (
    LEFT,
    RIGHT,
    Dirichlet,
    EndpointCollocation,
    LimitForm,
    Robin,
    SLProblem,
    TruncatedDirichlet,
)

CHEBYSHEV, SINC = "chebyshev", "sinc"
REMOVE, REPLACE_ROW, COLLOCATE = "remove", "replace_row", "collocate_endpoint"
STRATEGIES = (REMOVE, REPLACE_ROW, COLLOCATE)
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class DiscretizationPlan:
    """How to discretize a problem.

    For Chebyshev plans `n` is the number of CGL points.  For sinc plans `n`
    is the total number of sinc nodes and `h` the step; the nodes are
    centred on `center` and `domain` is their span.
    """

    method: str = CHEBYSHEV
    n: int = 64
    h: Optional[float] = None
    domain: Optional[tuple] = None
    bc_strategy_left: Optional[str] = None
    bc_strategy_right: Optional[str] = None
    center: float = 0.0

    def __post_init__(self):
        if self.method not in (CHEBYSHEV, SINC):
            raise InvalidArgument(f"unknown method {self.method!r}")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"resolution must be an integer >= 2, got {self.n}")
        for s in (self.bc_strategy_left, self.bc_strategy_right):
            if s is not None and s not in STRATEGIES:
                raise InvalidArgument(f"unknown boundary strategy {s!r}")
        if self.method == SINC:
            if self.h is None or not self.h > 0:
                raise InvalidArgument("sinc plans need a positive step h")
            if {self.bc_strategy_left, self.bc_strategy_right} - {None, REMOVE}:
                raise InvalidArgument("sinc plans only support implicit Dirichlet truncation")
        elif self.h is not None:
            raise InvalidArgument("step h only applies to sinc plans")
        if self.domain is not None:
            a, b = self.domain
            if not (np.isfinite(a) and np.isfinite(b) and a < b):
                raise InvalidArgument(f"domain must be a finite interval a < b, got {self.domain}")

    def sinc_span(self) -> tuple:
        half = (self.n - 1) / 2.0 * self.h
        return (self.center - half, self.center + half)

    def as_dict(self) -> dict:
        return {
            "method": self.method, "n": int(self.n), "h": self.h,
            "domain": None if self.domain is None else [float(v) for v in self.domain],
            "bc_strategy_left": self.bc_strategy_left, "bc_strategy_right": self.bc_strategy_right,
            "center": self.center,
        }


@dataclass(frozen=True)
class Pencil:
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    interior_nodes: np.ndarray
    full_nodes: np.ndarray
    kept_indices: np.ndarray
    removed_indices: tuple
    replaced_rows: tuple = ()
    method: str = CHEBYSHEV
    plan: Optional[DiscretizationPlan] = None
    strategies: dict = field(default_factory=dict)
    lower_bound: Optional[float] = None

    @property
    def size(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def n_full(self) -> int:
        return self.full_nodes.shape[0]


@dataclass(frozen=True)
class EndpointRow:
    """Degenerate-equation row at an endpoint where p vanishes."""

    index: int
    a_row: np.ndarray
    b_row: np.ndarray
    p_prime: float
    q_value: float
    r_value: float


def default_strategy(problem: SLProblem, side: str, domain: tuple) -> str:
    """Pick a boundary strategy from the boundary condition and the domain."""
    bc = problem.bc(side)
    end = problem.a if side == LEFT else problem.b
    at_true_end = (domain[0] if side == LEFT else domain[1]) == end
    if isinstance(bc, (Dirichlet, TruncatedDirichlet)):
        return REMOVE
    if isinstance(bc, EndpointCollocation):
        return COLLOCATE
    if isinstance(bc, LimitForm) and at_true_end:
        with np.errstate(all="ignore"):
            pe = float(np.asarray(problem.p(np.array([end])))[0])
        if abs(pe) <= DEGENERATE_TOL:
            return COLLOCATE
    return REPLACE_ROW


def _eval(name, func, x):
    with np.errstate(all="ignore"):
        v = np.asarray(func(x), dtype=float)
    v = np.broadcast_to(v, np.shape(x)).astype(float)
    bad = ~np.isfinite(v)
    if bad.any():
        i = int(np.argmax(bad))
        raise SingularNodeError(name, float(np.asarray(x)[i]), float(v[i]))
    return v


def _chebyshev_grid(n: int, domain: tuple) -> ChebGrid:
    return map_matrices(cheb_diff(n, 2), AffineMap(*domain))


def endpoint_expand(problem: SLProblem, endpoint: str, grid: Optional[ChebGrid] = None, n: int = 64) -> EndpointRow:
    """Collocation row of the degenerate equation -p'(e) u'(e) + q(e) u(e) = lambda r(e) u(e).

    Valid where p(e) = 0.  The grid defaults to n CGL points on the problem's
    interval; p'(e) is the spectral derivative of the sampled p.
    """
    if endpoint not in (LEFT, RIGHT):
        raise InvalidArgument(f"endpoint must be 'left' or 'right', got {endpoint!r}")
    if grid is None:
        grid = _chebyshev_grid(n, problem.effective_domain())
    idx = grid.n_points - 1 if endpoint == LEFT else 0
    e = grid.nodes[idx]
    pv = _eval("p", problem.p, grid.nodes)
    if abs(pv[idx]) > DEGENERATE_TOL:
        raise NotDegenerateError(f"p({e!r}) = {pv[idx]!r} is not zero; the endpoint is not degenerate")
    dp = float(grid.d1[idx] @ pv)
    if not np.isfinite(dp):
        raise NotDegenerateError(f"p'({e!r}) is not finite")
    q_e = float(_eval("q", problem.q, np.array([e]))[0])
    r_e = float(_eval("r", problem.r, np.array([e]))[0])
    unit = np.zeros(grid.n_points)
    unit[idx] = 1.0
    a_row = -dp * grid.d1[idx] + q_e * unit
    return EndpointRow(index=idx, a_row=a_row, b_row=r_e * unit, p_prime=dp, q_value=q_e, r_value=r_e)


def resolve_plan(problem: SLProblem, plan: DiscretizationPlan) -> DiscretizationPlan:
    """Fill in domain and boundary strategies left open in the plan."""
    if plan.method == SINC:
        domain = plan.sinc_span()
        return DiscretizationPlan(SINC, plan.n, plan.h, domain, REMOVE, REMOVE, plan.center)
    domain = plan.domain if plan.domain is not None else problem.effective_domain()
    if not (problem.a <= domain[0] < domain[1] <= problem.b):
        raise InvalidArgument(f"domain {domain} lies outside the problem interval ({problem.a}, {problem.b})")
    left = plan.bc_strategy_left or default_strategy(problem, LEFT, domain)
    right = plan.bc_strategy_right or default_strategy(problem, RIGHT, domain)
    return DiscretizationPlan(CHEBYSHEV, plan.n, None, tuple(float(v) for v in domain), left, right)


def _boundary_row(problem, side, grid, idx):
    bc = problem.bc(side)
    if isinstance(bc, (Robin, LimitForm)):
        f, g = bc.row_functions()
    elif isinstance(bc, (Dirichlet, TruncatedDirichlet)):
        f, g = (lambda x: np.ones_like(x)), (lambda x: np.zeros_like(x))
    else:
        raise InvalidArgument(f"boundary condition {bc.describe()!r} cannot be imposed by row replacement")
    xe = grid.nodes[idx : idx + 1]
    fe = float(_eval("f", f, xe)[0])
    ge = float(_eval("g", g, xe)[0])
    if fe == 0.0 and ge == 0.0:
        raise DegenerateBCError(f"boundary row at x={xe[0]!r} has f = g = 0")
    row = ge * grid.d1[idx].copy()
    row[idx] += fe
    return row, f"{bc.describe()} imposed at x={xe[0]!r}"


def _assemble_chebyshev(problem: SLProblem, plan: DiscretizationPlan) -> Pencil:
    n = plan.n
    grid = _chebyshev_grid(n, plan.domain)
    x = grid.nodes
    ends = {RIGHT: 0, LEFT: n - 1}
    strategy = {LEFT: plan.bc_strategy_left, RIGHT: plan.bc_strategy_right}

    removed = sorted(ends[s] for s in (LEFT, RIGHT) if strategy[s] == REMOVE)
    keep = np.array([i for i in range(n) if i not in removed], dtype=int)

    # endpoint rows that survive are overwritten below, so only true interior
    # nodes need q, r and the multiplier
    pv = _eval("p", problem.p, x)
    # constant p: skip D1 @ p, whose round-off would leak into every row
    dp = np.zeros(n) if np.ptp(pv) == 0 else grid.d1 @ pv
    inner = np.arange(1, n - 1)
    qv = np.zeros(n)
    rv = np.zeros(n)
    mv = np.ones(n)
    qv[inner] = _eval("q", problem.q, x[inner])
    rv[inner] = _eval("r", problem.r, x[inner])
    if problem.multiplier is not None:
        mv[inner] = _eval("multiplier", problem.multiplier, x[inner])

    A = -(mv * pv)[:, None] * grid.d2 - (mv * dp)[:, None] * grid.d1 + np.diag(mv * qv)
    B = np.diag(mv * rv)

    replaced = []
    for side in (RIGHT, LEFT):
        idx = ends[side]
        if strategy[side] == COLLOCATE:
            row = endpoint_expand(problem, side, grid)
            mult = 1.0
            if problem.multiplier is not None:
                mult = float(_eval("multiplier", problem.multiplier, x[idx : idx + 1])[0])
            A[idx] = mult * row.a_row
            B[idx] = mult * row.b_row
        elif strategy[side] == REPLACE_ROW:
            A[idx], desc = _boundary_row(problem, side, grid, idx)
            B[idx] = 0.0
            replaced.append((int(np.searchsorted(keep, idx)), desc))

    sub = np.ix_(keep, keep)
    return Pencil(
        a_matrix=np.ascontiguousarray(A[sub]),
        b_matrix=np.ascontiguousarray(B[sub]),
        interior_nodes=x[keep],
        full_nodes=x,
        kept_indices=keep,
        removed_indices=tuple(int(i) for i in removed),
        replaced_rows=tuple(sorted(replaced)),
        method=CHEBYSHEV,
        plan=plan,
        strategies=dict(strategy),
        lower_bound=problem.lower_bound,
    )


def _assemble_sinc(problem: SLProblem, plan: DiscretizationPlan) -> Pencil:
    grid: SincGrid = sinc_grid(plan.n, plan.h, plan.center)
    x = grid.nodes
    pv = _eval("p", problem.p, x)
    if np.max(np.abs(pv - 1.0)) > 1e-14:
        raise InvalidArgument("sinc collocation only supports p = 1 (-u'' + q u forms)")
    qv = _eval("q", problem.q, x)
    rv = _eval("r", problem.r, x)
    mv = np.ones_like(x) if problem.multiplier is None else _eval("multiplier", problem.multiplier, x)
    A = -mv[:, None] * grid.d2 + np.diag(mv * qv)
    B = np.diag(mv * rv)
    keep = np.arange(grid.n_points)
    return Pencil(
        a_matrix=A, b_matrix=B, interior_nodes=x, full_nodes=x, kept_indices=keep,
        removed_indices=(), replaced_rows=(), method=SINC, plan=plan,
        strategies={LEFT: REMOVE, RIGHT: REMOVE}, lower_bound=problem.lower_bound,
    )


def assemble(problem: SLProblem, plan: DiscretizationPlan) -> Pencil:
    plan = resolve_plan(problem, plan)
    if plan.method == SINC:
        return _assemble_sinc(problem, plan)
    return _assemble_chebyshev(problem, plan)


def reinstate_boundary(vector, pencil: Pencil) -> np.ndarray:
    """Expand a pencil-sized vector to all grid nodes.

    Removed nodes get zeros.  Values at replaced rows are recomputed from
    the boundary row, so the returned vector satisfies the discrete
    boundary condition exactly.
    """
    v = np.asarray(vector)
    if v.shape[0] != pencil.size:
        raise InvalidArgument(f"vector length {v.shape[0]} does not match pencil size {pencil.size}")
    if not pencil.removed_indices and not pencil.replaced_rows:
        return v.copy()
    v = v.copy()
    for k, _ in pencil.replaced_rows:
        row = pencil.a_matrix[k]
        rest = row @ v - row[k] * v[k]
        v[k] = -rest / row[k]
    full = np.zeros((pencil.n_full,) + v.shape[1:], dtype=v.dtype)
    full[pencil.kept_indices] = v
    return full

"""Sturm-Liouville problem model, boundary conditions and the built-in registry.

A problem is -(p u')' + q u = lambda r u on (a, b).  Coefficients are plain
vectorised callables.  An optional row multiplier m(x) turns the equation
into m(-(p u')' + q u) = lambda m r u, which is how the generalized Bessel
problem is posed as a matrix pencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import brentq
from scipy.special import jv

from .errors import EvaluationAtSingularity, InvalidArgument, NotApplicableError, NotFound
from .grid_diff import ChebGrid, cheb_coeffs

Coefficient = Callable[[np.ndarray], np.ndarray]

LEFT, RIGHT = "left", "right"


def _const(c: float) -> Coefficient:
    def f(x):
        return np.full(np.shape(x), float(c))

    return f


# -- boundary conditions -----------------------------------------------------


@dataclass(frozen=True)
class Dirichlet:
    kind = "dirichlet"

    def describe(self):
        return "u = 0"


@dataclass(frozen=True)
class Robin:
    """alpha u + beta u' = 0."""

    alpha: float
    beta: float
    kind = "robin"

    def __post_init__(self):
        if abs(self.alpha) + abs(self.beta) == 0:
            raise InvalidArgument("Robin condition needs |alpha| + |beta| > 0")

    def row_functions(self):
        return _const(self.alpha), _const(self.beta)

    def describe(self):
        return f"{self.alpha!r} u + {self.beta!r} u' = 0"


@dataclass(frozen=True)
class LimitForm:
    """lim [f(x) u + g(x) u'] = 0 at the endpoint."""

    f: Coefficient
    g: Coefficient
    label: str = "lim [f u + g u'] = 0"
    kind = "limit"

    def row_functions(self):
        return self.f, self.g

    def describe(self):
        return self.label


@dataclass(frozen=True)
class TruncatedDirichlet:
    """Dirichlet condition imposed at an interior point standing in for the endpoint."""

    point: float
    kind = "truncated_dirichlet"

    def __post_init__(self):
        if not np.isfinite(self.point):
            raise InvalidArgument("truncation point must be finite")

    def describe(self):
        return f"u = 0 at truncation point {self.point!r}"


@dataclass(frozen=True)
class EndpointCollocation:
    kind = "collocation"

    def describe(self):
        return "collocate the equation at the degenerate endpoint"


BoundaryCondition = Union[Dirichlet, Robin, LimitForm, TruncatedDirichlet, EndpointCollocation]


# -- reference data ------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceSpectrum:
    """Published eigenvalues keyed by index, each with a provenance tag.

    `printed` keeps values exactly as they appear in print when they differ
    in meaning from `values` (the Bessel listing gives sqrt(lambda)).
    """

    values: tuple = ()
    closed_form: Optional[Callable[[int], float]] = None
    printed: tuple = ()
    note: str = ""

    def __post_init__(self):
        idx = [v[0] for v in self.values]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidArgument("reference indices must be strictly increasing")

    def as_dict(self) -> dict:
        return {i: v for i, v, _ in self.values}

    def value(self, index: int) -> Optional[float]:
        for i, v, _ in self.values:
            if i == index:
                return v
        if self.closed_form is not None:
            return float(self.closed_form(index))
        return None


# -- problem -------------------------------------------------------------------


@dataclass(frozen=True)
class SLProblem:
    name: str
    p: Coefficient
    q: Coefficient
    r: Coefficient
    a: float
    b: float
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    reference: Optional[ReferenceSpectrum] = None
    domain: Optional[tuple] = None
    multiplier: Optional[Coefficient] = None
    lower_bound: Optional[float] = None
    tags: frozenset = frozenset()
    params: dict = field(default_factory=dict)
    endpoints: dict = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidArgument(f"interval must satisfy a < b, got ({self.a}, {self.b})")
        lo, hi = self.probe_interval()
        xs = np.linspace(lo, hi, 1002)[1:-1]
        with np.errstate(all="ignore"):
            pv = np.asarray(self.p(xs), dtype=float)
        bad = ~(pv > 0)
        if bad.any():
            raise InvalidArgument(f"{self.name}: p must be positive inside the interval (fails at x={xs[bad][0]!r})")
        if self.domain is not None:
            da, db = self.domain
            if not (self.a <= da < db <= self.b):
                raise InvalidArgument(f"{self.name}: domain {self.domain} not inside ({self.a}, {self.b})")
        for bc in (self.bc_left, self.bc_right):
            if isinstance(bc, TruncatedDirichlet) and not self.a < bc.point < self.b:
                raise InvalidArgument(f"{self.name}: truncation point {bc.point} must lie strictly inside the interval")

    def probe_interval(self) -> tuple:
        """Finite interval used for probing: the configured domain, else (a, b)."""
        if self.domain is not None:
            return self.domain
        if np.isfinite(self.a) and np.isfinite(self.b):
            return (self.a, self.b)
        raise InvalidArgument(f"{self.name}: infinite interval needs a truncated domain")

    def effective_domain(self) -> tuple:
        return tuple(float(v) for v in self.probe_interval())

    def bc(self, side: str) -> BoundaryCondition:
        return self.bc_left if side == LEFT else self.bc_right


@dataclass(frozen=True)
class HardnessVerdict:
    endpoint: str
    lam: float
    distances: np.ndarray
    tau_samples: np.ndarray
    hard: bool


def tau(problem: SLProblem, lam: float, x):
    """The quotient (lambda r(x) - q(x)) / p(x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        pv = np.asarray(problem.p(x), dtype=float)
        if np.any(pv == 0):
            raise EvaluationAtSingularity(f"p vanishes at x={x!r}")
        return (lam * np.asarray(problem.r(x), dtype=float) - np.asarray(problem.q(x), dtype=float)) / pv


HARD_THRESHOLD = 1e6


def classify_hard(problem: SLProblem, lam: float, endpoint: str) -> HardnessVerdict:
    """Decide whether tau blows up at a finite endpoint.

    tau is sampled at distances 1e-1 .. 1e-8 of the interval length from
    the endpoint.  Hard means tau exceeds 1e6 at the closest probe and is
    increasing over the last four probes.
    """
    if endpoint not in (LEFT, RIGHT):
        raise InvalidArgument(f"endpoint must be 'left' or 'right', got {endpoint!r}")
    e = problem.a if endpoint == LEFT else problem.b
    if not np.isfinite(e):
        raise NotApplicableError("hardness is only defined at a finite endpoint")
    lo, hi = problem.a, problem.b
    length = (hi - lo) if np.isfinite(hi - lo) else 1.0
    distances = length * 10.0 ** -np.arange(1, 9)
    xs = e + distances if endpoint == LEFT else e - distances
    samples = np.array([float(tau(problem, lam, xi)) for xi in xs])
    tail = samples[-4:]
    hard = bool(samples[-1] > HARD_THRESHOLD and np.all(np.diff(tail) > 0))
    return HardnessVerdict(endpoint, float(lam), distances, samples, hard)


def boyd_regularized_q(epsilon: float) -> Coefficient:
    """x -> x / (x^2 + eps^2), a smooth stand-in for 1/x."""
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    e2 = float(epsilon) ** 2

    def q(x):
        x = np.asarray(x, dtype=float)
        return x / (x * x + e2)

    return q


def symmetric_restriction(u_values, u_deriv_values, grid: ChebGrid, delta: float) -> float:
    """Clenshaw-Curtis value of the integral of (1-x^2)|u'|^2 over [a+delta, b-delta].

    The integrand is interpolated at the grid's CGL nodes and the resulting
    Chebyshev series is integrated exactly.  For a grid on [a, b] the weight
    is (x-a)(b-x) rescaled to match 1-x^2 on the reference interval.
    """
    u = np.asarray(u_values, dtype=float)
    du = np.asarray(u_deriv_values, dtype=float)
    n = grid.n_points
    if u.shape != (n,) or du.shape != (n,):
        raise InvalidArgument(f"expected vectors of length {n}, got {u.shape} and {du.shape}")
    if not delta > 0:
        raise InvalidArgument("delta must be positive")

    amap = grid.map
    t = amap.to_reference(grid.nodes)
    integrand = (1.0 - t * t) * du * du
    c = cheb_coeffs(integrand)
    ci = npcheb.chebint(c)
    lo = amap.to_reference(amap.a + delta)
    hi = amap.to_reference(amap.b - delta)
    return float((npcheb.chebval(hi, ci) - npcheb.chebval(lo, ci)) / amap.scale)


# -- Bessel zeros (used for closed-form references) ----------------------------


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """First `count` positive zeros of J_nu, nu > -1."""
    out = []
    step = 0.25
    s = 1e-6
    f_prev = jv(nu, s)
    while len(out) < count:
        s_next = s + step
        f_next = jv(nu, s_next)
        if f_prev == 0:
            out.append(s)
        elif f_prev * f_next < 0:
            out.append(brentq(lambda t: jv(nu, t), s, s_next, xtol=1e-15, rtol=1e-15))
        s, f_prev = s_next, f_next
    return np.array(out[:count])


# -- built-in problems ---------------------------------------------------------


def legendre() -> SLProblem:
    p = lambda x: 1.0 - np.asarray(x, dtype=float) ** 2
    friedrichs = LimitForm(_const(0.0), p, "lim (1-x^2) u' = 0")
    ref = ReferenceSpectrum(
        values=tuple((n, n * (n + 1) + 0.25, "closed form n(n+1)+1/4") for n in range(4)),
        closed_form=lambda n: n * (n + 1) + 0.25,
    )
    return SLProblem(
        name="legendre", p=p, q=_const(0.25), r=_const(1.0), a=-1.0, b=1.0,
        bc_left=friedrichs, bc_right=friedrichs, reference=ref,
        tags=frozenset({"singular", "hard", "limit_circle"}),
        endpoints={LEFT: "LCNO", RIGHT: "LCNO"},
        description="-((1-x^2)u')' + u/4 = lambda u on (-1, 1)",
    )


def latzko_fichera() -> SLProblem:
    p = lambda x: 1.0 - np.asarray(x, dtype=float) ** 7
    r = lambda x: np.asarray(x, dtype=float) ** 7
    table = (
        8.727470352650549e00, 1.524230708786303e02, 4.350633321758573e02,
        8.556857252681226e02, 1.414142820954995e03, 2.110387972308661e03,
    )
    ref = ReferenceSpectrum(values=tuple((j, v, "Latzko-Fichera table, Chebfun column") for j, v in enumerate(table)))
    return SLProblem(
        name="latzko_fichera", p=p, q=_const(0.0), r=r, a=0.0, b=1.0,
        bc_left=Dirichlet(), bc_right=LimitForm(_const(0.0), p, "lim (1-x^7) u' = 0"),
        reference=ref, tags=frozenset({"singular", "hard"}),
        endpoints={LEFT: "regular", RIGHT: "LCNO"},
        description="-((1-x^7)u')' = lambda x^7 u on (0, 1)",
    )


def rod(gamma: float = 0.0) -> SLProblem:
    area = lambda x: np.log1p(np.sin(3.0 * np.asarray(x, dtype=float)))
    table = (
        1.063402823775151e00, 9.757849576315739e00, 2.575153869531348e01,
        4.890432732322349e01, 7.920090041934151e01, 1.166360305002941e02,
    )
    ref = None
    if gamma == 0.0:
        ref = ReferenceSpectrum(values=tuple((j, v, "rod table, Chebfun column") for j, v in enumerate(table)))
    return SLProblem(
        name="rod", p=area, q=_const(gamma), r=_const(1.0), a=0.0, b=1.0,
        bc_left=LimitForm(_const(0.0), area, "lim A(x) u' = 0"), bc_right=Dirichlet(),
        reference=ref, tags=frozenset({"singular", "hard"}), params={"gamma": gamma},
        endpoints={LEFT: "LCNO", RIGHT: "regular"},
        description="-(A u')' + gamma u = lambda u, A = log(1+sin 3x), on (0, 1]",
    )


BOYD_CHEBFUN = (
    -9.794200447802075e-01, -7.751928355451891e-02, 2.732439098153830e-01,
    3.092576560488862e-01, 6.754139419849143e-01, 8.403112262426201e-01,
)
BOYD_SINC = (
    -9.606833569044633e-01, -1.095983388802928e-01, -2.965096161409372e-02,
    4.851960256747148e-02, 9.064724518382954e-02, 1.630157312824040e-01,
)
BOYD_SLEIGN = (-0.9841, -0.0778, 0.2727, 0.3092, 0.6754, 0.8396)


def boyd(eps: float = 1e-6, a: float = -10.0, b: float = 10.0) -> SLProblem:
    ref = ReferenceSpectrum(
        values=tuple((j, v, "Boyd table, Chebfun column") for j, v in enumerate(BOYD_CHEBFUN)),
        printed=tuple((j, v, "Boyd table, SiC column") for j, v in enumerate(BOYD_SINC))
        + tuple((j, v, "Boyd table, SLEIGN column (eps=1e-3)") for j, v in enumerate(BOYD_SLEIGN)),
    )
    return SLProblem(
        name="boyd", p=_const(1.0), q=boyd_regularized_q(eps), r=_const(1.0), a=a, b=b,
        bc_left=Dirichlet(), bc_right=Dirichlet(), reference=ref,
        tags=frozenset({"singular", "hard", "interior_singularity"}), params={"eps": eps},
        endpoints={LEFT: "regular", RIGHT: "regular", "interior": "x = 0"},
        description="-u'' + x/(x^2+eps^2) u = lambda u with u(a) = u(b) = 0",
    )


FOKKER_PLANCK_TABLE = (
    (1, 1.368592520979542e00), (2, 4.453709163213802e00), (4, 1.275806953296428e01),
    (6, 2.349440842267923e01), (10, 5.061402223182223e01), (20, 1.432321465884990e02),
    (30, 2.631594491758098e02),
)


def fokker_planck(length: float = 4.0) -> SLProblem:
    q = lambda x: np.asarray(x, dtype=float) ** 6 / 4.0 - 1.5 * np.asarray(x, dtype=float) ** 2
    ref = ReferenceSpectrum(
        values=((0, 0.0, "exact ground state"),)
        + tuple((j, v, "Fokker-Planck table, Chebfun column (l=4)") for j, v in FOKKER_PLANCK_TABLE),
    )
    return SLProblem(
        name="fokker_planck", p=_const(1.0), q=q, r=_const(1.0), a=-math.inf, b=math.inf,
        bc_left=TruncatedDirichlet(-float(length)), bc_right=TruncatedDirichlet(float(length)),
        reference=ref, domain=(-float(length), float(length)),
        tags=frozenset({"singular", "hard", "unbounded"}), params={"length": length},
        endpoints={LEFT: "LP", RIGHT: "LP"},
        description="-u'' + (x^6/4 - 3x^2/2) u = lambda u, truncated to [-l, l]",
    )


DUNFORD_SCHWARTZ_TABLE = (
    -2.493732084634685e01, -1.572675883354506e01, -8.878700805769942e00,
    -3.934516542596402e00, -8.976614614351384e-01, 1.578606493636769e-02,
    2.297844931237520e-01, 6.369715876528872e-01, 1.133491876230128e00, 1.761853804586405e00,
)


def dunford_schwartz(eps: float = 1e-8, X: float = 15.0) -> SLProblem:
    def q(x):
        x = np.asarray(x, dtype=float)
        return (-242.0 * np.cosh(x) + 241.0) / (4.0 * np.sinh(x) ** 2)

    # bracket with the principal solution sqrt(x): u/2 - x u' -> 0
    friedrichs = LimitForm(_const(0.5), lambda x: -np.asarray(x, dtype=float), "lim [u/2 - x u'] = 0")
    ref = ReferenceSpectrum(
        values=tuple((n, -float((5 - n) ** 2), "exact -(5-n)^2") for n in range(5)),
        printed=tuple((j, v, "Dunford-Schwartz table, Chebfun column") for j, v in enumerate(DUNFORD_SCHWARTZ_TABLE)),
    )
    return SLProblem(
        name="dunford_schwartz", p=_const(1.0), q=q, r=_const(1.0), a=0.0, b=math.inf,
        bc_left=friedrichs, bc_right=TruncatedDirichlet(float(X)), reference=ref, domain=(float(eps), float(X)),
        tags=frozenset({"singular", "hard", "unbounded", "continuous_spectrum"}),
        params={"eps": eps, "X": X}, endpoints={LEFT: "LCNO", RIGHT: "LP"},
        description="-u'' + (241 - 242 cosh x)/(4 sinh^2 x) u = lambda u on (0, inf)",
    )


NASTY_CHC = (1.124816809695236e00, 3.557030079371902e02)
NASTY_CHEBFUN = (1.124816818756614e00, 3.557030097207584e02)
NASTY_PRYCE = (1.1248168097, 385.92821596)


def nasty(eps: Optional[float] = None, b: float = 4.0) -> SLProblem:
    """q = ln x on (0, 4).  eps truncates the left end (the Chebfun variant uses 1e-8)."""
    ref = ReferenceSpectrum(
        values=((0, NASTY_CHC[0], "q = ln x table, ChC column"), (23, NASTY_CHC[1], "q = ln x table, ChC column")),
        printed=((0, NASTY_CHEBFUN[0], "q = ln x table, Chebfun column"), (23, NASTY_CHEBFUN[1], "q = ln x table, Chebfun column"),
                 (0, NASTY_PRYCE[0], "q = ln x table, Pryce column"), (23, NASTY_PRYCE[1], "q = ln x table, Pryce column")),
        note="Pryce's lambda_23 disagrees with both spectral methods",
    )
    domain = None if eps is None else (float(eps), float(b))
    return SLProblem(
        name="nasty", p=_const(1.0), q=lambda x: np.log(np.asarray(x, dtype=float)), r=_const(1.0),
        a=0.0, b=b, bc_left=Dirichlet(), bc_right=Dirichlet(), reference=ref, domain=domain,
        tags=frozenset({"singular", "hard"}), params={"eps": eps},
        endpoints={LEFT: "LCNO", RIGHT: "regular"},
        description="-u'' + ln(x) u = lambda u, u(0) = u(4) = 0",
    )


BESSEL_PRINTED = ((0, 2.404996056333427e00), (1, 5.520251599508041e00), (8, 2.749367004065968e01))


def bessel(nu: float = 0.0, eps: float = 1e-4, bc: str = "noc") -> SLProblem:
    """-u'' + (nu^2 - 1/4)/x^2 u = lambda u on (0, 1], u(1) = 0.

    bc="noc" selects the principal solution x^(nu+1/2) at the origin;
    its eigenvalues are the squared zeros of J_nu.  bc="noc1" registers the
    logarithmic condition as printed; no reference values exist for it.
    """
    c = nu * nu - 0.25
    q = lambda x: c / np.asarray(x, dtype=float) ** 2
    if bc == "noc":
        left = LimitForm(_const(nu + 0.5), lambda x: -np.asarray(x, dtype=float),
                         f"lim [({nu}+1/2) u - x u'] = 0")
        zeros = bessel_zeros(nu, 40)

        def closed(n):
            return float(zeros[n] ** 2) if n < len(zeros) else float(bessel_zeros(nu, n + 1)[n] ** 2)

        ref = ReferenceSpectrum(
            values=tuple((n, closed(n), f"squared zeros of J_{nu}") for n in (0, 1, 8)),
            closed_form=closed,
            printed=tuple((n, v, "listed values (read as sqrt(lambda))") for n, v in BESSEL_PRINTED) if nu == 0 else (),
        )
    elif bc == "noc1":
        left = LimitForm(lambda x: 1.0 + 0.5 * np.log(np.asarray(x, dtype=float)),
                         lambda x: -np.asarray(x, dtype=float) * np.log(np.asarray(x, dtype=float)),
                         "lim [(1 + ln(x)/2) u - x ln(x) u'] = 0")
        ref = None
    else:
        raise InvalidArgument(f"unknown Bessel boundary condition {bc!r}")
    return SLProblem(
        name="bessel", p=_const(1.0), q=q, r=_const(1.0), a=0.0, b=1.0,
        bc_left=left, bc_right=Dirichlet(), reference=ref, domain=(float(eps), 1.0),
        lower_bound=0.0, tags=frozenset({"singular", "hard"}), params={"nu": nu, "eps": eps, "bc": bc},
        endpoints={LEFT: "LCNO" if abs(c) < 0.75 else "LP", RIGHT: "regular"},
        description="-u'' + (nu^2-1/4)/x^2 u = lambda u on (0, 1]",
    )


GEN_BESSEL_TAU0_CHEBFUN = (
    8.427067009456547e00, 8.571978456544725e00, 3.640104840502095e01, 3.689758359379723e01,
    8.411229915649267e01, 8.511762862999629e01, 1.515639240123626e02, 1.532164600154869e02,
)
GEN_BESSEL_TAU14_CHEBFUN = (
    5.400563866142070e00, 1.503383426547553e01, 2.332141941007685e01, 5.388134332882591e01,
    6.489190302110852e01, 9.708229958053987e01, 1.498879163534515e02, 1.529282181428597e02,
)
GEN_BESSEL_TAU0_CHC = (
    8.427945713285165e00, 8.661777916480734e00, 3.640525136075537e01, 3.720851434888583e01,
    8.412057813169606e01, 8.575213457278441e01, 1.515775098405456e02, 1.542668794303226e02,
)


def bessel_generalized(tau_: float = 0.0, nu: float = 1.0 / 3.0) -> SLProblem:
    """u'' + [lambda + (1/4 - nu^2)/(x - tau)^2] u = 0 on (-1, 1), u(+-1) = 0.

    Posed as the pencil -(x-tau)^2 u'' + (nu^2 - 1/4) u = lambda (x-tau)^2 u.
    """
    c = nu * nu - 0.25
    q = lambda x: c / (np.asarray(x, dtype=float) - tau_) ** 2
    m = lambda x: (np.asarray(x, dtype=float) - tau_) ** 2
    values = ()
    printed = ()
    if abs(nu - 1.0 / 3.0) < 1e-15:
        if tau_ == 0.0:
            values = tuple((j, v, "generalized Bessel table, ChC column (N=2028)") for j, v in enumerate(GEN_BESSEL_TAU0_CHC))
            printed = tuple((j, v, "generalized Bessel table, Chebfun column") for j, v in enumerate(GEN_BESSEL_TAU0_CHEBFUN))
        elif tau_ == 0.25:
            values = tuple((j, v, "generalized Bessel table, Chebfun column") for j, v in enumerate(GEN_BESSEL_TAU14_CHEBFUN))
    ref = ReferenceSpectrum(values=values, printed=printed) if values else None
    return SLProblem(
        name="bessel_generalized", p=_const(1.0), q=q, r=_const(1.0), a=-1.0, b=1.0,
        bc_left=Dirichlet(), bc_right=Dirichlet(), reference=ref, multiplier=m,
        # c >= -1/4 makes the operator nonnegative (Hardy inequality)
        lower_bound=0.0 if c >= -0.25 else None,
        tags=frozenset({"singular", "hard", "generalized", "interior_singularity"}),
        params={"tau": tau_, "nu": nu},
        endpoints={LEFT: "regular", RIGHT: "regular", "interior": f"x = {tau_}"},
        description="-(x-tau)^2 u'' + (nu^2-1/4) u = lambda (x-tau)^2 u, u(+-1) = 0",
    )


FACTORIES = {
    "legendre": legendre,
    "latzko_fichera": latzko_fichera,
    "rod": rod,
    "boyd": boyd,
    "fokker_planck": fokker_planck,
    "dunford_schwartz": dunford_schwartz,
    "nasty": nasty,
    "bessel": bessel,
    "bessel_generalized": bessel_generalized,
}


def builtin_problems() -> list:
    return [f() for f in FACTORIES.values()]


def get_problem(name: str, **params) -> SLProblem:
    try:
        factory = FACTORIES[name]
    except KeyError:
        raise NotFound(f"unknown problem {name!r}; known: {', '.join(FACTORIES)}") from None
    return factory(**params)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slcolloc.discretize import (
    COLLOCATE,
    REMOVE,
    REPLACE_ROW,
    SINC,
    DiscretizationPlan,
    assemble,
    default_strategy,
    endpoint_expand,
    reinstate_boundary,
    resolve_plan,
)
from slcolloc.eigen import solve_pencil
from slcolloc.errors import DegenerateBCError, InvalidArgument, NotDegenerateError, SingularNodeError
from slcolloc.grid_diff import cheb_diff
from slcolloc.problems import (
    LEFT,
    RIGHT,
    Dirichlet,
    LimitForm,
    Robin,
    SLProblem,
    get_problem,
)


def const(c):
    return lambda x: np.full(np.shape(x), float(c))


def laplacian(a=0.0, b=math.pi, left=None, right=None, q=None):
    """-u'' + q u = lambda u on [a, b]."""
    return SLProblem(
        "laplacian", const(1.0), q or const(0.0), const(1.0), a, b,
        left or Dirichlet(), right or Dirichlet(),
    )


def dense_eigs(pencil):
    lam = np.linalg.eigvals(np.linalg.solve(pencil.b_matrix, pencil.a_matrix))
    return np.sort(lam.real)


class TestPlan:
    def test_defaults(self):
        plan = DiscretizationPlan()
        assert plan.method == "chebyshev" and plan.n == 64 and plan.h is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"method": "fourier"},
            {"n": 1},
            {"n": 10.5},
            {"bc_strategy_left": "bordering"},
            {"method": SINC, "n": 11},
            {"method": SINC, "n": 11, "h": -0.1},
            {"method": SINC, "n": 11, "h": 0.1, "bc_strategy_left": REPLACE_ROW},
            {"h": 0.1},
            {"domain": (1.0, 0.0)},
            {"domain": (0.0, math.inf)},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgument):
            DiscretizationPlan(**kwargs)

    def test_sinc_span(self):
        plan = DiscretizationPlan(method=SINC, n=5, h=0.5, center=1.0)
        assert plan.sinc_span() == (0.0, 2.0)

    def test_resolve_fills_domain_and_strategies(self):
        plan = resolve_plan(get_problem("legendre"), DiscretizationPlan(n=16))
        assert plan.domain == (-1.0, 1.0)
        assert plan.bc_strategy_left == COLLOCATE and plan.bc_strategy_right == COLLOCATE

    def test_resolve_rejects_domain_outside_interval(self):
        with pytest.raises(InvalidArgument):
            resolve_plan(get_problem("rod"), DiscretizationPlan(n=16, domain=(-0.5, 1.0)))


class TestStrategies:
    @pytest.mark.parametrize(
        "name,left,right",
        [
            ("legendre", COLLOCATE, COLLOCATE),
            ("latzko_fichera", REMOVE, COLLOCATE),
            ("rod", COLLOCATE, REMOVE),
            ("fokker_planck", REMOVE, REMOVE),
            ("dunford_schwartz", REPLACE_ROW, REMOVE),
            ("bessel", REPLACE_ROW, REMOVE),
        ],
    )
    def test_default_strategy(self, name, left, right):
        p = get_problem(name)
        dom = p.effective_domain()
        assert default_strategy(p, LEFT, dom) == left
        assert default_strategy(p, RIGHT, dom) == right

    def test_limit_form_on_truncated_domain_replaces_row(self):
        p = get_problem("legendre")
        assert default_strategy(p, LEFT, (-0.99, 1.0)) == REPLACE_ROW


class TestAssembly:
    @pytest.mark.parametrize("n", [24, 32, 41])
    def test_dirichlet_laplacian(self, n):
        pencil = assemble(laplacian(), DiscretizationPlan(n=n))
        assert pencil.size == n - 2
        assert pencil.removed_indices == (0, n - 1)
        np.testing.assert_allclose(dense_eigs(pencil)[:3], [1.0, 4.0, 9.0], rtol=1e-9)

    def test_neumann_by_row_replacement(self):
        # u'(0) = u'(pi) = 0 gives eigenvalues k^2, k = 0, 1, 2, ...
        p = laplacian(left=Robin(0.0, 1.0), right=Robin(0.0, 1.0))
        pencil = assemble(p, DiscretizationPlan(n=32))
        assert pencil.size == 32 and len(pencil.replaced_rows) == 2
        # replaced rows carry zero weight
        for k, _ in pencil.replaced_rows:
            assert not pencil.b_matrix[k].any()
        lam = solve_pencil(pencil, count=4).eigenvalues
        np.testing.assert_allclose(lam, [0.0, 1.0, 4.0, 9.0], atol=1e-9)

    def test_unit_weight_gives_identity(self):
        pencil = assemble(get_problem("fokker_planck"), DiscretizationPlan(n=40))
        np.testing.assert_array_equal(pencil.b_matrix, np.eye(pencil.size))

    def test_deterministic(self):
        p = get_problem("rod")
        a, b = assemble(p, DiscretizationPlan(n=48)), assemble(p, DiscretizationPlan(n=48))
        np.testing.assert_array_equal(a.a_matrix, b.a_matrix)
        np.testing.assert_array_equal(a.b_matrix, b.b_matrix)

    def test_legendre_endpoint_rows(self):
        # at x = 1: p'(1) = -2 so the row is 2 u'(1) + u(1)/4
        n = 12
        p = get_problem("legendre")
        pencil = assemble(p, DiscretizationPlan(n=n))
        d1 = cheb_diff(n, 1).d1
        np.testing.assert_allclose(pencil.a_matrix[0], 2.0 * d1[0] + 0.25 * np.eye(n)[0], atol=1e-12)
        np.testing.assert_allclose(pencil.a_matrix[-1], -2.0 * d1[-1] + 0.25 * np.eye(n)[-1], atol=1e-12)
        np.testing.assert_allclose(pencil.b_matrix[0], np.eye(n)[0])

    def test_weighted_pencil(self):
        p = get_problem("bessel_generalized")
        pencil = assemble(p, DiscretizationPlan(n=10))
        x = pencil.interior_nodes
        np.testing.assert_allclose(np.diag(pencil.b_matrix), x * x, atol=1e-15)

    def test_degenerate_boundary_row(self):
        p = laplacian(left=LimitForm(const(0.0), const(0.0)))
        with pytest.raises(DegenerateBCError):
            assemble(p, DiscretizationPlan(n=10))

    def test_singular_node(self):
        # an odd number of CGL points puts a node at x = 0
        p = laplacian(a=-1.0, b=1.0, q=lambda x: 1.0 / np.asarray(x))
        with pytest.raises(SingularNodeError) as info:
            assemble(p, DiscretizationPlan(n=9))
        assert info.value.name == "q" and info.value.x == 0.0
        assemble(p, DiscretizationPlan(n=10))

    def test_sinc_requires_unit_p(self):
        with pytest.raises(InvalidArgument):
            assemble(get_problem("rod"), DiscretizationPlan(method=SINC, n=11, h=0.1))

    def test_sinc_harmonic_oscillator(self):
        # -u'' + x^2 u: eigenvalues 2k + 1
        p = SLProblem("ho", const(1.0), lambda x: np.asarray(x) ** 2, const(1.0), -math.inf, math.inf,
                      Dirichlet(), Dirichlet(), domain=(-20.0, 20.0))
        pencil = assemble(p, DiscretizationPlan(method=SINC, n=81, h=0.25))
        assert pencil.size == 81
        np.testing.assert_allclose(dense_eigs(pencil)[:4], [1.0, 3.0, 5.0, 7.0], rtol=1e-9)


class TestEndpointExpand:
    def test_legendre(self):
        row = endpoint_expand(get_problem("legendre"), RIGHT, n=16)
        assert row.index == 0
        assert row.p_prime == pytest.approx(-2.0, abs=1e-12)
        assert row.q_value == 0.25 and row.r_value == 1.0

    def test_not_degenerate(self):
        with pytest.raises(NotDegenerateError):
            endpoint_expand(laplacian(), LEFT, n=8)


class TestReinstate:
    def test_removed_nodes_are_zero(self):
        pencil = assemble(laplacian(), DiscretizationPlan(n=12))
        full = reinstate_boundary(np.arange(1.0, 11.0), pencil)
        assert full.shape == (12,)
        assert full[0] == 0.0 and full[-1] == 0.0
        np.testing.assert_array_equal(full[1:-1], np.arange(1.0, 11.0))

    def test_replaced_row_satisfied(self):
        p = laplacian(left=Robin(1.0, 2.0))
        pencil = assemble(p, DiscretizationPlan(n=14))
        rng = np.random.default_rng(3)
        full = reinstate_boundary(rng.standard_normal(pencil.size), pencil)
        k, _ = pencil.replaced_rows[0]
        assert abs(pencil.a_matrix[k] @ full[pencil.kept_indices]) < 1e-12

    def test_length_mismatch(self):
        pencil = assemble(laplacian(), DiscretizationPlan(n=12))
        with pytest.raises(InvalidArgument):
            reinstate_boundary(np.ones(12), pencil)

    @given(st.integers(4, 40))
    @settings(max_examples=15, deadline=None)
    def test_shapes(self, n):
        pencil = assemble(get_problem("latzko_fichera"), DiscretizationPlan(n=n))
        assert pencil.size == n - 1
        assert reinstate_boundary(np.ones(pencil.size), pencil).shape == (n,)

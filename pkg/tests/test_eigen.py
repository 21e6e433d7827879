
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slcolloc.discretize import DiscretizationPlan, Pencil
from slcolloc.eigen import (
    Spectrum,
    coeff_decay_report,
    relative_drift,
    solve,
    solve_pencil,
    spectrum_partition,
    sweep,
)
from slcolloc.errors import InvalidArgument
from slcolloc.problems import ReferenceSpectrum, bessel_generalized, get_problem


def bare_pencil(A, B, lower_bound=None):
    m = A.shape[0]
    x = np.linspace(1.0, -1.0, m)
    return Pencil(
        a_matrix=A, b_matrix=B, interior_nodes=x, full_nodes=x, kept_indices=np.arange(m),
        removed_indices=(), method="sinc", lower_bound=lower_bound,
    )


def values_only(lam):
    lam = np.asarray(lam, dtype=float)
    return Spectrum(lam, np.zeros_like(lam), np.zeros((0, lam.size)), np.zeros(0), np.zeros((lam.size, 0)),
                    0, np.zeros_like(lam))


class TestSolvePencil:
    def test_diagonal(self):
        A = np.diag([3.0, 1.0, 2.0])
        s = solve_pencil(bare_pencil(A, np.eye(3)))
        np.testing.assert_array_equal(s.eigenvalues, [1.0, 2.0, 3.0])
        assert s.discarded_count == 0

    @given(st.integers(2, 12), st.floats(0.1, 10.0))
    @settings(max_examples=25, deadline=None)
    def test_identity_weight_reduction(self, m, c):
        # A v = lambda (c I) v has eigenvalues eig(A)/c
        rng = np.random.default_rng(m)
        Q = np.linalg.qr(rng.standard_normal((m, m)))[0]
        A = Q @ np.diag(np.arange(1.0, m + 1)) @ Q.T
        s1 = solve_pencil(bare_pencil(A, np.eye(m)))
        s2 = solve_pencil(bare_pencil(A, c * np.eye(m)))
        np.testing.assert_allclose(s2.eigenvalues, s1.eigenvalues / c, rtol=1e-10)

    def test_zero_weight_rows_are_infinite(self):
        A = np.array([[2.0, 1.0], [1.0, 3.0]])
        B = np.diag([1.0, 0.0])
        s = solve_pencil(bare_pencil(A, B))
        # condensing u2 = -u1/3 leaves (2 - 1/3) u1 = lambda u1
        np.testing.assert_allclose(s.eigenvalues, [5.0 / 3.0])
        assert s.discarded["infinite"] == 1

    def test_full_weight_matrix_uses_qz(self):
        A = np.array([[2.0, 0.0], [0.0, 6.0]])
        B = np.array([[2.0, 1.0], [1.0, 2.0]])
        s = solve_pencil(bare_pencil(A, B))
        ref = np.sort(np.linalg.eigvals(np.linalg.solve(B, A)).real)
        np.testing.assert_allclose(s.eigenvalues, ref, rtol=1e-12)

    def test_wide_weight_range_uses_qz(self):
        A = np.diag([1.0, 2.0, 3.0])
        B = np.diag([1.0, 1e-3, 1e-9])
        s = solve_pencil(bare_pencil(A, B))
        np.testing.assert_allclose(s.eigenvalues, [1.0, 2e3, 3e9], rtol=1e-10)

    def test_complex_pairs_filtered(self):
        A = np.array([[0.0, -1.0], [1.0, 0.0]])
        s = solve_pencil(bare_pencil(A, np.eye(2)))
        assert len(s) == 0 and s.discarded["complex"] == 2

    def test_lower_bound_drops_spurious(self):
        A = np.diag([-1e6, 1.0, 4.0])
        s = solve_pencil(bare_pencil(A, np.eye(3), lower_bound=0.0))
        np.testing.assert_array_equal(s.eigenvalues, [1.0, 4.0])
        assert s.discarded["below_bound"] == 1
        kept = solve_pencil(bare_pencil(A, np.eye(3), lower_bound=0.0), lower_bound=None)
        assert len(kept) == 3

    def test_count(self):
        A = np.diag([3.0, 1.0, 2.0])
        assert len(solve_pencil(bare_pencil(A, np.eye(3)), count=2)) == 2
        with pytest.raises(InvalidArgument):
            solve_pencil(bare_pencil(A, np.eye(3)), count=4)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgument):
            solve_pencil(bare_pencil(np.eye(3), np.eye(2)))


class TestSolve:
    @pytest.mark.parametrize("name,n", [("rod", 64), ("legendre", 48), ("fokker_planck", 128)])
    def test_residuals_small(self, name, n):
        s = solve(get_problem(name), DiscretizationPlan(n=n), count=8)
        assert np.all(s.residuals < 1e-12)
        assert s.vectors.shape == (n, 8)

    def test_eigenvectors_normalized(self):
        s = solve(get_problem("rod"), DiscretizationPlan(n=64), count=5)
        np.testing.assert_allclose(np.max(np.abs(s.vectors), axis=0), 1.0)
        # Dirichlet node at x = 1 reinstated as zero
        np.testing.assert_array_equal(s.vectors[0], 0.0)

    def test_deterministic(self):
        p = get_problem("latzko_fichera")
        a = solve(p, DiscretizationPlan(n=64), count=6)
        b = solve(p, DiscretizationPlan(n=64), count=6)
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
        np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_ground_state_even_and_positive(self):
        p = get_problem("fokker_planck")
        s = solve(p, DiscretizationPlan(n=128), count=1)
        # the exact ground state exp(-x^4/8) is even and positive
        v = s.vectors[:, 0]
        np.testing.assert_allclose(v, v[::-1], atol=1e-10)
        assert np.all(v[1:-1] > 0)

    def test_sinc_decay_is_nodal(self):
        p = get_problem("boyd")
        s = solve(p, DiscretizationPlan(method="sinc", n=101, h=0.2), count=3)
        np.testing.assert_array_equal(s.coeff_decay, np.abs(s.vectors).T)


class TestDrift:
    def test_identical_spectra(self):
        s = values_only([1.0, 2.0, 3.0])
        r = relative_drift(s, s, "n", 64, 64, 1e-14)
        np.testing.assert_array_equal(r.drifts, 0.0)
        assert r.good_indices == [0, 1, 2]

    @given(st.lists(st.floats(-1e6, 1e6).filter(lambda v: abs(v) > 1e-6), min_size=1, max_size=20))
    def test_drift_zero_identity(self, vals):
        r = relative_drift(vals, vals, "length", 4.0, 4.0, 0.0)
        assert not r.drifts.any()

    def test_relative_and_absolute(self):
        r = relative_drift([0.0, 2.0, 4.0], [1e-12, 2.2, 4.0], "n", 1, 2, 1e-9)
        np.testing.assert_allclose(r.drifts, [1e-12, 0.1, 0.0])
        assert list(r.absolute_flags) == [True, False, False]
        assert r.good_indices == [0, 2]

    def test_truncates_to_common_length(self):
        r = relative_drift([1.0, 2.0, 3.0], [1.0], "n", 1, 2, 1.0)
        assert r.drifts.shape == (1,)

    def test_empty(self):
        with pytest.raises(InvalidArgument):
            relative_drift([], [1.0], "n", 1, 2, 1.0)

    def test_serializable(self):
        d = relative_drift([1.0], [1.0], "n", 1, 2, 1.0).as_dict()
        assert d["good_indices"] == [0] and d["alpha_name"] == "n"


class TestSweep:
    def test_tracks_and_min_gap(self):
        taus = np.linspace(-0.4, 0.4, 5)
        r = sweep(lambda t: bessel_generalized(t), taus, DiscretizationPlan(n=128), 2, max_workers=2)
        assert r.tracks.shape == (5, 2)
        assert not r.failures
        assert r.min_gap_parameter == 0.0
        np.testing.assert_allclose(r.gaps, r.gaps[::-1], rtol=1e-6)
        assert r.interpolants[0](0.1) == pytest.approx(r.interpolants[0](-0.1), rel=1e-6)

    def test_failure_markers(self):
        def family(t):
            if t > 0:
                return get_problem("rod", gamma=t)
            # an odd node count hits the singular point at x = 0
            return bessel_generalized(0.0)

        r = sweep(family, [-1.0, 1.0, 2.0], DiscretizationPlan(n=33), 2)
        assert np.isnan(r.tracks[0]).all()
        assert -1.0 in r.failures and "SingularNodeError" in r.failures[-1.0]
        assert np.isfinite(r.tracks[1:]).all()

    @pytest.mark.parametrize("grid", [[], [0.0, 0.0], [1.0, 0.0]])
    def test_bad_grid(self, grid):
        with pytest.raises(InvalidArgument):
            sweep(bessel_generalized, grid, DiscretizationPlan(n=16), 2)


class TestDiagnostics:
    def test_resolved_rod(self):
        s = solve(get_problem("rod"), DiscretizationPlan(n=128), count=6)
        reports = coeff_decay_report(s)
        assert len(reports) == 6
        assert all(r.resolved for r in reports)
        assert all(r.plateau < 1e-13 for r in reports)

    def test_unresolved_at_low_resolution(self):
        s = solve(get_problem("rod"), DiscretizationPlan(n=12), count=6)
        assert not coeff_decay_report(s)[-1].resolved

    def test_partition(self):
        ref = ReferenceSpectrum(values=((0, -4.0, "a"), (1, -1.0, "b")))
        part = spectrum_partition(values_only([-4.01, -1.02, 0.05, 0.2, 0.6]), ref)
        assert [m[0] for m in part.matched] == [0, 1]
        np.testing.assert_allclose(part.tail, [0.05, 0.2, 0.6])
        np.testing.assert_allclose(part.tail_spacing, [0.15, 0.4])

    def test_partition_closed_form(self):
        ref = ReferenceSpectrum(closed_form=lambda n: float((n + 1) ** 2))
        part = spectrum_partition([1.0, 4.0, 7.0], ref)
        assert len(part.matched) == 2 and part.tail.tolist() == [7.0]

    def test_partition_uses_each_reference_once(self):
        ref = ReferenceSpectrum(values=((0, 1.0, "a"),))
        part = spectrum_partition([1.0, 1.01], ref)
        assert len(part.matched) == 1 and part.tail.size == 1

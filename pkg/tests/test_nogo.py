import numpy as np
import pytest

from weakjoint.errors import DependentSymmetrizedSet
from weakjoint.models.nogo import ObservablePair, Verdict
from weakjoint.models.operators import Operator
from weakjoint.services import nogo, qlinalg, weakcore


@pytest.fixture
def pauli_pair():
    sx, _, sz = qlinalg.pauli_matrices()
    return ObservablePair(sx, sz)


@pytest.fixture
def spin_half_pair():
    jx, _, jz = qlinalg.spin_operators(0.5)
    return ObservablePair(jx, jz)


def _at(profile, theta):
    return profile.distance[int(np.argmin(np.abs(profile.thetas - theta)))]


class TestSpectrumSweep:
    def test_paulis_equal_weights_are_obstructed(self, pauli_pair):
        profile = nogo.btheta_spectrum_sweep(pauli_pair, 1.0, 1.0, n_theta=181, threads=1)
        assert profile.verdict is Verdict.INFEASIBLE
        assert _at(profile, np.pi / 4) == pytest.approx(np.sqrt(2) - 1, abs=1e-12)
        window = (profile.thetas >= np.pi / 8) & (profile.thetas <= 3 * np.pi / 8)
        assert profile.distance[window].min() >= 0.08
        start, end = profile.infeasible_window
        assert end - start >= np.pi / 181

    def test_eigenvalue_weights_touch_spectrum_only_at_zero(self, pauli_pair):
        profile = nogo.btheta_spectrum_sweep(pauli_pair, 1.0, 0.0, n_theta=181, threads=1)
        assert _at(profile, 0.0) <= 1e-14
        assert _at(profile, np.pi / 2) == pytest.approx(1.0)
        assert profile.verdict is Verdict.INFEASIBLE

    def test_commuting_pair_is_feasible(self):
        a1 = Operator(np.diag([1.0, 0.0]), None, hermitian=True)
        a2 = Operator(np.diag([2.0, 0.0]), None, hermitian=True)
        profile = nogo.btheta_spectrum_sweep(ObservablePair(a1, a2), 1.0, 2.0, n_theta=91, threads=1)
        np.testing.assert_allclose(profile.distance, 0.0, atol=1e-14)
        assert profile.verdict is Verdict.FEASIBLE
        assert profile.infeasible_window is None

    def test_threaded_sweep_matches_inline(self, pauli_pair):
        inline = nogo.btheta_spectrum_sweep(pauli_pair, 0.3, 0.9, n_theta=61, threads=1)
        threaded = nogo.btheta_spectrum_sweep(pauli_pair, 0.3, 0.9, n_theta=61, threads=4)
        np.testing.assert_array_equal(inline.distance, threaded.distance)

    def test_too_few_angles(self, pauli_pair):
        with pytest.raises(ValueError):
            nogo.btheta_spectrum_sweep(pauli_pair, 1.0, 1.0, n_theta=2)

    def test_pair_must_be_hermitian(self):
        with pytest.raises(ValueError):
            ObservablePair(Operator(np.array([[0, 1], [0, 0]]), None), qlinalg.identity(2))


class TestMinimalPolynomial:
    def test_pauli(self):
        _, _, sz = qlinalg.pauli_matrices()
        poly = nogo.minimal_polynomial(sz)
        np.testing.assert_allclose(poly.coefficients, [1, 0, -1], atol=1e-14)

    def test_identity_is_linear(self):
        poly = nogo.minimal_polynomial(qlinalg.identity(3))
        assert poly.degree == 1
        np.testing.assert_allclose(poly.coefficients, [1, -1], atol=1e-14)
        np.testing.assert_allclose(nogo.characteristic_polynomial(qlinalg.identity(3)), [1, -3, 3, -1], atol=1e-12)

    def test_spin_one(self):
        _, _, jz = qlinalg.spin_operators(1.0)
        poly = nogo.minimal_polynomial(jz)
        np.testing.assert_allclose(poly.coefficients, [1, 0, -1, 0], atol=1e-14)

    @pytest.mark.parametrize("j", [0.5, 1.0, 1.5])
    def test_annihilates_operator(self, j):
        jx, _, jz = qlinalg.spin_operators(j)
        b = (jx.entries + jz.entries) / np.sqrt(2)
        poly = nogo.minimal_polynomial(b)
        value = sum(c * np.linalg.matrix_power(b, poly.degree - i) for i, c in enumerate(poly.coefficients))
        np.testing.assert_allclose(value, 0.0, atol=1e-10)
        assert poly.degree == int(2 * j + 1)

    def test_near_degenerate_roots_are_flagged(self):
        poly = nogo.minimal_polynomial(np.diag([1.0, 1.0 + 1e-6]))
        assert poly.degree == 2
        assert poly.near_degenerate


class TestSymmetrizedOperators:
    def test_anticommuting_paulis(self, pauli_pair):
        s02, s11, s20 = nogo.symmetrized_operators(pauli_pair, 2)
        np.testing.assert_allclose(s11.entries, 0.0, atol=1e-12)
        np.testing.assert_allclose(s02.entries, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(s20.entries, np.eye(2), atol=1e-12)

    def test_zeroth_order_is_identity(self, pauli_pair):
        (s,) = nogo.symmetrized_operators(pauli_pair, 0)
        np.testing.assert_array_equal(s.entries, np.eye(2))

    def test_matches_explicit_symmetrization(self, rng):
        m = [rng.normal(size=(3, 3)) for _ in range(2)]
        a1, a2 = (Operator(x + x.T, None, hermitian=True) for x in m)
        _, s12, _, _ = nogo.symmetrized_operators(ObservablePair(a1, a2), 3)
        x, y = a1.entries, a2.entries
        np.testing.assert_allclose(s12.entries, (x @ y @ y + y @ x @ y + y @ y @ x) / 3, atol=1e-10)


class TestApproximateAssignment:
    def test_problem_targets(self, spin_half_pair):
        prob = nogo.build_approx_problem(spin_half_pair, 0.5, 0.5, 2, weakcore.gell_mann_basis(2))
        assert [value for _, value in prob.targets] == [1.0, 0.5, 0.5]

    def test_wrong_degree_rejected(self, spin_half_pair):
        with pytest.raises(ValueError):
            nogo.build_approx_problem(spin_half_pair, 0.5, 0.5, 3, weakcore.gell_mann_basis(2))

    def test_dependent_targets(self):
        _, _, sz = qlinalg.pauli_matrices()
        with pytest.raises(DependentSymmetrizedSet) as info:
            nogo.build_approx_problem(ObservablePair(sz, sz), 1.0, 0.0, 2, weakcore.gell_mann_basis(2))
        assert info.value.verdict

    def test_low_orders_are_exact(self, spin_half_pair):
        ens = nogo.approx_assignment(spin_half_pair, 0.5, -0.3, 2, weakcore.gell_mann_basis(2))
        assert weakcore.weak_value(spin_half_pair.a1, ens) == pytest.approx(0.5, abs=1e-10)
        assert weakcore.weak_value(spin_half_pair.a2, ens) == pytest.approx(-0.3, abs=1e-10)

    def test_leading_correction_closed_form(self, spin_half_pair):
        alpha = np.array([0.5, -0.3])
        for q in ([1e-2, 0.0], [3e-3, -4e-3], [0.0, 0.2]):
            q = np.array(q)
            expected = ((alpha @ q) ** 2 - (q @ q) / 4) / 2
            assert nogo.leading_correction(spin_half_pair, *alpha, *q) == pytest.approx(expected, abs=1e-15)

    def test_leading_correction_at_origin(self, spin_half_pair):
        assert nogo.leading_correction(spin_half_pair, 0.5, 0.5, 0.0, 0.0) == 0

    def test_exponent_error_scaling(self, spin_half_pair):
        ens = nogo.approx_assignment(spin_half_pair, 0.3, 0.2, 2, weakcore.gell_mann_basis(2))
        directions = np.linspace(0, np.pi, 4, endpoint=False)
        q_norms = np.geomspace(1e-3, 1e-1, 9)
        scaling = nogo.exponent_error_scaling(spin_half_pair, 0.3, 0.2, ens, directions, q_norms)
        assert np.all(scaling.slopes >= 2.7)
        at_one_percent = int(np.argmin(np.abs(q_norms - 1e-2)))
        np.testing.assert_allclose(
            scaling.measured[:, at_one_percent], scaling.predicted[:, at_one_percent], atol=1e-4
        )

    def test_exact_ray_has_infinite_slope(self, spin_half_pair):
        # beta = 1/2 is an eigenvalue along theta = 0, so F(q) is a pure phase there
        ens = nogo.approx_assignment(spin_half_pair, 0.5, 0.5, 2, weakcore.gell_mann_basis(2))
        scaling = nogo.exponent_error_scaling(spin_half_pair, 0.5, 0.5, ens, [0.0], np.geomspace(1e-3, 1e-1, 5))
        assert np.all(scaling.errors <= 1e-14)
        assert scaling.slopes[0] == np.inf

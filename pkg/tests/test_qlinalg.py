import numpy as np
import pytest

from tests.conftest import random_hermitian
from weakjoint.models.operators import CanonicalGrid, Operator, StateVector
from weakjoint.services import qlinalg


class TestOperator:
    def test_factorization_must_multiply_to_dim(self):
        with pytest.raises(ValueError):
            Operator(np.eye(4), (2, 3))

    def test_hermitian_flag_is_checked(self):
        with pytest.raises(ValueError):
            Operator.from_matrix([[0, 1], [0, 0]], hermitian=True)

    def test_hermitian_tolerance_is_relative(self):
        m = 1e6 * np.array([[1.0, 1.0], [1.0 + 1e-13, 1.0]])
        assert Operator.from_matrix(m, hermitian=True).is_hermitian()

    def test_state_normalized_on_construction(self):
        psi = StateVector([3.0, 4.0])
        np.testing.assert_allclose(np.linalg.norm(psi.amplitudes), 1.0)

    def test_zero_state_rejected(self):
        with pytest.raises(ValueError):
            StateVector(np.zeros(3))


class TestTensorProduct:
    def test_identities(self):
        one = qlinalg.identity(2)
        np.testing.assert_array_equal(qlinalg.tensor_product(one, one).entries, np.eye(4))

    def test_system_major_blocks(self):
        sx, _, sz = qlinalg.pauli_matrices()
        product = qlinalg.tensor_product(sx, sz)
        expected = np.block([[np.zeros((2, 2)), sz.entries], [sz.entries, np.zeros((2, 2))]])
        np.testing.assert_array_equal(product.entries, expected)
        assert product.factorization == (2, 2)


class TestPartialTrace:
    def test_maximally_entangled_reduction(self):
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = Operator(np.outer(phi, phi.conj()), (2, 2))
        np.testing.assert_allclose(qlinalg.partial_trace(rho, 0).entries, np.eye(2) / 2, atol=1e-15)

    def test_product_operator(self, rng):
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 3)
        ab = qlinalg.tensor_product(a, b)
        np.testing.assert_allclose(qlinalg.partial_trace(ab, 0).entries, a.entries * b.trace(), atol=1e-12)
        np.testing.assert_allclose(qlinalg.partial_trace(ab, 1).entries, b.entries * a.trace(), atol=1e-12)

    def test_matches_index_summation(self, rng):
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho = Operator(m @ m.conj().T, (2, 3))
        brute = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                brute[i, j] = sum(rho.entries[i * 3 + k, j * 3 + k] for k in range(3))
        reduced = qlinalg.partial_trace(rho, 0)
        np.testing.assert_allclose(reduced.entries, brute, atol=1e-12)
        assert abs(reduced.trace() - rho.trace()) <= 1e-12

    def test_three_subsystems_in_either_order(self, rng):
        m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        op = Operator(m, (2, 3, 2))
        for keep in range(3):
            assert abs(qlinalg.partial_trace(op, keep).trace() - op.trace()) <= 1e-12

    def test_invalid_subsystem(self):
        with pytest.raises(ValueError):
            qlinalg.partial_trace(qlinalg.identity(4, (2, 2)), 2)
        with pytest.raises(ValueError):
            qlinalg.partial_trace(qlinalg.identity(4), 0)


class TestUnitaryFromGenerator:
    def test_zero_coefficients_give_identity(self):
        sx, _, sz = qlinalg.pauli_matrices()
        u = qlinalg.unitary_from_generator([(sx, 0.0), (sz, 0.0)])
        np.testing.assert_allclose(u.entries, np.eye(2), atol=1e-15)

    def test_empty_generator_is_identity(self):
        u = qlinalg.unitary_from_generator([], dim=3)
        np.testing.assert_array_equal(u.entries, np.eye(3))
        assert u.is_unitary(1e-15)

    def test_empty_generator_needs_dimension(self):
        with pytest.raises(ValueError, match="explicit dimension"):
            qlinalg.unitary_from_generator([])

    def test_dimension_must_match_terms(self):
        _, _, sz = qlinalg.pauli_matrices()
        with pytest.raises(ValueError, match="disagree in dimension"):
            qlinalg.unitary_from_generator([(sz, 0.4)], dim=3)

    def test_diagonal_generator(self):
        _, _, sz = qlinalg.pauli_matrices()
        u = qlinalg.unitary_from_generator([(sz, 0.4)])
        np.testing.assert_allclose(u.entries, np.diag([np.exp(0.4j), np.exp(-0.4j)]), atol=1e-14)

    def test_closed_form_two_level(self):
        sx, _, sz = qlinalg.pauli_matrices()
        u = qlinalg.unitary_from_generator([(sx, 1.0), (sz, 1.0)])
        r = np.sqrt(2)
        expected = np.cos(r) * np.eye(2) + 1j * np.sin(r) * (sx.entries + sz.entries) / r
        np.testing.assert_allclose(u.entries, expected, atol=1e-14)

    @pytest.mark.parametrize("dim", [4, 16, 64])
    def test_unitarity(self, rng, dim):
        u = qlinalg.unitary_from_generator([(random_hermitian(rng, dim), 1.3), (random_hermitian(rng, dim), -0.7)])
        assert u.is_unitary(1e-10)

    @pytest.mark.slow
    def test_unitarity_at_256(self, rng):
        assert qlinalg.unitary_from_generator([(random_hermitian(rng, 256), 1.0)]).is_unitary(1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            qlinalg.unitary_from_generator([(Operator(np.array([[0, 1], [0, 0]]), None), 1.0)])


class TestSpinOperators:
    @pytest.mark.parametrize("j", [0.5, 1.0, 1.5])
    def test_commutation_and_spectrum(self, j):
        jx, jy, jz = qlinalg.spin_operators(j)
        np.testing.assert_allclose(qlinalg.commutator(jx, jy).entries, 1j * jz.entries, atol=1e-14)
        np.testing.assert_allclose(np.linalg.eigvalsh(jx.entries), np.arange(-j, j + 1), atol=1e-12)

    def test_rejects_non_half_integer(self):
        with pytest.raises(ValueError):
            qlinalg.spin_operators(0.3)


class TestCanonicalGrid:
    def test_positions_centered_and_increasing(self):
        grid = CanonicalGrid(8, 4.0)
        np.testing.assert_allclose(grid.x, (np.arange(8) - 4) * 0.5)
        assert np.all(np.diff(grid.x) > 0)

    def test_position_operator_eigenvalues(self):
        grid = CanonicalGrid(16, 6.0)
        x_op, _ = qlinalg.grid_canonical_pair(grid)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(x_op.entries)), grid.x, atol=1e-14)

    def test_momentum_acts_on_plane_waves(self):
        grid = CanonicalGrid(32, 10.0)
        _, p_op = qlinalg.grid_canonical_pair(grid)
        for k in range(grid.points):
            psi = qlinalg.plane_wave(grid, k).amplitudes
            np.testing.assert_allclose(p_op.entries @ psi, grid.p[k] * psi, atol=1e-10)

    def test_snap_and_nearest_index(self):
        grid = CanonicalGrid(20, 10.0)
        assert grid.snap(0.74) == pytest.approx(0.5)
        assert grid.x[grid.nearest_index(1.1)] == pytest.approx(1.0)

    def test_commutator_on_gaussian(self):
        grid = CanonicalGrid(128, 20.0)
        x_op, p_op = qlinalg.grid_canonical_pair(grid)
        value = qlinalg.expectation(qlinalg.commutator(x_op, p_op), qlinalg.gaussian_state(grid))
        assert abs(value - 1j) <= 1e-3

    def test_commutator_converges_as_d_doubles(self):
        # narrow packet: under-resolved at d=32, resolved from d=64 on
        errors = []
        for d in (32, 64, 128):
            grid = CanonicalGrid(d, 20.0)
            x_op, p_op = qlinalg.grid_canonical_pair(grid)
            state = qlinalg.gaussian_state(grid, width=0.5)
            errors.append(abs(qlinalg.expectation(qlinalg.commutator(x_op, p_op), state) - 1j))
        assert errors[1] < errors[0]
        assert errors[2] <= errors[1] + 1e-12
        assert errors[2] <= 1e-10

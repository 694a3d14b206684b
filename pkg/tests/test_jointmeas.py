import numpy as np
import pytest

from tests.conftest import random_hermitian, random_state
from weakjoint.errors import AmplitudeCollapse, EdgeClipping, OrthogonalSelection
from weakjoint.models.ensembles import PrePostEnsemble
from weakjoint.models.instruments import EPRSelection, InstrumentGrid, KrausSample
from weakjoint.models.operators import CanonicalGrid, StateVector
from weakjoint.services import jointmeas, qlinalg, weakcore

NAIVE_BETA = np.array([[0.0, 0.5], [0.5, 0.0]])


def _pointer_grid(spread: float) -> InstrumentGrid:
    # q window of eight position spreads on 64 points
    return InstrumentGrid(64, 8 / (2 * spread), (spread, spread))


@pytest.fixture(scope="module")
def naive_pointer_box():
    # resolves the naive selection over a pointer window of |q| <= 8
    return CanonicalGrid(1024, 40.0)


class TestSelections:
    def test_epr_labels(self):
        sel = EPRSelection(x_minus=1.0, p_plus=0.6, x_plus=0.4, p_minus=-0.2)
        assert (sel.x, sel.p) == pytest.approx((0.9, 0.1))
        assert (sel.x_a, sel.p_a) == pytest.approx((-0.1, 0.5))

    def test_snapping(self):
        grid = CanonicalGrid(64, 20.0)
        sel = EPRSelection(x_minus=1.0, p_plus=0.6, x_plus=0.4, p_minus=-0.2).snapped(grid)
        assert sel.x_minus == pytest.approx(0.9375)
        assert (sel.p_plus, sel.x_plus, sel.p_minus) == pytest.approx((0.6, 0.4, -0.2))
        assert sel.envelope == pytest.approx(2.5)

    def test_epr_states_are_normalized_and_overlap(self):
        grid = CanonicalGrid(32, 20.0)
        ens = jointmeas.epr_states(EPRSelection(0.0, 0.0, 0.0, 0.0), grid)
        assert ens.dim == 32 * 32
        assert abs(ens.overlap) > 1e-6

    def test_clipping_is_reported(self):
        with pytest.raises(EdgeClipping) as info:
            jointmeas.epr_states(EPRSelection(x_minus=9.0, p_plus=0.0, x_plus=0.0, p_minus=0.0), CanonicalGrid(64, 20.0))
        assert info.value.clearance < 0

    def test_naive_labels_keep_x_and_snap_p(self):
        grid = CanonicalGrid(64, 20.0)
        x, p = jointmeas.naive_labels(grid, 0.4, 0.5)
        assert x == 0.4
        assert p == pytest.approx(grid.momentum_spacing * 2)

    def test_naive_postselection_is_centred_off_lattice(self):
        grid = CanonicalGrid(64, 20.0)
        ens = jointmeas.naive_ensemble(grid, 0.4, 0.0)
        weights = np.abs(ens.psi_f.amplitudes) ** 2
        assert np.dot(weights, grid.x) / weights.sum() == pytest.approx(0.4, abs=1e-6)

    def test_epr_final_state_is_centred_on_the_labels(self):
        grid = CanonicalGrid(64, 16.0)
        sel = EPRSelection(x_minus=1.0, p_plus=0.6, x_plus=0.4, p_minus=-0.2)
        final = jointmeas.epr_states(sel, grid).final_matrix()
        weights = np.abs(final) ** 2 / np.sum(np.abs(final) ** 2)
        x, x_a = grid.x[:, None], grid.x[None, :]
        assert np.sum(weights * (x + x_a) / 2) == pytest.approx(0.4, abs=5e-3)
        assert np.sum(weights * (x - x_a)) == pytest.approx(1.0, abs=1e-3)


class TestPhaseFit:
    def test_linear_phase(self):
        fit = jointmeas.phase_fit(jointmeas.model_kraus_sample(InstrumentGrid(17, 0.5), (2.0, 3.0)))
        np.testing.assert_allclose(fit.alpha, [2.0, 3.0], atol=1e-10)
        assert abs(fit.cross(0, 1)) <= 1e-10
        assert fit.residual_rms <= 1e-10

    def test_naive_back_action_model(self):
        fit = jointmeas.phase_fit(jointmeas.model_kraus_sample(InstrumentGrid(9, 0.5), (0.0, 0.0), NAIVE_BETA))
        assert fit.cross(0, 1) == pytest.approx(0.5, abs=1e-10)
        np.testing.assert_allclose(fit.alpha, 0.0, atol=1e-10)

    def test_four_axes(self):
        grid = InstrumentGrid(8, 0.5, (1.0, 1.0, 1.0, 1.0))
        beta = np.zeros((4, 4))
        beta[0, 3] = beta[3, 0] = beta[1, 2] = beta[2, 1] = 0.5
        fit = jointmeas.phase_fit(jointmeas.model_kraus_sample(grid, (0.1, -0.2, 0.3, 0.4), beta))
        np.testing.assert_allclose(fit.beta, beta, atol=1e-10)

    def test_amplitude_collapse(self):
        grid = InstrumentGrid(9, 0.5)
        values = np.ones(grid.shape, dtype=complex)
        values[0, 0] = 0.01
        with pytest.raises(AmplitudeCollapse) as info:
            jointmeas.phase_fit(KrausSample(values, grid))
        assert info.value.min_amplitude == pytest.approx(0.01)

    def test_alpha_dimension_checked(self):
        with pytest.raises(ValueError):
            jointmeas.model_kraus_sample(InstrumentGrid(9, 0.5), (1.0, 2.0, 3.0))


class TestKrausSample:
    def test_unit_at_origin(self, rng):
        ens = weakcore.product_ensemble(random_state(rng, 3), random_state(rng, 3))
        a, b = (qlinalg.spin_operators(1.0)[k] for k in (0, 2))
        sample = jointmeas.kraus_sample(ens, [a, b], InstrumentGrid(9, 0.5), threads=1)
        assert sample.at_origin() == pytest.approx(1.0, abs=1e-12)

    def test_first_order_is_weak_value(self, rng):
        ens = weakcore.product_ensemble(random_state(rng, 2), random_state(rng, 2))
        sx, _, sz = qlinalg.pauli_matrices()
        grid = InstrumentGrid(9, 1e-4)
        sample = jointmeas.kraus_sample(ens, [sx, sz], grid, threads=1)
        centre = grid.n // 2
        slope = (sample.values[centre + 1, centre] - sample.values[centre - 1, centre]) / (2j * grid.spacing)
        assert slope == pytest.approx(weakcore.weak_value(sx, ens), rel=1e-6)

    def test_threads_agree(self, rng):
        ens = weakcore.product_ensemble(random_state(rng, 2), random_state(rng, 2))
        sx, _, sz = qlinalg.pauli_matrices()
        grid = InstrumentGrid(8, 0.5)
        inline = jointmeas.kraus_sample(ens, [sx, sz], grid, threads=1)
        threaded = jointmeas.kraus_sample(ens, [sx, sz], grid, threads=4)
        np.testing.assert_array_equal(inline.values, threaded.values)

    def test_observable_count_must_match_grid(self, rng):
        ens = weakcore.product_ensemble(random_state(rng, 2), random_state(rng, 2))
        with pytest.raises(ValueError):
            jointmeas.kraus_sample(ens, [qlinalg.pauli_matrices()[0]], InstrumentGrid(9, 0.5), threads=1)

    def test_orthogonal_selection(self):
        sx, _, sz = qlinalg.pauli_matrices()
        ens = weakcore.product_ensemble(StateVector([1, 0]), StateVector([0, 1]))
        with pytest.raises(OrthogonalSelection):
            jointmeas.kraus_sample(ens, [sx, sz], InstrumentGrid(9, 0.5), threads=1)

    def test_split_operator_converges_to_dense(self):
        canonical = CanonicalGrid(32, 20.0)
        ens = jointmeas.epr_states(EPRSelection(0.0, 0.3, 0.2, 0.0), canonical)
        grid = InstrumentGrid(8, 0.5)
        x_op, p_op = qlinalg.grid_canonical_pair(canonical)
        dense = jointmeas.kraus_sample(ens, [x_op, p_op], grid, threads=1).values
        one = jointmeas.split_operator_kraus_sample(ens, canonical, grid, steps=1, threads=1).values
        many = jointmeas.split_operator_kraus_sample(ens, canonical, grid, steps=256, threads=1).values
        coarse, fine = np.max(np.abs(one - dense)), np.max(np.abs(many - dense))
        assert fine <= max(coarse / 100, 1e-10)

    def test_split_operator_needs_two_axes(self):
        canonical = CanonicalGrid(16, 12.0)
        ens = jointmeas.epr_states(EPRSelection(0.0, 0.0, 0.0, 0.0), canonical)
        with pytest.raises(ValueError):
            jointmeas.split_operator_kraus_sample(ens, canonical, InstrumentGrid(8, 0.5, (1.0,) * 4), threads=1)


class TestPointerDistribution:
    def test_unit_kraus_gives_instrument_spreads(self):
        grid = InstrumentGrid(64, 8.0, (0.5, 0.5))
        dist = jointmeas.conditional_pointer_distribution(jointmeas.model_kraus_sample(grid, (0.0, 0.0)))
        assert dist.probability.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(dist.standard_deviations(), [0.5, 0.5], rtol=1e-6)
        np.testing.assert_allclose(dist.means(), 0.0, atol=1e-12)

    def test_linear_phase_shifts_the_pointer(self):
        grid = _pointer_grid(1.0)
        dist = jointmeas.conditional_pointer_distribution(jointmeas.model_kraus_sample(grid, (1.3, -0.7)))
        np.testing.assert_allclose(dist.means(), [1.3, -0.7], atol=1e-6)
        np.testing.assert_allclose(dist.standard_deviations(), [1.0, 1.0], rtol=1e-6)

    def test_shift_theorem_distance(self):
        grid = _pointer_grid(1.0)
        linear = jointmeas.model_kraus_sample(grid, (0.4, 0.2))
        assert jointmeas.shift_theorem_distance(linear, jointmeas.phase_fit(linear)) <= 1e-10

        distances = []
        for beta in (0.05, 0.5):
            sample = jointmeas.model_kraus_sample(grid, (0.4, 0.2), [[0, beta], [beta, 0]])
            fit = jointmeas.phase_fit(jointmeas.model_kraus_sample(InstrumentGrid(9, 0.5), (0.4, 0.2), [[0, beta], [beta, 0]]))
            distances.append(jointmeas.shift_theorem_distance(sample, fit))
        assert 0 < distances[0] < distances[1]

    def test_two_peak_instrument_is_normalized(self):
        q = np.linspace(-8, 8, 129)
        psi = jointmeas.two_peak_instrument(q, 1.0, 2.0)
        assert np.sum(np.abs(psi) ** 2) * (q[1] - q[0]) == pytest.approx(1.0)
        assert abs(psi[np.argmin(np.abs(q - 1.0))]) > abs(psi[np.argmin(np.abs(q))])

    def test_full_tensor_matches_kraus_reduction(self, rng):
        ens = PrePostEnsemble(random_state(rng, 4), random_state(rng, 4), system_dim=2, ancilla_dim=2)
        sx, _, sz = qlinalg.pauli_matrices()
        grid = InstrumentGrid(8, 1.0, (0.5, 0.5))
        reduced = jointmeas.conditional_pointer_distribution(jointmeas.kraus_sample(ens, [sx, sz], grid, threads=1))
        full = jointmeas.full_tensor_pointer_distribution(ens, [sx, sz], grid)
        np.testing.assert_allclose(full.probability, reduced.probability, atol=1e-10)

    def test_full_tensor_agrees_in_total_variation_at_d8(self, rng):
        ens = PrePostEnsemble(random_state(rng, 8), random_state(rng, 8), system_dim=8)
        observables = [random_hermitian(rng, 8), random_hermitian(rng, 8)]
        grid = InstrumentGrid(8, 1.0, (0.5, 0.5))
        reduced = jointmeas.conditional_pointer_distribution(jointmeas.kraus_sample(ens, observables, grid, threads=1))
        full = jointmeas.full_tensor_pointer_distribution(ens, observables, grid)
        assert full.probability.shape == (8, 8)
        assert 0.5 * np.sum(np.abs(full.probability - reduced.probability)) <= 1e-9


class TestUncertainty:
    @pytest.mark.parametrize("spread, product, tolerance", [(0.5, 0.5, 0.005), (1.0, 1.0625, 0.011)])
    def test_naive_back_action_inflates_pointers(self, naive_pointer_box, spread, product, tolerance):
        report = jointmeas.naive_pointer_uncertainty(naive_pointer_box, (spread, spread), threads=1)
        assert report.method == "distribution"
        assert report.total_product == pytest.approx(product, abs=tolerance)
        assert report.bound == pytest.approx(product)
        np.testing.assert_allclose(report.pointer_means, 0.0, atol=1e-6)

    def test_naive_spread_sweep_stays_above_half(self, naive_pointer_box):
        reports = jointmeas.JointMeasurementService(threads=1).naive_sweep(naive_pointer_box, (0.5, 0.75, 1.0, 1.5, 2.0))
        assert len(reports) == 25
        for report in reports:
            assert report.total_product >= 0.5 * (1 - 1e-4)
            assert report.total_product == pytest.approx(report.bound, rel=0.01)

    def test_simulated_naive_pointer_matches_phase_model(self, naive_pointer_box):
        simulated = jointmeas.naive_pointer_uncertainty(naive_pointer_box, (0.5, 0.5), threads=1)
        model_sample = jointmeas.model_kraus_sample(_pointer_grid(0.5), (0.0, 0.0), NAIVE_BETA)
        model = jointmeas.uncertainty_products(jointmeas.conditional_pointer_distribution(model_sample))
        np.testing.assert_allclose(simulated.pointer_spreads, model.pointer_spreads, rtol=0.01)

    def test_propagated_spreads(self):
        fit = jointmeas.phase_fit(jointmeas.model_kraus_sample(InstrumentGrid(9, 0.5), (0.0, 0.0), NAIVE_BETA))
        np.testing.assert_allclose(jointmeas.propagated_spreads(fit, (0.5, 0.5)), [np.sqrt(0.5)] * 2, rtol=1e-9)

    def test_two_peak_instruments_respect_half(self):
        grid = InstrumentGrid(64, 8.0, (0.5, 0.5))
        wavefunctions = [jointmeas.two_peak_instrument(grid.q_axis, 0.5, 2.0)] * 2
        bare = jointmeas.conditional_pointer_distribution(jointmeas.model_kraus_sample(grid, (0.0, 0.0)), wavefunctions)
        dist = jointmeas.conditional_pointer_distribution(
            jointmeas.model_kraus_sample(grid, (0.0, 0.0), NAIVE_BETA), wavefunctions
        )
        report = jointmeas.uncertainty_products(dist, instrument_spreads=bare.standard_deviations())
        assert report.meets_half
        assert report.total_product > 0.5


class TestEPRFactorization:
    def test_operators(self):
        ops = jointmeas.pm_operators(CanonicalGrid(8, 6.0))
        assert set(ops) == {"x_plus", "p_plus", "x_minus", "p_minus"}
        assert all(op.dim == 64 and op.is_hermitian() for op in ops.values())

    def test_commutators(self):
        values = jointmeas.pm_commutators(CanonicalGrid(64, 20.0))
        assert abs(values["x_plus,p_plus"] - 1j) <= 1e-3
        assert abs(values["x_minus,p_minus"] - 1j) <= 1e-3
        assert abs(values["x_plus,p_minus"]) <= 1e-3
        assert abs(values["x_minus,p_plus"]) <= 1e-3

    @pytest.mark.parametrize("method", ["split", "dense"])
    def test_factorization_is_exact(self, method):
        grid = CanonicalGrid(16, 12.0)
        sel = EPRSelection(x_minus=0.75, p_plus=0.2, x_plus=0.1, p_minus=0.0)
        assert jointmeas.factorization_residual(sel, grid, [(0.3, -0.2), (0.5, 0.5)], method=method) <= 1e-10

    def test_factorization_at_origin(self):
        grid = CanonicalGrid(16, 12.0)
        assert jointmeas.factorization_residual(EPRSelection(0.0, 0.0, 0.0, 0.0), grid, [(0.0, 0.0)]) <= 1e-12

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            jointmeas.factorization_residual(EPRSelection(0.0, 0.0, 0.0, 0.0), CanonicalGrid(16, 12.0), [(0.1, 0.1)],
                                             method="trotter")


class TestNaiveEnsemble:
    @staticmethod
    def _back_action(d: int, x: float = 0.0, p: float = 0.0) -> float:
        canonical = CanonicalGrid(d, 20.0)
        x_op, p_op = qlinalg.grid_canonical_pair(canonical)
        sample = jointmeas.kraus_sample(jointmeas.naive_ensemble(canonical, x, p), [x_op, p_op], InstrumentGrid(9, 0.5),
                                        threads=1)
        return jointmeas.phase_fit(sample).cross(0, 1)

    @pytest.mark.parametrize("x", [0.0, 0.3125, 0.625, 0.9375, 0.4])
    def test_back_action_is_one_half_at_any_position(self, x):
        assert self._back_action(64, x) == pytest.approx(0.5, abs=0.01)

    def test_back_action_with_momentum(self):
        assert self._back_action(64, 0.3, 0.9) == pytest.approx(0.5, abs=0.01)

    def test_linear_phase_reads_the_labels(self):
        canonical = CanonicalGrid(64, 20.0)
        x_op, p_op = qlinalg.grid_canonical_pair(canonical)
        ens = jointmeas.naive_ensemble(canonical, 0.7, 0.6)
        fit = jointmeas.phase_fit(jointmeas.kraus_sample(ens, [x_op, p_op], InstrumentGrid(9, 0.5), threads=1))
        np.testing.assert_allclose(fit.alpha, jointmeas.naive_labels(canonical, 0.7, 0.6), atol=0.01)

    def test_back_action_error_stays_small_up_the_ladder(self):
        errors = [abs(self._back_action(d) - 0.5) for d in (64, 128, 256)]
        assert max(errors) <= 0.01
        assert errors[1] <= max(errors[0], 2e-3)
        assert errors[2] <= max(errors[1], 2e-3)

    def test_split_sampling_matches_spectral(self):
        canonical = CanonicalGrid(64, 20.0)
        ens = jointmeas.naive_ensemble(canonical, 0.3, 0.0)
        grid = InstrumentGrid(9, 0.5)
        x_op, p_op = qlinalg.grid_canonical_pair(canonical)
        spectral = jointmeas.kraus_sample(ens, [x_op, p_op], grid, threads=1)
        split = jointmeas.split_operator_kraus_sample(ens, canonical, grid, steps=1, threads=1)
        np.testing.assert_allclose(split.values, spectral.values, atol=2e-3)


LABELLED_SELECTION = EPRSelection(x_minus=1.0, p_plus=0.6, x_plus=0.4, p_minus=-0.2)


class TestExperiments:
    def test_epr_inference(self):
        xp = jointmeas.canonical_inference_experiment(LABELLED_SELECTION, 64, 20.0, InstrumentGrid(9, 0.5, (1.0, 1.0)),
                                                      sizes=(64,))
        np.testing.assert_allclose(xp.fit.alpha, xp.predicted_alpha, atol=0.02)
        assert xp.predicted_alpha == pytest.approx((xp.selection.x, xp.selection.p))
        assert xp.selection.p == pytest.approx(0.1)
        assert abs(xp.fit.cross(0, 1)) <= 0.01
        assert xp.naive_fit.cross(0, 1) == pytest.approx(0.5, abs=0.01)
        assert xp.suppression_ratio < 0.05
        assert len(xp.convergence) == 1
        assert xp.convergence[0].d == 64

    def test_epr_inference_converges_to_the_selected_labels(self):
        # x_- = 1 lies on the position lattice of both grids
        xp = jointmeas.canonical_inference_experiment(LABELLED_SELECTION, 64, 16.0, InstrumentGrid(9, 0.5), sizes=(32, 64),
                                                      naive=False, threads=1)
        assert xp.predicted_alpha == pytest.approx((0.9, 0.1))
        errors = [np.max(np.abs(np.subtract(row.alpha, (0.9, 0.1)))) for row in xp.convergence]
        assert errors[1] <= 0.01
        assert errors[1] <= errors[0] + 1e-3
        assert all(abs(row.beta12) <= 0.02 for row in xp.convergence)

    def test_epr_inference_without_naive(self):
        xp = jointmeas.canonical_inference_experiment(EPRSelection(0.0, 0.0, 0.0, 0.0), 32, 20.0, InstrumentGrid(9, 0.5),
                                                      sizes=(), naive=False, threads=1)
        assert xp.naive_fit is None
        assert xp.suppression_ratio is None
        assert xp.convergence == []

    def test_canonical_inference_needs_two_axes(self):
        with pytest.raises(ValueError):
            jointmeas.canonical_inference_experiment(EPRSelection(0.0, 0.0, 0.0, 0.0), 32, 20.0,
                                                     InstrumentGrid(9, 0.5, (1.0,) * 4), threads=1)

    @pytest.fixture(scope="class")
    def four_variable(self):
        return jointmeas.four_variable_experiment(
            EPRSelection(0.0, 0.0, 0.0, 0.0), 32, 12.0, InstrumentGrid(9, 0.5, (2.0,) * 4), threads=1
        )

    def test_four_variable_crossed_back_action(self, four_variable):
        fit = four_variable.fit
        assert fit.cross(0, 3) == pytest.approx(0.5, abs=0.02)
        assert fit.cross(1, 2) == pytest.approx(0.5, abs=0.02)
        assert abs(fit.cross(0, 1)) <= 0.02
        assert abs(fit.cross(2, 3)) <= 0.02
        np.testing.assert_allclose(fit.alpha, four_variable.predicted_alpha, atol=0.02)

    def test_four_variable_spreads_come_from_the_distribution(self, four_variable):
        report = four_variable.uncertainty
        assert report.method == "distribution"
        assert len(four_variable.sweep) == 2**4
        assert report.total_product >= 0.25
        assert four_variable.sweep_minimum >= 0.25
        assert all(2.0 * (1 - 1e-3) <= s <= 2.05 for s in report.pointer_spreads)
        for row in four_variable.sweep:
            assert all(s * (1 - 1e-3) <= out <= s * 1.03 for s, out in zip(row.spreads, row.pointer_spreads))

    def test_four_axis_pointer_grid(self):
        grid = InstrumentGrid(9, 0.5, (2.0,) * 4)
        pointer = jointmeas.four_axis_pointer_grid(grid, (2.0, 3.0))
        assert pointer.q_max == pytest.approx(1.5)
        assert pointer.n == 16
        assert pointer.spreads == (2.0,) * 4
        assert np.pi / pointer.spacing >= 5 * 3.0

    def test_four_axis_pointer_grid_grows_for_wide_sweeps(self):
        pointer = jointmeas.four_axis_pointer_grid(InstrumentGrid(9, 0.5, (2.0,) * 4), (2.0, 4.0))
        assert pointer.n == 21
        assert np.pi / pointer.spacing >= 5 * 4.0

    def test_service_runs_both_experiments(self):
        service = jointmeas.JointMeasurementService(threads=1)
        assert service.threads == 1
        xp = service.infer_xp(EPRSelection(0.0, 0.0, 0.0, 0.0), 32, 20.0, InstrumentGrid(9, 0.5), sizes=(), naive=False)
        assert abs(xp.fit.cross(0, 1)) <= 0.05
        xp4 = service.infer_xp4(EPRSelection(0.0, 0.0, 0.0, 0.0), 32, 12.0, InstrumentGrid(9, 0.5, (2.0,) * 4), (2.0,))
        assert len(xp4.sweep) == 1

    def test_service_defaults_to_configured_threads(self):
        assert jointmeas.JointMeasurementService().threads >= 1

    @pytest.mark.slow
    def test_epr_pointers_are_not_inflated(self):
        xp = jointmeas.canonical_inference_experiment(LABELLED_SELECTION, 128, 16.0, InstrumentGrid(9, 0.5, (2.0, 2.0)),
                                                      sizes=(32, 64, 128))
        np.testing.assert_allclose(xp.uncertainty.pointer_spreads, [2.0, 2.0], rtol=0.01)
        np.testing.assert_allclose(xp.uncertainty.pointer_means, (0.9, 0.1), atol=0.02)
        np.testing.assert_allclose(xp.fit.alpha, (0.9, 0.1), atol=0.01)
        assert xp.suppression_ratio <= 0.05

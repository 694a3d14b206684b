"""Von Neumann instrument simulator for pre- and postselected joint measurements.

Instruments never share a tensor state with the system here: the conditional
dynamics reduce to the scalar Kraus function F(q) in the q-representation, and
the pointer distribution is |FT[F(q) prod_k psi_k(q_k)]|^2.
`full_tensor_pointer_distribution` keeps the instruments in the state and is
used to cross-check that reduction.
"""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import replace
from typing import Literal

import numpy as np
from scipy import fft, linalg

from weakjoint.config import get_settings
from weakjoint.errors import AmplitudeCollapse, EdgeClipping
from weakjoint.models.ensembles import PrePostEnsemble
from weakjoint.models.instruments import (
    ConvergenceRow,
    EPRSelection,
    FourVariableExperiment,
    InferenceExperiment,
    InstrumentGrid,
    KrausSample,
    PhaseFit,
    PointerDistribution,
    SpreadSweepRow,
    UncertaintyReport,
    dual_axis,
)
from weakjoint.models.operators import CanonicalGrid, Operator, StateVector
from weakjoint.parallel import parallel_map
from weakjoint.services import qlinalg, weakcore

logger = logging.getLogger(__name__)

CONVERGENCE_SIZES = (32, 64, 128)
SWEEP_SPREADS = (2.0, 3.0)


# Selections

NAIVE_POSTSELECTION_WIDTH = 1.5  # position width of the naive postselection, in grid spacings
FINAL_PLUS_WIDTH = 0.5  # x_+ width of the EPR final state, in grid spacings


def naive_ensemble(grid: CanonicalGrid, x: float, p: float) -> PrePostEnsemble:
    """Preselect the grid plane wave nearest p, postselect a narrow Gaussian at x.

    The plane wave is an exact eigenstate of the grid momentum. The position
    selection is a Gaussian NAIVE_POSTSELECTION_WIDTH spacings wide, so its
    momentum content stays clear of the band edge and the back-action
    q1 q2 / 2 carries no lattice artefacts; it costs |F| a factor
    exp(-b^2 (q1^2 + 2 p q1)), with b the Gaussian width, that vanishes as d grows.
    """
    k = int(round(p / grid.momentum_spacing)) % grid.points
    width = NAIVE_POSTSELECTION_WIDTH * grid.spacing
    position = np.exp(-((grid.x - x) ** 2) / (4 * width**2))
    return weakcore.product_ensemble(qlinalg.plane_wave(grid, k), StateVector(position))


def naive_labels(grid: CanonicalGrid, x: float, p: float) -> tuple[float, float]:
    """(x, p) realized by naive_ensemble on this grid: x as given, p on the momentum lattice."""
    k = int(round(p / grid.momentum_spacing)) % grid.points
    return float(x), float(grid.p[k])


def _check_clearance(sel: EPRSelection, grid: CanonicalGrid) -> None:
    sigma = sel.envelope_for(grid)
    width = FINAL_PLUS_WIDTH * grid.spacing
    band = np.pi / grid.spacing
    half = grid.length / 2
    margins = {
        "envelope width above L/6": grid.length / 6 - sigma,
        "initial state reaches the position edge": half - (max(abs(sel.x), abs(sel.x_a)) + 3 * sigma),
        "initial state reaches the momentum band edge": band - (abs(sel.p_plus) + 3 / (2 * sigma)),
        "final state reaches the momentum band edge": band - (abs(sel.p_minus) + 3 / (4 * width)),
    }
    reason, clearance = min(margins.items(), key=lambda item: item[1])
    if clearance < 0:
        raise EdgeClipping(
            f"EPR states clip on a {grid.points}-point grid of length {grid.length}: {reason} "
            f"(short by {-clearance:.3g})",
            clearance,
        )


def epr_states(sel: EPRSelection, grid: CanonicalGrid) -> PrePostEnsemble:
    """Regularized EPR selection on the system (x) ancilla grid.

    psi_i = sum_j G(x_j) e^(i p_+ x_j) |x_j + x_->|x_j>, exact in x - x_a, with
    the envelope G of width sigma_env centred on x_a.
    psi_f = sum_j G(x_j - x) e^(i p_- 2 x_j) g(x_+(j, k) - x_+) |x_j>|x_k>: in
    x_- = x - x_a it is a wave packet of width 2 sigma_env around the selected
    x_-, and in x_+ = (x + x_a)/2 a Gaussian g of half a grid spacing, which
    tends to the x_+ eigenstate as d grows. Only x_- is snapped (to the position
    lattice); x_+, p_+ and p_- are used as given.

    Raises:
        EdgeClipping: If an envelope comes within three widths of a grid edge
    """
    sel = sel.snapped(grid)
    _check_clearance(sel, grid)
    d = grid.points
    x = grid.x
    sigma = sel.envelope_for(grid)
    j = np.arange(d)

    initial = np.zeros((d, d), dtype=complex)
    shift = int(round(sel.x_minus / grid.spacing))
    initial[(j + shift) % d, j] = np.exp(-((x - sel.x_a) ** 2) / (4 * sigma**2) + 1j * sel.p_plus * x)

    width = FINAL_PLUS_WIDTH * grid.spacing
    plus = (x[:, None] + x[None, :]) / 2
    minus = x[:, None] - x[None, :]
    final = np.exp(
        -((plus - sel.x_plus) ** 2) / (4 * width**2)
        - ((minus - sel.x_minus) ** 2) / (16 * sigma**2)
        + 1j * sel.p_minus * minus
    )

    return PrePostEnsemble(
        StateVector(initial.reshape(-1), (d, d)),
        StateVector(final.reshape(-1), (d, d)),
        system_dim=d,
        ancilla_dim=d,
    )


# Kraus functions


def kraus_sample(
    ens: PrePostEnsemble,
    observables: Sequence[Operator],
    grid: InstrumentGrid,
    threads: int | None = None,
) -> KrausSample:
    """F(q) = <psi_f|exp(i sum_k A_k q_k)|psi_i> / <psi_f|psi_i> at every grid point.

    Observables acting on the system alone are contracted with the weak value
    operator W (F = Tr(U W)); observables on the full system (x) ancilla space
    act on the state vectors directly.

    Raises:
        OrthogonalSelection: If the selections are orthogonal
        ValueError: If the observables do not fit the ensemble or the grid
    """
    if len(observables) != grid.axes:
        raise ValueError(f"{len(observables)} observables for a {grid.axes}-axis instrument grid")
    dim = observables[0].dim
    if any(op.dim != dim for op in observables):
        raise ValueError("observables disagree in dimension")

    if dim == ens.system_dim:
        w = weakcore.weak_value_operator(ens).entries

        def evaluate(q):
            u = qlinalg.unitary_from_generator(list(zip(observables, q)))
            return np.sum(u.entries * w.T)

    elif dim == ens.dim:
        whole = PrePostEnsemble(ens.psi_i, ens.psi_f, system_dim=ens.dim)

        def evaluate(q):
            return weakcore.weak_value(qlinalg.unitary_from_generator(list(zip(observables, q))), whole)

    else:
        raise ValueError(f"observable dim {dim} fits neither the system ({ens.system_dim}) nor the ensemble ({ens.dim})")

    values = parallel_map(evaluate, grid.points(), threads)
    return KrausSample(np.array(values), grid)


def split_operator_kraus_sample(
    ens: PrePostEnsemble,
    canonical: CanonicalGrid,
    grid: InstrumentGrid,
    steps: int | None = None,
    threads: int | None = None,
) -> KrausSample:
    """F(q) for the system pair (x, p) by Strang splitting.

    exp(i(x q1 + p q2)) ~ [e^(i x q1/2N) IFFT e^(i p q2/N) FFT e^(i x q1/2N)]^N.
    For a canonical pair the nested commutators [x,[x,p]] vanish, so the
    splitting error comes only from the grid's deviation from [x, p] = i.
    Without an ancilla W is rank one and the splitting acts on psi_i alone,
    at O(d log d) per grid point.
    """
    steps = get_settings().split_steps if steps is None else steps
    if grid.axes != 2:
        raise ValueError("split-operator sampling covers one canonical pair (two axes)")
    if steps < 1:
        raise ValueError(f"split steps must be positive, got {steps}")
    if ens.system_dim != canonical.points:
        raise ValueError(f"system dim {ens.system_dim} does not match a {canonical.points}-point grid")
    if ens.ancilla_dim == 0:
        start = ens.psi_i.amplitudes[:, None]
        final = ens.psi_f.amplitudes.conj() / weakcore.checked_overlap(ens)

        def close(m):
            return final @ m[:, 0]

    else:
        start = weakcore.weak_value_operator(ens).entries
        close = np.trace
    x = canonical.x[:, None]
    p = canonical.p[:, None]

    def evaluate(q):
        q1, q2 = q
        half_kick = np.exp(0.5j * q1 * x / steps)
        drift = np.exp(1j * q2 * p / steps)
        m = start
        for _ in range(steps):
            m = half_kick * m
            m = fft.ifft(drift * fft.fft(m, axis=0), axis=0)
            m = half_kick * m
        return close(m)

    values = parallel_map(evaluate, grid.points(), threads)
    return KrausSample(np.array(values), grid)


def bipartite_kraus_sample(
    ens: PrePostEnsemble,
    canonical: CanonicalGrid,
    grid: InstrumentGrid,
    threads: int | None = None,
) -> KrausSample:
    """F(q) for (x (x) I, p (x) I, I (x) x_a, I (x) p_a) coupled to q1..q4.

    System and ancilla generators commute, so the full exponential is
    exp(i(x q1 + p q2)) (x) exp(i(x_a q3 + p_a q4)) and only d x d
    exponentials are needed.
    """
    if grid.axes != 4:
        raise ValueError("bipartite sampling needs a four-axis instrument grid")
    if ens.system_dim != canonical.points or ens.ancilla_dim != canonical.points:
        raise ValueError("ensemble does not live on the canonical grid squared")
    x_op, p_op = qlinalg.grid_canonical_pair(canonical)
    q = grid.q_axis
    pairs = list(itertools.product(q, q))
    exponentials = np.array(
        parallel_map(lambda qq: qlinalg.hermitian_exponential(qq[0] * x_op.entries + qq[1] * p_op.entries), pairs, threads)
    ).reshape(grid.n, grid.n, canonical.points, canonical.points)

    overlap = weakcore.checked_overlap(ens)
    psi_i = ens.initial_matrix()
    psi_f = ens.final_matrix()
    # (U_s (x) U_a)|psi_i> reshapes to U_s Psi_i U_a^T
    moved = np.einsum("ijab,be->ijae", exponentials, psi_i)
    values = np.einsum("ac,ijae,klce->ijkl", psi_f.conj(), moved, exponentials, optimize=True) / overlap
    return KrausSample(values, grid)


def model_kraus_sample(grid: InstrumentGrid, alpha, beta=None) -> KrausSample:
    """F(q) = exp(i(sum_k alpha_k q_k + sum_{k<l} beta_kl q_k q_l)) with beta read from its upper triangle."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size != grid.axes:
        raise ValueError(f"alpha has {alpha.size} entries for a {grid.axes}-axis grid")
    mesh = np.meshgrid(*([grid.q_axis] * grid.axes), indexing="ij")
    phase = sum(a * m for a, m in zip(alpha, mesh))
    if beta is not None:
        beta = np.asarray(beta, dtype=float)
        for k, l in itertools.combinations(range(grid.axes), 2):
            phase = phase + beta[k, l] * mesh[k] * mesh[l]
    return KrausSample(np.exp(1j * phase), grid)


# Phase structure


def phase_fit(sample: KrausSample, amplitude_floor: float | None = None) -> PhaseFit:
    """Least-squares fit of arg F(q) to c0 + alpha.q + sum_{k<l} beta_kl q_k q_l.

    Forward differences arg(F(q + delta e_k) F*(q)) / delta equal
    alpha_k + sum_{l != k} beta_kl q_l for the model, so no phase unwrapping
    is needed as long as |alpha_k| delta < pi.

    Raises:
        AmplitudeCollapse: If min |F| falls below the amplitude floor
    """
    floor = get_settings().amplitude_floor if amplitude_floor is None else amplitude_floor
    grid = sample.grid
    values = sample.values
    amplitude = np.abs(values)
    if float(amplitude.min()) < floor:
        raise AmplitudeCollapse(float(amplitude.min()), floor)

    m = grid.axes
    delta = grid.spacing
    mesh = np.meshgrid(*([grid.q_axis] * m), indexing="ij")
    pairs = list(itertools.combinations(range(m), 2))

    blocks, targets = [], []
    for k in range(m):
        lower = [slice(None)] * m
        upper = [slice(None)] * m
        lower[k] = slice(0, -1)
        upper[k] = slice(1, None)
        lower, upper = tuple(lower), tuple(upper)
        gradient = np.angle(values[upper] * values[lower].conj()) / delta
        block = np.zeros((gradient.size, m + len(pairs)))
        block[:, k] = 1.0
        for column, (a, b) in enumerate(pairs):
            if k == a:
                block[:, m + column] = mesh[b][lower].reshape(-1)
            elif k == b:
                block[:, m + column] = mesh[a][lower].reshape(-1)
        blocks.append(block)
        targets.append(gradient.reshape(-1))
    solution = linalg.lstsq(np.vstack(blocks), np.concatenate(targets))[0]

    alpha = solution[:m]
    beta = np.zeros((m, m))
    model = sum(a * mk for a, mk in zip(alpha, mesh))
    for column, (a, b) in enumerate(pairs):
        beta[a, b] = beta[b, a] = solution[m + column]
        model = model + beta[a, b] * mesh[a] * mesh[b]
    c0 = float(np.angle(np.sum(values * np.exp(-1j * model))))
    residual = np.angle(values * np.exp(-1j * (model + c0)))

    fit = PhaseFit(
        c0=c0,
        alpha=alpha,
        beta=beta,
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        flatness=float(np.max(np.abs(amplitude - 1))),
    )
    logger.debug("[jointmeas] phase fit alpha=%s beta=%s rms=%.2e", alpha, beta[np.triu_indices(m, 1)], fit.residual_rms)
    return fit


# Pointers


def gaussian_instrument(q: np.ndarray, spread: float) -> np.ndarray:
    """Minimal-uncertainty pointer wavefunction in q with Delta pi = spread, Delta q = 1/(2 spread)."""
    dq = 1 / (2 * spread)
    return (2 * np.pi * dq**2) ** -0.25 * np.exp(-(q**2) / (4 * dq**2))


def two_peak_instrument(q: np.ndarray, spread: float, separation: float) -> np.ndarray:
    """Equal superposition of two Gaussian pointers centred at -/+ separation/2, normalized on q."""
    psi = gaussian_instrument(q - separation / 2, spread) + gaussian_instrument(q + separation / 2, spread)
    spacing = float(q[1] - q[0])
    return psi / np.sqrt(np.sum(np.abs(psi) ** 2) * spacing)


def conditional_pointer_distribution(
    sample: KrausSample,
    wavefunctions: Sequence[np.ndarray] | None = None,
) -> PointerDistribution:
    """P(pi) = |DFT[F(q) prod_k psi_k(q_k)]|^2, normalized to unit mass.

    Instrument wavefunctions default to Gaussians with the grid's spreads.
    """
    grid = sample.grid
    if wavefunctions is None:
        wavefunctions = [gaussian_instrument(grid.q_axis, s) for s in grid.spreads]
    if len(wavefunctions) != grid.axes:
        raise ValueError(f"{len(wavefunctions)} instrument wavefunctions for {grid.axes} axes")
    psi = np.array(sample.values)
    for k, wavefunction in enumerate(wavefunctions):
        shape = [1] * grid.axes
        shape[k] = grid.n
        psi = psi * np.reshape(wavefunction, shape)
    probability = np.abs(fft.fftshift(fft.fftn(psi))) ** 2
    probability /= probability.sum()
    return PointerDistribution(probability, dual_axis(grid.q_axis), grid.spreads)


def _uncertainty_report(spreads, pointer_spreads, means, method: str) -> UncertaintyReport:
    spreads = tuple(float(s) for s in spreads)
    pointer = tuple(float(s) for s in pointer_spreads)
    if len(pointer) == 2:
        pairs = [(0, 1)]
        product = spreads[0] * spreads[1]
        bound = product + 1 / (16 * product)
    else:
        pairs = [(0, 1), (2, 3), (0, 3), (1, 2)]
        bound = 0.25
    return UncertaintyReport(
        instrument_spreads=spreads,
        pointer_spreads=pointer,
        pointer_means=tuple(float(m) for m in means),
        pair_products={(a, b): pointer[a] * pointer[b] for a, b in pairs},
        total_product=float(np.prod(pointer)),
        bound=bound,
        method=method,
    )


def uncertainty_products(dist: PointerDistribution, instrument_spreads=None) -> UncertaintyReport:
    """Pointer spreads from P and their products against the bounds.

    `instrument_spreads` defaults to the Gaussian spreads the distribution was
    built with; pass the measured unconditional spreads for other instruments.
    """
    spreads = dist.spreads if instrument_spreads is None else instrument_spreads
    return _uncertainty_report(spreads, dist.standard_deviations(), dist.means(), "distribution")


def propagated_spreads(fit: PhaseFit, spreads) -> tuple[float, ...]:
    """Var pi'_k = Delta pi_k^2 + sum_l beta_kl^2 Delta q_l^2 for Gaussian instruments."""
    spreads = np.asarray(spreads, dtype=float)
    dq = 1 / (2 * spreads)
    variance = spreads**2 + (fit.beta**2) @ (dq**2)
    return tuple(float(s) for s in np.sqrt(variance))


def shift_theorem_distance(sample: KrausSample, fit: PhaseFit) -> float:
    """Total variation between P from F and P from the fitted linear phase alone."""
    linear = model_kraus_sample(sample.grid, fit.alpha)
    p = conditional_pointer_distribution(sample).probability
    p_linear = conditional_pointer_distribution(linear).probability
    return float(0.5 * np.sum(np.abs(p - p_linear)))


def full_tensor_pointer_distribution(
    ens: PrePostEnsemble,
    observables: Sequence[Operator],
    grid: InstrumentGrid,
    wavefunctions: Sequence[np.ndarray] | None = None,
) -> PointerDistribution:
    """Pointer distribution with the instruments kept in the state.

    Builds H = sum_k A_k (x) Q_k on system (x) ancilla (x) instruments, applies
    scipy.linalg.expm(iH) to psi_i (x) psi_inst, projects onto psi_f and
    Fourier transforms the remaining instrument state.
    """
    if len(observables) != grid.axes:
        raise ValueError(f"{len(observables)} observables for a {grid.axes}-axis instrument grid")
    if wavefunctions is None:
        wavefunctions = [gaussian_instrument(grid.q_axis, s) for s in grid.spreads]

    full = []
    for op in observables:
        if op.dim == ens.dim:
            full.append(op.entries)
        elif op.dim == ens.system_dim:
            full.append(np.kron(op.entries, np.eye(ens.dim // ens.system_dim)))
        else:
            raise ValueError(f"observable dim {op.dim} does not fit an ensemble of dim {ens.dim}")

    n = grid.n
    instrument_dim = n**grid.axes
    generator = np.zeros((ens.dim * instrument_dim,) * 2, dtype=complex)
    for k, a in enumerate(full):
        factors = [np.eye(n)] * grid.axes
        factors[k] = np.diag(grid.q_axis)
        coupling = factors[0]
        for factor in factors[1:]:
            coupling = np.kron(coupling, factor)
        generator += np.kron(a, coupling)

    pointer = wavefunctions[0]
    for wavefunction in wavefunctions[1:]:
        pointer = np.kron(pointer, wavefunction)
    evolved = linalg.expm(1j * generator) @ np.kron(ens.psi_i.amplitudes, pointer)
    conditioned = ens.psi_f.amplitudes.conj() @ evolved.reshape(ens.dim, instrument_dim)

    probability = np.abs(fft.fftshift(fft.fftn(conditioned.reshape(grid.shape)))) ** 2
    probability /= probability.sum()
    return PointerDistribution(probability, dual_axis(grid.q_axis), grid.spreads)


# Factorization of exp(i(x q1 + p q2)) over the EPR variables


def pm_operators(grid: CanonicalGrid) -> dict[str, Operator]:
    """x_+ = (x + x_a)/2, p_+ = p + p_a, x_- = x - x_a, p_- = (p - p_a)/2 on system (x) ancilla."""
    x_op, p_op = qlinalg.grid_canonical_pair(grid)
    one = qlinalg.identity(grid.points)
    xs, xa = qlinalg.tensor_product(x_op, one), qlinalg.tensor_product(one, x_op)
    ps, pa = qlinalg.tensor_product(p_op, one), qlinalg.tensor_product(one, p_op)

    def combine(a: Operator, b: Operator, sign: float, scale: float) -> Operator:
        return Operator(scale * (a.entries + sign * b.entries), a.factorization, hermitian=True)

    return {
        "x_plus": combine(xs, xa, 1, 0.5),
        "p_plus": combine(ps, pa, 1, 1.0),
        "x_minus": combine(xs, xa, -1, 1.0),
        "p_minus": combine(ps, pa, -1, 0.5),
    }


def pm_commutators(grid: CanonicalGrid, state: StateVector | None = None) -> dict[str, complex]:
    """<[x_+, p_+]>, <[x_-, p_-]> (tend to i) and <[x_+, p_-]>, <[x_-, p_+]> (tend to 0).

    The default state is a centred Gaussian on both system and ancilla. States
    sharp in grid position give <[x, p]> = 0 identically, so a smooth state is
    needed to see the continuum commutators.
    """
    if state is None:
        gaussian = qlinalg.gaussian_state(grid).amplitudes
        state = StateVector(np.kron(gaussian, gaussian), (grid.points, grid.points))
    ops = pm_operators(grid)
    pairs = {
        "x_plus,p_plus": ("x_plus", "p_plus"),
        "x_minus,p_minus": ("x_minus", "p_minus"),
        "x_plus,p_minus": ("x_plus", "p_minus"),
        "x_minus,p_plus": ("x_minus", "p_plus"),
    }
    return {
        name: qlinalg.expectation(qlinalg.commutator(ops[a], ops[b]), state) for name, (a, b) in pairs.items()
    }


def factorization_residual(
    sel: EPRSelection,
    grid: CanonicalGrid,
    q_samples,
    method: Literal["split", "dense"] = "split",
) -> float:
    """max_q || e^(i(x q1 + p q2)) psi_i - e^(i(x_- q1 + p_+ q2)/2) e^(i(x_+ q1 + p_- q2)) psi_i ||.

    "split" writes each factor as a system exponential times an ancilla
    exponential; "dense" exponentiates the full d^2 x d^2 generators and is
    meant for small d.
    """
    psi = epr_states(sel, grid).initial_matrix()
    x_op, p_op = qlinalg.grid_canonical_pair(grid)
    x, p = x_op.entries, p_op.entries
    ops = pm_operators(grid) if method == "dense" else None
    d = grid.points

    worst = 0.0
    for q1, q2 in np.atleast_2d(np.asarray(q_samples, dtype=float)):
        direct = qlinalg.hermitian_exponential(q1 * x + q2 * p) @ psi
        if method == "dense":
            first = qlinalg.hermitian_exponential(q1 * ops["x_plus"].entries + q2 * ops["p_minus"].entries)
            second = qlinalg.hermitian_exponential(0.5 * (q1 * ops["x_minus"].entries + q2 * ops["p_plus"].entries))
            factored = (second @ (first @ psi.reshape(-1))).reshape(d, d)
        elif method == "split":
            # (A (x) B)|psi> reshapes to A Psi B^T
            system_half = qlinalg.hermitian_exponential(0.5 * (q1 * x + q2 * p))
            ancilla_first = qlinalg.hermitian_exponential(0.5 * (q1 * x - q2 * p))
            ancilla_second = qlinalg.hermitian_exponential(0.5 * (-q1 * x + q2 * p))
            factored = system_half @ (system_half @ psi @ ancilla_first.T) @ ancilla_second.T
        else:
            raise ValueError(f"unknown factorization method {method!r}")
        worst = max(worst, float(np.linalg.norm(direct - factored)))
    return worst


# Experiments


def _canonical_sample(
    ens: PrePostEnsemble,
    canonical: CanonicalGrid,
    grid: InstrumentGrid,
    threads: int | None,
) -> KrausSample:
    if get_settings().kraus_method == "split":
        return split_operator_kraus_sample(ens, canonical, grid, threads=threads)
    x_op, p_op = qlinalg.grid_canonical_pair(canonical)
    return kraus_sample(ens, [x_op, p_op], grid, threads)


def canonical_inference_experiment(
    sel: EPRSelection,
    d: int,
    length: float,
    grid: InstrumentGrid,
    sizes: Sequence[int] = CONVERGENCE_SIZES,
    naive: bool = True,
    threads: int | None = None,
) -> InferenceExperiment:
    """Joint (x, p) measurement on the EPR ensemble and, for comparison, the naive one.

    Raises:
        EdgeClipping: If the EPR states do not fit the grid
        AmplitudeCollapse: If |F| drops below the floor inside the fit window
    """
    if grid.axes != 2:
        raise ValueError("canonical inference uses a two-axis instrument grid")
    settings = get_settings()
    canonical = CanonicalGrid(d, length)
    realized = sel.snapped(canonical)
    ens = epr_states(realized, canonical)
    logger.info(
        "[infer-xp] d=%d L=%g: x=%.6g p=%.6g (x_-=%.6g, p_-=%.6g realized), overlap %.3e",
        d,
        length,
        realized.x,
        realized.p,
        realized.x_minus,
        realized.p_minus,
        abs(ens.overlap),
    )

    fit = phase_fit(_canonical_sample(ens, canonical, grid, threads))
    pointer_grid = grid.pointer_grid(settings.pointer_clearance, settings.pointer_points)
    pointer_sample = _canonical_sample(ens, canonical, pointer_grid, threads)
    distribution = conditional_pointer_distribution(pointer_sample)

    convergence = []
    for size in sizes:
        other = CanonicalGrid(size, length)
        other_sel = sel.snapped(other)
        other_fit = fit if size == d else phase_fit(_canonical_sample(epr_states(other_sel, other), other, grid, threads))
        convergence.append(ConvergenceRow(size, tuple(float(a) for a in other_fit.alpha), other_fit.cross(0, 1)))
        logger.info("[infer-xp] d=%d alpha=%s beta12=%.3e", size, other_fit.alpha, other_fit.cross(0, 1))

    naive_fit = naive_uncertainty = None
    if naive:
        naive_ens = naive_ensemble(canonical, realized.x, realized.p)
        naive_fit = phase_fit(_canonical_sample(naive_ens, canonical, grid, threads))
        naive_uncertainty = uncertainty_products(
            conditional_pointer_distribution(_canonical_sample(naive_ens, canonical, pointer_grid, threads))
        )

    experiment = InferenceExperiment(
        selection=realized,
        predicted_alpha=(realized.x, realized.p),
        fit=fit,
        distribution=distribution,
        uncertainty=uncertainty_products(distribution),
        shift_distance=shift_theorem_distance(pointer_sample, fit),
        convergence=convergence,
        naive_fit=naive_fit,
        naive_uncertainty=naive_uncertainty,
    )
    if experiment.suppression_ratio is not None:
        logger.info("[infer-xp] back-action suppression |beta_EPR/beta_naive| = %.3e", experiment.suppression_ratio)
    return experiment


def four_axis_pointer_grid(grid: InstrumentGrid, sweep_values: Sequence[float] = ()) -> InstrumentGrid:
    """Pointer grid shared by every four-axis spread combination.

    The q half-width is six Delta q of the widest instrument. The point count
    starts from the configured value and grows until the dual half-range holds
    five of the widest Delta pi.
    """
    spreads = (*grid.spreads, *sweep_values)
    q_max = 3 / min(spreads)
    spacing = np.pi / (5 * max(spreads))
    points = max(get_settings().four_axis_pointer_points, int(np.ceil(2 * q_max / spacing)) + 1)
    return replace(grid, n=points, q_max=q_max)


def four_variable_experiment(
    sel: EPRSelection,
    d: int,
    length: float,
    grid: InstrumentGrid,
    sweep_values: Sequence[float] = SWEEP_SPREADS,
    threads: int | None = None,
) -> FourVariableExperiment:
    """Joint measurement of (x, p, x_a, p_a) on the EPR ensemble.

    The fit should show the crossed cross terms beta_14 = beta_23 = 1/2 and no
    direct ones. Pointer spreads come from the simulated four-axis pointer
    distribution; the Kraus function is sampled once on a common pointer grid
    and every spread combination of the sweep only swaps the instrument
    wavefunctions. The four-product bound 1/4 is a conjecture and is reported as such.
    """
    if grid.axes != 4:
        raise ValueError("the four-variable experiment needs a four-axis instrument grid")
    canonical = CanonicalGrid(d, length)
    realized = sel.snapped(canonical)
    ens = epr_states(realized, canonical)
    fit = phase_fit(bipartite_kraus_sample(ens, canonical, grid, threads))
    logger.info(
        "[infer-xp4] d=%d: beta14=%.4f beta23=%.4f beta12=%.2e beta34=%.2e",
        d,
        fit.cross(0, 3),
        fit.cross(1, 2),
        fit.cross(0, 1),
        fit.cross(2, 3),
    )

    pointer = four_axis_pointer_grid(grid, sweep_values)
    values = bipartite_kraus_sample(ens, canonical, pointer, threads).values
    uncertainty = uncertainty_products(conditional_pointer_distribution(KrausSample(values, pointer)))
    propagated = float(np.prod(propagated_spreads(fit, grid.spreads)))
    uncertainty.notes.append("four-product bound 1/4 is a conjecture check")
    uncertainty.notes.append(f"Gaussian propagation of the fitted phase gives {propagated:.4f}")

    sweep = []
    for spreads in itertools.product(sweep_values, repeat=4):
        dist = conditional_pointer_distribution(KrausSample(values, pointer.with_spreads(spreads)))
        spread_out = tuple(float(s) for s in dist.standard_deviations())
        sweep.append(SpreadSweepRow(tuple(spreads), spread_out, float(np.prod(spread_out))))

    experiment = FourVariableExperiment(
        selection=realized,
        predicted_alpha=(realized.x, realized.p, realized.x_a, realized.p_a),
        fit=fit,
        uncertainty=uncertainty,
        sweep=sweep,
    )
    logger.info("[infer-xp4] four-product %.4f, sweep minimum %.4f", uncertainty.total_product, experiment.sweep_minimum)
    return experiment


def naive_pointer_uncertainty(
    canonical: CanonicalGrid,
    spreads,
    x: float = 0.0,
    p: float = 0.0,
    threads: int | None = None,
) -> UncertaintyReport:
    """Pointer spreads of the naive ensemble for Gaussian instruments with the given spreads.

    F is simulated on the full pointer window by one Strang step, which is
    exact for a canonical pair, so the cost stays O(d log d) per pointer point.
    """
    settings = get_settings()
    pointer = InstrumentGrid(9, 1.0, tuple(spreads)).pointer_grid(settings.pointer_clearance, settings.pointer_points)
    sample = split_operator_kraus_sample(naive_ensemble(canonical, x, p), canonical, pointer, steps=1, threads=threads)
    report = uncertainty_products(conditional_pointer_distribution(sample))
    logger.debug("[jointmeas] naive spreads %s -> %s", report.instrument_spreads, report.pointer_spreads)
    return report


class JointMeasurementService:
    """Runs the continuous-variable joint measurements with one worker setting."""

    def __init__(self, threads: int | None = None):
        settings = get_settings()
        self.threads = settings.threads if threads is None else threads

    def infer_xp(
        self,
        sel: EPRSelection,
        d: int,
        length: float,
        grid: InstrumentGrid,
        sizes: Sequence[int] = CONVERGENCE_SIZES,
        naive: bool = True,
    ) -> InferenceExperiment:
        logger.info("[infer-xp] d=%d L=%g n=%d q_max=%g spreads=%s", d, length, grid.n, grid.q_max, grid.spreads)
        return canonical_inference_experiment(sel, d, length, grid, sizes, naive, self.threads)

    def infer_xp4(
        self,
        sel: EPRSelection,
        d: int,
        length: float,
        grid: InstrumentGrid,
        sweep_values: Sequence[float] = SWEEP_SPREADS,
    ) -> FourVariableExperiment:
        logger.info("[infer-xp4] d=%d L=%g n=%d q_max=%g spreads=%s", d, length, grid.n, grid.q_max, grid.spreads)
        return four_variable_experiment(sel, d, length, grid, sweep_values, self.threads)

    def naive_sweep(self, canonical: CanonicalGrid, spread_values: Sequence[float]) -> list[UncertaintyReport]:
        """naive_pointer_uncertainty over every (Delta pi_1, Delta pi_2) pair of `spread_values`."""
        return [
            naive_pointer_uncertainty(canonical, spreads, threads=self.threads)
            for spreads in itertools.product(spread_values, repeat=2)
        ]

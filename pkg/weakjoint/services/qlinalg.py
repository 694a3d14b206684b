import logging
from collections.abc import Sequence

import numpy as np
from scipy import linalg

from weakjoint.config import get_settings
from weakjoint.models.operators import CanonicalGrid, Operator, StateVector

logger = logging.getLogger(__name__)


def identity(dim: int, factorization=None) -> Operator:
    return Operator(np.eye(dim), factorization, hermitian=True)


def pauli_matrices() -> tuple[Operator, Operator, Operator]:
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.array([[1, 0], [0, -1]])
    return tuple(Operator(m, None, hermitian=True) for m in (sx, sy, sz))


def spin_operators(j: float) -> tuple[Operator, Operator, Operator]:
    """Spin-j (Jx, Jy, Jz) in the Jz eigenbasis ordered m = j, j-1, ..., -j."""
    dim = int(round(2 * j + 1))
    if dim < 2 or abs(dim - (2 * j + 1)) > 1e-12:
        raise ValueError(f"spin must be a positive half-integer, got {j}")
    m = j - np.arange(dim)
    # <m+1|J+|m> = sqrt(j(j+1) - m(m+1))
    raising = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1)
    jx = (raising + raising.T) / 2
    jy = (raising - raising.T) / 2j
    jz = np.diag(m)
    return tuple(Operator(mat, None, hermitian=True) for mat in (jx, jy, jz))


def tensor_product(a: Operator, b: Operator) -> Operator:
    """A (x) B in system-major order; factorizations concatenate."""
    return Operator(
        np.kron(a.entries, b.entries),
        a.factorization + b.factorization,
        hermitian=a.hermitian and b.hermitian,
    )


def partial_trace(op: Operator, keep: int) -> Operator:
    """Trace out every subsystem except `keep`.

    Args:
        op: Operator whose factorization lists at least two subsystems
        keep: Index into op.factorization of the subsystem to keep

    Returns:
        Operator on the kept subsystem with the same trace as `op`

    Raises:
        ValueError: If there are fewer than two subsystems or `keep` is out of range
    """
    dims = op.factorization
    if len(dims) < 2:
        raise ValueError("partial trace needs a factorization with at least two subsystems")
    if not 0 <= keep < len(dims):
        raise ValueError(f"subsystem index {keep} out of range for factorization {dims}")

    n = len(dims)
    tensor = op.entries.reshape(dims + dims)
    # drop subsystems from the highest index down so axis numbers stay valid
    for axis in reversed(range(n)):
        if axis == keep:
            continue
        current = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
    return Operator(tensor, (dims[keep],), hermitian=op.hermitian)


def unitary_from_generator(terms: Sequence[tuple[Operator, float]], dim: int | None = None) -> Operator:
    """exp(i * sum_k q_k A_k) through the eigendecomposition of the Hermitian sum.

    An empty sum is exp(0), the identity of dimension `dim`.

    Raises:
        ValueError: If the terms disagree in dimension, a term is not Hermitian,
            or there are no terms and no `dim`
    """
    if not terms:
        if dim is None:
            raise ValueError("an empty generator needs an explicit dimension")
        return identity(dim)
    settings = get_settings()
    dim = terms[0][0].dim if dim is None else dim
    generator = np.zeros((dim, dim), dtype=complex)
    for op, coefficient in terms:
        if op.dim != dim:
            raise ValueError(f"generator terms disagree in dimension: {op.dim} vs {dim}")
        if not (op.hermitian or op.is_hermitian(settings.hermitian_tol)):
            raise ValueError("generator terms must be Hermitian")
        generator += float(coefficient) * op.entries
    return Operator(hermitian_exponential(generator), terms[0][0].factorization)


def hermitian_exponential(generator: np.ndarray, scale: complex = 1j) -> np.ndarray:
    """exp(scale * H) for Hermitian H as V diag(exp(scale * lambda)) V^dagger."""
    hermitian = 0.5 * (generator + generator.conj().T)
    eigenvalues, vectors = linalg.eigh(hermitian)
    return (vectors * np.exp(scale * eigenvalues)) @ vectors.conj().T


def unitary_dft(points: int) -> np.ndarray:
    return linalg.dft(points, scale="sqrtn")


def grid_canonical_pair(grid: CanonicalGrid) -> tuple[Operator, Operator]:
    """Position and momentum on a periodic grid: x = diag(x_j), p = U^dagger diag(p_k) U."""
    u = unitary_dft(grid.points)
    x_op = Operator(np.diag(grid.x), None, hermitian=True)
    p_matrix = (u.conj().T * grid.p) @ u
    p_op = Operator(0.5 * (p_matrix + p_matrix.conj().T), None, hermitian=True)
    return x_op, p_op


def gaussian_state(grid: CanonicalGrid, center: float = 0.0, width: float | None = None,
                   momentum: float = 0.0) -> StateVector:
    """Sampled Gaussian wavepacket; width is the position standard deviation (default L/10)."""
    width = grid.length / 10 if width is None else width
    x = grid.x
    amplitudes = np.exp(-((x - center) ** 2) / (4 * width**2) + 1j * momentum * x)
    return StateVector(amplitudes)


def plane_wave(grid: CanonicalGrid, index: int) -> StateVector:
    """Grid momentum eigenstate e^{i p_k x_j} for FFT index k."""
    return StateVector(np.exp(1j * grid.p[index] * grid.x))


def expectation(op: Operator, state: StateVector) -> complex:
    return complex(np.vdot(state.amplitudes, op.entries @ state.amplitudes))


def commutator(a: Operator, b: Operator) -> Operator:
    return Operator(a.entries @ b.entries - b.entries @ a.entries, a.factorization)

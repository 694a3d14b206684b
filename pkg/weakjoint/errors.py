"""Failure types raised by the numerical services.

Verdict errors (`Infeasible`, `DependentSymmetrizedSet`) are scientific
negatives and map to exit status 2; everything else maps to 1.
"""


class WeakJointError(Exception):
    """Base class for every failure the laboratory reports by name."""

    verdict = False


class OrthogonalSelection(WeakJointError):
    def __init__(self, overlap: complex, floor: float):
        self.overlap = overlap
        self.floor = floor
        super().__init__(
            f"pre- and postselection are orthogonal: |<psi_f|psi_i>| = {abs(overlap):.3e} <= {floor:.1e}"
        )


class Infeasible(WeakJointError):
    verdict = True

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message)


class DegenerateRealization(WeakJointError):
    def __init__(self, trace: complex):
        self.trace = trace
        super().__init__(f"weak vector has vanishing trace z.I = {trace:.3e}; no entangled realization")


class TraceNotOne(WeakJointError):
    def __init__(self, trace: complex):
        self.trace = trace
        super().__init__(f"weak value operator must have unit trace, got {trace:.6g}")


class DependentSymmetrizedSet(WeakJointError):
    verdict = True

    def __init__(self, smallest_singular_value: float, tol: float):
        self.smallest_singular_value = smallest_singular_value
        self.tol = tol
        super().__init__(
            f"symmetrized operators are linearly dependent: smallest Gram singular value "
            f"{smallest_singular_value:.3e} <= {tol:.1e}"
        )


class RootTrackingBreak(WeakJointError):
    def __init__(self, zeta1: float, previous: float, jump: float, bound: float):
        self.zeta1 = zeta1
        self.previous = previous
        self.jump = jump
        self.bound = bound
        super().__init__(
            f"root branch jumps by {jump:.3e} at zeta1 = {zeta1:.6g} (previous u = {previous:.6g}, bound {bound:.3g})"
        )


class AmplitudeCollapse(WeakJointError):
    def __init__(self, min_amplitude: float, floor: float):
        self.min_amplitude = min_amplitude
        self.floor = floor
        super().__init__(
            f"Kraus amplitude drops to {min_amplitude:.3e} < {floor:.2g} inside the fit window; shrink q_max"
        )


class EdgeClipping(WeakJointError):
    def __init__(self, message: str, clearance: float):
        self.clearance = clearance
        super().__init__(message)


class ConfigError(WeakJointError):
    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)

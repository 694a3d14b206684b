import argparse

import numpy as np

from weakjoint.models.instruments import PhaseFit, UncertaintyReport


def float_list(text: str) -> tuple[float, ...]:
    """Parse "1,0.5,-2" into floats."""
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def point_list(text: str) -> tuple[tuple[float, float], ...]:
    """Parse "0.5,0.5;1,-1" into (t1, t2) pairs."""
    points = tuple(float_list(chunk) for chunk in text.split(";") if chunk.strip())
    if any(len(p) != 2 for p in points):
        raise argparse.ArgumentTypeError(f"expected ';'-separated pairs like 0.5,0.5, got {text!r}")
    return points


def key_value(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def add_epr_options(parser: argparse.ArgumentParser) -> None:
    """Grid, instrument and selection-label flags shared by infer-xp and infer-xp4."""
    parser.add_argument("--d", type=int, help="grid points per degree of freedom")
    parser.add_argument("--L", dest="length", type=float, help="grid length")
    parser.add_argument("--n", type=int, help="instrument grid points per axis")
    parser.add_argument("--q-max", type=float, help="half-width of the coupling grid")
    parser.add_argument("--spreads", type=float_list, help="pointer spreads Delta pi_k, comma-separated")
    parser.add_argument("--x-minus", type=float, help="eigenvalue of x - x_a selected initially")
    parser.add_argument("--p-plus", type=float, help="eigenvalue of p + p_a selected initially")
    parser.add_argument("--x-plus", type=float, help="eigenvalue of (x + x_a)/2 selected finally")
    parser.add_argument("--p-minus", type=float, help="eigenvalue of (p - p_a)/2 selected finally")
    parser.add_argument("--envelope", type=float, help="position width of the EPR envelope (default L/8)")


def fit_summary(fit: PhaseFit) -> dict:
    axes = fit.alpha.size
    cross = {f"beta{k + 1}{l + 1}": fit.cross(k, l) for k in range(axes) for l in range(k + 1, axes)}
    return {
        "alpha": [float(a) for a in fit.alpha],
        **cross,
        "c0": fit.c0,
        "residual_rms": fit.residual_rms,
        "flatness": fit.flatness,
    }


def uncertainty_summary(report: UncertaintyReport) -> dict:
    return {
        "method": report.method,
        "instrument_spreads": list(report.instrument_spreads),
        "pointer_spreads": list(report.pointer_spreads),
        "pointer_means": list(report.pointer_means),
        "pair_products": {f"{a + 1},{b + 1}": value for (a, b), value in report.pair_products.items()},
        "total_product": report.total_product,
        "bound": report.bound,
        "meets_bound": report.meets_bound,
        "meets_half": report.meets_half,
        "notes": list(report.notes),
    }


def grid_rows(axis_a: np.ndarray, axis_b: np.ndarray, values: np.ndarray):
    """(a_i, b_j, values[i, j]) rows in C order."""
    for i, a in enumerate(axis_a):
        for j, b in enumerate(axis_b):
            yield float(a), float(b), float(values[i, j])

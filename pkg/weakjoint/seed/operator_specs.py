"""Operator spec files shipped with the package.

Run `python -m weakjoint.seed.operator_specs` to regenerate weakjoint/seed/specs/.
"""

from pathlib import Path

import numpy as np

from weakjoint.models.operators import Operator
from weakjoint.schemas.operator_spec import write_operator_spec
from weakjoint.services import qlinalg

SPEC_DIR = Path(__file__).parent / "specs"

# Hermitian pair for the d=4 example, fixed so the shipped file never changes
RANDOM_D4_A = np.array(
    [
        [0.8, 0.5 + 0.2j, -0.4, 0.1 - 0.7j],
        [0.5 - 0.2j, -0.3, 0.6 + 0.3j, -0.2 + 0.5j],
        [-0.4, 0.6 - 0.3j, 1.2, 0.9 - 0.1j],
        [0.1 + 0.7j, -0.2 - 0.5j, 0.9 + 0.1j, -1.1],
    ]
)
RANDOM_D4_B = np.array(
    [
        [-0.6, 0.3 - 0.4j, 0.7 + 0.1j, -0.5 + 0.2j],
        [0.3 + 0.4j, 1.0, -0.1 - 0.6j, 0.4 + 0.4j],
        [0.7 - 0.1j, -0.1 + 0.6j, 0.2, 0.2 + 0.8j],
        [-0.5 - 0.2j, 0.4 - 0.4j, 0.2 - 0.8j, -0.5],
    ]
)


def _specs() -> list[dict]:
    sx, sy, sz = qlinalg.pauli_matrices()
    jx, jy, jz = qlinalg.spin_operators(1.0)
    return [
        {
            "file": "paulis.json",
            "operators": {"sx": sx, "sy": sy, "sz": sz},
            "targets": [("sx", 1.0), ("sz", 1.0)],
            "pair": ("sx", "sz"),
            "description": "Pauli matrices; the (sx, sz) pair with alpha = (1, 1) is obstructed",
        },
        {
            "file": "spin1.json",
            "operators": {"Jx": jx, "Jy": jy, "Jz": jz},
            "targets": [("Jz", 0.5), ("Jx", 1.5)],
            "pair": ("Jx", "Jz"),
            "description": "Spin-1 angular momentum in the Jz basis (m = 1, 0, -1)",
        },
        {
            "file": "random_d4.json",
            "operators": {
                "A": Operator(RANDOM_D4_A, None, hermitian=True),
                "B": Operator(RANDOM_D4_B, None, hermitian=True),
            },
            "targets": [("A", 0.7 + 0.2j), ("B", -0.4 + 1.1j)],
            "pair": ("A", "B"),
            "description": "Generic Hermitian pair on d=4 with complex weak value targets",
        },
    ]


def seed_operator_specs(directory: Path = SPEC_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in _specs():
        path = directory / spec["file"]
        write_operator_spec(path, spec["operators"], spec["targets"], spec["pair"], spec["description"])
        print(f"Wrote operator spec: {path}")
        written.append(path)
    return written


if __name__ == "__main__":
    seed_operator_specs()

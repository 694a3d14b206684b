import json

import numpy as np
import pytest

from tests.conftest import random_hermitian
from weakjoint.errors import ConfigError
from weakjoint.schemas.operator_spec import load_operator_spec, write_operator_spec
from weakjoint.seed.operator_specs import SPEC_DIR
from weakjoint.services import qlinalg


def _write(path, payload) -> str:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


@pytest.mark.parametrize("name, dimension", [("paulis.json", 2), ("spin1.json", 3), ("random_d4.json", 4)])
def test_shipped_specs_load(name, dimension):
    spec = load_operator_spec(SPEC_DIR / name)
    assert spec.dimension == dimension
    assert spec.targets
    pair = spec.observable_pair()
    assert pair.a1.is_hermitian() and pair.a2.is_hermitian()


def test_pauli_spec_matches_library():
    spec = load_operator_spec(SPEC_DIR / "paulis.json")
    sx, _, sz = qlinalg.pauli_matrices()
    np.testing.assert_array_equal(spec.operator("sx").entries, sx.entries)
    np.testing.assert_array_equal(spec.observable_pair().a2.entries, sz.entries)
    assert [t.complex_value for t in spec.targets] == [1.0, 1.0]


def test_round_trip(tmp_path, rng):
    a, b = random_hermitian(rng, 3), random_hermitian(rng, 3)
    path = tmp_path / "ops.json"
    write_operator_spec(path, {"A": a, "B": b}, targets=[("A", 0.3 + 0.1j)], pair=("B", "A"), description="test")
    spec = load_operator_spec(path)
    np.testing.assert_allclose(spec.operator("A").entries, a.entries, rtol=0, atol=1e-15)
    np.testing.assert_allclose(spec.operator("B").entries, b.entries, rtol=0, atol=1e-15)
    assert spec.targets[0].complex_value == 0.3 + 0.1j
    np.testing.assert_array_equal(spec.observable_pair().a1.entries, spec.operator("B").entries)


def test_mixed_dimensions_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_operator_spec(tmp_path / "bad.json", {"a": qlinalg.identity(2), "b": qlinalg.identity(3)})


class TestErrors:
    def test_syntax_error_has_line_and_column(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dimension": 2,\n  "operators": }\n', encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            load_operator_spec(path)
        assert info.value.location == f"{path}:2:16"

    def test_wrong_matrix_size(self, tmp_path):
        path = _write(tmp_path / "s.json", {"dimension": 3, "operators": {"a": {"matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}}})
        with pytest.raises(ConfigError, match="not 3x3"):
            load_operator_spec(path)

    def test_unknown_target_operator(self, tmp_path):
        path = _write(
            tmp_path / "s.json",
            {
                "dimension": 1,
                "operators": {"a": {"matrix": [[[1, 0]]]}},
                "targets": [{"operator": "b", "value": [1, 0]}],
            },
        )
        with pytest.raises(ConfigError, match="unknown operator"):
            load_operator_spec(path)

    def test_false_hermitian_flag(self, tmp_path):
        path = _write(
            tmp_path / "s.json",
            {"dimension": 2, "operators": {"a": {"matrix": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]], "hermitian": True}}},
        )
        with pytest.raises(ConfigError, match="hermitian"):
            load_operator_spec(path)

    def test_field_path_in_location(self, tmp_path):
        path = _write(tmp_path / "s.json", {"dimension": 0, "operators": {}})
        with pytest.raises(ConfigError) as info:
            load_operator_spec(path)
        assert info.value.location == f"{path}: dimension"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_operator_spec(tmp_path / "absent.json")

    def test_pair_needs_two_operators(self, tmp_path):
        spec = load_operator_spec(_write(tmp_path / "s.json", {"dimension": 1, "operators": {"a": {"matrix": [[[1, 0]]]}}}))
        with pytest.raises(ConfigError):
            spec.observable_pair()

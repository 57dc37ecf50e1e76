"""Tests for matrix, event and certificate files."""

import json

import numpy as np
import pytest

from commuting_pairs.constructions import commuting_approximants
from commuting_pairs.constructions.events import EventPartition
from commuting_pairs.core.models import BinningParams, InstanceRecipe
from commuting_pairs.exceptions import SerializationError
from commuting_pairs.utils.serialization import (
    dumps_certificate,
    dumps_matrix,
    loads_certificate,
    loads_matrix,
    read_certificate,
    read_density_matrix,
    read_event,
    read_hermitian,
    read_matrix,
    write_certificate,
    write_event,
    write_instance,
    write_matrix,
)

MATRIX_TEXT = """{
  "dim": 2,
  "re": [
    [0.75, -0],
    [-0, 0.25]
  ],
  "im": [
    [0, 0.10000000000000001],
    [-0.10000000000000001, -0]
  ]
}
"""


class TestMatrixFiles:
    """Test matrix serialization."""

    def test_byte_identical_round_trip(self):
        """Test that a written file re-serializes to the same bytes, signed zeros included."""
        matrix = loads_matrix(MATRIX_TEXT)
        assert np.signbit(matrix.real[0, 1])
        assert np.signbit(matrix.imag[1, 1])
        assert dumps_matrix(matrix) == MATRIX_TEXT

    def test_seventeen_digits(self):
        """Test that doubles survive a write and a read exactly."""
        matrix = np.array([[0.1, 1 / 3], [2 / 3, np.pi]], dtype=complex)
        matrix.imag = [[0.0, 1e-17], [-1e-17, 0.0]]
        assert np.array_equal(loads_matrix(dumps_matrix(matrix)), matrix)

    def test_file_round_trip(self, tmp_path, oracle_pair):
        """Test write_matrix and read_matrix."""
        omega, _ = oracle_pair
        path = tmp_path / "omega.json"
        write_matrix(omega, path)
        assert np.array_equal(read_matrix(path), omega.matrix)
        assert read_density_matrix(path).dim == 2

    def test_invalid_json(self):
        """Test that syntax errors carry the line number."""
        with pytest.raises(SerializationError) as exc_info:
            loads_matrix('{\n  "dim": 2,\n  "re": [\n}', "broken.json")
        assert exc_info.value.message.startswith("invalid JSON")
        assert exc_info.value.line == 4
        assert "broken.json" in str(exc_info.value)

    def test_schema_violation(self):
        """Test a missing field and a non-numeric entry."""
        with pytest.raises(SerializationError) as exc_info:
            loads_matrix('{"dim": 1, "re": [[1]]}')
        assert exc_info.value.message.startswith("schema violation")
        with pytest.raises(SerializationError) as exc_info:
            loads_matrix('{"dim": 1, "re": [["a"]], "im": [[0]]}')
        assert exc_info.value.field == "$.re[0][0]"

    def test_shape_mismatch(self):
        """Test row and entry counts against dim."""
        with pytest.raises(SerializationError) as exc_info:
            loads_matrix('{"dim": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}')
        assert exc_info.value.message == "expected 2 rows, found 1"
        assert exc_info.value.field == "$.re"
        with pytest.raises(SerializationError) as exc_info:
            loads_matrix('{"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0]]}')
        assert exc_info.value.message == "expected 2 entries, found 1"
        assert exc_info.value.field == "$.im[1]"

    def test_unwritable_matrices(self):
        """Test non-finite and non-square input."""
        with pytest.raises(SerializationError, match="non-finite"):
            dumps_matrix(np.array([[np.nan]]))
        with pytest.raises(SerializationError, match="square"):
            dumps_matrix(np.zeros((2, 3)))

    def test_typed_readers(self, tmp_path):
        """Test that states and observables are validated on read."""
        path = tmp_path / "m.json"
        write_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]), path)
        with pytest.raises(SerializationError, match="not a Hermitian matrix"):
            read_hermitian(path)
        write_matrix(np.diag([1.0, -1.0]), path)
        with pytest.raises(SerializationError, match="not a density matrix"):
            read_density_matrix(path)

    def test_missing_file(self, tmp_path):
        """Test a path that does not exist."""
        with pytest.raises(SerializationError, match="cannot read file"):
            read_matrix(tmp_path / "absent.json")


class TestEventFiles:
    """Test event serialization."""

    def test_round_trip(self, tmp_path):
        """Test that projections come back in file order."""
        event = EventPartition.from_basis(np.eye(3), [[0, 2], [1]])
        path = tmp_path / "event.json"
        write_event(list(event.projections), path)
        projections = read_event(path)
        assert len(projections) == 2
        for read, written in zip(projections, event.projections):
            assert np.allclose(read.matrix, written.matrix)
        assert len(EventPartition(tuple(projections))) == 2

    def test_dimension_mismatch(self, tmp_path):
        """Test a projection whose dimension differs from the event's."""
        path = tmp_path / "event.json"
        document = {"dim": 3, "projections": [json.loads(dumps_matrix(np.eye(2)))]}
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(SerializationError) as exc_info:
            read_event(path)
        assert exc_info.value.field == "$.projections[0].dim"

    def test_not_a_projection(self, tmp_path):
        """Test a cell that is not idempotent."""
        path = tmp_path / "event.json"
        write_event([0.5 * np.eye(2)], path)
        with pytest.raises(SerializationError, match="not an orthogonal projection"):
            read_event(path)


class TestCertificateFiles:
    """Test certificate serialization."""

    @pytest.fixture
    def certificate(self, oracle_pair):
        """Certificate of the 2x2 oracle pair at eps = 0.1."""
        return commuting_approximants(*oracle_pair, BinningParams(eps=0.1)).certificate

    def test_round_trip(self, tmp_path, certificate):
        """Test write_certificate and read_certificate."""
        path = tmp_path / "cert.json"
        write_certificate(certificate, path)
        loaded = read_certificate(path)
        assert loaded.model_dump() == certificate.model_dump()
        assert dumps_certificate(loaded) == dumps_certificate(certificate)

    def test_missing_field(self, certificate):
        """Test that a certificate without dX is rejected."""
        document = certificate.to_document()
        del document["dX"]
        with pytest.raises(SerializationError, match="schema violation"):
            loads_certificate(json.dumps(document))

    def test_negative_distance(self, certificate):
        """Test that model validation runs after the schema."""
        document = certificate.to_document()
        document["dX"] = -1.0
        with pytest.raises(SerializationError) as exc_info:
            loads_certificate(json.dumps(document))
        assert exc_info.value.field == "$.dX"


class TestWriteInstance:
    """Test write_instance."""

    def test_pair_only(self, tmp_path, oracle_pair):
        """Test that a bare pair writes two files."""
        written = write_instance(tmp_path / "inst", *oracle_pair)
        assert sorted(written) == ["omega", "x"]
        assert all(path.exists() for path in written.values())

    def test_with_recipe_and_event(self, tmp_path, oracle_pair):
        """Test the recipe and event files."""
        recipe = InstanceRecipe(dim=2, eps_target=0.1, seed=3)
        event = list(EventPartition.coordinate(2).projections)
        written = write_instance(tmp_path, *oracle_pair, recipe, 0.1, event)
        assert sorted(written) == ["event", "omega", "recipe", "x"]
        document = json.loads(written["recipe"].read_text(encoding="utf-8"))
        assert document["seed"] == 3
        assert document["eps_measured"] == 0.1
        assert len(read_event(written["event"])) == 2

import json
import math

import numpy as np
import pytest

from src.qubit_channels import oracle
from src.qubit_channels.channel_spec import parse_spec, read_spec
from src.qubit_channels.errors import ChannelValidationError, SpecParseError


def write_spec(directory, name: str, content: str) -> str:
    """
    Helper function writing a spec file and returning its path.

    Args:
        directory: Target directory (pytest tmp_path).
        name (str): File name.
        content (str): File content.
    """
    path = directory / name
    path.write_text(content)
    return str(path)


def test_parse_kraus_with_complex_entries() -> None:
    """
    Test that [re, im] pairs and plain numbers both parse as complex entries.
    """
    h = 1 / math.sqrt(2)
    spec = parse_spec(
        {
            "kind": "kraus",
            "operators": [[[h, 0], [0, [0, h]]], [[0, h], [h, 0]]],
        }
    )
    assert spec.kind == "kraus"
    assert not spec.is_canonical
    np.testing.assert_allclose(spec.kraus[0], np.diag([h, 1j * h]))
    assert oracle.kraus_completeness_residual(spec.kraus) < 1e-12


def test_parse_affine_spec() -> None:
    """
    Test that a (t, T) spec keeps its affine data and resolves to a Kraus set.
    """
    spec = parse_spec({"kind": "tT", "t": [0, 0, 0.36], "T": [[0.8, 0, 0], [0, 0.8, 0], [0, 0, 0.64]]})
    assert spec.affine.is_diagonal()
    np.testing.assert_allclose(oracle.tT_from_kraus(spec.kraus).t, [0, 0, 0.36], atol=1e-10)


def test_parse_canonical_spec_defaults_q() -> None:
    """
    Test that a canonical spec without q uses a pure environment.
    """
    spec = parse_spec({"kind": "gaussian_canonical", "theta": 0.5, "phi": 0.25})
    assert spec.is_canonical
    assert spec.canonical.q == 1.0
    assert len(spec.kraus) == 2


def test_unknown_kind_reports_line() -> None:
    """
    Test that an unknown kind is reported with its field and line.
    """
    text = '{\n  "kind": "pauli",\n  "p": 0.1\n}'
    with pytest.raises(SpecParseError) as exc_info:
        parse_spec(json.loads(text), text)
    assert exc_info.value.field == "kind"
    assert exc_info.value.line == 2
    assert exc_info.value.context() == {"field": "kind", "line": 2}


def test_malformed_fields() -> None:
    """
    Test missing fields, wrong shapes and non-numeric entries.
    """
    with pytest.raises(SpecParseError):
        parse_spec([1, 2])
    with pytest.raises(SpecParseError):
        parse_spec({"kind": "kraus"})
    with pytest.raises(SpecParseError):
        parse_spec({"kind": "kraus", "operators": [[[1, 0, 0], [0, 1, 0]]]})
    with pytest.raises(SpecParseError):
        parse_spec({"kind": "tT", "t": [0, 0], "T": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
    with pytest.raises(SpecParseError):
        parse_spec({"kind": "gaussian_canonical", "theta": "pi", "phi": 0})


def test_q_out_of_range() -> None:
    """
    Test that q outside [0, 1] is a parse error on field q.
    """
    text = '{\n  "kind": "gaussian_canonical",\n  "theta": 0.1,\n  "phi": 0.2,\n  "q": 1.5\n}'
    with pytest.raises(SpecParseError) as exc_info:
        parse_spec(json.loads(text), text)
    assert exc_info.value.field == "q"
    assert exc_info.value.line == 5


def test_channel_validation() -> None:
    """
    Test that non trace-preserving and non-CP channels are rejected.
    """
    with pytest.raises(ChannelValidationError):
        parse_spec({"kind": "kraus", "operators": [[[1, 0], [0, 0.5]]]})
    with pytest.raises(ChannelValidationError):
        parse_spec({"kind": "tT", "t": [0, 0, 0], "T": [[1, 0, 0], [0, -1, 0], [0, 0, 1]]})


@pytest.mark.asyncio
async def test_read_spec(tmp_path) -> None:
    """
    Test reading a spec file from disk.
    """
    path = write_spec(tmp_path, "canonical.json", '{"kind": "gaussian_canonical", "theta": 0.5, "phi": 0.25, "q": 0.7}')
    spec = await read_spec(path)
    assert spec.canonical.q == pytest.approx(0.7)


@pytest.mark.asyncio
async def test_read_spec_invalid_json(tmp_path) -> None:
    """
    Test that invalid JSON is reported with its line number.
    """
    path = write_spec(tmp_path, "broken.json", '{\n"kind": "kraus"\n"operators": []\n}')
    with pytest.raises(SpecParseError) as exc_info:
        await read_spec(path)
    assert exc_info.value.line == 3
    assert exc_info.value.context() == {"line": 3}


@pytest.mark.asyncio
async def test_read_spec_missing_file(tmp_path) -> None:
    """
    Test that a missing file raises SpecParseError.
    """
    with pytest.raises(SpecParseError):
        await read_spec(str(tmp_path / "missing.json"))

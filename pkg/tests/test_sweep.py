import io
import json

import numpy as np
import pandas as pd
import pytest

from src.qubit_channels.errors import SpecParseError
from src.qubit_channels.settings import Settings
from src.qubit_channels.sweep import (
    COLUMNS,
    parse_sweep_config,
    read_sweep_config,
    run_sweep,
    sign_boundary_mismatches,
    to_csv,
    verdict_counts,
    write_sweep,
)

SETTINGS = Settings(seed=5, coherent_samples=7)
PURE_GRID = {"theta": [0.1, 0.5, 1.0], "phi": [0.2, 0.9, 2.0], "samples": 5}


def test_parse_axes() -> None:
    """
    Test range objects, lists and single numbers as axes.
    """
    config = parse_sweep_config({"theta": {"start": 0, "stop": 1, "num": 3}, "phi": [0.1, 0.2], "q": 0.5}, SETTINGS)
    assert config.theta == pytest.approx((0.0, 0.5, 1.0))
    assert config.phi == (0.1, 0.2)
    assert config.q == (0.5,)
    assert config.size == 6
    assert (config.seed, config.samples) == (5, 7)


def test_parse_defaults_and_overrides() -> None:
    """
    Test that q defaults to a pure environment and that the document overrides seed and samples.
    """
    config = parse_sweep_config({"theta": 0.1, "phi": 0.2, "seed": 9, "samples": 3}, SETTINGS)
    assert config.q == (1.0,)
    assert (config.seed, config.samples) == (9, 3)


@pytest.mark.parametrize(
    "document, field",
    [
        ({"phi": [0.1]}, "theta"),
        ({"theta": [0.1]}, "phi"),
        ({"theta": [0.1], "phi": [0.2], "q": [0.5, 1.2]}, "q"),
        ({"theta": {"start": 0, "stop": 1}, "phi": [0.2]}, "theta"),
        ({"theta": [], "phi": [0.2]}, "theta"),
        ({"theta": [0.1], "phi": "wide"}, "phi"),
    ],
)
def test_parse_errors(document, field) -> None:
    """
    Test that malformed axes are reported on the offending field.
    """
    with pytest.raises(SpecParseError) as exc_info:
        parse_sweep_config(document, SETTINGS)
    assert exc_info.value.field == field


def test_row_order() -> None:
    """
    Test that theta is the outer loop, then phi, then q.
    """
    config = parse_sweep_config({"theta": [1, 2], "phi": [3, 4], "q": [0, 1]}, SETTINGS)
    rows = config.rows()
    assert [row[0] for row in rows] == list(range(8))
    assert [row[1:4] for row in rows[:3]] == [(1.0, 3.0, 0.0), (1.0, 3.0, 1.0), (1.0, 4.0, 0.0)]


@pytest.mark.asyncio
async def test_pure_sweep_follows_sign_rule() -> None:
    """
    Test that a pure-environment sweep agrees with the sign of cos 2theta * cos 2phi.
    """
    frame = await run_sweep(parse_sweep_config(PURE_GRID, SETTINGS))
    assert list(frame.columns) == COLUMNS
    assert len(frame) == 9
    assert sign_boundary_mismatches(frame).empty
    assert sum(verdict_counts(frame).values()) == 9
    assert (frame["residual"] <= 1e-9).all()


@pytest.mark.asyncio
async def test_sweep_is_deterministic() -> None:
    """
    Test that the same seed reproduces the same CSV, with one worker or two.
    """
    config = parse_sweep_config({"theta": [0.3, 1.2], "phi": [0.4], "q": [1.0, 0.6], "samples": 4}, SETTINGS)
    inline = await run_sweep(config)
    pd.testing.assert_frame_equal(inline, await run_sweep(config))
    pooled = await run_sweep(config, workers=2)
    assert to_csv(pooled) == to_csv(inline)


@pytest.mark.asyncio
async def test_write_sweep(tmp_path) -> None:
    """
    Test the CSV header and float precision on disk.
    """
    frame = await run_sweep(parse_sweep_config({"theta": [0.1], "phi": [0.2], "samples": 2}, SETTINGS))
    path = tmp_path / "sweep.csv"
    text = await write_sweep(frame, str(path))
    assert path.read_text() == text
    assert text.splitlines()[0] == ",".join(COLUMNS)
    parsed = pd.read_csv(io.StringIO(text))
    assert parsed["theta"][0] == 0.1
    assert parsed["verdict"][0] == frame["verdict"][0]


@pytest.mark.asyncio
async def test_read_sweep_config(tmp_path) -> None:
    """
    Test reading a grid config from disk and reporting JSON errors by line.
    """
    path = tmp_path / "grid.json"
    path.write_text(json.dumps({"theta": {"start": 0, "stop": np.pi, "num": 4}, "phi": [0.0]}))
    config = await read_sweep_config(str(path), SETTINGS)
    assert config.theta[-1] == pytest.approx(np.pi)
    broken = tmp_path / "broken.json"
    broken.write_text('{\n"theta": [0.1],\n"phi" [0.2]\n}')
    with pytest.raises(SpecParseError) as exc_info:
        await read_sweep_config(str(broken), SETTINGS)
    assert exc_info.value.line == 3

"""
Degradability phase-map sweeps over canonical parameters

Rows are evaluated in a process pool and written in grid order (theta outer,
then phi, then q), so the CSV does not depend on the worker count. Each row
seeds its own generator from (seed, row index).
"""
import asyncio
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import aiofiles
import numpy as np
import pandas as pd

from src.logger.logger import Logger
from src.qubit_channels.errors import SpecParseError
from src.qubit_channels.gaussian import CanonicalParams, VerdictKind, degradability_classify, dilation_kraus
from src.qubit_channels.oracle import max_coherent_information
from src.qubit_channels.settings import Settings

logger = Logger(__name__)

COLUMNS: List[str] = ["theta", "phi", "q", "verdict", "residual", "max_coherent_information"]
FLOAT_FORMAT: str = "%.17g"
ZERO_CAPACITY_TOLERANCE: float = 1e-9

Row = Tuple[int, float, float, float, int, int]


@dataclass(frozen=True)
class SweepConfig:
    theta: Tuple[float, ...]
    phi: Tuple[float, ...]
    q: Tuple[float, ...]
    seed: int
    samples: int

    @property
    def size(self) -> int:
        return len(self.theta) * len(self.phi) * len(self.q)

    def rows(self) -> List[Row]:
        rows = []
        for theta in self.theta:
            for phi in self.phi:
                for q in self.q:
                    rows.append((len(rows), theta, phi, q, self.seed, self.samples))
        return rows


def _axis(value: Any, field: str) -> Tuple[float, ...]:
    """
    An axis given as {"start", "stop", "num"} (endpoints included), a list of
    values or a single number.
    """
    if isinstance(value, dict):
        try:
            start, stop, num = float(value["start"]), float(value["stop"]), int(value["num"])
        except (KeyError, TypeError, ValueError) as e:
            raise SpecParseError(f"Axis '{field}' needs numeric start, stop and num", field) from e
        if num < 1:
            raise SpecParseError(f"Axis '{field}' needs num >= 1", field)
        return tuple(float(x) for x in np.linspace(start, stop, num))
    if isinstance(value, list) and value:
        try:
            return tuple(float(x) for x in value)
        except (TypeError, ValueError) as e:
            raise SpecParseError(f"Axis '{field}' must hold numbers", field) from e
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),)
    raise SpecParseError(f"Axis '{field}' must be a range object, a list or a number", field)


def parse_sweep_config(document: Any, settings: Settings) -> SweepConfig:
    """
    Builds a SweepConfig; seed and samples fall back to the settings.

    :raises SpecParseError: If an axis is malformed or q leaves [0, 1].
    """
    if not isinstance(document, dict):
        raise SpecParseError("Sweep config must be a JSON object")
    for field in ("theta", "phi"):
        if field not in document:
            raise SpecParseError(f"Missing axis '{field}'", field)
    q_axis = _axis(document.get("q", 1.0), "q")
    if any(not 0.0 <= q <= 1.0 for q in q_axis):
        raise SpecParseError("Axis 'q' must lie in [0, 1]", "q")
    return SweepConfig(
        theta=_axis(document["theta"], "theta"),
        phi=_axis(document["phi"], "phi"),
        q=q_axis,
        seed=int(document.get("seed", settings.seed)),
        samples=int(document.get("samples", settings.coherent_samples)),
    )


async def read_sweep_config(file_path: str, settings: Settings) -> SweepConfig:
    try:
        async with aiofiles.open(file_path, mode="r") as f:
            text = await f.read()
    except OSError as e:
        raise SpecParseError(f"Cannot read sweep config {file_path}: {e}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"Invalid JSON in {file_path} at line {e.lineno}: {e.msg}", None, e.lineno) from e
    return parse_sweep_config(document, settings)


def evaluate_row(row: Row) -> Dict[str, Any]:
    """
    Verdict, witness residual and sampled single-letter coherent information
    of one grid point.

    :param row: (index, theta, phi, q, seed, samples).
    :return: CSV row keyed by COLUMNS.
    """
    index, theta, phi, q, seed, samples = row
    p = CanonicalParams(theta, phi, q)
    verdict = degradability_classify(p)
    rng = np.random.default_rng([seed, index])
    coherent = max_coherent_information(dilation_kraus(p), rng, samples)
    if verdict.kind in (VerdictKind.ANTI_DEGRADABLE, VerdictKind.Q_ZERO) and coherent > ZERO_CAPACITY_TOLERANCE:
        logger.warning(
            "Positive coherent information on a zero-capacity verdict",
            theta=theta,
            phi=phi,
            q=q,
            coherent_information=coherent,
        )
    return {
        "theta": theta,
        "phi": phi,
        "q": q,
        "verdict": verdict.kind.value,
        "residual": verdict.residual,
        "max_coherent_information": coherent,
    }


async def run_sweep(config: SweepConfig, workers: int = 1) -> pd.DataFrame:
    """
    Evaluates every grid row; a single worker runs in-process.

    :param config: Sweep grid.
    :param workers: Process pool size.
    :return: DataFrame with COLUMNS in grid order.
    """
    rows = config.rows()
    logger.info("Starting sweep", rows=len(rows), workers=workers)
    if workers <= 1:
        results = [evaluate_row(row) for row in rows]
    else:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = await asyncio.gather(*(loop.run_in_executor(pool, evaluate_row, row) for row in rows))
    frame = pd.DataFrame(list(results), columns=COLUMNS)
    logger.info("Sweep finished", verdicts=verdict_counts(frame))
    return frame


def to_csv(frame: pd.DataFrame) -> str:
    """
    CSV text of a sweep frame, floats at 17 significant digits.

    :param frame: Sweep rows with COLUMNS.
    :return: CSV text with a header row.
    """
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT)


async def write_sweep(frame: pd.DataFrame, output_path: Optional[str]) -> str:
    """
    Renders the sweep as CSV and writes it when a path is given.

    :return: The CSV text.
    """
    text = to_csv(frame)
    if output_path is not None:
        async with aiofiles.open(output_path, mode="w") as f:
            await f.write(text)
        logger.info("Sweep written", path=output_path, rows=len(frame))
    return text


def verdict_counts(frame: pd.DataFrame) -> Dict[str, int]:
    """Number of rows per verdict, keys sorted."""
    return {str(k): int(v) for k, v in frame["verdict"].value_counts().sort_index().items()}


def sign_boundary_mismatches(frame: pd.DataFrame, epsilon: float = 1e-12) -> pd.DataFrame:
    """
    Rows of a q = 1 sweep whose verdict differs from the sign of
    cos 2theta * cos 2phi.
    """
    product = np.cos(2 * frame["theta"]) * np.cos(2 * frame["phi"])
    expected = np.where(
        product > epsilon,
        VerdictKind.DEGRADABLE.value,
        np.where(product < -epsilon, VerdictKind.ANTI_DEGRADABLE.value, VerdictKind.BOTH.value),
    )
    return frame[frame["verdict"] != expected]



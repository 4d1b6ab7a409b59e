import logging
import os
from dataclasses import dataclass, replace
from typing import Optional

from dotenv import load_dotenv

from src.qubit_channels.errors import DomainError

ENV_FILE: str = "config/.env"

DEFAULT_TOLERANCE: float = 1e-10
DEFAULT_SEED: int = 20240101
DEFAULT_SWEEP_WORKERS: int = 4
DEFAULT_COHERENT_SAMPLES: int = 200
DEFAULT_LOG_LEVEL: str = "INFO"


@dataclass(frozen=True)
class Settings:
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = DEFAULT_SEED
    sweep_workers: int = DEFAULT_SWEEP_WORKERS
    coherent_samples: int = DEFAULT_COHERENT_SAMPLES
    log_level: str = DEFAULT_LOG_LEVEL

    def override(
        self,
        tolerance: Optional[float] = None,
        seed: Optional[int] = None,
        sweep_workers: Optional[int] = None,
    ) -> "Settings":
        """
        Returns a copy with command-line values taking precedence.

        :param tolerance: Residual gate from --tolerance.
        :param seed: RNG seed from --seed.
        :param sweep_workers: Pool size from --workers.
        :return: New Settings instance.
        """
        changes = {}
        if tolerance is not None:
            changes["tolerance"] = tolerance
        if seed is not None:
            changes["seed"] = seed
        if sweep_workers is not None:
            changes["sweep_workers"] = sweep_workers
        settings = replace(self, **changes)
        settings.validate()
        return settings

    @property
    def logging_level(self) -> int:
        level = logging.getLevelName(self.log_level)
        return level if isinstance(level, int) else logging.INFO

    def validate(self) -> None:
        """
        Checks every value against its range.

        :raises DomainError: On a non-positive tolerance or a worker or sample count below 1.
        """
        if not self.tolerance > 0:
            raise DomainError(f"Tolerance must be positive, got {self.tolerance}")
        if self.sweep_workers < 1:
            raise DomainError(f"Sweep workers must be at least 1, got {self.sweep_workers}")
        if self.coherent_samples < 1:
            raise DomainError(
                f"Coherent-information samples must be at least 1, got {self.coherent_samples}"
            )


def load_settings(env_file: str = ENV_FILE) -> Settings:
    """
    Builds Settings from config/.env and the process environment.

    Values already present in the environment win over the file.

    :param env_file: Path of the dotenv file; a missing file is ignored.
    :return: Validated Settings.
    :raises DomainError: If a value cannot be parsed or is out of range.
    """
    load_dotenv(env_file)
    try:
        settings = Settings(
            tolerance=float(os.getenv("QC_TOLERANCE", DEFAULT_TOLERANCE)),
            seed=int(os.getenv("QC_SEED", DEFAULT_SEED)),
            sweep_workers=int(os.getenv("QC_SWEEP_WORKERS", DEFAULT_SWEEP_WORKERS)),
            coherent_samples=int(
                os.getenv("QC_COHERENT_SAMPLES", DEFAULT_COHERENT_SAMPLES)
            ),
            log_level=os.getenv("QC_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper(),
        )
    except ValueError as e:
        raise DomainError(f"Invalid configuration value: {e}")
    settings.validate()
    return settings

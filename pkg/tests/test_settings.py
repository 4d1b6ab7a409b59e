import io
import logging
import os
from unittest import mock

import pytest

from src.logger.logger import Logger
from src.qubit_channels.errors import DomainError
from src.qubit_channels.settings import DEFAULT_SEED, DEFAULT_TOLERANCE, Settings, load_settings

KEYS = ["QC_TOLERANCE", "QC_SEED", "QC_SWEEP_WORKERS", "QC_COHERENT_SAMPLES", "QC_LOG_LEVEL"]


@pytest.fixture
def clean_env():
    """
    Fixture isolating the QC_* environment; load_dotenv writes into os.environ.
    """
    with mock.patch.dict(os.environ):
        for key in KEYS:
            os.environ.pop(key, None)
        yield


def test_defaults_without_env_file(clean_env, tmp_path) -> None:
    """
    Test that a missing dotenv file falls back to the defaults.
    """
    settings = load_settings(str(tmp_path / "missing.env"))
    assert settings.tolerance == DEFAULT_TOLERANCE
    assert settings.seed == DEFAULT_SEED


def test_env_file_and_precedence(clean_env, tmp_path) -> None:
    """
    Test that the dotenv file is read and that the process environment wins over it.
    """
    env_file = tmp_path / ".env"
    env_file.write_text("QC_TOLERANCE=1e-8\nQC_SEED=7\nQC_LOG_LEVEL=debug\n")
    os.environ["QC_SEED"] = "11"
    settings = load_settings(str(env_file))
    assert settings.tolerance == pytest.approx(1e-8)
    assert settings.seed == 11
    assert settings.logging_level == logging.DEBUG


def test_invalid_values(clean_env, tmp_path) -> None:
    """
    Test that unparsable or out-of-range values raise DomainError.
    """
    os.environ["QC_SEED"] = "seven"
    with pytest.raises(DomainError):
        load_settings(str(tmp_path / "missing.env"))
    os.environ["QC_SEED"] = "7"
    os.environ["QC_SWEEP_WORKERS"] = "0"
    with pytest.raises(DomainError):
        load_settings(str(tmp_path / "missing.env"))


def test_override() -> None:
    """
    Test that command-line values replace configured ones and are validated.
    """
    settings = Settings().override(tolerance=1e-6, seed=3)
    assert (settings.tolerance, settings.seed) == (1e-6, 3)
    assert Settings().override().tolerance == DEFAULT_TOLERANCE
    with pytest.raises(DomainError):
        Settings().override(tolerance=-1.0)


def test_logger_renders_context() -> None:
    """
    Test that keyword context is appended to the message.
    """
    stream = io.StringIO()
    logger = Logger("tests.context", log_level=logging.DEBUG, stream=stream)
    logger.info("Classified channel", kind="Degradable", residual=0.0)
    logger.debug("Plain message")
    output = stream.getvalue()
    assert "INFO Classified channel [kind=Degradable residual=0.0]" in output
    assert "DEBUG Plain message\n" in output


def test_set_all_levels() -> None:
    """
    Test that set_all_levels reaches every logger created through the wrapper.
    """
    stream = io.StringIO()
    logger = Logger("tests.levels", log_level=logging.DEBUG, stream=stream)
    Logger.set_all_levels(logging.ERROR)
    try:
        logger.info("hidden")
        logger.error("shown")
    finally:
        Logger.set_all_levels(logging.INFO)
    assert "hidden" not in stream.getvalue()
    assert "shown" in stream.getvalue()

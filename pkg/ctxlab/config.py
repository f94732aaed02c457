#!/usr/bin/env python3
"""
Configuration management for ctxlab runs.
Supports YAML config files, environment variables and CLI arguments.
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional
import logging

import yaml

from .error_handling import ConfigError
from .states import SEED_MAX

logger = logging.getLogger(__name__)

COMMANDS = ("verify", "scan", "simulate", "report-from-data")
ENSEMBLE_CHOICES = ("haar_pure", "ginibre_mixed", "both")
FORMAT_CHOICES = ("json", "csv")
STATE_CHOICES = ("singlet", "random")
CONFIG_FILE_NAMES = (".ctxlab.yaml", ".ctxlab.yml", "ctxlab.yaml")


@dataclass
class ToleranceConfig:
    """Comparison tolerances."""
    operator: float = 1e-12  # max-entry distance for operator identities
    state: float = 1e-10  # state invariants (norm, trace, PSD)
    scan: float = 1e-9  # |<chi> - 6| and |<gamma> - 3| in state sweeps


@dataclass
class ExecutionConfig:
    """How work is spread over threads."""
    workers: int = 1
    block_size: int = 8192  # shots per independently seeded block


@dataclass
class RunConfig:
    """Configuration of one CLI run."""
    command: str = "verify"
    seed: int = 42
    shots: int = 100_000
    flip_probability: float = 0.0
    num_states: int = 1000
    ensemble: str = "both"
    state: str = "singlet"
    violation_sigmas: float = 5.0
    full_witness: bool = False
    fault: Optional[str] = None  # test hook, "row,col=LABEL"

    # report-from-data inputs
    r3: Optional[float] = None
    r3_err: Optional[float] = None
    c3: Optional[float] = None
    c3_err: Optional[float] = None

    # Output
    output_format: str = "json"
    output_path: Optional[str] = None
    record_timestamps: bool = True

    # Logging
    log_level: str = "WARNING"
    log_file: Optional[str] = None

    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    execution: ExecutionConfig = field(default_factory=ExecutionConfig)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        """Create config from dictionary."""
        data = dict(data)
        tolerances_data = data.pop('tolerances', None) or {}
        execution_data = data.pop('execution', None) or {}
        try:
            return cls(
                tolerances=ToleranceConfig(**tolerances_data),
                execution=ExecutionConfig(**execution_data),
                **data
            )
        except TypeError as e:
            raise ConfigError(f"Unknown configuration key: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return asdict(self)

    def echo(self) -> Dict[str, Any]:
        """The part of the configuration that determines results (for reports)."""
        data = self.to_dict()
        for key in ("output_path", "log_level", "log_file", "record_timestamps"):
            data.pop(key, None)
        return data


def _merge(base: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(
    config_file: Optional[str] = None,
    cli_overrides: Optional[Dict[str, Any]] = None,
    search_dir: str = ".",
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Load configuration from multiple sources with precedence:
    1. CLI arguments (highest priority)
    2. Environment variables
    3. Config file
    4. Defaults (lowest priority)

    Args:
        config_file: Path to YAML config file
        cli_overrides: Dictionary of explicitly given CLI arguments
        search_dir: Directory searched for a config file when none is given
        environ: Environment mapping (defaults to os.environ)

    Returns:
        Validated RunConfig instance
    """
    config_data: Dict[str, Any] = {}

    if config_file is None:
        search_path = Path(search_dir).resolve()
        for name in CONFIG_FILE_NAMES:
            candidate = search_path / name
            if candidate.exists():
                config_file = str(candidate)
                break

    if config_file:
        if not os.path.exists(config_file):
            raise ConfigError(f"Config file not found: {config_file}")
        logger.info(f"Loading configuration from {config_file}")
        with open(config_file, 'r', encoding='utf-8') as f:
            try:
                file_config = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"Invalid YAML in {config_file}: {e}") from e
        if not isinstance(file_config, dict):
            raise ConfigError(f"Config file {config_file} must contain a mapping")
        config_data = _merge(config_data, file_config)
    else:
        logger.info("No configuration file found, using defaults")

    config_data = _merge(config_data, _load_from_env(os.environ if environ is None else environ))

    if cli_overrides:
        config_data = _merge(config_data, {k: v for k, v in cli_overrides.items() if v is not None})

    config = RunConfig.from_dict(config_data)
    _validate_config(config)
    return config


def _load_from_env(environ: Mapping[str, str]) -> Dict[str, Any]:
    """Load configuration from environment variables."""
    env_config: Dict[str, Any] = {}

    try:
        if environ.get('CTXLAB_SEED'):
            env_config['seed'] = int(environ['CTXLAB_SEED'])
        if environ.get('CTXLAB_WORKERS'):
            env_config.setdefault('execution', {})['workers'] = int(environ['CTXLAB_WORKERS'])
    except ValueError as e:
        raise ConfigError(f"Invalid integer in environment: {e}") from e

    if environ.get('CTXLAB_LOG_LEVEL'):
        env_config['log_level'] = environ['CTXLAB_LOG_LEVEL']

    return env_config


def _validate_config(config: RunConfig) -> None:
    """Validate configuration values."""
    errors = []

    if config.command not in COMMANDS:
        errors.append(f"command must be one of {list(COMMANDS)}")

    if not isinstance(config.seed, int) or not 0 <= config.seed < SEED_MAX:
        errors.append("seed must be an integer in [0, 2^64)")

    if config.command == "simulate" and config.shots < 1:
        errors.append("shots must be >= 1")

    if config.command == "scan" and config.num_states < 1:
        errors.append("num_states must be >= 1")

    if not 0.0 <= config.flip_probability <= 0.5:
        errors.append("flip_probability must be between 0 and 0.5")

    if config.ensemble not in ENSEMBLE_CHOICES:
        errors.append(f"ensemble must be one of {list(ENSEMBLE_CHOICES)}")

    if config.state not in STATE_CHOICES:
        errors.append(f"state must be one of {list(STATE_CHOICES)}")

    if config.output_format not in FORMAT_CHOICES:
        errors.append(f"output_format must be one of {list(FORMAT_CHOICES)}")

    if config.violation_sigmas <= 0:
        errors.append("violation_sigmas must be > 0")

    for name in ("operator", "state", "scan"):
        if getattr(config.tolerances, name) <= 0:
            errors.append(f"tolerances.{name} must be > 0")

    if config.execution.workers < 1:
        errors.append("execution.workers must be >= 1")

    if config.execution.block_size < 1:
        errors.append("execution.block_size must be >= 1")

    if config.command == "report-from-data":
        missing = [k for k in ("r3", "r3_err", "c3", "c3_err") if getattr(config, k) is None]
        if missing:
            errors.append(f"report-from-data requires {', '.join('--' + m.replace('_', '-') for m in missing)}")

    if config.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append("log_level must be a standard logging level name")

    if errors:
        error_msg = "Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors)
        raise ConfigError(error_msg)

    logger.info("Configuration validated successfully")


def save_config(config: RunConfig, output_file: str) -> None:
    """Save configuration to YAML file."""
    config_dict = config.to_dict()

    with open(output_file, 'w', encoding='utf-8') as f:
        yaml.dump(config_dict, f, default_flow_style=False, sort_keys=False)

    logger.info(f"Configuration saved to {output_file}")

from dataclasses import asdict, dataclass, fields
import importlib.util
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

EPSILON_MODES = ("strict", "robust", "robust-torsion")
OUTPUT_FORMATS = ("json", "text")
THREADS_ENV = "GRIDHOM_THREADS"


class ConfigError(Exception):
    """Exception raised for configuration-related errors."""

    def __init__(self, message: str, config_path: Optional[str] = None):
        self.config_path = config_path
        super().__init__(f"Configuration error in '{config_path}': {message}" if config_path else f"Configuration error: {message}")


@dataclass
class RunConfig:
    """Settings shared by the command line, the verification harness and the inspect task.

    Attributes:
        max_grid_index: Largest grid index accepted without allow_large
        allow_large: Permit indices above max_grid_index, up to the hard limit
        threads: Worker threads; 0 means one per CPU
        output: Report path, None for stdout
        format: "json" or "text"
        seed: Seed for randomised property checks
        epsilon_mode: "strict", "robust" or "robust-torsion"
        verify_max_n: Largest grid index a verification case may use
        timings: Include per-check seconds in reports
        model: Model name handed to inspect-ai
    """

    max_grid_index: int = 8
    allow_large: bool = False
    threads: int = 0
    output: Optional[str] = None
    format: str = "json"
    seed: int = 42
    epsilon_mode: str = "robust"
    verify_max_n: int = 6
    timings: bool = False
    model: str = "mockllm/model"

    def resolved_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "RunConfig":
        """Build from a loaded configuration, ignoring keys that are not settings.

        Raises:
            ConfigError: If the configuration fails validation
        """
        errors = validate_config(config)
        if errors:
            raise ConfigError("; ".join(errors))
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in config.items() if key in known})


def load_config(config_path: str) -> Dict[str, Any]:

    path = Path(config_path)

    if not path.exists():
        raise ConfigError("Configuration file not found", config_path)

    if not path.is_file():
        raise ConfigError("Configuration path is not a file", config_path)

    try:
        module_name = f"config_{abs(hash(str(path)))}"

        spec = importlib.util.spec_from_file_location(module_name, path)
        if spec is None or spec.loader is None:
            raise ConfigError("Cannot load configuration file", config_path)

        config_module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(config_module)

        # every public non-callable module attribute is a setting
        config = {}
        for key in dir(config_module):
            if not key.startswith("_") and not callable(getattr(config_module, key)):
                config[key] = getattr(config_module, key)

        logger.info(f"Loaded configuration from {config_path} with {len(config)} settings")
        return config

    except Exception as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Failed to load configuration: {e}", config_path) from e


def load_run_config(config_path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """Defaults, then the configuration file, then the environment, then explicit overrides."""
    config = RunConfig().to_dict()
    if config_path:
        loaded = load_config(config_path)
        config.update({key: value for key, value in loaded.items() if key in config})

    threads = os.environ.get(THREADS_ENV)
    if threads:
        try:
            config["threads"] = int(threads)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {threads!r}") from e

    config.update({key: value for key, value in overrides.items() if value is not None})
    run_config = RunConfig.from_dict(config)
    logger.debug(f"Run configuration: {run_config.to_dict()}")
    return run_config


def validate_config(config: Dict[str, Any]) -> List[str]:
    errors = []

    errors.extend(_validate_field_types(config))
    errors.extend(_validate_value_ranges(config))
    errors.extend(_validate_specific_constraints(config))

    logger.debug(f"Configuration validation found {len(errors)} errors")
    return errors


def _validate_field_types(config: Dict[str, Any]) -> List[str]:
    errors = []

    type_checks = {
        "max_grid_index": int,
        "allow_large": bool,
        "threads": int,
        "output": (str, type(None)),
        "format": str,
        "seed": int,
        "epsilon_mode": str,
        "verify_max_n": int,
        "timings": bool,
        "model": str,
    }

    for field_name, expected_type in type_checks.items():
        if field_name in config:
            value = config[field_name]
            wrong_bool = isinstance(value, bool) and expected_type is int
            if wrong_bool or not isinstance(value, expected_type):
                if isinstance(expected_type, tuple):
                    type_names = " or ".join(t.__name__ for t in expected_type)
                else:
                    type_names = expected_type.__name__
                errors.append(f"Field '{field_name}' must be {type_names}, got {type(value).__name__}")

    return errors


def _validate_value_ranges(config: Dict[str, Any]) -> List[str]:
    """Validate value ranges for numeric fields."""
    errors = []

    for field_name in ("max_grid_index", "verify_max_n"):
        value = config.get(field_name)
        if isinstance(value, int) and not isinstance(value, bool) and value < 2:
            errors.append(f"Field '{field_name}' must be at least 2")

    threads = config.get("threads")
    if isinstance(threads, int) and not isinstance(threads, bool) and threads < 0:
        errors.append("Field 'threads' must be non-negative")

    return errors


def _validate_specific_constraints(config: Dict[str, Any]) -> List[str]:
    errors = []

    if config.get("format", "json") not in OUTPUT_FORMATS:
        errors.append(f"Field 'format' must be one of {', '.join(OUTPUT_FORMATS)}")
    if config.get("epsilon_mode", "robust") not in EPSILON_MODES:
        errors.append(f"Field 'epsilon_mode' must be one of {', '.join(EPSILON_MODES)}")

    errors.extend(_validate_paths(config))
    return errors


def _validate_paths(config: Dict[str, Any]) -> List[str]:
    """The parent of an output path must exist."""
    errors = []
    output = config.get("output")
    if isinstance(output, str):
        parent = Path(output).parent
        if not parent.exists():
            errors.append(f"Directory of output '{output}' does not exist")
    return errors

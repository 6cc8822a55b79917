"""
Configuration classes for different environments
plus run-file loading and setting resolution for the command line
"""
import os
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Mapping, Optional

from dotenv import dotenv_values

from .errors import ConfigError


logger = logging.getLogger(__name__)

ENV_PREFIX = 'SENTGRAPH_'

_TRUE_WORDS = ('true', '1', 'yes', 'on')
_FALSE_WORDS = ('false', '0', 'no', 'off')


def parse_bool(value: Any) -> bool:
    """Interpret a flag value written as text ("true", "0", "yes", ...)"""
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE_WORDS:
        return True
    if text in _FALSE_WORDS:
        return False
    raise ConfigError(f"Expected a boolean, got {value!r}")


def resolve_setting(name: str,
                    arg_value: Any = None,
                    file_values: Optional[Mapping[str, Any]] = None,
                    default: Any = None,
                    cast: Callable[[Any], Any] = lambda value: value) -> Any:
    """
    Resolve one setting with a consistent precedence order across all commands.

    Precedence: command-line flag > run file > SENTGRAPH_<NAME> env var > default

    Args:
        name: Setting name as written in run files (e.g. "neg_nn")
        arg_value: Value from the command line, None when the flag was not given
        file_values: Parsed run-file values
        default: Built-in default used when no other source provides one
        cast: Conversion applied to text values from the file or environment

    Returns:
        The resolved value
    """
    if arg_value is not None:
        return arg_value

    if file_values and file_values.get(name) is not None:
        return _cast(name, file_values[name], cast)

    env_value = os.environ.get(ENV_PREFIX + name.upper())
    if env_value:
        return _cast(name, env_value, cast)

    return default


def _cast(name: str, value: Any, cast: Callable[[Any], Any]) -> Any:
    try:
        return cast(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for {name}: {value!r} ({e})") from e


def load_run_file(path, allowed_keys: Iterable[str]) -> Dict[str, Optional[str]]:
    """
    Load a plain-text `key = value` run file.

    Args:
        path: Path to the run file
        allowed_keys: Keys accepted by the command being configured

    Returns:
        Mapping of key to raw text value

    Raises:
        ConfigError: If the file is missing or names an unknown key
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Run file not found: {path}")

    values = dotenv_values(path)
    allowed = set(allowed_keys)
    unknown = sorted(key for key in values if key not in allowed)
    if unknown:
        raise ConfigError(f"Unknown key in {path}: {unknown[0]}")

    logger.debug(f"Loaded {len(values)} settings from {path}")
    return dict(values)


def require_input_file(path, what: str) -> Path:
    """Validate that an input path exists and is a regular file"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{what} not found: {path}")
    return path


def require_output_path(path, what: str) -> Path:
    """Validate that the parent directory of an output path exists"""
    path = Path(path)
    parent = path.parent if str(path.parent) else Path('.')
    if not parent.is_dir():
        raise ConfigError(f"Directory for {what} does not exist: {parent}")
    return path


class Config:
    """
    Base configuration class with common settings.

    Settings are read from the environment when the config is instantiated,
    so values loaded from `.env` after import still apply. Subclasses only
    change the defaults used when a SENTGRAPH_* variable is unset.
    """
    ENV = 'dev'

    DEFAULT_LOG_LEVEL = 'INFO'
    # Finite-value assertions on parameters after each loss window
    DEFAULT_DEBUG_CHECKS = False

    def __init__(self):
        self.LOG_LEVEL = os.environ.get(ENV_PREFIX + 'LOG_LEVEL') or self.DEFAULT_LOG_LEVEL
        self.DEBUG_CHECKS = _env_bool(ENV_PREFIX + 'DEBUG_CHECKS', self.DEFAULT_DEBUG_CHECKS)
        self.DEFAULT_SEED = _env_int(ENV_PREFIX + 'SEED', 0)
        self.DEFAULT_WORKERS = _env_int(ENV_PREFIX + 'WORKERS', 1)


def _env_bool(name: str, default: bool) -> bool:
    value = os.environ.get(name)
    if not value:
        return default
    return _cast(name, value, parse_bool)


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(name)
    if not value:
        return default
    return _cast(name, value, int)


class DevelopmentConfig(Config):
    """Development environment configuration"""
    ENV = 'dev'
    DEFAULT_DEBUG_CHECKS = True


class TestConfig(Config):
    """Test environment configuration"""
    ENV = 'test'
    DEFAULT_DEBUG_CHECKS = True
    DEFAULT_LOG_LEVEL = 'WARNING'


class ProductionConfig(Config):
    """Production environment configuration"""
    ENV = 'prod'
    DEFAULT_DEBUG_CHECKS = False


# Configuration mapping
config_map = {
    'dev': DevelopmentConfig,
    'test': TestConfig,
    'prod': ProductionConfig
}


def get_config() -> Config:
    """Build the configuration for the current ENV from the current environment"""
    env = os.environ.get('ENV', 'dev')
    config_class = config_map.get(env, DevelopmentConfig)

    if env == 'dev':
        logger.debug(f"get_config() called with ENV: {env}")
        logger.debug(f"Using config class: {config_class.__name__}")

    return config_class()

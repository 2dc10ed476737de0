"""Configuration management for pipeline-doctor"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from .constraints import ATOM_KINDS
from .errors import ConfigError

SPLITS_ENV = 'MARO_SPLITS'
SPLITS_ENV_ALIAS = 'PIPELINE_DOCTOR_SPLITS'
CONFIG_ENV = 'PIPELINE_DOCTOR_CONFIG'

REPORT_FORMATS = ('markdown', 'csv', 'table')
MAX_SEARCH_DEPTH = 4


@dataclass(frozen=True)
class LocalizerConfig:
    max_depth: int = 2
    n_splits_hint: int = 5
    template_order: Tuple[str, ...] = ATOM_KINDS

    def __post_init__(self):
        if not isinstance(self.max_depth, int) or not 0 <= self.max_depth <= MAX_SEARCH_DEPTH:
            raise ConfigError(f"localizer.max_depth must be between 0 and {MAX_SEARCH_DEPTH}, got {self.max_depth!r}")
        if not isinstance(self.n_splits_hint, int) or self.n_splits_hint < 1:
            raise ConfigError(f"localizer.n_splits_hint must be a positive integer, got {self.n_splits_hint!r}")
        object.__setattr__(self, 'template_order', tuple(self.template_order))
        if sorted(self.template_order) != sorted(ATOM_KINDS):
            raise ConfigError(
                f"localizer.template_order must order exactly {', '.join(ATOM_KINDS)}")


@dataclass(frozen=True)
class RemediationConfig:
    n_splits: int = 5

    def __post_init__(self):
        if not isinstance(self.n_splits, int) or self.n_splits < 1:
            raise ConfigError(f"remediation.n_splits must be a positive integer, got {self.n_splits!r}")


@dataclass(frozen=True)
class HarnessConfig:
    n_evals: int = 20
    seeds: Tuple[int, ...] = (1, 2, 3, 4, 5)
    report_format: str = 'markdown'

    def __post_init__(self):
        if not isinstance(self.n_evals, int) or self.n_evals < 1:
            raise ConfigError(f"harness.n_evals must be a positive integer, got {self.n_evals!r}")
        object.__setattr__(self, 'seeds', tuple(self.seeds))
        if not self.seeds or not all(isinstance(s, int) for s in self.seeds):
            raise ConfigError(f"harness.seeds must be a non-empty list of integers, got {self.seeds!r}")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(
                f"harness.report_format must be one of {', '.join(REPORT_FORMATS)}, got {self.report_format!r}")


@dataclass(frozen=True)
class Config:
    localizer: LocalizerConfig = field(default_factory=LocalizerConfig)
    remediation: RemediationConfig = field(default_factory=RemediationConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> 'Config':
        """Create Config from dictionary"""
        # Handle None or empty data
        if not data:
            return cls()

        localizer_data = data.get('localizer') or {}
        remediation_data = data.get('remediation') or {}
        harness_data = data.get('harness') or {}

        def pick(section: Dict[str, Any], key: str, default: Any) -> Any:
            value = section.get(key)
            return default if value is None else value

        return cls(
            localizer=LocalizerConfig(
                max_depth=pick(localizer_data, 'max_depth', 2),
                n_splits_hint=pick(localizer_data, 'n_splits_hint', 5),
                template_order=tuple(pick(localizer_data, 'template_order', ATOM_KINDS)),
            ),
            remediation=RemediationConfig(
                n_splits=pick(remediation_data, 'n_splits', pick(localizer_data, 'n_splits_hint', 5)),
            ),
            harness=HarnessConfig(
                n_evals=pick(harness_data, 'n_evals', 20),
                seeds=tuple(pick(harness_data, 'seeds', (1, 2, 3, 4, 5))),
                report_format=pick(harness_data, 'report_format', 'markdown'),
            ),
        )


def resolve_splits(flag: Optional[int], config: Config) -> int:
    """Split count: flag, then MARO_SPLITS (or its alias), then config.

    The config value is ``remediation.n_splits``, falling back to
    ``localizer.n_splits_hint`` when the file leaves it out.
    """
    env_name = next((name for name in (SPLITS_ENV, SPLITS_ENV_ALIAS) if os.environ.get(name)), None)
    if flag is not None:
        value: Any = flag
    elif env_name is not None:
        raw = os.environ[env_name]
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{env_name} must be an integer, got {raw!r}") from None
    else:
        value = config.remediation.n_splits
    if value < 1:
        raise ConfigError(f"number of splits must be positive, got {value}")
    return value


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Load configuration from YAML file"""
    # Check environment variable first
    env_config = os.environ.get(CONFIG_ENV)
    if env_config and Path(env_config).exists():
        config_file = Path(env_config)
    elif config_path and Path(config_path).exists():
        config_file = Path(config_path)
    else:
        # Get the directory holding the pipeline_doctor package
        package_dir = Path(__file__).parent.parent
        config_locations = [
            package_dir / "config.yaml",
            Path.home() / ".config" / "pipeline-doctor" / "config.yaml",
        ]

        config_file = None
        for loc in config_locations:
            if loc.exists():
                config_file = loc
                break

        if not config_file:
            # Return empty dict to use defaults
            return {}

    with open(config_file) as f:
        data = yaml.safe_load(f)
        return data if data is not None else {}

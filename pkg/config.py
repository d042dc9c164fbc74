"""
Configuration module for the interdisciplinarity toolkit.
Handles input paths, qualification policy, analysis and network settings.

Precedence: command-line flag > config file > built-in default.
"""
import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from Corpus.corpus_model import DateBound, DocType, Granularity, MissingMonthPolicy
from Corpus.qualifier import QualificationPolicy
from errors import ConfigError
from Metrics.diversity_metrics import DisparityBasis, TDMode
from Network.stream_export import StreamFormat
from run_log import WarningLog

log = logging.getLogger(__name__)

STAGE = "config"

# keys holding file locations, resolved against the config file's directory
_PATH_KEYS = {('inputs', 'records'), ('inputs', 'catalog'), ('inputs', 'abbrev_map'), ('output', 'out_dir')}


@dataclass(frozen=True)
class RunConfig:
    """Validated, immutable settings for one run."""
    records_path: Optional[Path]
    catalog_path: Optional[Path]
    abbrev_map_path: Optional[Path]
    delimiter: str
    policy: QualificationPolicy
    filter_reference_types: bool
    granularity: Granularity
    date_from: DateBound
    date_to: DateBound
    missing_month_policy: MissingMonthPolicy
    query_terms: tuple
    query_year: Optional[int]
    td_mode: TDMode
    disparity_basis: DisparityBasis
    seed: int
    resolution: float
    overlap_threshold: float
    max_nodes_per_period: int
    segments: tuple
    out_dir: Path
    stream_formats: tuple

    def to_dict(self) -> Dict[str, Any]:
        """Echo for the run report; paths as given, enums by value."""
        return {
            'inputs': {
                'records': str(self.records_path) if self.records_path else None,
                'catalog': str(self.catalog_path) if self.catalog_path else None,
                'abbrev_map': str(self.abbrev_map_path) if self.abbrev_map_path else None,
                'delimiter': self.delimiter,
            },
            'policy': {
                'min_references': self.policy.min_references,
                'min_coverage': self.policy.min_coverage,
                'allowed_types': sorted(t.value for t in self.policy.allowed_types),
                'filter_reference_types': self.filter_reference_types,
            },
            'analysis': {
                'granularity': self.granularity.value,
                'from': str(self.date_from),
                'to': str(self.date_to),
                'missing_month_policy': self.missing_month_policy.value,
                'query_terms': list(self.query_terms),
                'query_year': self.query_year,
                'td_mode': self.td_mode.value,
                'disparity_basis': self.disparity_basis.value,
            },
            'network': {
                'seed': self.seed,
                'resolution': self.resolution,
                'overlap_threshold': self.overlap_threshold,
                'max_nodes_per_period': self.max_nodes_per_period,
                'segments': [list(segment) for segment in self.segments],
            },
            'output': {
                'out_dir': str(self.out_dir),
                'stream_formats': [fmt.value for fmt in self.stream_formats],
            },
        }


class ConfigManager:
    """Manages run configuration settings"""

    DEFAULT_CONFIG = {
        'inputs': {
            'records': None,
            'catalog': None,
            'abbrev_map': None,
            'delimiter': ',',
        },
        'policy': {
            'min_references': 5,
            'min_coverage': 0.80,
            'allowed_types': [DocType.ARTICLE.value, DocType.REVIEW.value],
            'filter_reference_types': True,
        },
        'analysis': {
            'granularity': Granularity.YEAR.value,
            'from': '1900',
            'to': '2100',
            'missing_month_policy': MissingMonthPolicy.EXCLUDE.value,
            'query_terms': [],
            'query_year': None,
            'td_mode': TDMode.CANONICAL.value,
            'disparity_basis': DisparityBasis.GLOBAL.value,
        },
        'network': {
            'seed': 42,
            'resolution': 1.0,
            'overlap_threshold': 0.5,
            'max_nodes_per_period': 500,
            'segments': [],
        },
        'output': {
            'out_dir': 'idrkit_out',
            'stream_formats': [fmt.value for fmt in StreamFormat],
        },
    }

    def __init__(self, config_file: Optional[str] = None, warnings: Optional[WarningLog] = None):
        self.config_file = config_file
        self.warnings = warnings if warnings is not None else WarningLog(log)
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)
        if config_file is not None:
            self.load_config(config_file)

    def load_config(self, config_file: str) -> None:
        """Merge a JSON config file over the current values."""
        path = Path(config_file)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                saved_config = json.load(f)
        except (json.JSONDecodeError, IOError) as e:
            raise ConfigError(f"Error loading config {path}: {e}") from e
        if not isinstance(saved_config, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        self.config_file = str(path)
        self._merge_config(saved_config, base_dir=path.resolve().parent)

    def _merge_config(self, saved_config: Dict[str, Any], base_dir: Optional[Path] = None) -> None:
        """Merge saved config with defaults"""
        for section, values in saved_config.items():
            if section not in self.config:
                self.warnings.warn(STAGE, f"Ignoring unknown config section '{section}'")
                continue
            if not isinstance(values, dict):
                raise ConfigError(f"Config section '{section}' must be an object")
            for key, value in values.items():
                if key not in self.config[section]:
                    self.warnings.warn(STAGE, f"Ignoring unknown config key '{section}.{key}'")
                    continue
                if (section, key) in _PATH_KEYS and value is not None and base_dir is not None:
                    candidate = Path(value)
                    value = str(candidate if candidate.is_absolute() else base_dir / candidate)
                self.config[section][key] = value

    def apply_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Apply command-line values; None means 'not given'."""
        for section, values in overrides.items():
            for key, value in values.items():
                if value is not None:
                    self.set(section, key, value)

    def get(self, section: str, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        return self.config.get(section, {}).get(key, default)

    def set(self, section: str, key: str, value: Any) -> None:
        """Set configuration value"""
        if section not in self.config:
            self.config[section] = {}
        self.config[section][key] = value

    def reset_to_defaults(self) -> None:
        """Reset configuration to defaults"""
        self.config = copy.deepcopy(self.DEFAULT_CONFIG)

    # ── Validation ─────────────────────────────────────────────────────────

    def _path(self, key: str, required: bool) -> Optional[Path]:
        value = self.get('inputs', key)
        if value in (None, ''):
            if required:
                raise ConfigError(f"Missing required input '{key}' (use --{key.replace('_', '-')} or the config file)")
            return None
        path = Path(value)
        if not path.is_file():
            raise ConfigError(f"Input file for '{key}' not found: {path}")
        return path

    def _list(self, section: str, key: str) -> list:
        value = self.get(section, key)
        if value is None:
            return []
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{section}.{key} must be a list, got {value!r}")
        return list(value)

    @staticmethod
    def _enum(enum_cls, value, name: str):
        try:
            return enum_cls(value)
        except ValueError:
            choices = ', '.join(item.value for item in enum_cls)
            raise ConfigError(f"Invalid {name} '{value}' (choose from {choices})") from None

    @staticmethod
    def _number(value, cast, name: str):
        try:
            return cast(value)
        except (TypeError, ValueError):
            raise ConfigError(f"Invalid {name} '{value}'") from None

    def build(self, require_inputs: bool = True) -> RunConfig:
        """Validate the merged values and freeze them into a RunConfig."""
        records = self._path('records', require_inputs)
        catalog = self._path('catalog', require_inputs)
        abbrev_map = self._path('abbrev_map', False)

        allowed = frozenset(DocType.from_text(t) for t in self._list('policy', 'allowed_types'))
        try:
            policy = QualificationPolicy(
                min_references=self._number(self.get('policy', 'min_references'), int, 'min_references'),
                min_coverage=self._number(self.get('policy', 'min_coverage'), float, 'min_coverage'),
                allowed_types=allowed,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e

        try:
            date_from = DateBound.parse(self.get('analysis', 'from'))
            date_to = DateBound.parse(self.get('analysis', 'to'))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if (date_from.year, date_from.month or 1) > (date_to.year, date_to.month or 12):
            raise ConfigError(f"--from {date_from} is after --to {date_to}")

        resolution = self._number(self.get('network', 'resolution'), float, 'resolution')
        if resolution <= 0:
            raise ConfigError(f"resolution must be positive, got {resolution}")
        overlap = self._number(self.get('network', 'overlap_threshold'), float, 'overlap_threshold')
        if not 0.0 <= overlap <= 1.0:
            raise ConfigError(f"overlap_threshold must lie in [0, 1], got {overlap}")
        max_nodes = self._number(self.get('network', 'max_nodes_per_period'), int, 'max_nodes_per_period')
        if max_nodes < 1:
            raise ConfigError("max_nodes_per_period must be >= 1")

        segments = []
        for segment in self._list('network', 'segments'):
            if not isinstance(segment, (list, tuple)) or len(segment) != 2:
                raise ConfigError(f"Invalid segment {segment!r}, expected [from_year, to_year]")
            start, end = (self._number(v, int, 'segment year') for v in segment)
            if start > end:
                raise ConfigError(f"Invalid segment {segment!r}: start after end")
            segments.append((start, end))

        query_year = self.get('analysis', 'query_year')
        delimiter = self.get('inputs', 'delimiter') or ','
        if len(delimiter) != 1:
            raise ConfigError(f"delimiter must be a single character, got {delimiter!r}")

        return RunConfig(
            records_path=records,
            catalog_path=catalog,
            abbrev_map_path=abbrev_map,
            delimiter=delimiter,
            policy=policy,
            filter_reference_types=bool(self.get('policy', 'filter_reference_types')),
            granularity=self._enum(Granularity, self.get('analysis', 'granularity'), 'granularity'),
            date_from=date_from,
            date_to=date_to,
            missing_month_policy=self._enum(
                MissingMonthPolicy, self.get('analysis', 'missing_month_policy'), 'missing_month_policy'
            ),
            query_terms=tuple(str(t) for t in self._list('analysis', 'query_terms') if str(t)),
            query_year=None if query_year is None else self._number(query_year, int, 'query_year'),
            td_mode=self._enum(TDMode, self.get('analysis', 'td_mode'), 'td_mode'),
            disparity_basis=self._enum(DisparityBasis, self.get('analysis', 'disparity_basis'), 'disparity_basis'),
            seed=self._number(self.get('network', 'seed'), int, 'seed'),
            resolution=resolution,
            overlap_threshold=overlap,
            max_nodes_per_period=max_nodes,
            segments=tuple(segments),
            out_dir=Path(self.get('output', 'out_dir') or 'idrkit_out'),
            stream_formats=tuple(
                self._enum(StreamFormat, fmt, 'stream format') for fmt in self._list('output', 'stream_formats')
            ),
        )

import json
import yaml
import os
from typing import Dict, Optional
from pathlib import Path
from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass
class AnalysisConfig:
    """Knobs of the cohomology pipeline and the invariance suite"""
    horizon: int = 64
    max_prime: int = 97
    power: int = 2
    collar: bool = True


@dataclass
class OutputConfig:
    """Report rendering configuration"""
    color: Optional[bool] = None  # None: style only when writing to a terminal
    report_timings: bool = False
    json_indent: int = 2


@dataclass
class AppConfig:
    """Main application configuration"""
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    log_level: str = "WARNING"
    workers: int = 4

    def validate(self) -> "AppConfig":
        if self.analysis.horizon < 2:
            raise ConfigError(f"horizon must be at least 2 (got {self.analysis.horizon})")
        if self.analysis.max_prime < 2:
            raise ConfigError(f"max_prime must be at least 2 (got {self.analysis.max_prime})")
        if self.analysis.power < 1:
            raise ConfigError(f"power must be at least 1 (got {self.analysis.power})")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1 (got {self.workers})")
        return self


def parse_switch(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "on", "yes"):
        return True
    if text in ("0", "false", "off", "no"):
        return False
    raise ConfigError(f"expected on/off, got {value!r}")


class ConfigManager:
    """Manages application configuration from JSON/YAML files"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = Path(config_path) if config_path else None
        self.config = self._load_config()

    def _load_config(self) -> AppConfig:
        """Load configuration from file, or defaults when no file is given"""
        if self.config_path is None:
            return self._parse_config({})

        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        with open(self.config_path, 'r') as f:
            if self.config_path.suffix.lower() in ['.yaml', '.yml']:
                data = yaml.safe_load(f) or {}
            else:
                data = json.load(f)

        return self._parse_config(data)

    def _parse_config(self, data: Dict) -> AppConfig:
        """Parse configuration data into structured format"""
        analysis_data = data.get('analysis', {})
        try:
            analysis = AnalysisConfig(
                horizon=int(analysis_data.get('horizon', 64)),
                max_prime=int(analysis_data.get('max_prime', 97)),
                power=int(analysis_data.get('power', 2)),
                collar=parse_switch(analysis_data.get('collar', True)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid analysis configuration: {e}")

        output_data = data.get('output', {})
        color = output_data.get('color')
        # TILECOH_COLOR wins over the file
        color_env = os.getenv('TILECOH_COLOR')
        if color_env is not None and color_env.strip():
            color = parse_switch(color_env)
        elif color is not None:
            color = parse_switch(color)

        output = OutputConfig(
            color=color,
            report_timings=parse_switch(output_data.get('report_timings', False)),
            json_indent=int(output_data.get('json_indent', 2)),
        )

        return AppConfig(
            analysis=analysis,
            output=output,
            log_level=os.getenv('LOG_LEVEL', data.get('log_level', 'WARNING')).upper(),
            workers=int(data.get('workers', 4)),
        ).validate()

    def get_config(self) -> AppConfig:
        """Get current configuration"""
        return self.config

import json
import os
from pydantic import (
    BaseModel,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Any, Dict, List, Literal, Optional, Tuple
from typing_extensions import Self

from backend.data import CsvSchema
from backend.strategies import StrategySpec

DOTENV_PATH = os.environ.get(
    "DOTENV_PATH",
    os.path.join(
        os.path.dirname(
            os.path.dirname(__file__)
        ),
        ".env"
    )
)


class ConfigError(ValueError):
    """Exception raised when an experiment configuration fails validation."""


class _RuntimeSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="ALR_",
        env_file=DOTENV_PATH,
        extra="ignore",
        env_ignore_empty=True
    )

    output_dir: str = "results"
    jobs: int = Field(default=1, ge=1)
    log_level: str = "INFO"


class _ExperimentDefaults(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="ALR_DEFAULT_",
        env_file=DOTENV_PATH,
        extra="ignore",
        env_ignore_empty=True
    )

    runs: int = 100
    train_fraction: float = 0.8
    budget_fraction: float = 0.1
    budget_bounds: Tuple[int, int] = (20, 60)
    sigma: float = 0.01
    committee_size: int = 4
    ebmalr_gamma: float = 0.05
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    base_seed: int = 0
    alpha: float = 0.05


class DatasetSpec(BaseModel):
    name: str
    path: str
    target: str
    categorical: List[str] = []
    columns: Optional[List[str]] = None

    def schema(self) -> CsvSchema:
        return CsvSchema(
            target=self.target,
            categorical=tuple(self.categorical),
            columns=tuple(self.columns) if self.columns is not None else None,
        )


class ExperimentConfig(BaseModel):
    """
    One experiment sweep. Values not given in the JSON file fall back to
    `_ExperimentDefaults`, which the environment may override.
    """
    datasets: List[DatasetSpec]
    strategies: List[StrategySpec]
    runs: int = Field(ge=1)
    train_fraction: float = Field(gt=0, lt=1)
    budget_fraction: float = Field(gt=0, le=1)
    budget_bounds: Tuple[int, int]
    sigma: float = Field(ge=0)
    committee_size: int = Field(ge=2)
    ebmalr_gamma: float = Field(ge=0, lt=0.5)
    kmeans_restarts: int = Field(ge=1)
    kmeans_max_iter: int = Field(ge=1)
    base_seed: int = Field(ge=0)
    alpha: float = Field(gt=0, lt=1)
    stats_granularity: Literal["dataset", "run"] = "dataset"

    @model_validator(mode="before")
    @classmethod
    def apply_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        if "dataset" in data:
            if "datasets" in data:
                raise ValueError("Give either 'dataset' or 'datasets', not both")
            data["datasets"] = [data.pop("dataset")]
        for key, value in _ExperimentDefaults().model_dump().items():
            data.setdefault(key, value)
        # strategy-level knobs inherit the experiment-level values
        strategies = []
        for strategy in data.get("strategies", []):
            if isinstance(strategy, str):
                strategy = {"kind": strategy}
            if isinstance(strategy, dict):
                strategy = {
                    "committee_size": data["committee_size"],
                    "ebmalr_gamma": data["ebmalr_gamma"],
                    **strategy,
                }
            strategies.append(strategy)
        data["strategies"] = strategies
        return data

    @field_validator("budget_bounds")
    @classmethod
    def ordered_bounds(cls, bounds: Tuple[int, int]) -> Tuple[int, int]:
        if bounds[0] < 1 or bounds[0] > bounds[1]:
            raise ValueError(f"budget_bounds must satisfy 1 <= min <= max, got {list(bounds)}")
        return bounds

    @model_validator(mode="after")
    def unique_names(self) -> Self:
        for label, names in (
            ("strategy", [s.name for s in self.strategies]),
            ("dataset", [d.name for d in self.datasets]),
        ):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            if duplicates:
                raise ValueError(f"Duplicate {label} names: {duplicates}")
        if not self.strategies:
            raise ValueError("At least one strategy is required")
        if not self.datasets:
            raise ValueError("At least one dataset is required")
        return self

    def dataset(self, name: Optional[str] = None) -> DatasetSpec:
        if name is None:
            return self.datasets[0]
        for spec in self.datasets:
            if spec.name == name:
                return spec
        raise ConfigError(f"Unknown dataset '{name}'; declared: {[d.name for d in self.datasets]}")

    def select(self, datasets: Optional[List[str]] = None, strategies: Optional[List[str]] = None) -> "ExperimentConfig":
        """Copy restricted to the named datasets/strategies; unknown names are errors."""
        update: Dict[str, Any] = {}
        if datasets:
            update["datasets"] = [self.dataset(name) for name in datasets]
        if strategies:
            known = {s.name: s for s in self.strategies}
            unknown = [name for name in strategies if name not in known]
            if unknown:
                raise ConfigError(f"Unknown strategies {unknown}; declared: {list(known)}")
            update["strategies"] = [known[name] for name in strategies]
        return self.model_copy(update=update)


def _field_path(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def parse_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> Tuple[ExperimentConfig, Dict[str, DatasetSpec]]:
    """Load, default and validate an experiment config file; returns it with its dataset registry."""
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")

    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        config = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        details = "; ".join(f"{_field_path(err)}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"Invalid config {path}: {details}") from e

    base_dir = os.path.dirname(os.path.abspath(path))
    registry = {}
    for spec in config.datasets:
        resolved = spec.path if os.path.isabs(spec.path) else os.path.join(base_dir, spec.path)
        if not os.path.isfile(resolved):
            raise ConfigError(f"Dataset '{spec.name}' points to a missing file: {resolved}")
        registry[spec.name] = spec.model_copy(update={"path": resolved})
    config = config.model_copy(update={"datasets": list(registry.values())})
    return config, registry


class AppSettings(BaseModel):
    runtime: _RuntimeSettings = _RuntimeSettings()
    defaults: _ExperimentDefaults = _ExperimentDefaults()


app_settings = AppSettings()

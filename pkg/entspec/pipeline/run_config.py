"""
Run configuration: one INI file per simulate invocation.

    [lattice]
    dimension = 2
    size = 16

    [evolution]
    gammas = 0.1, 10
    dt = 0.05
    sample_interval = 2.0
    samples = 10
    initial_state = random_gaussian

    [ensemble]
    trajectories = 100
    seed = 1234
    workers = 4

    [observables]
    geometries = checkerboard, half_cut
    observables = spectrum, entropy_curve
    keep_eigenvectors = true

    [output]
    directory = d2_L16
"""
import configparser
import json
from typing import Any, Dict, List, Optional
import logging

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..config import Config
from ..dynamics.trajectory import INITIAL_STATES, EvolutionConfig
from ..exceptions import ConfigError
from ..geometry.lattice import build_lattice
from ..geometry.masks import parse_geometry
from ..provenance import config_hash

logger = logging.getLogger(__name__)

OBSERVABLES = ("spectrum", "entropy_curve", "half_cut_entropy", "mutual_information", "occupations")


def _split(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class LatticeSection(BaseModel):
    dimension: int
    size: int


class EvolutionSection(BaseModel):
    gammas: List[float] = Field(min_length=1)
    dt: float = Field(default=Config.DT, gt=0.0)
    burn_in: Optional[float] = Field(default=None, ge=0.0)
    sample_interval: float = Field(default=1.0, gt=0.0)
    samples: int = Field(default=1, ge=0)
    initial_state: str = "random_gaussian"

    @field_validator("gammas", mode="before")
    @classmethod
    def split_gammas(cls, v: Any) -> Any:
        return _split(v)

    @field_validator("gammas")
    @classmethod
    def validate_gammas(cls, v: List[float]) -> List[float]:
        if any(g < 0 for g in v):
            raise ValueError("Monitoring rates must be non-negative")
        return v

    @field_validator("initial_state")
    @classmethod
    def validate_initial_state(cls, v: str) -> str:
        if v not in INITIAL_STATES:
            raise ValueError(f"Unknown initial state '{v}'. Valid: {', '.join(INITIAL_STATES)}")
        return v


class EnsembleSection(BaseModel):
    trajectories: int = Field(ge=1)
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)


class ObservableSection(BaseModel):
    geometries: List[str] = Field(default_factory=lambda: ["half_cut"])
    observables: List[str] = Field(default_factory=lambda: ["spectrum"])
    keep_eigenvectors: bool = False

    @field_validator("geometries", "observables", mode="before")
    @classmethod
    def split_lists(cls, v: Any) -> Any:
        return _split(v)

    @field_validator("observables")
    @classmethod
    def validate_observables(cls, v: List[str]) -> List[str]:
        unknown = [o for o in v if o not in OBSERVABLES]
        if unknown:
            raise ValueError(f"Unknown observables {unknown}. Valid: {', '.join(OBSERVABLES)}")
        return v


class OutputSection(BaseModel):
    directory: str = "run"


class RunConfig(BaseModel):
    """Validated configuration of one ensemble run."""

    lattice: LatticeSection
    evolution: EvolutionSection
    ensemble: EnsembleSection
    observables: ObservableSection = Field(default_factory=ObservableSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def validate_geometry(self) -> "RunConfig":
        lattice, _ = build_lattice(self.lattice.dimension, self.lattice.size)
        for token in self.observables.geometries:
            parse_geometry(lattice, token)
        return self

    def config_hash(self) -> str:
        """Hash of everything that affects the data; worker count and output location excluded."""
        payload = self.model_dump()
        payload["ensemble"].pop("workers")
        payload.pop("output")
        return config_hash(payload)

    def evolution_config(self, gamma: float, check_orthonormality: bool = False) -> EvolutionConfig:
        evo = self.evolution
        return EvolutionConfig(gamma=gamma, dt=evo.dt, burn_in=evo.burn_in,
                               sample_interval=evo.sample_interval, samples=evo.samples,
                               initial_state=evo.initial_state, check_orthonormality=check_orthonormality)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True)

    def to_ini(self) -> str:
        lines = []
        for section, values in self.model_dump().items():
            lines.append(f"[{section}]")
            for key, value in values.items():
                if value is None:
                    continue
                if isinstance(value, list):
                    value = ", ".join(str(v) for v in value)
                lines.append(f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a nested dict, raising ConfigError on failure."""
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}") from e
    except ValueError as e:
        raise ConfigError(f"Invalid run configuration: {str(e)}") from e


def load_run_config(path: str) -> RunConfig:
    """Load and validate an INI run file."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"Cannot read run configuration '{path}'")
    data = {section: dict(parser.items(section)) for section in parser.sections()}
    config = parse_run_config(data)
    logger.info(f"Loaded run configuration {path} (hash {config.config_hash()[:12]})")
    return config

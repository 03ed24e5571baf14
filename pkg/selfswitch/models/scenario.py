"""
Scenario and figure job models.
Validation of command-line workloads before anything is computed.
"""
from enum import Enum
from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from selfswitch.config import settings
from selfswitch.models.parameters import MultiSpeciesConfig, MutationParams
from selfswitch.services.validation import parse_list, parse_real


class ModelName(str, Enum):
    MUTATION3 = "mutation3"
    ORGANISM = "organism"
    MULTISPECIES = "multispecies"


class RunMode(str, Enum):
    CLOSED_FORM = "closed_form"
    INTEGRATE = "integrate"


COMMON_OUTPUTS = ("trace", "purity", "energy", "moments", "spectrum", "residual", "matrix")
MODEL_OUTPUTS = {
    ModelName.ORGANISM: ("entropy", "reduced_eigenvalues", "ppt"),
    ModelName.MUTATION3: ("density", "density_origin"),
    ModelName.MULTISPECIES: ("propositions", "uncertainty", "switching", "species_entropy"),
}


class Scenario(BaseModel):
    """A closed-form evaluation or an integration of one model on a time grid."""
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model: ModelName
    mode: RunMode = RunMode.CLOSED_FORM
    model_params: dict[str, Any] = {}
    t_start: float
    t_end: float
    t_step: float
    stride: int = settings.DRIFT_LOG_STRIDE
    outputs: tuple[str, ...]
    output_path: str = ""

    @field_validator('t_start', 't_end', 't_step', mode='before')
    @classmethod
    def parse_times(cls, v):
        return parse_real(v)

    @field_validator('outputs', mode='before')
    @classmethod
    def parse_outputs(cls, v):
        if isinstance(v, str):
            v = parse_list(v)
        return tuple(str(item).strip().lower() for item in v)

    @field_validator('t_step')
    @classmethod
    def validate_step(cls, v):
        if v <= 0.0:
            raise ValueError(f't_step must be positive, got {v}')
        return v

    @field_validator('stride')
    @classmethod
    def validate_stride(cls, v):
        if v < 1:
            raise ValueError(f'stride must be at least 1, got {v}')
        return v

    @model_validator(mode='after')
    def validate_scenario(self):
        if not self.t_start < self.t_end:
            raise ValueError(f't_start must be below t_end, got [{self.t_start}, {self.t_end}]')
        if self.t_step > self.t_end - self.t_start:
            raise ValueError(f't_step {self.t_step} exceeds the window {self.t_end - self.t_start}')
        if not self.outputs:
            raise ValueError('At least one output must be requested')
        allowed = COMMON_OUTPUTS + MODEL_OUTPUTS[self.model]
        unknown = [o for o in self.outputs if o not in allowed]
        if unknown:
            raise ValueError(f'Unknown outputs for {self.model.value}: {", ".join(unknown)} (allowed: {", ".join(allowed)})')
        # Model preconditions are checked up front
        try:
            self.parameters()
        except ValueError as e:
            raise ValueError(f'Invalid {self.model.value} parameters: {e}') from e
        return self

    def parameters(self) -> Optional[Union[MutationParams, MultiSpeciesConfig]]:
        """Typed parameters of the chosen model (None for the organism)."""
        if self.model is ModelName.MUTATION3:
            return MutationParams(**self.model_params)
        if self.model is ModelName.MULTISPECIES:
            defaults = MultiSpeciesConfig.worked_example().model_dump()
            return MultiSpeciesConfig(**{**defaults, **self.model_params})
        if self.model_params:
            raise ValueError(f'The organism model takes no parameters, got {", ".join(sorted(self.model_params))}')
        return None

    def with_value(self, name: str, value: float) -> 'Scenario':
        """Copy with one model parameter (or time-grid field) replaced and revalidated."""
        data = self.model_dump()
        if name in ('t_start', 't_end', 't_step'):
            data[name] = value
        else:
            data['model_params'] = {**self.model_params, name: value}
        return Scenario(**data)


class FigureJob(BaseModel):
    """Grid specification for the data behind one figure."""
    model_config = ConfigDict(frozen=True)

    figure_id: int
    grid: tuple[int, int] = settings.FIGURE_GRID
    t0: float = settings.FIGURE_T0
    t1: float = settings.FIGURE_T1

    @field_validator('figure_id')
    @classmethod
    def validate_figure(cls, v):
        if v not in settings.FIGURE_RANGES:
            raise ValueError(f'Figure id must be between 1 and 6, got {v}')
        return v

    @field_validator('grid')
    @classmethod
    def validate_grid(cls, v):
        if any(n < 2 for n in v):
            raise ValueError(f'Grid needs at least 2 samples per axis, got {v[0]}x{v[1]}')
        return v

    @property
    def ranges(self) -> dict[str, tuple[float, float]]:
        return settings.FIGURE_RANGES[self.figure_id]

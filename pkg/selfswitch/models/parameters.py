"""
Pydantic parameter models.
Validation of the exact-solution families' parameters.
"""
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from selfswitch.services.validation import parse_complex, parse_list, parse_real

SQRT5 = math.sqrt(5.0)
# Critical feedback strength where the mutation family stops oscillating
H0 = (15.0 + SQRT5) / (5.0 + SQRT5)


class DarbouxParameters(BaseModel):
    """Lax data of a single dressing with μ = ν̄."""
    model_config = ConfigDict(frozen=True)

    nu: complex
    a: float
    chi0: tuple[complex, ...]

    @field_validator('nu', mode='before')
    @classmethod
    def parse_nu(cls, v):
        return parse_complex(v)

    @field_validator('nu')
    @classmethod
    def validate_nu(cls, v):
        if v.imag == 0.0:
            raise ValueError('nu must have a nonzero imaginary part (the dressing is trivial otherwise)')
        return v

    @field_validator('chi0', mode='before')
    @classmethod
    def parse_chi0(cls, v):
        if isinstance(v, str):
            v = parse_list(v)
        elif isinstance(v, np.ndarray):
            v = v.ravel().tolist()
        return tuple(parse_complex(c) for c in v)

    @field_validator('chi0')
    @classmethod
    def validate_chi0(cls, v):
        if not v:
            raise ValueError('chi0 must not be empty')
        if not any(c != 0 for c in v):
            raise ValueError('chi0 must have at least one nonzero component')
        return v

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.chi0, dtype=complex)


class MutationParams(BaseModel):
    """Three-level mutation family: feedback strength h, family parameter α, base level k."""
    model_config = ConfigDict(frozen=True)

    h: float
    alpha: float = 1.0
    k: int = 0

    @field_validator('h', 'alpha', mode='before')
    @classmethod
    def parse_reals(cls, v):
        return parse_real(v)

    @field_validator('k')
    @classmethod
    def validate_k(cls, v):
        if v < 0:
            raise ValueError(f'Base level k must be non-negative, got {v}')
        return v

    @property
    def omega0(self) -> float:
        return 1.0 - self.h * (5.0 + SQRT5) / (15.0 + SQRT5)

    @property
    def gamma(self) -> float:
        return 2.0 * self.h / (15.0 + SQRT5)

    @classmethod
    def critical(cls, alpha: float = 1.0, k: int = 0) -> 'MutationParams':
        """Parameters at h = h₀, where ω₀ = 0."""
        return cls(h=H0, alpha=alpha, k=k)


class MultiSpeciesConfig(BaseModel):
    """Two-species construction on the levels |k + nm − j, j⟩, n = 0, 1, 2, j = 0…l."""
    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    m: int
    k: int
    l: int
    alphas: tuple[complex, ...]
    betas: tuple[complex, ...]
    h: float

    @field_validator('a', 'b', 'h', mode='before')
    @classmethod
    def parse_reals(cls, v):
        return parse_real(v)

    @field_validator('alphas', 'betas', mode='before')
    @classmethod
    def parse_amplitudes(cls, v):
        if isinstance(v, (str, complex, float, int)):
            v = str(v).split(',') if isinstance(v, str) else [v]
        return tuple(parse_complex(c) for c in v)

    @field_validator('m')
    @classmethod
    def validate_m(cls, v):
        if v <= 0:
            raise ValueError(f'Level spacing m must be positive, got {v}')
        return v

    @field_validator('k', 'l')
    @classmethod
    def validate_levels(cls, v):
        if v < 0:
            raise ValueError(f'Level indices must be non-negative, got {v}')
        return v

    @model_validator(mode='after')
    def validate_window(self):
        if self.l > self.k:
            raise ValueError(f'Species count requires l <= k, got l={self.l}, k={self.k}')
        if len(self.alphas) != self.l + 1 or len(self.betas) != self.l + 1:
            raise ValueError(
                f'alphas and betas need {self.l + 1} entries, got {len(self.alphas)} and {len(self.betas)}'
            )
        if not any(abs(c) > 0.0 for c in self.alphas + self.betas):
            raise ValueError('At least one of alphas, betas must be nonzero')
        if self.a <= 0.0:
            raise ValueError(f'Seed positivity requires a > 0, got {self.a}')
        window = self.a ** 2 + 4.0 * self.b
        if not 0.0 < 4.0 * self.m ** 2 < window < self.a ** 2:
            raise ValueError(
                f'Positivity window 0 < 4m² < a²+4b < a² violated: 4m²={4 * self.m ** 2}, '
                f'a²+4b={window:.6g}, a²={self.a ** 2:.6g}'
            )
        return self

    @property
    def s(self) -> float:
        """√(a² + 4b)"""
        return math.sqrt(self.a ** 2 + 4.0 * self.b)

    @property
    def r(self) -> float:
        """√(a² + 4(b − m²))"""
        return math.sqrt(self.a ** 2 + 4.0 * (self.b - self.m ** 2))

    @property
    def dim(self) -> int:
        return 3 * (self.l + 1)

    @property
    def tuned_h(self) -> float:
        """Feedback strength that removes the oscillating factor."""
        return 1.0 / (1.0 - self.a)

    @property
    def is_tuned(self) -> bool:
        return math.isclose(self.h, self.tuned_h, rel_tol=1e-12, abs_tol=1e-15)

    @property
    def linear_scale(self) -> float:
        """a' = 1 + h(a − 1), the rate of the residual linear flow."""
        return 1.0 + self.h * (self.a - 1.0)

    @classmethod
    def worked_example(cls, t0: float = 0.0, t1: float = 0.0) -> 'MultiSpeciesConfig':
        """a = 5, b = −4, k = m = l = 1, tuned h = −1/4, α = 1/√2, β_j = e^{t_j/4}."""
        alpha = 1.0 / math.sqrt(2.0)
        return cls(
            a=5.0, b=-4.0, m=1, k=1, l=1,
            alphas=(alpha, alpha),
            betas=(math.exp(t0 / 4.0), math.exp(t1 / 4.0)),
            h=-0.25,
        )


class SwitchingProfile(BaseModel):
    """Switching-control times of the worked two-species example."""
    model_config = ConfigDict(frozen=True)

    t0: float = 0.0
    t1: float = 0.0

    @field_validator('t0', 't1', mode='before')
    @classmethod
    def parse_times(cls, v):
        return parse_real(v)

    def config(self) -> MultiSpeciesConfig:
        """The worked-example configuration with β_j = e^{t_j/4}."""
        return MultiSpeciesConfig.worked_example(self.t0, self.t1)


def profile_from_betas(cfg: MultiSpeciesConfig) -> Optional[SwitchingProfile]:
    """Recover (t0, t1) from real positive β_j = e^{t_j/4}; None when not of that form."""
    if cfg.l != 1 or any(b.imag != 0.0 or b.real <= 0.0 for b in cfg.betas):
        return None
    return SwitchingProfile(t0=4.0 * math.log(cfg.betas[0].real), t1=4.0 * math.log(cfg.betas[1].real))

"""
Continuous distribution families used as the hypothesized F0 and as data
generators in power studies.
"""
import logging
import math
from typing import Callable, Literal, Optional, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

Family = Literal["uniform", "exponential", "normal", "shifted-exponential"]

_REQUIRED = {
    "uniform": ("a", "b"),
    "exponential": ("rate",),
    "normal": ("mean", "variance"),
    "shifted-exponential": ("shift", "rate"),
}


class CdfModel(Protocol):
    """Anything with a vectorized cdf; continuous and strictly increasing where 0 < F < 1."""

    def cdf(self, x: np.ndarray) -> np.ndarray:
        ...


class DistributionSpec(BaseModel):
    """
    One of the parametric families of the power tables.

    Exponential families are parameterized by rate (cdf 1 - exp(-rate * x));
    the normal family by mean and variance.
    """
    model_config = ConfigDict(frozen=True)

    family: Family = Field(..., description="Distribution family.")
    a: Optional[float] = Field(None, description="Uniform lower bound.")
    b: Optional[float] = Field(None, description="Uniform upper bound.")
    rate: Optional[float] = Field(None, description="Exponential rate.")
    shift: Optional[float] = Field(None, description="Location shift of the shifted exponential.")
    mean: Optional[float] = Field(None, description="Normal mean.")
    variance: Optional[float] = Field(None, description="Normal variance.")

    @model_validator(mode="after")
    def _check_parameters(self) -> "DistributionSpec":
        missing = [name for name in _REQUIRED[self.family] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.family} needs parameter(s): {', '.join(missing)}")
        if self.family == "uniform" and not self.b > self.a:
            raise ValueError("uniform needs b > a")
        if self.family in ("exponential", "shifted-exponential") and not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.family == "normal" and not self.variance > 0:
            raise ValueError("variance must be positive")
        return self

    @classmethod
    def parse(cls, text: str) -> "DistributionSpec":
        """Parse ``family:key=value,...``, e.g. ``uniform:a=0,b=1``."""
        family, _, rest = text.strip().partition(":")
        params = {}
        try:
            for item in filter(None, (p.strip() for p in rest.split(","))):
                key, sep, value = item.partition("=")
                if not sep:
                    raise ValueError(f"expected key=value, got '{item}'")
                params[key.strip()] = float(value)
            return cls(family=family.strip().lower(), **params)
        except ValueError as e:
            raise InvalidArgumentError(f"invalid distribution spec '{text}': {e}") from e

    def frozen(self):
        """The matching frozen ``scipy.stats`` distribution."""
        if self.family == "uniform":
            return stats.uniform(loc=self.a, scale=self.b - self.a)
        if self.family == "exponential":
            return stats.expon(scale=1.0 / self.rate)
        if self.family == "shifted-exponential":
            return stats.expon(loc=self.shift, scale=1.0 / self.rate)
        return stats.norm(loc=self.mean, scale=math.sqrt(self.variance))

    def cdf(self, x) -> np.ndarray:
        return self.frozen().cdf(np.asarray(x, dtype=float))

    def describe(self) -> str:
        if self.family == "uniform":
            return f"Uni({self.a:g},{self.b:g})"
        if self.family == "exponential":
            return f"Exp({self.rate:g})"
        if self.family == "shifted-exponential":
            return f"{self.shift:g}+Exp({self.rate:g})"
        return f"N({self.mean:g},{self.variance:g})"


# The hypothesized cdf of the one-sample test uses the same families.
F0Spec = DistributionSpec


class CustomCdf:
    """Wraps a user-supplied cdf evaluator so it can stand in for F0Spec."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], name: str = "custom"):
        self._func = func
        self.name = name

    def cdf(self, x) -> np.ndarray:
        return np.clip(np.asarray(self._func(np.asarray(x, dtype=float)), dtype=float), 0.0, 1.0)

    def describe(self) -> str:
        return self.name

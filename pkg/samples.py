"""
Sample containers, empirical distribution functions and the pooled-sample
grid shared by every statistic.
"""
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

POOLED_CDF_TOLERANCE = 1e-12


# --- Domain Models ---

class Sample(BaseModel):
    """
    One group of real observations, stored sorted ascending.
    """
    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...] = Field(..., description="Finite observations, sorted ascending after construction.")
    label: str = Field("sample", description="Group identifier.")

    @field_validator("values", mode="before")
    @classmethod
    def _sorted_finite(cls, values: Iterable[float]) -> Tuple[float, ...]:
        arr = np.asarray(list(values), dtype=float)
        if arr.size == 0:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        return tuple(np.sort(arr).tolist())

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.values, dtype=float)
        arr.setflags(write=False)
        return arr


class GroupedSamples(BaseModel):
    """
    k ordered groups; group position is the hypothesis order
    (group 1 is hypothesized stochastically largest).
    """
    model_config = ConfigDict(frozen=True)

    groups: Tuple[Sample, ...] = Field(..., description="Groups in hypothesis order.")

    @model_validator(mode="after")
    def _at_least_two_groups(self) -> "GroupedSamples":
        if len(self.groups) < 2:
            raise ValueError(f"at least 2 groups are required, got {len(self.groups)}")
        return self

    @classmethod
    def from_mapping(
        cls,
        data: Dict[str, Sequence[float]],
        order: Optional[Sequence[str]] = None,
    ) -> "GroupedSamples":
        """Build from a label -> values mapping, optionally reordered by label."""
        labels = list(order) if order is not None else list(data.keys())
        return cls(groups=tuple(Sample(values=data[label], label=label) for label in labels))

    @classmethod
    def from_arrays(cls, arrays: Sequence[Sequence[float]]) -> "GroupedSamples":
        return cls(groups=tuple(Sample(values=a, label=f"g{j + 1}") for j, a in enumerate(arrays)))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(g.n for g in self.groups)

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def weights(self) -> Tuple[float, ...]:
        n = self.n
        return tuple(size / n for size in self.sizes)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(g.label for g in self.groups)

    def arrays(self) -> List[np.ndarray]:
        return [g.array for g in self.groups]


class PooledGrid(BaseModel):
    """
    Distinct pooled values with multiplicities, per-group ecdf values
    (one column per group) and the pooled ecdf at every point.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: np.ndarray = Field(..., description="Sorted distinct pooled values.")
    multiplicities: np.ndarray = Field(..., description="Pooled observation count at each point.")
    phat: np.ndarray = Field(..., description="Group ecdf values, shape (points, k).")
    pooled_cdf: np.ndarray = Field(..., description="Pooled ecdf at each point.")
    weights: Tuple[float, ...] = Field(..., description="Group proportions n_j/n.")
    sizes: Tuple[int, ...] = Field(..., description="Group sizes n_j.")
    tie_count: int = Field(0, description="Number of points with multiplicity above one.")

    @property
    def n(self) -> int:
        return int(sum(self.sizes))


# --- Operations ---

def ecdf_eval(sample: Sample, x: float) -> float:
    """Right-continuous empirical cdf: #{X_i <= x} / n."""
    return float(np.searchsorted(sample.array, x, side="right")) / sample.n


def grid_arrays(arrays: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Array-level pooled grid used by the Monte Carlo loops.

    Every array must already be sorted ascending. Returns the distinct
    pooled points, their multiplicities and the (points, k) matrix of
    group ecdf values.
    """
    pooled = np.concatenate(arrays)
    points, counts = np.unique(pooled, return_counts=True)
    phat = np.empty((points.size, len(arrays)), dtype=float)
    for j, arr in enumerate(arrays):
        phat[:, j] = np.searchsorted(arr, points, side="right") / arr.size
    return points, counts, phat


def build_pooled_grid(data: GroupedSamples) -> PooledGrid:
    points, counts, phat = grid_arrays(data.arrays())
    weights = np.asarray(data.weights)
    pooled_cdf = np.cumsum(counts) / data.n

    mixed = phat @ weights
    if np.max(np.abs(mixed - pooled_cdf)) > POOLED_CDF_TOLERANCE:
        raise AssertionError("pooled ecdf differs from the weighted group ecdfs")

    tie_count = int(np.count_nonzero(counts > 1))
    if tie_count:
        logger.warning(f"{tie_count} pooled value(s) are tied; statistics use multiplicity weights")

    for arr in (points, counts, phat, pooled_cdf):
        arr.setflags(write=False)
    return PooledGrid(
        points=points,
        multiplicities=counts,
        phat=phat,
        pooled_cdf=pooled_cdf,
        weights=data.weights,
        sizes=data.sizes,
        tie_count=tie_count,
    )

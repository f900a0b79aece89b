"""
Power-study harness: simulate data from configured distributions, apply
T_n and S_n at fixed critical values and report rejection rates.
"""
import logging
import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import DEFAULT_CHUNK_SIZE, DEFAULT_WORKERS
from distributions import DistributionSpec
from el_statistics import tn_from_arrays
from exceptions import InvalidArgumentError
from isotone import ConeProjector, OrderSpec
from samples import Sample
from sequential_ks import stage_statistics
from utils.rng import replication_stream
from utils.workers import run_replications

logger = logging.getLogger(__name__)

TestName = Literal["Tn", "Sn"]


class Scenario(BaseModel):
    """One row of a power table."""
    model_config = ConfigDict(frozen=True)

    name: str = Field("", description="Free-form label for reports.")
    k: int = Field(..., ge=2, description="Number of groups.")
    n_vec: Tuple[int, ...] = Field(..., description="Group sizes.")
    distributions: Tuple[DistributionSpec, ...] = Field(..., description="Data-generating distribution per group.")
    reps: int = Field(10_000, ge=1, description="Monte Carlo replications.")
    alpha: float = Field(0.05, gt=0, lt=1, description="Nominal level.")
    order: OrderSpec = Field(..., description="Hypothesized ordering.")
    tests: Tuple[TestName, ...] = Field(("Tn", "Sn"), description="Tests to run.")
    seed: int = Field(0, ge=0, description="Master seed.")
    crit_tn: Optional[float] = Field(None, description="T_n critical value; looked up or simulated when absent.")
    crit_sn: Optional[float] = Field(None, description="S_n critical value; asymptotic when absent.")

    @model_validator(mode="before")
    @classmethod
    def _resolve_order(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        k = data.get("k")
        order = data.get("order", "simple")
        if isinstance(order, str) and k is not None:
            data["order"] = OrderSpec.parse(order, int(k))
        elif isinstance(order, dict) and "k" not in order and k is not None:
            data["order"] = {**order, "k": k}
        return data

    @field_validator("n_vec")
    @classmethod
    def _positive_sizes(cls, sizes: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(s < 1 for s in sizes):
            raise ValueError("group sizes must be positive")
        return sizes

    @model_validator(mode="after")
    def _consistent_lengths(self) -> "Scenario":
        if len(self.n_vec) != self.k:
            raise ValueError(f"n_vec has {len(self.n_vec)} entries but k={self.k}")
        if len(self.distributions) != self.k:
            raise ValueError(f"distributions has {len(self.distributions)} entries but k={self.k}")
        if self.order.k != self.k:
            raise ValueError(f"order has k={self.order.k} but k={self.k}")
        if not self.tests:
            raise ValueError("at least one test must be selected")
        if "Sn" in self.tests and self.order.kind != "simple":
            raise ValueError("the sequential test Sn is defined for the simple order only")
        return self

    def describe(self) -> str:
        if self.name:
            return self.name
        return " vs ".join(d.describe() for d in self.distributions) + f", n={list(self.n_vec)}"


class PowerConfig(BaseModel):
    """Contents of a power-study configuration file."""
    model_config = ConfigDict(frozen=True)

    scenarios: Tuple[Scenario, ...] = Field(..., min_length=1, description="Scenarios to run, in order.")
    crit_reps: int = Field(10_000, ge=1, description="Replications when a T_n critical value must be simulated.")


class PowerResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: str = Field(..., description="Scenario label.")
    reps: int = Field(..., description="Replications used.")
    rejections: Dict[str, int] = Field(..., description="Rejection count per test.")
    rates: Dict[str, float] = Field(..., description="Rejection rate per test, rejections / reps.")
    standard_errors: Dict[str, float] = Field(..., description="Binomial standard error per rate.")
    critical_values: Dict[str, float] = Field(..., description="Critical value used per test.")
    alpha: float = Field(..., description="Nominal level.")
    seed: int = Field(..., description="Master seed.")


# --- Data generation ---

def draw_values(spec: DistributionSpec, n: int, stream) -> np.ndarray:
    """
    n iid draws: uniforms by scaling, exponentials by inverse cdf
    -log(1 - U) / rate, normals from the stream's standard Gaussian.
    """
    if spec.family == "uniform":
        return spec.a + (spec.b - spec.a) * np.asarray(stream.random(n), dtype=float)
    if spec.family in ("exponential", "shifted-exponential"):
        values = -np.log1p(-np.asarray(stream.random(n), dtype=float)) / spec.rate
        return values + spec.shift if spec.family == "shifted-exponential" else values
    return spec.mean + math.sqrt(spec.variance) * np.asarray(stream.standard_normal(n), dtype=float)


def sample_distribution(spec: DistributionSpec, n: int, stream) -> Sample:
    return Sample(values=draw_values(spec, n, stream), label=spec.describe())


def _power_task(start: int, stop: int, scenario: Scenario) -> np.ndarray:
    n = sum(scenario.n_vec)
    projector = ConeProjector(scenario.order, [s / n for s in scenario.n_vec])
    run_tn = "Tn" in scenario.tests
    run_sn = "Sn" in scenario.tests
    out = np.full((stop - start, 2), np.nan)
    for i in range(start, stop):
        rng = replication_stream(scenario.seed, i)
        arrays = [np.sort(draw_values(spec, size, rng)) for spec, size in zip(scenario.distributions, scenario.n_vec)]
        if run_tn:
            out[i - start, 0] = tn_from_arrays(arrays, projector)
        if run_sn:
            out[i - start, 1] = stage_statistics(arrays).max()
    return out


def simulate_statistics(
    sc: Scenario,
    workers: int = DEFAULT_WORKERS,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    """(reps, 2) matrix of T_n and S_n values (NaN for tests not requested)."""
    logger.info(f"Power scenario '{sc.describe()}': reps={sc.reps}, seed={sc.seed}, tests={list(sc.tests)}")
    return run_replications(_power_task, sc.reps, workers, chunk_size, scenario=sc)


def rejection_summary(
    sc: Scenario,
    statistics: np.ndarray,
    crit_Tn: Optional[float],
    crit_Sn: Optional[float],
) -> PowerResult:
    """Rejections are counted when a statistic exceeds its critical value."""
    columns = {"Tn": (0, crit_Tn), "Sn": (1, crit_Sn)}
    rejections: Dict[str, int] = {}
    rates: Dict[str, float] = {}
    errors: Dict[str, float] = {}
    crits: Dict[str, float] = {}
    for test in sc.tests:
        column, crit = columns[test]
        if crit is None:
            raise InvalidArgumentError(f"a critical value for {test} is required")
        count = int(np.count_nonzero(statistics[:, column] > crit))
        rate = count / sc.reps
        rejections[test] = count
        rates[test] = rate
        errors[test] = math.sqrt(rate * (1.0 - rate) / sc.reps)
        crits[test] = float(crit)
    return PowerResult(
        scenario=sc.describe(),
        reps=sc.reps,
        rejections=rejections,
        rates=rates,
        standard_errors=errors,
        critical_values=crits,
        alpha=sc.alpha,
        seed=sc.seed,
    )


def run_power(
    sc: Scenario,
    crit_Tn: Optional[float],
    crit_Sn: Optional[float],
    workers: int = DEFAULT_WORKERS,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> PowerResult:
    """Monte Carlo rejection rates of the requested tests at the given critical values."""
    for test, crit in (("Tn", crit_Tn), ("Sn", crit_Sn)):
        if test in sc.tests and crit is None:
            raise InvalidArgumentError(f"a critical value for {test} is required")
    statistics = simulate_statistics(sc, workers=workers, chunk_size=chunk_size)
    result = rejection_summary(sc, statistics, crit_Tn, crit_Sn)
    logger.info(f"Power scenario '{result.scenario}': rates={result.rates}")
    return result


def power_rows(results: List[PowerResult]) -> List[Dict[str, Any]]:
    """Flatten results into one machine-readable row per scenario."""
    rows = []
    for result in results:
        row: Dict[str, Any] = {"scenario": result.scenario, "reps": result.reps, "alpha": result.alpha, "seed": result.seed}
        for test, rate in result.rates.items():
            row[f"{test}_rate"] = rate
            row[f"{test}_se"] = result.standard_errors[test]
            row[f"{test}_crit"] = result.critical_values[test]
        rows.append(row)
    return rows

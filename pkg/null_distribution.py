"""
Monte Carlo null distributions for T_n: the finite-sample recipe (standard
normal data), direct simulation of the Brownian-bridge limits, quantiles,
p-values and the plain-text format used for caching.
"""
import logging
import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import DEFAULT_CHUNK_SIZE, DEFAULT_LIMIT_GRID, DEFAULT_WORKERS
from el_statistics import EcdfSide, tn_from_arrays, tn_from_uniforms, tn_star_from_uniforms
from exceptions import CacheError, InvalidArgumentError
from isotone import ConeProjector, OrderSpec
from utils.rng import replication_stream
from utils.workers import run_replications

logger = logging.getLogger(__name__)

NullMethod = Literal["finite-sample", "finite-one-sample", "limit-one-sample", "limit-k"]

# Simple-order critical points of T_n tabulated from 100 000 normal data sets
# with 100 observations per group; keyed by (k, alpha).
PUBLISHED_CRITICAL_VALUES: Dict[Tuple[int, float], float] = {
    (2, 0.01): 3.185, (2, 0.05): 1.821, (2, 0.10): 1.288,
    (3, 0.01): 4.128, (3, 0.05): 2.613, (3, 0.10): 1.943,
    (4, 0.01): 4.663, (4, 0.05): 3.107, (4, 0.10): 2.404,
    (5, 0.01): 5.144, (5, 0.05): 3.470, (5, 0.10): 2.701,
}


class NullDistribution(BaseModel):
    """Sorted Monte Carlo draws of a statistic under H0, with the provenance needed to regenerate them."""
    model_config = ConfigDict(frozen=True)

    draws: Tuple[float, ...] = Field(..., description="Statistic values, sorted ascending.")
    method: NullMethod = Field(..., description="How the draws were produced.")
    k: int = Field(..., ge=1, description="Number of groups (1 for one-sample methods).")
    weights: Tuple[float, ...] = Field((1.0,), description="Group proportions.")
    sizes: Tuple[int, ...] = Field((), description="Group sizes (finite-sample methods).")
    order: str = Field("simple", description="Order description (k-sample methods).")
    statistic: str = Field("Tn", description="Which statistic was simulated.")
    reps: int = Field(..., ge=1, description="Number of replications.")
    grid_size: Optional[int] = Field(None, description="Grid size m (limit methods).")
    master_seed: int = Field(..., ge=0, description="Master seed of the replication streams.")

    @model_validator(mode="after")
    def _check_draws(self) -> "NullDistribution":
        draws = np.asarray(self.draws)
        if draws.size != self.reps:
            raise ValueError(f"reps={self.reps} but {draws.size} draws were given")
        if np.any(np.diff(draws) < 0):
            raise ValueError("draws must be sorted ascending")
        if np.any(draws < 0):
            raise ValueError("draws must be non-negative")
        return self

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.draws, dtype=float)

    def provenance(self) -> Dict[str, object]:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "k": self.k,
            "weights": list(self.weights),
            "sizes": list(self.sizes),
            "order": self.order,
            "reps": self.reps,
            "grid": self.grid_size,
            "seed": self.master_seed,
        }

    # --- text format ---

    def to_text(self) -> str:
        header = [
            f"method={self.method}",
            f"statistic={self.statistic}",
            f"k={self.k}",
            "weights=" + ",".join(repr(float(w)) for w in self.weights),
            "sizes=" + ",".join(str(s) for s in self.sizes),
            f"order={self.order}",
            f"reps={self.reps}",
            f"seed={self.master_seed}",
            f"grid={self.grid_size if self.grid_size is not None else 'none'}",
        ]
        body = [repr(float(d)) for d in self.draws]
        return "\n".join(header + body) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NullDistribution":
        header: Dict[str, str] = {}
        draws: List[float] = []
        try:
            for line in text.splitlines():
                line = line.strip()
                if not line:
                    continue
                if "=" in line:
                    key, _, value = line.partition("=")
                    header[key.strip()] = value.strip()
                else:
                    draws.append(float(line))
            grid = header.get("grid", "none")
            return cls(
                draws=tuple(draws),
                method=header["method"],
                statistic=header.get("statistic", "Tn"),
                k=int(header["k"]),
                weights=tuple(float(w) for w in header.get("weights", "1.0").split(",") if w),
                sizes=tuple(int(s) for s in header.get("sizes", "").split(",") if s),
                order=header.get("order", "simple"),
                reps=int(header["reps"]),
                grid_size=None if grid == "none" else int(grid),
                master_seed=int(header["seed"]),
            )
        except (KeyError, ValueError) as e:
            raise CacheError(f"unreadable null distribution: {e}") from e


def _sorted_distribution(draws: np.ndarray, **provenance) -> NullDistribution:
    return NullDistribution(draws=tuple(np.sort(draws).tolist()), reps=int(draws.size), **provenance)


# --- Finite-sample recipe ---

def _finite_k_task(start: int, stop: int, sizes: Tuple[int, ...], order: OrderSpec, seed: int) -> np.ndarray:
    n = sum(sizes)
    projector = ConeProjector(order, [s / n for s in sizes])
    out = np.empty(stop - start)
    for i in range(start, stop):
        rng = replication_stream(seed, i)
        arrays = [np.sort(rng.standard_normal(size)) for size in sizes]
        out[i - start] = tn_from_arrays(arrays, projector)
    return out


def simulate_null_finite(
    k: int,
    n_per_group: Sequence[int],
    order: Optional[OrderSpec] = None,
    reps: int = 10_000,
    seed: int = 0,
    workers: int = DEFAULT_WORKERS,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NullDistribution:
    """
    Null distribution of the k-sample T_n from ``reps`` data sets of
    independent N(0, 1) groups with the given sizes.
    """
    sizes = tuple(int(s) for s in n_per_group)
    if len(sizes) != k or k < 2:
        raise InvalidArgumentError(f"need k >= 2 group sizes, got k={k} and sizes {sizes}")
    if any(s < 1 for s in sizes):
        raise InvalidArgumentError("group sizes must be positive")
    order = order or OrderSpec.simple(k)
    if order.k != k:
        raise InvalidArgumentError(f"order has k={order.k} but k={k}")
    logger.info(f"Simulating finite-sample null: k={k}, sizes={sizes}, order={order.describe()}, reps={reps}, seed={seed}")
    draws = run_replications(_finite_k_task, reps, workers, chunk_size, sizes=sizes, order=order, seed=seed)
    n = sum(sizes)
    return _sorted_distribution(
        draws,
        method="finite-sample",
        k=k,
        weights=tuple(s / n for s in sizes),
        sizes=sizes,
        order=order.describe(),
        grid_size=None,
        master_seed=seed,
    )


def _finite_one_task(
    start: int,
    stop: int,
    n: int,
    seed: int,
    star: bool,
    ordered: bool,
    ecdf_side: EcdfSide,
) -> np.ndarray:
    out = np.empty(stop - start)
    for i in range(start, stop):
        u = np.sort(replication_stream(seed, i).random(n))
        if star:
            out[i - start] = tn_star_from_uniforms(u, ordered=ordered, ecdf_side=ecdf_side)
        else:
            out[i - start] = tn_from_uniforms(u, ordered=ordered)
    return out


def one_sample_statistic_name(star: bool, ordered: bool, ecdf_side: EcdfSide = "right") -> str:
    name = "Tn*" if star else "Tn"
    if star and ecdf_side == "left":
        name += "(left)"
    if not ordered:
        name += "-unrestricted"
    return name


def simulate_null_finite_one(
    n: int,
    reps: int = 10_000,
    seed: int = 0,
    star: bool = False,
    ordered: bool = True,
    ecdf_side: EcdfSide = "right",
    workers: int = DEFAULT_WORKERS,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NullDistribution:
    """
    Null distribution of the one-sample statistic at sample size ``n``.
    The statistic is distribution free for continuous F0, so U(0, 1) data
    are tested against F0 = U(0, 1).
    """
    if n < 1:
        raise InvalidArgumentError(f"sample size must be positive, got {n}")
    logger.info(f"Simulating one-sample finite null: n={n}, reps={reps}, seed={seed}")
    draws = run_replications(
        _finite_one_task, reps, workers, chunk_size,
        n=n, seed=seed, star=star, ordered=ordered, ecdf_side=ecdf_side,
    )
    return _sorted_distribution(
        draws,
        method="finite-one-sample",
        statistic=one_sample_statistic_name(star, ordered, ecdf_side),
        k=1,
        weights=(1.0,),
        sizes=(n,),
        order="none",
        grid_size=None,
        master_seed=seed,
    )


# --- Brownian-bridge limits ---

def bridge_from_increments(increments: np.ndarray) -> np.ndarray:
    """
    Standard Brownian bridge at t_i = i/m, i = 1..m-1, from m independent
    N(0, 1) increments along the last axis: B(t) = W(t) - t W(1).
    """
    m = increments.shape[-1]
    walk = np.cumsum(increments, axis=-1) / math.sqrt(m)
    t = np.arange(1, m) / m
    return walk[..., :-1] - t * walk[..., -1:]


def limit_one_functional(bridge: np.ndarray, ordered: bool = True) -> np.ndarray:
    """(1/m) sum_i B(t_i)^2 I(B(t_i) >= 0) / (t_i (1 - t_i)) over the last axis."""
    m = bridge.shape[-1] + 1
    t = np.arange(1, m) / m
    squared = bridge ** 2
    if ordered:
        squared = np.where(bridge >= 0, squared, 0.0)
    return np.sum(squared / (t * (1 - t)), axis=-1) / m


def limit_k_functional(bridges: np.ndarray, projector: ConeProjector) -> float:
    """
    (1/m) sum_t sum_j w_j (E_w[B(t) | I]_j - Bbar(t))^2 / (t (1 - t)) for
    bridges of shape (k, m - 1), with B_j scaled by 1/sqrt(w_j).
    """
    w = projector.weights
    m = bridges.shape[-1] + 1
    t = np.arange(1, m) / m
    scaled = bridges.T / np.sqrt(w)
    bbar = scaled @ w
    fitted = projector.project(scaled)
    spread = ((fitted - bbar[:, None]) ** 2) @ w
    return float(np.sum(spread / (t * (1 - t))) / m)


def _limit_one_task(start: int, stop: int, grid: int, seed: int, ordered: bool) -> np.ndarray:
    out = np.empty(stop - start)
    for i in range(start, stop):
        bridge = bridge_from_increments(replication_stream(seed, i).standard_normal(grid))
        out[i - start] = limit_one_functional(bridge, ordered=ordered)
    return out


def simulate_limit_one(
    reps: int = 10_000,
    grid_size: int = DEFAULT_LIMIT_GRID,
    seed: int = 0,
    ordered: bool = True,
    workers: int = DEFAULT_WORKERS,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NullDistribution:
    """Draws of the one-sample limit functional of a standard Brownian bridge on an m-point grid."""
    if grid_size < 2:
        raise InvalidArgumentError(f"grid size must be at least 2, got {grid_size}")
    logger.info(f"Simulating one-sample limit: m={grid_size}, reps={reps}, seed={seed}")
    draws = run_replications(_limit_one_task, reps, workers, chunk_size, grid=grid_size, seed=seed, ordered=ordered)
    return _sorted_distribution(
        draws,
        method="limit-one-sample",
        statistic="Tn" if ordered else "Tn-unrestricted",
        k=1,
        weights=(1.0,),
        order="none",
        grid_size=grid_size,
        master_seed=seed,
    )


def _limit_k_task(
    start: int,
    stop: int,
    weights: Tuple[float, ...],
    order: OrderSpec,
    grid: int,
    seed: int,
) -> np.ndarray:
    projector = ConeProjector(order, weights)
    out = np.empty(stop - start)
    for i in range(start, stop):
        increments = replication_stream(seed, i).standard_normal((len(weights), grid))
        out[i - start] = limit_k_functional(bridge_from_increments(increments), projector)
    return out


def simulate_limit_k(
    weights: Sequence[float],
    order: Optional[OrderSpec] = None,
    reps: int = 10_000,
    grid_size: int = DEFAULT_LIMIT_GRID,
    seed: int = 0,
    workers: int = DEFAULT_WORKERS,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> NullDistribution:
    """Draws of the k-sample limit functional built from k independent Brownian bridges."""
    w = tuple(float(x) for x in weights)
    if len(w) < 2 or any(x <= 0 for x in w):
        raise InvalidArgumentError("need at least two positive weights")
    if abs(sum(w) - 1.0) > 1e-9:
        raise InvalidArgumentError(f"weights must sum to 1, got {sum(w)}")
    if grid_size < 2:
        raise InvalidArgumentError(f"grid size must be at least 2, got {grid_size}")
    order = order or OrderSpec.simple(len(w))
    if order.k != len(w):
        raise InvalidArgumentError(f"order has k={order.k} but {len(w)} weights were given")
    logger.info(f"Simulating k-sample limit: weights={w}, order={order.describe()}, m={grid_size}, reps={reps}, seed={seed}")
    draws = run_replications(_limit_k_task, reps, workers, chunk_size, weights=w, order=order, grid=grid_size, seed=seed)
    return _sorted_distribution(
        draws,
        method="limit-k",
        k=len(w),
        weights=w,
        order=order.describe(),
        grid_size=grid_size,
        master_seed=seed,
    )


# --- Quantiles and p-values ---

def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")


def critical_value(dist: NullDistribution, alpha: float) -> float:
    """The ceil((1 - alpha) * reps)-th smallest draw (1-based), no interpolation."""
    _check_alpha(alpha)
    # rounding keeps e.g. 0.7 * 10 from landing just above 7
    index = max(1, math.ceil(round((1.0 - alpha) * dist.reps, 9)))
    return dist.draws[index - 1]


def p_value(dist: NullDistribution, observed: float) -> float:
    """(1 + #{draws >= observed}) / (reps + 1)."""
    at_least = dist.reps - int(np.searchsorted(dist.array, observed, side="left"))
    return (1 + at_least) / (dist.reps + 1)


def published_critical_value(k: int, alpha: float) -> Optional[float]:
    """Tabulated simple-order critical point for (k, alpha), if there is one."""
    for (table_k, table_alpha), value in PUBLISHED_CRITICAL_VALUES.items():
        if table_k == k and math.isclose(table_alpha, alpha, abs_tol=1e-12):
            return value
    return None

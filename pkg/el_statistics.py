"""
Localized empirical-likelihood statistics and their integrated versions.

One-sample: H0 F = F0 against F stochastically larger than F0.
k-sample:   H0 F_1 = ... = F_k against the cone of an OrderSpec; for the
            simple chain, F_1(x) <= ... <= F_k(x) (group 1 largest).

Every "-2 log R" quantity skips a term whose coefficient is zero, which is
the "term raised to a zero power is 1" convention, so no 0 * log(0) NaNs
arise.
"""
import logging
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import xlogy

from distributions import CdfModel
from exceptions import DomainError, InvalidArgumentError
from isotone import ConeProjector, OrderSpec, project_cone
from samples import GroupedSamples, Sample, grid_arrays

logger = logging.getLogger(__name__)

EcdfSide = Literal["right", "left"]


class KSampleLocalInput(BaseModel):
    """Group ecdf values at one point x, with the group proportions and sizes."""
    model_config = ConfigDict(frozen=True)

    phat: Tuple[float, ...] = Field(..., description="Group ecdf values at x, each in [0, 1].")
    weights: Tuple[float, ...] = Field(..., description="Group proportions w_j = n_j/n.")
    sizes: Tuple[int, ...] = Field(..., description="Group sizes n_j.")

    @model_validator(mode="after")
    def _check(self) -> "KSampleLocalInput":
        if not len(self.phat) == len(self.weights) == len(self.sizes):
            raise ValueError("phat, weights and sizes must have the same length")
        if any(not 0.0 <= p <= 1.0 for p in self.phat):
            raise ValueError("ecdf values must lie in [0, 1]")
        if any(w <= 0 for w in self.weights) or any(s <= 0 for s in self.sizes):
            raise ValueError("weights and sizes must be positive")
        return self


# --- One-sample ---

def local_neg2logR_one(phat: float, f0: float, n: int, ordered: bool = True) -> float:
    """
    -2 log R(x) for H0: F(x) = F0(x) against F(x) < F0(x).

    With ``ordered=False`` the indicator is dropped, giving the statistic
    for the two-sided local alternative.
    """
    if not 0.0 < f0 < 1.0:
        raise DomainError(f"F0(x) must lie in (0, 1), got {f0}")
    if not 0.0 <= phat <= 1.0:
        raise InvalidArgumentError(f"ecdf value must lie in [0, 1], got {phat}")
    if n < 1:
        raise InvalidArgumentError(f"sample size must be positive, got {n}")
    if ordered and phat > f0:
        return 0.0
    value = 2.0 * n * (xlogy(phat, phat / f0) + xlogy(1.0 - phat, (1.0 - phat) / (1.0 - f0)))
    return max(float(value), 0.0)


def _local_one_array(phat: np.ndarray, f0: np.ndarray, n: int, ordered: bool) -> np.ndarray:
    # points where F0 is 0 or 1 contribute nothing
    inside = (f0 > 0.0) & (f0 < 1.0)
    safe_f0 = np.where(inside, f0, 0.5)
    value = 2.0 * n * (xlogy(phat, phat / safe_f0) + xlogy(1.0 - phat, (1.0 - phat) / (1.0 - safe_f0)))
    keep = inside if not ordered else inside & (phat <= f0)
    return np.where(keep, np.maximum(value, 0.0), 0.0)


def _entropy_antiderivative(u: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    """
    Antiderivative in u of 2n[p log(p/u) + (1-p) log((1-p)/(1-u))] with the
    ecdf value p held fixed.
    """
    a = xlogy(u, u) - u
    c = -xlogy(1.0 - u, 1.0 - u) - u
    return 2.0 * n * ((xlogy(p, p) + xlogy(1.0 - p, 1.0 - p)) * u - p * a - (1.0 - p) * c)


def tn_from_uniforms(u: np.ndarray, ordered: bool = True) -> float:
    """
    T_n given the sorted values u_i = F0(X_(i)).

    Integration runs over [X_(1), X_(n)] only. Between consecutive order
    statistics the ecdf is i/n; with ``ordered`` each piece is cut to u >= i/n.
    """
    n = u.size
    if n < 2:
        return 0.0
    p = np.arange(1, n) / n
    lo = np.maximum(u[:-1], p) if ordered else u[:-1]
    hi = u[1:]
    live = hi > lo
    if not live.any():
        return 0.0
    p, lo, hi = p[live], lo[live], hi[live]
    total = np.sum(_entropy_antiderivative(hi, p, n) - _entropy_antiderivative(lo, p, n))
    return max(float(total), 0.0)


def tn_star_from_uniforms(u: np.ndarray, ordered: bool = True, ecdf_side: EcdfSide = "right") -> float:
    n = u.size
    if ecdf_side == "right":
        phat = np.searchsorted(u, u, side="right") / n
    elif ecdf_side == "left":
        phat = np.searchsorted(u, u, side="left") / n
    else:
        raise InvalidArgumentError(f"ecdf_side must be 'right' or 'left', got {ecdf_side!r}")
    return float(np.mean(_local_one_array(phat, u, n, ordered)))


def one_sample_Tn(sample: Sample, f0: CdfModel, ordered: bool = True) -> float:
    """T_n = -2 * integral of log R(x) dF0(x), evaluated in closed form."""
    u = np.asarray(f0.cdf(sample.array), dtype=float)
    return tn_from_uniforms(u, ordered=ordered)


def one_sample_Tn_star(
    sample: Sample,
    f0: CdfModel,
    ordered: bool = True,
    ecdf_side: EcdfSide = "right",
) -> float:
    """
    T_n* = -2 * integral of log R(x) dFhat(x): the average of the local
    statistic over the data points. ``ecdf_side="left"`` evaluates the ecdf
    just before each jump instead of at it.
    """
    u = np.asarray(f0.cdf(sample.array), dtype=float)
    return tn_star_from_uniforms(u, ordered=ordered, ecdf_side=ecdf_side)


# --- k-sample ---

def _local_from_fitted(
    phat: np.ndarray,
    fitted: np.ndarray,
    weights: np.ndarray,
    sizes: np.ndarray,
) -> np.ndarray:
    """Rowwise 2 sum_j n_j [phat_j log(F~_j/F^) + (1-phat_j) log((1-F~_j)/(1-F^))]."""
    phat = np.atleast_2d(phat)
    fitted = np.clip(np.atleast_2d(fitted), 0.0, 1.0)
    degenerate = np.all(phat == 0.0, axis=1) | np.all(phat == 1.0, axis=1)
    pooled = (phat @ weights)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        first = xlogy(phat, fitted / pooled)
        second = xlogy(1.0 - phat, (1.0 - fitted) / (1.0 - pooled))
        local = 2.0 * ((first + second) @ sizes)
    return np.where(degenerate, 0.0, np.maximum(local, 0.0))


def local_neg2logR_k(data: KSampleLocalInput, order: OrderSpec) -> float:
    """-2 log R(x) for equality of the k cdf values at x against the cone of ``order``."""
    phat = np.asarray(data.phat, dtype=float)
    if order.k != phat.size:
        raise InvalidArgumentError(f"order has k={order.k} but {phat.size} groups were given")
    weights = np.asarray(data.weights, dtype=float)
    fitted = np.asarray(project_cone(phat, weights, order).fitted)
    return float(_local_from_fitted(phat, fitted, weights, np.asarray(data.sizes, dtype=float))[0])


def tn_from_arrays(arrays: Sequence[np.ndarray], projector: ConeProjector) -> float:
    """
    k-sample T_n from sorted group arrays; the projector's weights must be
    the group proportions.
    """
    sizes = np.array([a.size for a in arrays], dtype=float)
    n = sizes.sum()
    _, counts, phat = grid_arrays(arrays)
    local = _local_from_fitted(phat, projector.project(phat), projector.weights, sizes)
    return float(np.dot(counts, local) / n)


def k_sample_Tn(
    data: GroupedSamples,
    order: OrderSpec,
    projector: Optional[ConeProjector] = None,
) -> float:
    """
    T_n = -2 * integral of log R(x) dFhat(x): the local statistic at each
    distinct pooled point, weighted by multiplicity / n.
    """
    if order.k != data.k:
        raise InvalidArgumentError(f"order has k={order.k} but data has {data.k} groups")
    if projector is None:
        projector = ConeProjector(order, data.weights)
    return tn_from_arrays(data.arrays(), projector)

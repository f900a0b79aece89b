"""
Weighted least-squares projection onto the isotonic cone of a quasi-order.

Three entry points share one notion of order:

- ``pava``: pool-adjacent-violators for the simple chain z_1 <= ... <= z_k.
- ``project_cone``: any quasi-order; chain inputs go to ``pava``, everything
  else to the minimum-lower-sets algorithm.
- ``ConeProjector``: projects many vectors at once with fixed weights using
  the max-min representation over upper and lower sets. Used by the
  statistics and the Monte Carlo loops.

Indices in ``OrderSpec`` are 1-based (as written in hypotheses); every array
index and every block returned here is 0-based.
"""
import logging
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-12
MAX_LOWER_SETS = 200_000

OrderKind = Literal["simple", "tree", "umbrella", "general", "unrestricted"]


# --- Order specification ---

class OrderSpec(BaseModel):
    """
    A hypothesized ordering of k components.

    A pair (i, j) in ``relation`` means component i <= component j.
    """
    model_config = ConfigDict(frozen=True)

    kind: OrderKind = Field("simple", description="Ordering family.")
    k: int = Field(..., ge=1, description="Number of components.")
    root: Optional[int] = Field(None, description="Tree root (1-based); z_root <= z_i for i != root.")
    peak: Optional[int] = Field(None, description="Umbrella peak (1-based).")
    relation: Tuple[Tuple[int, int], ...] = Field((), description="General relation pairs (i, j): z_i <= z_j.")

    @model_validator(mode="after")
    def _check_indices(self) -> "OrderSpec":
        if self.kind == "tree":
            if self.root is None or not 1 <= self.root <= self.k:
                raise ValueError(f"tree order needs root in 1..{self.k}")
        if self.kind == "umbrella":
            if self.peak is None or not 1 <= self.peak <= self.k:
                raise ValueError(f"umbrella order needs peak in 1..{self.k}")
        if self.kind == "general":
            for i, j in self.relation:
                if not (1 <= i <= self.k and 1 <= j <= self.k):
                    raise ValueError(f"relation pair ({i}, {j}) has an index outside 1..{self.k}")
        return self

    # --- constructors ---

    @classmethod
    def simple(cls, k: int) -> "OrderSpec":
        return cls(kind="simple", k=k)

    @classmethod
    def tree(cls, k: int, root: int = 1) -> "OrderSpec":
        return cls(kind="tree", k=k, root=root)

    @classmethod
    def umbrella(cls, k: int, peak: int) -> "OrderSpec":
        return cls(kind="umbrella", k=k, peak=peak)

    @classmethod
    def general(cls, k: int, relation: Sequence[Tuple[int, int]]) -> "OrderSpec":
        return cls(kind="general", k=k, relation=tuple((int(i), int(j)) for i, j in relation))

    @classmethod
    def unrestricted(cls, k: int) -> "OrderSpec":
        return cls(kind="unrestricted", k=k)

    @classmethod
    def parse(cls, text: str, k: int) -> "OrderSpec":
        """
        Parse ``simple``, ``tree:root=1``, ``umbrella:peak=2``,
        ``general:1<2,1<3`` or ``unrestricted``.
        """
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().lower()
        try:
            if kind == "simple":
                return cls.simple(k)
            if kind == "unrestricted":
                return cls.unrestricted(k)
            if kind in ("tree", "umbrella"):
                params = _parse_params(rest)
                key = "root" if kind == "tree" else "peak"
                if kind == "tree" and key not in params:
                    return cls.tree(k)
                return cls(kind=kind, k=k, **{key: int(params[key])})
            if kind == "general":
                pairs = []
                for item in filter(None, (p.strip() for p in rest.split(","))):
                    left, _, right = item.replace("<=", "<").partition("<")
                    pairs.append((int(left), int(right)))
                return cls.general(k, pairs)
        except (KeyError, ValueError) as e:
            raise InvalidArgumentError(f"invalid order spec '{text}': {e}") from e
        raise InvalidArgumentError(f"unknown order kind '{kind}' in '{text}'")

    # --- relation ---

    def pairs(self) -> List[Tuple[int, int]]:
        """Generating pairs (i, j), 0-based, each meaning z_i <= z_j."""
        k = self.k
        if self.kind == "simple":
            return [(i, i + 1) for i in range(k - 1)]
        if self.kind == "tree":
            r = self.root - 1
            return [(r, i) for i in range(k) if i != r]
        if self.kind == "umbrella":
            p = self.peak - 1
            up = [(i, i + 1) for i in range(p)]
            down = [(i + 1, i) for i in range(p, k - 1)]
            return up + down
        if self.kind == "general":
            return [(i - 1, j - 1) for i, j in self.relation]
        return []

    def closure(self) -> np.ndarray:
        """Reflexive-transitive closure as a boolean matrix: le[i, j] iff z_i <= z_j is implied."""
        le = np.eye(self.k, dtype=bool)
        for i, j in self.pairs():
            le[i, j] = True
        for m in range(self.k):
            le |= le[:, m:m + 1] & le[m:m + 1, :]
        return le

    def describe(self) -> str:
        if self.kind == "tree":
            return f"tree(root={self.root})"
        if self.kind == "umbrella":
            return f"umbrella(peak={self.peak})"
        if self.kind == "general":
            return "general(" + ",".join(f"{i}<={j}" for i, j in self.relation) + ")"
        return self.kind

    def is_feasible(self, z: Sequence[float], tol: float = FEASIBILITY_TOLERANCE) -> bool:
        z = np.asarray(z, dtype=float)
        rows, cols = np.nonzero(self.closure())
        return bool(np.all(z[rows] <= z[cols] + tol))


def _parse_params(text: str) -> Dict[str, str]:
    params = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got '{item}'")
        params[key.strip()] = value.strip()
    return params


class Projection(BaseModel):
    """Fitted values of a cone projection and the level-set blocks that produced them."""
    model_config = ConfigDict(frozen=True)

    fitted: Tuple[float, ...] = Field(..., description="Projected vector.")
    blocks: Tuple[Tuple[int, ...], ...] = Field(..., description="0-based index blocks sharing one fitted value.")


# --- Validation helpers ---

def _as_inputs(values: Sequence[float], weights: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvalidArgumentError("values must be a non-empty vector")
    if w.shape != v.shape:
        raise InvalidArgumentError(f"weights have length {w.size}, values have length {v.size}")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        raise InvalidArgumentError("values and weights must be finite")
    if np.any(w <= 0):
        raise InvalidArgumentError("weights must be strictly positive")
    return v, w


# --- Pool adjacent violators ---

def pava(values: Sequence[float], weights: Sequence[float]) -> Projection:
    """
    Weighted isotonic regression onto z_1 <= ... <= z_k.

    Adjacent blocks are pooled only on a strict violation, so equal block
    means stay separate blocks.
    """
    v, w = _as_inputs(values, weights)

    # each block: [start, end, weight sum, weighted value sum]
    blocks: List[List[float]] = []
    for i in range(v.size):
        blocks.append([i, i + 1, w[i], w[i] * v[i]])
        while len(blocks) > 1:
            left, right = blocks[-2], blocks[-1]
            if left[3] / left[2] > right[3] / right[2]:
                left[1] = right[1]
                left[2] += right[2]
                left[3] += right[3]
                blocks.pop()
            else:
                break

    fitted = np.empty_like(v)
    index_blocks = []
    for start, end, wsum, vsum in blocks:
        start, end = int(start), int(end)
        fitted[start:end] = vsum / wsum
        index_blocks.append(tuple(range(start, end)))
    return Projection(fitted=tuple(fitted.tolist()), blocks=tuple(index_blocks))


# --- Lower sets ---

def lower_sets(le: np.ndarray) -> List[int]:
    """
    Every lower set of the quasi-order (including the empty and full sets)
    as bitmasks, in breadth-first order.

    A set S is lower when j in S and i <= j imply i in S. Each lower set is
    reached from a smaller one by adding the down-closure of one element.
    """
    k = le.shape[0]
    down = [sum(1 << i for i in range(k) if le[i, j]) for j in range(k)]
    seen = {0}
    frontier = [0]
    ordered = [0]
    while frontier:
        nxt = []
        for s in frontier:
            for j in range(k):
                if s >> j & 1:
                    continue
                t = s | down[j]
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
                    ordered.append(t)
                    if len(ordered) > MAX_LOWER_SETS:
                        raise InvalidArgumentError(
                            f"order on {k} components has more than {MAX_LOWER_SETS} lower sets"
                        )
        frontier = nxt
    return ordered


def _mask_matrix(masks: Sequence[int], k: int) -> np.ndarray:
    bits = np.arange(k)
    return ((np.asarray(masks, dtype=np.int64)[:, None] >> bits) & 1).astype(bool)


def _minimum_lower_sets(v: np.ndarray, w: np.ndarray, le: np.ndarray) -> Projection:
    """
    Repeatedly take the lower set (of the components not yet fitted) with the
    smallest weighted mean, fit it at that mean, and remove it. Ties go to
    the larger set.
    """
    k = v.size
    member = _mask_matrix(lower_sets(le), k)
    remaining = np.ones(k, dtype=bool)
    fitted = np.empty(k)
    blocks = []
    while remaining.any():
        candidates = member & remaining
        sizes = candidates.sum(axis=1)
        usable = sizes > 0
        wsum = candidates @ w
        vsum = candidates @ (w * v)
        means = np.full(member.shape[0], np.inf)
        means[usable] = vsum[usable] / wsum[usable]
        best = means.min()
        tied = np.flatnonzero(means == best)
        choice = tied[np.argmax(sizes[tied])]
        chosen = candidates[choice]
        fitted[chosen] = best
        blocks.append(tuple(int(i) for i in np.flatnonzero(chosen)))
        remaining &= ~chosen
    return Projection(fitted=tuple(fitted.tolist()), blocks=tuple(blocks))


def project_cone(values: Sequence[float], weights: Sequence[float], order: OrderSpec) -> Projection:
    """Weighted least-squares projection of ``values`` onto the isotonic cone of ``order``."""
    v, w = _as_inputs(values, weights)
    if order.k != v.size:
        raise InvalidArgumentError(f"order has k={order.k} but values have length {v.size}")
    if order.kind == "simple":
        return pava(v, w)
    if order.kind == "unrestricted":
        return Projection(fitted=tuple(v.tolist()), blocks=tuple((i,) for i in range(v.size)))
    return _minimum_lower_sets(v, w, order.closure())


# --- Batched projection ---

class ConeProjector:
    """
    Projects rows of an (m, k) matrix onto the cone of ``order`` with fixed
    weights, using

        fitted_x = max over upper sets U containing x
                   of min over lower sets L containing x of Av(U & L).

    The candidate sets U & L are enumerated once at construction.
    """

    def __init__(self, order: OrderSpec, weights: Sequence[float]):
        w = np.asarray(weights, dtype=float)
        if w.shape != (order.k,):
            raise InvalidArgumentError(f"order has k={order.k} but {w.size} weights were given")
        if np.any(w <= 0):
            raise InvalidArgumentError("weights must be strictly positive")
        self.order = order
        self.weights = w
        self.k = order.k
        self._identity = order.kind == "unrestricted"
        if self._identity:
            return

        k = self.k
        full = (1 << k) - 1
        lowers = lower_sets(order.closure())
        uppers = [full ^ s for s in lowers]

        index: Dict[int, int] = {}
        self._tables: List[np.ndarray] = []
        for x in range(k):
            bit = 1 << x
            ups = [u for u in uppers if u & bit]
            lows = [s for s in lowers if s & bit]
            table = np.empty((len(ups), len(lows)), dtype=np.intp)
            for a, u in enumerate(ups):
                for b, s in enumerate(lows):
                    table[a, b] = index.setdefault(u & s, len(index))
            self._tables.append(table)

        masks = sorted(index, key=index.get)
        self._members = _mask_matrix(masks, k).astype(float)
        self._member_weight = self._members @ w
        logger.debug(f"ConeProjector for {order.describe()}: {len(masks)} candidate level sets")

    def project(self, values: np.ndarray) -> np.ndarray:
        """Project every row of ``values`` (shape (m, k) or (k,))."""
        v = np.asarray(values, dtype=float)
        single = v.ndim == 1
        rows = np.atleast_2d(v)
        if rows.shape[1] != self.k:
            raise InvalidArgumentError(f"expected {self.k} columns, got {rows.shape[1]}")
        if self._identity:
            return v.copy()
        averages = (rows * self.weights) @ self._members.T / self._member_weight
        fitted = np.empty_like(rows)
        for x, table in enumerate(self._tables):
            fitted[:, x] = averages[:, table].min(axis=2).max(axis=1)
        return fitted[0] if single else fitted

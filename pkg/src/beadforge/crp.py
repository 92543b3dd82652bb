"""Ordered two-parameter Chinese restaurant processes.

A state carries the tables in left-to-right spinal order. Seating follows the
(alpha, theta) rule: customer n+1 joins table i with probability
(n_i - alpha)/(n + theta) and opens a new table with probability
(k*alpha + theta)/(n + theta). Independently of seating, a new table is
placed to the right of the last table with probability theta/(k*alpha+theta)
and into each of the k remaining slots with probability alpha/(k*alpha+theta).
theta = 0 is supported (used by the stick-breaking bead construction); the
order rule then never appends on the right.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import ParameterError
from .rng import RngStream


@dataclass
class Table:
    size: int
    birth_rank: int


@dataclass
class OrderedCrpState:
    alpha: float
    theta: float
    n_customers: int
    tables: list[Table] = field(default_factory=list)

    def validate(self) -> None:
        sizes = sum(t.size for t in self.tables)
        if sizes != self.n_customers:
            raise ParameterError("table sizes do not sum to the customer count")
        ranks = sorted(t.birth_rank for t in self.tables)
        if ranks != list(range(1, len(self.tables) + 1)):
            raise ParameterError("birth ranks must be a permutation of 1..K")

    @property
    def n_tables(self) -> int:
        return len(self.tables)

    def to_json(self) -> str:
        return json.dumps(
            {
                "alpha": self.alpha,
                "theta": self.theta,
                "n": self.n_customers,
                "tables": [{"size": t.size, "birth_rank": t.birth_rank} for t in self.tables],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "OrderedCrpState":
        d = json.loads(text)
        state = cls(
            alpha=d["alpha"],
            theta=d["theta"],
            n_customers=d["n"],
            tables=[Table(t["size"], t["birth_rank"]) for t in d["tables"]],
        )
        state.validate()
        return state


def _check_params(alpha: float, theta: float) -> None:
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    if theta < 0:
        raise ParameterError("theta must be >= 0")
    if theta == 0 and alpha <= 0:
        raise ParameterError("theta = 0 requires alpha > 0")


def new_state(alpha: float, theta: float) -> OrderedCrpState:
    """State after customer 1 sat at the first table."""
    _check_params(alpha, theta)
    return OrderedCrpState(alpha, theta, 1, [Table(1, 1)])


def crp_step(state: OrderedCrpState, rng: RngStream) -> OrderedCrpState:
    """Seat one more customer; returns a new state.

    Joins scan tables in spinal order with weights (size - alpha); a new
    table's slot is one uniform draw over the k+1 weighted positions.
    """
    gen = rng.generator
    n = state.n_customers
    k = state.n_tables
    alpha, theta = state.alpha, state.theta
    tables = [Table(t.size, t.birth_rank) for t in state.tables]
    u = gen.random() * (n + theta)
    if u < n - k * alpha:
        acc = 0.0
        pick = k - 1
        for j, t in enumerate(tables):
            acc += t.size - alpha
            if u < acc:
                pick = j
                break
        tables[pick].size += 1
    else:
        u2 = gen.random() * (k * alpha + theta)
        if u2 < theta:
            slot = k
        else:
            slot = min(int((u2 - theta) / alpha), k - 1)
        tables.insert(slot, Table(1, k + 1))
    return OrderedCrpState(alpha, theta, n + 1, tables)


def run_crp(alpha: float, theta: float, n: int, rng: RngStream) -> OrderedCrpState:
    """Simulate an ordered (alpha, theta) CRP with n customers."""
    _check_params(alpha, theta)
    if n < 1:
        raise ParameterError("n must be >= 1")
    sizes = np.empty(n, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    cust = np.empty(n, dtype=np.int64)
    k = _kernels.crp_ordered(alpha, theta, n, rng.generator, sizes, order, cust)
    tables = [Table(int(sizes[order[j]]), int(order[j]) + 1) for j in range(k)]
    return OrderedCrpState(alpha, theta, n, tables)


def rising(x: float, m: int) -> float:
    """m-factor rising product x (x+1) ... (x+m-1); empty product for m = 0."""
    out = 1.0
    for j in range(m):
        out *= x + j
    return out


def partition_probability(alpha: float, theta: float, block_sizes) -> float:
    """Probability that the CRP partition of [n] equals a given set partition
    with these block sizes (in birth order; the value depends on sizes only).

    prod_{i=1}^{k-1} (theta + alpha*i) * prod_i rising(1-alpha, n_i - 1)
      / rising(1+theta, n-1)

    computed in log space for n > 100 to avoid underflow.
    """
    sizes = list(block_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ParameterError("block sizes must be positive and non-empty")
    n = sum(sizes)
    k = len(sizes)
    if n <= 100:
        num = 1.0
        for i in range(1, k):
            num *= theta + alpha * i
        for s in sizes:
            num *= rising(1.0 - alpha, s - 1)
        return num / rising(1.0 + theta, n - 1)
    log_num = 0.0
    for i in range(1, k):
        log_num += math.log(theta + alpha * i)
    for s in sizes:
        log_num += gammaln(1.0 - alpha + s - 1) - gammaln(1.0 - alpha)
    log_den = gammaln(1.0 + theta + n - 1) - gammaln(1.0 + theta)
    return math.exp(log_num - log_den)


@dataclass(frozen=True)
class Composition:
    """An ordered sequence of positive integers with their sum."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if not self.parts or any(p < 1 for p in self.parts):
            raise ParameterError("composition parts must be positive and non-empty")

    @property
    def n(self) -> int:
        return sum(self.parts)


def composition(state: OrderedCrpState) -> Composition:
    """Table sizes in spinal (left-to-right) order."""
    return Composition(tuple(t.size for t in state.tables))


def regenerative_set(state: OrderedCrpState) -> np.ndarray:
    """{0, n_1/n, (n_1+n_2)/n, ..., 1}: partial sums of spinal parts over n."""
    parts = np.array([t.size for t in state.tables], dtype=float)
    return np.concatenate([[0.0], np.cumsum(parts) / state.n_customers])


def laplace_exponent(alpha: float, theta: float, s: float) -> float:
    """s * Gamma(s+theta) * Gamma(1-alpha) / Gamma(s+theta+1-alpha).

    Evaluated through log-gamma; exactly 0 at s = 0.
    """
    if s < 0:
        raise ParameterError("s must be >= 0")
    if s == 0:
        return 0.0
    return s * math.exp(gammaln(s + theta) + gammaln(1.0 - alpha) - gammaln(s + theta + 1.0 - alpha))

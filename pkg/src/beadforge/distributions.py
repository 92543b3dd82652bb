"""Elementary samplers and executable Dirichlet identities.

Dirichlet vectors are sampled by normalizing independent Gamma draws, which
stays well conditioned for small shape parameters such as 0.5. Every sampler
is a pure function of its ``RngStream``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stats
from .errors import ParameterError
from .rng import RngStream

_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class SimplexVector:
    """A strictly positive probability vector (sums to 1 within 1e-12)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or len(w) < 1:
            raise ParameterError("simplex vector needs dimension >= 1")
        if np.any(w <= 0):
            raise ParameterError("simplex vector entries must be strictly positive")
        if abs(float(w.sum()) - 1.0) > _SIMPLEX_TOL:
            raise ParameterError("simplex vector must sum to 1")

    @property
    def dimension(self) -> int:
        return len(self.weights)


def sample_beta(a: float, b: float, rng: RngStream) -> float:
    """One Beta(a, b) draw."""
    if a <= 0 or b <= 0:
        raise ParameterError("beta parameters must be positive")
    return float(rng.generator.beta(a, b))


def sample_dirichlet(theta, rng: RngStream) -> SimplexVector:
    """One Dirichlet(theta_1, ..., theta_k) draw via Gamma normalization."""
    th = np.asarray(theta, dtype=float)
    if th.ndim != 1 or len(th) < 1:
        raise ParameterError("theta must be a non-empty vector")
    if np.any(th <= 0):
        raise ParameterError("Dirichlet parameters must be positive")
    if len(th) == 1:
        return SimplexVector(np.array([1.0]))
    g = rng.generator.gamma(th)
    while np.any(g <= 0.0) or g.sum() <= 0.0:  # underflow guard for tiny shapes
        g = rng.generator.gamma(th)
    return SimplexVector(g / g.sum())


def sample_gem(alpha: float, theta: float, n_atoms: int, rng: RngStream) -> np.ndarray:
    """First ``n_atoms`` birth-order table proportions.

    Stick breaking with independent factors M_i ~ Beta(1 - alpha, theta + i*alpha):
    P_i = M_i * prod_{j<i} (1 - M_j). Prefix-consistent: the first m entries
    do not depend on n_atoms.
    """
    if not 0 <= alpha < 1:
        raise ParameterError("alpha must lie in [0, 1)")
    if theta <= -alpha:
        raise ParameterError("theta must exceed -alpha")
    if n_atoms < 1:
        raise ParameterError("n_atoms must be >= 1")
    gen = rng.generator
    i = np.arange(1, n_atoms + 1)
    m = gen.beta(1.0 - alpha, theta + i * alpha)
    stick = np.cumprod(1.0 - m)
    out = np.empty(n_atoms)
    out[0] = m[0]
    out[1:] = m[1:] * stick[:-1]
    return out


def _dirichlet_sample_matrix(theta, n, rng):
    gen = rng.generator
    g = gen.gamma(np.broadcast_to(theta, (n, len(theta))))
    g = np.maximum(g, 1e-300)
    return g / g.sum(axis=1, keepdims=True)


def check_dirichlet_identity(kind: str, params: dict, n_samples: int, rng: RngStream) -> stats.TestReport:
    """Monte Carlo check of a distributional Dirichlet identity.

    Supported kinds and their params:

    - ``aggregation``: {"theta": [...], "i": a, "j": b} — adding coordinates
      a and b yields a Dirichlet with the two shapes summed.
    - ``decimation``:  {"theta": [...], "i": a, "fractions": [f1, f2, f3]} —
      splitting coordinate a by an independent Dirichlet(f * theta_a) refines
      the vector to a Dirichlet with theta_a split accordingly.
    - ``size_bias``:   {"theta": [...], "i": a} — given a size-biased index
      pick equal to a, the vector is Dirichlet with theta_a + 1.
    - ``marginal``:    {"theta": [...], "i": a, "j": b} — X_a/(X_a+X_b) is
      Beta(theta_a, theta_b).
    - ``deletion``:    {"theta": [...], "i": a} — dropping coordinate a and
      renormalizing yields the Dirichlet without theta_a.

    The transformed sample is compared to a directly sampled target, via
    two-sample KS on each coordinate (size-bias uses mean z-tests at 3*SE,
    since the conditioning changes the sample size). ``passed`` requires
    every coordinate to pass.
    """
    th = np.asarray(params.get("theta", ()), dtype=float)
    if len(th) < 1 or np.any(th <= 0):
        raise ParameterError("params['theta'] must be positive and non-empty")
    if n_samples < 100:
        raise ParameterError("n_samples too small for a meaningful check")
    seed = rng.master_seed

    if kind == "aggregation":
        i, j = int(params["i"]), int(params["j"])
        if not (0 <= i < j < len(th)):
            raise ParameterError("need 0 <= i < j < k")
        x = _dirichlet_sample_matrix(th, n_samples, rng)
        merged = np.delete(x, j, axis=1)
        merged[:, i] = x[:, i] + x[:, j]
        th2 = np.delete(th, j)
        th2[i] = th[i] + th[j]
        target = _dirichlet_sample_matrix(th2, n_samples, rng)
        reports = [stats.ks_two_sample(merged[:, c], target[:, c], seed=seed)
                   for c in range(merged.shape[1])]
    elif kind == "decimation":
        i = int(params["i"])
        fr = np.asarray(params["fractions"], dtype=float)
        if len(fr) != 3 or np.any(fr <= 0) or abs(fr.sum() - 1.0) > 1e-9:
            raise ParameterError("fractions must be 3 positive values summing to 1")
        x = _dirichlet_sample_matrix(th, n_samples, rng)
        p = _dirichlet_sample_matrix(fr * th[i], n_samples, rng)
        split = np.hstack([x[:, :i], p * x[:, [i]], x[:, i + 1:]])
        th2 = np.concatenate([th[:i], fr * th[i], th[i + 1:]])
        target = _dirichlet_sample_matrix(th2, n_samples, rng)
        reports = [stats.ks_two_sample(split[:, c], target[:, c], seed=seed)
                   for c in range(split.shape[1])]
    elif kind == "size_bias":
        i = int(params["i"])
        x = _dirichlet_sample_matrix(th, n_samples, rng)
        u = rng.generator.random(n_samples)
        picked = (np.cumsum(x, axis=1) > u[:, None]).argmax(axis=1)
        cond = x[picked == i]
        if len(cond) < 100:
            raise ParameterError("too few conditioned samples; raise n_samples")
        th2 = th.copy()
        th2[i] += 1.0
        means = th2 / th2.sum()
        reports = [stats.moment_z_test(cond[:, c], float(means[c]), seed=seed)
                   for c in range(len(th))]
    elif kind == "marginal":
        i, j = int(params["i"]), int(params["j"])
        if i == j or not (0 <= i < len(th)) or not (0 <= j < len(th)):
            raise ParameterError("need distinct valid indices")
        x = _dirichlet_sample_matrix(th, n_samples, rng)
        ratio = x[:, i] / (x[:, i] + x[:, j])
        target = rng.generator.beta(th[i], th[j], size=n_samples)
        reports = [stats.ks_two_sample(ratio, target, seed=seed)]
    elif kind == "deletion":
        i = int(params["i"])
        if len(th) < 2:
            raise ParameterError("deletion needs k >= 2")
        x = _dirichlet_sample_matrix(th, n_samples, rng)
        rest = np.delete(x, i, axis=1)
        rest = rest / rest.sum(axis=1, keepdims=True)
        target = _dirichlet_sample_matrix(np.delete(th, i), n_samples, rng)
        reports = [stats.ks_two_sample(rest[:, c], target[:, c], seed=seed)
                   for c in range(rest.shape[1])]
    else:
        raise ParameterError(f"unknown identity kind: {kind!r}")

    worst = min(reports, key=lambda r: (r.p_value if r.p_value is not None else -r.statistic))
    return stats.TestReport(
        name=f"dirichlet_{kind}",
        statistic=worst.statistic,
        threshold=worst.threshold,
        passed=all(r.passed for r in reports),
        p_value=worst.p_value,
        n_samples=(n_samples,),
        seed=seed,
    )

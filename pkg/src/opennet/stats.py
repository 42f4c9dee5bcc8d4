"""Monte-Carlo test of an empirical input-node choice against random ones."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from opennet.errors import DegenerateDistributionError, ValidationError
from opennet.gramian import controllability_gramian
from opennet.network import StableSystem, StructuralReport
from opennet.selection import input_contributions

DEFAULT_SAMPLES = 10_000
Z_THRESHOLD = 2.0
P_THRESHOLD = 0.05
# spread below this fraction of |mean| is treated as exactly zero
_ZERO_SPREAD_RTOL = 1e-12


@dataclass(frozen=True)
class SampleStats:
    sample_values: np.ndarray = field(repr=False)
    x_real: float
    mean: float
    std: float
    z_score: float
    p_value_mod: float
    p_value_two_sided: float
    classification: str
    seed: int | None = None
    n_samples: int = 0


def worker_count(threads: int | None = None) -> int:
    """Resolve a worker count; ``None`` reads ``OPENNET_THREADS`` (0 means one per CPU)."""
    if threads is None:
        threads = int(os.environ.get("OPENNET_THREADS", "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def draw_subset(n: int, m: int, seed: int, index: int) -> np.ndarray:
    """The ``index``-th random m-subset of ``range(n)``, sorted; depends only on its arguments."""
    rng = np.random.default_rng([seed, index])
    return np.sort(rng.choice(n, size=m, replace=False))


def sample_trace_distribution(
    sys: StableSystem, m: int, n_samples: int = DEFAULT_SAMPLES, seed: int = 0, threads=None
) -> np.ndarray:
    """H2^2 for ``n_samples`` uniformly random m-subsets of input nodes.

    Each value is a sum of cached single-node contributions, so no Lyapunov
    solve happens per sample.  Results do not depend on ``threads``.
    """
    contrib = input_contributions(sys).values
    n = len(contrib)
    if not 1 <= m <= n:
        raise ValidationError(f"m must be in [1, {n}], got {m}")
    if n_samples < 2:
        raise ValidationError(f"need at least 2 samples, got {n_samples}")
    out = np.empty(n_samples)

    def fill(lo, hi):
        for idx in range(lo, hi):
            out[idx] = contrib[draw_subset(n, m, seed, idx)].sum()

    workers = min(worker_count(threads), n_samples)
    bounds = np.linspace(0, n_samples, workers + 1).astype(int)
    if workers == 1:
        fill(0, n_samples)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, bounds[:-1], bounds[1:]))
    return out


def score_empirical_choice(
    sample_values,
    x_real: float,
    *,
    seed: int | None = None,
    z_threshold: float = Z_THRESHOLD,
    p_threshold: float = P_THRESHOLD,
) -> SampleStats:
    """z-score, p-values and passing/blocking/typical label for ``x_real``.

    ``p_value_mod`` is the empirical CDF at ``x_real`` taken modulo 0.5;
    the label uses the two-sided ``min(F, 1 - F)``.
    """
    x = np.asarray(sample_values, dtype=float)
    if x.size == 0:
        raise ValidationError("sample is empty")
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if std <= _ZERO_SPREAD_RTOL * abs(mean):
        if not np.isclose(x_real, mean, rtol=1e-9, atol=0.0):
            raise DegenerateDistributionError(
                f"sample has zero spread around {mean!r} but x_real = {x_real!r}"
            )
        z = 0.0
    else:
        z = (x_real - mean) / std
    below = np.count_nonzero(x < x_real)
    ties = np.count_nonzero(x == x_real)
    cdf = (below + 0.5 * ties) / x.size
    p_mod = float(cdf % 0.5)
    p_two = float(min(cdf, 1.0 - cdf))
    if p_two < p_threshold and z > z_threshold:
        label = "passing"
    elif p_two < p_threshold and z < -z_threshold:
        label = "blocking"
    else:
        label = "typical"
    return SampleStats(x, float(x_real), mean, std, float(z), p_mod, p_two, label, seed, int(x.size))


def empirical_test(
    sys: StableSystem,
    real_inputs,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    threads=None,
    **thresholds,
) -> SampleStats:
    """Score the real input set of ``sys`` (outputs fixed) against random sets of equal size."""
    real_inputs = tuple(int(i) for i in real_inputs)
    samples = sample_trace_distribution(sys, len(real_inputs), n_samples, seed, threads)
    x_real = input_contributions(sys).subset_sum(real_inputs)
    return score_empirical_choice(samples, x_real, seed=seed, **thresholds)


def trace_vs_henrici(report: StructuralReport, sys: StableSystem) -> tuple[float, float]:
    """``(Henrici index, Tr(W_c) / N^2)`` with every node an input."""
    n = sys.n_states
    full = sys.with_roles(inputs=range(n))
    return report.henrici_index, controllability_gramian(full).trace / n**2

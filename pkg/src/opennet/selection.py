"""Per-node contributions to H2^2 and optimal k-node selection.

``Tr(C W_c C^T)`` is modular in both the input set and the output set, so
the best k-subset is simply the k best single nodes.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Literal

import numpy as np

from opennet.errors import ValidationError
from opennet.gramian import controllability_gramian, observability_gramian
from opennet.network import StableSystem


@dataclass(frozen=True)
class ContributionVector:
    """``values[v]`` is H2^2 with node ``v`` as the only input (or output).

    ``fixed_set`` is the node set held fixed on the other side.
    """

    values: np.ndarray
    basis: Literal["input", "output"]
    fixed_set: tuple[int, ...]

    def subset_sum(self, nodes) -> float:
        return float(self.values[np.sort(np.asarray(nodes, dtype=int))].sum())


class _ContributionCache:
    """Memo keyed on the state matrix bytes, the ranked side and the fixed set."""

    def __init__(self, maxsize=32):
        self._data: dict = {}
        self._lock = threading.Lock()
        self.maxsize = maxsize

    def get(self, key, compute):
        with self._lock:
            hit = self._data.get(key)
            if hit is None:
                hit = compute()
                if len(self._data) >= self.maxsize:
                    self._data.pop(next(iter(self._data)))
                self._data[key] = hit
            return hit

    def clear(self):
        with self._lock:
            self._data.clear()


contribution_cache = _ContributionCache()


def _key(sys, side, fixed):
    a = np.ascontiguousarray(sys.a_matrix)
    return (a.shape, a.tobytes(), side, fixed)


def _readonly(v):
    v = np.array(v, dtype=float)
    v.setflags(write=False)
    return v


def input_contributions(sys: StableSystem, use_cache: bool = True) -> ContributionVector:
    """Single-input H2^2 of every node for the system's output set.

    One dual solve: the diagonal of the observability Gramian with ``Q = C^T C``.
    """
    fixed = tuple(sys.output_set) or tuple(np.argmax(sys.c_matrix, axis=1).tolist())

    def compute():
        vals = np.clip(np.diag(observability_gramian(sys).matrix), 0.0, None)
        return ContributionVector(_readonly(vals), "input", fixed)

    if not use_cache:
        return compute()
    return contribution_cache.get(_key(sys, "input", fixed), compute)


def output_contributions(sys: StableSystem, use_cache: bool = True) -> ContributionVector:
    """Single-output H2^2 of every node: the diagonal of ``W_c`` for the input set."""
    fixed = tuple(sys.input_set) or tuple(np.argmax(sys.b_matrix, axis=0).tolist())

    def compute():
        vals = np.clip(np.diag(controllability_gramian(sys).matrix), 0.0, None)
        return ContributionVector(_readonly(vals), "output", fixed)

    if not use_cache:
        return compute()
    return contribution_cache.get(_key(sys, "output", fixed), compute)


def top_k(
    contrib: ContributionVector, k: int, direction: Literal["max", "min"] = "max"
) -> list[int]:
    """Nodes of the optimal k-subset, best first; ties go to the lower index."""
    n = len(contrib.values)
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    if direction not in ("max", "min"):
        raise ValidationError(f"direction must be 'max' or 'min', got {direction!r}")
    sign = -1.0 if direction == "max" else 1.0
    order = sorted(range(n), key=lambda v: (sign * contrib.values[v], v))
    return order[:k]

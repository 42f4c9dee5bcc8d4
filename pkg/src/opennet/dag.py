"""DC gain of acyclic networks as a sum over input-to-output paths.

For ``A = P - D`` with ``P`` the adjacency of a DAG and ``D`` a positive
diagonal, every path ``i = v0 -> ... -> vL = j`` contributes

    -(prod over edges k->l of A[l, k] / |A[k, k]|) / |A[j, j]|

to ``[A^{-1}]_{ji}``.  The zero-length path (``i == j``) contributes ``-1/|A[j, j]|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from opennet.errors import CyclicityError, LeakError, PathExplosionError, ValidationError
from opennet.network import NetworkSpec, StableSystem, _acyclic_order, build_adjacency

MAX_PATHS = 10**6


@dataclass(frozen=True)
class PathGainTerm:
    path: tuple[int, ...]
    term_value: float

    @property
    def length(self) -> int:
        return len(self.path) - 1


def _paths(a: np.ndarray, source: int, target: int, max_paths: int) -> list[tuple[int, ...]]:
    n = a.shape[0]
    if not (0 <= source < n and 0 <= target < n):
        raise ValidationError(f"node pair ({source}, {target}) outside [0, {n})")
    if _acyclic_order(a) is None:
        raise CyclicityError("graph contains a directed cycle (self-loops excluded)")
    pattern = a != 0
    np.fill_diagonal(pattern, False)
    succ = [np.flatnonzero(pattern[:, k]).tolist() for k in range(n)]

    # prune to nodes that can still reach the target
    alive = np.zeros(n, dtype=bool)
    alive[target] = True
    stack = [target]
    while stack:
        l = stack.pop()
        for k in np.flatnonzero(pattern[l, :]):
            if not alive[k]:
                alive[k] = True
                stack.append(int(k))
    if not alive[source]:
        return []

    found: list[tuple[int, ...]] = []
    path = [source]
    cursor = [0]
    while path:
        node = path[-1]
        if node == target:
            if len(found) >= max_paths:
                raise PathExplosionError(
                    f"more than {max_paths} paths from {source} to {target}; "
                    "use the dense inverse (dc_gain) instead"
                )
            found.append(tuple(path))
            path.pop()
            cursor.pop()
            continue
        options = succ[node]
        k = cursor[-1]
        while k < len(options) and not alive[options[k]]:
            k += 1
        if k == len(options):
            path.pop()
            cursor.pop()
            continue
        cursor[-1] = k + 1
        path.append(options[k])
        cursor.append(0)
    return found


def enumerate_paths(
    spec: NetworkSpec, source: int, target: int, max_paths: int = MAX_PATHS
) -> list[tuple[int, ...]]:
    """All directed paths ``source -> target`` in lexicographic node-index order."""
    return _paths(build_adjacency(spec), source, target, max_paths)


def dag_dc_entry(
    sys: StableSystem, pair: tuple[int, int], max_paths: int = MAX_PATHS
) -> tuple[float, list[PathGainTerm]]:
    """``[A^{-1}]_{ji}`` for input ``i = pair[0]`` and output ``j = pair[1]`` by path enumeration."""
    a = sys.a_matrix
    off = a - np.diag(np.diag(a))
    if np.any(off < 0):
        raise ValidationError("path formula requires non-negative off-diagonal weights")
    leak = np.diag(a)
    if np.any(leak >= 0):
        bad = np.flatnonzero(leak >= 0).tolist()
        raise LeakError(f"diagonal entries must be strictly negative; nodes {bad} are not")
    i, j = pair
    terms = []
    for path in _paths(a, i, j, max_paths):
        gain = 1.0
        for k, l in zip(path[:-1], path[1:]):
            gain *= a[l, k] / -leak[k]
        terms.append(PathGainTerm(path, -gain / -leak[j]))
    return float(sum(t.term_value for t in terms)), terms


def dominant_paths(terms: list[PathGainTerm], k: int) -> list[PathGainTerm]:
    """Top ``k`` terms by magnitude; ties keep lexicographic path order."""
    return sorted(terms, key=lambda t: (-abs(t.term_value), t.path))[:k]

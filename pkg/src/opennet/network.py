"""Network representation, system matrices and structural quantities."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from opennet.errors import UndefinedIndexError, ValidationError

#: Hop count reported for unreachable node pairs.
UNREACHABLE = -1

_HENRICI_CLAMP = 1e-10


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NetworkSpec:
    """Directed weighted graph with designated input and output nodes.

    ``edges`` holds ``(source, target, weight)`` triples over node indices.
    An empty ``output_set`` is normalised to all nodes, the ``C = I``
    convention used when no outputs are known.
    """

    node_ids: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    input_set: tuple[int, ...]
    output_set: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(str(n) for n in self.node_ids))
        object.__setattr__(
            self, "edges", tuple((int(s), int(t), float(w)) for s, t, w in self.edges)
        )
        object.__setattr__(self, "input_set", tuple(int(i) for i in self.input_set))
        outputs = tuple(int(o) for o in self.output_set) or tuple(range(self.n_nodes))
        object.__setattr__(self, "output_set", outputs)
        self._validate()

    def _validate(self):
        n = self.n_nodes
        if n == 0:
            raise ValidationError("network has no nodes")
        if len(set(self.node_ids)) != n:
            seen, dup = set(), None
            for label in self.node_ids:
                if label in seen:
                    dup = label
                    break
                seen.add(label)
            raise ValidationError(f"duplicate node label {dup!r}")
        for k, (s, t, w) in enumerate(self.edges):
            if not (0 <= s < n and 0 <= t < n):
                raise ValidationError(f"edge {k} endpoint ({s}, {t}) outside [0, {n})")
            if not np.isfinite(w) or w < 0:
                raise ValidationError(f"edge {k} has invalid weight {w!r}; weights must be >= 0")
        for name, nodes in (("input", self.input_set), ("output", self.output_set)):
            if not nodes:
                raise ValidationError(f"{name} set is empty")
            if len(set(nodes)) != len(nodes):
                raise ValidationError(f"{name} set contains duplicates")
            if any(not 0 <= v < n for v in nodes):
                raise ValidationError(f"{name} set references a node outside [0, {n})")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def index(self, label: str) -> int:
        try:
            return self.node_ids.index(label)
        except ValueError:
            raise ValidationError(f"unknown node label {label!r}") from None

    def with_roles(self, inputs: Sequence[int], outputs: Sequence[int] = ()) -> "NetworkSpec":
        return NetworkSpec(self.node_ids, self.edges, tuple(inputs), tuple(outputs))

    def successors(self) -> list[list[int]]:
        """Sorted out-neighbour lists over positive-weight, non-loop edges."""
        succ = [set() for _ in range(self.n_nodes)]
        for s, t, w in self.edges:
            if s != t and w > 0:
                succ[s].add(t)
        return [sorted(x) for x in succ]


@dataclass(frozen=True)
class ShiftPolicy:
    """Spectral shift ``A = A0 - c I`` placing the spectral abscissa at ``-margin``.

    The default margin of 1 normalises the slowest mode to ``-1``.
    """

    margin: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.margin) or self.margin <= 0:
            raise ValidationError(f"shift margin must be > 0, got {self.margin!r}")


@dataclass(frozen=True)
class StableSystem:
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    c_matrix: np.ndarray
    shift_c: float
    spectral_abscissa: float
    input_set: tuple[int, ...] = ()
    output_set: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("a_matrix", "b_matrix", "c_matrix"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def n_states(self) -> int:
        return self.a_matrix.shape[0]

    @classmethod
    def from_matrices(cls, a, inputs, outputs=None, shift_c=0.0):
        """Wrap an already-stable state matrix with versor input/output matrices."""
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        outputs = range(n) if outputs is None else outputs
        return cls(
            a_matrix=a,
            b_matrix=versor_columns(n, inputs),
            c_matrix=versor_columns(n, outputs).T,
            shift_c=float(shift_c),
            spectral_abscissa=float(np.max(eigenvalues(a).real)),
            input_set=tuple(inputs),
            output_set=tuple(outputs),
        )

    def with_roles(self, inputs=None, outputs=None) -> "StableSystem":
        inputs = self.input_set if inputs is None else tuple(inputs)
        outputs = self.output_set if outputs is None else tuple(outputs)
        n = self.n_states
        return StableSystem(
            self.a_matrix,
            versor_columns(n, inputs),
            versor_columns(n, outputs).T,
            self.shift_c,
            self.spectral_abscissa,
            inputs,
            outputs,
        )


@dataclass(frozen=True)
class StructuralReport:
    is_dag: bool
    henrici_index: float
    shortest_paths: np.ndarray = field(repr=False)
    topological_order: tuple[int, ...] | None = None


def versor_columns(n: int, nodes: Sequence[int]) -> np.ndarray:
    m = np.zeros((n, len(nodes)))
    for col, node in enumerate(nodes):
        m[node, col] = 1.0
    return m


def build_adjacency(spec: NetworkSpec) -> np.ndarray:
    """Adjacency matrix with ``A0[i, j]`` the total weight of edges ``j -> i``.

    Parallel edges are summed; self-loops land on the diagonal.
    """
    n = spec.n_nodes
    a0 = np.zeros((n, n))
    for s, t, w in spec.edges:
        a0[t, s] += w
    return a0


def _acyclic_order(a: np.ndarray) -> list[int] | None:
    """Topological order of the off-diagonal pattern of ``a`` (edge j->i when a[i, j] != 0)."""
    n = a.shape[0]
    pattern = a != 0
    np.fill_diagonal(pattern, False)
    indeg = pattern.sum(axis=1)
    heap = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        j = heapq.heappop(heap)
        order.append(j)
        for i in np.flatnonzero(pattern[:, j]):
            indeg[i] -= 1
            if indeg[i] == 0:
                heapq.heappush(heap, int(i))
    return order if len(order) == n else None


def eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``a``, read off the diagonal when the matrix is permuted-triangular.

    A general eigensolver perturbs the defective spectrum of a DAG by roughly
    ``eps**(1/N)``, so the exact diagonal is used whenever the pattern is acyclic.
    """
    a = np.asarray(a, dtype=float)
    if _acyclic_order(a) is not None:
        return np.diag(a).astype(complex)
    return np.linalg.eigvals(a)


def stabilize(a0: np.ndarray, policy: ShiftPolicy | None = None):
    """Shift ``a0`` so its spectral abscissa equals ``-policy.margin``.

    Returns ``(a_matrix, shift_c, spectral_abscissa)``.
    """
    policy = policy or ShiftPolicy()
    a0 = np.asarray(a0, dtype=float)
    if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
        raise ValidationError(f"adjacency must be square, got shape {a0.shape}")
    if not np.all(np.isfinite(a0)):
        raise ValidationError("adjacency contains non-finite entries")
    top = float(np.max(eigenvalues(a0).real))
    shift_c = top + policy.margin
    a = a0 - shift_c * np.eye(a0.shape[0])
    return a, shift_c, -policy.margin


def build_system(spec: NetworkSpec, policy: ShiftPolicy | None = None) -> StableSystem:
    a, shift_c, abscissa = stabilize(build_adjacency(spec), policy)
    n = spec.n_nodes
    return StableSystem(
        a_matrix=a,
        b_matrix=versor_columns(n, spec.input_set),
        c_matrix=versor_columns(n, spec.output_set).T,
        shift_c=shift_c,
        spectral_abscissa=abscissa,
        input_set=spec.input_set,
        output_set=spec.output_set,
    )


def henrici_index(a: np.ndarray) -> float:
    """Normalised departure from normality, ``sqrt(|A|_F^2 - sum|lambda|^2) / |A|_F``.

    The radicand is the squared norm of the strictly upper part of the
    complex Schur form, which avoids cancellation for nearly normal matrices.
    """
    a = np.asarray(a, dtype=float)
    fro2 = float(np.sum(a * a))
    if fro2 == 0.0:
        raise UndefinedIndexError("Henrici index is undefined for the zero matrix")
    if _acyclic_order(a) is not None:
        radicand = fro2 - float(np.sum(np.diag(a) ** 2))
    else:
        t = linalg.schur(a.astype(complex), output="complex")[0]
        radicand = float(np.sum(np.abs(np.triu(t, k=1)) ** 2))
    if radicand < 0:
        if radicand < -_HENRICI_CLAMP * fro2:
            raise UndefinedIndexError(f"negative Henrici radicand {radicand:.3e}")
        radicand = 0.0
    return min(1.0, float(np.sqrt(radicand / fro2)))


def detect_dag(spec: NetworkSpec) -> tuple[bool, tuple[int, ...] | None]:
    """Acyclicity test ignoring self-loops; returns ``(is_dag, topological_order)``.

    Among nodes that are ready at the same time the smallest index goes first.
    """
    order = _acyclic_order(build_adjacency(spec))
    return (order is not None, tuple(order) if order is not None else None)


def _bfs_hops(succ: list[list[int]], source: int) -> list[int]:
    dist = [UNREACHABLE] * len(succ)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if dist[v] == UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def shortest_unweighted_path(spec: NetworkSpec, source: int, target: int) -> int:
    """Minimum number of edges from ``source`` to ``target``, or ``UNREACHABLE``."""
    n = spec.n_nodes
    if not (0 <= source < n and 0 <= target < n):
        raise ValidationError(f"node pair ({source}, {target}) outside [0, {n})")
    return _bfs_hops(spec.successors(), source)[target]


def shortest_path_matrix(spec: NetworkSpec) -> np.ndarray:
    """p x m hop counts, entry ``[o, i]`` from input ``i`` to output ``o``."""
    succ = spec.successors()
    out = np.empty((len(spec.output_set), len(spec.input_set)), dtype=int)
    for col, i in enumerate(spec.input_set):
        dist = _bfs_hops(succ, i)
        out[:, col] = [dist[o] for o in spec.output_set]
    return out


def structural_report(spec: NetworkSpec) -> StructuralReport:
    is_dag, order = detect_dag(spec)
    a0 = build_adjacency(spec)
    h = henrici_index(a0) if np.any(a0) else 0.0
    return StructuralReport(is_dag, h, shortest_path_matrix(spec), order)

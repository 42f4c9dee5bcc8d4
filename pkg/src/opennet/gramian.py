"""Lyapunov solves, Gramians and H2-norms.

The dense solver is a Bartels-Stewart scheme: ``A = U T U^H`` (complex Schur),
then the transformed equation ``T Y + Y T^H + U^H Q U = 0`` is solved one
column at a time from the right, each column being a triangular solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy import linalg

from opennet.errors import ConditioningError, ControllabilityError, StabilityError
from opennet.network import StableSystem, eigenvalues

RESIDUAL_RTOL = 1e-8
PSD_RTOL = 1e-8
MAX_CONDITION = 1e12
# relative separation min|l_i + conj(l_j)| / |A|_F below which the solve is refused
_MIN_SEPARATION = 1e-13


@dataclass(frozen=True)
class Gramian:
    matrix: np.ndarray
    residual_norm: float
    kind: Literal["controllability", "observability", "lyapunov"] = "lyapunov"

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


@dataclass(frozen=True)
class H2Report:
    h2_squared: float
    h2: float
    per_pair: np.ndarray


class TraceLaw(NamedTuple):
    approximation: float
    trace: float
    deviation: float


class LyapunovSolver:
    """Reusable solver for ``A W + W A^T + Q = 0`` with a fixed Hurwitz ``A``.

    The Schur factorisation is computed once, so repeated right-hand sides
    (one per input node, say) cost only the back-substitution.
    """

    def __init__(self, a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise StabilityError("A contains non-finite entries")
        abscissa = float(np.max(eigenvalues(a).real))
        if abscissa >= 0:
            raise StabilityError(f"A is not Hurwitz: spectral abscissa {abscissa:.6g} >= 0")
        self.a = a
        self.n = a.shape[0]
        self.a_norm = float(np.linalg.norm(a, "fro"))
        self._t, self._u = linalg.schur(a.astype(complex), output="complex")
        d = np.diag(self._t)
        sep = float(np.min(np.abs(d[:, None] + d.conj()[None, :])))
        if sep <= _MIN_SEPARATION * max(self.a_norm, 1.0):
            raise ConditioningError(
                f"Lyapunov operator nearly singular: min|l_i + conj(l_j)| = {sep:.3e}"
            )

    def solve(self, q) -> tuple[np.ndarray, float]:
        """Return ``(W, residual_norm)``; ``W`` is symmetrised."""
        q = np.asarray(q, dtype=float)
        t, u = self._t, self._u
        n = self.n
        qt = u.conj().T @ q @ u
        y = np.zeros((n, n), dtype=complex)
        shifted = t.copy()
        diag = np.diag(t).copy()
        idx = np.arange(n)
        for j in range(n - 1, -1, -1):
            rhs = -qt[:, j]
            if j + 1 < n:
                rhs = rhs - y[:, j + 1 :] @ t[j, j + 1 :].conj()
            shifted[idx, idx] = diag + diag[j].conj()
            y[:, j] = linalg.solve_triangular(shifted, rhs, check_finite=False)
        w = (u @ y @ u.conj().T).real
        w = 0.5 * (w + w.T)
        residual = float(np.linalg.norm(self.a @ w + w @ self.a.T + q, "fro"))
        bound = RESIDUAL_RTOL * (self.a_norm * np.linalg.norm(w, "fro") + np.linalg.norm(q, "fro"))
        if residual > bound:
            raise ConditioningError(
                f"Lyapunov residual {residual:.3e} exceeds tolerance {bound:.3e}"
            )
        return w, residual


def solve_lyapunov(a, q, kind="lyapunov") -> Gramian:
    """Solve ``A W + W A^T + Q = 0`` for Hurwitz ``A`` and symmetric ``Q``."""
    w, res = LyapunovSolver(a).solve(q)
    return Gramian(w, res, kind)


def controllability_gramian(sys: StableSystem) -> Gramian:
    b = sys.b_matrix
    return solve_lyapunov(sys.a_matrix, b @ b.T, "controllability")


def observability_gramian(sys: StableSystem) -> Gramian:
    """Solve the dual equation ``A^T W + W A + C^T C = 0``."""
    c = sys.c_matrix
    return solve_lyapunov(sys.a_matrix.T, c.T @ c, "observability")


def _unit_outer(n, k):
    q = np.zeros((n, n))
    q[k, k] = 1.0
    return q


def h2_norm(sys: StableSystem, per_pair: bool = True) -> H2Report:
    """Squared H2-norm ``Tr(C W_c C^T)`` with per input/output pair contributions.

    ``per_pair[o, i]`` is the H2^2 of the single-input single-output system
    from input column ``i`` to output row ``o``.  It is obtained from
    ``min(m, p)`` single-node solves, on the primal side when there are fewer
    inputs and on the dual side otherwise.
    """
    wc = controllability_gramian(sys).matrix
    c = sys.c_matrix
    h2sq = float(np.trace(c @ wc @ c.T))
    p, m = c.shape[0], sys.b_matrix.shape[1]
    pairs = np.full((p, m), np.nan)
    if per_pair:
        n = sys.n_states
        in_nodes = np.argmax(sys.b_matrix, axis=0)
        out_nodes = np.argmax(c, axis=1)
        if m <= p:
            solver = LyapunovSolver(sys.a_matrix)
            for col, i in enumerate(in_nodes):
                w, _ = solver.solve(_unit_outer(n, i))
                pairs[:, col] = np.diag(w)[out_nodes]
        else:
            solver = LyapunovSolver(sys.a_matrix.T)
            for row, o in enumerate(out_nodes):
                w, _ = solver.solve(_unit_outer(n, o))
                pairs[row, :] = np.diag(w)[in_nodes]
    return H2Report(h2sq, float(np.sqrt(max(h2sq, 0.0))), pairs)


def min_steering_energy(gramian: Gramian, x_f) -> float:
    """Minimum input energy ``x_f^T W_c^{-1} x_f`` to reach ``x_f`` from rest."""
    w = np.asarray(gramian.matrix, dtype=float)
    x_f = np.asarray(x_f, dtype=float).reshape(-1)
    vals, vecs = np.linalg.eigh(w)
    top = vals[-1]
    if top <= 0 or vals[0] <= top / MAX_CONDITION:
        null = vecs[:, vals <= top / MAX_CONDITION] if top > 0 else vecs
        raise ControllabilityError(
            f"Gramian is singular or ill-conditioned (eigenvalues {vals[0]:.3e} .. {top:.3e}); "
            f"{null.shape[1]} uncontrollable direction(s)",
            null_directions=null,
        )
    factor = linalg.cho_factor(w)
    return float(x_f @ linalg.cho_solve(factor, x_f))


def gramian_spectrum(gramian: Gramian) -> np.ndarray:
    return np.linalg.eigvalsh(gramian.matrix)[::-1]


def trace_linear_approximation(sys: StableSystem) -> TraceLaw:
    """Compare ``Tr(W_c)`` with ``m / (2|a|)``, exact when ``A`` is a multiple of ``I``."""
    m = float(np.trace(sys.b_matrix.T @ sys.b_matrix))
    approx = m / (2.0 * abs(sys.spectral_abscissa))
    tr = controllability_gramian(sys).trace
    return TraceLaw(approx, tr, abs(tr - approx) / tr)

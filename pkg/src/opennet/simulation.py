"""Exact-discretisation time stepping, used as an independent oracle.

Every step multiplies by a matrix exponential of an augmented system, so the
only error left in comparisons is horizon truncation and quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg

from opennet.errors import ValidationError
from opennet.network import StableSystem

MAX_EXP_ARG = 100.0


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    outputs: np.ndarray = field(repr=False)
    input_kind: str
    omega: float | None = None
    column: int = 0
    spectral_abscissa: float | None = None


def _propagator(m: np.ndarray, step: float) -> np.ndarray:
    arg = float(np.linalg.norm(m, 1)) * step
    if arg > MAX_EXP_ARG:
        raise ValidationError(
            f"step {step:g} too large: |M h|_1 = {arg:.3g} exceeds {MAX_EXP_ARG:g}"
        )
    return linalg.expm(m * step)


def simulate(
    sys: StableSystem,
    kind: str = "impulse",
    horizon: float | None = None,
    step: float | None = None,
    *,
    omega: float | None = None,
    column: int = 0,
    inputs=None,
) -> Trajectory:
    """Integrate ``x' = A x + B u`` from rest on a uniform grid.

    ``kind`` is ``"impulse"`` (``x(0) = B e_column``), ``"sinusoid"``
    (``u_column(t) = sin(omega t)``) or ``"custom"`` (``inputs`` sampled on
    the grid, shape ``(steps + 1, m)``, held constant over each step).
    """
    a, b, c = sys.a_matrix, sys.b_matrix, sys.c_matrix
    n, m = b.shape
    scale = abs(sys.spectral_abscissa)
    horizon = 10.0 / scale if horizon is None else float(horizon)
    step = horizon / 1000.0 if step is None else float(step)
    if step <= 0 or horizon < 10 * step:
        raise ValidationError(f"need step > 0 and horizon >= 10 * step, got {step}, {horizon}")
    if not 0 <= column < m:
        raise ValidationError(f"input column {column} outside [0, {m})")
    steps = int(round(horizon / step))
    times = step * np.arange(steps + 1)
    x = np.zeros((steps + 1, n))

    if kind == "impulse":
        phi = _propagator(a, step)
        x[0] = b[:, column]
        for k in range(steps):
            x[k + 1] = phi @ x[k]
    elif kind == "sinusoid":
        if omega is None or omega <= 0:
            raise ValidationError("sinusoid input needs omega > 0")
        # state (x, sin wt, cos wt)
        aug = np.zeros((n + 2, n + 2))
        aug[:n, :n] = a
        aug[:n, n] = b[:, column]
        aug[n, n + 1] = omega
        aug[n + 1, n] = -omega
        phi = _propagator(aug, step)
        z = np.zeros(n + 2)
        z[n + 1] = 1.0
        for k in range(steps):
            z = phi @ z
            x[k + 1] = z[:n]
    elif kind == "custom":
        u = np.asarray(inputs, dtype=float)
        if u.shape != (steps + 1, m):
            raise ValidationError(f"custom inputs must have shape {(steps + 1, m)}, got {u.shape}")
        aug = np.zeros((n + m, n + m))
        aug[:n, :n] = a
        aug[:n, n:] = b
        big = _propagator(aug, step)
        phi, gamma = big[:n, :n], big[:n, n:]
        for k in range(steps):
            x[k + 1] = phi @ x[k] + gamma @ u[k]
    else:
        raise ValidationError(f"unknown input kind {kind!r}")
    return Trajectory(times, x, x @ c.T, kind, omega, column, sys.spectral_abscissa)


def steady_state_extract(traj: Trajectory, omega: float, output: int = 0) -> tuple[float, float]:
    """Amplitude and phase (degrees) of ``y_output`` over the last four periods.

    Fits ``p sin(wt) + q cos(wt)``; the phase is ``atan2(q, p)``.
    """
    period = 2 * np.pi / omega
    t = traj.times
    needed = 4 * period
    if traj.spectral_abscissa is not None:
        needed += 5.0 / abs(traj.spectral_abscissa)
    if t[-1] - t[0] < needed * (1 - 1e-9):
        raise ValidationError(
            f"horizon {t[-1] - t[0]:.4g} too short; need {needed:.4g} (5 time constants + 4 periods)"
        )
    window = t >= t[-1] - 4 * period
    design = np.column_stack([np.sin(omega * t[window]), np.cos(omega * t[window])])
    (p, q), *_ = np.linalg.lstsq(design, traj.outputs[window, output], rcond=None)
    return float(np.hypot(p, q)), float(np.degrees(np.arctan2(q, p)))


def impulse_energy(sys: StableSystem, step: float | None = None, tail_tol: float = 1e-8) -> float:
    """``sum over inputs of integral |y(t)|^2 dt`` for unit impulses, by Simpson's rule.

    The horizon starts at ``10/|a|`` and doubles until ``|e^{AT}|_2 < tail_tol``.
    """
    a = sys.a_matrix
    scale = abs(sys.spectral_abscissa)
    radius = max(float(np.max(np.abs(np.linalg.eigvals(a)))), scale)
    step = 0.02 / radius if step is None else float(step)
    horizon = 10.0 / scale
    while np.linalg.norm(linalg.expm(a * horizon), 2) >= tail_tol:
        horizon *= 2.0
    steps = int(np.ceil(horizon / step / 2.0)) * 2
    step = horizon / steps
    total = 0.0
    for col in range(sys.b_matrix.shape[1]):
        traj = simulate(sys, "impulse", horizon, step, column=col)
        total += integrate.simpson(np.sum(traj.outputs**2, axis=1), x=traj.times)
    return float(total)

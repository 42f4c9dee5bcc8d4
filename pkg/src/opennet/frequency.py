"""Transfer functions, Bode sweeps and DC gains on the imaginary axis."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate, linalg
from scipy.linalg import lapack

from opennet.errors import ResolventError, ValidationError
from opennet.network import UNREACHABLE, NetworkSpec, StableSystem, shortest_unweighted_path

MAX_RESOLVENT_CONDITION = 1e12
HALF_POWER_DB = 20.0 * np.log10(np.sqrt(2.0))
DEFAULT_POINTS = 400
COFACTOR_MAX_N = 64


def _resolvent_solve(a: np.ndarray, s: complex, rhs: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    m = s * np.eye(n, dtype=complex) - a
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(m, check_finite=False)
    rcond, _ = lapack.zgecon(lu, np.linalg.norm(m, 1), norm="1")
    if rcond * MAX_RESOLVENT_CONDITION < 1.0:
        raise ResolventError(f"sI - A is near singular at s = {s} (rcond {rcond:.2e})")
    return linalg.lu_solve((lu, piv), rhs.astype(complex), check_finite=False)


def transfer_function(sys: StableSystem, s: complex) -> np.ndarray:
    """``G(s) = C (sI - A)^{-1} B`` as a p x m complex matrix."""
    x = _resolvent_solve(sys.a_matrix, complex(s), sys.b_matrix)
    return sys.c_matrix @ x


def _siso(a: np.ndarray, src: int, dst: int, omegas: np.ndarray) -> np.ndarray:
    e = np.zeros(a.shape[0])
    e[src] = 1.0
    return np.array([_resolvent_solve(a, 1j * w, e)[dst] for w in omegas])


def _reachable(a: np.ndarray, src: int, dst: int) -> bool:
    pattern = a != 0
    np.fill_diagonal(pattern, False)
    seen = {src}
    stack = [src]
    while stack:
        j = stack.pop()
        for i in np.flatnonzero(pattern[:, j]):
            if i not in seen:
                seen.add(int(i))
                stack.append(int(i))
    return dst in seen


def _top_decade_fit(omegas, magnitude_db):
    """Least-squares line ``mag = intercept + slope * log10(w)`` over the last decade."""
    top = omegas >= omegas[-1] / 10.0
    if top.sum() < 2:
        raise ValidationError("sweep has fewer than two samples in its top decade")
    slope, intercept = np.polyfit(np.log10(omegas[top]), magnitude_db[top], 1)
    return float(slope), float(intercept)


class DCGain(NamedTuple):
    gain_db: float
    phase_deg: float
    value: float


@dataclass(frozen=True)
class BodeSweep:
    """Magnitude and unwrapped phase of one input-output pair.

    ``cornering_omega`` is the break frequency where the DC plateau meets the
    fitted high-frequency asymptote; ``half_power_omega`` is the first
    frequency at which the gain has fallen 3 dB below DC (``None`` when the
    sweep never gets there).
    """

    pair: tuple[int, int]
    omegas: np.ndarray = field(repr=False)
    magnitude_db: np.ndarray = field(repr=False)
    phase_deg: np.ndarray = field(repr=False)
    cornering_omega: float
    half_power_omega: float | None
    dc_gain_db: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class AsymptoticPrediction:
    d: int
    predicted_slope_db_per_decade: int
    predicted_final_phase_deg: int
    measured_slope: float
    measured_final_phase: float
    tolerance: float = 0.05

    @property
    def slope_ok(self) -> bool:
        p = self.predicted_slope_db_per_decade
        return abs(self.measured_slope - p) <= self.tolerance * abs(p)

    @property
    def phase_ok(self) -> bool:
        p = self.predicted_final_phase_deg
        return abs(self.measured_final_phase - p) <= self.tolerance * abs(p)

    @property
    def passed(self) -> bool:
        return self.slope_ok and self.phase_ok


def dc_gain(sys: StableSystem, pair: tuple[int, int]) -> DCGain:
    """Low-frequency gain from node ``pair[0]`` to node ``pair[1]``.

    Reads ``[A^{-1}]_{ji}`` off one linear solve; ``G(0) = -[A^{-1}]_{ji}``.
    """
    i, j = pair
    e = np.zeros(sys.n_states)
    e[i] = 1.0
    value = float(np.linalg.solve(sys.a_matrix, e)[j])
    with np.errstate(divide="ignore"):
        gain = float(20.0 * np.log10(abs(value)))
    phase = 180.0 if -value < 0 else 0.0
    return DCGain(gain, phase, value)


def cofactor_dc_gain(a, pair: tuple[int, int]) -> float:
    """``[A^{-1}]_{ji}`` through the cofactor of row ``i``, column ``j`` over ``det(A)``.

    Verification route only; refused above 64 states.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n > COFACTOR_MAX_N:
        raise ValidationError(f"cofactor route limited to N <= {COFACTOR_MAX_N}, got {n}")
    i, j = pair
    sign_a, log_a = np.linalg.slogdet(a)
    if sign_a == 0:
        raise ValidationError("matrix is singular")
    if n == 1:
        return float(1.0 / a[0, 0])
    minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
    sign_m, log_m = np.linalg.slogdet(minor)
    if sign_m == 0:
        return 0.0
    return float((-1) ** (i + j) * sign_m * sign_a * np.exp(log_m - log_a))


def bode_sweep(
    sys: StableSystem,
    pair: tuple[int, int],
    omega_min: float | None = None,
    omega_max: float | None = None,
    points: int = DEFAULT_POINTS,
) -> BodeSweep:
    scale = abs(sys.spectral_abscissa)
    omega_min = 1e-3 * scale if omega_min is None else float(omega_min)
    omega_max = 1e4 * scale if omega_max is None else float(omega_max)
    if not 0 < omega_min < omega_max:
        raise ValidationError(f"need 0 < omega_min < omega_max, got {omega_min}, {omega_max}")
    if points < 2:
        raise ValidationError(f"need at least 2 points, got {points}")
    i, j = pair
    a = sys.a_matrix
    notes = ()
    if i != j and not _reachable(a, i, j):
        notes = (f"no directed path from node {i} to node {j}",)

    omegas = np.logspace(np.log10(omega_min), np.log10(omega_max), points)
    g = _siso(a, i, j, omegas)
    with np.errstate(divide="ignore"):
        mag = 20.0 * np.log10(np.abs(g))
    phase = np.unwrap(np.degrees(np.angle(g)), period=360.0)
    dc = dc_gain(sys, pair).gain_db

    corner = float("nan")
    if np.isfinite(dc) and np.all(np.isfinite(mag)):
        slope, intercept = _top_decade_fit(omegas, mag)
        if slope < 0:
            corner = float(10.0 ** ((dc - intercept) / slope))

    half_power = None
    target = dc - HALF_POWER_DB
    below = np.flatnonzero(mag <= target)
    if np.isfinite(dc) and below.size and below[0] > 0:
        k = below[0]

        def excess(w):
            return 20.0 * np.log10(abs(_siso(a, i, j, np.array([w]))[0])) - target

        half_power = float(
            10.0 ** _bisect(lambda u: excess(10.0**u), np.log10(omegas[k - 1]), np.log10(omegas[k]))
        )
    return BodeSweep((i, j), omegas, mag, phase, corner, half_power, dc, notes)


def _bisect(f, lo, hi, iters=60):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def asymptotic_prediction(
    sys: StableSystem, spec: NetworkSpec, pair: tuple[int, int], sweep: BodeSweep
) -> AsymptoticPrediction:
    """Compare the measured high-frequency slope and final phase with ``-20(d+1)``, ``-90(d+1)``.

    ``d`` is the unweighted shortest path length; unreachable pairs are refused.
    """
    i, j = pair
    d = shortest_unweighted_path(spec, i, j)
    if d == UNREACHABLE:
        raise ValidationError(f"node {j} is not reachable from node {i}; no asymptote to predict")
    if sweep.omegas[-1] < 100.0 * abs(sys.spectral_abscissa):
        raise ValidationError("sweep must extend to at least 100 |a| for an asymptotic reading")
    slope, _ = _top_decade_fit(sweep.omegas, sweep.magnitude_db)
    return AsymptoticPrediction(
        d=d,
        predicted_slope_db_per_decade=-20 * (d + 1),
        predicted_final_phase_deg=-90 * (d + 1),
        measured_slope=slope,
        measured_final_phase=float(sweep.phase_deg[-1]),
    )


def frequency_h2_squared(sys: StableSystem, points: int = 4001) -> float:
    """H2^2 as ``(1/pi) * integral_0^inf |G(jw)|_F^2 dw``.

    Simpson's rule in ``log w`` between ``1e-4 |a|`` and ``1e4`` times the
    spectral radius, plus a flat low-frequency strip and a power-law tail.
    """
    a = sys.a_matrix
    radius = max(float(np.max(np.abs(np.linalg.eigvals(a)))), abs(sys.spectral_abscissa))
    lo, hi = 1e-4 * abs(sys.spectral_abscissa), 1e4 * radius
    u = np.linspace(np.log(lo), np.log(hi), points)
    w = np.exp(u)
    f = np.array([np.sum(np.abs(transfer_function(sys, 1j * x)) ** 2) for x in w])
    body = integrate.simpson(f * w, x=u)
    head = f[0] * lo
    q = -(np.log(f[-1]) - np.log(f[-2])) / (u[-1] - u[-2])
    tail = f[-1] * hi / (q - 1.0)
    return float((head + body + tail) / np.pi)

"""Hot numeric kernels with numba-jitted and pure-numpy twin implementations.

The jitted path is used when numba imports cleanly; set TELEOPSIM_PURE_NUMPY=1
to force the numpy/scipy path (useful on platforms without an LLVM toolchain
and for A/B timing — see benchmarks/bench_kernels.py). Both paths compute the
same two-pass formulas, so results agree to float rounding.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.signal import lfilter

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("TELEOPSIM_PURE_NUMPY", "0") != "1"


# ---------------------------------------------------------------------------
# Normalized cross-correlation sweep (steering-lag estimation)
# ---------------------------------------------------------------------------

def _ncc_sweep_np(u: np.ndarray, theta: np.ndarray, max_lag: int) -> np.ndarray:
    n = u.shape[0]
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        a = u[: n - k]
        b = theta[k:]
        a = a - a.mean()
        b = b - b.mean()
        denom = math.sqrt(float(a @ a) * float(b @ b))
        out[k] = float(a @ b) / denom if denom > 0.0 else -2.0
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _ncc_sweep_nb(u, theta, max_lag):  # pragma: no cover - jitted
        n = u.shape[0]
        out = np.empty(max_lag + 1)
        for k in range(max_lag + 1):
            m = n - k
            mu_a = 0.0
            mu_b = 0.0
            for i in range(m):
                mu_a += u[i]
                mu_b += theta[i + k]
            mu_a /= m
            mu_b /= m
            num = 0.0
            ss_a = 0.0
            ss_b = 0.0
            for i in range(m):
                da = u[i] - mu_a
                db = theta[i + k] - mu_b
                num += da * db
                ss_a += da * da
                ss_b += db * db
            denom = math.sqrt(ss_a * ss_b)
            out[k] = num / denom if denom > 0.0 else -2.0
        return out


def ncc_sweep(u: np.ndarray, theta: np.ndarray, max_lag: int) -> np.ndarray:
    """Pearson correlation of u[:n-k] against theta[k:] for k = 0..max_lag.

    Windows are mean-removed per lag, so amplitude and offset of either
    series never change the argmax. Degenerate (constant) windows score -2
    so they can never win the peak search.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    if u.shape != theta.shape or u.ndim != 1:
        raise ValueError("series must be 1-d and equal length")
    if not 0 <= max_lag < u.shape[0] - 1:
        raise ValueError("max_lag must be in [0, len(series) - 2]")
    if USE_NUMBA:
        return _ncc_sweep_nb(u, theta, max_lag)
    return _ncc_sweep_np(u, theta, max_lag)


# ---------------------------------------------------------------------------
# First-order actuator response rollout
# ---------------------------------------------------------------------------

def _first_order_gain(dt_s: float, tau_s: float, method: str) -> float:
    if dt_s <= 0 or tau_s <= 0:
        raise ValueError("dt_s and tau_s must be positive")
    if method == "euler":
        return dt_s / tau_s
    if method == "exact":
        return 1.0 - math.exp(-dt_s / tau_s)
    raise ValueError(f"unknown method {method!r}")


def _first_order_np(u: np.ndarray, gain: float, theta0: float) -> np.ndarray:
    if gain <= 1.0:
        b = np.array([gain])
        a = np.array([1.0, -(1.0 - gain)])
        zi = np.array([(1.0 - gain) * theta0])
        out, _ = lfilter(b, a, u, zi=zi)
        # The clamp is inactive whenever the linear solution stays in range,
        # which is always true for normalized inputs; otherwise re-run with
        # the clamp applied each step.
        if np.all(np.abs(out) <= 1.0):
            return out
    out = np.empty_like(u)
    theta = theta0
    for i in range(u.shape[0]):
        theta = theta + gain * (u[i] - theta)
        theta = min(1.0, max(-1.0, theta))
        out[i] = theta
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _first_order_nb(u, gain, theta0):  # pragma: no cover - jitted
        out = np.empty_like(u)
        theta = theta0
        for i in range(u.shape[0]):
            theta = theta + gain * (u[i] - theta)
            if theta > 1.0:
                theta = 1.0
            elif theta < -1.0:
                theta = -1.0
            out[i] = theta
        return out


def first_order_response(
    u: np.ndarray,
    dt_s: float,
    tau_s: float,
    theta0: float = 0.0,
    method: str = "exact",
) -> np.ndarray:
    """Realized position after each step of a first-order lag driven by u.

    out[i] is the state after consuming u[i]: out[i] = out[i-1] + g*(u[i] -
    out[i-1]) with g = dt/tau (euler) or 1 - exp(-dt/tau) (exact), clamped to
    [-1, 1].
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    gain = _first_order_gain(dt_s, tau_s, method)
    if USE_NUMBA:
        return _first_order_nb(u, gain, float(theta0))
    return _first_order_np(u, gain, float(theta0))


# ---------------------------------------------------------------------------
# Kinematic bicycle rollout
# ---------------------------------------------------------------------------

def _bicycle_np(delta_rad, accel, wheelbase_m, max_speed_mps, drag_per_s,
                dt_s, x0, y0, heading0, v0):
    n = delta_rad.shape[0]
    decay = 1.0 - drag_per_s * dt_s
    v = np.empty(n)
    prev = v0
    # Sequential only where the clamp can bind; otherwise a linear recurrence.
    vi = lfilter(np.array([dt_s]), np.array([1.0, -decay]), accel,
                 zi=np.array([decay * v0]))[0]
    if np.all((vi >= 0.0) & (vi <= max_speed_mps)):
        v = vi
    else:
        for i in range(n):
            prev = prev * decay + accel[i] * dt_s
            prev = min(max_speed_mps, max(0.0, prev))
            v[i] = prev
    v_old = np.concatenate(([v0], v[:-1]))
    omega = v_old * np.tan(delta_rad) / wheelbase_m
    heading = heading0 + dt_s * np.cumsum(omega)
    heading_old = np.concatenate(([heading0], heading[:-1]))
    x = x0 + dt_s * np.cumsum(v_old * np.cos(heading_old))
    y = y0 + dt_s * np.cumsum(v_old * np.sin(heading_old))
    return x, y, heading, v


if _HAVE_NUMBA:

    @njit(cache=True)
    def _bicycle_nb(delta_rad, accel, wheelbase_m, max_speed_mps, drag_per_s,
                    dt_s, x0, y0, heading0, v0):  # pragma: no cover - jitted
        n = delta_rad.shape[0]
        x = np.empty(n)
        y = np.empty(n)
        heading = np.empty(n)
        v = np.empty(n)
        cx, cy, ch, cv = x0, y0, heading0, v0
        decay = 1.0 - drag_per_s * dt_s
        for i in range(n):
            nh = ch + cv * math.tan(delta_rad[i]) / wheelbase_m * dt_s
            nx = cx + cv * math.cos(ch) * dt_s
            ny = cy + cv * math.sin(ch) * dt_s
            nv = cv * decay + accel[i] * dt_s
            if nv < 0.0:
                nv = 0.0
            elif nv > max_speed_mps:
                nv = max_speed_mps
            cx, cy, ch, cv = nx, ny, nh, nv
            x[i] = cx
            y[i] = cy
            heading[i] = ch
            v[i] = cv
        return x, y, heading, v


def bicycle_rollout(
    delta_rad: np.ndarray,
    accel_mps2: np.ndarray,
    wheelbase_m: float,
    max_speed_mps: float,
    drag_per_s: float,
    dt_s: float,
    x0: float = 0.0,
    y0: float = 0.0,
    heading0: float = 0.0,
    v0: float = 0.0,
):
    """Batch-integrate the planar bicycle model over per-step steering angles.

    delta_rad[i] and accel_mps2[i] (net longitudinal acceleration before
    drag) apply during step i; returns (x, y, heading, speed) after each
    step. Matches the per-tick explicit-Euler update of the vehicle agent.
    """
    delta_rad = np.ascontiguousarray(delta_rad, dtype=np.float64)
    accel = np.ascontiguousarray(accel_mps2, dtype=np.float64)
    if delta_rad.shape != accel.shape or delta_rad.ndim != 1:
        raise ValueError("delta and accel series must be 1-d and equal length")
    if dt_s <= 0 or wheelbase_m <= 0:
        raise ValueError("dt_s and wheelbase_m must be positive")
    args = (delta_rad, accel, float(wheelbase_m), float(max_speed_mps),
            float(drag_per_s), float(dt_s), float(x0), float(y0),
            float(heading0), float(v0))
    if USE_NUMBA:
        return _bicycle_nb(*args)
    return _bicycle_np(*args)

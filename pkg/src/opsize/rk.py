"""Adaptive Dormand-Prince 5(4) integrator that lands exactly on requested output times."""

from __future__ import annotations

import numpy as np

from .errors import IntegrationError

__all__ = ["dopri5"]

# Butcher tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _initial_step(f, t0, y0, f0, rtol, atol, h_max):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    y1 = y0 + h0 * f0
    d2 = np.max(np.abs(f(t0 + h0, y1) - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, h_max)


def dopri5(f, y0, t_grid, rtol=1e-10, atol=1e-12, h_max=np.inf, max_steps=10_000_000, min_step=1e-14):
    """Integrate ``y' = f(t, y)`` and return the solution at every point of ``t_grid``.

    Steps are clipped so that every grid time is hit exactly; ``h_max`` caps
    the step (stability ceiling for stiff linear problems).

    Returns
    -------
    ndarray of shape ``(len(t_grid),) + y0.shape``
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be non-decreasing")
    y = np.array(y0, dtype=float)
    out = np.empty((t_grid.size,) + y.shape)
    out[0] = y
    t = float(t_grid[0])
    if t_grid.size == 1:
        return out

    k = [None] * 7
    k[0] = f(t, y)
    h = _initial_step(f, t, y, k[0], rtol, atol, h_max)
    steps = 0
    for i in range(1, t_grid.size):
        target = float(t_grid[i])
        while t < target:
            if steps >= max_steps:
                raise IntegrationError(f"step budget {max_steps} exhausted at t={t:.6g}")
            last = h >= target - t
            step = target - t if last else h
            # overflow in a trial step shows up as a non-finite error and is rejected
            with np.errstate(over="ignore", invalid="ignore"):
                for s in range(1, 7):
                    acc = y.copy()
                    for j, a in enumerate(_A[s]):
                        if a:
                            acc += step * a * k[j]
                    k[s] = f(t + _C[s] * step, acc)
                y_new = acc  # stage 7 sits at the 5th-order solution (FSAL)
                err_vec = step * sum(e * kj for e, kj in zip(_E, k) if e)
                scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err = float(np.max(np.abs(err_vec) / scale)) if y.size else 0.0
            steps += 1
            if err <= 1.0:
                t = target if last else t + step
                y = y_new
                k[0] = k[6]
                factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** (-1 / 5))
                if not last:
                    h = min(h_max, step * max(_MIN_FACTOR, factor))
                elif factor < 1:
                    h = min(h, step * factor)
            else:
                factor = _MIN_FACTOR if not np.isfinite(err) else max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))
                h = step * factor
                if h < min_step * max(1.0, abs(t)):
                    raise IntegrationError(
                        f"step size underflow at t={t:.6g} (h={h:.3e}, error ratio {err:.3e})"
                    )
        out[i] = y
    return out

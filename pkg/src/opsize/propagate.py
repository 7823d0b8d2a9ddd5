"""Propagation of size distributions from the single-fermion initial state."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ResourceError, SpecError
from .generator import Generator, apply, norm_inf, to_dense
from .model import ModelSpec
from .rk import dopri5

__all__ = [
    "EXPM_CAP",
    "SizeDistribution",
    "Trajectory",
    "default_grid",
    "evolve_expm",
    "evolve_ode",
    "generating_function",
    "initial_distribution",
    "moments",
]

EXPM_CAP = 2000
DEFAULT_POINTS = 200


@dataclass(frozen=True)
class SizeDistribution:
    weights: np.ndarray
    time: float

    @property
    def n_fermions(self) -> int:
        return self.weights.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.weights.size) @ self.weights)

    @property
    def norm(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class Trajectory:
    """Distributions on a time grid plus their moments.

    ``weights`` holds the clipped distributions row by row; ``min_raw_weight``
    records the most negative entry seen before clipping at each time.
    """

    spec: ModelSpec
    times: np.ndarray
    weights: np.ndarray
    min_raw_weight: np.ndarray = field(repr=False)

    @property
    def distributions(self) -> list[SizeDistribution]:
        return [SizeDistribution(w, float(t)) for t, w in zip(self.times, self.weights)]

    @property
    def mean_size(self) -> np.ndarray:
        return moments(self)["mean"]

    @property
    def normalization(self) -> np.ndarray:
        return moments(self)["norm"]

    @property
    def variance(self) -> np.ndarray:
        return moments(self)["variance"]

    def at(self, index: int) -> SizeDistribution:
        return SizeDistribution(self.weights[index], float(self.times[index]))


def initial_distribution(n_fermions: int) -> np.ndarray:
    """``delta_{n,1}``: a single Majorana fermion."""
    p = np.zeros(n_fermions + 1)
    p[min(1, n_fermions)] = 1.0
    return p


def default_grid(spec: ModelSpec, t_max: float | None = None, n_points: int = DEFAULT_POINTS) -> np.ndarray:
    """Uniform grid on ``[0, t_max]``; ``t_max`` defaults to ``5 / max rate`` (1 when all rates vanish)."""
    if t_max is None:
        t_max = 5.0 / spec.max_rate if spec.max_rate > 0 else 1.0
    if n_points < 1:
        raise SpecError("n_points must be >= 1")
    return np.linspace(0.0, float(t_max), int(n_points))


def _check_grid(t_grid) -> np.ndarray:
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise SpecError("time grid must be a non-empty 1-d sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise SpecError("time grid must be strictly increasing and start at t >= 0")
    return t_grid


def _start(g: Generator, p0) -> np.ndarray:
    if p0 is None:
        return initial_distribution(g.n_fermions)
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (g.dim,):
        raise SpecError(f"initial vector has shape {p0.shape}, expected ({g.dim},)")
    return p0.copy()


def _trajectory(g: Generator, times, raw) -> Trajectory:
    raw = np.asarray(raw, dtype=float)
    min_raw = raw.min(axis=1)
    weights = np.where(raw < 0, 0.0, raw)
    weights.setflags(write=False)
    return Trajectory(spec=g.spec, times=times, weights=weights, min_raw_weight=min_raw)


def evolve_expm(g: Generator, t_grid, p0=None, max_n: int = EXPM_CAP) -> Trajectory:
    """Reference propagator ``P(t) = expm(G t) P(0)`` on the dense generator.

    Uses scaling and squaring with a Pade approximant. Propagators for
    repeated grid increments are computed once and reused, so a uniform grid
    costs a single matrix exponential.
    """
    if g.n_fermions > max_n:
        raise ResourceError(f"dense expm capped at N={max_n} (got N={g.n_fermions}); use evolve_ode")
    t_grid = _check_grid(t_grid)
    dense = to_dense(g, max_n=max_n)
    p = _start(g, p0)
    cache: dict[float, np.ndarray] = {}
    common = float(np.diff(t_grid).mean()) if _is_uniform(t_grid) else None
    raw = np.empty((t_grid.size, g.dim))
    t_prev = 0.0
    for i, t in enumerate(t_grid):
        dt = float(t - t_prev)
        if dt != 0.0:
            if common is not None and abs(dt - common) <= 1e-12 * common:
                dt = common
            prop = cache.get(dt)
            if prop is None:
                prop = scipy.linalg.expm(dense * dt)
                cache[dt] = prop
            p = prop @ p
        raw[i] = p
        t_prev = t
    return _trajectory(g, t_grid, raw)


def _is_uniform(t_grid) -> bool:
    if t_grid.size < 3:
        return False
    steps = np.diff(t_grid)
    return bool(np.allclose(steps, steps[0], rtol=1e-12, atol=0.0))


def evolve_ode(g: Generator, t_grid, rel_tol: float = 1e-10, abs_tol: float = 1e-12, p0=None) -> Trajectory:
    """Integrate ``dP/dt = G P`` with the adaptive Dormand-Prince pair on the banded generator.

    The step is capped at ``0.5 / ||G||_inf`` to stay inside the explicit
    stability region (rates grow linearly with N).
    """
    t_grid = _check_grid(t_grid)
    p = _start(g, p0)
    norm = norm_inf(g)
    h_max = 0.5 / norm if norm > 0 else np.inf
    grid = t_grid if t_grid[0] == 0.0 else np.concatenate(([0.0], t_grid))
    raw = dopri5(lambda _t, y: apply(g, y), p, grid, rtol=rel_tol, atol=abs_tol, h_max=h_max)
    if grid is not t_grid:
        raw = raw[1:]
    return _trajectory(g, t_grid, raw)


def moments(traj: Trajectory) -> dict[str, np.ndarray]:
    """Mean size, normalization, variance and the normalization-scaled mean, per time point."""
    w = traj.weights
    n = np.arange(w.shape[1], dtype=float)
    norm = w.sum(axis=1)
    mean = w @ n
    second = w @ (n * n)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_normalized = np.where(norm > 0, mean / norm, np.nan)
        variance = np.where(norm > 0, second / norm - mean_normalized**2, np.nan)
    return {"mean": mean, "norm": norm, "variance": variance, "mean_normalized": mean_normalized}


def generating_function(dist, mu: float) -> float:
    """``sum_n exp(-mu n) P(n)`` for ``mu >= 0`` (``mu = inf`` gives ``P(0)``)."""
    if mu < 0:
        raise SpecError("mu must be >= 0")
    weights = dist.weights if isinstance(dist, SizeDistribution) else np.asarray(dist, dtype=float)
    if np.isinf(mu):
        return float(weights[0])
    return float(np.exp(-mu * np.arange(weights.size)) @ weights)

"""Scramblon continuum distribution for model A, definition I, in the scrambling phase.

The continuum variable is the size fraction ``s = n / N``. The distribution is
``r delta(s) + p_reg(s)``; the delta weight is carried as the scalar ``r`` and
never discretised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhaseError, SpecError
from .model import ModelKind, SizeDefinition

__all__ = ["ScramblonParams", "compare_finite_n", "late_time_mean", "p_reg", "time_for_lambda"]


@dataclass(frozen=True)
class ScramblonParams:
    """Couplings, system size and time; ``lambda_scr`` is derived, never passed in."""

    v1: float
    v3: float
    big_n: int
    t: float

    def __post_init__(self):
        if self.v3 <= 0 or self.v1 < 0:
            raise SpecError("need v3 > 0 and v1 >= 0")
        if self.r >= 1:
            raise PhaseError(f"scramblon distribution needs r = v1/v3 < 1, got {self.r}")
        if self.big_n < 1 or self.t < 0:
            raise SpecError("need big_n >= 1 and t >= 0")

    @property
    def r(self) -> float:
        return self.v1 / self.v3

    @property
    def c(self) -> float:
        return self.big_n * (1.0 - self.r) ** 2 / 2.0

    @property
    def lambda_scr(self) -> float:
        return math.exp(4.0 * (self.v3 - self.v1) * self.t) / self.c

    @property
    def edge(self) -> float:
        """Upper end of the support, ``(1 - r) / 2``."""
        return (1.0 - self.r) / 2.0


def time_for_lambda(v1: float, v3: float, big_n: int, lambda_scr: float) -> float:
    """Time at which the scramblon parameter reaches ``lambda_scr``."""
    r = v1 / v3
    c = big_n * (1.0 - r) ** 2 / 2.0
    return math.log(lambda_scr * c) / (4.0 * (v3 - v1))


def p_reg(s, params: ScramblonParams):
    """Regular part of the continuum size density; zero for ``s > (1 - r)/2``.

    The exponent is formed first and the density assembled in log space, so
    the essential zero at the support edge evaluates cleanly.
    """
    s = np.asarray(s, dtype=float)
    r, lam = params.r, params.lambda_scr
    x = r + 2.0 * s - 1.0  # negative on the support
    inside = (s >= 0) & (x < 0)
    xs = np.where(inside, x, -1.0)
    log_density = math.log(2.0 * (1.0 - r) ** 2) + 2.0 * s / (lam * xs) - math.log(lam) - 2.0 * np.log(-xs)
    return np.where(inside, np.exp(log_density), 0.0)


def late_time_mean(r: float) -> float:
    """Long-time mean of ``s`` from the two-delta limit ``r delta(s) + (1-r) delta(s - (1-r)/2)``."""
    return (1.0 - r) ** 2 / 2.0


def compare_finite_n(traj, index: int | None = None, margin: float | None = None) -> dict:
    """Compare a model-A definition-I trajectory with the scramblon continuum.

    For each time point (or only ``index``) the finite-N distribution is
    rescaled to ``N P(sN)`` and compared with :func:`p_reg` on
    ``[margin, (1 - r)/2 - margin]`` (default ``margin = 3/N``).
    Reported per time: sup-norm and integrated absolute distance (Riemann sum
    with ``ds = 1/N``), the weight at ``s = 0`` against ``r``, and ``mean/N``.
    """
    spec = traj.spec
    if spec.kind is not ModelKind.A or spec.definition is not SizeDefinition.I:
        raise PhaseError("scramblon comparison needs model A under definition I")
    N = spec.n_fermions
    margin = 3.0 / N if margin is None else margin
    s = np.arange(N + 1) / N
    indices = range(len(traj.times)) if index is None else [index]
    rows = []
    for i in indices:
        params = ScramblonParams(spec.v1, spec.v3, N, float(traj.times[i]))
        window = (s >= margin) & (s <= params.edge - margin)
        density = N * traj.weights[i]
        ref = p_reg(s, params)
        diff = np.abs(density[window] - ref[window])
        rows.append(
            {
                "t": float(traj.times[i]),
                "lambda_scr": params.lambda_scr,
                "sup_distance": float(diff.max()) if diff.size else 0.0,
                "l1_distance": float(diff.sum() / N),
                "zero_weight": float(traj.weights[i][0]),
                "r": params.r,
                "mean_fraction": float(np.arange(N + 1) @ traj.weights[i] / N),
                "late_time_mean_fraction": late_time_mean(params.r),
            }
        )
    return {"n_fermions": N, "margin": margin, "r": spec.v1 / spec.v3, "points": rows}

"""Spectrum of the size >= 1 block of the generator and the slowest decay rate."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import linregress

from .errors import NumericalError, ResourceError
from .generator import Generator, assemble, norm_inf, to_dense
from .model import ModelSpec

__all__ = [
    "DENSE_EIG_CAP",
    "GapRow",
    "SpectralReport",
    "eigen_spectrum",
    "fit_log_gap",
    "gap_sweep",
    "restricted_block",
    "spectral_report",
]

DENSE_EIG_CAP = 400
FLOOR_FACTOR = 1e3


@dataclass(frozen=True)
class SpectralReport:
    spec: ModelSpec
    eigenvalues: np.ndarray
    lambda_gap: float
    reliable: bool


@dataclass(frozen=True)
class GapRow:
    n_fermions: int
    lambda_gap: float
    reliable: bool


def restricted_block(g: Generator) -> np.ndarray:
    """Rows and columns ``1..N`` of ``G``.

    Column 0 of ``G`` vanishes, so ``G`` is block triangular and its spectrum
    is ``{0}`` together with the spectrum of this block.
    """
    return to_dense(g)[1:, 1:]


def eigen_spectrum(block, max_n: int = DENSE_EIG_CAP) -> np.ndarray:
    """Eigenvalues of a dense non-symmetric matrix, sorted by descending real part.

    The matrix is balanced by a diagonal similarity before the Hessenberg/QR
    eigensolve (LAPACK ``geev``).
    """
    block = np.asarray(block, dtype=float)
    if block.shape[0] > max_n:
        raise ResourceError(f"dense eigensolve capped at {max_n}x{max_n}, got {block.shape[0]}")
    if block.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        # an all-zero matrix trips a harmless cast warning inside the balancer
        with np.errstate(invalid="ignore"):
            balanced, _ = scipy.linalg.matrix_balance(block, permute=False)
        values = scipy.linalg.eigvals(balanced, overwrite_a=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolve failed: {exc}", matrix=block.copy()) from exc
    order = np.lexsort((-values.imag, -values.real))
    return values[order]


def precision_floor(g: Generator) -> float:
    return FLOOR_FACTOR * np.finfo(float).eps * norm_inf(g)


def spectral_report(spec: ModelSpec) -> SpectralReport:
    g = assemble(spec)
    values = eigen_spectrum(restricted_block(g))
    gap = float(values[0].real) if values.size else 0.0
    return SpectralReport(spec=spec, eigenvalues=values, lambda_gap=gap, reliable=bool(abs(gap) >= precision_floor(g)))


def gap_sweep(kind, definition, v1: float, v_int: float, n_list, workers: int = 1) -> list[GapRow]:
    """Largest real eigenvalue of the restricted block for each ``N`` in ``n_list``.

    ``reliable`` is False where ``|lambda_gap|`` is below ``1e3 * eps * ||G||_inf``.
    """

    def one(n):
        report = spectral_report(ModelSpec.create(kind, definition, v1, v_int, n))
        return GapRow(int(n), report.lambda_gap, report.reliable)

    n_list = list(n_list)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, n_list))
    return [one(n) for n in n_list]


def fit_log_gap(rows) -> dict:
    """Least-squares line through ``log|lambda_gap|`` against ``N`` over the reliable rows."""
    usable = [r for r in rows if r.reliable and r.lambda_gap != 0]
    if len(usable) < 3:
        return {"slope": float("nan"), "intercept": float("nan"), "r_squared": float("nan"), "points": len(usable)}
    x = np.array([r.n_fermions for r in usable], dtype=float)
    y = np.log(np.abs([r.lambda_gap for r in usable]))
    fit = linregress(x, y)
    return {
        "slope": float(fit.slope),
        "intercept": float(fit.intercept),
        "r_squared": float(fit.rvalue**2),
        "points": len(usable),
    }

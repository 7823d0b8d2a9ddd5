"""Banded (N+1)x(N+1) size-transition generator.

Storage is one vector per supported offset: ``bands[d][n] = G[n, n + d]``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError, SpecError
from .model import ModelSpec, SizeDefinition, coefficient_band, supported_offsets

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DEFAULT_MAX_ENTRIES",
    "Generator",
    "apply",
    "assemble",
    "column_sums",
    "dump_csv",
    "norm_inf",
    "to_dense",
]

DEFAULT_MAX_ENTRIES = 10**12
DEFAULT_DENSE_CAP = 4000
CONSERVATION_RTOL = 1e-12


@dataclass(frozen=True)
class Generator:
    spec: ModelSpec
    n_fermions: int
    band_offsets: tuple[int, ...]
    bands: dict[int, np.ndarray] = field(repr=False)
    leading_order: bool = False

    @property
    def dim(self) -> int:
        return self.n_fermions + 1

    def __matmul__(self, p):
        return apply(self, p)


def assemble(
    spec: ModelSpec,
    *,
    leading_order: bool = False,
    max_entries: int = DEFAULT_MAX_ENTRIES,
    check: bool = True,
) -> Generator:
    """Assemble ``G[n, n + dn] = C_dn(n)`` for ``spec``.

    With ``leading_order=True`` the large-N coefficient tables are used on the
    truncated range instead of the exact ones.

    Raises
    ------
    ResourceError
        If ``(N + 1)**2`` exceeds ``max_entries``.
    SpecError
        If a definition-I generator fails the column-sum conservation check.
    """
    N = spec.n_fermions
    if (N + 1) ** 2 > max_entries:
        raise ResourceError(f"N={N} gives {(N + 1) ** 2} matrix entries, above the cap {max_entries}")
    offsets = tuple(sorted(supported_offsets(spec, leading_order)))
    bands = {}
    for d in offsets:
        band = coefficient_band(spec, d, leading_order)
        band.setflags(write=False)
        bands[d] = band
    g = Generator(spec=spec, n_fermions=N, band_offsets=offsets, bands=bands, leading_order=leading_order)
    if check and not leading_order and spec.definition is SizeDefinition.I:
        sums = column_sums(g)
        scale = max((np.abs(b).max() for b in bands.values()), default=0.0)
        worst = float(np.abs(sums).max())
        if worst > CONSERVATION_RTOL * max(scale, 1.0):
            raise SpecError(f"definition-I generator violates conservation: max |column sum| = {worst:.3e}")
    return g


def apply(g: Generator, p) -> np.ndarray:
    """Return ``G @ p`` in O(N * #offsets)."""
    p = np.asarray(p)
    if p.shape[0] != g.dim:
        raise SpecError(f"vector of length {p.shape[0]} does not match generator dimension {g.dim}")
    out = np.zeros(p.shape, dtype=np.result_type(p.dtype, float))
    n = g.dim
    extra = (slice(None),) + (None,) * (p.ndim - 1)
    for d, band in g.bands.items():
        if abs(d) >= n:
            continue
        b = band[extra]
        if d >= 0:
            # rows 0..n-1-d read p[d..n-1]
            out[: n - d] += b[: n - d] * p[d:]
        else:
            out[-d:] += b[-d:] * p[: n + d]
    return out


def column_sums(g: Generator) -> np.ndarray:
    """Column sums of ``G``; zero under definition I, nonpositive under definition II."""
    n = g.dim
    sums = np.zeros(n)
    for d, band in g.bands.items():
        if abs(d) >= n:
            continue
        # column m collects G[m - d, m]
        if d >= 0:
            sums[d:] += band[: n - d]
        else:
            sums[: n + d] += band[-d:]
    return sums


def norm_inf(g: Generator) -> float:
    """Maximum absolute row sum."""
    rows = np.zeros(g.dim)
    for band in g.bands.values():
        rows += np.abs(band)
    return float(rows.max()) if rows.size else 0.0


def to_dense(g: Generator, max_n: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    if g.n_fermions > max_n:
        raise ResourceError(f"dense materialisation capped at N={max_n}, got N={g.n_fermions}")
    n = g.dim
    dense = np.zeros((n, n))
    rows = np.arange(n)
    for d, band in g.bands.items():
        if abs(d) >= n:
            continue
        lo, hi = max(0, -d), min(n, n - d)
        dense[rows[lo:hi], rows[lo:hi] + d] = band[lo:hi]
    return dense


def dump_csv(g: Generator, fh=None) -> str | None:
    """Write nonzero entries as ``row,col,value``; return the text when ``fh`` is None."""
    target = io.StringIO() if fh is None else fh
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(["row", "col", "value"])
    entries = []
    for d, band in g.bands.items():
        for row in np.flatnonzero(band):
            entries.append((int(row), int(row) + d, float(band[row])))
    for row, col, value in sorted(entries):
        writer.writerow([row, col, repr(value)])
    if fh is None:
        return target.getvalue()
    return None

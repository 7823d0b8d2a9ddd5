"""Independent reconstruction of the size generator from the spin-N/2 Liouvillian.

The four-copy fermion bilinears ``chi^{ab} = sum_j chi_j^a chi_j^b`` are
replaced by spin-N/2 generators and the bath bilinears by their expectation
values, which differ between the two size definitions. The result is compared
with the coefficient tables in a phase-gauge-aware way (diagonal, entry
magnitudes, spectrum).

Conventions fixed here:

* the pair sums run over unordered copy pairs ``a < b``;
* the cubic polynomial of the three-system-fermion term is
  ``chi^3 + (3N - 2) chi``, the value of ``6 e_3`` of ``N`` commuting
  bilinears that square to -1;
* distributions evolve under the transpose of the Liouvillian matrix in the
  ``|P_n)`` basis, i.e. the operator acts on the final (bra) state.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import linear_sum_assignment

from .generator import Generator, assemble, to_dense
from .model import ModelKind, ModelSpec, SizeDefinition

__all__ = [
    "PHASE_CONVENTIONS",
    "SpinRep",
    "build_liouvillian_spin",
    "build_spin_rep",
    "compare_with_table",
    "find_diagonal_gauge",
    "match_spectra",
    "spin_generator",
]

PHASE_CONVENTIONS = ("standard", "alternating", "quarter")

# unordered copy pair -> (spin axis, sign) with chi^{ab} = sign * 2i * L_axis
_PAIRS = {
    (1, 2): ("z", 1),
    (3, 4): ("z", -1),
    (1, 4): ("x", -1),
    (2, 3): ("x", 1),
    (1, 3): ("y", -1),
    (2, 4): ("y", -1),
}
_GAMMA = {(1, 2): 1, (1, 4): 1, (2, 3): 1, (3, 4): 1, (1, 3): -1, (2, 4): -1}

# bath expectation <G>/M per definition
_BATH = {
    SizeDefinition.I: {"x": 0.5, "y": 0.5j, "z": -0.5},
    SizeDefinition.II: {"x": 0.0, "y": 0.0, "z": -0.5},
}


@dataclass(frozen=True)
class SpinRep:
    """Spin-N/2 generators in the unnormalized ``|P_n)`` basis (norms ``binom(N, n)``)."""

    big_n: int
    lx: np.ndarray
    ly: np.ndarray
    lz: np.ndarray
    phase_convention: str

    @property
    def norms(self) -> np.ndarray:
        return np.array([comb(self.big_n, n) for n in range(self.big_n + 1)], dtype=float)

    def normalized(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Generators in the orthonormal basis ``|P_n) / sqrt(binom(N, n))``."""
        root = np.sqrt(self.norms)
        return tuple(root[:, None] * m / root[None, :] for m in (self.lx, self.ly, self.lz))

    def axis(self, name: str) -> np.ndarray:
        return {"x": self.lx, "y": self.ly, "z": self.lz}[name]


def _gauge_phases(n_fermions: int, convention: str) -> np.ndarray:
    n = np.arange(n_fermions + 1)
    if convention == "standard":
        return np.ones(n.size, dtype=complex)
    if convention == "alternating":
        return (-1.0) ** n + 0j
    if convention == "quarter":
        return 1j**n
    raise ValueError(f"unknown phase convention {convention!r}; choose from {PHASE_CONVENTIONS}")


def build_spin_rep(n_fermions: int, phase_convention: str = "standard") -> SpinRep:
    """Spin ``j = N/2`` generators with ``L_z |P_n) = (n - N/2) |P_n)``.

    Ladder operators are built in the orthonormal basis (Condon-Shortley
    phases), a diagonal unitary gauge selected by ``phase_convention`` is
    applied, and the result is conjugated by ``diag(sqrt(binom(N, n)))``.
    """
    N = int(n_fermions)
    j = N / 2.0
    m = np.arange(N + 1) - j
    raise_ = np.zeros((N + 1, N + 1))
    for k in range(N):
        raise_[k + 1, k] = np.sqrt((j - m[k]) * (j + m[k] + 1))
    lower = raise_.T
    lx = (raise_ + lower) / 2.0 + 0j
    ly = (raise_ - lower) / 2.0j
    lz = np.diag(m) + 0j
    u = _gauge_phases(N, phase_convention)
    root = np.sqrt(np.array([comb(N, n) for n in range(N + 1)], dtype=float))

    def to_p_basis(mat):
        gauged = u[:, None] * mat * u.conj()[None, :]
        return gauged * root[None, :] / root[:, None]

    return SpinRep(N, to_p_basis(lx), to_p_basis(ly), to_p_basis(lz), phase_convention)


def build_liouvillian_spin(spec: ModelSpec, rep: SpinRep | None = None) -> np.ndarray:
    """Effective system Liouvillian in the ``|P_n)`` basis after the bath replacement.

    The bath couplings scale as ``1/M`` and the bath expectations as ``M``, so
    only the ratio ``<G>/M`` enters.
    """
    N = spec.n_fermions
    if rep is None:
        rep = build_spin_rep(N)
    if rep.big_n != N:
        raise ValueError("spin representation and spec disagree on N")
    eye = np.eye(N + 1, dtype=complex)
    bath = _BATH[spec.definition]
    chi = {pair: sign * 2j * rep.axis(ax) for pair, (ax, sign) in _PAIRS.items()}
    psi = {pair: sign * 2j * bath[ax] for pair, (ax, sign) in _PAIRS.items()}

    out = -2.0 * N * spec.v1 * eye
    for pair in _PAIRS:
        out -= spec.v1 * psi[pair] * chi[pair]

    if spec.kind is ModelKind.A:
        out -= 4.0 / N**2 * comb(N, 3) * spec.v3 * eye
        for pair in _PAIRS:
            c = chi[pair]
            cubic = c @ c @ c + (3 * N - 2) * c
            out += _GAMMA[pair] * spec.v3 / (3.0 * N**2) * psi[pair] * cubic
    else:
        out -= 12.0 / N**3 * comb(N, 4) * spec.v4 * eye
        for pair in _PAIRS:
            c2 = chi[pair] @ chi[pair]
            quartic = c2 @ c2 - (8 - 6 * N) * c2 + 3 * N * (N - 2) * eye
            out += _GAMMA[pair] * spec.v4 / (4.0 * N**3) * quartic
    return out


def spin_generator(spec: ModelSpec, rep: SpinRep | None = None) -> np.ndarray:
    """Size-distribution generator from the spin construction (bra-side action)."""
    return build_liouvillian_spin(spec, rep).T


def find_diagonal_gauge(a, b, tol: float = 1e-10, atol: float = 1e-12):
    """Diagonal ``d`` with ``a = diag(d) b diag(d)^-1``, or None.

    Phases are propagated from ``d[0] = 1`` along the largest entries of ``b``
    first (a maximum spanning forest), since small entries can carry large
    relative rounding error. The full relation is then checked to
    ``atol + tol * max|entry|``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = a.shape[0]
    # relative to the matrices themselves, so uniformly tiny couplings still link up
    scale = max(np.abs(a).max(), np.abs(b).max())
    weight = np.maximum(np.abs(b), np.abs(b).T)
    np.fill_diagonal(weight, 0.0)
    link = weight > tol * scale
    d = np.full(n, np.nan + 0j)
    for root in range(n):
        if not np.isnan(d[root]):
            continue
        d[root] = 1.0
        heap = [(-weight[root, k], root, k) for k in np.flatnonzero(link[root])]
        heapq.heapify(heap)
        while heap:
            _, i, k = heapq.heappop(heap)
            if not np.isnan(d[k]):
                continue
            if abs(b[i, k]) >= abs(b[k, i]):
                # a[i,k] = d_i / d_k * b[i,k]
                d[k] = d[i] * b[i, k] / a[i, k] if a[i, k] != 0 else np.nan
            else:
                d[k] = d[i] * a[k, i] / b[k, i]
            if np.isnan(d[k]):
                return None
            for m in np.flatnonzero(link[k]):
                if np.isnan(d[m]):
                    heapq.heappush(heap, (-weight[k, m], k, m))
    rebuilt = d[:, None] * b / d[None, :]
    if np.abs(rebuilt - a).max() > atol + tol * scale:
        return None
    return d


def match_spectra(x, y) -> float:
    """Largest distance between two eigenvalue multisets under the best one-to-one pairing."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    cost = np.abs(x[:, None] - y[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max()) if rows.size else 0.0


def compare_with_table(spec: ModelSpec, generator: Generator | None = None, phase_convention: str = "standard") -> dict:
    """Gauge-aware comparison of the spin construction with the coefficient-table generator."""
    table = to_dense(assemble(spec) if generator is None else generator)
    spin = spin_generator(spec, build_spin_rep(spec.n_fermions, phase_convention))
    scale = max(np.abs(table).max(), 1.0)
    ev_table = np.linalg.eigvals(table)
    ev_spin = np.linalg.eigvals(spin)
    spectrum_rel = match_spectra(ev_table, ev_spin) / max(np.abs(ev_table).max(), 1.0)
    diagonal = float(np.abs(np.diag(spin) - np.diag(table)).max() / scale)
    magnitude = float(np.abs(np.abs(spin) - np.abs(table)).max())
    gauge = find_diagonal_gauge(spin, table)
    return {
        "spectrum_rel": spectrum_rel,
        "diagonal_rel": diagonal,
        "magnitude_abs": magnitude,
        "imag_max": float(np.abs(spin.imag).max()) if phase_convention == "standard" else None,
        "gauge": None if gauge is None else gauge,
        "elementwise": bool(np.abs(spin - table).max() <= 1e-10 * scale),
    }

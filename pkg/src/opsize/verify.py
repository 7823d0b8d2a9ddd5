"""Verification suites: spin-oracle equivalence, conservation and parity.

Every check is a named pass/fail record, so a failing run points at the
offending model, definition and size.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .generator import Generator, apply, assemble, column_sums, norm_inf, to_dense
from .io import SCHEMA_VERSION
from .model import ModelKind, ModelSpec, SizeDefinition
from .propagate import evolve_expm
from .spin import build_spin_rep, find_diagonal_gauge, match_spectra, spin_generator

__all__ = ["Check", "Fault", "conservation_suite", "corrupt", "parity_suite", "run_verification", "spin_suite"]

SPECTRUM_RTOL = 1e-8
DIAGONAL_RTOL = 1e-12
MAGNITUDE_ATOL = 1e-10
CONSERVATION_RTOL = 1e-12

# fixed coupling pairs (v1, v_int): generic values plus the pure-hopping and pure-interaction corners
COUPLINGS = ((0.37, 1.3), (1.1, 0.45), (0.0, 0.8), (0.6, 0.0))
CONSERVATION_SIZES = (1, 2, 3, 7, 50, 400)
PARITY_SIZES = (1, 4, 9, 40)


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    passed: bool
    value: float
    tol: float


@dataclass(frozen=True)
class Fault:
    """Multiply the table coefficient band at ``offset`` by ``1 + rel`` (test hook)."""

    offset: int = 0
    rel: float = 1e-3

    @classmethod
    def parse(cls, text: str) -> Fault:
        offset, _, rel = text.partition(":")
        return cls(int(offset), float(rel) if rel else 1e-3)


def corrupt(g: Generator, fault: Fault | None) -> Generator:
    if fault is None or fault.offset not in g.bands:
        return g
    bands = dict(g.bands)
    bad = bands[fault.offset] * (1.0 + fault.rel)
    bad.setflags(write=False)
    bands[fault.offset] = bad
    return replace(g, bands=bands)


def _specs(n: int):
    for kind in ModelKind:
        for definition in SizeDefinition:
            for v1, vi in COUPLINGS:
                yield ModelSpec.create(kind, definition, v1, vi, n)


def _label(spec: ModelSpec) -> str:
    return f"{spec.kind.value}:{spec.definition.name}:N={spec.n_fermions}:v1={spec.v1!r}:vint={spec.v_int!r}"


def spin_suite(n_max: int = 12, fault: Fault | None = None) -> list[Check]:
    """Spin construction against the coefficient tables for ``N = 1..n_max``."""
    checks = []
    for n in range(1, n_max + 1):
        rep = build_spin_rep(n)
        for spec in _specs(n):
            table = to_dense(corrupt(assemble(spec, check=False), fault))
            spin = spin_generator(spec, rep)
            scale = max(np.abs(table).max(), 1.0)
            label = _label(spec)
            ev_scale = max(np.abs(np.linalg.eigvals(table)).max(), 1.0)
            spectrum = match_spectra(np.linalg.eigvals(table), np.linalg.eigvals(spin)) / ev_scale
            diagonal = float(np.abs(np.diag(spin) - np.diag(table)).max()) / scale
            magnitude = float(np.abs(np.abs(spin) - np.abs(table)).max())
            gauge = find_diagonal_gauge(spin, table)
            # column 0 of the generator: the identity string is stationary
            stationary = float(np.abs(spin[:, 0]).max())
            checks += [
                Check(f"spin:{label}:spectrum", "spin", spectrum <= SPECTRUM_RTOL, spectrum, SPECTRUM_RTOL),
                Check(f"spin:{label}:diagonal", "spin", diagonal <= DIAGONAL_RTOL, diagonal, DIAGONAL_RTOL),
                Check(f"spin:{label}:magnitude", "spin", magnitude <= MAGNITUDE_ATOL, magnitude, MAGNITUDE_ATOL),
                Check(f"spin:{label}:gauge", "spin", gauge is not None, 0.0 if gauge is not None else 1.0, 0.0),
                Check(f"spin:{label}:stationary", "spin", stationary <= MAGNITUDE_ATOL, stationary, MAGNITUDE_ATOL),
            ]
    return checks


def conservation_suite(fault: Fault | None = None) -> list[Check]:
    """Definition I: vanishing column sums. Definition II: nonpositive column sums."""
    checks = []
    for n in CONSERVATION_SIZES:
        for spec in _specs(n):
            g = corrupt(assemble(spec, check=False), fault)
            sums = column_sums(g)
            tol = CONSERVATION_RTOL * max(norm_inf(g), 1.0)
            if spec.definition is SizeDefinition.I:
                worst = float(np.abs(sums).max())
                checks.append(Check(f"conservation:{_label(spec)}:column_sums", "conservation", worst <= tol, worst, tol))
            else:
                worst = float(sums.max())
                checks.append(Check(f"conservation:{_label(spec)}:dissipative", "conservation", worst <= tol, worst, tol))
    return checks


def parity_suite(fault: Fault | None = None) -> list[Check]:
    """Definition II: model B keeps odd sizes odd; model A leaves every size fixed."""
    checks = []
    for n in PARITY_SIZES:
        for spec in _specs(n):
            if spec.definition is not SizeDefinition.II:
                continue
            g = corrupt(assemble(spec, check=False), fault)
            dense = to_dense(g)
            rows, cols = np.nonzero(dense)
            if spec.kind is ModelKind.B:
                leak = float(np.abs(dense[(rows - cols) % 2 == 1]).max()) if np.any((rows - cols) % 2) else 0.0
                weights = evolve_expm(g, [0.5 / max(spec.max_rate, 1.0)]).weights[0]
                leak = max(leak, float(weights[0::2].max()))
                name = "odd_sizes_only"
            else:
                leak = float(np.abs(dense - np.diag(np.diag(dense))).max())
                name = "diagonal"
            # the generator applied to delta_{n,1} stays on odd sizes
            image = apply(g, np.eye(g.dim)[min(1, n)])
            leak = max(leak, float(np.abs(image[0::2]).max()))
            checks.append(Check(f"parity:{_label(spec)}:{name}", "parity", leak == 0.0, leak, 0.0))
    return checks


def run_verification(n_max: int = 12, fault: Fault | None = None) -> dict:
    """All suites; ``passed`` is True only if every check passes."""
    checks = spin_suite(n_max, fault) + conservation_suite(fault) + parity_suite(fault)
    failed = [c.name for c in checks if not c.passed]
    return {
        "schema_version": SCHEMA_VERSION,
        "passed": not failed,
        "n_checks": len(checks),
        "n_failed": len(failed),
        "failed": failed,
        "checks": [asdict(c) for c in checks],
    }

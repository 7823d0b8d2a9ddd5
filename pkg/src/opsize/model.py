"""Model parameter space and the exact finite-N size-transition coefficients.

A coefficient ``C_dn(n)`` is the rate at which weight on size ``n + dn``
flows into size ``n``, so that ``dP(n)/dt = sum_dn C_dn(n) P(n + dn)``.

Polynomial factors are evaluated in Python integers and turned into a float by
a single correctly rounded ``int / int`` division before the coupling is
applied; this keeps the tables free of cancellation at large ``N``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import SpecError

__all__ = [
    "ModelKind",
    "ModelSpec",
    "SizeDefinition",
    "coefficient",
    "coefficient_band",
    "coefficient_table",
    "critical_ratio",
    "initial_slope",
    "large_n_critical_ratio",
    "large_n_initial_slope",
    "leading_order_coefficient",
    "raw_coefficient",
    "supported_offsets",
]


class ModelKind(str, enum.Enum):
    """A: hopping + three-system-fermion bath coupling. B: hopping + intra-system four-fermion term."""

    A = "A"
    B = "B"


class SizeDefinition(enum.IntEnum):
    """I counts system fermions in the full system+bath string; II counts them after the bath trace."""

    I = 1
    II = 2

    @classmethod
    def parse(cls, value) -> SizeDefinition:
        if isinstance(value, cls):
            return value
        text = str(value).strip().upper()
        lookup = {"1": cls.I, "I": cls.I, "DEFI": cls.I, "2": cls.II, "II": cls.II, "DEFII": cls.II}
        try:
            return lookup[text]
        except KeyError:
            raise SpecError(f"unknown size definition {value!r}") from None


_OFFSETS = {
    (ModelKind.A, SizeDefinition.I): (-1, 0, 1, 3),
    (ModelKind.B, SizeDefinition.I): (-2, 0, 1, 2),
    (ModelKind.A, SizeDefinition.II): (0,),
    (ModelKind.B, SizeDefinition.II): (-2, 0, 2),
}

_LEADING_OFFSETS = {
    (ModelKind.A, SizeDefinition.I): (-1, 0, 1),
    (ModelKind.B, SizeDefinition.I): (-2, 0, 1),
    (ModelKind.A, SizeDefinition.II): (0,),
    (ModelKind.B, SizeDefinition.II): (-2, 0),
}


@dataclass(frozen=True)
class ModelSpec:
    """Model, size definition, coupling rates and system size.

    Rates are dimensional (1/time). Model A uses ``v3``, model B uses ``v4``;
    the coupling belonging to the other model must stay zero.
    """

    kind: ModelKind
    definition: SizeDefinition
    v1: float
    n_fermions: int
    v3: float = 0.0
    v4: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ModelKind(str(getattr(self.kind, "value", self.kind)).upper()))
        except ValueError:
            raise SpecError(f"unknown model kind {self.kind!r}") from None
        object.__setattr__(self, "definition", SizeDefinition.parse(self.definition))
        for name in ("v1", "v3", "v4"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise SpecError(f"{name} must be finite and nonnegative, got {value!r}")
            object.__setattr__(self, name, value)
        if self.kind is ModelKind.A and self.v4 != 0:
            raise SpecError("model A does not carry a v4 coupling")
        if self.kind is ModelKind.B and self.v3 != 0:
            raise SpecError("model B does not carry a v3 coupling")
        if isinstance(self.n_fermions, bool) or int(self.n_fermions) != self.n_fermions:
            raise SpecError(f"n_fermions must be an integer, got {self.n_fermions!r}")
        object.__setattr__(self, "n_fermions", int(self.n_fermions))
        if self.n_fermions < 1:
            raise SpecError("n_fermions must be >= 1")

    @classmethod
    def create(cls, kind, definition, v1, v_int, n_fermions) -> ModelSpec:
        """Build a spec from the hopping rate and the model's interaction rate."""
        kind = ModelKind(str(getattr(kind, "value", kind)).upper())
        if kind is ModelKind.A:
            return cls(kind, definition, v1, n_fermions, v3=v_int)
        return cls(kind, definition, v1, n_fermions, v4=v_int)

    @property
    def v_int(self) -> float:
        """Interaction rate: ``v3`` for model A, ``v4`` for model B."""
        return self.v3 if self.kind is ModelKind.A else self.v4

    @property
    def offsets(self) -> tuple[int, ...]:
        return _OFFSETS[(self.kind, self.definition)]

    @property
    def max_rate(self) -> float:
        return max(self.v1, self.v3, self.v4)

    def replace(self, **changes) -> ModelSpec:
        fields = dict(
            kind=self.kind,
            definition=self.definition,
            v1=self.v1,
            n_fermions=self.n_fermions,
            v3=self.v3,
            v4=self.v4,
        )
        fields.update(changes)
        return ModelSpec(**fields)


def supported_offsets(spec: ModelSpec, leading_order: bool = False) -> tuple[int, ...]:
    table = _LEADING_OFFSETS if leading_order else _OFFSETS
    return table[(spec.kind, spec.definition)]


def raw_coefficient(spec: ModelSpec, n: int, delta_n: int) -> float:
    """Literal table formula at ``(n, delta_n)`` without range clamping.

    Unsupported offsets give 0.
    """
    n = int(n)
    N = spec.n_fermions
    v1, v3, v4 = spec.v1, spec.v3, spec.v4
    if delta_n not in spec.offsets:
        return 0.0
    if delta_n == 1:
        return 4.0 * v1 * (n + 1)
    if spec.kind is ModelKind.A:
        if delta_n == 0:
            poly = n * (2 + 4 * n * n - 3 * N - 6 * n * N + 3 * N * N)
            return -4.0 * v1 * n - 4.0 * v3 * (poly / (3 * N * N))
        if delta_n == -1:
            return 4.0 * v3 * (((n - 1) * (n - N - 1) * (n - N)) / (N * N))
        # delta_n == 3
        return 4.0 * v3 * (((n + 3) * (n + 2) * (n + 1)) / (3 * N * N))
    if delta_n == 0:
        poly = n * (n - N) * (2 * (2 + n * n) - (3 + 2 * n) * N + N * N)
        return -4.0 * v1 * n + 4.0 * v4 * (poly / N**3)
    if delta_n == 2:
        return 4.0 * v4 * ((-n * (n + 1) * (n + 2) * (2 + n - N)) / N**3)
    # delta_n == -2
    return 4.0 * v4 * ((-(n - 2) * (n - 2 - N) * (n - 1 - N) * (n - N)) / N**3)


def coefficient(spec: ModelSpec, n: int, delta_n: int) -> float:
    """Transition rate ``C_dn(n)`` from size ``n + delta_n`` into size ``n``.

    Returns 0 for unsupported offsets and whenever ``n`` or ``n + delta_n``
    lies outside ``[0, N]``.
    """
    N = spec.n_fermions
    if not (0 <= n <= N and 0 <= n + delta_n <= N):
        return 0.0
    return raw_coefficient(spec, n, delta_n)


def leading_order_coefficient(spec: ModelSpec, n: int, delta_n: int) -> float:
    """Zeroth order in 1/N of the coefficient tables (the large-N master equations).

    Used to propagate the N -> infinity equations on a truncated size range
    ``[0, N]``; weight pushed above ``N`` is lost, so columns near the top of
    the range do not conserve probability.
    """
    N = spec.n_fermions
    if not (0 <= n <= N and 0 <= n + delta_n <= N):
        return 0.0
    if delta_n not in supported_offsets(spec, leading_order=True):
        return 0.0
    v1, vi = spec.v1, spec.v_int
    if delta_n == 0:
        return -4.0 * (v1 + vi) * n
    if delta_n == 1:
        return 4.0 * v1 * (n + 1)
    if delta_n == -1:
        return 4.0 * vi * (n - 1)
    return 4.0 * vi * (n - 2)


def coefficient_band(spec: ModelSpec, delta_n: int, leading_order: bool = False) -> np.ndarray:
    """Vector ``[C_dn(0), ..., C_dn(N)]`` with out-of-range entries zeroed."""
    fn = leading_order_coefficient if leading_order else coefficient
    return np.array([fn(spec, n, delta_n) for n in range(spec.n_fermions + 1)], dtype=float)


def coefficient_table(spec: ModelSpec, leading_order: bool = False) -> dict[int, np.ndarray]:
    return {d: coefficient_band(spec, d, leading_order) for d in supported_offsets(spec, leading_order)}


def initial_slope(spec: ModelSpec) -> float:
    """Closed-form ``d mean_size / dt`` at ``t = 0`` for the initial state ``delta_{n,1}``."""
    N = spec.n_fermions
    if spec.kind is ModelKind.A:
        shift = 4.0 * spec.v3 * (((N - 1) * (N - 2)) / (N * N))
        if spec.definition is SizeDefinition.I:
            return -4.0 * spec.v1 + shift
        # only the n = 1 diagonal survives
        return -4.0 * spec.v1 - shift
    return -4.0 * spec.v1 + 8.0 * spec.v4 * (((N - 1) * (N - 2) * (N - 3)) / N**3)


def critical_ratio(spec: ModelSpec) -> float | None:
    """Coupling ratio ``v1 / v_int`` at which :func:`initial_slope` vanishes.

    ``None`` for model A under definition II, whose slope is never positive.
    """
    N = spec.n_fermions
    if spec.kind is ModelKind.A:
        if spec.definition is SizeDefinition.II:
            return None
        return ((N - 1) * (N - 2)) / (N * N)
    return (2 * (N - 1) * (N - 2) * (N - 3)) / N**3


def large_n_initial_slope(kind, definition, v1: float, v_int: float) -> float:
    kind = ModelKind(str(getattr(kind, "value", kind)).upper())
    definition = SizeDefinition.parse(definition)
    if kind is ModelKind.A:
        return 4.0 * (v_int - v1) if definition is SizeDefinition.I else -4.0 * (v1 + v_int)
    return 4.0 * (2.0 * v_int - v1)


def large_n_critical_ratio(kind, definition) -> float | None:
    kind = ModelKind(str(getattr(kind, "value", kind)).upper())
    definition = SizeDefinition.parse(definition)
    if kind is ModelKind.A:
        return 1.0 if definition is SizeDefinition.I else None
    return 2.0

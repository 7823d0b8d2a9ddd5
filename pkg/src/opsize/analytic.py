"""Large-N closed forms and the nonlinear generating-function (Heisenberg-form) ODEs.

Notation: ``E = exp(4 (v3 - v1) t)`` for model A and ``S = v1 + v4`` for
model B. All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import exprel

from .errors import SpecError
from .model import ModelKind, SizeDefinition
from .rk import dopri5

__all__ = [
    "HeisenbergEquation",
    "closed_form_mean",
    "closed_form_norm",
    "heisenberg_z",
    "mean_modelA_defI",
    "mean_modelB_defI",
    "mean_modelB_defII",
    "mean_ode_pair",
    "norm_modelB_defII",
    "p_modelA_defI",
    "p_modelA_defII",
    "p_modelB_defII",
    "truncated_p_modelA_defI",
    "z_modelA_defI",
    "z_modelA_defII",
    "z_modelB_defII",
]

TAIL_TOL = 1e-16


def _check_domain(mu=None, t=None, **rates):
    if mu is not None and np.any(np.asarray(mu) < 0):
        raise SpecError("mu must be >= 0")
    if t is not None and np.any(np.asarray(t) < 0):
        raise SpecError("t must be >= 0")
    for name, v in rates.items():
        if not np.all(np.isfinite(v)) or np.any(np.asarray(v) < 0):
            raise SpecError(f"{name} must be finite and nonnegative")


def _growth_factor(t, v1, v3):
    """``(E - 1) / (v3 - v1)``, continuous through ``v1 == v3`` (where it equals ``4 t``)."""
    x = 4.0 * (np.asarray(v3, float) - v1) * t
    return 4.0 * t * exprel(x)


def z_modelA_defI(mu, t, v1, v3):
    """Generating function ``sum_n exp(-mu n) P_I(n, t)`` of model A, definition I.

    The rational closed form is rewritten in terms of ``(E - 1) / (v3 - v1)``,
    which removes the removable singularity at ``v1 == v3``.
    """
    _check_domain(mu, t, v1=v1, v3=v3)
    g = _growth_factor(t, v1, v3)
    em1 = np.expm1(mu)
    return (1.0 + v1 * g * em1) / (np.exp(mu) + v3 * g * em1)


def p_modelA_defI(n, t, v1, v3):
    """Large-N size distribution of model A, definition I.

    ``P(0) = v1 g / (1 + v3 g)`` and, for ``n >= 1``,
    ``P(n) = E (v3 g)^(n-1) / (1 + v3 g)^(n+1)`` with ``g = (E - 1)/(v3 - v1)``.
    This is the power-series expansion of :func:`z_modelA_defI` in
    ``exp(-mu)``.
    """
    _check_domain(None, t, v1=v1, v3=v3)
    n = np.asarray(n)
    if np.any(n < 0):
        raise SpecError("n must be >= 0")
    g = _growth_factor(t, v1, v3)
    log_e = 4.0 * (np.asarray(v3, float) - v1) * t
    a = v3 * g
    log_a = np.log(np.where(a > 0, a, 1.0))
    log_tail = log_e + (n - 1) * log_a - (n + 1) * np.log1p(a)
    # np.where evaluates both branches; the a = 0 branch may overflow where it is unused
    with np.errstate(over="ignore"):
        tail = np.where(a > 0, np.exp(log_tail), np.where(n == 1, np.exp(log_e), 0.0))
    return np.where(n == 0, v1 * g / (1.0 + a), tail)


def truncated_p_modelA_defI(t, v1, v3, tail_tol=TAIL_TOL) -> np.ndarray:
    """:func:`p_modelA_defI` on ``n = 0..n_max`` with the geometric tail beyond ``n_max`` below ``tail_tol``."""
    g = float(_growth_factor(t, v1, v3))
    a = v3 * g
    if a == 0:
        return p_modelA_defI(np.arange(2), t, v1, v3)
    q = a / (1.0 + a)
    lead = np.exp(4.0 * (v3 - v1) * t) / (1.0 + a) ** 2
    # tail after n_max: lead * q**n_max / (1 - q)
    n_max = max(1, int(np.ceil((np.log(tail_tol) - np.log(lead / (1.0 - q))) / np.log(q))))
    return p_modelA_defI(np.arange(n_max + 1), t, v1, v3)


def mean_modelA_defI(t, v1, v3):
    return np.exp(4.0 * (np.asarray(v3, float) - v1) * np.asarray(t, float))


def z_modelA_defII(mu, t, v1, v3):
    _check_domain(mu, t, v1=v1, v3=v3)
    return np.exp(-mu - 4.0 * (v1 + v3) * t)


def p_modelA_defII(n, t, v1, v3):
    """Model A under definition II: sizes decouple, only ``n = 1`` carries weight."""
    n = np.asarray(n)
    return np.where(n == 1, np.exp(-4.0 * (v1 + v3) * np.asarray(t, float)), 0.0)


def mean_modelB_defI(t, v1, v4):
    return np.exp(4.0 * (2.0 * v4 - np.asarray(v1, float)) * np.asarray(t, float))


def _weights_b(v1, v4):
    """``(v1 / S, v4 / S)`` with ``S = v1 + v4``; the forms below depend on the rates only through these."""
    s = v1 + v4
    if s == 0:
        return 0.0, 1.0
    return v1 / s, v4 / s


def z_modelB_defII(mu, t, v1, v4):
    """Generating function of model B under definition II."""
    _check_domain(mu, t, v1=v1, v4=v4)
    p, q = _weights_b(v1, v4)
    growth = np.exp(8.0 * t * (v1 + v4))
    return 1.0 / np.sqrt(growth * (np.exp(2.0 * mu) - q) + q)


def norm_modelB_defII(t, v1, v4):
    """Total weight ``z(0, t) = sqrt(S / (v1 exp(8 S t) + v4))``."""
    p, q = _weights_b(v1, v4)
    return 1.0 / np.sqrt(p * np.exp(8.0 * (v1 + v4) * np.asarray(t, float)) + q)


def mean_modelB_defII(t, v1, v4):
    p, q = _weights_b(v1, v4)
    growth = np.exp(8.0 * (v1 + v4) * np.asarray(t, float))
    return growth / (p * growth + q) ** 1.5


def _half_integer_ratios(k_max: int) -> np.ndarray:
    """``Gamma(k + 1/2) / (sqrt(pi) Gamma(k + 1))`` for ``k = 0..k_max`` by the recurrence ``c_k = c_{k-1} (k - 1/2) / k``."""
    k = np.arange(1, k_max + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k - 0.5) / k)))


def p_modelB_defII(n, t, v1, v4):
    """Large-N size distribution of model B, definition II (zero on even sizes)."""
    _check_domain(None, t, v1=v1, v4=v4)
    n_arr = np.atleast_1d(np.asarray(n))
    if np.any(n_arr < 0):
        raise SpecError("n must be >= 0")
    t = float(t)
    s = v1 + v4
    ratios = _half_integer_ratios(int(n_arr.max()) // 2)
    y = _weights_b(v1, v4)[1] * -np.expm1(-8.0 * t * s)
    k = n_arr // 2
    if y > 0:
        powers = np.exp(k * np.log(y))
    else:
        powers = np.where(k == 0, 1.0, 0.0)
    out = np.where(n_arr % 2 == 1, ratios[k] * np.exp(-4.0 * s * t) * powers, 0.0)
    return out if np.ndim(n) else float(out[0])


class HeisenbergEquation(str, enum.Enum):
    A_DEFI = "A_defI"
    B_DEFI = "B_defI"
    A_DEFII = "A_defII"
    B_DEFII = "B_defII"


def _heisenberg_rhs(eq: HeisenbergEquation, v1: float, v_int: float):
    if eq is HeisenbergEquation.A_DEFI:
        return lambda _t, z: 4.0 * v_int * (z * z - z) + 4.0 * v1 * (1.0 - z)
    if eq is HeisenbergEquation.B_DEFI:
        return lambda _t, z: 4.0 * v_int * (z**3 - z) + 4.0 * v1 * (1.0 - z)
    if eq is HeisenbergEquation.A_DEFII:
        return lambda _t, z: -4.0 * (v_int + v1) * z
    return lambda _t, z: 4.0 * v_int * (z**3 - z) - 4.0 * v1 * z


def heisenberg_z(model_eq, mu0: float, t_grid, v1: float, v_int: float, rtol=1e-12, atol=1e-14) -> np.ndarray:
    """Integrate the nonlinear generating-function ODE from ``z(0) = exp(-mu0)``."""
    eq = HeisenbergEquation(model_eq)
    if mu0 < 0:
        raise SpecError("mu0 must be >= 0 so that z(0) lies in (0, 1]")
    t_grid = np.asarray(t_grid, dtype=float)
    rhs = _heisenberg_rhs(eq, v1, v_int)
    z0 = np.array([np.exp(-mu0)])
    grid = t_grid if t_grid[0] == 0.0 else np.concatenate(([0.0], t_grid))
    sol = dopri5(rhs, z0, grid, rtol=rtol, atol=atol)[:, 0]
    return sol if grid is t_grid else sol[1:]


def mean_ode_pair(v1: float, v4: float, t_grid, rtol=1e-12, atol=1e-14):
    """Integrate the model-B mean-size equations under both definitions.

    ``d n_I/dt = (8 v4 - 4 v1) n_I`` and
    ``d n_II/dt = (4 v4 (3 z_II(0,t)^2 - 1) - 4 v1) n_II`` with the
    definition-II normalization taken from its closed form.
    """
    t_grid = np.asarray(t_grid, dtype=float)

    def rhs(t, y):
        z = norm_modelB_defII(t, v1, v4)
        return np.array(
            [
                (8.0 * v4 - 4.0 * v1) * y[0],
                (4.0 * v4 * (3.0 * z * z - 1.0) - 4.0 * v1) * y[1],
            ]
        )

    grid = t_grid if t_grid[0] == 0.0 else np.concatenate(([0.0], t_grid))
    sol = dopri5(rhs, np.ones(2), grid, rtol=rtol, atol=atol)
    if grid is not t_grid:
        sol = sol[1:]
    return sol[:, 0], sol[:, 1]


def closed_form_mean(kind, definition, t, v1, v_int):
    """Large-N mean size for any model/definition (model B definition I via its exponential law)."""
    kind = ModelKind(str(getattr(kind, "value", kind)).upper())
    definition = SizeDefinition.parse(definition)
    if kind is ModelKind.A:
        if definition is SizeDefinition.I:
            return mean_modelA_defI(t, v1, v_int)
        return np.exp(-4.0 * (v1 + v_int) * np.asarray(t, float))
    if definition is SizeDefinition.I:
        return mean_modelB_defI(t, v1, v_int)
    return mean_modelB_defII(t, v1, v_int)


def closed_form_norm(kind, definition, t, v1, v_int):
    kind = ModelKind(str(getattr(kind, "value", kind)).upper())
    definition = SizeDefinition.parse(definition)
    t = np.asarray(t, float)
    if definition is SizeDefinition.I:
        return np.ones_like(t)
    if kind is ModelKind.A:
        return np.exp(-4.0 * (v1 + v_int) * t)
    return norm_modelB_defII(t, v1, v_int)

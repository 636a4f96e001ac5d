"""Steady states of the pumped cavity: Newton solver, stability, gain limits.

The parametric term couples a to conj(a), so the system is solved on the
four real unknowns (Re a, Im a, Re b, Im b) with the analytic Jacobian
from the dynamics module and a backtracking line search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .errors import AboveThresholdUnstableSeedless, NonConvergence
from .params import FieldState, ModelParams


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-12
    max_iter: int = 200
    damping: float = 1.0
    warm_start: FieldState | None = None

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    stable: bool


def linear_subharmonic_steady(params: ModelParams, delta: float, coupling: complex) -> complex:
    """Stationary subharmonic amplitude for a frozen parametric coupling.

    Solves (gamma + i delta) a - M conj(a) = F_a for a with M = kappa * b
    held fixed:

        a = F_a (gamma - i delta + M) / (gamma^2 + delta^2 - |M|^2)

    Valid below threshold, where the denominator is positive.
    """
    f_a, _ = dynamics.drive_terms(params)
    denom = params.gamma**2 + delta**2 - abs(coupling) ** 2
    if denom <= 0.0:
        raise ValueError("parametric coupling at or above the local threshold; "
                         "no below-threshold linear steady state")
    return f_a * (params.gamma - 1j * delta + coupling) / denom


def undepleted_steady(params: ModelParams, delta: float,
                      delta_b: float | None = None) -> tuple[complex, complex]:
    """Closed-form steady state with pump backaction neglected.

    Used as the universal Newton initial guess and as the small-seed
    limit in tests.
    """
    d_b = dynamics.resolve_delta_b(params, delta, delta_b)
    _, f_b = dynamics.drive_terms(params)
    b0 = f_b / (params.gamma_b + 1j * d_b)
    coupling = params.kappa * b0
    denom = params.gamma**2 + delta**2 - abs(coupling) ** 2
    if denom <= 0.0:
        # At or above the local threshold the linear form diverges; start
        # the solver from a dark subharmonic instead.
        return 0.0 + 0.0j, b0
    a0 = linear_subharmonic_steady(params, delta, coupling)
    return a0, b0


def seedless_state(params: ModelParams, delta: float,
                   delta_b: float | None = None) -> FieldState:
    """Exact trivial branch a = 0 with the free-running pump."""
    d_b = dynamics.resolve_delta_b(params, delta, delta_b)
    _, f_b = dynamics.drive_terms(params)
    b = f_b / (params.gamma_b + 1j * d_b)
    return FieldState(a=0.0 + 0.0j, b=b, delta=delta, converged=True, residual_norm=0.0)


def _pack(a: complex, b: complex) -> np.ndarray:
    return np.array([a.real, a.imag, b.real, b.imag])


def _unpack(x: np.ndarray) -> tuple[complex, complex]:
    return complex(x[0], x[1]), complex(x[2], x[3])


def solve_steady(params: ModelParams, delta: float,
                 opts: SolveOptions | None = None, *,
                 delta_b: float | None = None) -> FieldState:
    """Newton solution of the coupled steady-state equations.

    Deterministic for fixed inputs: the iteration starts from the
    undepleted closed form unless a warm start is supplied, and the step
    is halved until the residual decreases.  Raises NonConvergence with
    the offending detuning attached when the tolerance cannot be met.
    """
    opts = opts or SolveOptions()
    f_a, f_b = dynamics.drive_terms(params)
    scale = max(abs(f_a), abs(f_b))
    if scale == 0.0:
        return FieldState(0.0 + 0.0j, 0.0 + 0.0j, delta, True, 0.0)
    if (params.seed_amp == 0.0 and params.pump_ratio >= 1.0
            and delta == 0.0 and dynamics.resolve_delta_b(params, delta, delta_b) == 0.0):
        raise AboveThresholdUnstableSeedless(
            f"seedless solve at delta=0 with pump_ratio={params.pump_ratio} >= 1: "
            "the dark state is unstable and no stable stationary solution exists")

    def residual(x: np.ndarray) -> np.ndarray:
        da, db = dynamics.equations_of_motion(params, _unpack(x), delta, delta_b)
        return np.array([da.real, da.imag, db.real, db.imag])

    if opts.warm_start is not None:
        x = _pack(opts.warm_start.a, opts.warm_start.b)
    else:
        x = _pack(*undepleted_steady(params, delta, delta_b))

    r = residual(x)
    rnorm = float(np.linalg.norm(r))
    for _ in range(opts.max_iter):
        if rnorm <= opts.tol * scale:
            a, b = _unpack(x)
            return FieldState(a, b, delta, True, rnorm / scale)
        jac = dynamics.real_jacobian(params, *_unpack(x), delta, delta_b)
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(f"singular Jacobian at delta={delta!r}",
                                 delta=delta, iterate=_unpack(x), residual=rnorm) from exc
        step = opts.damping
        while True:
            x_new = x + step * dx
            r_new = residual(x_new)
            rnorm_new = float(np.linalg.norm(r_new))
            if rnorm_new < rnorm:
                break
            step *= 0.5
            if step < 1e-12:
                raise NonConvergence(f"line search stalled at delta={delta!r}",
                                     delta=delta, iterate=_unpack(x), residual=rnorm)
        x, r, rnorm = x_new, r_new, rnorm_new
    raise NonConvergence(f"no convergence after {opts.max_iter} iterations at delta={delta!r}",
                         delta=delta, iterate=_unpack(x), residual=rnorm)


def clamped_pump_steady(params: ModelParams, delta: float) -> FieldState:
    """Steady state with the pump clamped at its resonant free-running value.

    Models the configuration where only the subharmonic resonates: b is
    pinned to (sigma gamma / kappa) e^{i theta} independent of detuning,
    so only the subharmonic equation is stationary.  The reported
    residual covers that equation alone.
    """
    if params.pump_ratio >= 1.0:
        raise ValueError("clamped-pump steady state requires pump_ratio < 1")
    coupling = params.sigma * params.gamma * np.exp(1j * params.theta)
    a = linear_subharmonic_steady(params, delta, coupling)
    b = coupling / params.kappa if params.kappa > 0.0 else 0.0 + 0.0j
    f_a, _ = dynamics.drive_terms(params)
    res = (-(params.gamma + 1j * delta) * a + coupling * np.conjugate(a) + f_a)
    scale = max(abs(f_a), 1e-300)
    return FieldState(complex(a), complex(b), delta, True, abs(res) / scale)


def stability(params: ModelParams, state: FieldState,
              delta_b: float | None = None) -> StabilityReport:
    """Eigenvalues of the linearized dynamics about a converged state."""
    if not state.converged:
        raise ValueError("stability analysis requires a converged state")
    jac = dynamics.real_jacobian(params, state.a, state.b, state.delta, delta_b)
    eigs = np.linalg.eigvals(jac)
    return StabilityReport(eigenvalues=eigs, stable=bool(np.max(eigs.real) < 0.0))


def classical_gain(params: ModelParams, theta: float | None = None) -> float:
    """Intensity gain of the seeded cavity at resonance, undepleted limit.

    G(theta) = (1 + 2 sigma cos(theta) + sigma^2) / (1 - sigma^2)^2, so
    G(0) = 1/(1 - sigma)^2 and G(pi) = 1/(1 + sigma)^2 with
    sigma = sqrt(pump_ratio).
    """
    if params.pump_ratio >= 1.0:
        raise ValueError("classical_gain requires pump_ratio < 1")
    th = params.theta if theta is None else theta
    sigma = params.sigma
    return (1.0 + 2.0 * sigma * math.cos(th) + sigma**2) / (1.0 - sigma**2) ** 2

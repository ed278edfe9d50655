"""Globally convergent damped Newton minimization of the convex functionals.

Newton directions come from conjugate gradients on the Hessian (positive
definite by strict convexity), step lengths from Armijo backtracking on the
energy.  A torus solve first checks the existence threshold and refuses to
iterate when it fails.  Failure to converge is reported through the returned
:class:`Solution` (``converged = False`` plus a message), not an exception,
so partial results stay inspectable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .backgrounds import (PhysicalParams, VortexConfig, build_background,
                          check_existence)
from .energy import EnergyModel
from .errors import Overflow, ThresholdViolated


@dataclass(frozen=True)
class SolverSettings:
    tol_grad_sup: float = 1e-9
    max_iters: int = 100
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    cg_tol: float = 1e-10
    cg_max_iters: int = 2000

    def __post_init__(self):
        if not (0.0 < self.armijo_c < 0.5):
            raise ValueError("armijo_c must lie in (0, 1/2)")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError("backtrack_factor must lie in (0, 1)")
        for name in ("tol_grad_sup", "max_iters", "cg_tol", "cg_max_iters"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class Solution:
    state: np.ndarray
    iterations: int
    grad_history: List[float]
    energy_history: List[float]
    converged: bool
    message: str = ""
    stages: Optional[List[int]] = None

    @property
    def u(self):
        return self.state[0]

    @property
    def f(self):
        return self.state[1]


def _pcg(apply_a, b, apply_minv, tol, max_iters):
    """Preconditioned conjugate gradients on stacked state pairs."""
    x = np.zeros_like(b)
    r = b.copy()
    z = apply_minv(r)
    p = z.copy()
    rz = float(np.sum(r * z))
    b_norm = float(np.sqrt(np.sum(b * b)))
    if b_norm == 0.0:
        return x
    for _ in range(max_iters):
        ap = apply_a(p)
        pap = float(np.sum(p * ap))
        if pap <= 0.0:
            break  # cannot happen for an SPD Hessian; guard against roundoff
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        if float(np.sqrt(np.sum(r * r))) <= tol * b_norm:
            break
        z = apply_minv(r)
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x


def minimize(model: EnergyModel, settings: SolverSettings, init: Optional[np.ndarray] = None) -> Solution:
    """Damped Newton descent on one variant's energy."""
    state = model.zero_state() if init is None else np.array(init, dtype=float)
    apply_minv = model.preconditioner()
    grad_history: List[float] = []
    energy_history: List[float] = []

    try:
        e_now = model.energy(state).total
    except Overflow as exc:
        return Solution(state, 0, [], [], False, f"overflow at initial state: {exc}")

    for it in range(settings.max_iters):
        grad = model.gradient(state)
        gsup = float(np.max(np.abs(grad)))
        grad_history.append(gsup)
        energy_history.append(e_now)
        if gsup <= settings.tol_grad_sup:
            return Solution(state, it, grad_history, energy_history, True)

        direction = _pcg(model.hessian_operator(state), -grad,
                         apply_minv, settings.cg_tol, settings.cg_max_iters)
        slope = model.inner(grad, direction)
        if slope >= 0.0:  # roundoff-degenerate direction; fall back to steepest descent
            direction = -grad
            slope = model.inner(grad, direction)

        alpha = 1.0
        accepted = False
        while alpha > 1e-14:
            trial = state + alpha * direction
            try:
                e_trial = model.energy(trial).total
            except Overflow:
                e_trial = np.inf
            if e_trial <= e_now + settings.armijo_c * alpha * slope:
                accepted = True
                break
            if alpha == 1.0 and np.isfinite(e_trial):
                # near the minimum the energy decrease drowns in roundoff;
                # accept the full Newton step whenever it halves the
                # gradient (quadratic local convergence takes over there)
                if float(np.max(np.abs(model.gradient(trial)))) <= 0.5 * gsup:
                    accepted = True
                    break
            alpha *= settings.backtrack_factor
        if not accepted:
            return Solution(state, it + 1, grad_history, energy_history, False,
                            "line search failed (step underflow)")
        state = trial
        e_now = e_trial

    grad = model.gradient(state)
    gsup = float(np.max(np.abs(grad)))
    grad_history.append(gsup)
    energy_history.append(e_now)
    if gsup <= settings.tol_grad_sup:
        return Solution(state, settings.max_iters, grad_history, energy_history, True)
    return Solution(state, settings.max_iters, grad_history, energy_history, False,
                    f"max_iters reached with sup gradient {gsup:.3e}")


def solve(mode: str, model: str, cfg: VortexConfig, grid, params: PhysicalParams,
          settings: Optional[SolverSettings] = None, init: Optional[np.ndarray] = None,
          background=None) -> Solution:
    """Solve one variant; torus variants are gated by the existence threshold."""
    settings = settings or SolverSettings()
    if mode == "torus":
        report = check_existence(cfg, grid, params, model=model)
        if not report.solvable:
            raise ThresholdViolated(report)
    bg = background if background is not None else build_background(cfg, grid, params)
    emodel = EnergyModel(mode=mode, model=model, bg=bg, cfg=cfg, params=params)
    return minimize(emodel, settings, init=init)


def continuation_in_vortices(mode: str, model: str, cfg: VortexConfig, grid,
                             params: PhysicalParams,
                             settings: Optional[SolverSettings] = None) -> Solution:
    """Warm-started sequence of solves adding one vortex point at a time."""
    settings = settings or SolverSettings()
    stages = []
    state = None
    sol = None
    steps = [VortexConfig(cfg.phi_zeros[: k + 1], ()) for k in range(cfg.n)]
    steps += [VortexConfig(cfg.phi_zeros, cfg.kappa_zeros[: t + 1]) for t in range(cfg.m)]
    if not steps:
        steps = [cfg]
    for stage_cfg in steps:
        sol = solve(mode, model, stage_cfg, grid, params, settings=settings, init=state)
        stages.append(sol.iterations)
        state = sol.state
        if not sol.converged:
            break
    sol.stages = stages
    return sol

"""Fixed-point continuation: the second, independent route to the torus solution.

The iteration works in the zero-mean space X of pairs ``(u', w')`` (arrays of
shape ``(2, nx, ny)`` whose slices both have vanishing cell average), where
``w'`` is the smooth remainder after splitting off the background,
``v' = t*v0 + w'``.  For a homotopy parameter ``t`` the map ``apply_T``
assembles the normalized right-hand sides

    R1 = lam*t*( 2*C2*e^{u'}/I[e^{u'}] - C1*e^{t v0 + w'}/I[e^{t v0 + w'}] - 1 )
    R2 = lam*t*( -2*C2*e^{u'}/I[e^{u'}] + 3*C1*e^{t v0 + w'}/I[e^{t v0 + w'}] - 1 )
         + 4*pi*n*t/|Omega|

(which have zero mean by construction of C1, C2), projects out quadrature
roundoff and inverts the Laplacian on each, so the output lies in X again.
Fixed points of ``apply_T(., t)`` at ``t = 1`` solve the full system; the two
field means are recovered from the integral constraints afterwards.

Stages are solved by damped Picard iteration with adaptive relaxation
(halved whenever the residual would increase, so the accepted residual
sequence is non-increasing), warm-started along an increasing ``t`` schedule
that is refined by midpoint insertion when a stage stalls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .backgrounds import Background, PhysicalParams, VortexConfig, check_existence
from .errors import NonZeroMeanRhs, Overflow, ThresholdViolated
from .grids import TorusGrid
from .newton import Solution

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class ContinuationSchedule:
    t_values: Tuple[float, ...] = tuple((k + 1) / 10 for k in range(10))
    omega: float = 0.5
    inner_tol: float = 1e-11
    inner_max_iters: int = 5000
    max_refinements: int = 3

    def __post_init__(self):
        ts = self.t_values
        if not ts or ts[-1] != 1.0 or any(b <= a for a, b in zip(ts, ts[1:])) or ts[0] <= 0.0:
            raise ValueError("t_values must increase strictly within (0, 1] and end at 1")
        if not (0.0 < self.omega <= 1.0):
            raise ValueError("omega must lie in (0, 1]")


def zero_mean_pair(u_prime: np.ndarray, w_prime: np.ndarray) -> np.ndarray:
    """Stack two fields into an X element, verifying the zero-mean invariant."""
    pair = np.stack([np.asarray(u_prime, dtype=float), np.asarray(w_prime, dtype=float)])
    for k in (0, 1):
        scale = float(np.max(np.abs(pair[k]))) + 1e-300
        if abs(float(pair[k].mean())) > 1e-12 * scale:
            raise NonZeroMeanRhs(f"component {k} of pair is not zero-mean")
    return pair


def _checked_exp(arg: np.ndarray) -> np.ndarray:
    m = float(arg.max())
    if m > 700.0:
        raise Overflow(f"exponent argument {m:.3g} exceeds 700")
    return np.exp(arg)


def apply_T(pair: np.ndarray, t: float, bg: Background, cfg: VortexConfig,
            params: PhysicalParams, c1: Optional[float] = None,
            c2: Optional[float] = None) -> np.ndarray:
    """One application of the homotopy map at parameter ``t`` (factor included)."""
    grid: TorusGrid = bg.grid
    if c1 is None or c2 is None:
        report = check_existence(cfg, grid, params, model="base")
        c1, c2 = report.c1, report.c2
    lam = params.lam
    area = grid.area

    eu = _checked_exp(pair[0])
    ev = _checked_exp(t * bg.v0 + pair[1])
    iu = grid.integrate(eu)
    iv = grid.integrate(ev)
    dens_u = (2.0 * c2 / iu) * eu
    dens_v = (c1 / iv) * ev
    r1 = lam * t * (dens_u - dens_v - 1.0)
    r2 = lam * t * (-dens_u + 3.0 * dens_v - 1.0) + FOUR_PI * cfg.n * t / area

    out = np.empty_like(pair)
    for k, r in enumerate((r1, r2)):
        m = float(r.mean())
        scale = float(np.max(np.abs(r))) + 1e-300
        if abs(m) > 1e-8 * scale:
            # zero mean holds analytically; a large projection residual is a bug
            raise NonZeroMeanRhs(f"rhs {k} mean {m:.3e} too large relative to {scale:.3e}")
        out[k] = grid.poisson_solve_zero_mean(r - m)
    return out


def _residual(pair: np.ndarray, t_pair: np.ndarray) -> float:
    scale = 1.0 + float(np.max(np.abs(pair)))
    return float(np.max(np.abs(pair - t_pair))) / scale


def _solve_stage(pair, t, bg, cfg, params, c1, c2, schedule, residual_log):
    omega = schedule.omega
    t_pair = apply_T(pair, t, bg, cfg, params, c1, c2)
    res = _residual(pair, t_pair)
    iters = 0
    while res > schedule.inner_tol and iters < schedule.inner_max_iters:
        trial = (1.0 - omega) * pair + omega * t_pair
        t_trial = apply_T(trial, t, bg, cfg, params, c1, c2)
        res_trial = _residual(trial, t_trial)
        iters += 1
        if res_trial <= res * (1.0 + 1e-12):
            pair, t_pair, res = trial, t_trial, res_trial
            residual_log.append(res)
            omega = min(1.0, omega * 1.2)
        else:
            omega *= 0.5
            if omega < 1e-8:
                return False, pair, iters
    return res <= schedule.inner_tol, pair, iters


def continuation_solve(schedule: ContinuationSchedule, bg: Background, cfg: VortexConfig,
                       params: PhysicalParams) -> Solution:
    """Track the fixed-point branch along the ``t`` schedule up to ``t = 1``."""
    grid: TorusGrid = bg.grid
    if cfg.m != 0:
        raise ValueError("the fixed-point path implements the base model only")
    report = check_existence(cfg, grid, params, model="base")
    if not report.solvable:
        raise ThresholdViolated(report)
    c1, c2 = report.c1, report.c2

    pair = np.zeros((2,) + grid.shape)
    residual_log: List[float] = []
    pending = list(schedule.t_values)
    refinements = 0
    total_iters = 0
    idx = 0
    while idx < len(pending):
        t = pending[idx]
        ok, pair_new, iters = _solve_stage(pair, t, bg, cfg, params, c1, c2,
                                           schedule, residual_log)
        total_iters += iters
        if ok:
            pair = pair_new
            idx += 1
            continue
        refinements += 1
        if refinements > schedule.max_refinements:
            state = _recover_state(pair_new, bg, c1, c2)
            return Solution(state, total_iters, residual_log, [], False,
                            f"stage t={t:.4g} exhausted iterations")
        t_prev = pending[idx - 1] if idx > 0 else 0.0
        pending.insert(idx, 0.5 * (t_prev + t))

    state = _recover_state(pair, bg, c1, c2)
    return Solution(state, total_iters, residual_log, [], True)


def _recover_state(pair: np.ndarray, bg: Background, c1: float, c2: float) -> np.ndarray:
    """Recover the field means from the integral constraints at t = 1."""
    grid: TorusGrid = bg.grid
    v_prime = bg.v0 + pair[1]
    u_bar = math.log(c2) - math.log(grid.integrate(np.exp(pair[0])))
    v_bar = math.log(c1) - math.log(grid.integrate(np.exp(v_prime)))
    u = u_bar + pair[0]
    f = u + (v_bar + pair[1])  # f = u + w, w = v - v0 = v_bar + w'
    return np.stack([u, f])

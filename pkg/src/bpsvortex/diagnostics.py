"""Executable checks on computed solutions and physical field reconstruction.

Everything here consumes converged states uniformly through the two weighted
exponentials ``e^u = e^{u0} e^{s0}`` and ``e^v = e^{v0} e^{s1 - s0}``, which
cover base and extended variants on both domains.  Fluxes are integrals of
the algebraic right-hand sides (never of numerical second derivatives).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import _kernels
from .backgrounds import (Background, PhysicalParams, VortexConfig,
                          build_background, check_existence)
from .errors import AnnulusTooThin
from .grids import PlaneGrid, TorusGrid, random_smooth_field
from .newton import SolverSettings, solve

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


def _exp_fields(state, bg: Background):
    eU = bg.exp_u0 * np.exp(state[0])
    eV = bg.exp_v0 * np.exp(state[1] - state[0])
    return eU, eV


def pde_residual(state, mode: str, bg: Background, cfg: VortexConfig,
                 params: PhysicalParams):
    """(l2, sup) residual of each governing equation; interior-only on the plane."""
    lam = params.lam
    grid = bg.grid
    eU, eV = _exp_fields(state, bg)
    n, m = cfg.n, cfg.m
    if mode == "torus":
        r1 = grid.laplacian(state[0]) - lam * (2.0 * eU - eV - 1.0) - FOUR_PI * m / grid.area
        r2 = grid.laplacian(state[1]) - 2.0 * lam * (eV - 1.0) - FOUR_PI * (m + n) / grid.area
        return ((grid.norm_l2(r1), grid.norm_sup(r1)),
                (grid.norm_l2(r2), grid.norm_sup(r2)))
    r1 = grid.laplacian(state[0]) - lam * (2.0 * eU - eV - 1.0) - bg.h1
    r2 = grid.laplacian(state[1]) - 2.0 * lam * (eV - 1.0) - (bg.h1 + bg.h2)
    r1i = r1[1:-1, 1:-1]
    r2i = r2[1:-1, 1:-1]
    h2 = grid.h ** 2
    return ((float(np.sqrt(np.sum(r1i ** 2) * h2)), float(np.max(np.abs(r1i)))),
            (float(np.sqrt(np.sum(r2i ** 2) * h2)), float(np.max(np.abs(r2i)))))


def flux_report(state, bg: Background, params: PhysicalParams) -> Tuple[float, float]:
    """Total fluxes of the two gauge fields from the algebraic curvature densities."""
    lam = params.lam
    grid = bg.grid
    eU, eV = _exp_fields(state, bg)
    a12 = -(lam / 2.0) * (2.0 * eU - eV - 1.0)
    b12 = -lam * (eV - 1.0)
    return grid.integrate(a12), grid.integrate(b12)


@dataclass(frozen=True)
class BoundReport:
    max_exp_u_excess: float  # max(e^u) - 1
    max_exp_v_excess: float  # max(e^v) - 1
    intermediate_excess: float  # max(2 e^u) - (max(e^v) + 1)
    tolerance: float
    ok: bool


def pointwise_bounds(state, bg: Background, tolerance: float = 0.05) -> BoundReport:
    """Maximum-principle bounds e^u <= 1, e^v <= 1 (and 2 e^u <= max e^v + 1)."""
    eU, eV = _exp_fields(state, bg)
    exc_u = float(eU.max()) - 1.0
    exc_v = float(eV.max()) - 1.0
    inter = float((2.0 * eU).max()) - (float(eV.max()) + 1.0)
    ok = exc_u <= tolerance and exc_v <= tolerance and inter <= tolerance
    return BoundReport(exc_u, exc_v, inter, tolerance, ok)


def verify_lagrange_multipliers(state, bg: Background, cfg: VortexConfig,
                                params: PhysicalParams) -> Tuple[float, float]:
    """Least-squares fit of the two constraint multipliers on a torus base solution.

    The constrained first-order conditions read

        lap u = -lam - l1 * e^{v0+f-u} + l2 * e^u
        lap f = -2 lam + 2 l1 * e^{v0+f-u} + 4 pi n / |Omega|

    and the analytic values are l1 = lam, l2 = 2 lam.
    """
    lam = params.lam
    grid: TorusGrid = bg.grid
    eU, eV = _exp_fields(state, bg)
    a = grid.laplacian(state[0]) + lam
    b = grid.laplacian(state[1]) + 2.0 * lam - FOUR_PI * cfg.n / grid.area
    ip = grid.inner
    mat = np.array([
        [5.0 * ip(eV, eV), -ip(eV, eU)],
        [-ip(eU, eV), ip(eU, eU)],
    ])
    rhs = np.array([-ip(eV, a) + 2.0 * ip(eV, b), ip(eU, a)])
    l1, l2 = np.linalg.solve(mat, rhs)
    return float(l1), float(l2)


@dataclass(frozen=True)
class RadialProfile:
    r: np.ndarray
    mean_fields_sq: np.ndarray  # angular average of u^2 + v^2
    mean_grads_sq: np.ndarray  # angular average of |grad u|^2 + |grad v|^2


def radial_profile(state, bg: Background, r_min: float, r_max: float,
                   nbins: int) -> RadialProfile:
    """Angular averages of the squared fields and gradients over radial bins."""
    grid: PlaneGrid = bg.grid
    u = bg.u0 + state[0]
    v = bg.v0 + state[1] - state[0]
    X, Y = grid.nodes()
    r = np.sqrt(X ** 2 + Y ** 2)
    ux, uy = np.gradient(u, grid.h)
    vx, vy = np.gradient(v, grid.h)
    f2 = (u ** 2 + v ** 2).ravel()
    g2 = (ux ** 2 + uy ** 2 + vx ** 2 + vy ** 2).ravel()
    edges = np.linspace(r_min, r_max, nbins + 1)
    rf = r.ravel()
    sums_f, counts = _kernels.radial_bin(rf, f2, edges)
    sums_g, _ = _kernels.radial_bin(rf, g2, edges)
    keep = counts > 0
    centers = 0.5 * (edges[:-1] + edges[1:])[keep]
    return RadialProfile(centers, sums_f[keep] / counts[keep], sums_g[keep] / counts[keep])


def _log_linear_rate(r, y, floor_rel, min_bins):
    # Beyond the profile minimum, Dirichlet truncation error (which grows
    # toward the boundary) dominates the exponentially small true fields,
    # so the fit stops there; a relative floor drops discretization noise.
    stop = int(np.argmin(y)) + 1
    if stop < min_bins:
        stop = y.size
    r, y = r[:stop], y[:stop]
    keep = y > floor_rel * float(y.max())
    if int(keep.sum()) < min_bins:
        raise AnnulusTooThin(f"only {int(keep.sum())} usable radial bins (need {min_bins})")
    slope = np.polyfit(r[keep], np.log(y[keep]), 1)[0]
    return -float(slope)


def decay_fit(state, bg: Background, cfg: VortexConfig, params: PhysicalParams,
              r_min: Optional[float] = None, r_max: Optional[float] = None,
              min_bins: int = 8, floor_rel: float = 1e-10):
    """Fitted radial decay rates of ln(u^2+v^2) and ln(|grad u|^2+|grad v|^2).

    The fit annulus starts beyond every vortex plus a few core lengths and
    stays inside the truncation boundary; bins whose angular average falls
    below ``floor_rel`` of the peak are dropped (discretization noise floor).
    """
    grid: PlaneGrid = bg.grid
    pts = list(cfg.phi_zeros) + list(cfg.kappa_zeros)
    r_v = max((math.hypot(px, py) for (px, py) in pts), default=0.0)
    if r_min is None:
        r_min = r_v + 3.0 / math.sqrt(params.lam)
    if r_max is None:
        r_max = 0.8 * grid.R
    if r_max <= r_min:
        raise AnnulusTooThin(f"empty annulus [{r_min:.3g}, {r_max:.3g}]")
    nbins = int((r_max - r_min) / (2.0 * grid.h))  # ~2 grid cells per bin
    if nbins < min_bins:
        raise AnnulusTooThin(f"annulus supports only {nbins} radial bins (need {min_bins})")
    prof = radial_profile(state, bg, r_min, r_max, nbins)
    if prof.r.size < min_bins:
        raise AnnulusTooThin(f"only {prof.r.size} radial bins (need {min_bins})")
    rate_fields = _log_linear_rate(prof.r, prof.mean_fields_sq, floor_rel, min_bins)
    rate_grads = _log_linear_rate(prof.r, prof.mean_grads_sq, floor_rel, min_bins)
    return rate_fields, rate_grads, (r_min, r_max)


@dataclass
class PhysicalFields:
    kappa: np.ndarray
    phi_abs: np.ndarray
    a12: np.ndarray
    b12: np.ndarray


def reconstruct_physical(state, bg: Background, params: PhysicalParams) -> PhysicalFields:
    """Physical fields from a converged state.

    ``phi_abs`` carries the closed-form background factor, so it vanishes
    exactly at plane vortex points; the curvature densities come from the
    algebraic right-hand sides.
    """
    lam = params.lam
    kappa = np.sqrt(bg.exp_u0) * np.exp(0.5 * state[0])
    phi_abs = np.sqrt(bg.exp_v0) * np.exp(0.5 * (state[1] - state[0]))
    eU, eV = _exp_fields(state, bg)
    a12 = -(lam / 2.0) * (2.0 * eU - eV - 1.0)
    b12 = -lam * (eV - 1.0)
    return PhysicalFields(kappa, phi_abs, a12, b12)


def uniqueness_probe(mode: str, model: str, cfg: VortexConfig, grid,
                     params: PhysicalParams, seeds: int,
                     settings: Optional[SolverSettings] = None,
                     amplitude: float = 0.5, seed0: int = 0) -> float:
    """Largest pairwise sup-distance between solves from random initial states."""
    bg = build_background(cfg, grid, params)
    states = []
    for k in range(seeds):
        rng = np.random.default_rng(seed0 + k)
        init = np.stack([random_smooth_field(grid, rng, amplitude),
                         random_smooth_field(grid, rng, amplitude)])
        sol = solve(mode, model, cfg, grid, params, settings=settings,
                    init=init, background=bg)
        if not sol.converged:
            raise RuntimeError(f"probe solve {k} failed: {sol.message}")
        states.append(sol.state)
    spread = 0.0
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            spread = max(spread, float(np.max(np.abs(states[i] - states[j]))))
    return spread


@dataclass
class DiagnosticsReport:
    residual_l2: Tuple[float, float]
    residual_sup: Tuple[float, float]
    constraint_errors: Optional[Tuple[float, float]] = None
    flux_a: float = 0.0
    flux_b: float = 0.0
    bound_violation: Optional[Dict[str, float]] = None
    lagrange: Optional[Tuple[float, float]] = None
    decay: Optional[Dict[str, float]] = None
    uniqueness_spread: Optional[float] = None

    def to_dict(self) -> Dict:
        out = {
            "residual_l2": list(self.residual_l2),
            "residual_sup": list(self.residual_sup),
            "flux_a": self.flux_a,
            "flux_b": self.flux_b,
        }
        if self.constraint_errors is not None:
            out["constraint_errors"] = list(self.constraint_errors)
        if self.bound_violation is not None:
            out["bound_violation"] = self.bound_violation
        if self.lagrange is not None:
            out["lagrange"] = list(self.lagrange)
        if self.decay is not None:
            out["decay"] = self.decay
        if self.uniqueness_spread is not None:
            out["uniqueness_spread"] = self.uniqueness_spread
        return out


def build_diagnostics(state, mode: str, model: str, bg: Background,
                      cfg: VortexConfig, params: PhysicalParams,
                      fit_decay: bool = True) -> DiagnosticsReport:
    """Aggregate every check applicable to the given variant."""
    (l2_1, sup_1), (l2_2, sup_2) = pde_residual(state, mode, bg, cfg, params)
    fa, fb = flux_report(state, bg, params)
    report = DiagnosticsReport(residual_l2=(l2_1, l2_2), residual_sup=(sup_1, sup_2),
                               flux_a=fa, flux_b=fb)
    grid = bg.grid
    if mode == "torus":
        thr = check_existence(cfg, grid, params, model=model)
        eU, eV = _exp_fields(state, bg)
        int_v = grid.integrate(eV)
        int_u = grid.integrate(eU)
        t1 = thr.c1 if model == "base" else thr.alpha1
        t2 = thr.c2 if model == "base" else thr.alpha2
        report.constraint_errors = (abs(int_v - t1) / abs(t1), abs(int_u - t2) / abs(t2))
        bounds = pointwise_bounds(state, bg)
        report.bound_violation = {
            "max_exp_u_excess": bounds.max_exp_u_excess,
            "max_exp_v_excess": bounds.max_exp_v_excess,
            "intermediate_excess": bounds.intermediate_excess,
        }
        if model == "base":
            report.lagrange = verify_lagrange_multipliers(state, bg, cfg, params)
    elif fit_decay and (cfg.n + cfg.m) > 0:
        try:
            rate_f, rate_g, window = decay_fit(state, bg, cfg, params)
            report.decay = {"rate_fields": rate_f, "rate_gradients": rate_g,
                            "r_min": window[0], "r_max": window[1]}
        except AnnulusTooThin:
            report.decay = None
    return report

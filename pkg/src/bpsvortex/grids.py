"""Grids, differential operators, Poisson inversion and quadrature.

Two domain types are supported:

* :class:`TorusGrid` - a doubly periodic rectangle sampled uniformly.  All
  differential operators are spectral (trigonometric collocation), so the
  Laplacian is exact for band-limited fields and the zero-mean Poisson solve
  inverts it exactly.
* :class:`PlaneGrid` - a truncated plane square ``[-R, R]^2`` with uniform
  spacing and homogeneous Dirichlet data on the boundary ring; the Laplacian
  is the standard second-order 5-point stencil.

Scalar fields are plain ``float64`` arrays of shape ``(nx, ny)`` (torus) or
``(n, n)`` (plane), laid out row-major with node ``(i, j)`` at
``(i*dx, j*dy)`` resp. ``(-R + i*h, -R + j*h)``.  Reductions use numpy's
pairwise summation, so results are deterministic for a fixed grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import NonZeroMeanRhs


@dataclass(frozen=True)
class SpectralWorkspace:
    """Cached wavenumber tables for one torus grid (rfft2 layout).

    Entry ``[0, 0]`` of ``k2`` is the mean (k = 0) mode; ``k2_safe`` replaces
    it by 1.0 so divisions stay finite while the mode is zeroed explicitly.
    """

    shape: tuple
    k2: np.ndarray
    k2_safe: np.ndarray


@dataclass(frozen=True)
class TorusGrid:
    """Uniform sampling of a doubly periodic rectangle of side lengths Lx, Ly."""

    Lx: float
    Ly: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.Lx > 0.0 and self.Ly > 0.0):
            raise ValueError("cell lengths must be positive")
        if self.nx < 8 or self.ny < 8:
            raise ValueError("need at least 8 samples per axis")
        if self.nx % 2 or self.ny % 2:
            raise ValueError("sample counts must be even")

    @property
    def dx(self):
        return self.Lx / self.nx

    @property
    def dy(self):
        return self.Ly / self.ny

    @property
    def area(self):
        return self.Lx * self.Ly

    @property
    def shape(self):
        return (self.nx, self.ny)

    @cached_property
    def workspace(self) -> SpectralWorkspace:
        kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        ky = 2.0 * np.pi * np.fft.rfftfreq(self.ny, d=self.dy)
        k2 = kx[:, None] ** 2 + ky[None, :] ** 2
        k2_safe = k2.copy()
        k2_safe[0, 0] = 1.0
        return SpectralWorkspace(self.shape, k2, k2_safe)

    def axes(self):
        x = np.arange(self.nx) * self.dx
        y = np.arange(self.ny) * self.dy
        return x, y

    def nodes(self):
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")

    # -- operators ---------------------------------------------------------

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        """Spectral Laplacian (multiplication by -|k|^2 in transform space)."""
        vhat = np.fft.rfft2(values)
        return np.fft.irfft2(-self.workspace.k2 * vhat, s=self.shape)

    def poisson_solve_zero_mean(self, rhs: np.ndarray, tol_mean: float = 1e-10) -> np.ndarray:
        """Unique zero-mean U with laplacian(U) = rhs - mean(rhs).

        Raises :class:`NonZeroMeanRhs` when |mean(rhs)| exceeds ``tol_mean``
        relative to the field magnitude.
        """
        scale = float(np.max(np.abs(rhs)))
        m = float(rhs.mean())
        if abs(m) > tol_mean * (scale + 1e-300):
            raise NonZeroMeanRhs(
                f"rhs mean {m:.3e} exceeds {tol_mean:.1e} relative tolerance"
            )
        ws = self.workspace
        rhat = np.fft.rfft2(rhs)
        uhat = rhat / (-ws.k2_safe)
        uhat[0, 0] = 0.0
        return np.fft.irfft2(uhat, s=self.shape)

    # -- reductions ----------------------------------------------------------

    def integrate(self, values: np.ndarray) -> float:
        return float(values.sum()) * self.dx * self.dy

    def mean(self, values: np.ndarray) -> float:
        return float(values.mean())

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float((a * b).sum()) * self.dx * self.dy

    inner_product = inner

    def norm_l2(self, values: np.ndarray) -> float:
        return float(np.sqrt(self.inner(values, values)))

    def norm_sup(self, values: np.ndarray) -> float:
        return float(np.max(np.abs(values)))


@dataclass(frozen=True)
class PlaneGrid:
    """Uniform n x n sampling of the square [-R, R]^2, boundary nodes included."""

    R: float
    n: int

    def __post_init__(self):
        if not self.R > 0.0:
            raise ValueError("half-width R must be positive")
        if self.n < 16:
            raise ValueError("need at least 16 samples per axis")

    @property
    def h(self):
        return 2.0 * self.R / (self.n - 1)

    @property
    def area(self):
        return (2.0 * self.R) ** 2

    @property
    def shape(self):
        return (self.n, self.n)

    def axes(self):
        x = -self.R + np.arange(self.n) * self.h
        return x, x

    def nodes(self):
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w1 = np.full(self.n, self.h)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        return w1[:, None] * w1[None, :]

    # -- operators ---------------------------------------------------------

    def laplacian(self, values: np.ndarray, boundary: float = 0.0) -> np.ndarray:
        """5-point Laplacian; ghost nodes outside the grid hold ``boundary``."""
        return _kernels.plane_laplacian(np.ascontiguousarray(values), self.h, float(boundary))

    # -- reductions ----------------------------------------------------------

    def integrate(self, values: np.ndarray) -> float:
        return float((values * self.trapezoid_weights).sum())

    def mean(self, values: np.ndarray) -> float:
        return self.integrate(values) / self.area

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float((a * b * self.trapezoid_weights).sum())

    inner_product = inner

    def norm_l2(self, values: np.ndarray) -> float:
        return float(np.sqrt(self.inner(values, values)))

    def norm_sup(self, values: np.ndarray) -> float:
        return float(np.max(np.abs(values)))


def validate_field(grid, values: np.ndarray) -> np.ndarray:
    """Check shape and finiteness of a scalar field on ``grid``."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    return values


def random_smooth_field(grid, rng: np.random.Generator, amplitude: float = 0.5) -> np.ndarray:
    """Band-limited random field, used for property tests and probe initials.

    Torus fields are low-pass filtered white noise; plane fields additionally
    vanish on the boundary ring (Dirichlet states).
    """
    if isinstance(grid, TorusGrid):
        noise = rng.standard_normal(grid.shape)
        ws = grid.workspace
        kc2 = (6.0 * 2.0 * np.pi / min(grid.Lx, grid.Ly)) ** 2
        fhat = np.fft.rfft2(noise) * np.exp(-ws.k2 / kc2)
        field = np.fft.irfft2(fhat, s=grid.shape)
    else:
        noise = rng.standard_normal(grid.shape)
        x, _ = grid.axes()
        window = np.sin(np.pi * (x + grid.R) / (2.0 * grid.R))
        kern = np.exp(-0.5 * (np.arange(-4, 5) / 1.5) ** 2)
        kern /= kern.sum()
        for axis in (0, 1):
            noise = np.apply_along_axis(lambda m: np.convolve(m, kern, mode="same"), axis, noise)
        field = noise * (window[:, None] * window[None, :]) ** 2
        field[0, :] = field[-1, :] = 0.0
        field[:, 0] = field[:, -1] = 0.0
    sup = np.max(np.abs(field))
    if sup > 0:
        field *= amplitude / sup
    return field

"""One-particle position densities on uniform 1-D grids.

For the symmetrized state |φ,ψ> with orthogonal φ, ψ, either particle has
density (|φ|² + |ψ|²)/2. For the bare product |φ>|ψ>, particle 1 sees |φ|²
and particle 2 sees |ψ|². When φ and ψ live in separate wells the two
pictures agree once the symmetrized density is renormalized inside one well.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .hilbert import Statistics

ORTHO_TOL = 1e-6
DISJOINT_TOL = 1e-10
NORM_TOL = 1e-8


class GeometryMismatch(ValueError):
    pass


class NotOrthogonal(ValueError):
    pass


class OverlappingSupport(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    x0: float
    dx: float
    points: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("grid spacing must be positive")
        if self.points < 2:
            raise ValueError("grid needs at least two points")

    @classmethod
    def from_range(cls, x_min: float, x_max: float, points: int) -> "Grid":
        if not x_max > x_min:
            raise ValueError("x_max must exceed x_min")
        return cls(float(x_min), (x_max - x_min) / (points - 1), int(points))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.points)

    @property
    def x_max(self) -> float:
        return self.x0 + self.dx * (self.points - 1)

    def indices(self, left: float, right: float) -> slice:
        """Index range of grid points inside [left, right], half a step of slack."""
        lo = max(0, math.ceil((left - self.x0) / self.dx - 0.5))
        hi = min(self.points, math.floor((right - self.x0) / self.dx + 0.5) + 1)
        if hi - lo < 2:
            raise ValueError(f"interval [{left}, {right}] covers fewer than two grid points")
        return slice(lo, hi)

    def sub(self, region: slice) -> "Grid":
        lo, hi, _ = region.indices(self.points)
        return Grid(self.x0 + lo * self.dx, self.dx, hi - lo)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "dx": self.dx, "points": self.points}


def trapezoid(values: np.ndarray, dx: float) -> float:
    return float(np.trapezoid(values, dx=dx))


@dataclass(frozen=True, eq=False)
class WaveFunctionGrid:
    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} samples, got shape {samples.shape}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def probability(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def norm_squared(self) -> float:
        return trapezoid(self.probability, self.grid.dx)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_squared() - 1) <= tol

    def normalized(self) -> "WaveFunctionGrid":
        n2 = self.norm_squared()
        if n2 <= 0:
            raise ValueError("cannot normalize a vanishing wavefunction")
        return WaveFunctionGrid(self.grid, self.samples / math.sqrt(n2))

    def __add__(self, other: "WaveFunctionGrid") -> "WaveFunctionGrid":
        _check_geometry(self, other)
        return WaveFunctionGrid(self.grid, self.samples + other.samples)

    def __mul__(self, scalar) -> "WaveFunctionGrid":
        return WaveFunctionGrid(self.grid, self.samples * complex(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DensityProfile:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.points,):
            raise ValueError(f"expected {self.grid.points} values, got shape {values.shape}")
        if np.any(values < 0):
            raise ValueError("densities are non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def integral(self, region: Optional[slice] = None) -> float:
        values = self.values if region is None else self.values[region]
        return trapezoid(values, self.grid.dx)

    def restrict(self, region: slice) -> "DensityProfile":
        return DensityProfile(self.grid.sub(region), self.values[region])

    def max_abs_diff(self, other: "DensityProfile") -> float:
        if self.grid.points != other.grid.points:
            raise GeometryMismatch("profiles have different lengths")
        return float(np.max(np.abs(self.values - other.values)))

    def to_csv(self, fmt: str = ".15g") -> str:
        buf = io.StringIO()
        g = self.grid
        buf.write(f"# x0={g.x0:{fmt}} dx={g.dx:{fmt}} points={g.points}\n")
        buf.write("x,rho\n")
        for x, rho in zip(self.x, self.values):
            buf.write(f"{x:{fmt}},{rho:{fmt}}\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "x": self.x.tolist(),
            "rho": self.values.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _check_geometry(*wfs: WaveFunctionGrid) -> None:
    first = wfs[0].grid
    for wf in wfs[1:]:
        if wf.grid != first:
            raise GeometryMismatch(f"grids differ: {first} vs {wf.grid}")


def overlap(phi: WaveFunctionGrid, psi: WaveFunctionGrid) -> complex:
    """<φ|ψ> by the trapezoidal rule."""
    _check_geometry(phi, psi)
    return complex(np.trapezoid(np.conj(phi.samples) * psi.samples, dx=phi.grid.dx))


def _check_particle(which: int) -> None:
    if which not in (1, 2):
        raise ValueError(f"particle index must be 1 or 2, got {which}")


def density_symmetrized(
    phi: WaveFunctionGrid,
    psi: WaveFunctionGrid,
    stats: Statistics = Statistics.BOSON,
    which: int = 1,
) -> DensityProfile:
    """Density of either particle in |φ,ψ>.

    The cross terms vanish for orthogonal inputs, so the result is the same
    for bosons and fermions and for both particles. Non-orthogonal inputs
    are rejected.
    """
    _check_geometry(phi, psi)
    _check_particle(which)
    if not isinstance(stats, Statistics):
        raise TypeError(f"expected Statistics, got {stats!r}")
    ov = abs(overlap(phi, psi))
    if ov >= ORTHO_TOL:
        raise NotOrthogonal(f"|<phi|psi>| = {ov:.3g} exceeds {ORTHO_TOL}")
    return DensityProfile(phi.grid, 0.5 * (phi.probability + psi.probability))


def density_product(phi: WaveFunctionGrid, psi: WaveFunctionGrid, which: int = 1) -> DensityProfile:
    """Density of particle ``which`` in the unsymmetrized product |φ>|ψ>."""
    _check_geometry(phi, psi)
    _check_particle(which)
    wf = phi if which == 1 else psi
    return DensityProfile(phi.grid, wf.probability)


def disjoint_support(phi: WaveFunctionGrid, psi: WaveFunctionGrid, threshold: float = DISJOINT_TOL) -> bool:
    """True when Σ min(|φ|², |ψ|²)·dx is below ``threshold``."""
    _check_geometry(phi, psi)
    shared = np.minimum(phi.probability, psi.probability)
    return float(np.sum(shared) * phi.grid.dx) < threshold


def _mass(wf: WaveFunctionGrid, region: slice) -> float:
    return float(np.sum(wf.probability[region]) * wf.grid.dx)


def restricted_density(
    phi: WaveFunctionGrid,
    psi: WaveFunctionGrid,
    stats: Statistics = Statistics.BOSON,
    region: slice = slice(None),
    threshold: float = DISJOINT_TOL,
) -> DensityProfile:
    """Symmetrized density restricted to ``region`` and renormalized there.

    ``region`` must hold all of one wavefunction and none of the other.
    """
    if not disjoint_support(phi, psi, threshold):
        raise OverlappingSupport("wavefunctions overlap; the single-well reduction does not apply")
    outside = np.ones(phi.grid.points, dtype=bool)
    outside[region] = False
    inside = {}
    for name, wf in (("phi", phi), ("psi", psi)):
        in_mass = _mass(wf, region)
        out_mass = float(np.sum(wf.probability[outside]) * wf.grid.dx)
        inside[name] = (in_mass, out_mass)
    holds = [n for n, (i, o) in inside.items() if o < threshold and i > threshold]
    misses = [n for n, (i, o) in inside.items() if i < threshold]
    if len(holds) != 1 or len(misses) != 1:
        raise OverlappingSupport(f"region must contain exactly one support (masses {inside})")
    full = density_symmetrized(phi, psi, stats)
    part = full.restrict(region)
    total = part.integral()
    return DensityProfile(part.grid, part.values / total)


def make_box_eigenstate(n: int, left: float, right: float, grid: Grid) -> WaveFunctionGrid:
    """Infinite-well eigenfunction √(2/L)·sin(nπ(x−left)/L), zero outside the well.

    The analytic samples are rescaled to unit norm on the grid; when the well
    edges fall on grid points the factor is 1 to rounding.
    """
    if n < 1 or int(n) != n:
        raise ValueError("quantum number n must be a positive integer")
    if not right > left:
        raise ValueError("well needs left < right")
    if left < grid.x0 - 1e-12 or right > grid.x_max + 1e-12:
        raise ValueError(f"well [{left}, {right}] lies outside the grid")
    width = right - left
    x = grid.x
    inside = (x >= left) & (x <= right)
    samples = np.where(inside, math.sqrt(2 / width) * np.sin(n * math.pi * (x - left) / width), 0.0)
    wf = WaveFunctionGrid(grid, samples)
    if wf.norm_squared() == 0:
        raise ValueError("well contains no grid points")
    return wf.normalized()


def superpose(coeffs: Sequence[complex], wfs: Sequence[WaveFunctionGrid]) -> WaveFunctionGrid:
    """Normalized Σ c_k wf_k."""
    _check_geometry(*wfs)
    out = sum((complex(c) * wf.samples for c, wf in zip(coeffs, wfs)), np.zeros(wfs[0].grid.points, complex))
    return WaveFunctionGrid(wfs[0].grid, out).normalized()

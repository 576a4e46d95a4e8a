"""Stationary-beam spectra and cross-spectrum admissibility bounds.

Two beams of a zero-mean Gaussian stationary state are characterised by
dimensionless flux spectral densities S1(omega), S2(omega) on a common
detuning grid and by a complex cross-spectrum x(omega), the amplitude for
a correlated pair at detunings (omega, -omega).  Quantum mechanics bounds
the cross-spectrum by

    |x(omega)|^2 <= (1 + S1(omega)) * S2(-omega)

while classical (commuting) fields obey the tighter

    |x(omega)|^2 <= S1(omega) * S2(-omega).

The gap between the two, the spontaneous "+1", is what lets quantum light
carry pair correlations above any classical background; both checks are
exposed, together with the construction saturating the classical one.

Bounds are evaluated pointwise on the grid with a relative saturation
tolerance of 1e-9 so that extremal models pass their own check.  The grid
is symmetric about zero with omega_k = (k - n/2)*domega; reflection
omega -> -omega is an index permutation, with the lone endpoint
-n/2*domega mapping to itself (its positive partner is off the grid, so
the bound is checked one-sidedly there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError

SATURATION_RTOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform detuning grid omega_k = (k - n/2)*domega, k = 0..n-1.

    n must be a power of two (>= 8) so FFT index shuffles are exact; domega
    is the spacing in rad/ps.  The conjugate time grid has spacing
    dt = 2*pi/(n*domega) and is centred the same way.
    """

    n: int
    domega: float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n!r}")
        if not math.isfinite(self.domega) or self.domega <= 0.0:
            raise ValueError(f"domega must be finite and > 0, got {self.domega!r}")

    @cached_property
    def omegas(self) -> np.ndarray:
        return _readonly((np.arange(self.n) - self.n // 2) * self.domega)

    @property
    def dt(self) -> float:
        return 2.0 * math.pi / (self.n * self.domega)

    @cached_property
    def times(self) -> np.ndarray:
        return _readonly((np.arange(self.n) - self.n // 2) * self.dt)


def _coerce_values(values, n, dtype, what):
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.shape != (n,):
        raise ValueError(f"{what} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64) if dtype == np.complex128 else arr)):
        raise ValueError(f"{what} must be finite")
    return _readonly(arr)


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """A non-negative flux spectral density sampled on a FrequencyGrid."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        arr = _coerce_values(self.values, self.grid.n, np.float64, "spectrum values")
        if np.any(arr < 0.0):
            raise ValueError("spectrum values must be >= 0")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True, eq=False)
class CrossSpectrum:
    """A complex cross-spectrum x(omega) sampled on a FrequencyGrid."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        arr = _coerce_values(self.values, self.grid.n, np.complex128, "cross-spectrum values")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class AdmissibilityReport:
    """ok flag plus the worst ratio |x|^2/bound and where it occurs.

    The ratio is 0 where both sides vanish and +inf where the bound is zero
    but the cross-spectrum is not.
    """

    ok: bool
    worst_ratio: float
    worst_omega: float


def require_same_grid(*objs) -> FrequencyGrid:
    grid = objs[0].grid
    for other in objs[1:]:
        if other.grid != grid:
            raise GridMismatchError(
                f"grids differ: {grid} vs {other.grid}; resample to a shared grid first"
            )
    return grid


def reflected(values: np.ndarray) -> np.ndarray:
    """values evaluated at -omega; the -n/2*domega endpoint maps to itself."""
    n = len(values)
    return values[(-np.arange(n)) % n]


def gaussian_spectrum(
    grid: FrequencyGrid, peak: float, sigma: float, center: float = 0.0
) -> SpectralModel:
    """peak * exp(-(omega - center)^2 / (2*sigma^2)) on the grid."""
    if not math.isfinite(peak) or peak < 0.0:
        raise ValueError(f"peak must be finite and >= 0, got {peak!r}")
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise ValueError(f"sigma must be finite and > 0, got {sigma!r}")
    if not math.isfinite(center):
        raise ValueError(f"center must be finite, got {center!r}")
    w = grid.omegas
    return SpectralModel(grid, peak * np.exp(-((w - center) ** 2) / (2.0 * sigma ** 2)))


def flat_spectrum(grid: FrequencyGrid, value: float) -> SpectralModel:
    if not math.isfinite(value) or value < 0.0:
        raise ValueError(f"value must be finite and >= 0, got {value!r}")
    return SpectralModel(grid, np.full(grid.n, value))


def gaussian_cross(
    grid: FrequencyGrid, peak: float, sigma: float, center: float = 0.0
) -> CrossSpectrum:
    """A real Gaussian cross-spectrum magnitude (no spectral phase)."""
    mag = gaussian_spectrum(grid, peak, sigma, center).values
    return CrossSpectrum(grid, mag.astype(np.complex128))


def flat_cross(grid: FrequencyGrid, value: float) -> CrossSpectrum:
    if not math.isfinite(value) or value < 0.0:
        raise ValueError(f"value must be finite and >= 0, got {value!r}")
    return CrossSpectrum(grid, np.full(grid.n, value, dtype=np.complex128))


def intensity(s: SpectralModel) -> float:
    """Photon flux (photons/ps): (1/2pi) * sum(values) * domega."""
    return float(s.values.sum() * s.grid.domega / (2.0 * math.pi))


def _admissibility(x: CrossSpectrum, bound: np.ndarray, grid: FrequencyGrid) -> AdmissibilityReport:
    mag2 = np.abs(x.values) ** 2
    ratio = np.zeros(grid.n)
    nz = bound > 0.0
    ratio[nz] = mag2[nz] / bound[nz]
    ratio[~nz & (mag2 > 0.0)] = np.inf
    worst = int(np.argmax(ratio))
    ok = bool(np.all(mag2 <= bound * (1.0 + SATURATION_RTOL)))
    return AdmissibilityReport(
        ok=ok, worst_ratio=float(ratio[worst]), worst_omega=float(grid.omegas[worst])
    )


def quantum_admissible(
    s1: SpectralModel, s2: SpectralModel, x: CrossSpectrum
) -> AdmissibilityReport:
    """Check |x(omega)|^2 <= (1 + S1(omega)) * S2(-omega) pointwise."""
    grid = require_same_grid(s1, s2, x)
    bound = (1.0 + s1.values) * reflected(s2.values)
    return _admissibility(x, bound, grid)


def classical_admissible(
    s1: SpectralModel, s2: SpectralModel, x: CrossSpectrum
) -> AdmissibilityReport:
    """Check the classical ceiling |x(omega)|^2 <= S1(omega) * S2(-omega)."""
    grid = require_same_grid(s1, s2, x)
    bound = s1.values * reflected(s2.values)
    return _admissibility(x, bound, grid)


def max_classical_cross(s1: SpectralModel, s2: SpectralModel) -> CrossSpectrum:
    """The non-negative cross-spectrum saturating the classical bound pointwise."""
    grid = require_same_grid(s1, s2)
    mag = np.sqrt(s1.values * reflected(s2.values))
    return CrossSpectrum(grid, mag.astype(np.complex128))


# ---------------------------------------------------------------------------
# CSV interchange.  Columns hold (omega, value) or (omega, re, im); an exact
# grid descriptor rides in a comment line so round trips are bit-faithful.

def _write_rows(path, grid, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# n={grid.n} domega_rad_ps={grid.domega:.17g}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _read_rows(path, ncols):
    with open(path, "r", encoding="utf-8") as fh:
        comment = fh.readline().strip()
        if not comment.startswith("# n="):
            raise ValueError(f"{path}: missing grid descriptor comment")
        parts = dict(p.split("=", 1) for p in comment[2:].split())
        grid = FrequencyGrid(n=int(parts["n"]), domega=float(parts["domega_rad_ps"]))
        fh.readline()  # header
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (grid.n, ncols):
        raise ValueError(f"{path}: expected {grid.n} rows x {ncols} cols, got {data.shape}")
    if not np.allclose(data[:, 0], grid.omegas, rtol=0.0, atol=1e-9 * grid.domega):
        raise ValueError(f"{path}: omega column does not match the declared grid")
    return grid, data


def spectrum_to_csv(s: SpectralModel, path) -> None:
    _write_rows(path, s.grid, "omega_rad_ps,value", zip(s.grid.omegas, s.values))


def spectrum_from_csv(path) -> SpectralModel:
    grid, data = _read_rows(path, 2)
    return SpectralModel(grid, data[:, 1])


def cross_to_csv(x: CrossSpectrum, path) -> None:
    rows = zip(x.grid.omegas, x.values.real, x.values.imag)
    _write_rows(path, x.grid, "omega_rad_ps,re,im", rows)


def cross_from_csv(path) -> CrossSpectrum:
    grid, data = _read_rows(path, 3)
    return CrossSpectrum(grid, data[:, 1] + 1j * data[:, 2])

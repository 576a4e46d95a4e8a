"""Coincidence statistics of windowed stationary two-beam Gaussian models.

For a zero-mean stationary Gaussian state the frequency-integrated
coincidence density in the detection times splits into a constant
accidental floor plus a correlated ridge,

    G(t1, t2) = B + |g(t1 - t2)|^2,       B = I1 * I2,

where g(tau) = (1/2pi) * integral x(omega) exp(-i*omega*tau) domega is the
transform of the cross-spectrum and I_j the beam fluxes.  Restricting
emission to a shutter window [0, T] turns the floor into the triangular
time-difference law with variance T^2/6, growing without bound in T, while
the correlated ridge keeps its fixed width.  The windowed mixture variance
and the background/signal weighting

    W_b = B * T^2,   W_s = T * integral |g|^2 dtau

are what an experiment actually estimates, so they are the quantities
exposed here and fed to the covariance pipeline.

The correlated ridge of a stationary state carries Omega = omega1 + omega2
= 0 exactly (pairs are born frequency-anticorrelated), so opposite-sign
dispersion leaves it untouched while the accidental floor inherits the
full spectral Omega spread.  windowed_covariance encodes exactly that
mixture; finite-window broadening of the Omega = 0 line is neglected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._fft import to_time_1d
from .errors import (
    AdmissibilityError,
    DegenerateStateError,
    GridTooCoarseError,
    WindowTooSmallError,
)
from .moments import TemporalCovariance
from .spectral import (
    CrossSpectrum,
    FrequencyGrid,
    SpectralModel,
    _readonly,
    classical_admissible,
    intensity,
    max_classical_cross,
    quantum_admissible,
    require_same_grid,
)

EDGE_MASS_LIMIT = 1e-6
REGIMES = ("quantum", "classical")


@dataclass(frozen=True, eq=False)
class StationaryPairModel:
    """Two stationary beams, their cross-spectrum and a shutter window T (ps).

    The declared regime's admissibility bound is checked at construction;
    an inadmissible model never exists.
    """

    s1: SpectralModel
    s2: SpectralModel
    cross: CrossSpectrum
    window: float
    regime: str

    def __post_init__(self):
        require_same_grid(self.s1, self.s2, self.cross)
        if not math.isfinite(self.window) or self.window <= 0.0:
            raise ValueError(f"window must be finite and > 0, got {self.window!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        check = classical_admissible if self.regime == "classical" else quantum_admissible
        report = check(self.s1, self.s2, self.cross)
        if not report.ok:
            raise AdmissibilityError(
                f"cross-spectrum violates the {self.regime} bound: worst ratio "
                f"{report.worst_ratio} at omega = {report.worst_omega} rad/ps"
            )

    @property
    def grid(self) -> FrequencyGrid:
        return self.s1.grid


def make_pair_model(
    s1: SpectralModel, s2: SpectralModel, cross: CrossSpectrum, window: float
) -> StationaryPairModel:
    """Construct a model, classifying the regime from the admissibility checks.

    A cross-spectrum inside the classical ceiling is recorded as classical;
    one that needs the spontaneous term is quantum; anything above the
    quantum bound is rejected.
    """
    if classical_admissible(s1, s2, cross).ok:
        return StationaryPairModel(s1, s2, cross, window, "classical")
    report = quantum_admissible(s1, s2, cross)
    if report.ok:
        return StationaryPairModel(s1, s2, cross, window, "quantum")
    raise AdmissibilityError(
        f"cross-spectrum violates the quantum bound: worst ratio {report.worst_ratio} "
        f"at omega = {report.worst_omega} rad/ps"
    )


def classical_extremal_model(
    s1: SpectralModel, s2: SpectralModel, window: float
) -> StationaryPairModel:
    """The strongest classically allowed correlations for the given spectra."""
    return StationaryPairModel(s1, s2, max_classical_cross(s1, s2), window, "classical")


@dataclass(frozen=True, eq=False)
class TauDensity:
    """Coincidence profile: signal |g(tau)|^2 on the conjugate time grid,
    a flat background level B = I1*I2 (photons^2/ps^2) and the window T (ps)."""

    grid: FrequencyGrid
    signal: np.ndarray
    background: float
    window: float

    def __post_init__(self):
        arr = np.array(self.signal, dtype=np.float64, copy=True)
        if arr.shape != (self.grid.n,):
            raise ValueError(f"signal must have shape ({self.grid.n},), got {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise ValueError("signal must be finite and >= 0")
        if not math.isfinite(self.background) or self.background < 0.0:
            raise ValueError(f"background must be finite and >= 0, got {self.background!r}")
        if not math.isfinite(self.window) or self.window <= 0.0:
            raise ValueError(f"window must be finite and > 0, got {self.window!r}")
        object.__setattr__(self, "signal", _readonly(arr))

    @property
    def taus(self) -> np.ndarray:
        return self.grid.times

    @property
    def dt(self) -> float:
        return self.grid.dt


@dataclass(frozen=True)
class WindowedTauStats:
    variance: float
    signal_fraction: float


def coincidence_profile(m: StationaryPairModel) -> TauDensity:
    """B = I1*I2 and |g(tau)|^2 from the transform of the cross-spectrum."""
    g = to_time_1d(m.cross.values, m.grid)
    return TauDensity(
        grid=m.grid,
        signal=np.abs(g) ** 2,
        background=intensity(m.s1) * intensity(m.s2),
        window=m.window,
    )


def _signal_moments(d: TauDensity) -> tuple[float, float, float]:
    """(mean, variance, integrated weight) of the signal profile.

    Raises GridTooCoarseError when signal mass reaches the tau grid edge
    (the profile would wrap) and WindowTooSmallError when the window does
    not cover 6x the RMS width sqrt(E[tau^2]) of the profile.
    """
    total = float(d.signal.sum()) * d.dt
    if total == 0.0:
        return 0.0, 0.0, 0.0
    weights = d.signal * d.dt / total
    edge_mass = float(weights[0] + weights[1] + weights[-2] + weights[-1])
    if edge_mass >= EDGE_MASS_LIMIT:
        raise GridTooCoarseError(
            f"signal profile reaches the tau grid edge: edge mass {edge_mass}",
            ratio=edge_mass / EDGE_MASS_LIMIT,
        )
    tau = d.taus
    mean = float((tau * weights).sum())
    var = float((((tau - mean) ** 2) * weights).sum())
    rms = math.sqrt(var + mean * mean)
    if d.window < 6.0 * rms:
        raise WindowTooSmallError(
            f"window T = {d.window} ps must cover 6x the signal RMS width {rms} ps"
        )
    return mean, var, total


def windowed_tau_variance(d: TauDensity) -> WindowedTauStats:
    """Variance of tau over the windowed background/signal mixture.

    Background events follow the triangular difference law (variance
    T^2/6, mean 0); signal events follow the normalized profile.  The
    mixture adds the usual cross-mean term, which vanishes for symmetric
    profiles.
    """
    mean_s, var_s, total = _signal_moments(d)
    T = d.window
    w_background = d.background * T * T
    w_signal = T * total
    if w_background + w_signal == 0.0:
        raise DegenerateStateError("model has neither background nor signal weight")
    f_s = w_signal / (w_background + w_signal)
    f_b = 1.0 - f_s
    variance = f_b * (T * T / 6.0) + f_s * var_s + f_s * f_b * mean_s ** 2
    return WindowedTauStats(variance=variance, signal_fraction=f_s)


def _spectral_moments(s: SpectralModel) -> tuple[float, float]:
    total = float(s.values.sum())
    if total == 0.0:
        return 0.0, 0.0
    w = s.grid.omegas
    mean = float((w * s.values).sum() / total)
    var = float((((w - mean) ** 2) * s.values).sum() / total)
    return mean, var


def windowed_covariance(m: StationaryPairModel) -> TemporalCovariance:
    """Covariance of (tau, Omega) for the windowed mixture.

    The background carries the convolved spectral Omega spread with tau and
    Omega independent; the signal ridge carries Omega = 0 exactly.  This is
    the moments-route entry point for stationary models.
    """
    d = coincidence_profile(m)
    stats = windowed_tau_variance(d)
    f_s = stats.signal_fraction
    f_b = 1.0 - f_s
    mean_s, _, _ = _signal_moments(d)
    m1, v1 = _spectral_moments(m.s1)
    m2, v2 = _spectral_moments(m.s2)
    mean_omega_b = m1 + m2
    var_omega = f_b * (v1 + v2) + f_b * f_s * mean_omega_b ** 2
    mean_tau = f_s * mean_s
    mean_omega = f_b * mean_omega_b
    cov = -mean_tau * mean_omega  # E[tau*Omega] = 0 in both mixture components
    return TemporalCovariance(
        var_tau=stats.variance,
        var_omega=var_omega,
        cov_tau_omega=cov,
        mean_tau=mean_tau,
        mean_omega=mean_omega,
    )


def tau_density_to_csv(d: TauDensity, path) -> None:
    """Plot-ready rows (tau_ps, signal, background, window_ps)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# n={d.grid.n} domega_rad_ps={d.grid.domega:.17g}\n")
        fh.write("tau_ps,signal,background,window_ps\n")
        for tau, s in zip(d.taus, d.signal):
            fh.write(f"{tau:.17g},{s:.17g},{d.background:.17g},{d.window:.17g}\n")

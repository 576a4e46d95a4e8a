"""Shared discrete Fourier convention.

Everything in this package uses the physics kernel exp(-i*omega*t) with a
1/(2*pi) factor per axis,

    F(t) = (1/2pi) * integral f(omega) * exp(-i*omega*t) domega,

discretised on the centred grids of FrequencyGrid.  For even n the centred
index shuffle is exact, so the fftshift recipe below reproduces the kernel
with no residual phase factors.
"""

import numpy as np


def to_time_1d(values, grid):
    shifted = np.fft.ifftshift(np.asarray(values))
    return np.fft.fftshift(np.fft.fft(shifted)) * (grid.domega / (2.0 * np.pi))


def to_time_2d(values, grid):
    shifted = np.fft.ifftshift(np.asarray(values))
    return np.fft.fftshift(np.fft.fft2(shifted)) * (grid.domega / (2.0 * np.pi)) ** 2

"""Units, constants and spectral grids.

Internal units: angular frequency in rad/fs, length in um, delay in fs.
Wavelengths are nanometres at every I/O boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SpdcError(Exception):
    """Base class for errors raised by this package."""


class DomainError(SpdcError, ValueError):
    """Argument outside the mathematical domain of a conversion."""


class AnalysisError(SpdcError):
    """A derived quantity cannot be extracted from the data at hand."""


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 0.299792458  # um / fs


CONSTANTS = PhysicalConstants()
C_UM_PER_FS = CONSTANTS.c


def wavelength_to_omega(wavelength_nm):
    """Vacuum wavelength (nm) to angular frequency (rad/fs)."""
    lam = np.asarray(wavelength_nm, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError(f"wavelength must be positive, got {wavelength_nm!r}")
    out = 2.0 * np.pi * C_UM_PER_FS / (lam * 1e-3)
    return float(out) if out.ndim == 0 else out


def omega_to_wavelength(omega):
    """Angular frequency (rad/fs) to vacuum wavelength (nm)."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise DomainError(f"angular frequency must be positive, got {omega!r}")
    out = 2.0 * np.pi * C_UM_PER_FS / w * 1e3
    return float(out) if out.ndim == 0 else out


def delay_to_path(delay_fs):
    """Free-space path length (um) travelled in ``delay_fs``."""
    return np.asarray(delay_fs, dtype=float) * C_UM_PER_FS


def path_to_delay(path_um):
    return np.asarray(path_um, dtype=float) / C_UM_PER_FS


def detuning_per_nm(center_nm: float) -> float:
    """d(Omega)/d(lambda) magnitude in rad/fs per nm, linearised at ``center_nm``."""
    lam_um = center_nm * 1e-3
    return 2.0 * np.pi * C_UM_PER_FS / lam_um**2 * 1e-3


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform detuning grid, mirror symmetric about zero.

    Samples are built as ``(i - center) * step`` so that sample ``i`` and its
    mirror are exact negatives of each other.
    """

    count: int
    half_span: float
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def center(self) -> int:
        return self.count // 2

    @property
    def step(self) -> float:
        return self.half_span / self.center

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.count, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    def refined(self) -> "SpectralGrid":
        """Grid with twice the sample density over the same span."""
        return make_symmetric_grid(2 * self.count - 1, self.half_span)


def make_symmetric_grid(count: int, half_span: float) -> SpectralGrid:
    if not isinstance(count, (int, np.integer)) or count < 3 or count % 2 == 0:
        raise ValueError(f"grid count must be an odd integer >= 3, got {count!r}")
    if not half_span > 0:
        raise ValueError(f"half_span must be positive, got {half_span!r}")
    center = count // 2
    step = half_span / center
    samples = (np.arange(count) - center) * step
    samples.setflags(write=False)
    return SpectralGrid(int(count), float(half_span), samples)


def grid_for_wavelength_span(count: int, half_span_nm: float, center_nm: float = 1550.0) -> SpectralGrid:
    """Symmetric grid whose half span corresponds to ``half_span_nm`` about ``center_nm``."""
    return make_symmetric_grid(count, half_span_nm * detuning_per_nm(center_nm))


def mirror_index(grid: SpectralGrid, i: int) -> int:
    if not 0 <= i < grid.count:
        raise IndexError(f"index {i} outside grid of {grid.count} samples")
    return grid.count - 1 - i

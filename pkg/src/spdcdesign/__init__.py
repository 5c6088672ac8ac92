"""Design and simulation of broadband type-II photon-pair sources in poled waveguides."""

from .core import AnalysisError, DomainError, SpdcError, make_symmetric_grid, grid_for_wavelength_span
from .dispersion import DispersionModel, build_dispersion, calibrate_period
from .poling import ProfileError, Uniform, LinearChirp, ApodizedChirp, AsymmetricPolynomial, generate

__version__ = "0.1.0"

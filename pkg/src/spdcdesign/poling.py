"""Domain sequences for uniform, chirped, apodized and asymmetric-polynomial poling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SpdcError

MIN_FEASIBLE_DOMAIN = 4.0  # um
MAX_DOMAINS = 200_000


class ProfileError(SpdcError, ValueError):
    pass


@dataclass(frozen=True)
class ProfileSpec:
    """Base profile: domain m spans (Lambda/2) * scale(z_m), z_m its start coordinate."""

    base_period: float  # um
    total_length: float  # um

    kind = "profile"

    def __post_init__(self):
        if not (self.base_period > 0 and math.isfinite(self.base_period)):
            raise ProfileError(f"base_period must be positive, got {self.base_period!r}")
        if not (self.total_length > 0 and math.isfinite(self.total_length)):
            raise ProfileError(f"total_length must be positive, got {self.total_length!r}")

    def scale(self, z: float) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base_period_um": self.base_period, "total_length_um": self.total_length}


@dataclass(frozen=True)
class Uniform(ProfileSpec):
    kind = "uniform"

    def scale(self, z):
        return 1.0


@dataclass(frozen=True)
class LinearChirp(ProfileSpec):
    """Period varying linearly about its value at L/2; ``alpha`` in 1/mm."""

    alpha: float = 0.0
    kind = "linear_chirp"

    @property
    def normalized_rate(self) -> float:
        # alpha * (z - L/2)[mm] == normalized_rate * (z - L/2) / L
        return self.alpha * (self.total_length * 1e-3)

    def scale(self, z):
        x = (z - self.total_length / 2) / self.total_length
        return 1.0 + self.normalized_rate * x

    def to_dict(self):
        return {**super().to_dict(), "alpha_per_mm": self.alpha}


@dataclass(frozen=True)
class ApodizedChirp(ProfileSpec):
    """Inverse-hyperbolic-tangent chirp; ``alpha`` and ``beta`` dimensionless."""

    alpha: float = 1.0
    beta: float = 0.0
    kind = "apodized_chirp"

    def __post_init__(self):
        super().__post_init__()
        if self.alpha == 0:
            raise ProfileError("apodized chirp needs a non-zero alpha")

    def scale(self, z):
        x = self.beta * (z - self.total_length / 2) / self.total_length
        if not -1.0 < x < 1.0:
            raise ProfileError(f"atanh argument {x:.6g} outside (-1, 1) at z = {z:.6g} um")
        return 1.0 + math.atanh(x) / self.alpha

    def to_dict(self):
        return {**super().to_dict(), "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class AsymmetricPolynomial(ProfileSpec):
    """Sum of odd powers, each centred at beta_k * L / 2.

    ``coefficients[j] = (alpha_{2j+1}, beta_{2j+1})`` for j = 0..order.
    """

    order: int = 0
    coefficients: tuple = ((0.0, 1.0),)
    kind = "asymmetric_polynomial"

    def __post_init__(self):
        super().__post_init__()
        coeffs = tuple((float(a), float(b)) for a, b in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if self.order < 0 or len(coeffs) != self.order + 1:
            raise ProfileError(
                f"order {self.order} needs {self.order + 1} (alpha, beta) pairs, got {len(coeffs)}"
            )

    def scale(self, z):
        L = self.total_length
        s = 0.0
        for j, (a, b) in enumerate(self.coefficients):
            s += a * ((z - b * L / 2) / L) ** (2 * j + 1)
        return 1.0 + s

    def to_dict(self):
        return {**super().to_dict(), "order": self.order, "coefficients": [list(c) for c in self.coefficients]}


PROFILE_KINDS = {cls.kind: cls for cls in (Uniform, LinearChirp, ApodizedChirp, AsymmetricPolynomial)}


def coefficient_pairs(raw) -> tuple:
    """Accept [[a1, b1], [a3, b3], ...] or the flat form [a1, b1, a3, b3, ...]."""
    raw = list(raw)
    if raw and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in raw):
        if len(raw) % 2:
            raise ProfileError(f"flat coefficient list needs an even count, got {len(raw)}")
        return tuple((float(raw[i]), float(raw[i + 1])) for i in range(0, len(raw), 2))
    return tuple(tuple(c) for c in raw)


def profile_from_dict(data: dict, base_period: float | None = None) -> ProfileSpec:
    """Inverse of ``ProfileSpec.to_dict``; ``base_period`` fills a missing/"calibrated" period."""
    kind = data.get("kind")
    if kind not in PROFILE_KINDS:
        raise ProfileError(f"unknown profile kind {kind!r}; expected one of {sorted(PROFILE_KINDS)}")
    period = data.get("base_period_um", "calibrated")
    if period in (None, "calibrated"):
        if base_period is None:
            raise ProfileError("profile has no base_period_um and no calibrated period was supplied")
        period = base_period
    common = {"base_period": float(period), "total_length": float(data["total_length_um"])}
    if kind == "uniform":
        return Uniform(**common)
    if kind == "linear_chirp":
        return LinearChirp(**common, alpha=float(data["alpha_per_mm"]))
    if kind == "apodized_chirp":
        return ApodizedChirp(**common, alpha=float(data["alpha"]), beta=float(data["beta"]))
    coeffs = coefficient_pairs(data["coefficients"])
    return AsymmetricPolynomial(**common, order=int(data["order"]), coefficients=coeffs)


@dataclass(frozen=True)
class DomainSequence:
    lengths: np.ndarray = field(repr=False)
    signs: np.ndarray = field(repr=False)
    total_length: float
    min_domain: float
    truncated_last: bool

    @property
    def count(self) -> int:
        return len(self.lengths)

    @property
    def starts(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.lengths)[:-1]))

    @property
    def full_lengths(self) -> np.ndarray:
        """Domain lengths excluding a truncated final domain (it ends at the crystal face)."""
        return self.lengths[:-1] if self.truncated_last else self.lengths


def sequence_from_lengths(lengths) -> DomainSequence:
    lengths = np.asarray(lengths, dtype=float)
    if lengths.ndim != 1 or len(lengths) == 0 or np.any(~(lengths > 0)):
        raise ProfileError("domain lengths must be a non-empty list of positive numbers")
    signs = np.where(np.arange(1, len(lengths) + 1) % 2 == 0, 1.0, -1.0)
    lengths.setflags(write=False)
    return DomainSequence(lengths, signs, float(lengths.sum()), float(lengths.min()), False)


def generate(spec: ProfileSpec, abort_below: float | None = None) -> DomainSequence:
    """Lay down domains from z = 0; the last one is cut so the total is exactly L.

    ``abort_below`` stops early with :class:`ProfileError` as soon as a full
    domain shorter than it appears (used by the optimizer to reject cheaply).
    """
    half = spec.base_period / 2
    L = spec.total_length
    scale = spec.scale
    lengths = []
    z = 0.0
    m = 0
    truncated = False
    while True:
        m += 1
        try:
            lm = half * scale(z)
        except (OverflowError, ValueError, ZeroDivisionError) as exc:
            raise ProfileError(f"domain {m} at z_m = {z:.6g} um: {exc}") from exc
        if not (math.isfinite(lm) and lm > 0):
            raise ProfileError(f"domain {m} at z_m = {z:.6g} um has non-positive length {lm!r}")
        if z + lm >= L:
            rest = L - z
            truncated = rest != lm
            lengths.append(rest)
            break
        if abort_below is not None and lm < abort_below:
            exc = ProfileError(f"domain {m} at z_m = {z:.6g} um is {lm:.4g} um < {abort_below} um")
            exc.domain_length = lm
            raise exc
        lengths.append(lm)
        z += lm
        if m >= MAX_DOMAINS:
            raise ProfileError(f"more than {MAX_DOMAINS} domains; profile too short-period near z = {z:.6g} um")
    arr = np.array(lengths)
    arr.setflags(write=False)
    signs = np.where(np.arange(1, len(arr) + 1) % 2 == 0, 1.0, -1.0)
    return DomainSequence(arr, signs, float(arr.sum()), float(arr.min()), truncated)


@dataclass(frozen=True)
class ConstraintReport:
    passed: bool
    min_feasible: float
    min_domain: float
    offending: tuple[int, ...]  # 0-based domain indices


def check_constraints(seq: DomainSequence, min_feasible: float = MIN_FEASIBLE_DOMAIN) -> ConstraintReport:
    full = seq.full_lengths
    bad = tuple(int(i) for i in np.flatnonzero(full < min_feasible))
    min_domain = float(full.min()) if len(full) else float(seq.lengths.min())
    return ConstraintReport(not bad, float(min_feasible), min_domain, bad)


def profile_period_at(spec: ProfileSpec, z):
    """Local period 2 L_m for a domain starting at ``z`` (um)."""
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any((zs < 0) | (zs > spec.total_length)):
        raise ValueError(f"z must lie in [0, {spec.total_length}] um")
    out = np.array([spec.base_period * spec.scale(float(v)) for v in zs])
    return float(out[0]) if np.ndim(z) == 0 else out

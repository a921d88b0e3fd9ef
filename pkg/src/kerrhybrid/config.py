"""Simulation parameters: damping, drive schedule, nonlinearity, bath.

All frequencies are angular (rad/s, or any consistent unit) and times are in
the matching inverse unit.  ``detuning`` is ``omega_r0 - omega_d``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np
from scipy import constants

from .errors import ConfigError


class Nonlinearity(Protocol):
    """Photon-number dependence of the resonator frequency."""

    def shift(self, n: float) -> float:
        """``omega_r(n) - omega_r0``."""

    def slope(self, n: float) -> float:
        """``d omega_r / dn``."""


@dataclass(frozen=True)
class KerrNonlinearity:
    """``omega_r(n) = omega_r0 + eta n``."""

    eta: float

    def shift(self, n):
        return self.eta * n

    def slope(self, n):
        return self.eta


@dataclass(frozen=True)
class PolynomialNonlinearity:
    """``omega_r(n) - omega_r0 = sum_j coeffs[j] n^(j+1)``; ``coeffs[0]`` is the Kerr slope."""

    coeffs: tuple[float, ...]

    def shift(self, n):
        return sum(c * n ** (j + 1) for j, c in enumerate(self.coeffs))

    def slope(self, n):
        return sum((j + 1) * c * n**j for j, c in enumerate(self.coeffs))


def level_energies(nonlinearity: Nonlinearity, detuning: float, dim: int) -> np.ndarray:
    """Rotating-frame energies ``E_rf(n) = sum_{k<n} [omega_r(k) - omega_d]`` for ``n < dim``."""
    if isinstance(nonlinearity, KerrNonlinearity):
        n = np.arange(dim, dtype=float)
        return detuning * n + 0.5 * nonlinearity.eta * n * (n - 1.0)
    steps = np.array([detuning + nonlinearity.shift(float(k)) for k in range(dim - 1)])
    return np.concatenate([[0.0], np.cumsum(steps)])


class Drive(Protocol):
    def __call__(self, t: float) -> complex: ...

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Times at which the amplitude may jump."""


@dataclass(frozen=True)
class ConstantDrive:
    amplitude: complex

    def __call__(self, t):
        return complex(self.amplitude)

    @property
    def breakpoints(self):
        return ()

    def scaled(self, factor: float) -> ConstantDrive:
        return ConstantDrive(self.amplitude * factor)


@dataclass(frozen=True)
class PiecewiseConstantDrive:
    """Amplitude ``amplitudes[j]`` on ``[times[j-1], times[j])`` with ``times[-1] = -inf``.

    ``amplitudes`` has one more entry than ``times``; the last one holds after
    the final switching time.
    """

    times: tuple[float, ...]
    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        if len(self.amplitudes) != len(self.times) + 1:
            raise ConfigError("need len(amplitudes) == len(times) + 1", "drive")
        if list(self.times) != sorted(self.times):
            raise ConfigError("switching times must be sorted", "drive")

    def __call__(self, t):
        return complex(self.amplitudes[bisect.bisect_right(self.times, t)])

    @property
    def breakpoints(self):
        return tuple(self.times)

    def scaled(self, factor: float) -> PiecewiseConstantDrive:
        return PiecewiseConstantDrive(self.times, tuple(a * factor for a in self.amplitudes))


@dataclass(frozen=True)
class SimConfig:
    kappa: float
    detuning: float = 0.0
    nonlinearity: Nonlinearity = field(default_factory=lambda: KerrNonlinearity(0.0))
    drive: Drive = field(default_factory=lambda: ConstantDrive(0.0))
    n_b: float = 0.0
    t_final: float | None = None
    dt_out: float | None = None
    omega_r0: float | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigError(f"must be positive, got {self.kappa}", "kappa")
        if self.n_b < 0:
            raise ConfigError(f"must be nonnegative, got {self.n_b}", "n_b")

    @property
    def coth_b(self) -> float:
        """``coth(omega_r0 / 2 T_b) = 1 + 2 n_b``."""
        return 1.0 + 2.0 * self.n_b

    @property
    def eta(self) -> float:
        """Nonlinearity slope at ``n = 0``."""
        return float(self.nonlinearity.slope(0.0))

    def sample_times(self) -> np.ndarray:
        if self.t_final is None or self.dt_out is None:
            raise ConfigError("t_final and dt_out are required for a sample grid")
        count = int(round(self.t_final / self.dt_out))
        return np.linspace(0.0, count * self.dt_out, count + 1)

    def with_(self, **changes) -> SimConfig:
        return replace(self, **changes)


@dataclass(frozen=True)
class DimensionlessConfig:
    """Two-parameter form of a Kerr problem (``kappa = 1``, ``|eta| = 1``, zero bath).

    ``delta_omega_tilde = -sign(eta) (omega_r0 - omega_d) / kappa``.
    """

    eps_tilde: complex
    delta_omega_tilde: float
    sign_eta: int = -1

    def to_config(self, t_final=None, dt_out=None) -> SimConfig:
        return SimConfig(
            kappa=1.0,
            detuning=-self.sign_eta * self.delta_omega_tilde,
            nonlinearity=KerrNonlinearity(float(self.sign_eta)),
            drive=ConstantDrive(self.eps_tilde),
            n_b=0.0,
            t_final=t_final,
            dt_out=dt_out,
        )


def rescale(config: SimConfig) -> DimensionlessConfig:
    """Dimensionless drive and detuning of a Kerr configuration with constant drive."""
    eta = config.eta
    if eta == 0:
        raise ConfigError("rescaling needs a nonzero Kerr slope", "eta")
    sign = 1 if eta > 0 else -1
    eps = config.drive(0.0)
    return DimensionlessConfig(
        eps_tilde=eps * math.sqrt(abs(eta)) / config.kappa**1.5,
        delta_omega_tilde=-sign * config.detuning / config.kappa,
        sign_eta=sign,
    )


def photon_scale(config: SimConfig) -> float:
    """Photon number per dimensionless unit, ``kappa / |eta|``."""
    return config.kappa / abs(config.eta)


# -- temperatures ---------------------------------------------------------------


def bath_photons(temperature_k: float, omega_r0: float) -> float:
    """Bose occupation at ``temperature_k`` kelvin for angular frequency ``omega_r0`` (rad/s)."""
    if temperature_k <= 0:
        return 0.0
    return 1.0 / math.expm1(constants.hbar * omega_r0 / (constants.k * temperature_k))


def kelvin(energy_rad_s: float) -> float:
    """Convert an energy expressed as an angular frequency to kelvin."""
    return constants.hbar * energy_rad_s / constants.k


def temperature_from_photons(n: float, omega_r0: float) -> float:
    """Temperature in kelvin with Bose occupation ``n``."""
    if n <= 0:
        return 0.0
    return kelvin(omega_r0) / math.log1p(1.0 / n)


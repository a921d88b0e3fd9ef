"""Fock-space (sheared) Gaussian states and their phase-space counterparts.

The density matrix is Gaussian in the mean index ``(n + m)/2`` and in the
offset ``n - m``, with a quadratic ("shear") phase controlled by ``k``::

    <n|rho|m> = (2 pi W1 B)^(-1/2)
                * exp[-(s - B)^2 / (2 W1 B) - d^2 / (8 W2 B)]
                * exp[i phi d - 2i k (s - B) d / B],    s = (n+m)/2, d = n-m, B = |beta|^2.

For ``|beta| >> 1`` it is close to a phase-space Gaussian state; the
conversion formulas below become exact as ``|beta| -> oo``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCenter, NonPhysicalState
from .gaussian_state import GaussianState

# relative slack on W2 <= W1 for integrated trajectories
_W_ORDER_TOL = 1e-10


@dataclass(frozen=True)
class FockGaussianParams:
    beta_abs: float
    phi_beta: float
    w1: float
    w2: float
    k: float = 0.0

    def __post_init__(self):
        if not self.beta_abs > 0:
            raise NonPhysicalState(f"beta_abs must be positive, got {self.beta_abs}")
        if not (self.w2 > 0 and self.w2 <= self.w1 * (1 + _W_ORDER_TOL)):
            raise NonPhysicalState(f"need 0 < w2 <= w1, got w1={self.w1}, w2={self.w2}")

    @property
    def center(self) -> complex:
        return self.beta_abs * complex(math.cos(self.phi_beta), math.sin(self.phi_beta))

    @property
    def n_sigma(self) -> float:
        """Standard deviation of the photon-number distribution."""
        return math.sqrt(self.w1) * self.beta_abs


def density_element(params: FockGaussianParams, n, m):
    """Matrix element ``<n|rho|m>``; ``n`` and ``m`` broadcast as arrays."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    big_b = params.beta_abs**2
    s = 0.5 * (n + m) - big_b
    d = n - m
    amp = -(s**2) / (2.0 * params.w1 * big_b) - d**2 / (8.0 * params.w2 * big_b)
    phase = params.phi_beta * d - 2.0 * params.k * s * d / big_b
    return np.exp(amp + 1j * phase) / math.sqrt(2.0 * math.pi * params.w1 * big_b)


def fock_window(params: FockGaussianParams, n_sigmas: float = 8.0) -> tuple[int, int]:
    """Index range ``[lo, hi)`` holding all but an ``n_sigmas`` tail of the populations."""
    big_b = params.beta_abs**2
    half = n_sigmas * params.n_sigma
    lo = max(0, int(math.floor(big_b - half)))
    hi = int(math.ceil(big_b + half)) + 1
    return lo, hi


def density_matrix(params: FockGaussianParams, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Block of the density matrix over Fock indices ``lo <= n, m < hi``.

    ``hi`` defaults to the upper edge of the 8-sigma window.
    """
    if hi is None:
        hi = fock_window(params)[1]
    idx = np.arange(lo, hi)
    return density_element(params, idx[:, None], idx[None, :])


def to_phase_space(params: FockGaussianParams) -> GaussianState:
    w1, w2, k = params.w1, params.w2, params.k
    d0 = (1.0 / w2 + w1 * (1.0 + 16.0 * k * k)) / 8.0
    radicand = d0 * d0 - w1 / (16.0 * w2)
    if radicand < 0:
        # only rounding can make this negative when 0 < w2 <= w1
        if radicand < -1e-12 * d0 * d0:
            raise NonPhysicalState(f"negative radicand {radicand} for b")
        radicand = 0.0
    b = math.sqrt(radicand)
    theta = 2.0 * params.phi_beta + math.atan2(k * w1, d0 - w1 / 4.0)
    return GaussianState(params.center, d0, b, theta)


def from_phase_space(state: GaussianState) -> FockGaussianParams:
    """Inverse of :func:`to_phase_space`; the state center must be nonzero."""
    beta_abs = abs(state.center)
    if beta_abs == 0:
        raise DegenerateCenter("phase of the state center is undefined at zero")
    phi = math.atan2(state.center.imag, state.center.real)
    rel = state.theta - 2.0 * phi
    along = state.d0 - state.b * math.cos(rel)
    return FockGaussianParams(
        beta_abs=beta_abs,
        phi_beta=phi,
        w1=4.0 * along,
        w2=along / (4.0 * (state.d0**2 - state.b**2)),
        k=state.b * math.sin(rel) / (4.0 * along),
    )


def corrected_center(params: FockGaussianParams) -> complex:
    """``<a>`` of the Fock-space Gaussian state including the ``1/|beta|`` correction."""
    w1, w2, k, beta_abs = params.w1, params.w2, params.k, params.beta_abs
    radial = beta_abs - (w1 + 1.0 / w2 - 2.0) / (8.0 * beta_abs) - 2.0 * k * k * w1 / beta_abs
    return complex(radial, -k * w1 / beta_abs) * complex(math.cos(params.phi_beta), math.sin(params.phi_beta))


def thermal_photons(params: FockGaussianParams) -> float:
    """``(sqrt(w1/w2) - 1)/2``, floored at zero (``w2`` may exceed ``w1`` by rounding)."""
    return max(0.0, 0.5 * (math.sqrt(params.w1 / params.w2) - 1.0))

"""Single-mode Gaussian states in the rotating-frame phase plane.

Quadratures are normalized as ``x = (a + a^dag)/2``, ``p = (a - a^dag)/2i`` so the
vacuum has variance 1/4 along every direction.  A state is described by its
complex center, the mean quadrature variance ``d0``, the variance asymmetry
``b`` and the doubled short-axis angle ``theta``: the minimum variance
``d0 - b`` is reached along the direction ``theta / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalMoments, NonPhysicalState

TWO_PI = 2.0 * math.pi

#: Absolute slack on ``16 (d0^2 - b^2) >= 1`` for numerically produced inputs.
PURITY_TOL = 1e-9


@dataclass(frozen=True)
class DstsShape:
    """Displaced-squeezed-thermal shape ``(r, theta, n_th)``."""

    r: float
    theta: float
    n_th: float

    def __post_init__(self):
        if self.r < 0 or self.n_th < 0:
            raise NonPhysicalState(f"r and n_th must be nonnegative, got r={self.r}, n_th={self.n_th}")


@dataclass(frozen=True)
class GaussianState:
    """Phase-space Gaussian state.

    Parameters
    ----------
    center : complex
        ``<a> = x_c + i p_c``.
    d0 : float
        Mean of the minimum and maximum quadrature variances.
    b : float
        Half the difference between maximum and minimum variances.
    theta : float
        Doubled angle of the minimum-variance quadrature, stored in ``[0, 2 pi)``.
        Set to 0 when ``b == 0``.
    """

    center: complex
    d0: float
    b: float
    theta: float = 0.0

    def __post_init__(self):
        d0, b = float(self.d0), float(self.b)
        if not d0 > 0:
            raise NonPhysicalState(f"d0 must be positive, got {d0}")
        if b < 0 or b >= d0:
            raise NonPhysicalState(f"need 0 <= b < d0, got d0={d0}, b={b}")
        if 16.0 * (d0 - b) * (d0 + b) < 1.0 - PURITY_TOL:
            raise NonPhysicalState(
                f"uncertainty bound violated: 16(d0^2-b^2) = {16 * (d0 - b) * (d0 + b):.12g}"
            )
        theta = 0.0 if b == 0 else float(self.theta) % TWO_PI
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "theta", theta)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def vacuum(cls) -> GaussianState:
        return cls(0j, 0.25, 0.0, 0.0)

    @classmethod
    def coherent(cls, alpha: complex) -> GaussianState:
        return cls(alpha, 0.25, 0.0, 0.0)

    @classmethod
    def from_covariance(cls, center, dx, dp, dxp) -> GaussianState:
        """Build from the quadrature covariances ``D_x, D_p, D_xp``."""
        d0 = 0.5 * (dx + dp)
        half_diff = 0.5 * (dx - dp)
        b = math.hypot(half_diff, dxp)
        # b cos(theta) = -(dx - dp)/2 and b sin(theta) = -dxp
        theta = math.atan2(-dxp, -half_diff) if b > 0 else 0.0
        return cls(center, d0, b, theta)

    @classmethod
    def from_moments(cls, mean_a: complex, mean_a2: complex, mean_n: float) -> GaussianState:
        """Gaussian state sharing ``<a>``, ``<a^2>`` and ``<a^dag a>`` with some density matrix.

        Raises
        ------
        NonPhysicalMoments
            If the implied variances are not those of a physical Gaussian state.
        """
        mean_a = complex(mean_a)
        d0 = 0.5 * (float(mean_n) + 0.5 - abs(mean_a) ** 2)
        c = complex(mean_a2) - mean_a**2
        b = 0.5 * abs(c)
        if not d0 > 0 or b >= d0:
            raise NonPhysicalMoments(f"moments imply d0={d0!r}, b={b!r}")
        if 16.0 * (d0 - b) * (d0 + b) < 1.0 - PURITY_TOL:
            raise NonPhysicalMoments(
                f"moments violate the uncertainty bound: 16(d0^2-b^2) = {16 * (d0 - b) * (d0 + b):.12g}"
            )
        theta = math.atan2(-c.imag, -c.real) if b > 0 else 0.0
        return cls(mean_a, d0, b, theta)

    @classmethod
    def from_dsts(cls, shape: DstsShape, center: complex = 0j) -> GaussianState:
        scale = 0.25 + 0.5 * shape.n_th
        two_r = 2.0 * shape.r
        return cls(center, scale * math.cosh(two_r), scale * math.sinh(two_r), shape.theta)

    # -- shape conversions ----------------------------------------------------

    @property
    def covariance(self) -> tuple[float, float, float]:
        """``(D_x, D_p, D_xp)``."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return self.d0 - self.b * c, self.d0 + self.b * c, -self.b * s

    def to_dsts(self) -> DstsShape:
        ratio = self.b / self.d0
        n_th = 2.0 * math.sqrt((self.d0 + self.b) * (self.d0 - self.b)) - 0.5
        return DstsShape(r=0.5 * math.atanh(ratio), theta=self.theta, n_th=max(n_th, 0.0))

    @property
    def n_th(self) -> float:
        return self.to_dsts().n_th

    @property
    def squeeze_factor(self) -> float:
        """Inverse minimum variance in vacuum units, ``[4(d0 - b)]^-1``."""
        return 1.0 / (4.0 * (self.d0 - self.b))

    @property
    def unsqueeze_factor(self) -> float:
        """Maximum variance in vacuum units, ``4(d0 + b)``."""
        return 4.0 * (self.d0 + self.b)

    def mean_photon(self) -> float:
        return abs(self.center) ** 2 + 2.0 * self.d0 - 0.5

    def effective_temperature(self, omega_r0: float) -> float:
        """Temperature (energy units of ``omega_r0``, hbar = k_B = 1) with the state's thermal occupation."""
        n_th = self.n_th
        if n_th <= 0:
            return 0.0
        return omega_r0 / math.log1p(1.0 / n_th)

    def shifted(self, center: complex) -> GaussianState:
        return GaussianState(center, self.d0, self.b, self.theta)

    # -- evaluation -------------------------------------------------------------

    def quadrature_variance(self, phi):
        return self.d0 - self.b * np.cos(2.0 * np.asarray(phi) - self.theta)

    def _diagonal_gaussian(self, x, p, extra):
        z = (np.asarray(x) + 1j * np.asarray(p) - self.center) * np.exp(-0.5j * self.theta)
        v_short = self.d0 - self.b + extra
        v_long = self.d0 + self.b + extra
        norm = 1.0 / (TWO_PI * math.sqrt(v_short * v_long))
        return norm * np.exp(-(z.real**2) / (2.0 * v_short) - z.imag**2 / (2.0 * v_long))

    def wigner(self, x, p):
        """Wigner function at ``(x, p)``; accepts arrays."""
        return self._diagonal_gaussian(x, p, 0.0)

    def husimi_q(self, x, p):
        """Husimi Q function, normalized so that its integral over ``dx dp`` is 1."""
        return self._diagonal_gaussian(x, p, 0.25)


def from_moments(mean_a, mean_a2, mean_n) -> GaussianState:
    return GaussianState.from_moments(mean_a, mean_a2, mean_n)


def from_dsts(shape: DstsShape, center: complex = 0j) -> GaussianState:
    return GaussianState.from_dsts(shape, center)


def to_dsts(state: GaussianState) -> DstsShape:
    return state.to_dsts()

"""Truncated-Fock-space master-equation integrator (rotating frame).

The right-hand side works directly on the ``N x N`` density matrix using the
tridiagonal structure of ``a`` and ``a^dag``; the superoperator is never formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln

from .config import SimConfig, level_energies
from .errors import IntegrationFailure, TruncationOverflow

RTOL = 1e-8
#: The error norm is an RMS over all N^2 entries; a small atol keeps eigenvalues above -1e-10.
ATOL = 1e-14
#: Population of the top levels that signals an inadequate basis.
OVERFLOW_POPULATION = 1e-6
EDGE_LEVELS = 5


@dataclass(frozen=True)
class FockDensityMatrix:
    """Density matrix over Fock states ``0 .. dim-1``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {data.shape}")
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def populations(self) -> np.ndarray:
        return self.data.diagonal().real.copy()

    def edge_population(self, levels: int = EDGE_LEVELS) -> float:
        return float(self.populations[-levels:].sum())

    def hermiticity_error(self) -> float:
        return float(np.abs(self.data - self.data.conj().T).max())

    # -- constructors ---------------------------------------------------------

    @classmethod
    def fock(cls, n: int, dim: int) -> FockDensityMatrix:
        data = np.zeros((dim, dim), dtype=complex)
        data[n, n] = 1.0
        return cls(data)

    @classmethod
    def vacuum(cls, dim: int) -> FockDensityMatrix:
        return cls.fock(0, dim)

    @classmethod
    def pure(cls, psi) -> FockDensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def coherent(cls, alpha: complex, dim: int) -> FockDensityMatrix:
        return cls.pure(coherent_vector(alpha, dim))

    @classmethod
    def thermal(cls, n_th: float, dim: int) -> FockDensityMatrix:
        return cls(np.diag(thermal_populations(n_th, dim)).astype(complex))


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes ``e^{-|alpha|^2/2} alpha^n / sqrt(n!)`` (computed in log space)."""
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def thermal_populations(n_th: float, dim: int) -> np.ndarray:
    """Geometric weights ``n_th^n / (1 + n_th)^(n+1)``."""
    n = np.arange(dim)
    if n_th == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(n_th / (1.0 + n_th)) - math.log1p(n_th))


def lowering(dim: int) -> np.ndarray:
    """Truncated annihilation operator, ``<k|a|n> = sqrt(n) delta_{k,n-1}``."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def build_generator(config: SimConfig, dim: int):
    """Dense Hamiltonian and jump operators ``[(L, rate), ...]`` for a basis of ``dim`` states.

    ``L`` is returned without the rate; the dissipator is ``rate * D[L]``.
    """
    if dim < 2:
        raise ValueError("need at least two Fock states")
    a = lowering(dim)
    eps = config.drive(0.0)
    h = np.diag(level_energies(config.nonlinearity, config.detuning, dim)).astype(complex)
    h += eps * a.T + np.conj(eps) * a
    jumps = [(a, config.kappa * (config.n_b + 1.0))]
    if config.n_b > 0:
        jumps.append((a.T.copy(), config.kappa * config.n_b))
    return h, jumps


class _Rhs:
    """``d rho / d tau`` with ``tau = kappa t``; evaluates ``Y + Y^dag``."""

    def __init__(self, config: SimConfig, dim: int):
        kappa = config.kappa
        self.dim = dim
        n = np.arange(dim, dtype=float)
        self.energy = level_energies(config.nonlinearity, config.detuning, dim) / kappa
        self.sq = np.sqrt(n[1:])  # sqrt(1..N-1)
        self.down = config.n_b + 1.0
        self.up = config.n_b
        # truncated a a^dag has a zero in its last diagonal entry
        aad = n + 1.0
        aad[-1] = 0.0
        self.decay_diag = 0.5 * (self.down * n + self.up * aad)
        self.pair = np.sqrt(np.outer(n[1:], n[1:]))  # sqrt(n m) for n, m >= 1
        self.eps = 0j

    def set_drive(self, eps: complex, kappa: float):
        self.eps = eps / kappa

    def __call__(self, tau, y):
        dim = self.dim
        rho = y.reshape(dim, dim)
        h_rho = self.energy[:, None] * rho
        if self.eps != 0:
            h_rho[1:] += self.eps * self.sq[:, None] * rho[:-1]
            h_rho[:-1] += np.conj(self.eps) * self.sq[:, None] * rho[1:]
        y_mat = -1j * h_rho - self.decay_diag[:, None] * rho
        y_mat[:-1, :-1] += 0.5 * self.down * self.pair * rho[1:, 1:]
        if self.up:
            y_mat[1:, 1:] += 0.5 * self.up * self.pair * rho[:-1, :-1]
        return (y_mat + y_mat.conj().T).ravel()


@dataclass
class LindbladTrajectory:
    times: np.ndarray
    states: list

    @property
    def traces(self):
        return np.array([s.trace for s in self.states])


def evolve(rho0: FockDensityMatrix, config: SimConfig, sample_times, *, rtol=RTOL, atol=ATOL, check_edge=True):
    """Integrate the master equation from ``rho0`` at ``sample_times[0]``.

    Raises
    ------
    TruncationOverflow
        If the population of the top five levels exceeds 1e-6 at a sample.
    IntegrationFailure
        If the integrator stops early.
    """
    from .hybrid import _segments  # drive segmentation shared with the hybrid integrator

    times = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample_times must be strictly increasing")
    kappa = config.kappa
    rhs = _Rhs(config, rho0.dim)
    dim = rho0.dim
    y = rho0.data.ravel().copy()
    states = [rho0]
    step = None
    for t_a, t_b in _segments(config, times[0], times[-1]):
        rhs.set_drive(config.drive(0.5 * (t_a + t_b)), kappa)
        inner = times[(times > t_a) & (times < t_b)]
        # integrate between consecutive samples: the dense-output interpolant is not positive
        edges = [t_a, *inner, t_b]
        for lo, hi in zip(edges[:-1], edges[1:]):
            span = kappa * (hi - lo)
            first = None if step is None else min(step, span)
            sol = solve_ivp(rhs, (kappa * lo, kappa * hi), y, method="DOP853", rtol=rtol, atol=atol, first_step=first)
            if sol.status != 0:
                last = sol.t[-1] / kappa if sol.t.size else lo
                raise IntegrationFailure(f"master equation stopped at t={last:.6g}: {sol.message}", last)
            if sol.t.size > 2:
                step = sol.t[-2] - sol.t[-3]  # last full step; the final one may be clipped
            y = sol.y[:, -1].copy()
            if hi not in times:
                continue
            mat = y.reshape(dim, dim)
            rho = FockDensityMatrix(0.5 * (mat + mat.conj().T))
            if check_edge and rho.edge_population() > OVERFLOW_POPULATION:
                raise TruncationOverflow(
                    f"top {EDGE_LEVELS} levels hold {rho.edge_population():.3g} at t={hi:.6g} (dim={dim})"
                )
            states.append(rho)
    return LindbladTrajectory(times, states)


def moments(rho: FockDensityMatrix):
    """``(<a>, <a^2>, <a^dag a>)``, normalized by the trace."""
    data = rho.data
    n = np.arange(rho.dim, dtype=float)
    tr = np.trace(data).real
    mean_a = np.sum(np.sqrt(n[1:]) * np.diagonal(data, -1)) / tr
    mean_a2 = np.sum(np.sqrt(n[1:-1] * n[2:]) * np.diagonal(data, -2)) / tr
    mean_n = np.sum(n * data.diagonal().real) / tr
    return complex(mean_a), complex(mean_a2), float(mean_n)


def truncation_dim(n_peak: float, w1_max: float = 1.0) -> int:
    """Basis size ``ceil(n_peak + 8 sqrt(w1_max n_peak) + 30)``."""
    return int(math.ceil(n_peak + 8.0 * math.sqrt(w1_max * n_peak) + 30.0))


def auto_dim(config: SimConfig, t_final: float | None = None) -> int:
    """Truncation dimension from a quick hybrid run of the same configuration."""
    from .hybrid import peak_photons

    n_peak, w1_max = peak_photons(config, t_final)
    return truncation_dim(n_peak, w1_max)

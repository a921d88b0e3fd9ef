"""Hybrid phase-space/Fock-space evolution of a driven, damped Kerr-like resonator.

The state is the rotating-frame center ``beta`` plus the Fock-space shape
parameters ``(w1, w2, k)``.  Equations are integrated in the scaled time
``kappa * t``; inputs and outputs use physical time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .config import SimConfig
from .errors import IntegrationFailure
from .fock_gaussian import FockGaussianParams, to_phase_space
from .gaussian_state import GaussianState

#: Magnitude of the center used for a vacuum start.
VACUUM_SEED = 1e-15
RTOL = 1e-9
ATOL = 1e-12


@dataclass(frozen=True)
class HybridState:
    beta: complex
    w1: float = 1.0
    w2: float = 1.0
    k: float = 0.0

    @classmethod
    def vacuum(cls, config: SimConfig | None = None) -> HybridState:
        """Vacuum start; the tiny seed center points along ``-i eps(0)`` so ``Re(eps/beta) = 0``."""
        direction = 1.0
        if config is not None:
            eps = config.drive(0.0)
            if eps != 0:
                direction = -1j * eps / abs(eps)
        return cls(VACUUM_SEED * direction, 1.0, 1.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.beta.real, self.beta.imag, self.w1, self.w2, self.k])

    @classmethod
    def from_array(cls, y) -> HybridState:
        return cls(complex(y[0], y[1]), float(y[2]), float(y[3]), float(y[4]))

    def to_params(self) -> FockGaussianParams:
        return FockGaussianParams(
            abs(self.beta), math.atan2(self.beta.imag, self.beta.real), self.w1, self.w2, self.k
        )

    def to_gaussian(self) -> GaussianState:
        return to_phase_space(self.to_params())


@dataclass(frozen=True)
class PhaseShapeState:
    d0: float
    b: float
    delta_theta: float


def re_eps_over_beta(eps: complex, beta: complex, kappa: float) -> float:
    """``Re(eps / beta)`` with the denominator shifted by a negligible ``delta^2``."""
    delta = 1e-12 * math.sqrt(abs(eps) / kappa)
    return (eps * beta.conjugate()).real / (abs(beta) ** 2 + delta * delta)


def _derivatives(beta, w1, w2, k, eps, config: SimConfig):
    n = abs(beta) ** 2
    cb = config.coth_b
    kappa = config.kappa
    re_ratio = re_eps_over_beta(eps, beta, kappa)
    freq = config.detuning + config.nonlinearity.shift(n)
    dbeta = -1j * freq * beta - 0.5 * kappa * beta - 1j * eps
    shear = 1.0 + 16.0 * k * k
    dw1 = 8.0 * k * w1 * re_ratio + kappa * (cb - w1)
    dw2 = 8.0 * k * w2 * re_ratio + kappa * w2 * (1.0 - w2 * shear * cb)
    dk = (
        (0.25 / (w1 * w2) - 0.25 * shear) * re_ratio
        - kappa * k * cb / w1
        + 0.5 * n * config.nonlinearity.slope(n)
    )
    return dbeta, dw1, dw2, dk


def hybrid_rhs(t: float, state: HybridState, config: SimConfig) -> HybridState:
    """Time derivatives of ``(beta, w1, w2, k)``, packed in a :class:`HybridState`."""
    dbeta, dw1, dw2, dk = _derivatives(state.beta, state.w1, state.w2, state.k, config.drive(t), config)
    return HybridState(dbeta, dw1, dw2, dk)


def phase_rhs(t: float, beta: complex, shape: PhaseShapeState, config: SimConfig):
    """Derivatives ``(dD0/dt, db/dt, d(delta_theta)/dt)`` of the phase-space shape.

    ``delta_theta = theta - 2 arg(beta)``; ``b`` is floored at 1e-14 inside the
    division of the angle equation.
    """
    n = abs(beta) ** 2
    eta_b = config.nonlinearity.slope(n)
    eps = config.drive(t)
    kappa = config.kappa
    drive_rot = 2.0 * eta_b * n * math.sin(shape.delta_theta)
    dd0 = -kappa * shape.d0 + 0.25 * kappa * config.coth_b + drive_rot * shape.b
    db = -kappa * shape.b + drive_rot * shape.d0
    b_safe = max(shape.b, 1e-14)
    dtheta = 2.0 * re_eps_over_beta(eps, beta, kappa) - 2.0 * eta_b * n * (
        b_safe - shape.d0 * math.cos(shape.delta_theta)
    ) / b_safe
    return dd0, db, dtheta


def linear_lab_frame_rhs(t: float, center, covariances, config: SimConfig):
    """Laboratory-frame moment equations of a linear resonator (no RWA).

    ``center`` is ``(x_c, p_c)`` and ``covariances`` is ``(D_x, D_p, D_xp)``;
    ``config.omega_r0`` must be set.  Returns the five derivatives.
    """
    if config.omega_r0 is None:
        raise ValueError("linear_lab_frame_rhs needs config.omega_r0")
    w = config.omega_r0
    wd = config.omega_r0 - config.detuning
    kappa = config.kappa
    xc, pc = center
    dx, dp, dxp = covariances
    force = 2.0 * (config.drive(t) * complex(math.cos(wd * t), -math.sin(wd * t))).real
    return (
        w * pc,
        -w * xc - kappa * pc - force,
        2.0 * w * dxp,
        -2.0 * w * dxp - 2.0 * kappa * dp + 0.5 * kappa * config.coth_b,
        -w * (dx - dp) - kappa * dxp,
    )


def linear_center(config: SimConfig, t, beta0: complex = 0j):
    """Closed-form center of a linear resonator under a constant drive."""
    rate = 1j * config.detuning + 0.5 * config.kappa
    steady = -1j * config.drive(0.0) / rate
    return steady + (beta0 - steady) * np.exp(-rate * np.asarray(t))


# -- integration ---------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled hybrid solution; ``gaussians[i]`` is the phase-space form of ``states[i]``."""

    times: np.ndarray
    states: list
    gaussians: list

    @property
    def beta(self):
        return np.array([s.beta for s in self.states])

    @property
    def w1(self):
        return np.array([s.w1 for s in self.states])

    @property
    def w2(self):
        return np.array([s.w2 for s in self.states])

    @property
    def k(self):
        return np.array([s.k for s in self.states])

    @property
    def d0(self):
        return np.array([g.d0 for g in self.gaussians])

    @property
    def b(self):
        return np.array([g.b for g in self.gaussians])

    @property
    def theta(self):
        return np.array([g.theta for g in self.gaussians])

    @property
    def squeeze_factor(self):
        return 1.0 / (4.0 * (self.d0 - self.b))

    @property
    def unsqueeze_factor(self):
        return 4.0 * (self.d0 + self.b)

    @property
    def n_th(self):
        return np.array([g.n_th for g in self.gaussians])

    @property
    def nbar(self):
        return np.array([g.mean_photon() for g in self.gaussians])

    @property
    def photons(self):
        """``|beta|^2`` at each sample."""
        return np.abs(self.beta) ** 2


def _segments(config: SimConfig, t0: float, t1: float):
    cuts = [t for t in config.drive.breakpoints if t0 < t < t1]
    edges = [t0, *cuts, t1]
    return list(zip(edges[:-1], edges[1:]))


def _rk4(f, y, tau0, tau1, h_max):
    steps = max(1, int(math.ceil((tau1 - tau0) / h_max - 1e-9)))
    h = (tau1 - tau0) / steps
    tau = tau0
    for i in range(steps):
        tau = tau0 + i * h
        k1 = f(tau, y)
        k2 = f(tau + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(tau + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(tau + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def integrate(f, y0, times, kappa, segments, *, rtol=RTOL, atol=ATOL, fixed_step=None, method="DOP853"):
    """Integrate ``dy/dtau = f(tau, y, eps)`` over drive segments, sampling at ``times``.

    ``f`` takes the segment's constant drive as third argument.  Time is scaled
    by ``kappa``; ``fixed_step`` (physical time) switches to classic RK4.
    Returns an array of shape ``(len(times), len(y0))``.
    """
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), len(y0)), dtype=np.asarray(y0).dtype)
    y = np.asarray(y0).copy()
    done = 0
    if len(times) and times[0] == segments[0][0][0]:
        out[0] = y
        done = 1
    for (t_a, t_b), eps in segments:
        rhs = lambda tau, yy, _eps=eps: f(tau, yy, _eps)
        mask = (times > t_a) & (times <= t_b)
        sample_tau = kappa * times[mask]
        if fixed_step is not None:
            grid = np.concatenate([[kappa * t_a], sample_tau])
            if grid[-1] < kappa * t_b:
                grid = np.append(grid, kappa * t_b)
            for i in range(1, len(grid)):
                y = _rk4(rhs, y, grid[i - 1], grid[i], kappa * fixed_step)
                if i <= len(sample_tau):
                    out[done] = y
                    done += 1
            continue
        end_tau = kappa * t_b
        eval_tau = sample_tau if len(sample_tau) and sample_tau[-1] == end_tau else np.append(sample_tau, end_tau)
        sol = solve_ivp(rhs, (kappa * t_a, end_tau), y, method=method, t_eval=eval_tau, rtol=rtol, atol=atol)
        if sol.status != 0 or sol.y.shape[1] != len(eval_tau):
            last = sol.t[-1] / kappa if sol.t.size else t_a
            raise IntegrationFailure(f"integration stopped at t={last:.6g}: {sol.message}", last)
        if len(sample_tau):
            out[done : done + len(sample_tau)] = sol.y[:, : len(sample_tau)].T
            done += len(sample_tau)
        y = sol.y[:, -1].copy()
    return out


def _drive_segments(config: SimConfig, t0: float, t1: float):
    return [((a, b), config.drive(0.5 * (a + b))) for a, b in _segments(config, t0, t1)]


def evolve(
    initial: HybridState,
    config: SimConfig,
    sample_times=None,
    *,
    rtol: float = RTOL,
    atol: float = ATOL,
    fixed_step: float | None = None,
    freeze_shape: bool = False,
) -> Trajectory:
    """Integrate the hybrid equations from ``initial`` (at the first sample time).

    Parameters
    ----------
    sample_times : array_like, optional
        Increasing output times; defaults to ``config.sample_times()``.
    fixed_step : float, optional
        Use classic RK4 with at most this step (bit-reproducible output).
    freeze_shape : bool
        Hold ``w1, w2, k`` constant and evolve only the center.

    Raises
    ------
    IntegrationFailure
        If the step size underflows or the shape leaves ``0 < w2 <= w1``.
    """
    times = config.sample_times() if sample_times is None else np.asarray(sample_times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("sample_times must be strictly increasing")
    kappa = config.kappa

    def f(tau, y, eps):
        dbeta, dw1, dw2, dk = _derivatives(complex(y[0], y[1]), y[2], y[3], y[4], eps, config)
        if freeze_shape:
            dw1 = dw2 = dk = 0.0
        return np.array([dbeta.real, dbeta.imag, dw1, dw2, dk]) / kappa

    ys = _run(f, initial.as_array(), times, config, rtol=rtol, atol=atol, fixed_step=fixed_step)
    states = [HybridState.from_array(y) for y in ys]
    for t, s in zip(times, states):
        if not (s.w2 > 0 and s.w2 <= s.w1 * (1 + 1e-10) + 1e-10):
            raise IntegrationFailure(f"shape left 0 < w2 <= w1 at t={t:.6g}: w1={s.w1}, w2={s.w2}", t)
    return Trajectory(times, states, [s.to_gaussian() for s in states])


def _run(f, y0, times, config, **kwargs):
    return integrate(f, y0, times, config.kappa, _drive_segments(config, times[0], times[-1]), **kwargs)


def evolve_phase_space(beta0: complex, shape0: PhaseShapeState, config: SimConfig, sample_times, *, rtol=1e-11, atol=1e-13):
    """Integrate the center with the ``(d0, b, delta_theta)`` equations.

    Returns ``(beta, GaussianState list)`` at ``sample_times``.
    """
    kappa = config.kappa

    def f(tau, y, eps):
        beta = complex(y[0], y[1])
        n = abs(beta) ** 2
        dbeta = -1j * (config.detuning + config.nonlinearity.shift(n)) * beta - 0.5 * kappa * beta - 1j * eps
        shape = PhaseShapeState(y[2], y[3], y[4])
        dd0, db, dth = phase_rhs(tau / kappa, beta, shape, _ConstDriveView(config, eps))
        return np.array([dbeta.real, dbeta.imag, dd0, db, dth]) / kappa

    y0 = np.array([beta0.real, beta0.imag, shape0.d0, shape0.b, shape0.delta_theta])
    times = np.asarray(sample_times, dtype=float)
    ys = _run(f, y0, times, config, rtol=rtol, atol=atol)
    betas = ys[:, 0] + 1j * ys[:, 1]
    states = [
        GaussianState(beta, d0, b, dth + 2.0 * math.atan2(beta.imag, beta.real))
        for beta, d0, b, dth in zip(betas, ys[:, 2], ys[:, 3], ys[:, 4])
    ]
    return betas, states


class _ConstDriveView:
    """Config proxy whose drive is a fixed amplitude (used inside one segment)."""

    def __init__(self, config, eps):
        self._config = config
        self._eps = eps

    def __getattr__(self, name):
        return getattr(self._config, name)

    def drive(self, t):
        return self._eps


def evolve_lab_frame(config: SimConfig, sample_times, center0=(0.0, 0.0), cov0=(0.25, 0.25, 0.0), *, rtol=1e-10, atol=1e-12):
    """Integrate :func:`linear_lab_frame_rhs`; returns an array ``(len(times), 5)``."""
    times = np.asarray(sample_times, dtype=float)

    def f(t, y):
        return np.array(linear_lab_frame_rhs(t, y[:2], y[2:], config))

    sol = solve_ivp(f, (times[0], times[-1]), np.r_[center0, cov0], method="DOP853", t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationFailure(sol.message)
    return sol.y.T


def peak_photons(config: SimConfig, t_final: float | None = None, initial: HybridState | None = None):
    """Maximum ``|beta|^2`` and ``w1`` over a cheap hybrid run (used to size Fock bases)."""
    t_final = config.t_final if t_final is None else t_final
    times = np.linspace(0.0, t_final, 2001)
    traj = evolve(initial or HybridState.vacuum(config), config, times, rtol=1e-7, atol=1e-10)
    return float(traj.photons.max()), float(traj.w1.max())

"""Steady states of a driven Kerr resonator: classical amplitudes, squeezing and heating.

Dimensionless quantities use ``kappa = 1`` and ``|eta| = 1``: the photon number
is ``n_tilde = n |eta| / kappa`` and the steady amplitude solves
``n_tilde [(n_tilde - delta)^2 + 1/4] = |eps_tilde|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DimensionlessConfig, KerrNonlinearity, SimConfig, rescale
from .errors import BranchAmbiguity, InstabilityBound
from .gaussian_state import GaussianState

CRITICAL_EPS = 3.0 ** -0.75
CRITICAL_DELTA = math.sqrt(3.0) / 2.0
#: Relative distance to the critical point below which it is flagged.
CRITICAL_TOL = 0.01


@dataclass(frozen=True)
class SteadyBranch:
    beta: complex
    n_tilde: float
    stability_label: str  # "lower", "middle" (unstable) or "upper"


def _cubic_roots(a2: float, a1: float, a0: float) -> list[float]:
    """Real roots of ``x^3 + a2 x^2 + a1 x + a0`` (trigonometric / hyperbolic forms), ascending."""
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = 4.0 * p**3 + 27.0 * q * q
    if p < 0 and disc <= 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        phi = math.acos(arg) / 3.0
        roots = [m * math.cos(phi - 2.0 * math.pi * j / 3.0) for j in range(3)]
    elif p < 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        roots = [-math.copysign(1.0, q) * m * math.cosh(math.acosh(-3.0 * abs(q) / (p * m)) / 3.0)]
    elif p > 0:
        m = 2.0 * math.sqrt(p / 3.0)
        roots = [-m * math.sinh(math.asinh(3.0 * q / (p * m)) / 3.0)]
    else:
        roots = [-math.copysign(abs(q) ** (1.0 / 3.0), q)]
    return sorted(t - shift for t in roots)


def _newton(x, a2, a1, a0):
    f = ((x + a2) * x + a1) * x + a0
    df = (3.0 * x + 2.0 * a2) * x + a1
    return x - f / df if df != 0 else x


def _center(eps_tilde: complex, n: float, delta: float, sign: int) -> complex:
    return -1j * eps_tilde / (1j * sign * (n - delta) + 0.5)


def bistability_bounds(delta: float):
    """``(eps_lower, eps_upper)`` of the bistable drive range, or ``None`` for ``delta <= sqrt(3)/2``."""
    if delta <= CRITICAL_DELTA:
        return None
    root = math.sqrt(delta * delta - 0.75)

    def level(n):
        return math.sqrt(n * (n - delta) ** 2 + n / 4.0)

    # the larger turning point bounds the range from below
    return level((2.0 * delta + root) / 3.0), level((2.0 * delta - root) / 3.0)


def steady_centers(eps_tilde: complex, delta_omega_tilde: float, sign_eta: int = -1) -> list[SteadyBranch]:
    """Classical steady amplitudes in dimensionless units, ordered by photon number."""
    eps2 = abs(eps_tilde) ** 2
    delta = delta_omega_tilde
    coeffs = (-2.0 * delta, delta * delta + 0.25, -eps2)
    roots = [max(0.0, _newton(x, *coeffs)) for x in _cubic_roots(*coeffs)]
    if len(roots) == 3:
        labels = ["lower", "middle", "upper"]
    else:
        bounds = bistability_bounds(delta)
        labels = ["upper" if bounds is not None and abs(eps_tilde) > bounds[1] else "lower"]
    return [SteadyBranch(_center(eps_tilde, n, delta, sign_eta), n, lab) for n, lab in zip(roots, labels)]


def critical_distance(eps_tilde: float, delta_omega_tilde: float) -> float:
    """Largest relative deviation from the critical point ``(3^{-3/4}, sqrt(3)/2)``."""
    return max(abs(abs(eps_tilde) / CRITICAL_EPS - 1.0), abs(delta_omega_tilde / CRITICAL_DELTA - 1.0))


def root_structure(eps_tilde: complex, delta_omega_tilde: float) -> dict:
    """Number of distinct roots, largest root multiplicity, and a near-critical flag."""
    branches = steady_centers(eps_tilde, delta_omega_tilde)
    near_critical = critical_distance(eps_tilde, delta_omega_tilde) < CRITICAL_TOL
    if near_critical:
        multiplicity = 3
    else:
        ns = [b.n_tilde for b in branches]
        close = [abs(x - y) < 1e-6 * max(1.0, y) for x, y in zip(ns, ns[1:])]
        multiplicity = 1 + sum(close)
    return {
        "n_roots": len(branches),
        "multiplicity": multiplicity,
        "near_critical": near_critical,
        "critical_distance": critical_distance(eps_tilde, delta_omega_tilde),
    }


def steady_branches(config: SimConfig) -> list[SteadyBranch]:
    """Steady branches of a Kerr (or linear) configuration with constant drive, in physical units."""
    eps = config.drive(0.0)
    if not isinstance(config.nonlinearity, KerrNonlinearity):
        raise TypeError("closed-form steady states need a Kerr nonlinearity")
    if config.eta == 0:
        beta = -1j * eps / (1j * config.detuning + 0.5 * config.kappa)
        return [SteadyBranch(beta, 0.0, "lower")]
    dim = rescale(config)
    scale = config.kappa / abs(config.eta)
    out = []
    for br in steady_centers(dim.eps_tilde, dim.delta_omega_tilde, dim.sign_eta):
        n = br.n_tilde * scale
        beta = -1j * eps / (1j * (config.detuning + config.nonlinearity.shift(n)) + 0.5 * config.kappa)
        out.append(SteadyBranch(beta, br.n_tilde, br.stability_label))
    return out


def steady_shape(beta: complex, config: SimConfig):
    """Steady Gaussian shape around the center ``beta``.

    Returns
    -------
    state : GaussianState
    squeeze_factor, unsqueeze_factor : float

    Raises
    ------
    InstabilityBound
        If ``2 eta_beta |beta|^2 sin(delta_theta) >= kappa``.
    """
    n = abs(beta) ** 2
    eta_b = config.nonlinearity.slope(n)
    kappa = config.kappa
    re_ratio = (config.drive(0.0) / beta).real if beta != 0 else 0.0
    sign = 1.0 if eta_b >= 0 else -1.0
    # continuous completion of the arctangent branch; sin has the sign of eta
    delta_theta = math.atan2(sign * 0.5 * kappa, sign * (eta_b * n - re_ratio))
    x = 2.0 * eta_b * n * math.sin(delta_theta) / kappa
    if x >= 1.0:
        raise InstabilityBound(f"b/D0 = {x:.6g} >= 1: beyond the parametric instability")
    d0 = 0.25 * config.coth_b / (1.0 - x * x)
    b = x * d0
    theta = delta_theta + 2.0 * math.atan2(beta.imag, beta.real)
    state = GaussianState(beta, d0, b, theta)
    return state, state.squeeze_factor, state.unsqueeze_factor


def drummond_state(beta: complex, config: SimConfig) -> GaussianState:
    """Steady Gaussian state from the Duffing-oscillator moment formulas (Kerr only)."""
    eta = config.eta
    n = abs(beta) ** 2
    cb = config.coth_b
    shift = config.detuning + 2.0 * eta * n
    lam = shift * shift + 0.25 * config.kappa**2 - eta * eta * n * n
    a2 = beta * beta - eta * beta * beta * complex(shift, 0.5 * config.kappa) * cb / (2.0 * lam)
    mean_n = n + eta * eta * n * n * cb / (2.0 * lam) + config.n_b
    return GaussianState.from_moments(beta, a2, mean_n)


def three_db_bound_check(configs) -> dict:
    """Scan steady branches of ``configs`` and report the extreme squeezing values.

    Branches past the instability bound are skipped (and counted).
    """
    max_squeeze = 0.0
    min_ratio = math.inf
    skipped = 0
    count = 0
    for cfg in configs:
        for br in steady_branches(cfg):
            try:
                state, squeeze, _ = steady_shape(br.beta, cfg)
            except InstabilityBound:
                skipped += 1
                continue
            count += 1
            max_squeeze = max(max_squeeze, squeeze)
            min_ratio = min(min_ratio, 4.0 * (state.d0 - state.b) / cfg.coth_b)
    return {"max_squeeze": max_squeeze, "min_short_variance_ratio": min_ratio, "points": count, "skipped": skipped}


def _dykman_from_q(q2: float, n_b: float):
    xi = 0.25 * math.log((3.0 * q2 - 1.0) / (q2 - 1.0))
    return xi, n_b + (2.0 * n_b + 1.0) * math.sinh(xi) ** 2


def dykman_limit(beta_param: float, n_b: float = 0.0, branch: str | None = None):
    """Weak-damping squeezing ``xi`` and thermal occupation for ``beta_param = eps^2 eta / (omega_d - omega_r0)^3``.

    Negative ``xi`` means squeezing with ``theta = pi``.

    Raises
    ------
    BranchAmbiguity
        For ``0 < beta_param < 4/27`` when ``branch`` ("upper" or "lower") is not given;
        ``err.branches`` holds both results.
    """
    if beta_param == 0:
        raise ValueError("beta_param = 0 is degenerate")
    root = math.sqrt(abs(beta_param))
    if beta_param < 0:
        # Q = i y with y^3 + y + sqrt|P| = 0
        y = _cubic_roots(0.0, 1.0, root)[0]
        return _dykman_from_q(-y * y, n_b)
    qs = _cubic_roots(0.0, -1.0, -root)
    if len(qs) == 1:
        return _dykman_from_q(qs[0] ** 2, n_b)
    results = {"upper": _dykman_from_q(qs[2] ** 2, n_b), "lower": _dykman_from_q(qs[1] ** 2, n_b)}
    if branch is None:
        raise BranchAmbiguity("bistable parameter: choose the 'upper' or 'lower' branch", results)
    return results[branch]


def dimensionless_grid(eps_values, delta_values, n_b: float = 0.0, sign_eta: int = -1):
    """Kerr configurations (``kappa = |eta| = 1``) over a grid of ``(eps_tilde, delta_omega_tilde)``."""
    for eps in np.atleast_1d(eps_values):
        for delta in np.atleast_1d(delta_values):
            yield DimensionlessConfig(float(eps), float(delta), sign_eta).to_config().with_(n_b=n_b)

"""State comparison: fidelity, Gaussian fits, numeric Wigner/Husimi functions.

Displaced squeezed thermal (DSTS) matrices are built from the vectors
``D(alpha) S(xi) |k>`` with ``S(xi) = exp[(xi^* a^2 - xi a^dag^2)/2]`` and
``xi = r e^{i theta}``, so that ``theta = 0`` squeezes the ``x`` quadrature.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy import sparse
from scipy.linalg import eigh, svdvals
from scipy.sparse.linalg import expm_multiply

from .errors import NegativeSpectrum, NonHermitianInput, TruncationOverflow
from .fock_gaussian import (
    FockGaussianParams,
    corrected_center,
    density_matrix,
    fock_window,
    to_phase_space,
)
from .gaussian_state import DstsShape, GaussianState
from .lindblad import FockDensityMatrix, coherent_vector, moments, thermal_populations

PAD = 20
CLIP = 1e-10
#: Eigenvalues below this fraction of the largest are treated as zero.
EIG_TOL = 1e-12
#: Thermal components with weight below this are dropped from DSTS matrices.
WEIGHT_CUTOFF = 1e-16


def _as_array(rho):
    return rho.data if isinstance(rho, FockDensityMatrix) else np.asarray(rho, dtype=complex)


def _check_hermitian(mat, name):
    scale = max(1.0, float(np.abs(mat).max()))
    err = float(np.abs(mat - mat.conj().T).max())
    if err > 1e-10 * scale:
        raise NonHermitianInput(f"{name} is not Hermitian (max asymmetry {err:.3g})")


def _factor(mat, name):
    """``B`` with ``mat = B B^dag`` from the Hermitian eigendecomposition.

    Eigenvalues below ``-CLIP`` raise; those below ``EIG_TOL`` times the largest
    are rounding noise and dropped (their square roots would be ~1e-8).
    """
    vals, vecs = eigh(mat)
    if vals.min() < -CLIP:
        raise NegativeSpectrum(f"{name} has eigenvalue {vals.min():.3g} below -{CLIP:g}")
    keep = vals > EIG_TOL * max(float(vals.max()), 0.0)
    return vecs[:, keep] * np.sqrt(vals[keep])


def _root_fidelity(b1, b2):
    # Tr sqrt(sqrt(r1) r2 sqrt(r1)) is the sum of singular values of B1^dag B2
    if b1.shape[1] == 0 or b2.shape[1] == 0:
        return 0.0
    return float(svdvals(b1.conj().T @ b2).sum())


def fidelity(rho1, rho2) -> float:
    """``(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2 / (Tr rho1 Tr rho2)``.

    Raises
    ------
    NonHermitianInput, NegativeSpectrum
    """
    a = _as_array(rho1)
    b = _as_array(rho2)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    _check_hermitian(a, "rho1")
    _check_hermitian(b, "rho2")
    a = 0.5 * (a + a.conj().T)
    b = 0.5 * (b + b.conj().T)
    overlap = _root_fidelity(_factor(a, "rho1"), _factor(b, "rho2"))
    return float(overlap**2 / (np.trace(a).real * np.trace(b).real))


def fidelity_low_rank(vectors: np.ndarray, weights, rho) -> float:
    """Fidelity of ``sum_k w_k |v_k><v_k|`` (columns of ``vectors``) against ``rho``.

    Equal to :func:`fidelity` without forming the first matrix; the columns
    must be orthogonal.
    """
    mat = _as_array(rho)
    weights = np.asarray(weights, dtype=float)
    factor = vectors * np.sqrt(weights)
    overlap = _root_fidelity(factor, _factor(0.5 * (mat + mat.conj().T), "rho"))
    trace_sigma = float(np.sum(np.abs(factor) ** 2))
    return float(overlap**2 / (trace_sigma * np.trace(mat).real))


# -- DSTS construction -----------------------------------------------------------


def _ladder(dim):
    return sparse.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, format="csr", dtype=complex)


def displace(vectors, alpha: complex):
    """Apply the (truncated-generator) displacement ``D(alpha)`` to the columns of ``vectors``."""
    if alpha == 0:
        return vectors
    a = _ladder(vectors.shape[0])
    return expm_multiply(alpha * a.T - np.conj(alpha) * a, vectors)


def squeeze(vectors, r: float, theta: float):
    if r == 0:
        return vectors
    a = _ladder(vectors.shape[0])
    xi = r * complex(math.cos(theta), math.sin(theta))
    a2 = a @ a
    return expm_multiply(0.5 * (np.conj(xi) * a2 - xi * (a2.T)), vectors)


def squeezed_coherent_vector(alpha: complex, r: float, theta: float, dim: int) -> np.ndarray:
    """Amplitudes of ``D(alpha) S(xi)|0>`` from the three-term recursion of its annihilator.

    The state is killed by ``cosh r (a - alpha) + e^{i theta} sinh r (a^dag - alpha^*)``;
    the recursion runs upward from ``|0>`` with periodic rescaling and the
    result is normalized over ``dim`` states.  The global phase is arbitrary.
    """
    ratio = math.tanh(r) * complex(math.cos(theta), math.sin(theta))
    gain = alpha + np.conj(alpha) * ratio
    root = np.sqrt(np.arange(dim, dtype=float))
    c = np.zeros(dim, dtype=complex)
    c[0] = 1.0
    prev = 0j
    for k in range(dim - 1):
        c[k + 1] = (gain * c[k] - ratio * root[k] * prev) / root[k + 1]
        prev = c[k]
        if abs(c[k + 1]) > 1e100:
            c[: k + 2] *= 1e-100
            prev *= 1e-100
    return c / np.linalg.norm(c)


def _thermal_weights(n_th):
    if n_th <= 0:
        return np.array([1.0])
    p = thermal_populations(n_th, 10_000)
    keep = max(1, int(np.searchsorted(-p, -WEIGHT_CUTOFF)))
    return p[:keep]


def _working_dim(dim, center, r, n_levels):
    spread = math.sqrt(n_levels) * math.exp(r) + 2.0 * math.sinh(r) + abs(center) + 8.0
    return max(dim + PAD, int(math.ceil(spread**2)) + PAD)


def dsts_vectors(center: complex, shape: DstsShape, dim: int):
    """Columns ``D(alpha) S(xi) |k>`` truncated to ``dim`` and the thermal weights ``p_k``.

    Raises
    ------
    TruncationOverflow
        If a column loses more than 1e-10 of its norm to truncation.
    """
    weights = _thermal_weights(shape.n_th)
    work = _working_dim(dim, center, shape.r, len(weights))
    if len(weights) == 1:
        vec = squeezed_coherent_vector(center, shape.r, shape.theta, work)
        lost = 1.0 - np.sum(np.abs(vec[:dim]) ** 2)
        if lost > 1e-10:
            raise TruncationOverflow(f"DSTS does not fit in {dim} Fock states (norm loss {lost:.3g})")
        return vec[:dim, None], weights
    basis = np.zeros((work, len(weights)), dtype=complex)
    basis[np.arange(len(weights)), np.arange(len(weights))] = 1.0
    vecs = displace(squeeze(basis, shape.r, shape.theta), center)
    lost = 1.0 - np.sum(np.abs(vecs[:dim]) ** 2, axis=0)
    if np.any(lost * weights / weights[0] > 1e-10):
        raise TruncationOverflow(f"DSTS does not fit in {dim} Fock states (norm loss {lost.max():.3g})")
    return vecs[:dim], weights


def dsts_density(center: complex, shape: DstsShape, dim: int) -> FockDensityMatrix:
    """Displaced squeezed thermal density matrix in a ``dim``-state basis."""
    vecs, weights = dsts_vectors(center, shape, dim)
    return FockDensityMatrix((vecs * weights) @ vecs.conj().T)


def gaussian_vectors(state: GaussianState, dim: int):
    return dsts_vectors(state.center, state.to_dsts(), dim)


def gaussian_density(state: GaussianState, dim: int) -> FockDensityMatrix:
    return dsts_density(state.center, state.to_dsts(), dim)


def gaussian_fidelity(state: GaussianState, rho) -> float:
    """Fidelity between a phase-space Gaussian state and a density matrix."""
    mat = _as_array(rho)
    vecs, weights = gaussian_vectors(state, mat.shape[0])
    return fidelity_low_rank(vecs, weights, mat)


def gaussian_fit(rho):
    """Gaussian state with the moments ``<a>, <a^2>, <a^dag a>`` of ``rho`` and its infidelity."""
    state = GaussianState.from_moments(*moments(rho if isinstance(rho, FockDensityMatrix) else FockDensityMatrix(rho)))
    return state, 1.0 - gaussian_fidelity(state, rho)


def coherent_infidelity(beta: complex, rho) -> float:
    """``1 - <beta|rho|beta> / Tr rho``."""
    mat = _as_array(rho)
    v = coherent_vector(beta, mat.shape[0])
    return float(1.0 - (v.conj() @ mat @ v).real / np.trace(mat).real)


# -- quasi-probability functions --------------------------------------------------


def _occupied_top(mat, tol=1e-14):
    """One past the highest level whose population exceeds ``tol`` times the largest."""
    pops = np.abs(mat.diagonal())
    idx = np.nonzero(pops > tol * pops.max())[0]
    return int(idx[-1]) + 1 if idx.size else 1


@functools.lru_cache(maxsize=8)
def _displacement_basis(work: int):
    """Eigenvectors ``V`` and phases ``lam`` of ``a^dag - a = V diag(i lam) V^dag``, plus ``V^dag P V``."""
    a = _ladder(work).toarray()
    lam, vecs = eigh(1j * (a.T - a))
    parity = np.where(np.arange(work) % 2 == 0, 1.0, -1.0)
    return vecs, -lam, (vecs.conj().T * parity) @ vecs


def wigner_numeric(rho, alpha: complex) -> float:
    """``(2/pi) Tr[D(-alpha) rho D(alpha) P]`` with parity ``P = (-1)^{a^dag a}``.

    The displacement is the exact exponential of its truncated generator on a
    padded basis, ``D(alpha) = U exp(|alpha| (a^dag - a)) U^dag`` with
    ``U = exp(i arg(alpha) a^dag a)``.

    Raises
    ------
    TruncationOverflow
        If the displaced state puts more than 1e-8 of its trace on the top
        ``PAD // 2`` levels of the padded basis.
    """
    mat = _as_array(rho)
    top = _occupied_top(mat)
    need = max(top + PAD, int(math.ceil((math.sqrt(top) + abs(alpha) + 8.0) ** 2)))
    work = 64 * int(math.ceil(need / 64))  # coarse sizes keep the cache small
    vecs, lam, parity = _displacement_basis(work)
    # the rotation U only changes phases of rho's elements
    phase = np.exp(-1j * math.atan2(alpha.imag, alpha.real) * np.arange(top))
    block = phase[:, None] * mat[:top, :top] * phase.conj()[None, :]
    # E = exp(-|alpha| (a^dag - a)); rows @ V^dag = E^dag restricted to occupied levels
    rows = vecs[:top] * np.exp(1j * abs(alpha) * lam)
    edge = vecs[-PAD // 2 :] @ rows.conj().T
    lost = float(np.einsum("ij,jk,ik->", edge, block, edge.conj()).real)
    if lost > 1e-8 * max(1.0, abs(np.trace(mat))):
        raise TruncationOverflow(f"displacement by {alpha} leaks {lost:.3g} of the trace")
    parity_block = rows @ parity @ rows.conj().T  # (E^dag P E) on occupied levels
    return float(2.0 / math.pi * np.sum(block * parity_block.T).real)


def husimi_numeric(rho, alpha: complex) -> float:
    """``(1/pi) <alpha|rho|alpha>``."""
    mat = _as_array(rho)
    v = coherent_vector(alpha, mat.shape[0])
    return float((v.conj() @ mat @ v).real / math.pi)


def wigner_axis_variance(rho, state: GaussianState, *, points: int = 41, half_width: float = 4.0) -> float:
    """Short-axis variance of the numeric Wigner function.

    ``W`` is sampled through the center of ``state`` along its short axis over
    ``+-half_width`` standard deviations; a parabola is fitted to ``log W`` by
    least squares and the variance is read from its curvature.
    """
    sigma = math.sqrt(state.d0 - state.b)
    direction = complex(math.cos(0.5 * state.theta), math.sin(0.5 * state.theta))
    u = np.linspace(-half_width * sigma, half_width * sigma, points)
    w = np.array([wigner_numeric(rho, state.center + s * direction) for s in u])
    good = w > 0
    curvature = np.polyfit(u[good], np.log(w[good]), 2)[0]
    return float(-0.5 / curvature)


# -- conversion accuracy ----------------------------------------------------------------


def conversion_infidelity_estimate(d0: float, b: float, beta_abs: float, coefficient: float = 0.04) -> float:
    """Approximate conversion infidelity ``coefficient * [4(d0+b)]^3 / |beta|^2``."""
    return coefficient * (4.0 * (d0 + b)) ** 3 / beta_abs**2


def conversion_infidelity(params: FockGaussianParams, center_correction: bool = False, n_sigmas: float = 8.0) -> float:
    """Infidelity between the Fock-space Gaussian matrix and its phase-space conversion.

    The Fock-space matrix is evaluated on its ``n_sigmas`` window only, so
    large ``|beta|`` stays cheap.
    """
    state = to_phase_space(params)
    if center_correction:
        state = state.shifted(corrected_center(params))
    lo, hi = fock_window(params, n_sigmas)
    rho = density_matrix(params, lo, hi)
    # the phase-space state has a slightly wider number distribution than the window
    margin = int(math.ceil(4.0 * params.n_sigma)) + PAD
    vecs, weights = dsts_vectors(state.center, state.to_dsts(), hi + margin)
    return 1.0 - fidelity_low_rank(vecs[lo:hi], weights, rho)


def validity_ratio(state: GaussianState) -> float:
    """``|beta|^2 / [4(d0+b)]^3``; the Gaussian description needs this to be large."""
    return abs(state.center) ** 2 / (4.0 * (state.d0 + state.b)) ** 3

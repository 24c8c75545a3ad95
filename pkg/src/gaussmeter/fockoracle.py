"""Brute-force verification engine on a truncated number basis.

Everything here is dense linear algebra over the first ``dim`` number
states per mode: thermal states, displacement operators (via the matrix
exponential of the truncated generator, evaluated spectrally), the
measurement's operator density, posterior states, moment extraction,
phase averaging, and direct numerical evaluation of the entropy-reduction
integral.  One mode integrates on a Cartesian trapezoid grid; two modes
integrate by seeded importance-sampling Monte Carlo.

Outcomes whose displaced noise state cannot be represented faithfully at
the chosen truncation are skipped, with the dropped probability charged
against the quadrature mass budget; see :func:`validity_radius`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    GridMassDeficit,
    NegligibleOutcome,
    TruncationTooSmall,
)
from .matfun import LogBase

# Default probability-mass tolerance of the numerically integrated outcome
# distribution.
MASS_TOL = 1e-3

# Outcomes with numeric density below this are skipped (tracked as mass).
P_MIN = 1e-14

# Eigenvalues below this are dropped from entropy sums (truncation noise floor).
ENTROPY_FLOOR = 1e-14

# Default bound on the unrepresented tail of a truncated thermal state.
TAIL_TOL = 1e-6


def annihilation(dim: int) -> np.ndarray:
    """Single-mode lowering operator on the first ``dim`` number states."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def suggested_dimension(mean_correlation: float, noise: float) -> int:
    """Truncation heuristic: geometric thermal tails shrink fast in ``dim``."""
    return max(24, math.ceil(12.0 * (max(mean_correlation, noise) + 1.0)))


def validity_radius(dim: int, noise: float) -> float:
    """Largest outcome amplitude representable faithfully at this truncation.

    A noise state displaced by ``z`` occupies number levels around
    ``|z|^2 + nbar`` with spread ``sqrt(|z|^2 (2 nbar + 1) + nbar(nbar+1))``;
    the radius solves for the displacement that keeps one spread inside the
    retained space.  Beyond it the truncated operators fold back and the
    numeric outcome density becomes unreliable.
    """
    nbar = float(noise)

    def fits(r: float) -> bool:
        spread = math.sqrt(r * r * (2.0 * nbar + 1.0) + nbar * (nbar + 1.0) + 1.0)
        return r * r + nbar + spread <= dim

    lo, hi = 0.0, math.sqrt(dim)
    for _ in range(60):
        mid = (lo + hi) / 2.0
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _thermal_diagonal(mean_number: float, dim: int, tail_tol: float) -> np.ndarray:
    if dim < 2:
        raise DimensionMismatch(f"truncation must keep at least 2 levels, got {dim}")
    if mean_number < 0.0:
        raise ValueError(f"mean occupation must be nonnegative, got {mean_number}")
    if mean_number == 0.0:
        probs = np.zeros(dim)
        probs[0] = 1.0
        return probs
    ratio = mean_number / (mean_number + 1.0)
    tail = ratio**dim
    if tail > tail_tol:
        raise TruncationTooSmall(
            f"thermal tail mass {tail:.2e} at dim={dim} exceeds {tail_tol:.0e}"
        )
    n = np.arange(dim)
    return ratio**n / (mean_number + 1.0)


def thermal_state(mean_number, dim: int, tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Thermal density operator, or a product of them for several modes.

    Args:
        mean_number: scalar occupation, or one occupation per mode.
        dim: per-mode truncation dimension.
        tail_tol: bound on the discarded geometric tail per mode.

    Raises:
        TruncationTooSmall: if the discarded tail exceeds ``tail_tol``.
    """
    means = np.atleast_1d(np.asarray(mean_number, dtype=float))
    out = np.diag(_thermal_diagonal(means[0], dim, tail_tol)).astype(complex)
    for mean in means[1:]:
        out = np.kron(out, np.diag(_thermal_diagonal(mean, dim, tail_tol)))
    return out


@lru_cache(maxsize=8)
def _displacement_basis(dim: int):
    """Eigendecompositions driving the displacement exponential.

    ``a^dag - a`` generates real displacements and ``a^dag + a`` imaginary
    ones; both are normal, so the exponential is evaluated exactly on the
    truncated space through their spectra.
    """
    a = annihilation(dim)
    ad = a.conj().T
    theta_re, v_re = np.linalg.eigh(1j * (ad - a))
    theta_im, v_im = np.linalg.eigh(ad + a)
    return theta_re, v_re, theta_im, v_im


def _displacement_batch(zs: np.ndarray, dim: int) -> np.ndarray:
    """Stack of truncated displacement operators for an array of amplitudes.

    Splits ``D(x + iy)`` into real and imaginary displacements joined by the
    composition phase; each factor is the matrix exponential of its
    truncated generator.
    """
    theta_re, v_re, theta_im, v_im = _displacement_basis(dim)
    xs, ys = zs.real, zs.imag
    dx = np.einsum(
        "ij,kj,lj->kil", v_re, np.exp(-1j * np.outer(xs, theta_re)), v_re.conj()
    )
    dy = np.einsum(
        "ij,kj,lj->kil", v_im, np.exp(1j * np.outer(ys, theta_im)), v_im.conj()
    )
    return np.exp(1j * xs * ys)[:, None, None] * (dx @ dy)


def unitarity_defect(op: np.ndarray) -> float:
    """Max-norm deviation of ``op^dag op`` from the identity."""
    dim = op.shape[0]
    return float(np.abs(op.conj().T @ op - np.eye(dim)).max())


def displacement(z, dim: int) -> np.ndarray:
    """Truncated displacement operator ``exp(z a^dag - conj(z) a)``.

    Accepts one amplitude per mode; multimode operators are tensor
    products.  Warns when ``|z|^2 > dim/4`` (the action on low-lying states
    degrades well before the amplitude reaches ``sqrt(dim)``).

    Raises:
        TruncationTooSmall: if the constructed matrix fails the unitarity
            check, which only happens on arithmetic blowup since the
            truncated generator is exactly anti-Hermitian.
    """
    amps = np.atleast_1d(np.asarray(z, dtype=complex))
    out = None
    for amp in amps:
        if abs(amp) ** 2 > dim / 4.0:
            warnings.warn(
                f"displacement amplitude |z|^2 = {abs(amp)**2:.1f} exceeds dim/4 = "
                f"{dim / 4.0:.1f}; matrix elements near the truncation edge are inaccurate",
                stacklevel=2,
            )
        op = _displacement_batch(np.array([amp]), dim)[0]
        out = op if out is None else np.kron(out, op)
    if unitarity_defect(out) > 1e-6:
        raise TruncationTooSmall("displacement failed the unitarity check")
    return out


def povm_density(noise, z, dim: int, tail_tol: float = TAIL_TOL) -> np.ndarray:
    """Operator density ``D(z) rho_noise D(z)^dag`` of the measurement POVM."""
    d_op = displacement(z, dim)
    return d_op @ thermal_state(noise, dim, tail_tol) @ d_op.conj().T


def validate_density(rho: np.ndarray, trace_tol: float = 1e-6) -> np.ndarray:
    """Check Hermiticity, normalization and positivity of a density operator."""
    rho = np.asarray(rho, dtype=complex)
    defect = np.abs(rho - rho.conj().T).max(initial=0.0)
    if defect > 1e-9 * (1.0 + np.abs(rho).max(initial=0.0)):
        raise ValueError(f"density operator asymmetry {defect:.3e}")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > trace_tol:
        raise ValueError(f"density operator trace {trace} is not 1 within {trace_tol}")
    w_min = np.linalg.eigvalsh(rho).min()
    if w_min < -1e-10:
        raise ValueError(f"density operator has eigenvalue {w_min:.3e}")
    return rho


def von_neumann_entropy(rho: np.ndarray, base: LogBase = LogBase.BITS) -> float:
    """Entropy of a PSD operator; eigenvalues below the noise floor are dropped."""
    w = np.linalg.eigvalsh(rho)
    w = w[w > ENTROPY_FLOOR]
    return float(-(w * np.log(w)).sum() / base.ln_base)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of the difference of two Hermitian operators."""
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def _sqrt_thermal(noise, dim: int, tail_tol: float) -> np.ndarray:
    means = np.atleast_1d(np.asarray(noise, dtype=float))
    diag = np.sqrt(_thermal_diagonal(means[0], dim, tail_tol))
    for mean in means[1:]:
        diag = np.kron(diag, np.sqrt(_thermal_diagonal(mean, dim, tail_tol)))
    return np.diag(diag).astype(complex)


def posterior_state(
    rho: np.ndarray,
    noise,
    z,
    p_min: float = P_MIN,
    tail_tol: float = TAIL_TOL,
) -> tuple[np.ndarray, float]:
    """Posterior state and outcome density for outcome ``z``.

    Returns the unit-trace operator
    ``sqrt(rho_noise) D(z)^dag rho D(z) sqrt(rho_noise) / p`` together with
    the density value ``p`` (against ``d^{2s}z / pi^s``).

    Raises:
        NegligibleOutcome: when ``p`` falls below ``p_min``.
    """
    modes = np.atleast_1d(np.asarray(z)).size
    dim = round(rho.shape[0] ** (1.0 / modes))
    if dim**modes != rho.shape[0]:
        raise DimensionMismatch(
            f"state dimension {rho.shape[0]} is not a {modes}-mode power"
        )
    d_op = displacement(z, dim)
    root = _sqrt_thermal(noise, dim, tail_tol)
    raw = root @ d_op.conj().T @ rho @ d_op @ root
    p = float(np.trace(raw).real)
    if p < p_min:
        raise NegligibleOutcome(f"outcome density {p:.3e} below {p_min:.0e}")
    return raw / p, p


def normal_moments(rho: np.ndarray) -> tuple[complex, float, complex]:
    """First, normal second, and anomalous second moments of a one-mode state.

    Returns ``(<a>, Tr a rho a^dag, <a a>)``.
    """
    a = annihilation(rho.shape[0])
    first = complex(np.trace(rho @ a))
    normal = float(np.trace(a @ rho @ a.conj().T).real)
    anomalous = complex(np.trace(rho @ a @ a))
    return first, normal, anomalous


def gauge_average(rho: np.ndarray, modes: int = 1) -> np.ndarray:
    """Average a state over the phase group of the total number operator.

    For one mode this keeps exactly the diagonal of the number basis; for
    several modes it keeps matrix elements between states of equal total
    occupation.  Normal second moments are preserved, first and anomalous
    moments are annihilated.
    """
    rho = np.asarray(rho, dtype=complex)
    if modes == 1:
        return np.diag(np.diag(rho))
    dim = round(rho.shape[0] ** (1.0 / modes))
    grids = np.meshgrid(*([np.arange(dim)] * modes), indexing="ij")
    totals = sum(grids).ravel()
    mask = totals[:, None] == totals[None, :]
    return rho * mask


@dataclass(frozen=True)
class OutcomeGrid:
    """Quadrature rule for the outcome integral.

    ``points`` holds complex outcomes, shape ``(n,)`` for one mode or
    ``(n, 2)`` for two; ``weights`` are the quadrature weights against the
    measure ``d^{2s}z / pi^s`` (for Monte Carlo they fold in the reciprocal
    proposal density, so the same weighted sums apply to both schemes).
    """

    points: np.ndarray
    weights: np.ndarray
    radius: Optional[float]
    scheme: str
    seed: Optional[int] = None
    axis: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(self.weights < 0.0):
            raise ValueError("quadrature weights must be nonnegative")
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("points and weights must have equal length")

    @property
    def modes(self) -> int:
        return 1 if self.points.ndim == 1 else self.points.shape[1]


def cartesian_grid(radius: float, step: float) -> OutcomeGrid:
    """Trapezoid rule on the square ``[-R, R]^2`` of one-mode outcomes.

    The point count per axis is odd so that every other point forms a
    valid half-resolution subgrid for error estimation.
    """
    if radius <= 0.0 or step <= 0.0:
        raise ValueError("radius and step must be positive")
    half = max(1, math.ceil(radius / step))
    axis = np.linspace(-half * step, half * step, 2 * half + 1)
    xs, ys = np.meshgrid(axis, axis, indexing="ij")
    points = (xs + 1j * ys).ravel()
    w1 = np.full(axis.size, axis[1] - axis[0])
    w1[0] *= 0.5
    w1[-1] *= 0.5
    weights = np.outer(w1, w1).ravel() / math.pi
    return OutcomeGrid(
        points=points,
        weights=weights,
        radius=float(half * step),
        scheme="cartesian-trapezoid",
        axis=axis,
    )


def default_grid(mean_correlation: float, noise: float,
                 center: float = 0.0) -> OutcomeGrid:
    """Grid sized to the outcome distribution: 5 sigma radius, 0.15 sigma step."""
    sigma = math.sqrt(mean_correlation + noise + 1.0)
    return cartesian_grid(center + 5.0 * sigma, 0.15 * sigma)


def monte_carlo_grid(
    output_covariance: np.ndarray, n_samples: int, seed: int
) -> OutcomeGrid:
    """Importance sample two-mode outcomes from a complex Gaussian proposal.

    ``output_covariance`` is the 2x2 Hermitian covariance of the proposal
    density ``exp(-z* S^-1 z)/det S`` against ``d^4 z / pi^2``; weights are
    the reciprocal proposal density over the sample count, so weighted sums
    estimate integrals against the outcome measure.
    """
    sigma = np.asarray(output_covariance, dtype=complex)
    if sigma.shape != (2, 2):
        raise DimensionMismatch("two-mode sampling expects a 2x2 covariance")
    rng = np.random.default_rng(seed)
    w, u = np.linalg.eigh(sigma)
    root = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    zeta = (
        rng.normal(size=(n_samples, 2)) + 1j * rng.normal(size=(n_samples, 2))
    ) / math.sqrt(2.0)
    points = zeta @ root.T
    sigma_inv = np.linalg.inv(sigma)
    dens = np.exp(-np.einsum("ni,ij,nj->n", points.conj(), sigma_inv, points).real)
    dens /= np.linalg.det(sigma).real
    weights = 1.0 / (n_samples * dens)
    return OutcomeGrid(
        points=points, weights=weights, radius=None, scheme="monte-carlo", seed=seed
    )


def _er_weighted_sums(
    rho: np.ndarray,
    noise: float,
    points: np.ndarray,
    weights: np.ndarray,
    base: LogBase,
    p_min: float,
    tail_tol: float,
    chunk: int = 256,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point ``w p`` and ``w p H(posterior)`` for a one-mode state."""
    dim = rho.shape[0]
    root = _sqrt_thermal(noise, dim, tail_tol)
    mass = np.zeros(points.size)
    weighted_entropy = np.zeros(points.size)
    for start in range(0, points.size, chunk):
        zs = points[start : start + chunk]
        ops = _displacement_batch(zs, dim)
        conjugated = root[None, :, :] @ np.swapaxes(ops.conj(), 1, 2)
        raw = conjugated @ rho[None, :, :] @ np.swapaxes(conjugated.conj(), 1, 2)
        ps = np.einsum("kii->k", raw).real
        keep = ps >= p_min
        if not np.any(keep):
            continue
        spectra = np.linalg.eigvalsh(raw[keep]) / ps[keep, None]
        spectra = np.clip(spectra, 0.0, None)
        logs = np.where(
            spectra > ENTROPY_FLOOR, np.log(np.maximum(spectra, ENTROPY_FLOOR)), 0.0
        )
        entropies = -(spectra * logs).sum(axis=1) / base.ln_base
        idx = np.nonzero(keep)[0] + start
        mass[idx] = weights[idx] * ps[keep]
        weighted_entropy[idx] = mass[idx] * entropies
    return mass, weighted_entropy


def er_numeric(
    rho: np.ndarray,
    noise,
    grid: OutcomeGrid,
    base: LogBase = LogBase.BITS,
    mass_tol: float = MASS_TOL,
    p_min: float = P_MIN,
    tail_tol: float = TAIL_TOL,
) -> tuple[float, float]:
    """Entropy reduction by direct numerical integration.

    Computes ``H(rho) - sum_i w_i p(z_i) H(posterior(z_i))`` over the grid.
    Outcomes beyond the truncation's validity radius are excluded and their
    (negligible) probability charged to the mass deficit; outcomes with
    density below ``p_min`` are skipped the same way.

    Returns:
        ``(value, error_estimate)``; the estimate is the half-resolution
        refinement difference for Cartesian grids and the standard error
        for Monte Carlo ones.

    Raises:
        GridMassDeficit: when the integrated outcome probability misses 1
            by more than ``mass_tol``.
    """
    rho = validate_density(rho)
    entropy_in = von_neumann_entropy(rho, base)
    noise_arr = np.atleast_1d(np.asarray(noise, dtype=float))

    if grid.modes == 1:
        r_valid = validity_radius(rho.shape[0], float(noise_arr.max()))
        idx = np.nonzero(np.abs(grid.points) <= r_valid)[0]
        mass = np.zeros(grid.points.shape[0])
        weighted = np.zeros(grid.points.shape[0])
        mass[idx], weighted[idx] = _er_weighted_sums(
            rho, float(noise_arr[0]), grid.points[idx], grid.weights[idx], base,
            p_min, tail_tol,
        )
        total_mass = float(np.sum(mass))
        value = entropy_in - float(np.sum(weighted))
        if abs(total_mass - 1.0) > mass_tol:
            raise GridMassDeficit(
                f"integrated outcome mass {total_mass:.6f} misses 1 by more than {mass_tol}"
            )
        error = _refinement_difference(grid, mass, weighted)
        return value, error

    return _er_numeric_two_mode(
        rho, noise_arr, grid, base, mass_tol, p_min, tail_tol, entropy_in
    )


def _refinement_difference(
    grid: OutcomeGrid, mass: np.ndarray, weighted: np.ndarray
) -> float:
    """Difference against the half-resolution subgrid (Cartesian only)."""
    if grid.axis is None:
        return float("nan")
    n = grid.axis.size
    if n < 5:
        return float("nan")
    per_point_ph = np.zeros(n * n)
    nonzero = grid.weights > 0
    per_point_ph[nonzero] = weighted[nonzero] / grid.weights[nonzero]
    coarse_axis = grid.axis[::2]
    w1 = np.full(coarse_axis.size, coarse_axis[1] - coarse_axis[0])
    w1[0] *= 0.5
    w1[-1] *= 0.5
    coarse_w = np.outer(w1, w1) / math.pi
    ph = per_point_ph.reshape(n, n)[::2, ::2]
    fine_value = float(np.sum(weighted))
    coarse_value = float(np.sum(coarse_w * ph))
    return abs(fine_value - coarse_value)


def _er_numeric_two_mode(
    rho: np.ndarray,
    noise_arr: np.ndarray,
    grid: OutcomeGrid,
    base: LogBase,
    mass_tol: float,
    p_min: float,
    tail_tol: float,
    entropy_in: float,
) -> tuple[float, float]:
    if noise_arr.size == 1:
        noise_arr = np.repeat(noise_arr, 2)
    dim = round(math.sqrt(rho.shape[0]))
    if dim * dim != rho.shape[0]:
        raise DimensionMismatch(f"state dimension {rho.shape[0]} is not a square")
    root = np.kron(
        _sqrt_thermal(noise_arr[0], dim, tail_tol),
        _sqrt_thermal(noise_arr[1], dim, tail_tol),
    )
    r_valid = min(
        validity_radius(dim, noise_arr[0]), validity_radius(dim, noise_arr[1])
    )
    contributions = np.zeros(grid.points.shape[0])
    masses = np.zeros(grid.points.shape[0])
    ops_a = _displacement_batch(grid.points[:, 0], dim)
    ops_b = _displacement_batch(grid.points[:, 1], dim)
    for i in range(grid.points.shape[0]):
        if np.abs(grid.points[i]).max() > r_valid:
            continue
        d_op = np.kron(ops_a[i], ops_b[i])
        conj = root @ d_op.conj().T
        raw = conj @ rho @ conj.conj().T
        p = float(np.trace(raw).real)
        if p < p_min:
            continue
        w = np.linalg.eigvalsh(raw / p)
        w = w[w > ENTROPY_FLOOR]
        entropy = float(-(w * np.log(w)).sum() / base.ln_base)
        masses[i] = grid.weights[i] * p
        contributions[i] = masses[i] * entropy
    total_mass = float(masses.sum())
    if abs(total_mass - 1.0) > mass_tol:
        raise GridMassDeficit(
            f"integrated outcome mass {total_mass:.6f} misses 1 by more than {mass_tol}"
        )
    value = entropy_in - float(contributions.sum())
    n = grid.points.shape[0]
    error = float(np.std(contributions * n) / math.sqrt(n))
    return value, error

"""Energy-constrained capacities of phase-insensitive Gaussian measurements.

One-mode assisted and unassisted capacities in closed form, their ratio
(the assistance gain), the large-energy excess limit, parameter sweeps for
plotting, and the multimode capacity as a trace-constrained maximization
of the entropy reduction over input correlation matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DivisionDegenerate,
    InfeasibleConstraint,
    InvalidRange,
    NotPositiveDefinite,
)
from .gauge import GaugeMeasurement, GaugeState
from .matfun import LogBase, as_hermitian, g_scalar, hermitian_function


@dataclass(frozen=True)
class EnergyConstraint:
    """Mean-energy constraint ``Sp(hamiltonian @ Lambda) <= budget``.

    ``hamiltonian`` is the positive definite Hermitian matrix of one-particle
    energies; ``budget`` is the positive mean-energy bound.
    """

    hamiltonian: np.ndarray
    budget: float

    def __post_init__(self):
        h = as_hermitian(self.hamiltonian)
        if np.linalg.eigvalsh(h).min() <= 1e-12:
            raise NotPositiveDefinite("energy matrix must be positive definite")
        if not self.budget > 0.0:
            raise InfeasibleConstraint(f"energy budget must be positive, got {self.budget}")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "budget", float(self.budget))

    @property
    def s(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class OptimizerSettings:
    """Knobs of the projected gradient ascent used by :func:`cea_multimode`."""

    seed: int = 0
    starts: int = 8
    max_iter: int = 10_000
    grad_tol: float = 1e-8
    fd_step: float = 1e-6
    init_step: float = 0.25


@dataclass(frozen=True)
class CapacityReport:
    """Result of a capacity computation.

    ``unassisted`` and ``gain`` are populated for one mode only, where the
    printed closed form is available.
    """

    assisted: float
    unassisted: Optional[float]
    gain: Optional[float]
    best_state: GaugeState
    energy_used: float
    base: LogBase
    converged: bool = True
    iterations: int = 0
    grad_norm: float = 0.0


def _check_scalar_args(energy: float, noise: float):
    if not energy > 0.0:
        raise InvalidRange(f"energy must be positive, got {energy}")
    if noise < 0.0:
        raise InvalidRange(f"noise must be nonnegative, got {noise}")


def cea_one_mode(energy: float, noise: float, base: LogBase = LogBase.BITS) -> float:
    """Assisted capacity of the one-mode measurement with noise ``noise``.

    ``g(E) - g(N E / (N + E + 1))`` in the requested base; the optimal input
    correlation equals the energy budget.
    """
    _check_scalar_args(energy, noise)
    return g_scalar(energy, base) - g_scalar(
        noise * energy / (noise + energy + 1.0), base
    )


def c_unassisted_one_mode(
    energy: float, noise: float, base: LogBase = LogBase.BITS
) -> float:
    """Unassisted capacity ``log(N+E+1) - log(N+1)`` of the one-mode measurement."""
    _check_scalar_args(energy, noise)
    return math.log1p(energy / (noise + 1.0)) / base.ln_base


def gain(energy: float, noise: float, base: LogBase = LogBase.BITS) -> float:
    """Assistance gain, the ratio of assisted to unassisted capacity."""
    unassisted = c_unassisted_one_mode(energy, noise, base)
    if unassisted < 1e-300:
        raise DivisionDegenerate("unassisted capacity underflowed")
    return cea_one_mode(energy, noise, base) / unassisted


def excess_limit(noise: float, base: LogBase = LogBase.BITS) -> float:
    """Large-energy limit of the assisted-minus-unassisted capacity difference.

    ``log e - N log(1 + 1/N)``, which decays to zero for large noise.
    """
    if not noise > 0.0:
        raise InvalidRange(f"noise must be positive, got {noise}")
    return (1.0 - noise * math.log1p(1.0 / noise)) / base.ln_base


class SweepPoint(NamedTuple):
    noise: float
    energy: float
    assisted: float
    unassisted: float
    gain: float


def sweep_one_mode(
    noise_values: Sequence[float],
    energy_grid: Sequence[float],
    base: LogBase = LogBase.BITS,
) -> list[SweepPoint]:
    """Closed-form capacity table over a noise/energy grid.

    Rows are ordered by noise, then energy, regardless of input order.
    """
    if len(noise_values) == 0 or len(energy_grid) == 0:
        raise InvalidRange("sweep grids must be nonempty")
    rows = []
    for noise in sorted(noise_values):
        for energy in sorted(energy_grid):
            assisted = cea_one_mode(energy, noise, base)
            unassisted = c_unassisted_one_mode(energy, noise, base)
            rows.append(
                SweepPoint(noise, energy, assisted, unassisted, assisted / unassisted)
            )
    return rows


class _ShellObjective:
    """Entropy reduction as a function of a square-root factor of Lambda.

    Parameterizes ``Lambda = C C^dag`` (automatically PSD) and keeps
    iterates on the energy shell ``Sp(eps Lambda) = E`` by rescaling.
    The noise-dependent spectral factors are precomputed once.
    """

    def __init__(self, meas: GaugeMeasurement, constraint: EnergyConstraint,
                 base: LogBase):
        self.s = meas.s
        self.eps = constraint.hamiltonian
        self.budget = constraint.budget
        self.base = base
        self.noise = meas.noise
        self.grow = hermitian_function(self.noise, lambda w: np.sqrt(w * (w + 1.0)))
        self.shrink = hermitian_function(self.noise, lambda w: np.sqrt(w / (w + 1.0)))
        self.eye = np.eye(self.s)

    def normalize(self, factor: np.ndarray) -> np.ndarray:
        used = float(np.trace(self.eps @ factor @ factor.conj().T).real)
        if used <= 0.0:
            raise InfeasibleConstraint("degenerate iterate with zero energy")
        return factor * math.sqrt(self.budget / used)

    def energy(self, factor: np.ndarray) -> float:
        return float(np.trace(self.eps @ factor @ factor.conj().T).real)

    def value(self, factor: np.ndarray) -> float:
        lam = factor @ factor.conj().T
        m_inv = np.linalg.inv(lam + self.noise + self.eye)
        tilde = self.shrink @ lam @ m_inv @ self.grow
        tilde = (tilde + tilde.conj().T) / 2.0
        w_lam = np.clip(np.linalg.eigvalsh(lam), 0.0, None)
        w_til = np.clip(np.linalg.eigvalsh(tilde), 0.0, None)
        total = 0.0
        for w in w_lam:
            total += g_scalar(w, self.base)
        for w in w_til:
            total -= g_scalar(w, self.base)
        return total

    def pack(self, matrix: np.ndarray) -> np.ndarray:
        return np.concatenate([matrix.real.ravel(), matrix.imag.ravel()])

    def unpack(self, vec: np.ndarray) -> np.ndarray:
        half = self.s * self.s
        return (vec[:half] + 1j * vec[half:]).reshape(self.s, self.s)

    def gradient(self, factor: np.ndarray, fd_step: float) -> np.ndarray:
        """Central-difference gradient in the packed real parameterization."""
        theta = self.pack(factor)
        lam_norm = float(np.linalg.norm(factor @ factor.conj().T))
        h = fd_step * (1.0 + lam_norm)
        grad = np.zeros_like(theta)
        for i in range(theta.size):
            theta[i] += h
            up = self.value(self.unpack(theta))
            theta[i] -= 2.0 * h
            down = self.value(self.unpack(theta))
            theta[i] += h
            grad[i] = (up - down) / (2.0 * h)
        return grad

    def project(self, grad: np.ndarray, factor: np.ndarray) -> np.ndarray:
        """Project a gradient onto the tangent space of the energy shell."""
        normal = self.pack(2.0 * self.eps @ factor)
        norm_sq = float(normal @ normal)
        if norm_sq <= 0.0:
            return grad
        return grad - (float(grad @ normal) / norm_sq) * normal


def _ascend(obj: _ShellObjective, factor: np.ndarray, settings: OptimizerSettings):
    """Projected gradient ascent from one start; returns (factor, value, iters, gnorm)."""
    factor = obj.normalize(factor)
    value = obj.value(factor)
    step = settings.init_step
    gnorm = math.inf
    for iteration in range(1, settings.max_iter + 1):
        grad = obj.project(obj.gradient(factor, settings.fd_step), factor)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < settings.grad_tol:
            return factor, value, iteration, gnorm, True
        theta = obj.pack(factor)
        improved = False
        while step >= 1e-14:
            candidate = obj.normalize(obj.unpack(theta + step * grad))
            cand_value = obj.value(candidate)
            if cand_value > value + 1e-4 * step * gnorm * gnorm:
                factor, value = candidate, cand_value
                step = min(step * 2.0, 1e3)
                improved = True
                break
            step *= 0.5
        if not improved:
            # line search exhausted: the finite-difference gradient is at its
            # noise floor, treat as converged at the measured gradient norm
            return factor, value, iteration, gnorm, gnorm < 10.0 * settings.grad_tol
    return factor, value, settings.max_iter, gnorm, False


def cea_multimode(
    meas: GaugeMeasurement,
    constraint: EnergyConstraint,
    base: LogBase = LogBase.BITS,
    settings: OptimizerSettings | None = None,
) -> CapacityReport:
    """Energy-constrained assisted capacity of a multimode measurement.

    Maximizes the entropy reduction over Hermitian PSD input correlation
    matrices on the energy shell ``Sp(eps Lambda) = E`` (the maximum always
    sits on the boundary because the unconstrained supremum is infinite).
    The search runs over correlation matrices only: among all states with
    fixed second moments the Gaussian one attains the largest entropy
    reduction, so nothing is lost.  Deterministic for a fixed seed.
    """
    settings = settings or OptimizerSettings()
    if meas.s != constraint.s:
        raise DimensionMismatch(
            f"measurement has {meas.s} modes, constraint has {constraint.s}"
        )
    obj = _ShellObjective(meas, constraint, base)

    if meas.s == 1:
        # the energy shell is a single point: the correlation equals E / eps
        lam = constraint.budget / constraint.hamiltonian[0, 0].real
        state = GaugeState(np.array([[lam]], dtype=complex))
        value = obj.value(np.sqrt(np.array([[lam]], dtype=complex)))
        noise = meas.noise[0, 0].real
        unassisted = c_unassisted_one_mode(lam, noise, base)
        ratio = value / unassisted if unassisted > 1e-300 else None
        return CapacityReport(
            assisted=value,
            unassisted=unassisted,
            gain=ratio,
            best_state=state,
            energy_used=lam * constraint.hamiltonian[0, 0].real,
            base=base,
        )

    rng = np.random.default_rng(settings.seed)
    eps_inv = np.linalg.inv(constraint.hamiltonian)
    starts: list[np.ndarray] = [
        hermitian_function(eps_inv, np.sqrt),
        np.eye(meas.s, dtype=complex),
    ]
    while len(starts) < max(settings.starts, 2):
        starts.append(
            rng.normal(size=(meas.s, meas.s)) + 1j * rng.normal(size=(meas.s, meas.s))
        )

    best = None
    for start in starts:
        factor, value, iters, gnorm, ok = _ascend(obj, start.astype(complex), settings)
        if best is None or value > best[1]:
            best = (factor, value, iters, gnorm, ok)
    factor, value, iters, gnorm, ok = best
    lam = factor @ factor.conj().T
    lam = (lam + lam.conj().T) / 2.0
    return CapacityReport(
        assisted=value,
        unassisted=None,
        gain=None,
        best_state=GaugeState(lam),
        energy_used=obj.energy(factor),
        base=base,
        converged=ok,
        iterations=iters,
        grad_norm=gnorm,
    )

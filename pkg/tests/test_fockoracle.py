import math

import numpy as np
import pytest

from gaussmeter.errors import (
    GridMassDeficit,
    NegligibleOutcome,
    TruncationTooSmall,
)
from gaussmeter.fockoracle import (
    OutcomeGrid,
    annihilation,
    cartesian_grid,
    default_grid,
    displacement,
    er_numeric,
    gauge_average,
    monte_carlo_grid,
    normal_moments,
    posterior_state,
    povm_density,
    suggested_dimension,
    thermal_state,
    trace_distance,
    unitarity_defect,
    validate_density,
    validity_radius,
    von_neumann_entropy,
)
from gaussmeter.matfun import g_scalar
from gaussmeter.verify import random_low_energy_state

ER_UNIT = 0.9182958340544896


def coherent_state(amplitude, dim):
    d_op = displacement(amplitude, dim)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return d_op @ rho @ d_op.conj().T


class TestThermalState:
    def test_vacuum(self):
        rho = thermal_state(0.0, 8)
        expected = np.zeros((8, 8))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(rho, expected)

    def test_unit_occupation(self):
        rho = thermal_state(1.0, 40)
        diag = np.diag(rho).real
        assert diag[0] == pytest.approx(0.5, abs=1e-15)
        assert diag[1] == pytest.approx(0.25, abs=1e-15)
        mean = float(np.arange(40) @ diag)
        assert mean == pytest.approx(1.0, abs=1e-9)

    def test_tail_guard(self):
        with pytest.raises(TruncationTooSmall):
            thermal_state(3.0, 24)

    def test_two_mode_product(self):
        rho = thermal_state([0.5, 0.5], 14)
        assert rho.shape == (196, 196)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-6)


class TestDisplacement:
    def test_zero_is_identity(self):
        np.testing.assert_allclose(displacement(0.0, 12), np.eye(12), atol=1e-14)

    def test_unitary(self):
        assert unitarity_defect(displacement(1.3 - 0.4j, 40)) < 1e-12

    def test_coherent_poisson_mean(self):
        rho = coherent_state(1.0, 40)
        mean = float(np.arange(40) @ np.diag(rho).real)
        assert mean == pytest.approx(1.0, abs=1e-8)

    def test_coherent_amplitudes(self):
        amp = 0.8 + 0.3j
        column = displacement(amp, 40)[:, 0]
        n = np.arange(12)
        expected = np.exp(-abs(amp) ** 2 / 2) * amp**n / np.sqrt(
            [math.factorial(int(k)) for k in n]
        )
        np.testing.assert_allclose(column[:12], expected, atol=1e-12)

    def test_composition_phase(self):
        dim = 40
        z, w = 1.0, 1.0j
        product = displacement(z, dim) @ displacement(w, dim)
        target = np.exp(-1j * np.imag(np.conj(z) * w)) * displacement(z + w, dim)
        block = 20
        np.testing.assert_allclose(
            product[:block, :block], target[:block, :block], atol=1e-10
        )

    def test_warns_near_truncation_edge(self):
        with pytest.warns(UserWarning, match="exceeds dim/4"):
            displacement(4.0, 40)

    def test_two_mode_kron(self):
        d2 = displacement([0.5, -0.25j], 10)
        np.testing.assert_allclose(
            d2, np.kron(displacement(0.5, 10), displacement(-0.25j, 10)), atol=1e-13
        )


class TestPovmDensity:
    def test_vacuum_outcome(self):
        np.testing.assert_allclose(
            povm_density(0.0, 0.0, 10), thermal_state(0.0, 10), atol=1e-14
        )

    def test_closed_form_density_at_origin(self):
        rho = thermal_state(1.0, 40)
        p = float(np.trace(rho @ povm_density(1.0, 0.0, 40)).real)
        assert p == pytest.approx(1.0 / 3.0, abs=1e-6)

    def test_pointwise_gaussian_density(self):
        rho = thermal_state(1.0, 40)
        sigma = 3.0  # 1 + 1 + 1
        for z in (0.5, 1.0 + 1.0j, 2.0 - 0.5j):
            p = float(np.trace(rho @ povm_density(1.0, z, 40)).real)
            expected = math.exp(-abs(z) ** 2 / sigma) / sigma
            assert p == pytest.approx(expected, abs=1e-6)

    @pytest.mark.filterwarnings("ignore:displacement amplitude")
    def test_completeness_over_grid(self):
        rho = thermal_state(1.0, 40)
        grid = default_grid(1.0, 1.0)
        cap = validity_radius(40, 1.0)
        mass = 0.0
        for z, w in zip(grid.points, grid.weights):
            if abs(z) > cap:
                continue
            mass += w * float(np.trace(rho @ povm_density(1.0, z, 40)).real)
        assert mass == pytest.approx(1.0, abs=1e-3)


class TestPosteriorState:
    def test_pure_input_gives_pure_posteriors(self):
        rho = coherent_state(1.0, 40)
        for z in (0.0, 0.5 + 0.5j, -1.0j):
            post, _ = posterior_state(rho, 1.0, z)
            assert von_neumann_entropy(post) < 1e-8

    def test_displaced_thermal_family(self):
        rho = thermal_state(1.0, 40)
        z = 1.0 + 0.5j
        post, p = posterior_state(rho, 1.0, z)
        assert p == pytest.approx(math.exp(-abs(z) ** 2 / 3.0) / 3.0, abs=1e-9)
        gain = math.sqrt(2.0) / 3.0
        d_op = displacement(gain * z, 40)
        closed = d_op.conj().T @ thermal_state(1.0 / 3.0, 40) @ d_op
        assert trace_distance(post, closed) < 1e-5

    def test_factorization_independence(self):
        rho = thermal_state(1.0, 40)
        root = np.diag(np.sqrt(np.diag(rho).real)).astype(complex)
        for z in (0.3, 1.0 - 0.7j):
            post, p = posterior_state(rho, 1.0, z)
            other = root @ povm_density(1.0, z, 40) @ root / p
            np.testing.assert_allclose(
                np.linalg.eigvalsh(post), np.linalg.eigvalsh(other), atol=1e-9
            )

    def test_negligible_outcome(self):
        rho = thermal_state(0.05, 70)
        with pytest.warns(UserWarning):
            with pytest.raises(NegligibleOutcome):
                posterior_state(rho, 0.0, 6.2)


class TestErNumeric:
    def test_pure_input_yields_zero(self):
        rho = coherent_state(0.7 + 0.3j, 40)
        grid = cartesian_grid(abs(0.7 + 0.3j) + 5.0 * math.sqrt(2.0),
                              0.15 * math.sqrt(2.0))
        value, _ = er_numeric(rho, 1.0, grid)
        assert abs(value) <= 1e-6

    def test_thermal_matches_closed_form(self):
        rho = thermal_state(1.0, 40)
        value, estimate = er_numeric(rho, 1.0, default_grid(1.0, 1.0))
        assert value == pytest.approx(ER_UNIT, abs=1e-2)
        assert math.isfinite(estimate)

    def test_noiseless_recovers_input_entropy(self):
        rho = thermal_state(1.0, 40)
        value, _ = er_numeric(rho, 0.0, default_grid(1.0, 0.0))
        assert value == pytest.approx(2.0, abs=1e-2)

    def test_truncation_refinement(self):
        grid = default_grid(1.0, 1.0)
        coarse, _ = er_numeric(thermal_state(1.0, 40), 1.0, grid)
        fine, _ = er_numeric(thermal_state(1.0, 80), 1.0, grid)
        assert abs(coarse - fine) < 1e-3

    def test_mass_deficit_raises(self):
        rho = thermal_state(1.0, 40)
        with pytest.raises(GridMassDeficit):
            er_numeric(rho, 1.0, cartesian_grid(2.0, 0.26))

    def test_two_mode_monte_carlo(self):
        # occupations sized so the sampled outcomes stay inside the
        # truncation's validity radius with room to spare
        lam, noise, dim = 0.2, 0.2, 16
        rho = thermal_state([lam, lam], dim)
        sigma = (lam + noise + 1.0) * np.eye(2)
        grid = monte_carlo_grid(sigma, 80, seed=3)
        value, estimate = er_numeric(rho, [noise, noise], grid)
        tilde = noise * lam / (noise + lam + 1.0)
        expected = 2.0 * (g_scalar(lam) - g_scalar(tilde))
        assert value == pytest.approx(expected, abs=2e-2)
        assert estimate < 2e-2

    def test_monte_carlo_deterministic(self):
        sigma = 2.0 * np.eye(2)
        a = monte_carlo_grid(sigma, 50, seed=9)
        b = monte_carlo_grid(sigma, 50, seed=9)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.weights, b.weights)


class TestMoments:
    def test_vacuum(self):
        first, lam, anom = normal_moments(thermal_state(0.0, 10))
        assert first == pytest.approx(0.0)
        assert lam == pytest.approx(0.0, abs=1e-14)
        assert anom == pytest.approx(0.0)

    def test_coherent(self):
        first, lam, anom = normal_moments(coherent_state(1.0, 40))
        assert first == pytest.approx(1.0, abs=1e-10)
        assert lam == pytest.approx(1.0, abs=1e-10)
        assert anom == pytest.approx(1.0, abs=1e-10)

    def test_fock_superposition(self):
        dim = 12
        psi = np.zeros(dim, dtype=complex)
        psi[0] = psi[2] = 1.0 / math.sqrt(2.0)
        rho = np.outer(psi, psi.conj())
        first, lam, anom = normal_moments(rho)
        assert first == pytest.approx(0.0)
        assert lam == pytest.approx(1.0, abs=1e-14)
        assert anom == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-14)


class TestGaugeAverage:
    def test_diagonal_fixed_point(self):
        rho = thermal_state(1.0, 24)
        np.testing.assert_array_equal(gauge_average(rho), rho)

    def test_coherent_becomes_poisson(self):
        amp = 1.2 - 0.4j
        averaged = gauge_average(coherent_state(amp, 40))
        n = np.arange(16)
        poisson = np.exp(-abs(amp) ** 2) * abs(amp) ** (2 * n) / np.array(
            [math.factorial(int(k)) for k in n]
        )
        np.testing.assert_allclose(np.diag(averaged).real[:16], poisson, atol=1e-12)
        _, lam_avg, anom_avg = normal_moments(averaged)
        assert lam_avg == pytest.approx(abs(amp) ** 2, abs=1e-10)
        assert anom_avg == pytest.approx(0.0)

    def test_two_mode_keeps_total_number_blocks(self):
        dim = 3
        rho = np.ones((dim * dim, dim * dim), dtype=complex) / (dim * dim)
        averaged = gauge_average(rho, modes=2)
        # |01><10| connects equal totals and must survive; |00><01| must not
        assert averaged[1, dim] != 0.0
        assert averaged[0, 1] == 0.0

    def test_averaging_never_reduces_entropy_gain(self, rng):
        dim, noise = 40, 1.0
        for _ in range(3):
            rho = random_low_energy_state(rng, 12, dim)
            _, lam, _ = normal_moments(rho)
            grid = default_grid(lam, noise)
            plain, _ = er_numeric(rho, noise, grid)
            averaged, _ = er_numeric(gauge_average(rho), noise, grid)
            assert averaged >= plain - 5e-3


def test_concavity_spot_check(rng):
    dim, noise = 40, 1.0
    for _ in range(2):
        rho_a = random_low_energy_state(rng, 12, dim)
        rho_b = random_low_energy_state(rng, 12, dim)
        mix = (rho_a + rho_b) / 2.0
        _, lam, _ = normal_moments(mix)
        grid = default_grid(lam, noise)
        er_mix, _ = er_numeric(mix, noise, grid)
        er_a, _ = er_numeric(rho_a, noise, grid)
        er_b, _ = er_numeric(rho_b, noise, grid)
        assert er_mix >= (er_a + er_b) / 2.0 - 5e-3


def test_validate_density_rejects_bad_trace():
    with pytest.raises(ValueError):
        validate_density(0.9 * thermal_state(0.0, 6))


def test_validity_radius_monotone():
    assert validity_radius(80, 1.0) > validity_radius(40, 1.0)
    assert validity_radius(40, 0.0) > validity_radius(40, 2.0)


def test_suggested_dimension_floor():
    assert suggested_dimension(0.1, 0.1) == 24
    assert suggested_dimension(2.0, 1.0) == 36


def test_outcome_grid_rejects_negative_weights():
    with pytest.raises(ValueError):
        OutcomeGrid(
            points=np.array([0.0j]),
            weights=np.array([-1.0]),
            radius=1.0,
            scheme="cartesian-trapezoid",
        )


def test_entropy_of_thermal_matches_g():
    rho = thermal_state(0.75, 60)
    assert von_neumann_entropy(rho) == pytest.approx(g_scalar(0.75), abs=1e-8)


def test_annihilation_commutator():
    a = annihilation(30)
    comm = a @ a.conj().T - a.conj().T @ a
    np.testing.assert_allclose(np.diag(comm).real[:-1], np.ones(29), atol=1e-14)

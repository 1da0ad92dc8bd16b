"""Statistics-engine tests.

The rate computations are checked three independent ways: closed-form
derivatives of the known mean/deviation curves, finite differences of the
statistics along exactly-known states, and the geometric decompositions.
"""

import numpy as np
import pytest

from fluctdyn import linops
from fluctdyn.dynamics import TimeDepOperator, TimeGrid, propagate
from fluctdyn.fluctuation import (
    BoundReport,
    DegenerateDispersionError,
    bound_report,
    bound_series,
    covariance,
    expectation,
    higher_order_chain,
    mean_rate,
    sigma_rate,
    std_dev,
    variance,
    variance_rate_identity_defect,
    velocity_observable,
)
from fluctdyn.hilbert import pauli, qubit_plus

SX, SY, SZ = pauli("x"), pauli("y"), pauli("z")


def h_op(omega0=1.0, nu0=1.0):
    return TimeDepOperator.scaled(
        lambda t: omega0 * np.cos(nu0 * t),
        lambda t: -omega0 * nu0 * np.sin(nu0 * t),
        SZ,
    )


def a_op_linear():
    # A(t) = t * sx with analytic derivative.
    return TimeDepOperator.scaled(lambda t: t + 0.0, lambda t: np.ones_like(np.asarray(t, float)), SX)


def evolved_plus(t, omega0=1.0, nu0=1.0):
    theta = (omega0 / nu0) * np.sin(nu0 * t)
    return np.array([np.exp(-1j * theta), np.exp(1j * theta)]) / np.sqrt(2.0)


def test_expectation_eigenstate():
    plus = qubit_plus()
    assert expectation(SX, plus) == pytest.approx(1.0)
    assert variance(SX, plus) == pytest.approx(0.0, abs=1e-15)
    assert expectation(SZ, plus) == pytest.approx(0.0)
    assert std_dev(SZ, plus) == pytest.approx(1.0)


def test_expectation_validates_inputs():
    with pytest.raises(ValueError, match="Hermitian"):
        expectation(np.array([[0, 1], [0, 0]], dtype=complex), qubit_plus())
    with pytest.raises(ValueError, match="normalized"):
        expectation(SX, np.array([1.0, 1.0]))


def test_sigma_closed_form_unit_coefficient():
    # With A = sx (constant) the deviation is |sin(2 sin t)| on this驱动;
    # checked at times where the closed form is positive.
    for t in (0.4, 1.0, 1.3):
        psi = evolved_plus(t)
        expected = np.sin(2.0 * np.sin(t))
        assert std_dev(SX, psi) == pytest.approx(abs(expected), abs=1e-12)


def test_covariance_definition_and_bounds():
    rng = np.random.default_rng(11)
    for _ in range(200):
        dim = int(rng.choice([2, 3, 4, 8]))
        a = linops.random_hermitian(dim, rng)
        b = linops.random_hermitian(dim, rng)
        psi = linops.random_state(dim, rng)
        cov_ab = covariance(a, b, psi)
        assert cov_ab == pytest.approx(covariance(b, a, psi), abs=1e-12)
        assert covariance(a, a, psi) == pytest.approx(variance(a, psi), rel=1e-10, abs=1e-12)
        bound = std_dev(a, psi) * std_dev(b, psi)
        assert abs(cov_ab) <= bound + 1e-10 * max(1.0, bound)


def test_covariance_pauli_zero():
    assert covariance(SX, SY, qubit_plus()) == pytest.approx(0.0, abs=1e-15)


def test_velocity_observable_closed_forms():
    h = h_op()
    a = a_op_linear()
    for t in (0.0, 0.7, 2.4):
        v = velocity_observable(a, h, t)
        expected = SX - 2.0 * t * np.cos(t) * SY
        assert np.abs(v - expected).max() < 1e-12

    b = TimeDepOperator(
        value=lambda t: t * SX + (t**2) * SZ,
        dvalue=lambda t: SX + 2.0 * t * SZ,
        dim=2,
    )
    for t in (0.5, 1.9):
        v = velocity_observable(b, h, t)
        expected = SX + 2.0 * t * SZ - 2.0 * t * np.cos(t) * SY
        assert np.abs(v - expected).max() < 1e-12


def test_velocity_observable_stationary_hamiltonian():
    h = TimeDepOperator.stationary(1.3 * SZ)
    v = velocity_observable(h, h, 0.9)
    assert np.abs(v).max() < 1e-15


def test_sigma_rate_against_analytic_derivative():
    # d/dt [ t sin(2 sin t) ] = sin(2 sin t) + 2 t cos(2 sin t) cos t;
    # frozen value at t = 1 from that formula.
    h = h_op()
    a = a_op_linear()
    t = 1.0
    psi = evolved_plus(t)
    analytic = np.sin(2 * np.sin(t)) + 2.0 * t * np.cos(2 * np.sin(t)) * np.cos(t)
    assert analytic == pytest.approx(0.8727870236300611, abs=1e-15)
    assert sigma_rate(a, h, psi, t) == pytest.approx(analytic, abs=1e-8)


def test_sigma_rate_degenerate_raises():
    h = h_op()
    a = a_op_linear()
    with pytest.raises(DegenerateDispersionError):
        sigma_rate(a, h, evolved_plus(0.0), 0.0)  # sigma = 0 at t = 0


def test_sigma_rate_stationary_zero():
    h = TimeDepOperator.stationary(0.8 * SZ)
    a = TimeDepOperator.stationary(SZ)
    psi = np.array([np.sqrt(0.81), np.sqrt(0.19)], dtype=complex)
    assert sigma_rate(a, h, psi, 1.1) == pytest.approx(0.0, abs=1e-12)


def test_sigma_rate_matches_finite_difference_of_std_dev():
    h = h_op()
    a = a_op_linear()
    step = 1e-5
    for t in (0.5, 1.0, 2.0, 4.5):
        fd = (
            std_dev(a.value(t + step), evolved_plus(t + step))
            - std_dev(a.value(t - step), evolved_plus(t - step))
        ) / (2.0 * step)
        assert sigma_rate(a, h, evolved_plus(t), t) == pytest.approx(fd, abs=1e-6)


def test_mean_rate_matches_finite_difference():
    h = h_op()
    a = a_op_linear()
    step = 1e-5
    for t in (0.3, 1.7, 3.9):
        fd = (
            expectation(a.value(t + step), evolved_plus(t + step))
            - expectation(a.value(t - step), evolved_plus(t - step))
        ) / (2.0 * step)
        assert mean_rate(a, h, evolved_plus(t), t) == pytest.approx(fd, abs=1e-6)


@pytest.fixture(scope="module")
def example1_run():
    h = h_op()
    a = a_op_linear()
    grid = TimeGrid(0.0, 5.0, 1000)
    traj = propagate(h, qubit_plus(), grid, method="exact_commuting")
    return a, h, traj, bound_series(a, h, traj)


def test_bound_report_tight_on_linear_coefficient(example1_run):
    _, _, _, reports = example1_run
    nondeg = [r for r in reports if not r.degenerate]
    assert nondeg
    for r in nondeg:
        assert abs(r.residual_r2) <= 1e-6 * max(1.0, r.v2_mean)
        assert r.tight


def test_bound_report_internal_invariants(example1_run):
    _, _, _, reports = example1_run
    for r in reports:
        decomposition = r.sigma_v**2 + r.mu_dot**2
        assert decomposition == pytest.approx(r.v2_mean, rel=1e-9, abs=1e-12)
        if not r.degenerate:
            assert r.residual_r1 == pytest.approx(r.residual_r2, rel=1e-9, abs=1e-12)
            assert r.residual_r1 >= -1e-8
        assert r.cs_residual >= -1e-10 * max(1.0, r.sigma**2 * r.sigma_v**2)


def test_mu_dot_matches_trajectory_finite_difference(example1_run):
    _, _, traj, reports = example1_run
    mus = np.array([r.mu for r in reports])
    dt = traj.grid.dt
    fd = (mus[2:] - mus[:-2]) / (2.0 * dt)
    for k, r in enumerate(reports[1:-1], start=1):
        assert r.mu_dot == pytest.approx(fd[k - 1], rel=1e-4, abs=1e-4)


def test_mean_rate_and_decomposition_at_stated_tolerance():
    # <v_A> = d mu / dt within 1e-8 relative needs an FD step ~1e-5 for the
    # central-difference oracle along the trajectory; run a dense short
    # window and check both identities there.
    h = h_op()
    a = a_op_linear()
    grid = TimeGrid(1.0, 1.01, 1000)  # dt = 1e-5
    psi0 = evolved_plus(1.0)
    traj = propagate(h, psi0, grid, method="exact_commuting")
    reports = bound_series(a, h, traj)
    mus = np.array([r.mu for r in reports])
    fd = (mus[2:] - mus[:-2]) / (2.0 * grid.dt)
    for k in range(1, len(reports) - 1, 50):
        r = reports[k]
        assert r.mu_dot == pytest.approx(fd[k - 1], rel=1e-8)
        assert r.v2_mean == pytest.approx(r.sigma_v**2 + r.mu_dot**2, rel=1e-8)


def test_bound_report_identity_observable(example1_run):
    _, h, traj, _ = example1_run
    ident = TimeDepOperator.stationary(np.eye(2, dtype=complex))
    r = bound_report(ident, h, traj, 500)
    assert r.mu == pytest.approx(1.0)
    assert r.sigma == pytest.approx(0.0, abs=1e-12)
    assert r.degenerate
    assert r.mu_dot == pytest.approx(0.0, abs=1e-12)
    assert r.cs_residual >= -1e-12


def test_bound_report_loose_observable_at_special_points():
    # A = a sx + b sz with a = b = t: at times where 2 sin t = n pi the
    # residual collapses to 4 w0^2 a^2 cos^2(t).
    h = h_op()
    a2 = TimeDepOperator(
        value=lambda t: t * SX + t * SZ,
        dvalue=lambda t: SX + SZ,
        dim=2,
    )
    grid = TimeGrid(0.0, 5.0, 5000)
    traj = propagate(h, qubit_plus(), grid, method="exact_commuting")
    t_special = np.pi  # 2 sin(pi) = 0 = 0 * pi
    idx = int(np.argmin(np.abs(grid.times - t_special)))
    r = bound_report(a2, h, traj, idx)
    t = grid.times[idx]
    assert r.residual_r2 == pytest.approx(4.0 * t**2 * np.cos(t) ** 2, abs=1e-4)


def test_variance_rate_identity_defect(example1_run):
    a, h, traj, _ = example1_run
    n = len(traj.grid.times) - 1
    worst = max(
        variance_rate_identity_defect(a, h, traj, k) for k in range(1, n, 7)
    )
    # dt = 5e-3 here; the defect is pure finite-difference truncation,
    # bounded by (dt^2 / 6) * max |d^3(sigma^2)/dt^3| ~= 1.4e-3 on [0, 5].
    assert worst <= 1.5e-3
    assert variance_rate_identity_defect(a, h, traj, 0) < 0.1  # one-sided end


def test_variance_rate_identity_defect_fine_grid():
    # Truncation bound (dt^2 / 6) * max |d^3(sigma^2)/dt^3|: the third
    # derivative of t^2 sin^2(2 sin t) peaks at ~342 on [0, 5], so reaching
    # a 1e-5 defect everywhere needs dt <= 4.2e-4.
    h = h_op()
    a = a_op_linear()
    grid = TimeGrid(0.0, 5.0, 12500)
    traj = propagate(h, qubit_plus(), grid, method="exact_commuting")
    sample = range(1, 12500, 97)
    worst = max(variance_rate_identity_defect(a, h, traj, k) for k in sample)
    assert worst <= 1e-5

    coarse = TimeGrid(0.0, 5.0, 5000)
    traj_c = propagate(h, qubit_plus(), coarse, method="exact_commuting")
    worst_c = max(variance_rate_identity_defect(a, h, traj_c, k) for k in range(1, 5000, 97))
    assert worst_c <= 6e-5  # measured 5.54e-5, matching the dt^2 bound


def test_variance_rate_identity_stationary():
    h = TimeDepOperator.stationary(0.6 * SZ)
    a = TimeDepOperator.stationary(SZ)
    grid = TimeGrid(0.0, 1.0, 100)
    psi0 = np.array([0.8, 0.6], dtype=complex)
    traj = propagate(h, psi0, grid, method="exact_commuting")
    assert variance_rate_identity_defect(a, h, traj, 50) <= 1e-12


def test_chain_stationary_collapses():
    h = TimeDepOperator.stationary(1.1 * SZ)
    chain = higher_order_chain(h, h, 2)
    assert np.abs(chain[1].value(0.7)).max() < 1e-12
    assert np.abs(chain[2].value(0.7)).max() < 1e-10


def test_chain_level1_matches_velocity_formula():
    h = h_op()
    a = a_op_linear()
    chain = higher_order_chain(a, h, 1)
    for t in (0.5, 2.2):
        expected = SX - 2.0 * t * np.cos(t) * SY
        assert np.abs(chain[1].value(t) - expected).max() < 1e-12


def test_chain_dual_construction_agreement():
    # Same chain assembled with analytic derivatives and with pure finite
    # differences; level 2 must agree.
    h_analytic = h_op()
    a_analytic = a_op_linear()
    h_fd = TimeDepOperator(value=lambda t: np.cos(t) * SZ, dim=2)
    a_fd = TimeDepOperator(value=lambda t: t * SX, dim=2)
    chain_an = higher_order_chain(a_analytic, h_analytic, 2)
    chain_fd = higher_order_chain(a_fd, h_fd, 2)
    worst = 0.0
    for t in np.linspace(0.2, 4.8, 12):
        worst = max(worst, np.abs(chain_an[2].value(t) - chain_fd[2].value(t)).max())
    assert worst <= 1e-5


def test_chain_inequality_three_levels(example1_run):
    a, h, traj, _ = example1_run
    chain = higher_order_chain(a, h, 3)
    times = traj.grid.times[:: len(traj.grid.times) // 200]
    floor = 1e-6
    worst = 0.0
    for t in times:
        k = int(round((t - traj.grid.t0) / traj.grid.dt))
        psi = traj.states[k]
        for n in range(3):
            vn = chain[n].value(t)
            vnp = chain[n + 1].value(t)
            sig_n = std_dev(vn, psi)
            if sig_n <= floor:
                continue
            cov = covariance(vn, vnp, psi)
            rate_sq = (cov / sig_n) ** 2
            residual = variance(vnp, psi) - rate_sq
            worst = min(worst, residual)
    assert worst >= -1e-6

"""Statistics of observables along trajectories and the rate bounds.

For an observable ``A(t)`` carried by a unitarily evolving pure state, the
rates of the mean and of the standard deviation obey

    (d mu_A / dt)^2 + (d sigma_A / dt)^2  <=  < v_A^2 >,

equivalently ``|d sigma_A / dt| <= sigma_{v_A}``, where the velocity
observable ``v_A = dA/dt + (i/hbar) [H, A]`` satisfies
``<v_A> = d<A>/dt``.  This module computes all the ingredients
analytically (``d mu/dt = <v_A>`` and ``d sigma/dt = cov(A, v_A) / sigma``)
and packages them per time point into :class:`BoundReport`, including the
residuals of the inequality and a tight/loose classification.

The ``sigma -> 0`` instants are genuinely degenerate for the rate form
(the covariance formula divides by ``sigma``); reports switch to the
division-free Cauchy-Schwarz certificate ``sigma^2 sigma_v^2 - cov^2 >= 0``
there and flag the rate fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .dynamics import TimeDepOperator, Trajectory
from .linops import anticommutator, commutator, require_hermitian, require_normalized

SIGMA_FLOOR = 1e-9
TIGHT_TOL = 1e-6
VARIANCE_CLAMP = 1e-12
IMAG_TOL = 1e-10
HERM_ASSERT_TOL = 1e-10


class DegenerateDispersionError(ValueError):
    """Raised when a rate needs sigma_A > floor but the dispersion vanishes."""


def expectation(a: np.ndarray, psi: np.ndarray) -> float:
    """``<psi| a |psi>`` for Hermitian ``a`` and normalized ``psi``.

    The imaginary part (pure rounding noise for Hermitian input) is
    discarded after an assertion that it is negligible relative to the
    magnitude of the result.
    """
    a = require_hermitian(a, tol=HERM_ASSERT_TOL, what="observable")
    psi = require_normalized(psi)
    val = complex(np.vdot(psi, a @ psi))
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val.real)):
        raise AssertionError(f"expectation has non-negligible imaginary part {val.imag:.3e}")
    return val.real


def _expect_quad(a: np.ndarray, psi: np.ndarray) -> tuple[float, float]:
    # <A> and <A^2> in one pass; skips re-validation (internal hot path).
    apsi = a @ psi
    mean = complex(np.vdot(psi, apsi))
    sq = float(np.vdot(apsi, apsi).real)
    if abs(mean.imag) > IMAG_TOL * max(1.0, abs(mean.real)):
        raise AssertionError(f"expectation has non-negligible imaginary part {mean.imag:.3e}")
    return mean.real, sq


def _centered(a: np.ndarray, psi: np.ndarray) -> tuple[float, np.ndarray]:
    # Mean and the centered image (A - <A>) psi.  The variance is the
    # squared norm of the latter: cancellation-free, so an eigenstate gives
    # exactly zero instead of <A^2> - <A>^2 rounding noise.
    apsi = a @ psi
    mean = complex(np.vdot(psi, apsi))
    if abs(mean.imag) > IMAG_TOL * max(1.0, abs(mean.real)):
        raise AssertionError(f"expectation has non-negligible imaginary part {mean.imag:.3e}")
    return mean.real, apsi - mean.real * psi


def variance(a: np.ndarray, psi: np.ndarray) -> float:
    """``<A^2> - <A>^2``, evaluated as ``|| (A - <A>) psi ||^2``.

    The centered form is nonnegative by construction; the classic
    difference-of-squares is kept only as the clamp window reference.
    """
    a = require_hermitian(a, tol=HERM_ASSERT_TOL, what="observable")
    psi = require_normalized(psi)
    _, dpsi = _centered(a, psi)
    var = float(np.vdot(dpsi, dpsi).real)
    if var < 0.0:  # unreachable; retained as the documented clamp
        if var < -VARIANCE_CLAMP:
            raise AssertionError(f"variance {var:.3e} below the clamping window")
        var = 0.0
    return var


def std_dev(a: np.ndarray, psi: np.ndarray) -> float:
    """``sigma_A = sqrt(<A^2> - <A>^2)``."""
    return sqrt(variance(a, psi))


def covariance(a: np.ndarray, b: np.ndarray, psi: np.ndarray) -> float:
    """Symmetrized covariance ``<{A, B}>/2 - <A><B>``.

    Evaluated in centered form ``Re <(A - <A>) psi | (B - <B>) psi>``, which
    is the same quantity for Hermitian inputs with the cancellations done
    analytically.
    """
    a = require_hermitian(a, tol=HERM_ASSERT_TOL, what="observable a")
    b = require_hermitian(b, tol=HERM_ASSERT_TOL, what="observable b")
    psi = require_normalized(psi)
    _, da = _centered(a, psi)
    _, db = _centered(b, psi)
    return float(np.vdot(da, db).real)


def velocity_observable(
    a: TimeDepOperator, h: TimeDepOperator, t: float, hbar: float = 1.0
) -> np.ndarray:
    """``v_A(t) = dA/dt + (i/hbar) [H(t), A(t)]``; Hermitian (asserted)."""
    if a.dim != h.dim:
        raise ValueError(f"dimension mismatch: observable dim {a.dim}, generator dim {h.dim}")
    v = a.deriv(t) + (1j / hbar) * commutator(h.value(t), a.value(t))
    defect = float(np.abs(v - v.conj().T).max())
    if defect > HERM_ASSERT_TOL:
        raise AssertionError(f"velocity observable not Hermitian (defect {defect:.3e})")
    return v


def mean_rate(a: TimeDepOperator, h: TimeDepOperator, psi: np.ndarray, t: float, hbar: float = 1.0) -> float:
    """``d<A>/dt = <v_A>``."""
    return expectation(velocity_observable(a, h, t, hbar), psi)


def sigma_rate(
    a: TimeDepOperator,
    h: TimeDepOperator,
    psi: np.ndarray,
    t: float,
    hbar: float = 1.0,
    sigma_floor: float = SIGMA_FLOOR,
) -> float:
    """``d sigma_A / dt = cov(A, v_A) / sigma_A``.

    Raises :class:`DegenerateDispersionError` when ``sigma_A <= sigma_floor``;
    callers must fall back to the Cauchy-Schwarz certificate there.
    """
    a_t = a.value(t)
    v_t = velocity_observable(a, h, t, hbar)
    sig = std_dev(a_t, psi)
    if sig <= sigma_floor:
        raise DegenerateDispersionError(
            f"sigma_A = {sig:.3e} <= floor {sigma_floor:.1e} at t = {t}; rate undefined"
        )
    return covariance(a_t, v_t, psi) / sig


@dataclass
class BoundReport:
    """Per-time-point record of the mean/deviation rates and their bounds.

    ``residual_r1 = sigma_{v_A}^2 - sigma_dot^2`` and
    ``residual_r2 = <v_A^2> - mu_dot^2 - sigma_dot^2`` are algebraically
    identical; both are kept as a cross-check.  ``cs_residual`` is the
    division-free certificate ``sigma^2 sigma_v^2 - cov(A, v_A)^2``, the
    only meaningful residual on degenerate (``sigma <= floor``) points,
    where the rate fields are NaN.
    """

    t: float
    mu: float
    sigma: float
    mu_dot: float
    sigma_dot: float
    sigma_v: float
    v2_mean: float
    residual_r1: float
    residual_r2: float
    cs_residual: float
    tight: bool
    degenerate: bool
    norm_defect: float = 0.0


def bound_report(
    a: TimeDepOperator,
    h: TimeDepOperator,
    traj: Trajectory,
    t_index: int,
    hbar: float = 1.0,
    sigma_floor: float = SIGMA_FLOOR,
    tight_tol: float = TIGHT_TOL,
) -> BoundReport:
    """Evaluate the full rate-bound record at ``traj.grid.times[t_index]``."""
    times = traj.grid.times
    if not -len(times) <= t_index < len(times):
        raise IndexError(f"t_index {t_index} out of range for {len(times)} grid points")
    t = float(times[t_index])
    psi = traj.states[t_index]
    a_t = np.asarray(a.value(t), dtype=complex)
    v_t = velocity_observable(a, h, t, hbar)

    mu, da = _centered(a_t, psi)
    var = float(np.vdot(da, da).real)
    sigma = sqrt(var)
    vpsi = v_t @ psi
    mu_dot = complex(np.vdot(psi, vpsi))
    if abs(mu_dot.imag) > IMAG_TOL * max(1.0, abs(mu_dot.real)):
        raise AssertionError(f"<v_A> has non-negligible imaginary part {mu_dot.imag:.3e}")
    mu_dot = mu_dot.real
    v_sq = float(np.vdot(vpsi, vpsi).real)  # direct <v^2>, kept independent
    dv = vpsi - mu_dot * psi
    sigma_v_sq = float(np.vdot(dv, dv).real)
    cov = float(np.vdot(da, dv).real)
    cs_residual = var * sigma_v_sq - cov * cov

    degenerate = sigma <= sigma_floor
    if degenerate:
        sigma_dot = float("nan")
        residual_r1 = float("nan")
        residual_r2 = float("nan")
        tight = False
    else:
        sigma_dot = cov / sigma
        residual_r1 = sigma_v_sq - sigma_dot * sigma_dot
        residual_r2 = v_sq - mu_dot * mu_dot - sigma_dot * sigma_dot
        tight = residual_r2 <= tight_tol * max(1.0, v_sq)

    return BoundReport(
        t=t,
        mu=mu,
        sigma=sigma,
        mu_dot=mu_dot,
        sigma_dot=sigma_dot,
        sigma_v=sqrt(sigma_v_sq),
        v2_mean=v_sq,
        residual_r1=residual_r1,
        residual_r2=residual_r2,
        cs_residual=cs_residual,
        tight=tight,
        degenerate=degenerate,
        norm_defect=float(traj.norm_defects[t_index]),
    )


def bound_series(
    a: TimeDepOperator,
    h: TimeDepOperator,
    traj: Trajectory,
    hbar: float = 1.0,
    sigma_floor: float = SIGMA_FLOOR,
    tight_tol: float = TIGHT_TOL,
) -> list[BoundReport]:
    """Bound reports at every grid point of the trajectory."""
    return [
        bound_report(a, h, traj, k, hbar=hbar, sigma_floor=sigma_floor, tight_tol=tight_tol)
        for k in range(len(traj.grid.times))
    ]


def variance_rate_identity_defect(
    a: TimeDepOperator, h: TimeDepOperator, traj: Trajectory, t_index: int, hbar: float = 1.0
) -> float:
    """``| d(sigma_A^2)/dt - 2 cov(A, v_A) |`` at a grid point.

    The derivative side is a finite difference of the variance along the
    trajectory (central in the interior, one-sided at the ends); the
    covariance side is analytic.
    """
    times = traj.grid.times
    n = len(times) - 1
    if not 0 <= t_index <= n:
        raise IndexError(f"t_index {t_index} out of range")
    dt = traj.grid.dt

    def var_at(k):
        return variance(np.asarray(a.value(times[k]), dtype=complex), traj.states[k])

    if t_index == 0:
        fd = (var_at(1) - var_at(0)) / dt
    elif t_index == n:
        fd = (var_at(n) - var_at(n - 1)) / dt
    else:
        fd = (var_at(t_index + 1) - var_at(t_index - 1)) / (2.0 * dt)

    t = float(times[t_index])
    psi = traj.states[t_index]
    a_t = np.asarray(a.value(t), dtype=complex)
    v_t = velocity_observable(a, h, t, hbar)
    cov = expectation(anticommutator(a_t, v_t) / 2.0, psi) - expectation(a_t, psi) * expectation(
        v_t, psi
    )
    return abs(fd - 2.0 * cov)


def higher_order_chain(
    a: TimeDepOperator,
    h: TimeDepOperator,
    n_max: int,
    hbar: float = 1.0,
    fd_step: float = 1e-3,
) -> list[TimeDepOperator]:
    """Iterated velocity observables ``[V^0 = A, V^1, ..., V^{n_max}]``.

    ``V^{k+1}(t) = dV^k/dt + (i/hbar) [H(t), V^k(t)]``.  The time derivative
    of level 0 uses the supplied analytic ``dvalue`` when present; composed
    levels differentiate the previous level's value map with a
    Richardson-refined central difference of step ``fd_step`` (plain
    first-difference noise at the default operator step would swamp the
    deeper levels).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if a.dim != h.dim:
        raise ValueError("dimension mismatch between observable and generator")

    def lift(op: TimeDepOperator, first: bool) -> TimeDepOperator:
        def value(t, _op=op, _first=first):
            if _first:
                d = _op.deriv(t)
            else:
                d = _op.deriv_richardson(t, step=fd_step)
            v = d + (1j / hbar) * commutator(h.value(t), _op.value(t))
            defect = float(np.abs(v - v.conj().T).max())
            if defect > HERM_ASSERT_TOL:
                raise AssertionError(
                    f"chain level lost Hermiticity (defect {defect:.3e} at t = {t})"
                )
            return (v + v.conj().T) / 2.0

        return TimeDepOperator(value=value, dim=op.dim)

    chain = [a]
    for level in range(n_max):
        chain.append(lift(chain[-1], first=(level == 0)))
    return chain

"""Speed-limit style bounds derived from the same statistics.

Covers the orthogonalization-time bounds from energy uncertainty and mean
energy, the integral form of the uncertainty-time inequality along a
trajectory, projective-space transport speed/acceleration, the
signal-to-noise floor implied by the fluctuation rate bound, and the rate
of the squared relative uncertainty.

Integrals along trajectories use the trapezoid rule on the trajectory's own
grid; refinement is the caller's control (run on a finer grid for a sharper
quadrature).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from .dynamics import TimeDepOperator, Trajectory
from .fluctuation import _centered, _expect_quad, velocity_observable
from .linops import require_hermitian, require_normalized


def _cumtrapz(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(y)
    out[0] = 0.0
    np.cumsum((y[1:] + y[:-1]) / 2.0 * np.diff(x), out=out[1:])
    return out


@dataclass(frozen=True)
class SpeedLimitReport:
    """Orthogonalization-time bounds from one (H, state) pair.

    ``tau_mt = pi hbar / (2 delta_e)`` needs ``delta_e > 0``; ``tau_ml =
    pi hbar / (2 mean_e)`` is only meaningful for positive mean energy.
    Undefined bounds carry ``inf`` / ``nan`` plus an explicit flag, and
    ``tau_unified`` is the max of whichever are defined.
    """

    delta_e: float
    mean_e: float
    tau_mt: float
    tau_ml: float
    tau_unified: float
    mt_defined: bool
    ml_defined: bool


def mt_ml_times(h: np.ndarray, psi: np.ndarray, hbar: float = 1.0) -> SpeedLimitReport:
    """Evaluate both orthogonalization-time bounds for ``(h, psi)``."""
    h = require_hermitian(h, what="Hamiltonian")
    psi = require_normalized(psi)
    mean, sq = _expect_quad(h, psi)
    delta = sqrt(max(sq - mean * mean, 0.0))
    mt_defined = delta > 0.0
    ml_defined = mean > 0.0
    tau_mt = pi * hbar / (2.0 * delta) if mt_defined else float("inf")
    tau_ml = pi * hbar / (2.0 * mean) if ml_defined else float("nan")
    if ml_defined:
        tau_unified = max(tau_mt, tau_ml)
    else:
        tau_unified = tau_mt
    return SpeedLimitReport(
        delta_e=delta,
        mean_e=mean,
        tau_mt=tau_mt,
        tau_ml=tau_ml,
        tau_unified=tau_unified,
        mt_defined=mt_defined,
        ml_defined=ml_defined,
    )


def _sigma_h_series(h: TimeDepOperator, traj: Trajectory) -> np.ndarray:
    times = traj.grid.times
    out = np.empty(len(times))
    for k, t in enumerate(times):
        _, dpsi = _centered(np.asarray(h.value(t), dtype=complex), traj.states[k])
        out[k] = float(np.linalg.norm(dpsi))
    return out


def mt_integral_check(
    h: TimeDepOperator, traj: Trajectory, hbar: float = 1.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integral form of the uncertainty-time bound along a trajectory.

    Returns per-grid-point arrays ``(lhs, rhs, defect)`` where
    ``lhs[k] = Integral_0^{t_k} sigma_H / hbar`` (trapezoid),
    ``rhs[k] = pi/2 - arcsin |<psi(0)|psi(t_k)>|``, and
    ``defect = lhs - rhs`` (nonnegative up to quadrature error).
    """
    times = traj.grid.times
    sig = _sigma_h_series(h, traj)
    lhs = _cumtrapz(sig / hbar, times)
    overlaps = np.abs(traj.states @ traj.states[0].conj())
    rhs = pi / 2.0 - np.arcsin(np.clip(overlaps, 0.0, 1.0))
    return lhs, rhs, lhs - rhs


def fs_kinematics(
    h: TimeDepOperator,
    traj: Trajectory,
    hbar: float = 1.0,
    convention: str = "factor2",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Projective-space path length, transport speed, and acceleration.

    ``convention`` picks the line-element normalization: ``factor2`` gives
    ``v = 2 sigma_H / hbar``, ``factor1`` gives ``v = sigma_H / hbar``.
    The path length is the trapezoid integral of ``v``; the acceleration is
    analytic (``factor * cov(H, dH/dt) / (hbar sigma_H)``) when ``h`` has a
    derivative, else a central finite difference of ``v``.  Instants with
    ``sigma_H = 0`` get NaN acceleration (undefined there).
    """
    if convention == "factor2":
        factor = 2.0
    elif convention == "factor1":
        factor = 1.0
    else:
        raise ValueError(f"unknown convention {convention!r}")
    times = traj.grid.times
    sig = _sigma_h_series(h, traj)
    v = factor * sig / hbar
    s = _cumtrapz(v, times)

    accel = np.full(len(times), np.nan)
    floor = 1e-12
    if h.dvalue is not None:
        for k, t in enumerate(times):
            if sig[k] <= floor:
                continue
            psi = traj.states[k]
            h_t = np.asarray(h.value(t), dtype=complex)
            hd_t = np.asarray(h.dvalue(t), dtype=complex)
            mean_h, _ = _expect_quad(h_t, psi)
            mean_hd, _ = _expect_quad(hd_t, psi)
            sym = float(np.vdot(psi, (h_t @ hd_t + hd_t @ h_t) @ psi).real) / 2.0
            cov = sym - mean_h * mean_hd
            accel[k] = factor * cov / (hbar * sig[k])
    else:
        ok = sig > floor
        inner = ok[1:-1] & ok[2:] & ok[:-2]
        idx = np.nonzero(inner)[0] + 1
        accel[idx] = (v[idx + 1] - v[idx - 1]) / (times[idx + 1] - times[idx - 1])
    return s, v, accel


@dataclass
class SnrTrace:
    """Signal-to-noise ratio along a trajectory and its dynamic floor.

    ``snr = mu^2 / sigma^2`` (inf where ``sigma = 0`` with nonzero mean,
    flagged invalid where the mean vanishes), and ``snr_min`` divides the
    same ``mu^2`` by the squared integrated fluctuation budget
    ``(sigma(0) + Integral sqrt(<v^2> - mu_dot^2))^2``.  ``integrand`` is
    that square root (clamped at 0 before the root; analytically it equals
    ``sigma_{v}``, numerics may dip below by rounding).
    """

    times: np.ndarray
    snr: np.ndarray
    snr_min: np.ndarray
    integrand: np.ndarray
    mean_valid: np.ndarray


def snr_trace(
    a: TimeDepOperator, h: TimeDepOperator, traj: Trajectory, hbar: float = 1.0
) -> SnrTrace:
    """Per-grid-point SNR and its floor from the fluctuation rate bound."""
    times = traj.grid.times
    n = len(times)
    mu = np.empty(n)
    var = np.empty(n)
    mu_dot = np.empty(n)
    v2 = np.empty(n)
    for k, t in enumerate(times):
        psi = traj.states[k]
        a_t = np.asarray(a.value(t), dtype=complex)
        v_t = velocity_observable(a, h, t, hbar)
        m, da = _centered(a_t, psi)
        mu[k] = m
        var[k] = float(np.vdot(da, da).real)
        md, dv = _centered(v_t, psi)
        mu_dot[k] = md
        v2[k] = float(np.vdot(dv, dv).real) + md * md
    integrand = np.sqrt(np.clip(v2 - mu_dot**2, 0.0, None))
    budget = np.sqrt(var[0]) + _cumtrapz(integrand, times)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.where(var > 0.0, mu**2 / np.where(var > 0.0, var, 1.0), np.inf)
        snr_min = np.where(budget > 0.0, mu**2 / np.where(budget > 0.0, budget, 1.0) ** 2, np.inf)
    return SnrTrace(
        times=times,
        snr=snr,
        snr_min=snr_min,
        integrand=integrand,
        mean_valid=mu != 0.0,
    )


def relative_uncertainty_rate(mu: float, sigma: float, mu_dot: float, sigma_dot: float) -> float:
    """Rate of the squared relative uncertainty ``(sigma/mu)^2``.

    ``d(sigma^2/mu^2)/dt = 2 (sigma / mu^3) (mu sigma_dot - sigma mu_dot)``;
    undefined at ``mu = 0``.
    """
    if mu == 0.0:
        raise ValueError("relative uncertainty rate undefined at mu = 0")
    return 2.0 * (sigma / mu**3) * (mu * sigma_dot - sigma * mu_dot)

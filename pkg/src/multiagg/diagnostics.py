"""Energy, dissipation, support tracking, decay-rate fits, steady-state tests.

All quadratures use the same flat midpoint rule over the M equal-mass cells
as the solver right-hand side, so a state is diagnosed as steady exactly when
the solver would not move it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .convexity import SystemParams
from .measures import QuantileState
from .potentials import PotentialMatrix


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    dissipation: float
    E_invariant: float
    supp_lo: np.ndarray
    supp_hi: np.ndarray
    diam: np.ndarray
    w2_to_ground: Optional[float] = None


@dataclass
class RateFit:
    """Log-linear least-squares decay rate over a declared time window."""

    quantity: str
    fitted_rate: float
    predicted_rate: Optional[float]
    rel_err: Optional[float]
    r_squared: float
    window: tuple
    n_points: int


@dataclass
class SteadyStateReport:
    verdict: bool
    dissipation: float
    energy: float
    residuals: np.ndarray
    tol: float


def energy(qs: QuantileState, pm: PotentialMatrix) -> float:
    """Interaction energy (1/2) sum_ij p_i p_j / M^2 sum_kl W_ij(u_i[k] - u_j[l])."""
    u, p, M = qs.u, qs.params.p, qs.M
    rows = max(1, 16384 // M)
    total = 0.0
    for i in range(qs.n):
        for j in range(qs.n):
            pot = pm.entries[i][j]
            block = 0.0
            for k0 in range(0, M, rows):
                diff = u[i][k0:k0 + rows, None] - u[j][None, :]
                block += float(np.asarray(pot.value(diff)).sum())
            total += p[i] * p[j] / (M * M) * block
    return 0.5 * total


def force_field(qs: QuantileState, pm: PotentialMatrix) -> np.ndarray:
    """Convolved force sum_j (p_j/M) sum_l W'_ij(u_i[k] - u_j[l]) at each cell.

    This is the stationarity residual field: the solver velocity equals
    -m_i times this quantity.
    """
    u, p, M = qs.u, qs.params.p, qs.M
    rows = max(1, 16384 // M)
    out = np.zeros_like(u)
    for i in range(qs.n):
        for j in range(qs.n):
            pot = pm.entries[i][j]
            if pot.is_identically_zero():
                continue
            for k0 in range(0, M, rows):
                diff = u[i][k0:k0 + rows, None] - u[j][None, :]
                out[i, k0:k0 + rows] += p[j] / M * pot.deriv(diff).sum(axis=1)
    return out


def dissipation(qs: QuantileState, pm: PotentialMatrix) -> float:
    """Instantaneous energy decay rate, always <= 0.

    = - sum_i (m_i p_i / M) sum_k [ sum_j (p_j/M) sum_l W'_ij(u_i[k]-u_j[l]) ]^2.
    """
    field = force_field(qs, pm)
    m, p, M = qs.params.m, qs.params.p, qs.M
    return float(-np.sum(m * p / M * (field * field).sum(axis=1)))


def ground_state(params: SystemParams, M: int) -> QuantileState:
    """Every species concentrated at x_inf = E / sum_j (p_j / m_j).

    The unique minimizer and stationary point when the convexity modulus is
    positive; its velocity field vanishes for any admissible kernel matrix.
    """
    x_inf = float(params.E[0]) / float(np.sum(params.p / params.m))
    return QuantileState(np.full((params.n, M), x_inf), params)


def support_and_diameter(qs: QuantileState):
    """Per-species support bounds (u[0], u[M-1]) and diameters."""
    lo = qs.u[:, 0].copy()
    hi = qs.u[:, -1].copy()
    return lo, hi, hi - lo


def fit_decay_rate(times, values, window, predicted_rate: Optional[float] = None,
                   quantity: str = "") -> RateFit:
    """Fit values ~ C exp(-rate t) on the window by least squares in log space.

    Values must be strictly positive on the window (shrink the window if the
    signal has decayed to roundoff); at least 3 points are required.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t0, t1 = float(window[0]), float(window[1])
    mask = (times >= t0) & (times <= t1)
    t = times[mask]
    v = values[mask]
    if t.size < 3:
        raise ValueError(f"window [{t0}, {t1}] contains {t.size} samples, need >= 3")
    if np.any(v <= 0.0):
        raise ValueError("values must be positive on the fit window (shrink the window)")
    logs = np.log(v)
    slope, intercept = np.polyfit(t, logs, 1)
    fitted = -float(slope)
    resid = logs - (slope * t + intercept)
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    rel = None
    if predicted_rate is not None and predicted_rate != 0.0:
        rel = abs(fitted - predicted_rate) / abs(predicted_rate)
    return RateFit(quantity, fitted, predicted_rate, rel, r2, (t0, t1), int(t.size))


def record(qs: QuantileState, pm: PotentialMatrix, t: float,
           ground: Optional[QuantileState] = None) -> DiagnosticsRecord:
    """Assemble the standard per-snapshot diagnostics."""
    from .measures import compound_distance, weighted_center_of_mass

    lo, hi, diam = support_and_diameter(qs)
    w2 = compound_distance(qs, ground) if ground is not None else None
    return DiagnosticsRecord(
        t=float(t),
        energy=energy(qs, pm),
        dissipation=dissipation(qs, pm),
        E_invariant=weighted_center_of_mass(qs),
        supp_lo=lo,
        supp_hi=hi,
        diam=diam,
        w2_to_ground=w2,
    )


def steady_state_check(trajectory, pm: PotentialMatrix, tol: float = 1e-8) -> SteadyStateReport:
    """Is the final state stationary?

    True iff |dissipation| < tol * (1 + |energy|) at the final time.  Also
    reports the per-species maximum of the convolved-force residual, using
    the same quadrature as the solver velocity.
    """
    if not trajectory.states:
        raise ValueError("trajectory is empty")
    qs = trajectory.states[-1]
    dis = dissipation(qs, pm)
    en = energy(qs, pm)
    residuals = np.abs(force_field(qs, pm)).max(axis=1)
    verdict = bool(abs(dis) < tol * (1.0 + abs(en)))
    return SteadyStateReport(verdict, dis, en, residuals, tol)

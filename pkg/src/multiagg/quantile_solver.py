"""Explicit time integration of the n-species quantile dynamics.

The state advances by

    du_i[k]/dt = m_i sum_j p_j (1/M) sum_l W'_ij(u_j[l] - u_i[k]),

the midpoint-quadrature discretization of the nonlocal velocity field; the
quadrature is exact for atomic (equal-mass-cell) data, so such states evolve
as exact particle solutions.  The double sum costs O(n^2 M^2) per evaluation.

Explicit schemes only (forward Euler and classical RK4): the velocity field
is bounded and Lipschitz on bounded states, so a step-size bound derived from
the gradient growth estimate keeps integration stable.  Monotonicity of the
quantile vectors is preserved by the continuous flow but can be crossed by a
discrete step; per-species sorting is the metric projection back onto the
monotone cone and is a no-op when nothing crossed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import diagnostics
from .convexity import SystemParams, lambda0, lambda0_scalar
from .errors import NumericsError
from .measures import QuantileState
from .potentials import PotentialMatrix, estimate_growth_bound

SCHEMES = ("euler", "rk4")
REPAIRS = ("none", "sort")


@dataclass
class SolverConfig:
    """Time-stepping parameters shared by the quantile and particle solvers.

    ``dt=None`` means: derive the step from the stability bound at the
    initial state.  ``record_every`` counts steps between stored snapshots.
    """

    dt: Optional[float] = None
    t_end: float = 1.0
    scheme: str = "rk4"
    repair: str = "sort"
    cfl_safety: float = 0.2
    record_every: int = 1

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.repair not in REPAIRS:
            raise ValueError(f"repair must be one of {REPAIRS}, got {self.repair!r}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class StepInfo:
    monotonicity_violated: bool
    repair_applied: bool


@dataclass
class Trajectory:
    times: list
    states: list
    records: list
    dt: float
    monotonicity_violations: int = 0
    repair_events: int = 0

    @property
    def final_state(self) -> QuantileState:
        return self.states[-1]

    def series(self, attr: str):
        """(times, values) arrays for a scalar DiagnosticsRecord attribute."""
        vals = [getattr(r, attr) for r in self.records]
        return np.array([r.t for r in self.records]), np.array(vals)


def _velocity(u: np.ndarray, pm: PotentialMatrix, m: np.ndarray, p: np.ndarray) -> np.ndarray:
    # Each off-diagonal block is computed once: the reverse interaction is the
    # negated transpose (bit-exactly, since the kernel derivative is odd), so
    # row sums feed species i and negated column sums feed species j.  Blocks
    # are processed in row tiles to keep temporaries cache-sized.
    n, M = u.shape
    rows = max(1, 16384 // M)
    acc = np.zeros_like(u)
    for i in range(n):
        for j in range(i, n):
            pot = pm.entries[i][j]
            if pot.is_identically_zero():
                continue
            others = u[j][None, :]
            colsum = np.zeros(M) if j != i else None
            for k0 in range(0, M, rows):
                g = pot.deriv(others - u[i][k0:k0 + rows, None])
                acc[i, k0:k0 + rows] += p[j] / M * g.sum(axis=1)
                if j != i:
                    colsum += g.sum(axis=0)
            if j != i:
                acc[j] -= p[i] / M * colsum
    return m[:, None] * acc


def _nonfinite_witness(u: np.ndarray, pm: PotentialMatrix) -> dict:
    n, M = u.shape
    for i in range(n):
        for j in range(n):
            g = pm.entries[i][j].deriv(u[j][None, :] - u[i][:, None])
            bad = np.argwhere(~np.isfinite(np.asarray(g)))
            if bad.size:
                k, l = map(int, bad[0])
                return {"i": i, "j": j, "k": k, "l": l}
    bad = np.argwhere(~np.isfinite(u))
    if bad.size:
        i, k = map(int, bad[0])
        return {"i": i, "k": k}
    return {}


def rhs(qs: QuantileState, pm: PotentialMatrix) -> np.ndarray:
    """Velocity grid v_i[k] = m_i sum_j p_j (1/M) sum_l W'_ij(u_j[l] - u_i[k])."""
    if pm.n != qs.n:
        raise ValueError(f"matrix is {pm.n}x{pm.n} but state has n={qs.n} species")
    v = _velocity(qs.u, pm, qs.params.m, qs.params.p)
    if not np.all(np.isfinite(v)):
        raise NumericsError("non-finite velocity in quantile dynamics",
                            witness=_nonfinite_witness(qs.u, pm))
    return v


def stable_dt(qs: QuantileState, pm: PotentialMatrix, cfl_safety: float = 0.2,
              cap: float = 1.0) -> float:
    """Step bound cfl / max_i( m_i sum_j C_ij p_j (1 + diam) ).

    C_ij estimates the gradient growth constant over the current support
    hull, so m_i sum_j C_ij p_j (1 + diam) bounds the velocity contrast that
    could invert a cell in one step.
    """
    lo = float(qs.u.min())
    hi = float(qs.u.max())
    diam = hi - lo
    span = max(diam, 1e-9)
    rate = 0.0
    for i in range(qs.n):
        total = 0.0
        for j in range(qs.n):
            c = estimate_growth_bound(pm.entries[i][j], (-span, span), 513)
            total += c * qs.params.p[j]
        rate = max(rate, qs.params.m[i] * total * (1.0 + diam))
    if rate <= 0.0:
        return cap
    return min(cfl_safety / rate, cap)


def _advance(u: np.ndarray, pm: PotentialMatrix, params: SystemParams,
             dt: float, scheme: str) -> np.ndarray:
    m, p = params.m, params.p
    if scheme == "euler":
        return u + dt * _velocity(u, pm, m, p)
    k1 = _velocity(u, pm, m, p)
    k2 = _velocity(u + 0.5 * dt * k1, pm, m, p)
    k3 = _velocity(u + 0.5 * dt * k2, pm, m, p)
    k4 = _velocity(u + dt * k3, pm, m, p)
    return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(qs: QuantileState, pm: PotentialMatrix, cfg: SolverConfig,
         dt: Optional[float] = None):
    """One explicit step; returns (new state, StepInfo).

    With repair="sort" each species is re-sorted ascending afterwards (a
    no-op unless the step crossed cells); with repair="none" a crossing is
    reported in the StepInfo, not fatal.
    """
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else stable_dt(qs, pm, cfg.cfl_safety)
    u1 = _advance(qs.u, pm, qs.params, dt, cfg.scheme)
    if not np.all(np.isfinite(u1)):
        raise NumericsError(f"non-finite state after step of dt={dt}",
                            witness=_nonfinite_witness(qs.u, pm))
    violated = bool(np.any(np.diff(u1, axis=1) < 0.0))
    repaired = False
    if cfg.repair == "sort":
        if violated:
            u1 = np.sort(u1, axis=1)
            repaired = True
    return qs.with_u(u1), StepInfo(violated, repaired)


def run(qs0: QuantileState, pm: PotentialMatrix, cfg: SolverConfig) -> Trajectory:
    """Integrate to t_end, recording states and diagnostics along the way.

    On a numeric failure the partial trajectory is attached to the raised
    NumericsError.  The recorded diagnostics include the compound distance to
    the concentrated ground state whenever the convexity modulus is positive.
    """
    dt = cfg.dt if cfg.dt is not None else stable_dt(qs0, pm, cfg.cfl_safety)
    if qs0.params.n > 1:
        modulus = lambda0(pm.kappa, qs0.params).lambda0
    else:
        modulus = lambda0_scalar(float(pm.kappa[0, 0]), qs0.params)
    ground = diagnostics.ground_state(qs0.params, qs0.M) if modulus > 0.0 else None

    traj = Trajectory(times=[0.0], states=[qs0],
                      records=[diagnostics.record(qs0, pm, 0.0, ground)], dt=dt)
    n_full = int(np.floor(cfg.t_end / dt + 1e-9))
    remainder = cfg.t_end - n_full * dt
    if remainder < 1e-12 * max(dt, 1.0):
        remainder = 0.0
    qs = qs0
    total_steps = n_full + (1 if remainder else 0)
    for k in range(1, total_steps + 1):
        this_dt = dt if k <= n_full else remainder
        t = k * dt if k <= n_full else cfg.t_end
        try:
            qs, info = step(qs, pm, cfg, dt=this_dt)
        except NumericsError as err:
            err.partial = traj
            raise
        traj.monotonicity_violations += info.monotonicity_violated
        traj.repair_events += info.repair_applied
        if k % cfg.record_every == 0 or k == total_steps:
            traj.times.append(t)
            traj.states.append(qs)
            traj.records.append(diagnostics.record(qs, pm, t, ground))
    return traj

"""Config-driven verification battery.

Runs the analytical predictions applicable to a given experiment config and
reports one pass/fail/skipped entry per check.  Inapplicable checks are
skipped with a reason, never failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, measures, particle_solver, quantile_solver
from .config import ExperimentConfig
from .convexity import lambda0, lambda0_scalar, confining_check
from .errors import NumericsError


@dataclass
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    reason: str = ""
    details: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    checks: list

    @property
    def all_passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)


def _modulus(cfg: ExperimentConfig) -> float:
    if cfg.params.n > 1:
        return lambda0(cfg.potential.kappa, cfg.params).lambda0
    return lambda0_scalar(float(cfg.potential.kappa[0, 0]), cfg.params)


def _perturbed_initial(qs: measures.QuantileState) -> measures.QuantileState:
    """A second admissible datum: shrink deviations, shift means with zero net.

    Keeps every species monotone and leaves the weighted center unchanged, so
    both data live in the same constrained state space.
    """
    u = qs.u.copy()
    means = u.mean(axis=1, keepdims=True)
    u = means + 0.5 * (u - means)
    params = qs.params
    if params.n >= 2:
        u[0] += 0.1 * params.m[0] / params.p[0]
        u[1] -= 0.1 * params.m[1] / params.p[1]
    return qs.with_u(u)


def run_verification(cfg: ExperimentConfig) -> VerificationReport:
    checks: list[CheckResult] = []

    if cfg.initial_quantile is None:
        for name in ("center_conservation", "confinement", "contraction",
                     "delta_separation", "dissipation_identity",
                     "finite_propagation", "ground_state"):
            checks.append(CheckResult(name, "skipped",
                                      "quantile battery requires d=1 initial data"))
        checks.append(_gradient_consistency(cfg))
        checks.sort(key=lambda c: c.name)
        return VerificationReport(checks)

    try:
        traj = quantile_solver.run(cfg.initial_quantile, cfg.potential, cfg.solver)
    except NumericsError as err:
        checks.append(CheckResult("center_conservation", "fail",
                                  f"integration failed: {err} (witness {err.witness})"))
        checks.sort(key=lambda c: c.name)
        return VerificationReport(checks)

    modulus = _modulus(cfg)
    checks.append(_center_conservation(cfg, traj))
    checks.append(_finite_propagation(traj))
    checks.append(_contraction(cfg, traj, modulus))
    checks.append(_delta_separation(cfg, traj))
    checks.append(_dissipation_identity(traj))
    checks.append(_confinement(cfg, traj))
    checks.append(_ground_state(cfg, traj, modulus))
    checks.append(_gradient_consistency(cfg))
    checks.sort(key=lambda c: c.name)
    return VerificationReport(checks)


def _center_conservation(cfg, traj) -> CheckResult:
    times, centers = traj.series("E_invariant")
    scale = max(1.0, float(np.abs(cfg.initial_quantile.u).max())
                * float(np.sum(cfg.params.p / cfg.params.m)))
    drift = float(np.abs(centers - centers[0]).max()) / scale
    status = "pass" if drift <= 1e-10 else "fail"
    return CheckResult("center_conservation", status,
                       details={"relative_drift": drift, "tolerance": 1e-10})


def _finite_propagation(traj) -> CheckResult:
    hi = max(float(np.abs(r.supp_lo).max()) for r in traj.records)
    hi = max(hi, max(float(np.abs(r.supp_hi).max()) for r in traj.records))
    finite = np.isfinite(hi)
    return CheckResult("finite_propagation", "pass" if finite else "fail",
                       details={"max_abs_support_bound": hi})


def _contraction(cfg, traj, modulus) -> CheckResult:
    if modulus <= 0.0:
        return CheckResult("contraction", "skipped",
                           "lambda0 <= 0: the contraction bound is not informative")
    other0 = _perturbed_initial(cfg.initial_quantile)
    try:
        other = quantile_solver.run(other0, cfg.potential, cfg.solver)
    except NumericsError as err:
        return CheckResult("contraction", "fail", f"companion run failed: {err}")
    d0 = measures.compound_distance(cfg.initial_quantile, other0)
    worst = 0.0
    for t, a, b in zip(traj.times, traj.states, other.states):
        bound = np.exp(-modulus * t) * d0 * 1.05 + 1e-14
        worst = max(worst, measures.compound_distance(a, b) / bound)
    status = "pass" if worst <= 1.0 else "fail"
    return CheckResult("contraction", status,
                       details={"lambda0": modulus, "initial_distance": d0,
                                "worst_ratio_to_bound": worst})


def _delta_separation(cfg, traj) -> CheckResult:
    params = cfg.params
    s = cfg.potential.kappa @ params.p
    applicable = [i for i in range(params.n) if s[i] > 0.0]
    if not applicable:
        return CheckResult("delta_separation", "skipped",
                           "no species has positive total convexity sum")
    dt = traj.dt
    worst = 0.0
    rates = {}
    for i in applicable:
        rate = params.m[i] * s[i]
        rates[f"species_{i}"] = float(rate)
        d0 = traj.records[0].diam[i]
        tol = 1.0 + 10.0 * dt * rate
        for rec in traj.records:
            bound = np.exp(-rate * rec.t) * d0 * tol + 1e-12 * max(1.0, d0)
            worst = max(worst, rec.diam[i] / bound)
    status = "pass" if worst <= 1.0 else "fail"
    return CheckResult("delta_separation", status,
                       details={"decay_rates": rates, "worst_ratio_to_bound": worst})


def _dissipation_identity(traj) -> CheckResult:
    recs = traj.records
    if len(recs) < 3:
        return CheckResult("dissipation_identity", "skipped",
                           "need at least 3 recorded snapshots")
    usable = 0
    worst = 0.0
    for k in range(1, len(recs) - 1):
        h1 = recs[k].t - recs[k - 1].t
        h2 = recs[k + 1].t - recs[k].t
        if abs(h1 - h2) > 1e-9 * max(h1, h2):
            continue
        dis = recs[k].dissipation
        if abs(dis) <= 1e-6 * (1.0 + abs(recs[k].energy)):
            continue
        fd = (recs[k + 1].energy - recs[k - 1].energy) / (h1 + h2)
        usable += 1
        worst = max(worst, abs(fd - dis) / abs(dis))
    if usable == 0:
        return CheckResult("dissipation_identity", "skipped",
                           "dissipation below resolution at all interior snapshots")
    h = recs[1].t - recs[0].t
    tol = max(1e-6, 5.0 * h * h)
    status = "pass" if worst <= tol else "fail"
    return CheckResult("dissipation_identity", status,
                       details={"max_relative_error": worst, "tolerance": tol,
                                "samples": usable})


def _confinement(cfg, traj) -> CheckResult:
    if cfg.potential.confining is None:
        return CheckResult("confinement", "skipped", "no confining declaration in config")
    report = confining_check(cfg.potential, cfg.params)
    if not report.verdict:
        return CheckResult("confinement", "skipped",
                           "declared tail convexity is not confining")
    if cfg.solver.t_end < 10.0:
        return CheckResult("confinement", "skipped",
                           "horizon too short to test settled support (need t_end >= 10)")
    t_mid = cfg.solver.t_end / 2.0
    mid = min(range(len(traj.records)), key=lambda k: abs(traj.records[k].t - t_mid))
    last = traj.records[-1]
    drift = max(float(np.abs(last.supp_lo - traj.records[mid].supp_lo).max()),
                float(np.abs(last.supp_hi - traj.records[mid].supp_hi).max()))
    status = "pass" if drift < 1e-3 else "fail"
    return CheckResult("confinement", status,
                       details={"lambda0_tilde": report.lambda0_tilde,
                                "support_drift_mid_to_end": drift, "tolerance": 1e-3})


def _ground_state(cfg, traj, modulus) -> CheckResult:
    if modulus <= 0.0:
        return CheckResult("ground_state", "skipped", "lambda0 <= 0: no unique ground state")
    if modulus * cfg.solver.t_end < 10.0:
        return CheckResult("ground_state", "skipped",
                           "horizon too short (need lambda0 * t_end >= 10)")
    ground = diagnostics.ground_state(cfg.params, cfg.M)
    final = traj.final_state
    winf = max(measures.winf_distance(final, ground, i) for i in range(cfg.params.n))
    status = "pass" if winf <= 1e-3 else "fail"
    return CheckResult("ground_state", status,
                       details={"winf_to_ground": winf, "tolerance": 1e-3})


def _gradient_consistency(cfg) -> CheckResult:
    ps = cfg.initial_particles
    if ps is None:
        return CheckResult("gradient_consistency", "skipped", "no particle representation")
    vel = particle_solver.particle_rhs(ps, cfg.potential)
    h = 1e-6
    worst = 0.0
    scale = max(float(np.abs(v).max()) for v in vel) or 1.0
    for i in range(ps.n):
        count = ps.positions[i].shape[0]
        for k in range(min(count, 4)):
            for axis in range(ps.params.d):
                plus = ps.copy()
                plus.positions[i][k, axis] += h
                minus = ps.copy()
                minus.positions[i][k, axis] -= h
                fd = (particle_solver.discrete_energy(plus, cfg.potential)
                      - particle_solver.discrete_energy(minus, cfg.potential)) / (2.0 * h)
                expected = -ps.params.m[i] / ps.masses[i][k] * fd
                worst = max(worst, abs(vel[i][k, axis] - expected) / scale)
    status = "pass" if worst <= 1e-5 else "fail"
    return CheckResult("gradient_consistency", status,
                       details={"max_relative_error": worst, "tolerance": 1e-5})

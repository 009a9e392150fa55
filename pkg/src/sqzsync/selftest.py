"""Invariant checks across all modules, runnable from the CLI (``sqzsync selftest``)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    build_generator,
    integrate,
    lindblad_rhs_density,
    steady_state_analytic,
    steady_state_numeric,
)
from .limit_cycle import AngularState, angular_rhs, steady_theta
from .metrics import (
    epsilon_opt_closed,
    epsilon_opt_numeric,
    husimi_q,
    husimi_q_operator,
    q_grid,
    sync_curve,
    sync_measure,
    sync_measure_integral,
)
from .params import (
    BlochVector,
    SystemParams,
    bloch_to_density,
    density_to_bloch,
    derive_reservoir,
    pauli_components,
    squeeze_db,
)
from .sweep import arnold_tongue


@dataclass
class Check:
    name: str
    ok: bool
    detail: str
    finding: bool = False  # informational; never fails the run

    def line(self) -> str:
        tag = "FINDING" if self.finding else ("PASS" if self.ok else "FAIL")
        return f"{tag:7s} {self.name}: {self.detail}"


def random_params(rng: np.random.Generator, gamma0: float = 1.0) -> SystemParams:
    return SystemParams(
        n=rng.uniform(0, 2), r=rng.uniform(0, 2), sq_phase=rng.uniform(0, 2 * math.pi),
        detuning=rng.uniform(-3, 3), drive=rng.uniform(0, 4), gamma0=gamma0,
    )


def random_bloch(rng: np.random.Generator) -> BlochVector:
    d = rng.normal(size=3)
    return BlochVector.from_array(d / np.linalg.norm(d) * rng.uniform() ** (1 / 3))


def _reservoir(rng):
    worst = 0.0
    for _ in range(500):
        p = SystemParams(n=rng.uniform(0, 3), r=rng.uniform(0, 3))
        res = derive_reservoir(p)
        bound = res.N * (res.N + 1)
        worst = max(worst, (abs(res.M) ** 2 - bound) / bound if bound else 0.0)
    vac = derive_reservoir(SystemParams(r=1.2))
    eq = abs(abs(vac.M) ** 2 - vac.N * (vac.N + 1)) / (vac.N * (vac.N + 1))
    return Check("reservoir bound |M|^2 <= N(N+1)", worst <= 1e-12 and eq <= 1e-12,
                 f"max relative excess {worst:.2e}, squeezed-vacuum equality {eq:.1e}")


def _roundtrip(rng):
    worst = 0.0
    for _ in range(1000):
        v = random_bloch(rng)
        worst = max(worst, np.max(np.abs(density_to_bloch(bloch_to_density(v)).as_array() - v.as_array())))
    return Check("bloch <-> density round trip", worst <= 1e-14, f"max error {worst:.1e}")


def _generator(rng):
    worst = 0.0
    for _ in range(100):
        p = random_params(rng)
        g = build_generator(p)
        v = random_bloch(rng)
        direct = pauli_components(lindblad_rhs_density(p, bloch_to_density(v)))
        worst = max(worst, np.max(np.abs(g(v.as_array()) - direct)))
    return Check("generator reproduces operator equation", worst <= 1e-12, f"max error {worst:.1e}")


def _oracle(rng, count=1000):
    worst = worst_eig = worst_norm = 0.0
    for _ in range(count):
        p = random_params(rng)
        g = build_generator(p)
        a = steady_state_analytic(p)
        b = steady_state_numeric(g)
        worst = max(worst, np.max(np.abs(a.as_array() - b.as_array())))
        worst_eig = max(worst_eig, np.max(np.linalg.eigvals(g.A).real))
        worst_norm = max(worst_norm, b.norm())
    return [
        Check("closed-form vs linear-solve steady state", worst <= 1e-8,
              f"max deviation {worst:.1e} over {count} tuples"),
        Check("contractive generator", worst_eig <= 1e-12, f"max Re(eig A) = {worst_eig:.3g}"),
        Check("physical steady state", worst_norm <= 1 + 1e-9, f"max |r| = {worst_norm:.12f}"),
    ]


def _gamma0_finding(rng):
    worst_printed = worst_restored = 0.0
    for _ in range(50):
        p = random_params(rng, gamma0=rng.uniform(0.3, 3.0))
        num = steady_state_numeric(build_generator(p))
        a = steady_state_analytic(p)
        res = derive_reservoir(p)
        restored = -p.gamma0 * (4 * (p.gamma0**2 * abs(res.M) ** 2 - p.detuning**2) - res.gamma**2)
        den = res.gamma * (4 * (p.gamma0**2 * abs(res.M) ** 2 - p.detuning**2) - res.gamma**2) \
            + 2 * p.drive**2 * (2 * p.gamma0 * res.M.real - res.gamma)
        worst_printed = max(worst_printed, abs(a.rz - num.rz))
        worst_restored = max(worst_restored, abs(restored / den - num.rz))
    return Check(
        "rz numerator at gamma0 != 1", worst_restored <= 1e-10,
        f"printed |M|^2 form deviates by up to {worst_printed:.2g}; "
        f"gamma0^2|M|^2 form agrees to {worst_restored:.1e}",
        finding=True,
    )


def _rk4_order():
    g = build_generator(SystemParams())
    exact = 2 * math.exp(-1.0) - 1
    errs = [abs(integrate(g, BlochVector(0, 0, 1), 1.0, dt).final.rz - exact) for dt in (0.2, 0.1)]
    ratio = errs[0] / errs[1]
    return Check("RK4 fourth-order convergence", ratio >= 14, f"error ratio on halving dt = {ratio:.2f}")


def _theta_fixed_point(rng):
    worst = worst_rate = 0.0
    for _ in range(200):
        p = SystemParams(n=rng.uniform(0, 3), r=rng.uniform(0, 3))
        res = derive_reservoir(p)
        ts = steady_theta(res.N)
        worst = max(worst, abs(math.acos(-p.gamma0 / res.gamma) - ts))
        if ts < math.pi - 1e-6:
            worst_rate = max(worst_rate, abs(angular_rhs(p, AngularState(ts, 0.3))[0]) / res.gamma)
    return Check("steady polar angle is a fixed point", worst <= 1e-14 and worst_rate <= 1e-12,
                 f"arccos mismatch {worst:.1e}, residual rate {worst_rate:.1e}")


def _measures(rng):
    worst_q = worst_s = worst_norm = worst_mean = 0.0
    for _ in range(100):
        v = random_bloch(rng)
        rho = bloch_to_density(v)
        th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        worst_q = max(worst_q, abs(husimi_q_operator(rho, th, ph) - husimi_q(v, th, ph)))
        worst_s = max(worst_s, abs(sync_measure_integral(rho, ph) - sync_measure(v, ph)))
    for _ in range(10):
        v = random_bloch(rng)
        worst_norm = max(worst_norm, abs(q_grid(v).normalization() - 1))
        worst_mean = max(worst_mean, abs(sync_curve(v).integral()))
    return [
        Check("Q operator form == Bloch form", worst_q <= 1e-13, f"max error {worst_q:.1e}"),
        Check("S quadrature == closed form", worst_s <= 1e-8, f"max error {worst_s:.1e}"),
        Check("Q normalisation", worst_norm <= 1e-6, f"max |1 - integral| {worst_norm:.1e}"),
        Check("S zero mean", worst_mean <= 1e-10, f"max |integral| {worst_mean:.1e}"),
    ]


def _eps_opt():
    vac = SystemParams()
    sq = SystemParams(r=1.5)
    d1 = abs(epsilon_opt_numeric(vac) - epsilon_opt_closed(vac))
    d2 = abs(epsilon_opt_numeric(sq) - epsilon_opt_closed(sq))
    ok = abs(epsilon_opt_closed(vac) - 0.707) < 5e-4 and abs(epsilon_opt_closed(sq) - 0.5) < 5e-3
    return Check("optimal drive closed form vs search", ok and max(d1, d2) <= 1e-5,
                 f"vacuum {epsilon_opt_closed(vac):.6f}, squeezed {epsilon_opt_closed(sq):.6f}, "
                 f"search deviation {max(d1, d2):.1e}")


def _tongue_parity():
    grid = arnold_tongue(SystemParams(n=1, r=1.5, drive=0.5), n_eps=12, n_delta=13)
    asym = np.max(np.abs(grid.values - grid.values[::-1]))
    return Check("tongue parity in detuning", asym <= 1e-12, f"max asymmetry {asym:.1e}")


def run_checks(seed: int = 2024) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = [_reservoir(rng), _roundtrip(rng), _generator(rng)]
    checks += _oracle(rng)
    checks.append(_rk4_order())
    checks.append(_theta_fixed_point(rng))
    checks += _measures(rng)
    checks.append(_eps_opt())
    checks.append(_tongue_parity())
    checks.append(Check("13 dB squeezing at r = 1.5", abs(squeeze_db(1.5) - 13.03) <= 0.01,
                        f"{squeeze_db(1.5):.4f} dB"))
    checks.append(_gamma0_finding(rng))
    return checks

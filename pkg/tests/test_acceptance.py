"""Exit criteria, one test per criterion; a PASS/FAIL line per criterion is
printed in the terminal summary (and immediately with ``-s``)."""
import math

import numpy as np
import pytest

from sqzsync import (
    SystemParams,
    arnold_tongue,
    bloch_to_density,
    build_generator,
    derive_reservoir,
    husimi_q,
    husimi_q_operator,
    integrate,
    limit_cycle_radius,
    q_grid,
    s_max,
    sample_initial_states,
    simulate_ensemble,
    squeeze_db,
    steady_state,
    steady_state_analytic,
    steady_state_numeric,
    steady_theta,
    sync_curve,
    sync_measure,
    sync_measure_integral,
)
from sqzsync.cli import run
from sqzsync.metrics import epsilon_opt_closed, epsilon_opt_numeric
from sqzsync.params import BlochVector
from sqzsync.selftest import random_bloch, random_params

from conftest import ACCEPTANCE_LINES, RESERVOIRS, SQ_THERMAL, SQ_VACUUM, THERMAL, VACUUM


def report(num, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_optimal_drive():
    vac_c, vac_n = epsilon_opt_closed(VACUUM), epsilon_opt_numeric(VACUUM)
    sq_c, sq_n = epsilon_opt_closed(SQ_VACUUM), epsilon_opt_numeric(SQ_VACUUM)
    ok = (abs(vac_c - 0.7071) <= 5e-4 and abs(vac_n - 0.7071) <= 5e-4
          and abs(sq_c - 0.5006) <= 5e-5 and round(sq_c, 1) == 0.5 and abs(sq_c - sq_n) <= 1e-5)
    report(1, "eps_opt reproduction", ok,
           f"vacuum closed {vac_c:.6f} / search {vac_n:.6f}; squeezed vacuum closed {sq_c:.6f} / "
           f"search {sq_n:.6f} (|diff| {abs(sq_c - sq_n):.1e})")


def test_02_limit_cycle():
    states = sample_initial_states(200, 42)
    vac = simulate_ensemble(VACUUM, states, 20.0, 0.01, seed=42)
    sq = simulate_ensemble(SQ_VACUUM, states, 20.0, 0.01, seed=42)
    r_s = limit_cycle_radius(steady_theta(derive_reservoir(SQ_VACUUM).N))
    vac_r = np.hypot(vac.x[:, -1], vac.y[:, -1])
    sq_r = np.hypot(sq.x[:, -1], sq.y[:, -1])
    ok = vac_r.max() <= 1e-3 and np.max(np.abs(sq_r - r_s)) <= 1e-3 and abs(r_s - 0.45034) < 1e-5
    report(2, "limit-cycle reproduction", ok,
           f"vacuum max radius {vac_r.max():.2e}; squeezed max |radius - r_s| {np.max(np.abs(sq_r - r_s)):.2e} "
           f"(r_s = {r_s:.6f})")


def test_03_steady_state_oracle():
    rng = np.random.default_rng(20240603)
    worst = 0.0
    for _ in range(1000):
        p = random_params(rng)
        a = steady_state_analytic(p).as_array()
        b = steady_state_numeric(build_generator(p)).as_array()
        worst = max(worst, float(np.max(np.abs(a - b))))
    report(3, "steady-state oracle equivalence", worst <= 1e-8, f"max componentwise deviation {worst:.2e} over 1000 tuples")


def test_04_phase_preference():
    cell = 2 * math.pi / 361
    qmax, phis = {}, {}
    for name, p in RESERVOIRS.items():
        grid = q_grid(steady_state(p.replace(drive=0.5)), 181, 361)
        phis[name] = grid.argmax()[1]
        qmax[name] = grid.values.max()
    at_pi = all(abs(ph - math.pi) <= cell for ph in phis.values())
    ok = at_pi and qmax["thermal"] < qmax["vacuum"] and qmax["sq_thermal"] > qmax["thermal"]
    report(4, "phase preference at pi", ok,
           "argmax phi " + ", ".join(f"{k}={v:.4f}" for k, v in phis.items())
           + "; max Q " + ", ".join(f"{k}={v:.5f}" for k, v in qmax.items()))


def test_05_synchronization_orderings():
    expected = {"vacuum": 0.08333, "thermal": 0.01316, "sq_vacuum": 0.12485, "sq_thermal": 0.02494}
    got = {k: s_max(steady_state(p.replace(drive=0.5)))[0] for k, p in RESERVOIRS.items()}
    ok = all(abs(got[k] - expected[k]) <= 1e-5 for k in expected)
    ok = ok and got["sq_vacuum"] > got["vacuum"] and got["sq_thermal"] > got["thermal"]
    report(5, "S_max values and squeezing enhancement", ok, ", ".join(f"{k}={v:.6f}" for k, v in got.items()))


def test_06_arnold_tongue():
    th = arnold_tongue(THERMAL, (0.0, 4.0), (-5.0, 5.0), 100, 101)
    sq = arnold_tongue(SQ_THERMAL, (0.0, 4.0), (-5.0, 5.0), 100, 101)
    asym = max(np.max(np.abs(g.values - g.values[::-1])) for g in (th, sq))
    # peak of the Delta = 0 line (continuous in eps, closed-form optimum); no cell may exceed it
    line_peak = {k: s_max(steady_state(p.replace(drive=epsilon_opt_closed(p))))[0]
                 for k, p in (("thermal", THERMAL), ("sq_thermal", SQ_THERMAL))}
    bounded = (th.values.max() <= line_peak["thermal"] * (1 + 1e-12)
               and sq.values.max() <= line_peak["sq_thermal"] * (1 + 1e-12))
    sq_row = sq.y_axis[np.unravel_index(np.argmax(sq.values), sq.values.shape)[0]]
    ok = asym <= 1e-12 and bounded and sq_row == 0.0 and sq.values.max() > th.values.max()
    report(6, "Arnold-tongue structure", ok,
           f"max asymmetry {asym:.1e}; grid max <= Delta=0 line peak: {bounded} "
           f"(thermal {th.values.max():.7f} <= {line_peak['thermal']:.7f}, squeezed-thermal "
           f"{sq.values.max():.7f} <= {line_peak['sq_thermal']:.7f}); squeezed-thermal argmax row Delta={sq_row}; "
           f"global max thermal {th.values.max():.5f} < squeezed-thermal {sq.values.max():.5f}")


def test_07_measure_identities():
    rng = np.random.default_rng(7)
    q_err = s_err = norm_err = mean_err = 0.0
    for _ in range(100):
        v = random_bloch(rng)
        rho = bloch_to_density(v)
        th = rng.uniform(0, math.pi, 100)
        ph = rng.uniform(0, 2 * math.pi, 100)
        for a, b in zip(th, ph):
            q_err = max(q_err, abs(husimi_q_operator(rho, a, b) - husimi_q(v, a, b)))
        s_err = max(s_err, abs(sync_measure_integral(rho, ph[0]) - sync_measure(v, ph[0])))
    for _ in range(20):
        v = random_bloch(rng)
        norm_err = max(norm_err, abs(q_grid(v).normalization() - 1))
        mean_err = max(mean_err, abs(sync_curve(v).integral()))
    ok = q_err <= 1e-13 and s_err <= 1e-8 and norm_err <= 1e-6 and mean_err <= 1e-10
    report(7, "measure identities", ok,
           f"Q forms {q_err:.1e}; S quadrature {s_err:.1e}; normalisation {norm_err:.1e}; S mean {mean_err:.1e}")


def test_08_integrator_order():
    g = build_generator(VACUUM)
    exact = 2 * math.exp(-1.0) - 1
    e1 = abs(integrate(g, BlochVector(0, 0, 1), 1.0, 0.1).final.rz - exact)
    e2 = abs(integrate(g, BlochVector(0, 0, 1), 1.0, 0.05).final.rz - exact)
    report(8, "RK4 order", e1 / e2 >= 14, f"error {e1:.2e} -> {e2:.2e}, ratio {e1 / e2:.2f}")


def test_09_db_conversion():
    db = squeeze_db(1.5)
    report(9, "dB conversion", abs(db - 13.03) <= 0.01, f"r = 1.5 -> {db:.4f} dB")


def test_10_determinism(tmp_path):
    cmds = [
        ["tongue", "--n", "1", "--r", "1.5"],
        ["sweep-eps", "--r", "1.5", "--n-eps", "50"],
        ["cycle", "--r", "1.5", "--count", "50", "--tmax", "5"],
    ]
    same = []
    for i, cmd in enumerate(cmds):
        outs = []
        for w in ("1", "4", "1"):
            path = tmp_path / f"{i}_{w}_{len(outs)}.csv"
            assert run(cmd + ["--workers", w, "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        same.append(outs[0] == outs[1] == outs[2])
    report(10, "byte-identical output across runs and worker counts", all(same),
           ", ".join(f"{c[0]}={s}" for c, s in zip(cmds, same)))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))

"""Angular (theta, phi) flow, the undriven limit cycle, and seeded ensembles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import build_generator, integrate_batch, step_grid
from .errors import PoleSingularity
from .params import TWO_PI, SystemParams, derive_reservoir

POLE_GUARD = 1e-6
# RK4 substep limit, as a fraction of the distance to the nearest pole
_SUBSTEP_FRACTION = 0.05


@dataclass(frozen=True)
class AngularState:
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


@dataclass(frozen=True, eq=False)
class EnsembleRun:
    """Planar paths of an ensemble; arrays are indexed [path, sample]."""

    seed: int | None
    initial_states: list[AngularState]
    times: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    flagged: np.ndarray = field(repr=False)

    @property
    def x(self) -> np.ndarray:
        return 0.5 * (1 + np.cos(self.theta)) * np.cos(self.phi)

    @property
    def y(self) -> np.ndarray:
        return 0.5 * (1 + np.cos(self.theta)) * np.sin(self.phi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (1 + np.cos(self.theta))

    def __len__(self):
        return len(self.initial_states)


def steady_theta(N: float) -> float:
    return math.acos(-1.0 / (2 * N + 1))


def limit_cycle_radius(theta_s: float) -> float:
    return 0.5 * (1 + math.cos(theta_s))


def project_xy(s: AngularState) -> tuple[float, float]:
    rad = 0.5 * (1 + math.cos(s.theta))
    return rad * math.cos(s.phi), rad * math.sin(s.phi)


def _rates(theta, phi, t, g0, gamma, M, eps, omega0, omega_L):
    drive = 2 * eps * np.cos(omega_L * t + 0.5 * np.pi)
    dtheta = g0 / np.sin(theta) + gamma / np.tan(theta) - drive * np.sin(phi)
    dphi = (omega0 + g0 * M.imag * np.cos(2 * phi) + g0 * M.real * np.sin(2 * phi)
            - drive * np.cos(phi) / np.tan(theta))
    return dtheta, dphi


def angular_rhs(p: SystemParams, s: AngularState, t: float = 0.0, omega0: float = 0.0) -> tuple[float, float]:
    """(dθ/dt, dφ/dt) of the mean-field angular flow.

    The drive enters as ``cos(omega_L t + pi/2)`` with ``omega_L = omega0 + detuning``.
    Only the undriven case is used for ensembles; see ``simulate_ensemble``.
    """
    if s.theta < POLE_GUARD or s.theta > math.pi - POLE_GUARD:
        raise PoleSingularity(f"theta={s.theta!r} within {POLE_GUARD} of a pole")
    res = derive_reservoir(p)
    dth, dph = _rates(s.theta, s.phi, t, p.gamma0, res.gamma, res.M, p.drive,
                      omega0, omega0 + p.detuning)
    return float(dth), float(dph)


def sample_initial_states(count: int, seed: int) -> list[AngularState]:
    """Uniform points on the sphere from a seeded PCG64 stream."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(count)
    v = rng.random(count)
    theta = np.arccos(1 - 2 * u)
    phi = TWO_PI * v
    return [AngularState(float(a), float(b)) for a, b in zip(theta, phi)]


def _clamp(theta, flagged):
    low = theta < POLE_GUARD
    high = theta > math.pi - POLE_GUARD
    flagged |= low | high
    return np.clip(theta, POLE_GUARD, math.pi - POLE_GUARD)


def _angular_paths(p, theta0, phi0, times, omega0):
    res = derive_reservoir(p)
    args = (p.gamma0, res.gamma, res.M, p.drive, omega0, omega0 + p.detuning)
    k = len(theta0)
    flagged = np.zeros(k, dtype=bool)
    th = _clamp(np.array(theta0, dtype=float), flagged)
    ph = np.array(phi0, dtype=float)
    out_th = np.empty((k, len(times)))
    out_ph = np.empty((k, len(times)))
    out_th[:, 0], out_ph[:, 0] = th, ph

    for i in range(1, len(times)):
        t = np.full(k, times[i - 1])
        remaining = np.full(k, times[i] - times[i - 1])
        active = np.arange(k)
        while active.size:
            a_th, a_ph, a_t = th[active], ph[active], t[active]
            f_th, f_ph = _rates(a_th, a_ph, a_t, *args)
            dist = np.minimum(a_th, math.pi - a_th)
            limit = _SUBSTEP_FRACTION * dist / np.maximum(np.abs(f_th), 1e-300)
            h = np.minimum(remaining[active], limit)
            k2 = _rates(a_th + 0.5 * h * f_th, a_ph + 0.5 * h * f_ph, a_t + 0.5 * h, *args)
            k3 = _rates(a_th + 0.5 * h * k2[0], a_ph + 0.5 * h * k2[1], a_t + 0.5 * h, *args)
            k4 = _rates(a_th + h * k3[0], a_ph + h * k3[1], a_t + h, *args)
            new_th = a_th + h / 6 * (f_th + 2 * k2[0] + 2 * k3[0] + k4[0])
            new_ph = a_ph + h / 6 * (f_ph + 2 * k2[1] + 2 * k3[1] + k4[1])
            sub_flag = np.zeros(active.size, dtype=bool)
            th[active] = _clamp(new_th, sub_flag)
            flagged[active] |= sub_flag
            ph[active] = new_ph
            t[active] = a_t + h
            remaining[active] -= h
            # a path at the pole guard cannot make progress; finish its step there
            stuck = sub_flag & (np.abs(new_th - th[active]) > 0)
            remaining[active[stuck]] = 0.0
            active = active[remaining[active] > 1e-15 * max(times[i], 1.0)]
        out_th[:, i], out_ph[:, i] = th, ph
    return out_th, np.mod(out_ph, TWO_PI), flagged


def _bloch_paths(p, theta0, phi0, t_end, dt):
    theta0 = np.asarray(theta0)
    phi0 = np.asarray(phi0)
    R0 = np.vstack([np.sin(theta0) * np.cos(phi0), np.sin(theta0) * np.sin(phi0), np.cos(theta0)])
    times, states = integrate_batch(build_generator(p), R0, t_end, dt)
    rx, ry, rz = states[:, 0, :].T, states[:, 1, :].T, states[:, 2, :].T
    theta = np.arccos(np.clip(rz, -1.0, 1.0))
    phi = np.mod(np.arctan2(ry, rx), TWO_PI)
    return times, theta, phi


def simulate_ensemble(p: SystemParams, states: list[AngularState], t_end: float, dt: float,
                      omega0: float = 0.0, seed: int | None = None) -> EnsembleRun:
    """Evolve each initial state and keep its planar projection at every step.

    Undriven runs integrate the angular flow with RK4 (steps are subdivided
    near the poles, where the flow diverges). Driven runs integrate the Bloch
    equations from the corresponding pure state and read the angles back as
    ``theta = arccos(rz)``, ``phi = atan2(ry, rx)``.
    """
    theta0 = [s.theta for s in states]
    phi0 = [s.phi for s in states]
    if p.drive == 0:
        times = step_grid(t_end, dt)
        theta, phi, flagged = _angular_paths(p, theta0, phi0, times, omega0)
    else:
        times, theta, phi = _bloch_paths(p, theta0, phi0, t_end, dt)
        flagged = np.zeros(len(states), dtype=bool)
    return EnsembleRun(seed, list(states), times, theta, phi, flagged)

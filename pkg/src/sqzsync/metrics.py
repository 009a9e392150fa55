"""Husimi Q-function, the phase synchronization measure S(phi), and optimal drive."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .dynamics import build_generator, steady_state_numeric
from .errors import InvalidParam, NoMaximumFound
from .params import TWO_PI, BlochVector, DensityMatrix, SystemParams, derive_reservoir

INV_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    theta_axis: np.ndarray
    phi_axis: np.ndarray
    values: np.ndarray  # (len(theta_axis), len(phi_axis))

    def normalization(self) -> float:
        """∬ Q sinθ dθ dφ: Simpson in θ, periodic trapezoid in φ."""
        per_theta = self.values.sum(axis=1) * (TWO_PI / len(self.phi_axis))
        return float(simpson(per_theta * np.sin(self.theta_axis), x=self.theta_axis))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.values), self.values.shape)
        return float(self.theta_axis[i]), float(self.phi_axis[j])


@dataclass(frozen=True, eq=False)
class SyncCurve:
    phi_axis: np.ndarray
    s_values: np.ndarray
    s_max: float
    phi_star: float

    def integral(self) -> float:
        return float(self.s_values.sum() * (TWO_PI / len(self.phi_axis)))


def theta_axis(n: int) -> np.ndarray:
    return np.linspace(0.0, math.pi, n)


def phi_axis(n: int) -> np.ndarray:
    """n points on [0, 2pi), endpoint excluded."""
    return TWO_PI * np.arange(n) / n


def husimi_q(v: BlochVector, theta, phi):
    return (1 + (v.rx * np.cos(phi) + v.ry * np.sin(phi)) * np.sin(theta) + v.rz * np.cos(theta)) / (4 * math.pi)


def coherent_spin_state(theta: float, phi: float) -> np.ndarray:
    """cos(θ/2)|1> + sin(θ/2) e^{iφ}|0>."""
    return np.array([math.cos(theta / 2), math.sin(theta / 2) * complex(math.cos(phi), math.sin(phi))])


def husimi_q_operator(rho: DensityMatrix, theta: float, phi: float) -> float:
    ket = coherent_spin_state(theta, phi)
    return float(np.real(ket.conj() @ rho.matrix @ ket)) / TWO_PI


def q_grid(v: BlochVector, n_theta: int = 181, n_phi: int = 361) -> PhaseGrid:
    th = theta_axis(n_theta)
    ph = phi_axis(n_phi)
    return PhaseGrid(th, ph, husimi_q(v, th[:, None], ph[None, :]))


def sync_measure(v: BlochVector, phi):
    return (v.rx * np.cos(phi) + v.ry * np.sin(phi)) / 8


def sync_measure_integral(rho: DensityMatrix, phi: float, n_theta: int = 1001) -> float:
    """S(φ) from the θ-marginal of Q by composite Simpson quadrature."""
    if n_theta < 101:
        raise ValueError("n_theta must be >= 101")
    th = theta_axis(n_theta)
    m = rho.matrix
    c, s = np.cos(th / 2), np.sin(th / 2)
    e = complex(math.cos(phi), math.sin(phi))
    # <θ,φ|ρ|θ,φ> with the ket cos(θ/2)|1> + sin(θ/2)e^{iφ}|0>
    q = np.real(c * c * m[0, 0] + c * s * (e * m[0, 1] + np.conj(e) * m[1, 0]) + s * s * m[1, 1]) / TWO_PI
    return float(simpson(q * np.sin(th), x=th)) - 1 / TWO_PI


def s_max(v: BlochVector) -> tuple[float, float]:
    """(max_φ S(φ), argmax φ). With no transverse component the phase is reported as 0."""
    amp = math.hypot(v.rx, v.ry)
    if amp == 0.0:
        return 0.0, 0.0
    return amp / 8, math.atan2(v.ry, v.rx) % TWO_PI


def has_phase_preference(v: BlochVector) -> bool:
    return v.rx != 0.0 or v.ry != 0.0


def sync_curve(v: BlochVector, n_phi: int = 361) -> SyncCurve:
    ph = phi_axis(n_phi)
    smax, star = s_max(v)
    return SyncCurve(ph, sync_measure(v, ph), smax, star)


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 500) -> float:
    """Maximiser of a unimodal f on [lo, hi] to bracket width ``tol``."""
    a, b = lo, hi
    c = b - INV_GOLDEN * (b - a)
    d = a + INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def s_max_at(p: SystemParams) -> float:
    """S_max of the linear-solve steady state (independent of the closed form)."""
    return s_max(steady_state_numeric(build_generator(p)))[0]


def epsilon_opt_closed(p: SystemParams) -> float:
    """sqrt(gamma^2 - 2 gamma gamma0 |M|)/sqrt(2); valid at zero detuning and zero squeezing angle."""
    res = derive_reservoir(p)
    return math.sqrt(res.gamma**2 - 2 * res.gamma * p.gamma0 * abs(res.M)) / math.sqrt(2)


def epsilon_opt_numeric(p: SystemParams, tol: float = 1e-6) -> float:
    gamma = derive_reservoir(p).gamma
    lo, hi = 0.0, 10 * gamma
    x = golden_section_max(lambda e: s_max_at(p.replace(drive=e)), lo, hi, tol=tol)
    if x - lo <= tol or hi - x <= tol:
        raise NoMaximumFound(f"S_max is monotone on (0, {hi:g}]")
    return x


def epsilon_opt(p: SystemParams, method: str = "auto") -> float:
    """Drive strength maximising S_max (the drive field of ``p`` is ignored).

    ``auto`` uses the closed form when detuning and squeezing angle vanish,
    otherwise the golden-section search.
    """
    if method == "closed" or (method == "auto" and p.detuning == 0 and p.sq_phase == 0):
        if p.detuning != 0 or p.sq_phase != 0:
            raise InvalidParam("detuning/sq_phase", (p.detuning, p.sq_phase),
                               "closed form requires zero detuning and zero squeezing angle")
        return epsilon_opt_closed(p)
    if method in ("auto", "numeric"):
        return epsilon_opt_numeric(p)
    raise InvalidParam("method", method, "expected auto, closed or numeric")

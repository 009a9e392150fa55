"""Rotating-frame Bloch dynamics of the driven TLS in a squeezed reservoir."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, SingularGenerator, StepTooLarge
from .params import (
    IDENTITY,
    PAULIS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Y,
    SIGMA_Z,
    BlochVector,
    DensityMatrix,
    SystemParams,
    derive_reservoir,
    pauli_components,
)

_SP_SM = SIGMA_PLUS @ SIGMA_MINUS  # |1><1|
_SM_SP = SIGMA_MINUS @ SIGMA_PLUS  # |0><0|


@dataclass(frozen=True, eq=False)
class AffineGenerator:
    """dr/dt = A r + b, rates in units of gamma0."""

    A: np.ndarray
    b: np.ndarray

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.A @ r + self.b


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray   # (k,)
    states: np.ndarray  # (k, 3)

    def __len__(self):
        return len(self.times)

    def bloch(self, i: int) -> BlochVector:
        return BlochVector.from_array(self.states[i])

    @property
    def final(self) -> BlochVector:
        return self.bloch(-1)


def lindblad_rhs_density(p: SystemParams, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """dρ/dt of the squeezed-reservoir master equation in the drive frame.

    Accepts any 2x2 matrix so the map can be probed on non-physical inputs
    (the generator construction uses the identity/2 and Pauli shifts).
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    res = derive_reservoir(p)
    g0, N, M = p.gamma0, res.N, res.M
    H = 0.5 * (p.detuning * SIGMA_Z + p.drive * SIGMA_Y)
    out = -1j * (H @ m - m @ H)
    out -= g0 * M * (SIGMA_PLUS @ m @ SIGMA_PLUS)
    out -= g0 * np.conj(M) * (SIGMA_MINUS @ m @ SIGMA_MINUS)
    out -= 0.5 * g0 * (N + 1) * (_SP_SM @ m + m @ _SP_SM - 2 * SIGMA_MINUS @ m @ SIGMA_PLUS)
    out -= 0.5 * g0 * N * (_SM_SP @ m + m @ _SM_SP - 2 * SIGMA_PLUS @ m @ SIGMA_MINUS)
    return out


def build_generator(p: SystemParams) -> AffineGenerator:
    """Read (A, b) off the operator equation evaluated at r = 0 and r = e_k."""
    b = pauli_components(lindblad_rhs_density(p, 0.5 * IDENTITY))
    A = np.empty((3, 3))
    for k, s in enumerate(PAULIS):
        A[:, k] = pauli_components(lindblad_rhs_density(p, 0.5 * (IDENTITY + s))) - b
    A.setflags(write=False)
    b.setflags(write=False)
    return AffineGenerator(A, b)


def default_dt(p: SystemParams) -> float:
    return 0.01 / max(derive_reservoir(p).gamma, 1.0)


def _rk4_affine(A: np.ndarray, b: np.ndarray, R: np.ndarray, h: float) -> np.ndarray:
    # R is (3,) or (3, k); b broadcasts over columns
    bb = b if R.ndim == 1 else b[:, None]
    k1 = A @ R + bb
    k2 = A @ (R + 0.5 * h * k1) + bb
    k3 = A @ (R + 0.5 * h * k2) + bb
    k4 = A @ (R + h * k3) + bb
    return R + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_grid(t_end: float, dt: float) -> np.ndarray:
    """Output times 0, dt, 2dt, ... ending exactly at t_end (last step may be short)."""
    n = int(math.ceil(t_end / dt - 1e-9))
    times = dt * np.arange(n + 1)
    times[-1] = t_end
    return times


def integrate_batch(g: AffineGenerator, R0: np.ndarray, t_end: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """RK4 for several initial vectors at once; ``R0`` has shape (3, k).

    Returns the time grid and the states with shape (len(times), 3, k).
    """
    if dt <= 0 or t_end <= 0:
        raise StepTooLarge(f"dt and t_end must be positive (dt={dt}, t_end={t_end})")
    if dt * np.linalg.norm(g.A, np.inf) > 1.0:
        raise StepTooLarge(f"dt*||A||_inf = {dt * np.linalg.norm(g.A, np.inf):.3g} > 1")
    times = step_grid(t_end, dt)
    out = np.empty((len(times),) + np.shape(R0))
    R = np.array(R0, dtype=float)
    out[0] = R
    for i in range(1, len(times)):
        R = _rk4_affine(g.A, g.b, R, times[i] - times[i - 1])
        out[i] = R
    return times, out


def integrate(g: AffineGenerator, r0: BlochVector, t_end: float, dt: float) -> Trajectory:
    times, states = integrate_batch(g, r0.as_array(), t_end, dt)
    return Trajectory(times, states)


def steady_state_numeric(g: AffineGenerator) -> BlochVector:
    A = g.A
    scale = np.linalg.norm(A, np.inf)
    if scale == 0 or abs(np.linalg.det(A)) < 1e-14 * scale**3:
        raise SingularGenerator("generator is singular; no unique steady state")
    r = np.linalg.solve(A, -g.b)
    return BlochVector.from_array(r)


def steady_state_analytic(p: SystemParams) -> BlochVector:
    """Closed-form stationary Bloch vector, term for term as published.

    The rz numerator carries |M|^2 without a gamma0^2 factor, so this form is
    only exact at gamma0 = 1 (the convention used everywhere in this package).
    """
    res = derive_reservoir(p)
    g0, gamma, M = p.gamma0, res.gamma, res.M
    D, eps = p.detuning, p.drive
    M2 = abs(M) ** 2
    den = gamma * (4 * (g0**2 * M2 - D**2) - gamma**2) + 2 * eps**2 * (2 * g0 * M.real - gamma)
    if not math.isfinite(den) or abs(den) < 1e-14 * gamma**3:
        raise DegenerateDenominator(f"denominator {den!r} vanishes")
    rx = 2 * g0 * eps * (gamma - 2 * g0 * M.real) / den
    ry = 4 * g0 * eps * (D + g0 * M.imag) / den
    rz = -g0 * (4 * (M2 - D**2) - gamma**2) / den
    return BlochVector(rx, ry, rz)


def steady_state(p: SystemParams) -> BlochVector:
    """Analytic steady state, falling back to the linear solve."""
    try:
        return steady_state_analytic(p)
    except DegenerateDenominator:
        return steady_state_numeric(build_generator(p))

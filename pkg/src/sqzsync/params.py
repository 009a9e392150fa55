"""Parameter containers, reservoir quantities and two-level state representations.

All rates are in units of the bare dissipation rate ``gamma0``; the basis is
ordered ``{|1>, |0>}`` (excited first) so that ``sigma_z |1> = +|1>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BlochNormExceeded, InvalidParam, NotADensityMatrix

TWO_PI = 2.0 * math.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |1><0|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |0><1|
IDENTITY = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

BLOCH_SLACK = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the driven TLS in a squeezed thermal reservoir.

    n           mean thermal occupation of the reservoir
    r           squeezing strength
    sq_phase    squeezing angle (radians)
    detuning    drive minus TLS frequency, in units of gamma0
    drive       drive strength, in units of gamma0
    gamma0      bare dissipation rate (1 in production runs)
    """

    n: float = 0.0
    r: float = 0.0
    sq_phase: float = 0.0
    detuning: float = 0.0
    drive: float = 0.0
    gamma0: float = 1.0

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "sq_phase": self.sq_phase,
            "detuning": self.detuning,
            "drive": self.drive,
            "gamma0": self.gamma0,
        }


@dataclass(frozen=True)
class DerivedReservoir:
    N: float
    M: complex
    gamma: float


@dataclass(frozen=True)
class BlochVector:
    rx: float
    ry: float
    rz: float

    @classmethod
    def from_array(cls, a) -> "BlochVector":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])

    def norm(self) -> float:
        return math.sqrt(self.rx**2 + self.ry**2 + self.rz**2)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated 2x2 density operator in the ``{|1>, |0>}`` basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise NotADensityMatrix(f"expected 2x2 matrix, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > 1e-12:
            raise NotADensityMatrix(f"not Hermitian (deviation {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1.0) > 1e-12:
            raise NotADensityMatrix(f"trace {tr.real:.15g} != 1")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -1e-9:
            raise NotADensityMatrix(f"negative eigenvalue {lo:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def derive_reservoir(p: SystemParams) -> DerivedReservoir:
    N = p.n * math.cosh(2 * p.r) + math.sinh(p.r) ** 2
    M = -0.5 * math.sinh(2 * p.r) * complex(math.cos(p.sq_phase), math.sin(p.sq_phase)) * (2 * p.n + 1)
    return DerivedReservoir(N=N, M=M, gamma=p.gamma0 * (2 * N + 1))


def validate_params(raw: SystemParams) -> SystemParams:
    """Check ranges, normalise the squeezing angle to [0, 2pi) and return a clean copy."""
    for field, value in raw.as_dict().items():
        if not math.isfinite(value):
            raise InvalidParam(field, value, "must be finite")
    if raw.n < 0:
        raise InvalidParam("n", raw.n, "thermal occupation must be >= 0")
    if raw.r < 0:
        raise InvalidParam("r", raw.r, "squeezing strength must be >= 0")
    if raw.gamma0 <= 0:
        raise InvalidParam("gamma0", raw.gamma0, "dissipation rate must be > 0")
    phase = math.fmod(raw.sq_phase, TWO_PI)
    if phase < 0:
        phase += TWO_PI
    if phase >= TWO_PI:
        phase = 0.0
    p = raw.replace(sq_phase=phase)
    res = derive_reservoir(p)
    bound = res.N * (res.N + 1)
    # physicality of the reservoir; holds by construction
    assert abs(res.M) ** 2 <= bound * (1 + 1e-12) + 1e-300, (abs(res.M) ** 2, bound)
    return p


def bloch_to_density(v: BlochVector) -> DensityMatrix:
    if v.norm() > 1 + BLOCH_SLACK:
        raise BlochNormExceeded(f"|r| = {v.norm():.12g} > 1")
    m = 0.5 * (IDENTITY + v.rx * SIGMA_X + v.ry * SIGMA_Y + v.rz * SIGMA_Z)
    return DensityMatrix(m)


def pauli_components(m: np.ndarray) -> np.ndarray:
    """Real parts of Tr(m sigma_k); linear, so also valid for traceless derivatives."""
    return np.array([
        2 * m[0, 1].real,
        -2 * m[0, 1].imag,
        (m[0, 0] - m[1, 1]).real,
    ])


def density_to_bloch(rho: DensityMatrix | np.ndarray) -> BlochVector:
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    return BlochVector.from_array(pauli_components(rho.matrix))


def squeeze_db(r: float) -> float:
    """Squeezing strength in decibels, ``20 r / ln 10``."""
    if r < 0:
        raise InvalidParam("r", r, "squeezing strength must be >= 0")
    return r * 20.0 / math.log(10.0)

"""Parameter-grid sweeps of S(phi) and S_max (Arnold tongues)."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .dynamics import build_generator, steady_state_analytic, steady_state_numeric
from .errors import DegenerateDenominator, InvalidParam, SingularGenerator
from .metrics import phi_axis, s_max, sync_measure
from .params import BlochVector, SystemParams, validate_params

DISAGREEMENT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """values[i, j] belongs to (y_axis[i], x_axis[j])."""

    x_name: str
    x_axis: np.ndarray
    y_name: str
    y_axis: np.ndarray
    values: np.ndarray
    flagged: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_flagged(self) -> int:
        return int(self.flagged.sum())


def steady_cell(p: SystemParams) -> tuple[BlochVector, bool]:
    """Steady state for one grid point plus a flag when the two routes disagree."""
    g = build_generator(p)
    try:
        v = steady_state_analytic(p)
    except DegenerateDenominator:
        return steady_state_numeric(g), True
    try:
        ref = steady_state_numeric(g)
    except SingularGenerator:
        return v, True
    diff = max(abs(v.rx - ref.rx), abs(v.ry - ref.ry), abs(v.rz - ref.rz))
    return v, not diff <= DISAGREEMENT_TOL


def _eval_chunk(points):
    return [steady_cell(p) for p in points]


def evaluate_points(points: list[SystemParams], workers: int = 1) -> list[tuple[BlochVector, bool]]:
    """steady_cell over ``points``; results are ordered by input index for any worker count."""
    if workers <= 1 or len(points) < 2:
        return _eval_chunk(points)
    workers = min(workers, len(points))
    size = math.ceil(len(points) / workers)
    chunks = [points[i:i + size] for i in range(0, len(points), size)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_eval_chunk, chunks))
    return [cell for part in parts for cell in part]


def _grid_points(p: SystemParams, name: str, axis) -> list[SystemParams]:
    pts = []
    for value in axis:
        q = p.replace(**{name: float(value)})
        try:
            pts.append(validate_params(q))
        except InvalidParam as e:
            raise InvalidParam(e.field, e.value, f"{e.reason} (at {name}={float(value)!r})") from e
    return pts


def _meta(kind: str, p: SystemParams, **extra) -> dict:
    return {"kind": kind, "params": p.as_dict(), "version": __version__, **extra}


def _linspace(lo: float, hi: float, n: int, what: str) -> np.ndarray:
    if n < 2:
        raise InvalidParam(f"n_{what}", n, "need at least 2 grid points")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InvalidParam(f"{what}_range", (lo, hi), "range must be finite")
    if not lo < hi:
        raise InvalidParam(f"{what}_range", (lo, hi), "need min < max")
    return np.linspace(lo, hi, n)


def _s_phi_grid(p, name, axis, n_phi, workers, kind):
    if n_phi < 2:
        raise InvalidParam("n_phi", n_phi, "need at least 2 grid points")
    cells = evaluate_points(_grid_points(p, name, axis), workers)
    ph = phi_axis(n_phi)
    values = np.empty((n_phi, len(axis)))
    flagged = np.zeros_like(values, dtype=bool)
    for j, (v, flag) in enumerate(cells):
        values[:, j] = sync_measure(v, ph)
        flagged[:, j] = flag
    meta = _meta(kind, p, n_x=len(axis), n_y=n_phi, flagged_cells=int(flagged.sum()))
    return SweepGrid(name, axis, "phi", ph, values, flagged, meta)


def sweep_s_vs_eps(p: SystemParams, eps_min: float = 0.0, eps_max: float = 2.0, n_eps: int = 200,
                   n_phi: int = 256, workers: int = 1) -> SweepGrid:
    if eps_min < 0:
        raise InvalidParam("eps_min", eps_min, "drive strength must be >= 0")
    axis = _linspace(eps_min, eps_max, n_eps, "eps")
    return _s_phi_grid(p, "drive", axis, n_phi, workers, "sweep-eps")


def sweep_s_vs_delta(p: SystemParams, delta_min: float = -5.0, delta_max: float = 5.0, n_delta: int = 201,
                     n_phi: int = 256, workers: int = 1) -> SweepGrid:
    axis = _linspace(delta_min, delta_max, n_delta, "delta")
    return _s_phi_grid(p, "detuning", axis, n_phi, workers, "sweep-delta")


def arnold_tongue(p: SystemParams, eps_range: tuple[float, float] = (0.0, 4.0),
                  delta_range: tuple[float, float] = (-5.0, 5.0), n_eps: int = 100, n_delta: int = 101,
                  workers: int = 1) -> SweepGrid:
    """S_max over the (drive, detuning) plane; rows are detuning, columns drive."""
    if eps_range[0] < 0:
        raise InvalidParam("eps_min", eps_range[0], "drive strength must be >= 0")
    eps = _linspace(*eps_range, n_eps, "eps")
    delta = _linspace(*delta_range, n_delta, "delta")
    base = validate_params(p)
    points = [base.replace(drive=float(e), detuning=float(d)) for d in delta for e in eps]
    cells = evaluate_points(points, workers)
    values = np.array([s_max(v)[0] for v, _ in cells]).reshape(n_delta, n_eps)
    flagged = np.array([f for _, f in cells]).reshape(n_delta, n_eps)
    meta = _meta("tongue", base, n_x=n_eps, n_y=n_delta, flagged_cells=int(flagged.sum()))
    return SweepGrid("drive", eps, "detuning", delta, values, flagged, meta)

"""Parameter-space maps over trion detuning and cavity mode splitting.

Each cell of the (omega_0 - omega_c, delta) grid records the pump-optimized
trion population and the closed-form entanglement quantities.  Cells are
independent work items; results land in a pre-sized grid by index, so the
output is identical for any worker count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__
from .emission import photon_state_angles
from .errors import InvalidParamsError
from .excitation import ExcitationOptimum, OptimizerConfig, max_trion_population
from .params import SystemParams
from .textio import format_float

__all__ = [
    "AxisSpec",
    "SweepGrid",
    "QUANTITIES",
    "QUANTITY_IDS",
    "run_map",
    "extract_contour",
    "write_grid_csv",
    "write_grid_binary",
    "read_grid_binary",
]

QUANTITIES = ("N_tr_max", "Fc", "concurrence", "tau")
QUANTITY_IDS = {name: i + 1 for i, name in enumerate(QUANTITIES)}

#: Binary dump header: magic, n_omega0, n_delta, quantity id (16 bytes).
_MAGIC = b"SPGD"
_HEADER_STRUCT = struct.Struct("<4sIII")


@dataclass(frozen=True)
class AxisSpec:
    minimum: float
    maximum: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 2 or self.maximum <= self.minimum:
            raise InvalidParamsError("axis needs count >= 2 and max > min")

    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.count)


@dataclass
class SweepGrid:
    """Per-cell map values on the (omega_0 - omega_c) x delta grid."""

    omega0_axis: AxisSpec
    delta_axis: AxisSpec
    data: dict[str, np.ndarray] = field(default_factory=dict)
    optimizer_warnings: int = 0

    def __post_init__(self) -> None:
        shape = (self.omega0_axis.count, self.delta_axis.count)
        for name, values in self.data.items():
            if values.shape != shape:
                raise InvalidParamsError(f"map {name} has shape {values.shape}, expected {shape}")


def _ntr_cell(args) -> tuple[float, bool]:
    params, config = args
    result: ExcitationOptimum = max_trion_population(params, config)
    return result.n_tr_max, result.converged


def run_map(
    omega0_axis: AxisSpec,
    delta_axis: AxisSpec,
    quantities: tuple[str, ...] = QUANTITIES,
    optimizer_config: OptimizerConfig | None = None,
    workers: int = 1,
    params_base: SystemParams | None = None,
) -> SweepGrid:
    """Evaluate the requested quantities on every grid cell.

    ``Fc``, ``concurrence`` (in-plane trion spin, so it equals Fc) and
    ``tau`` = Fc^4 are closed forms; ``N_tr_max`` runs the pump optimizer
    per cell, parallelized over cells.
    """
    unknown = set(quantities) - set(QUANTITIES)
    if unknown:
        raise InvalidParamsError(f"unknown map quantities: {sorted(unknown)}")
    params_base = params_base or SystemParams()
    omega0_values = omega0_axis.values()
    delta_values = delta_axis.values()
    shape = (omega0_axis.count, delta_axis.count)
    grid = SweepGrid(omega0_axis, delta_axis)

    closed = [q for q in quantities if q != "N_tr_max"]
    if closed:
        fc = np.empty(shape)
        for i, d0 in enumerate(omega0_values):
            for j, dlt in enumerate(delta_values):
                cell = replace(params_base, omega_0=params_base.omega_c + d0, delta=dlt)
                fc[i, j] = photon_state_angles(cell).fc
        if "Fc" in closed:
            grid.data["Fc"] = fc
        if "concurrence" in closed:
            grid.data["concurrence"] = fc.copy()
        if "tau" in closed:
            grid.data["tau"] = fc**4

    if "N_tr_max" in quantities:
        tasks = [
            (
                replace(params_base, omega_0=params_base.omega_c + d0, delta=dlt),
                optimizer_config,
            )
            for d0 in omega0_values
            for dlt in delta_values
        ]
        if workers > 1:
            with get_context("fork").Pool(workers) as pool:
                results = pool.map(_ntr_cell, tasks, chunksize=max(1, len(tasks) // (workers * 16)))
        else:
            results = [_ntr_cell(t) for t in tasks]
        values = np.array([r[0] for r in results]).reshape(shape)
        grid.data["N_tr_max"] = values
        grid.optimizer_warnings = sum(0 if r[1] else 1 for r in results)
    return grid


def extract_contour(grid: SweepGrid, quantity: str, level: float) -> list[np.ndarray]:
    """Marching-squares contours as ordered (omega_0 - omega_c, delta) points.

    Levels outside the data range, and constant fields exactly at the level
    (no crossings), give an empty list.
    """
    if quantity not in grid.data:
        raise InvalidParamsError(f"quantity {quantity} not present on the grid")
    from skimage import measure

    data = grid.data[quantity]
    lo, hi = float(np.min(data)), float(np.max(data))
    if not (lo <= level <= hi) or lo == hi:
        return []
    omega0_values = grid.omega0_axis.values()
    delta_values = grid.delta_axis.values()
    contours = measure.find_contours(data, level)
    out = []
    for contour in contours:
        physical = np.empty_like(contour)
        physical[:, 0] = np.interp(contour[:, 0], np.arange(len(omega0_values)), omega0_values)
        physical[:, 1] = np.interp(contour[:, 1], np.arange(len(delta_values)), delta_values)
        out.append(physical)
    return out


def write_grid_csv(grid: SweepGrid, path, metadata: dict | None = None) -> None:
    """Long-format CSV: one row per (cell, quantity)."""
    omega0_values = grid.omega0_axis.values()
    delta_values = grid.delta_axis.values()
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(f"# version: {__version__}")
    lines.append("omega0,delta,quantity,value")
    for name in QUANTITIES:
        if name not in grid.data:
            continue
        values = grid.data[name]
        for i, d0 in enumerate(omega0_values):
            for j, dlt in enumerate(delta_values):
                lines.append(
                    f"{format_float(d0)},{format_float(dlt)},{name},{format_float(values[i, j])}"
                )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_grid_binary(grid: SweepGrid, quantity: str, path) -> None:
    """16-byte header (magic, dims, quantity id) + row-major float64 cells."""
    if quantity not in grid.data:
        raise InvalidParamsError(f"quantity {quantity} not present on the grid")
    header = _HEADER_STRUCT.pack(
        _MAGIC, grid.omega0_axis.count, grid.delta_axis.count, QUANTITY_IDS[quantity]
    )
    payload = np.ascontiguousarray(grid.data[quantity], dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_grid_binary(path) -> tuple[str, np.ndarray]:
    raw = Path(path).read_bytes()
    magic, n0, n1, qid = _HEADER_STRUCT.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise InvalidParamsError(f"{path} is not a map dump")
    names = {v: k for k, v in QUANTITY_IDS.items()}
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER_STRUCT.size).reshape(n0, n1)
    return names[qid], data.copy()

"""Plain-text serialization for golden tests and CSV emission.

Matrix format (one file per object)::

    # spinphoton matrix v1
    kind=operator|state
    shape=<rows> <cols>
    hermitian=0|1            (operators only)
    cutoff=<n>               (present when attached to a composite basis)
    i j re im                (operators: one line per nonzero entry)
    i re im                  (states: one line per nonzero amplitude)

CSV files start with comment lines ``# key: value`` carrying the canonical
run configuration and the tool version, so any output can be reproduced from
its own header.  Floats are written with ``repr``, the shortest
representation that round-trips to the same double.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from . import __version__
from .basis import CompositeBasis, Operator, PureState

__all__ = [
    "save_operator",
    "load_operator",
    "save_state",
    "load_state",
    "format_float",
    "write_csv",
    "read_csv_metadata",
    "canonical_json",
]

_HEADER = "# spinphoton matrix v1"


def format_float(x: float) -> str:
    return repr(float(x))


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace variation."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def save_operator(op: Operator, path: str | Path) -> None:
    mat = op.dense()
    lines = [
        _HEADER,
        "kind=operator",
        f"shape={mat.shape[0]} {mat.shape[1]}",
        f"hermitian={1 if op.hermitian else 0}",
        f"cutoff={op.basis.cutoff}",
    ]
    rows, cols = np.nonzero(mat)
    for i, j in zip(rows, cols):
        v = mat[i, j]
        lines.append(f"{i} {j} {format_float(v.real)} {format_float(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_operator(path: str | Path) -> Operator:
    meta, entries = _parse(path, expected_kind="operator")
    rows, cols = meta["shape"]
    mat = np.zeros((rows, cols), dtype=complex)
    for parts in entries:
        i, j = int(parts[0]), int(parts[1])
        mat[i, j] = float(parts[2]) + 1j * float(parts[3])
    basis = CompositeBasis(meta["cutoff"])
    return Operator(basis, mat, hermitian=bool(meta["hermitian"]))


def save_state(state: PureState, path: str | Path) -> None:
    lines = [
        _HEADER,
        "kind=state",
        f"shape={state.amplitudes.size} 1",
        f"cutoff={state.basis.cutoff}",
    ]
    for i in np.nonzero(state.amplitudes)[0]:
        v = state.amplitudes[i]
        lines.append(f"{i} {format_float(v.real)} {format_float(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_state(path: str | Path) -> PureState:
    meta, entries = _parse(path, expected_kind="state")
    vec = np.zeros(meta["shape"][0], dtype=complex)
    for parts in entries:
        vec[int(parts[0])] = float(parts[1]) + 1j * float(parts[2])
    return PureState(CompositeBasis(meta["cutoff"]), vec)


def _parse(path: str | Path, expected_kind: str):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _HEADER:
        raise ValueError(f"{path} is not a spinphoton matrix file")
    meta: dict = {}
    entries: list[list[str]] = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if "=" in line and not line[0].isdigit() and not line.startswith("-"):
            key, value = line.split("=", 1)
            if key == "kind":
                meta["kind"] = value
            elif key == "shape":
                meta["shape"] = tuple(int(x) for x in value.split())
            elif key in ("hermitian", "cutoff"):
                meta[key] = int(value)
        else:
            entries.append(line.split())
    if meta.get("kind") != expected_kind:
        raise ValueError(f"{path}: expected kind={expected_kind}, got {meta.get('kind')}")
    return meta, entries


def write_csv(
    path: str | Path,
    header: list[str],
    columns: list[np.ndarray],
    metadata: dict | None = None,
) -> None:
    """CSV with ``# key: value`` comment lines followed by the data table."""
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}: {value}\n")
    buf.write(f"# version: {__version__}\n")
    buf.write(",".join(header) + "\n")
    n = len(columns[0])
    for row in range(n):
        buf.write(",".join(format_float(col[row]) for col in columns) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv_metadata(path: str | Path) -> dict:
    meta: dict = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(": ")
        meta[key] = value
    return meta

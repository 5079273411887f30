"""Command-line front end.

Subcommands: ``excite``, ``emit``, ``dynamics``, ``transmission``, ``sweep``.
Configuration precedence is defaults < config file (flat JSON) < flags; every
output embeds its full canonical configuration so the file can be reproduced
from its own header.  All randomness flows from ``--seed`` (default 0, never
entropy).  Exit codes: 0 success, 2 invalid configuration, 3 numerical
failure.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click
import numpy as np

from . import __version__
from .basis import CompositeBasis, matter_superposition
from .basis import T_DN, T_UP
from .dynamics import average_trajectories, evolve_lindblad
from .emission import decay_rate, photon_state_angles
from .errors import (
    InvalidParamsError,
    RegimeError,
    SpinPhotonError,
    StiffnessError,
    TruncationOverflowError,
)
from .excitation import (
    QDAmplitudes,
    analytic_sweet_spot_amplitude,
    cavity_field_circular,
    excitation_trace,
)
from .model import apply_coherent_kick
from .multiphoton import cluster_fidelity, poincare_rotation_angle
from .params import SystemParams
from .sweep import (
    QUANTITIES,
    AxisSpec,
    run_map,
    write_grid_binary,
    write_grid_csv,
)
from .textio import canonical_json, format_float, write_csv
from .transmission import default_omega_grid, transmission_matrix

_CONFIG_ERROR_EXIT = 2
_NUMERICAL_ERROR_EXIT = 3


@dataclass
class RunConfig:
    """Flat run configuration; one dataclass covers every subcommand."""

    command: str = ""
    g: float = 0.15
    delta: float = 1.0
    omega_c: float = 0.0
    omega_0: float = 0.0
    kappa: float = 1.0
    eps_plus: str = "0"
    eps_minus: str = "0"
    cutoff: int = 2
    seed: int = 0
    workers: int = 1
    n_traj: int = 300
    t_end: float = 20.0
    n_points: int = 201
    method: str = "lindblad"
    initial: str = "trion"
    analytic: bool = False
    max_truncation: float = 1e-6
    omega_min: float | None = None
    omega_max: float | None = None
    n_max: int = 8
    omega0_grid: str = "-4,4,81"
    delta_grid: str = "-4,4,81"
    quantities: str = ",".join(QUANTITIES)
    format: str = "csv"

    def params(self) -> SystemParams:
        return SystemParams(
            omega_c=self.omega_c,
            delta=self.delta,
            omega_0=self.omega_0,
            g=self.g,
            kappa=self.kappa,
            eps_plus=_parse_complex(self.eps_plus),
            eps_minus=_parse_complex(self.eps_minus),
            photon_cutoff=self.cutoff,
        )

    def canonical(self) -> str:
        """Reproducibility-relevant configuration as deterministic JSON.

        ``workers`` is omitted: it is an execution detail and results are
        required to be identical for any worker count.
        """
        record = asdict(self)
        del record["workers"]
        return canonical_json(record)


_CONFIG_FIELDS = {f.name: f.type for f in fields(RunConfig)}


def _parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise InvalidParamsError(f"cannot parse complex amplitude {text!r}") from exc


def _parse_axis(text: str) -> AxisSpec:
    parts = str(text).split(",")
    if len(parts) != 3:
        raise InvalidParamsError(f"axis spec must be 'min,max,count', got {text!r}")
    return AxisSpec(float(parts[0]), float(parts[1]), int(parts[2]))


def build_config(command: str, config_file: str | None, overrides: dict) -> RunConfig:
    """Merge defaults, config-file values, and command-line overrides."""
    merged = asdict(RunConfig())
    if config_file:
        try:
            loaded = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParamsError(f"cannot read config file: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InvalidParamsError("config file must hold a flat JSON object")
        unknown = set(loaded) - set(merged)
        if unknown:
            raise InvalidParamsError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    merged["command"] = command
    cfg = RunConfig(**merged)
    if cfg.format not in ("csv", "json"):
        raise InvalidParamsError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.seed < 0 or cfg.seed > (1 << 64) - 1:
        raise InvalidParamsError("seed must fit an unsigned 64-bit integer")
    if cfg.workers < 1:
        raise InvalidParamsError("workers must be >= 1")
    return cfg


def _metadata(cfg: RunConfig) -> dict:
    return {"config": cfg.canonical()}


def _emit_json(path: str, cfg: RunConfig, data) -> None:
    envelope = {
        "config": json.loads(cfg.canonical()),
        "version": __version__,
        "data": data,
    }
    Path(path).write_text(
        json.dumps(envelope, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def _run_guard(func):
    """Translate package errors into the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (InvalidParamsError, RegimeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_CONFIG_ERROR_EXIT)
        except (StiffnessError, TruncationOverflowError) as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(_NUMERICAL_ERROR_EXIT)
        except SpinPhotonError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(_NUMERICAL_ERROR_EXIT)

    wrapper.__name__ = func.__name__
    return wrapper


def _param_options(func):
    for decl, kwargs in reversed(
        [
            (("--g",), dict(type=float, help="light-matter coupling (units of kappa)")),
            (("--delta",), dict(type=float, help="half mode splitting (units of kappa)")),
            (("--omega-c",), dict(type=float, help="central cavity frequency")),
            (("--omega-0",), dict(type=float, help="trion resonance frequency")),
            (("--kappa",), dict(type=float, help="cavity amplitude decay rate")),
            (("--eps-plus",), dict(type=str, help="sigma+ pump amplitude (complex literal)")),
            (("--eps-minus",), dict(type=str, help="sigma- pump amplitude (complex literal)")),
            (("--cutoff",), dict(type=int, help="Fock cutoff per circular mode")),
            (("--config",), dict(type=click.Path(), help="flat JSON config file")),
            (("--output", "-o"), dict(type=click.Path(), help="output file path")),
            (("--format",), dict(type=click.Choice(["csv", "json"]), help="output format")),
        ]
    ):
        func = click.option(*decl, default=None, **kwargs)(func)
    return func


@click.group()
@click.version_option(version=__version__, prog_name="spinphoton")
def main() -> None:
    """Spin-photon interface toolkit for a birefringent micropillar cavity."""


@main.command()
@_param_options
@click.option("--t-end", default=None, type=float, help="integration horizon (1/kappa)")
@click.option("--n-points", default=None, type=int, help="grid points of the trace")
@click.option("--analytic/--numeric", "analytic", default=None, help="closed-form sweet-spot route")
@_run_guard
def excite(config, output, **overrides) -> None:
    """Semiclassical trion excitation: time traces and the final population."""
    cfg = build_config("excite", config, overrides)
    params = cfg.params()
    grid = np.linspace(0.0, cfg.t_end, cfg.n_points)
    initial = QDAmplitudes.in_plane_electron()
    cp, cm = cavity_field_circular(params, grid)
    if cfg.analytic:
        t_up, t_dn = analytic_sweet_spot_amplitude(params, grid, initial)
        n_tr = np.abs(t_up) ** 2 + np.abs(t_dn) ** 2
    else:
        trace = excitation_trace(params, initial, grid)
        n_tr = np.abs(trace[:, 2]) ** 2 + np.abs(trace[:, 3]) ** 2
    out = output or "excite.csv"
    final = float(n_tr[-1])
    if cfg.format == "json":
        _emit_json(
            out,
            cfg,
            {
                "t": list(map(float, grid)),
                "n_plus": list(map(float, np.abs(cp) ** 2)),
                "n_minus": list(map(float, np.abs(cm) ** 2)),
                "N_tr": list(map(float, n_tr)),
                "final_N_tr": final,
            },
        )
    else:
        meta = _metadata(cfg)
        meta["final_N_tr"] = format_float(final)
        write_csv(
            out,
            ["t", "n_plus", "n_minus", "N_tr"],
            [grid, np.abs(cp) ** 2, np.abs(cm) ** 2, n_tr],
            meta,
        )
    click.echo(f"final N_tr = {format_float(final)} -> {out}")


@main.command()
@_param_options
@click.option("--n-max", default=None, type=int, help="largest cluster size in the fidelity table")
@_run_guard
def emit(config, output, **overrides) -> None:
    """Emission and entanglement scalars for the given working point."""
    cfg = build_config("emit", config, overrides)
    params = cfg.params()
    qubit = photon_state_angles(params)
    record: dict[str, float] = {
        "gamma": decay_rate(params),
        "alpha": qubit.alpha,
        "beta": qubit.beta,
        "theta": qubit.theta,
        "Fc": qubit.fc,
        "overlap": qubit.overlap,
        "concurrence_inplane": qubit.fc,  # 2 sqrt(Jx^2+Jy^2) Fc at J_perp = 1/2
        "tau": qubit.fc**4,
        "poincare_rotation": poincare_rotation_angle(qubit),
    }
    for n in range(1, cfg.n_max + 1):
        record[f"fidelity_{n}"] = cluster_fidelity(n, qubit)
    out = output or "emit.csv"
    if cfg.format == "json":
        _emit_json(out, cfg, record)
    else:
        keys = list(record)
        write_csv(out, keys, [np.array([record[k]]) for k in keys], _metadata(cfg))
    click.echo(f"Fc = {format_float(qubit.fc)} -> {out}")


@main.command()
@_param_options
@click.option("--method", default=None, type=click.Choice(["lindblad", "trajectories"]))
@click.option("--n-traj", default=None, type=int, help="number of trajectories")
@click.option("--seed", default=None, type=int, help="base RNG seed (default 0)")
@click.option("--workers", default=None, type=int, help="parallel trajectory workers")
@click.option("--t-end", default=None, type=float)
@click.option("--n-points", default=None, type=int)
@click.option("--initial", default=None, type=click.Choice(["trion", "kick"]))
@click.option("--max-truncation", default=None, type=float, help="allowed kick norm loss")
@_run_guard
def dynamics(config, output, **overrides) -> None:
    """Master-equation or quantum-trajectory evolution of the full model."""
    cfg = build_config("dynamics", config, overrides)
    params = cfg.params()
    basis = CompositeBasis(params.photon_cutoff)
    if cfg.initial == "trion":
        psi0 = matter_superposition(basis, {T_UP: 1.0, T_DN: 1.0})
    else:
        electron = matter_superposition(basis, {0: 1.0, 1: 1.0})
        psi0 = apply_coherent_kick(
            electron, params.eps_plus, params.eps_minus, max_truncation=cfg.max_truncation
        )
    if cfg.method == "lindblad":
        series, _ = evolve_lindblad(psi0.to_density(), params, cfg.t_end, n_points=cfg.n_points)
    else:
        series = average_trajectories(
            psi0,
            params,
            cfg.t_end,
            n_traj=cfg.n_traj,
            seed=cfg.seed,
            n_points=cfg.n_points,
            workers=cfg.workers,
        )
    out = output or "dynamics.csv"
    if cfg.format == "json":
        data = {"t": list(map(float, series.t))}
        data.update({k: list(map(float, v)) for k, v in series.channels.items()})
        data.update({f"stderr_{k}": list(map(float, v)) for k, v in series.stderr.items()})
        _emit_json(out, cfg, data)
    else:
        series.to_csv(out, _metadata(cfg))
    click.echo(f"{cfg.method} run ({cfg.n_points} points) -> {out}")


@main.command()
@_param_options
@click.option("--omega-min", default=None, type=float, help="probe grid start")
@click.option("--omega-max", default=None, type=float, help="probe grid end")
@click.option("--n-points", default=None, type=int, help="probe grid size")
@_run_guard
def transmission(config, output, **overrides) -> None:
    """Unpolarized transmission spectrum and the four matrix coefficients."""
    cfg = build_config("transmission", config, overrides)
    params = cfg.params()
    if cfg.omega_min is None or cfg.omega_max is None:
        grid = default_omega_grid(params, cfg.n_points)
    else:
        grid = np.linspace(cfg.omega_min, cfg.omega_max, cfg.n_points)
    rows = [transmission_matrix(params, float(w)) for w in grid]
    columns = {
        "T": np.array([m.unpolarized() for m in rows]),
        "abs_tpp2": np.array([abs(m.t_pp) ** 2 for m in rows]),
        "abs_tmm2": np.array([abs(m.t_mm) ** 2 for m in rows]),
        "abs_tpm2": np.array([abs(m.t_pm) ** 2 for m in rows]),
        "abs_tmp2": np.array([abs(m.t_mp) ** 2 for m in rows]),
    }
    out = output or "transmission.csv"
    if cfg.format == "json":
        data = {"omega": list(map(float, grid))}
        data.update({k: list(map(float, v)) for k, v in columns.items()})
        _emit_json(out, cfg, data)
    else:
        write_csv(
            out,
            ["omega", "T", "abs_tpp2", "abs_tmm2", "abs_tpm2", "abs_tmp2"],
            [grid, columns["T"], columns["abs_tpp2"], columns["abs_tmm2"], columns["abs_tpm2"], columns["abs_tmp2"]],
            _metadata(cfg),
        )
    click.echo(f"{len(grid)} frequencies -> {out}")


@main.command()
@_param_options
@click.option("--quantity", "quantity", multiple=True, type=click.Choice(QUANTITIES))
@click.option("--omega0-grid", default=None, type=str, help="'min,max,count' for omega_0 - omega_c")
@click.option("--delta-grid", default=None, type=str, help="'min,max,count' for delta")
@click.option("--seed", default=None, type=int, help="base RNG seed (recorded; the map itself is deterministic)")
@click.option("--workers", default=None, type=int)
@click.option("--binary", default=None, type=click.Path(), help="binary dump path prefix")
@_run_guard
def sweep(config, output, quantity, binary, **overrides) -> None:
    """Maps of N_tr_max, Fc, concurrence, and tau over the detuning plane."""
    if quantity:
        overrides["quantities"] = ",".join(quantity)
    cfg = build_config("sweep", config, overrides)
    params = cfg.params()
    wanted = tuple(q for q in cfg.quantities.split(",") if q)
    grid = run_map(
        _parse_axis(cfg.omega0_grid),
        _parse_axis(cfg.delta_grid),
        quantities=wanted,
        workers=cfg.workers,
        params_base=params,
    )
    out = output or "sweep.csv"
    write_grid_csv(grid, out, _metadata(cfg))
    if binary:
        for name in wanted:
            write_grid_binary(grid, name, f"{binary}.{name}.bin")
    if grid.optimizer_warnings:
        click.echo(f"warning: optimizer did not converge in {grid.optimizer_warnings} cells", err=True)
    click.echo(f"{len(wanted)} quantities on {grid.omega0_axis.count}x{grid.delta_axis.count} cells -> {out}")


if __name__ == "__main__":
    main()

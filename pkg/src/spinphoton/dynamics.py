"""Time evolution: Lindblad master equation and quantum-trajectory unravelling.

Both routes share the non-Hermitian Hamiltonian H_nh = H - i kappa (n_+ + n_-)
and the jump operators C_+/- = sqrt(2 kappa) c_+/-.  The master equation

    d rho / dt = -i (H_nh rho - rho H_nh^dag) + sum_+/- C rho C^dag

is integrated with an adaptive embedded Runge-Kutta 4(5) scheme
(atol 1e-10, rtol 1e-8).  A trajectory evolves the wave function under H_nh,
drawing a uniform threshold for the squared norm; when the norm crosses it,
a jump fires in a channel chosen proportionally to <C^dag C> and the state is
renormalized.  Averaging normalized-state observables over trajectories
reproduces the master equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np
from scipy.integrate import solve_ivp

from .basis import CompositeBasis, DensityOperator, PureState
from .emission import wootters_concurrence
from .errors import (
    InvalidParamsError,
    StiffnessError,
    UndefinedConcurrenceError,
)
from .model import (
    build_nonhermitian,
    jump_operators,
    photon_number_diagonal,
    trion_number_diagonal,
)
from .params import SystemParams
from .textio import write_csv

__all__ = [
    "TimeSeries",
    "TrajectoryRecord",
    "splitmix64",
    "evolve_lindblad",
    "run_trajectory",
    "average_trajectories",
    "eph_concurrence_from_rho",
]

_MASK64 = (1 << 64) - 1

#: Canonical column order for CSV output.
CHANNEL_ORDER = ("n_plus", "n_minus", "N_tr", "concurrence", "trace", "norm")

ODE_RTOL = 1e-8
ODE_ATOL = 1e-10


def splitmix64(seed: int, index: int) -> int:
    """Per-trajectory seed stream: worker count can never change results."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass
class TimeSeries:
    """Observable traces on a strictly increasing time grid (units 1/kappa)."""

    t: np.ndarray
    channels: dict[str, np.ndarray]
    stderr: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float)
        if self.t.ndim != 1 or (self.t.size > 1 and np.any(np.diff(self.t) <= 0)):
            raise InvalidParamsError("time grid must be strictly increasing")
        for name, values in list(self.channels.items()):
            values = np.asarray(values, dtype=float)
            if values.shape != self.t.shape:
                raise InvalidParamsError(f"channel {name} length differs from time grid")
            self.channels[name] = values
        for name, values in list(self.stderr.items()):
            self.stderr[name] = np.asarray(values, dtype=float)

    def to_csv(self, path, metadata: dict | None = None) -> None:
        names = [c for c in CHANNEL_ORDER if c in self.channels]
        names += [c for c in self.channels if c not in names]
        header = ["t"] + names + [f"stderr_{c}" for c in names if c in self.stderr]
        columns = [self.t] + [self.channels[c] for c in names]
        columns += [self.stderr[c] for c in names if c in self.stderr]
        write_csv(path, header, columns, metadata)


@dataclass
class TrajectoryRecord:
    """A single quantum trajectory: jumps, snapshots, and the final state."""

    seed: int
    jumps: list[tuple[float, str]]
    final_state: PureState
    t: np.ndarray
    channels: dict[str, np.ndarray]
    blocks: np.ndarray | None = None  # (n_points, 4, 4) single-excitation blocks

    def __post_init__(self) -> None:
        times = [t for t, _ in self.jumps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidParamsError("jump times must be strictly increasing")
        if times and (times[0] < self.t[0] or times[-1] > self.t[-1]):
            raise InvalidParamsError("jump times must lie within the simulated window")


class _Observables:
    """Diagonal observables plus the single-excitation block indices."""

    def __init__(self, basis: CompositeBasis):
        self.n_plus, self.n_minus = photon_number_diagonal(basis)
        self.n_trion = trion_number_diagonal(basis)
        self.block = np.array(basis.single_photon_block_indices())


def _lindblad_rhs_factory(h_nh: np.ndarray, cs: list[np.ndarray]):
    h_dag = h_nh.conj().T
    cs_dag = [c.conj().T for c in cs]
    dim = h_nh.shape[0]

    def rhs(_t, flat):
        rho = flat.reshape(dim, dim)
        out = -1j * (h_nh @ rho - rho @ h_dag)
        for c, c_dag in zip(cs, cs_dag):
            out += c @ rho @ c_dag
        return out.reshape(-1)

    return rhs


def _sanitize_block(block: np.ndarray) -> np.ndarray:
    """Hermitize, project onto the PSD cone, and renormalize a small block.

    Integrator roundoff of the full density matrix is amplified when the
    extracted block carries little weight; the projection removes eigenvalue
    noise at the 1e-7 scale without biasing converged blocks.
    """
    block = 0.5 * (block + block.conj().T)
    w, v = np.linalg.eigh(block)
    w = np.clip(w, 0.0, None)
    block = (v * w) @ v.conj().T
    return block / np.trace(block).real


def eph_concurrence_from_rho(rho: DensityOperator) -> float:
    """Wootters concurrence of the electron (x) single-cavity-photon block.

    Extracts the 4x4 block on |up,+>, |up,->, |dn,+>, |dn,-> (one circular
    photon of either handedness, electron left in the dot), renormalizes it,
    and treats the two circular single-photon states as the polarization
    qubit.
    """
    if rho.basis is None:
        raise InvalidParamsError("density operator must live on a composite basis")
    idx = rho.basis.single_photon_block_indices()
    block = rho.matrix[np.ix_(idx, idx)]
    tr = float(np.trace(block).real)
    if tr < 1e-12:
        raise UndefinedConcurrenceError(
            f"single-excitation block trace {tr:.3e} carries no weight"
        )
    return wootters_concurrence(_sanitize_block(block))


def _block_concurrence_or_nan(matrix: np.ndarray, idx: np.ndarray) -> float:
    block = matrix[np.ix_(idx, idx)]
    tr = float(np.trace(block).real)
    if tr < 1e-12:
        return math.nan
    return wootters_concurrence(_sanitize_block(block))


def evolve_lindblad(
    rho0: DensityOperator,
    params: SystemParams,
    t_end: float,
    dt_max: float = math.inf,
    n_points: int = 201,
    compute_concurrence: bool = True,
) -> tuple[TimeSeries, DensityOperator]:
    """Integrate the master equation and record observables.

    Returns the time series (channels n_plus, n_minus, N_tr, concurrence,
    trace) and the final density operator.  The concurrence channel is NaN
    wherever the single-excitation block carries no weight.
    """
    if rho0.basis is None:
        raise InvalidParamsError("density operator must live on a composite basis")
    if t_end <= 0:
        raise InvalidParamsError("t_end must be positive")
    basis = rho0.basis
    obs = _Observables(basis)
    h_nh = build_nonhermitian(params, basis).dense()
    cs = [c.dense() for c in jump_operators(params, basis)]
    rhs = _lindblad_rhs_factory(h_nh, cs)

    grid = np.linspace(0.0, t_end, n_points)
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        rho0.matrix.reshape(-1).astype(complex),
        t_eval=grid,
        method="RK45",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        max_step=dt_max,
    )
    if not sol.success:
        raise StiffnessError(
            f"Lindblad integration failed: {sol.message} "
            f"(reached t = {sol.t[-1] if sol.t.size else 0.0:.3g} of {t_end})"
        )

    dim = basis.dim
    n_plus = np.empty(n_points)
    n_minus = np.empty(n_points)
    n_tr = np.empty(n_points)
    trace = np.empty(n_points)
    conc = np.full(n_points, math.nan)
    for k in range(n_points):
        rho = sol.y[:, k].reshape(dim, dim)
        diag = rho.diagonal().real
        n_plus[k] = float(obs.n_plus @ diag)
        n_minus[k] = float(obs.n_minus @ diag)
        n_tr[k] = float(obs.n_trion @ diag)
        trace[k] = float(diag.sum())
        if compute_concurrence:
            conc[k] = _block_concurrence_or_nan(rho, obs.block)

    series = TimeSeries(
        t=grid,
        channels={
            "n_plus": n_plus,
            "n_minus": n_minus,
            "N_tr": n_tr,
            "concurrence": conc,
            "trace": trace,
        },
    )
    final = DensityOperator(sol.y[:, -1].reshape(dim, dim), basis=basis)
    return series, final


def run_trajectory(
    psi0: PureState,
    params: SystemParams,
    t_end: float,
    dt_max: float = math.inf,
    seed: int = 0,
    n_points: int = 201,
    collect_blocks: bool = False,
) -> TrajectoryRecord:
    """One Monte-Carlo wave-function trajectory, reproducible from its seed.

    Snapshots record expectation values of the *normalized* state on the
    grid plus the decaying squared norm of the unnormalized wave function
    (channel ``norm2``), which is non-increasing between jumps.
    """
    if abs(psi0.norm - 1.0) > 1e-10:
        raise InvalidParamsError("trajectory initial state must be normalized")
    if t_end <= 0:
        raise InvalidParamsError("t_end must be positive")
    basis = psi0.basis
    obs = _Observables(basis)
    # keep the stored representation: matvec works for sparse and dense alike
    h_nh = build_nonhermitian(params, basis).matrix
    cs = [c.matrix for c in jump_operators(params, basis)]

    def rhs(_t, psi):
        return -1j * (h_nh @ psi)

    rng = np.random.Generator(np.random.PCG64(seed))
    grid = np.linspace(0.0, t_end, n_points)

    psi = psi0.amplitudes.copy()
    jumps: list[tuple[float, str]] = []
    snapshots = {name: np.zeros(n_points) for name in ("n_plus", "n_minus", "N_tr", "norm2")}
    blocks = np.zeros((n_points, 4, 4), dtype=complex) if collect_blocks else None

    def record(k: int, state: np.ndarray, norm2: float) -> None:
        normed = state / math.sqrt(norm2)
        dens = np.abs(normed) ** 2
        snapshots["n_plus"][k] = float(obs.n_plus @ dens)
        snapshots["n_minus"][k] = float(obs.n_minus @ dens)
        snapshots["N_tr"][k] = float(obs.n_trion @ dens)
        snapshots["norm2"][k] = norm2
        if blocks is not None:
            sub = normed[obs.block]
            blocks[k] = np.outer(sub, sub.conj())

    t_now = 0.0
    next_idx = 0
    if grid[0] == 0.0:
        record(0, psi, 1.0)
        next_idx = 1
    threshold = rng.random()

    while t_now < t_end:
        def norm_event(_t, y, threshold=threshold):
            return float(np.vdot(y, y).real) - threshold

        norm_event.terminal = True
        norm_event.direction = -1
        t_eval = grid[next_idx:]
        have_grid_points = t_eval.size > 0
        sol = solve_ivp(
            rhs,
            (t_now, t_end),
            psi,
            t_eval=t_eval if have_grid_points else np.array([t_end]),
            events=norm_event,
            method="RK45",
            rtol=ODE_RTOL,
            atol=ODE_ATOL,
            max_step=dt_max,
        )
        if sol.status == -1:
            raise StiffnessError(f"trajectory integration failed: {sol.message}")

        jumped = sol.status == 1
        t_stop = float(sol.t_events[0][0]) if jumped else t_end
        n_recorded = len(sol.t)  # scipy returns [] when no t_eval point was reached
        if have_grid_points and n_recorded:
            for offset in range(n_recorded):
                state = sol.y[:, offset]
                record(next_idx + offset, state, float(np.vdot(state, state).real))
            next_idx += n_recorded

        if not jumped:
            psi = sol.y[:, -1]
            break
        psi = sol.y_events[0][0]
        weights = np.array([float(np.vdot(c @ psi, c @ psi).real) for c in cs])
        total = weights.sum()
        if total <= 0:
            raise StiffnessError("norm threshold crossed with vanishing jump rates")
        channel = 0 if rng.random() < weights[0] / total else 1
        psi = cs[channel] @ psi
        psi = psi / np.linalg.norm(psi)
        jumps.append((t_stop, "sigma+" if channel == 0 else "sigma-"))
        threshold = rng.random()
        t_now = t_stop

    final_norm2 = float(np.vdot(psi, psi).real)
    final = PureState(basis, psi / math.sqrt(final_norm2))
    return TrajectoryRecord(
        seed=seed,
        jumps=jumps,
        final_state=final,
        t=grid,
        channels=snapshots,
        blocks=blocks,
    )


def _trajectory_worker(args) -> tuple[np.ndarray, np.ndarray | None]:
    psi0_amp, cutoff, params, t_end, dt_max, seed, n_points, collect_blocks = args
    psi0 = PureState(CompositeBasis(cutoff), psi0_amp)
    rec = run_trajectory(
        psi0,
        params,
        t_end,
        dt_max=dt_max,
        seed=seed,
        n_points=n_points,
        collect_blocks=collect_blocks,
    )
    stacked = np.stack([rec.channels[c] for c in ("n_plus", "n_minus", "N_tr")])
    return stacked, rec.blocks


def average_trajectories(
    psi0: PureState,
    params: SystemParams,
    t_end: float,
    n_traj: int,
    seed: int = 0,
    dt_max: float = math.inf,
    n_points: int = 201,
    workers: int = 1,
    collect_blocks: bool = True,
) -> TimeSeries:
    """Trajectory-averaged observables with standard errors.

    Per-trajectory seeds come from ``splitmix64(seed, i)`` and the reduction
    runs in trajectory-index order, so the result is bit-identical for any
    worker count.  The concurrence channel is evaluated on the averaged
    single-excitation block (it is not linear in the state); its standard
    error, when ``collect_blocks`` is set, is a leave-one-out jackknife.
    """
    if n_traj < 1:
        raise InvalidParamsError("n_traj must be >= 1")
    tasks = [
        (
            psi0.amplitudes,
            psi0.basis.cutoff,
            params,
            t_end,
            dt_max,
            splitmix64(seed, i),
            n_points,
            collect_blocks,
        )
        for i in range(n_traj)
    ]
    if workers > 1:
        with get_context("fork").Pool(workers) as pool:
            results = pool.map(_trajectory_worker, tasks, chunksize=max(1, n_traj // (workers * 8)))
    else:
        results = [_trajectory_worker(task) for task in tasks]

    data = np.stack([r[0] for r in results])  # (n_traj, 3, n_points)
    mean = data.mean(axis=0)
    if n_traj > 1:
        err = data.std(axis=0, ddof=1) / math.sqrt(n_traj)
    else:
        err = np.zeros_like(mean)

    grid = np.linspace(0.0, t_end, n_points)
    channels = {
        "n_plus": mean[0],
        "n_minus": mean[1],
        "N_tr": mean[2],
    }
    stderr = {
        "n_plus": err[0],
        "n_minus": err[1],
        "N_tr": err[2],
    }

    if collect_blocks:
        blocks = np.stack([r[1] for r in results])  # (n_traj, n_points, 4, 4)
        mean_block = blocks.mean(axis=0)
        conc = np.array(
            [_normalized_block_concurrence(mean_block[k]) for k in range(n_points)]
        )
        channels["concurrence"] = conc
        if n_traj > 1:
            stderr["concurrence"] = _jackknife_concurrence(blocks, mean_block)
    return TimeSeries(t=grid, channels=channels, stderr=stderr)


def _normalized_block_concurrence(block: np.ndarray) -> float:
    tr = float(np.trace(block).real)
    if tr < 1e-12:
        return math.nan
    return wootters_concurrence(_sanitize_block(block))


_SIGMA_YY = np.kron(np.array([[0.0, -1j], [1j, 0.0]]), np.array([[0.0, -1j], [1j, 0.0]])).real


def _batched_block_concurrence(blocks: np.ndarray) -> np.ndarray:
    """Wootters concurrence of a stack of unnormalized 4x4 blocks."""
    tr = np.einsum("...ii->...", blocks).real
    out = np.full(blocks.shape[:-2], math.nan)
    ok = tr > 1e-12
    if not np.any(ok):
        return out
    b = blocks[ok] / tr[ok][:, None, None]
    b = 0.5 * (b + np.conj(np.swapaxes(b, -1, -2)))
    flipped = _SIGMA_YY @ b.conj() @ _SIGMA_YY
    eigs = np.linalg.eigvals(b @ flipped)
    lam = np.sort(np.sqrt(np.clip(eigs.real, 0.0, None)), axis=-1)
    out[ok] = np.maximum(0.0, lam[:, 3] - lam[:, 2] - lam[:, 1] - lam[:, 0])
    return out


def _jackknife_concurrence(blocks: np.ndarray, mean_block: np.ndarray) -> np.ndarray:
    n_traj, n_points = blocks.shape[0], blocks.shape[1]
    out = np.zeros(n_points)
    for k in range(n_points):
        total = mean_block[k] * n_traj
        loo = _batched_block_concurrence((total[None] - blocks[:, k]) / (n_traj - 1))
        if np.any(np.isnan(loo)):
            out[k] = math.nan
        else:
            out[k] = math.sqrt((n_traj - 1) / n_traj * np.sum((loo - loo.mean()) ** 2))
    return out

"""Experiment orchestration: seeded convergence runs, geometry sweeps,
parallel execution and file output.

A convergence run propagates an ensemble of paired noiseless/noisy circuit
samples, accumulates cumulant moments per recorded depth, and reports the
SDL distance to a seeded Haar reference for every configured damping
strength (gamma = 0 denotes the noiseless baseline, which runs on the
cheaper pure-state pipeline; its equality with a gamma = 0 density-matrix
run is enforced by the test suite).

Determinism contract: all randomness derives from `master_seed`; the sample
set is partitioned into fixed chunks whose partial moments are folded in
chunk order, so results are bit-identical regardless of the number of
worker processes.  CSV bodies contain no timestamps; wall-clock metadata
lives only in the JSON document's "timing" section.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .bloch import (
    ExpansionProfile,
    expansion_profile,
    format_float,
    lambda_north,
    lambda_south,
    theta_c,
)
from .circuits import (
    STREAM_HAAR,
    STREAM_SAMPLES,
    NoiseSpec,
    derive_seed,
    noisy_prob_trajectory,
    sample_realization,
    unitary_prob_trajectory,
)
from .errors import UndefinedPointError
from .majorization import (
    HaarReference,
    MomentAccumulator,
    SDLSignature,
    cumulants_batch,
    distance_to_haar,
    haar_reference,
)
from .states import initial_state

DEFAULT_GAMMAS = (0.0, 0.001, 0.005, 0.01, 0.05)
DEFAULT_MASTER_SEED = 123456789

PRESETS = {
    # Laptop-scale: finishes in minutes while keeping the qualitative
    # noisy-vs-noiseless crossing visible.
    "desk": {"qubits": 5, "depth": 200, "ensemble": 500, "m_haar": 2000},
    # Full-scale reproduction parameters (minutes of compute per gamma).
    "paper": {"qubits": 6, "depth": 200, "ensemble": 3000, "m_haar": 3000},
}

# Ensemble partitioning: samples are grouped into BATCHES contiguous
# batches (for between-batch error bars) and each batch is cut into chunks
# of at most CHUNK_SAMPLES (the unit of work one process handles).  Both
# constants are fixed so the fold order never depends on worker count.
BATCHES = 10
CHUNK_SAMPLES = 25

# Damping strengths for the boundary-angle sweep emitted with geometry runs.
DEFAULT_SWEEP_GAMMAS = tuple(i / 200 for i in range(1, 191))


class ExperimentConfig(BaseModel):
    """Validated parameters of a convergence run.

    `workers`, `output_path` and `checkpoint_path` steer execution and I/O
    only; they are excluded from the content hash because they must never
    change the numbers.
    """

    model_config = ConfigDict(extra="forbid")

    qubits: int = Field(ge=2, le=10)
    depth: int = Field(ge=1, le=100_000)
    ensemble: int = Field(ge=2)
    gammas: list[float] = Field(default=list(DEFAULT_GAMMAS), min_length=1)
    init: Literal["zeros", "ones"] = "zeros"
    master_seed: int = Field(default=DEFAULT_MASTER_SEED, ge=0, lt=1 << 64)
    m_haar: int = Field(default=3000, ge=2)
    record_stride: int = Field(default=1, ge=1)
    noise_placement: Literal["idle_only", "all_qubits"] = "idle_only"
    output_path: str | None = None
    workers: int | None = Field(default=None, ge=1)
    checkpoint_path: str | None = None

    @field_validator("gammas")
    @classmethod
    def _check_gammas(cls, value: list[float]) -> list[float]:
        for g in value:
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"every gamma must lie in [0, 1], got {g}")
        if len(set(value)) != len(value):
            raise ValueError("gammas must be distinct")
        return [float(g) for g in value]

    @model_validator(mode="after")
    def _check_stride(self) -> "ExperimentConfig":
        if self.record_stride > self.depth:
            raise ValueError(
                f"record_stride {self.record_stride} exceeds depth {self.depth}"
            )
        return self

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ExperimentConfig":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}, options: {sorted(PRESETS)}")
        return cls(**{**PRESETS[name], **overrides})

    def hash_fields(self) -> dict:
        """The result-determining fields, in a stable JSON-ready form."""
        return {
            "qubits": self.qubits,
            "depth": self.depth,
            "ensemble": self.ensemble,
            "gammas": self.gammas,
            "init": self.init,
            "master_seed": self.master_seed,
            "m_haar": self.m_haar,
            "record_stride": self.record_stride,
            "noise_placement": self.noise_placement,
        }


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable content hash over the result-determining configuration."""
    canon = json.dumps(cfg.hash_fields(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def validate_and_echo(data) -> tuple[ExperimentConfig, str]:
    """Normalize a raw config (dict or model), filling defaults, plus its hash."""
    cfg = data if isinstance(data, ExperimentConfig) else ExperimentConfig.model_validate(data)
    return cfg, config_hash(cfg)


def recorded_depths(depth: int, stride: int) -> list[int]:
    """Depths stride, 2*stride, ...; the final depth is always included."""
    depths = list(range(stride, depth + 1, stride))
    if not depths or depths[-1] != depth:
        depths.append(depth)
    return depths


# --- ensemble partitioning and the per-chunk worker -----------------------


@dataclass(frozen=True)
class _ChunkSpec:
    batch: int
    start: int
    stop: int


def _plan_chunks(m: int, batches: int = BATCHES, chunk: int = CHUNK_SAMPLES) -> list[_ChunkSpec]:
    """Fixed partition of sample indices into batch-aligned chunks."""
    b_eff = min(batches, m)
    specs = []
    for b in range(b_eff):
        lo = b * m // b_eff
        hi = (b + 1) * m // b_eff
        start = lo
        while start < hi:
            stop = min(start + chunk, hi)
            specs.append(_ChunkSpec(b, start, stop))
            start = stop
    return specs


@dataclass(frozen=True)
class _ChunkTask:
    qubits: int
    depth: int
    gammas: tuple[float, ...]
    init: str
    placement: str
    master_seed: int
    depths: tuple[int, ...]
    start: int
    stop: int


def _simulate_chunk(task: _ChunkTask):
    """Cumulant moments of samples [start, stop) for every gamma.

    Returns (count, s1, s2) where s1/s2 have shape (n_gammas, n_depths, d).
    Sample k draws its circuit from derive_seed(master_seed, 0, k); the
    noiseless entry (gamma = 0) reuses the pure-state pipeline and all noisy
    entries share the same realization.
    """
    d = 1 << task.qubits
    depths = list(task.depths)
    n_rows = len(depths)
    n_g = len(task.gammas)
    s1 = np.zeros((n_g, n_rows, d))
    s2 = np.zeros((n_g, n_rows, d))
    pure0 = initial_state(task.qubits, task.init, "pure")
    dens0 = initial_state(task.qubits, task.init, "density")
    for k in range(task.start, task.stop):
        seed_k = derive_seed(task.master_seed, STREAM_SAMPLES, k)
        circuit = sample_realization(seed_k, task.qubits, task.depth)
        pure_cums = None
        for gi, gamma in enumerate(task.gammas):
            if gamma == 0.0:
                if pure_cums is None:
                    probs = unitary_prob_trajectory(pure0, circuit, depths)
                    pure_cums = cumulants_batch(probs)
                cums = pure_cums
            else:
                noise = NoiseSpec(gamma, task.placement)
                probs = noisy_prob_trajectory(dens0, circuit, noise, depths)
                cums = cumulants_batch(probs)
            s1[gi] += cums
            s2[gi] += cums * cums
    return task.stop - task.start, s1, s2


# --- checkpointing ---------------------------------------------------------


def _save_checkpoint(path: Path, cfg_hash: str, done: int, counts, s1, s2) -> None:
    tmp = path.with_name(path.name + ".tmp")
    meta = json.dumps({"config_hash": cfg_hash, "chunks_done": done})
    with open(tmp, "wb") as fh:
        np.savez(fh, meta=np.array(meta), counts=counts, s1=s1, s2=s2)
    os.replace(tmp, path)


def _load_checkpoint(path: Path, cfg_hash: str):
    if not path.exists():
        return None
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("config_hash") != cfg_hash:
            return None
        return int(meta["chunks_done"]), data["counts"].copy(), data["s1"].copy(), data["s2"].copy()


# --- results ---------------------------------------------------------------


@dataclass
class GammaSeries:
    """Distance-to-Haar trajectory of one damping strength."""

    gamma: float
    distances: np.ndarray        # (n_depths,)
    sdl: np.ndarray              # (n_depths, d)
    batch_distances: np.ndarray  # (n_batches, n_depths)


@dataclass
class ConvergenceResult:
    config: ExperimentConfig
    config_hash: str
    depths: list[int]
    haar: HaarReference
    series: list[GammaSeries]
    started_at: str
    wall_seconds: float
    workers_used: int

    def series_for(self, gamma: float) -> GammaSeries:
        for s in self.series:
            if s.gamma == gamma:
                return s
        raise KeyError(f"no series for gamma={gamma}")

    def distance_csv(self) -> str:
        """Rows `depth,gamma,distance`, gammas in configured order."""
        lines = ["depth,gamma,distance"]
        for s in self.series:
            g = format_float(s.gamma)
            for t, dist in zip(self.depths, s.distances):
                lines.append(f"{t},{g},{format_float(dist)}")
        return "\n".join(lines) + "\n"

    def sdl_json_doc(self) -> dict:
        """Full SDL tensor plus metadata, for audit and downstream plotting."""
        return {
            "kind": "convergence",
            "config": self.config.hash_fields(),
            "config_hash": self.config_hash,
            "haar": {"d": self.haar.d, "m_haar": self.haar.m_haar, "seed": self.haar.seed},
            "depths": self.depths,
            "gammas": [s.gamma for s in self.series],
            "distances": {format_float(s.gamma): [float(x) for x in s.distances] for s in self.series},
            "sdl": {format_float(s.gamma): s.sdl.tolist() for s in self.series},
            "batch_distances": {
                # NaN marks batches too small to carry a spread; JSON has no
                # NaN, so emit null there.
                format_float(s.gamma): [
                    [float(x) if np.isfinite(x) else None for x in row]
                    for row in s.batch_distances
                ]
                for s in self.series
            },
            "timing": {
                "started_at": self.started_at,
                "wall_seconds": self.wall_seconds,
                "workers": self.workers_used,
            },
        }


def run_convergence(
    cfg,
    progress=None,
    checkpoint_every: int = 16,
) -> ConvergenceResult:
    """Run the full convergence experiment described by `cfg`.

    `progress(done, total)` is called after each folded chunk.  If
    `cfg.checkpoint_path` is set, accumulated moments are flushed there
    every `checkpoint_every` chunks and a rerun with an identical config
    resumes from the flushed prefix, reproducing the uninterrupted result
    exactly.
    """
    cfg, cfg_hash = validate_and_echo(cfg)
    started_at = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()

    depths = recorded_depths(cfg.depth, cfg.record_stride)
    d = 1 << cfg.qubits
    n_rows = len(depths)
    n_g = len(cfg.gammas)

    ref = haar_reference(d, cfg.m_haar, derive_seed(cfg.master_seed, STREAM_HAAR))

    specs = _plan_chunks(cfg.ensemble)
    n_batches = max(s.batch for s in specs) + 1
    tasks = [
        _ChunkTask(
            cfg.qubits,
            cfg.depth,
            tuple(cfg.gammas),
            cfg.init,
            cfg.noise_placement,
            cfg.master_seed,
            tuple(depths),
            s.start,
            s.stop,
        )
        for s in specs
    ]

    counts = np.zeros(n_batches, dtype=np.int64)
    s1 = np.zeros((n_g, n_batches, n_rows, d))
    s2 = np.zeros((n_g, n_batches, n_rows, d))

    ckpt_path = Path(cfg.checkpoint_path) if cfg.checkpoint_path else None
    start_index = 0
    if ckpt_path is not None:
        loaded = _load_checkpoint(ckpt_path, cfg_hash)
        if loaded is not None:
            start_index, counts, s1, s2 = loaded

    workers = cfg.workers or os.cpu_count() or 1
    pending = tasks[start_index:]

    def fold(i: int, result) -> None:
        cnt, c1, c2 = result
        b = specs[i].batch
        counts[b] += cnt
        s1[:, b] += c1
        s2[:, b] += c2
        if ckpt_path is not None and (i + 1 - start_index) % checkpoint_every == 0:
            _save_checkpoint(ckpt_path, cfg_hash, i + 1, counts, s1, s2)
        if progress is not None:
            progress(i + 1, len(tasks))

    if workers <= 1 or len(pending) <= 1:
        for offset, result in enumerate(map(_simulate_chunk, pending)):
            fold(start_index + offset, result)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, which keeps the fold order
            # fixed no matter how chunks were scheduled across processes.
            for offset, result in enumerate(pool.map(_simulate_chunk, pending, chunksize=1)):
                fold(start_index + offset, result)

    total = int(counts.sum())
    if total != cfg.ensemble:
        raise RuntimeError(f"accumulated {total} samples, expected {cfg.ensemble}")

    series = []
    for gi, gamma in enumerate(cfg.gammas):
        # Batches are folded in fixed index order (np.sum over the batch
        # axis), keeping totals independent of chunk scheduling.
        acc = MomentAccumulator.from_state(total, s1[gi].sum(axis=0), s2[gi].sum(axis=0))
        sdl = acc.std()
        dist = np.array(
            [distance_to_haar(SDLSignature(t, sdl[r]), ref) for r, t in enumerate(depths)]
        )
        batch_dist = np.full((n_batches, n_rows), np.nan)
        for b in range(n_batches):
            if counts[b] < 2:  # a one-sample batch has no spread
                continue
            bacc = MomentAccumulator.from_state(int(counts[b]), s1[gi, b], s2[gi, b])
            bsdl = bacc.std()
            batch_dist[b] = [
                distance_to_haar(SDLSignature(t, bsdl[r]), ref) for r, t in enumerate(depths)
            ]
        series.append(GammaSeries(gamma, dist, sdl, batch_dist))

    result = ConvergenceResult(
        config=cfg,
        config_hash=cfg_hash,
        depths=depths,
        haar=ref,
        series=series,
        started_at=started_at,
        wall_seconds=time.perf_counter() - t0,
        workers_used=workers,
    )
    if cfg.output_path:
        write_convergence_outputs(result, Path(cfg.output_path))
    return result


# --- geometry --------------------------------------------------------------


@dataclass
class ProfileRecord:
    """One gamma's expansion profile plus its pole values."""

    profile: ExpansionProfile
    lambda_north: float
    lambda_south: float | None

    def to_json_doc(self) -> dict:
        doc = self.profile.to_json_doc()
        doc["lambda_north"] = self.lambda_north
        doc["lambda_south"] = self.lambda_south
        return doc


@dataclass
class GeometryResult:
    profiles: list[ProfileRecord]
    sweep: list[tuple[float, float | None]]

    def sweep_csv(self) -> str:
        """Rows `gamma,theta_c`; the boundary column is empty where none exists."""
        lines = ["gamma,theta_c"]
        for g, tc in self.sweep:
            lines.append(f"{format_float(g)},{'' if tc is None else format_float(tc)}")
        return "\n".join(lines) + "\n"


def run_geometry(
    gammas,
    resolution: int,
    sweep_gammas=DEFAULT_SWEEP_GAMMAS,
    include_sweep: bool = True,
) -> GeometryResult:
    """Expansion profiles for each gamma plus a boundary-angle sweep table."""
    profiles = []
    for g in gammas:
        prof = expansion_profile(g, resolution)
        try:
            south = lambda_south(g)
        except UndefinedPointError:
            south = None
        profiles.append(ProfileRecord(prof, lambda_north(g), south))
    sweep = []
    if include_sweep:
        sweep = [(float(g), theta_c(g)) for g in sweep_gammas]
    return GeometryResult(profiles, sweep)


# --- file output -------------------------------------------------------------


def dump_json(doc: dict) -> str:
    """Canonical JSON rendering used for every document this package writes."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_geometry_outputs(result: GeometryResult, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for rec in result.profiles:
        tag = format_float(rec.profile.gamma)
        csv_path = out_dir / f"lambda_profile_g{tag}.csv"
        csv_path.write_text(rec.profile.to_csv())
        written.append(csv_path)
        json_path = out_dir / f"lambda_profile_g{tag}.json"
        json_path.write_text(dump_json(rec.to_json_doc()))
        written.append(json_path)
    if result.sweep:
        sweep_path = out_dir / "theta_c_sweep.csv"
        sweep_path.write_text(result.sweep_csv())
        written.append(sweep_path)
    return written


def write_convergence_outputs(result: ConvergenceResult, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "distance.csv"
    csv_path.write_text(result.distance_csv())
    json_path = out_dir / "convergence.json"
    json_path.write_text(dump_json(result.sdl_json_doc()))
    return [csv_path, json_path]


def write_haar_reference(ref: HaarReference, out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "haar_reference.json"
    path.write_text(dump_json(ref.to_json_doc()))
    return path

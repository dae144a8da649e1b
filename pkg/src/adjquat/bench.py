"""Synthetic experiment harness for the matching and pose solvers.

Each trial draws its own generator from ``SeedSequence(seed, spawn_key=(trial,))``
feeding a PCG64 bit generator, so serial and threaded runs give identical
numbers.  Within a trial the draw order is: rotation, reference cloud, noise.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import AdjquatError, DimensionError, ParseError
from .linalg import det
from .match import match2d, match3d, match_loss
from .pose import (
    CameraAtOrigin,
    CloudAtOrigin,
    ortho_pose_loss,
    perspective_loss,
    perspective_project,
    pose2d,
    pose3d_ortho,
    pose3d_perspective,
    rotation_error,
)
from .rotations import rot2_from_quat2, rot3_from_quat

TASKS = ("match2d", "match3d", "pose2d", "pose3d-ortho", "pose3d-persp")
CSV_FIELDS = ("trial", "loss_raw", "loss_bi", "loss_gen", "rot_err_bi", "focal_est")
STAT_FIELDS = CSV_FIELDS[1:]
GRAM_REL = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    points: int = 50
    trials: int = 100
    sigma: float = 0.1
    focal: float | None = None
    fbar: float | None = None
    camera: str = "origin"
    seed: int = 0
    out: str | None = None
    precenter: bool = False
    spread: float = 1.0
    refine: int = 0

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}; choose from {', '.join(TASKS)}")
        min_k = {"match2d": 2, "pose2d": 2, "match3d": 3}.get(self.task, 4)
        if self.points < min_k:
            raise ValueError(f"{self.task} needs at least {min_k} points")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if not self.spread > 0:
            raise ValueError("spread must be > 0")
        if self.refine < 0:
            raise ValueError("refine must be >= 0")
        if self.camera not in ("origin", "cloud"):
            raise ValueError("camera must be 'origin' or 'cloud'")
        if self.focal is not None and self.fbar is not None:
            raise ValueError("give either focal or fbar, not both")
        if self.task == "pose3d-persp":
            if self.focal is None and self.fbar is None:
                raise ValueError("pose3d-persp needs --focal or --fbar")
            if self.focal is not None and not self.focal > 0:
                raise ValueError("focal must be > 0")
            if self.fbar is not None and not self.fbar >= 0:
                raise ValueError("fbar must be >= 0")
            if self.camera == "origin" and self.focal is None and not self.fbar > 0:
                raise ValueError("camera at origin needs a finite focal length")

    def camera_model(self):
        if self.camera == "origin":
            f = self.focal if self.focal is not None else 1.0 / self.fbar
            return CameraAtOrigin(f=f, depth=f)
        fbar = self.fbar if self.fbar is not None else 1.0 / self.focal
        return CloudAtOrigin(fbar=fbar)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    loss_raw: float | None = None
    loss_bi: float | None = None
    loss_gen: float | None = None
    rot_err_bi: float | None = None
    focal_est: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def random_unit_quaternion(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation: four standard normals, normalized."""
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)


def random_unit_quat2(rng: np.random.Generator) -> np.ndarray:
    p = rng.standard_normal(2)
    return p / np.linalg.norm(p)


def gen_cloud(k: int, rng: np.random.Generator, spread: float = 1.0, dim: int = 3) -> np.ndarray:
    """dim x k points uniform in the cube [-spread, spread]^dim.

    Redrawn while the Gram determinant is tiny relative to its scale, so the
    cloud is never (numerically) flat.
    """
    while True:
        x = rng.uniform(-spread, spread, size=(dim, k))
        g = x @ x.T
        scale = (np.trace(g) / dim) ** dim
        if k >= dim and det(g) > GRAM_REL * scale:
            return x


def apply_noise(points, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. N(0, sigma^2) to every coordinate."""
    points = np.asarray(points, dtype=float)
    return points + sigma * rng.standard_normal(points.shape)


def _center(a):
    return a - a.mean(axis=1, keepdims=True)


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    rng = trial_rng(cfg.seed, trial)
    task = cfg.task
    dim = 2 if task in ("match2d", "pose2d") else 3
    if dim == 2:
        p_gen = random_unit_quat2(rng)
        r_gen = rot2_from_quat2(p_gen)
        q_gen = np.array([p_gen[0], 0.0, 0.0, p_gen[1]])
    else:
        q_gen = random_unit_quaternion(rng)
        r_gen = rot3_from_quat(q_gen)
    x = gen_cloud(cfg.points, rng, cfg.spread, dim)

    if task == "match2d" or task == "match3d":
        u = r_gen @ x
    elif task == "pose2d":
        u = (r_gen[0] @ x)[None, :]
    elif task == "pose3d-ortho":
        u = r_gen[:2] @ x
    else:
        cam = cfg.camera_model()
        try:
            u = perspective_project(r_gen, cam, x)
        except AdjquatError as exc:
            return TrialRecord(trial, error=f"{type(exc).__name__}: {exc}")
    u = apply_noise(u, cfg.sigma, rng)
    if cfg.precenter:
        x, u = _center(x), _center(u)

    try:
        if task == "match2d":
            res = match2d(x, u)
            q = np.array([res.q_opt[0], 0.0, 0.0, res.q_opt[1]])
            return TrialRecord(trial, None, res.loss, match_loss(r_gen, x, u),
                               rotation_error(q, q_gen))
        if task == "match3d":
            res = match3d(x, u)
            return TrialRecord(trial, None, res.loss, match_loss(r_gen, x, u),
                               rotation_error(res.q_opt, q_gen))
        if task == "pose2d":
            res = pose2d(x, u[0])
            raw = float(np.sum((res.p_tilde @ x - u[0]) ** 2))
            gen = float(np.sum((r_gen[0] @ x - u[0]) ** 2))
            theta = np.arctan2(res.r[1, 0], res.r[0, 0])
            q = np.array([np.cos(theta / 2), 0.0, 0.0, np.sin(theta / 2)])
            return TrialRecord(trial, raw, res.loss, gen, rotation_error(q, q_gen))
        if task == "pose3d-ortho":
            sol = pose3d_ortho(x, u)
            return TrialRecord(trial, sol.loss_raw, sol.loss_bi, ortho_pose_loss(r_gen, x, u),
                               rotation_error(sol.q_opt, q_gen))
        cam = cfg.camera_model()
        start = CameraAtOrigin(f=cam.f, depth=cam.distance) if isinstance(cam, CameraAtOrigin) else CloudAtOrigin(0.0)
        sol = pose3d_perspective(x, u, start, refine=cfg.refine)
        return TrialRecord(trial, sol.loss_raw, sol.loss_bi, perspective_loss(r_gen, cam, x, u),
                           rotation_error(sol.q_opt, q_gen), sol.focal)
    except AdjquatError as exc:
        return TrialRecord(trial, error=f"{type(exc).__name__}: {exc}")


def bench_threads() -> int:
    env = os.environ.get("BENCH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _stat(values, fn):
    vals = [v for v in values if v is not None and np.isfinite(v)]
    return float(fn(vals)) if vals else None


def run_experiment(cfg: ExperimentConfig, threads: int | None = None):
    """Run all trials; returns (records, summary dict)."""
    cfg.validate()
    threads = bench_threads() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda t: run_trial(cfg, t), range(cfg.trials)))
    else:
        records = [run_trial(cfg, t) for t in range(cfg.trials)]
    ok = [r for r in records if r.ok]
    norm = cfg.points * cfg.spread ** 2
    summary = {
        "task": cfg.task,
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
        "n_success": len(ok),
        "n_failed": len(records) - len(ok),
        "mean": {f: _stat([getattr(r, f) for r in ok], np.mean) for f in STAT_FIELDS},
        "median": {f: _stat([getattr(r, f) for r in ok], np.median) for f in STAT_FIELDS},
        "normalized_mean": {
            f: _stat([getattr(r, f) / norm for r in ok if getattr(r, f) is not None], np.mean)
            for f in ("loss_raw", "loss_bi", "loss_gen")
        },
        "sorted_loss_bi": sorted(r.loss_bi for r in ok),
        "failures": {str(r.trial): r.error for r in records if not r.ok},
    }
    return records, summary


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([r.trial] + [_fmt(getattr(r, f)) for f in STAT_FIELDS])
    return buf.getvalue()


def summary_json(summary) -> str:
    return json.dumps(summary, indent=2) + "\n"


def json_path(out) -> Path:
    return Path(out).with_suffix(".json")


def write_outputs(records, summary, out) -> tuple[Path, Path]:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(records_csv(records))
    jp = json_path(out)
    jp.write_text(summary_json(summary))
    return out, jp


_HEADERS = {("x", "y"): 2, ("x", "y", "z"): 3, ("u",): 1, ("u", "v"): 2}


def load_cloud_csv(path) -> np.ndarray:
    """Read a D x K cloud from CSV with header x,y[,z] or u[,v]."""
    with open(path, newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh))]
    rows = [(n, [c.strip() for c in row]) for n, row in rows if any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty file", line=1)
    line, header = rows[0]
    key = tuple(h.lower() for h in header)
    if key not in _HEADERS:
        raise DimensionError(f"unsupported header {','.join(header)!r}; expected x,y[,z] or u[,v]")
    dim = _HEADERS[key]
    pts = []
    for line, row in rows[1:]:
        if len(row) != dim:
            raise ParseError(f"expected {dim} fields, found {len(row)}", line=line)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", line=line) from None
        if not all(np.isfinite(vals)):
            raise ParseError("non-finite value", line=line)
        pts.append(vals)
    if not pts:
        raise ParseError("no data rows", line=line)
    return np.array(pts).T

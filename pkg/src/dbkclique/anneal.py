"""Time-to-solution cost model and the emulated annealer leaf backend."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .graph import Graph, density

# density bucket, success proportion p, t_run [s], TTS [s]
DWAVE_2X_TABLE = (
    (0.1, 0.007, 1.938, 0.127),
    (0.2, 0.003, 2.057, 0.296),
    (0.3, 0.008, 2.317, 0.141),
    (0.4, 0.015, 3.382, 0.105),
    (0.5, 0.020, 6.736, 0.152),
    (0.6, 0.003, 6.981, 0.948),
    (0.7, 0.003, 4.975, 0.746),
    (0.8, 0.007, 4.333, 0.273),
    (0.9, 0.012, 3.429, 0.137),
)


@dataclass(frozen=True)
class TtsRow:
    density: float
    p: float
    t_run: float
    tts: float


@dataclass(frozen=True)
class TtsModel:
    rows: tuple[TtsRow, ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("TTS model needs at least one row")
        dens = [r.density for r in self.rows]
        if any(b <= a for a, b in zip(dens, dens[1:])):
            raise ValueError("density buckets must be strictly increasing")
        for r in self.rows:
            if min(r.p, r.t_run, r.tts) <= 0 or r.density <= 0:
                raise ValueError(f"non-positive entry in TTS row {r}")

    @classmethod
    def default(cls) -> "TtsModel":
        return cls(tuple(TtsRow(*row) for row in DWAVE_2X_TABLE))

    @classmethod
    def from_csv(cls, path) -> "TtsModel":
        """Columns: density,p,t_run,tts (header required)."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"density", "p", "t_run", "tts"} - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"TTS table {path} lacks columns {sorted(missing)}")
            rows = [
                TtsRow(float(r["density"]), float(r["p"]), float(r["t_run"]), float(r["tts"])) for r in reader
            ]
        rows.sort(key=lambda r: r.density)
        return cls(tuple(rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["density", "p", "t_run", "tts"])
            for r in self.rows:
                writer.writerow([r.density, r.p, r.t_run, r.tts])


def tts(total_time: float, p: float) -> float:
    """Time to reach the optimum with 99 % confidence given per-run success p."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"success proportion must lie in (0, 1), got {p}")
    if total_time <= 0:
        raise ValueError("total time must be positive")
    return total_time * math.log(0.01) / math.log1p(-p)


def tts_lookup(model: TtsModel, dens: float) -> float:
    """TTS of the nearest density bucket; exact ties go to the lower bucket."""
    if not 0.0 <= dens <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {dens}")
    best = model.rows[0]
    best_d = abs(round(dens - best.density, 12))
    for row in model.rows[1:]:
        d = abs(round(dens - row.density, 12))
        if d < best_d:
            best, best_d = row, d
    return best.tts


class EmulatedAnnealer:
    """Exact leaf solver that charges the model TTS for the leaf's density."""

    exact = True
    name = "emulated-annealer"

    def __init__(self, model: TtsModel | None = None, max_size: int | None = None):
        self.model = model or TtsModel.default()
        self.max_size = max_size

    def __call__(self, graph: Graph, seed=None) -> tuple[np.ndarray, float]:
        return emulated_annealer_solve(graph, self.model, self.max_size)


def emulated_annealer_solve(graph: Graph, model: TtsModel | None = None, max_size: int | None = None):
    """(maximum clique as internal indices, charged seconds)."""
    if max_size is not None and graph.n > max_size:
        raise ValueError(f"leaf has {graph.n} vertices, annealer capacity is {max_size}")
    model = model or TtsModel.default()
    clique = kernels.max_clique(graph.adj)
    return clique, tts_lookup(model, density(graph))

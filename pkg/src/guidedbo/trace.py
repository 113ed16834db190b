"""Per-trial evaluation record shared by every optimization loop."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

STATUS_OK = "ok"
STATUS_FAILED = "failed"


def trace_header(dim: int) -> list[str]:
    return (
        ["iter", "algorithm", "trial", "seed"]
        + [f"x{i}" for i in range(dim)]
        + ["E_um", "I_au", "f", "run_min_E", "run_max_I", "run_min_f", "beta", "status"]
    )


class TrialTrace:
    """Ordered record of every evaluation in one trial.

    Running extrema are maintained on append; ``beta`` is None for rows
    that were not proposed by a UCB acquisition (initial samples, MOBO).
    """

    def __init__(self, algorithm: str, trial_id: int, seed: int, dim: int):
        self.algorithm = algorithm
        self.trial_id = trial_id
        self.seed = seed
        self.dim = dim
        self.status = STATUS_OK
        self.points: list[np.ndarray] = []
        self.E: list[float] = []
        self.I: list[float] = []
        self.f: list[float] = []
        self.run_min_E: list[float] = []
        self.run_max_I: list[float] = []
        self.run_min_f: list[float] = []
        self.beta: list[float | None] = []
        self.clamp_events = 0
        # populated by the multi-objective loop only
        self.front_history: list[list[tuple[float, float]]] | None = None

    def __len__(self) -> int:
        return len(self.E)

    def append(self, point: np.ndarray, e: float, i: float, f: float,
               beta: float | None = None) -> None:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point must have shape ({self.dim},)")
        self.points.append(point)
        self.E.append(float(e))
        self.I.append(float(i))
        self.f.append(float(f))
        n = len(self.E)
        self.run_min_E.append(float(e) if n == 1 else min(self.run_min_E[-1], float(e)))
        self.run_max_I.append(float(i) if n == 1 else max(self.run_max_I[-1], float(i)))
        self.run_min_f.append(float(f) if n == 1 else min(self.run_min_f[-1], float(f)))
        self.beta.append(None if beta is None else float(beta))

    def rows(self) -> list[list[str]]:
        out = []
        for j in range(len(self)):
            row = [str(j), self.algorithm, str(self.trial_id), str(self.seed)]
            row += [repr(float(v)) for v in self.points[j]]
            row += [
                repr(self.E[j]),
                repr(self.I[j]),
                repr(self.f[j]),
                repr(self.run_min_E[j]),
                repr(self.run_max_I[j]),
                repr(self.run_min_f[j]),
                "" if self.beta[j] is None else repr(self.beta[j]),
                self.status,
            ]
            out.append(row)
        return out

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(trace_header(self.dim))
            writer.writerows(self.rows())


def read_trace_csv(path: str | Path) -> dict[str, list]:
    """Columns of a trace CSV keyed by header name (strings unparsed)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list] = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(v)
    return cols

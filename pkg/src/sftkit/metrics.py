"""Relative RMSE metric and the report record used by the experiments."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np


def relative_rmse(approx, truth) -> float:
    """Relative root-mean-square error in percent.

    ``sqrt(sum |approx - truth|^2 / sum |truth|^2) * 100``. Both arrays must
    be sampled on the same grid; complex values are allowed.
    """
    approx = np.asarray(approx)
    truth = np.asarray(truth)
    if approx.shape != truth.shape:
        raise ValueError(f"grid mismatch: {approx.shape} vs {truth.shape}")
    denom = float(np.sum(np.abs(truth) ** 2))
    if denom == 0.0:
        raise ValueError("reference has zero norm")
    return 100.0 * float(np.sqrt(np.sum(np.abs(approx - truth) ** 2) / denom))


@dataclass
class RmseReport:
    abbreviation: str
    transform: str
    method: str
    P: int
    asft: bool
    interval: tuple[int, int]
    rmse_percent: float
    P_S: int | None = None
    xi: float | None = None
    K: int | None = None
    beta: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if not self.rmse_percent >= 0:
            raise ValueError("relative RMSE must be non-negative")

    def as_row(self) -> dict:
        return asdict(self)

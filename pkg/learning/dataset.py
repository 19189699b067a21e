from dataclasses import dataclass
from typing import Sequence

import numpy as np

from kernels import as_points
from utils.errors import InputDomainError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labelled sample D = ((x_1, y_1), ..., (x_n, y_n)), points row-major."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = as_points(self.xs).copy()
        ys = np.atleast_1d(np.array(self.ys, dtype=float))
        if ys.ndim != 1 or ys.shape[0] != xs.shape[0]:
            raise InputDomainError(f"{xs.shape[0]} points but {ys.size} labels")
        if not np.all(np.isfinite(ys)):
            raise InputDomainError("labels must be finite")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.ys.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.xs.shape[1])

    def __len__(self) -> int:
        return self.n

    def radius(self) -> float:
        """Radius of the smallest origin-centred ball containing every x_i."""
        return float(np.max(np.linalg.norm(self.xs, axis=1)))

    def label_bound(self) -> float:
        return float(np.max(np.abs(self.ys)))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        if indices.size == 0:
            raise InputDomainError("subset would be empty")
        return Dataset(self.xs[indices], self.ys[indices])

"""Preference datasets and their text serialization.

A dataset is a struct-of-arrays over records (x, a1_idx, a2_idx, y) with
y = 1 encoding "first action preferred". Serialization is one record per
line: the k context coordinates at 17 significant digits, the two action
indices, and the label, comma separated under a header row.
"""

from dataclasses import dataclass

import numpy as np


def _fmt(v: float) -> str:
    return format(v, ".17g")


@dataclass
class PreferenceDataset:
    """Growable record store backed by preallocated arrays."""

    X: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    y: np.ndarray
    n: int = 0

    @classmethod
    def empty(cls, k: int, capacity: int = 64) -> "PreferenceDataset":
        capacity = max(int(capacity), 1)
        return cls(
            X=np.empty((capacity, k)),
            a1=np.empty(capacity, dtype=np.int64),
            a2=np.empty(capacity, dtype=np.int64),
            y=np.empty(capacity, dtype=np.int64),
        )

    @classmethod
    def from_arrays(cls, X, a1, a2, y) -> "PreferenceDataset":
        X = np.ascontiguousarray(X, dtype=np.float64)
        a1 = np.ascontiguousarray(a1, dtype=np.int64)
        a2 = np.ascontiguousarray(a2, dtype=np.int64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        if not (len(X) == len(a1) == len(a2) == len(y)):
            raise ValueError("field lengths differ")
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be 0 or 1")
        return cls(X=X, a1=a1, a2=a2, y=y, n=len(X))

    def __len__(self) -> int:
        return self.n

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def _grow(self):
        cap = max(2 * self.X.shape[0], 8)
        for name in ("X", "a1", "a2", "y"):
            old = getattr(self, name)
            shape = (cap,) + old.shape[1:]
            new = np.empty(shape, dtype=old.dtype)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)

    def append(self, x, a1_idx: int, a2_idx: int, label: int):
        if label not in (0, 1):
            raise ValueError("labels must be 0 or 1")
        if self.n == self.X.shape[0]:
            self._grow()
        self.X[self.n] = x
        self.a1[self.n] = a1_idx
        self.a2[self.n] = a2_idx
        self.y[self.n] = label
        self.n += 1

    def views(self):
        """Read-only views of the filled prefix, as (X, a1, a2, y)."""
        return (
            self.X[: self.n],
            self.a1[: self.n],
            self.a2[: self.n],
            self.y[: self.n],
        )

    def save_csv(self, path):
        X, a1, a2, y = self.views()
        header = ",".join([f"x{i}" for i in range(self.k)] + ["a1_idx", "a2_idx", "y"])
        lines = [header]
        for i in range(self.n):
            coords = ",".join(_fmt(v) for v in X[i])
            lines.append(f"{coords},{a1[i]},{a2[i]},{y[i]}")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load_csv(cls, path) -> "PreferenceDataset":
        with open(path, "r", encoding="ascii") as fh:
            header = fh.readline().strip().split(",")
            if len(header) < 4 or header[-3:] != ["a1_idx", "a2_idx", "y"]:
                raise ValueError(f"unexpected dataset header: {header}")
            k = len(header) - 3
            rows = [line.strip().split(",") for line in fh if line.strip()]
        n = len(rows)
        ds = cls.empty(k, capacity=max(n, 1))
        for row in rows:
            if len(row) != k + 3:
                raise ValueError(f"row has {len(row)} fields, expected {k + 3}")
            x = np.array([float(v) for v in row[:k]])
            ds.append(x, int(row[k]), int(row[k + 1]), int(row[k + 2]))
        return ds

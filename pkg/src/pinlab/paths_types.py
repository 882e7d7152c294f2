"""The PathSample value type (kept free of heavy imports)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PathSample:
    """One contact set of a length-N system. contacts is ascending and ends at N."""

    N: int
    contacts: np.ndarray

    @classmethod
    def from_contacts(cls, contacts, N: int) -> "PathSample":
        c = np.asarray(contacts, dtype=np.int64)
        if c.size == 0 or c[-1] != N or np.any(np.diff(c) <= 0) or c[0] < 1:
            raise ValueError("contacts must be ascending in 1..N and end at N")
        return cls(int(N), c)

    @property
    def m(self) -> int:
        return int(self.contacts.size)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.contacts, prepend=0)

    @property
    def eta_sorted(self) -> np.ndarray:
        return np.sort(self.increments)[::-1]

    @property
    def eta1_frac(self) -> float:
        return float(self.eta_sorted[0]) / self.N

    @property
    def eta2_frac(self) -> float:
        e = self.eta_sorted
        return float(e[1]) / self.N if e.size > 1 else 0.0

    @property
    def contact_frac(self) -> float:
        return self.m / self.N

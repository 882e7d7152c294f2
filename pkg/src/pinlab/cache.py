"""Binary table cache.

Layout (little-endian): header struct '<8sIdQQQdB' holding
magic, version, alpha, n_max, N, disorder seed, beta, dist code, followed by
(N+1)^2 float64 values of the [n, m] table in row-major order.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"PINLABT\x00"
VERSION = 1
HEADER = struct.Struct("<8sIdQQQdB")
DIST_CODES = {None: 0, "gaussian": 1, "rademacher": 2}
DIST_NAMES = {v: k for k, v in DIST_CODES.items()}


@dataclass(frozen=True)
class TableHeader:
    alpha: float
    n_max: int
    N: int
    seed: int
    beta: float
    dist: str | None


def save_table(path, header: TableHeader, table: np.ndarray) -> None:
    path = Path(path)
    n = header.N + 1
    if table.shape != (n, n):
        raise ValueError("table shape does not match header N")
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, header.alpha, header.n_max, header.N,
                             header.seed, header.beta, DIST_CODES[header.dist]))
        np.ascontiguousarray(table, dtype="<f8").tofile(fh)
    os.replace(tmp, path)


def load_table(path) -> tuple[TableHeader, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read(HEADER.size)
        if len(raw) != HEADER.size:
            raise ValueError(f"{path}: not a pinlab table")
        magic, version, alpha, n_max, N, seed, beta, dist = HEADER.unpack(raw)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a pinlab table")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported table version {version}")
        values = np.fromfile(fh, dtype="<f8")
    if values.size != (N + 1) ** 2:
        raise ValueError(f"{path}: truncated table")
    return TableHeader(alpha, n_max, N, seed, beta, DIST_NAMES[dist]), values.reshape(N + 1, N + 1)


def content_key(**fields) -> str:
    blob = json.dumps(fields, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


class TableCache:
    """Directory of tables keyed by a hash of everything that determines them."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, header: TableHeader) -> Path:
        key = content_key(alpha=header.alpha, n_max=header.n_max, N=header.N,
                          seed=header.seed, beta=header.beta, dist=header.dist)
        return self.directory / f"table-{key}.bin"

    def get(self, header: TableHeader):
        p = self.path(header)
        if not p.exists():
            return None
        got, table = load_table(p)
        return table if got == header else None

    def put(self, header: TableHeader, table: np.ndarray) -> None:
        save_table(self.path(header), header, table)

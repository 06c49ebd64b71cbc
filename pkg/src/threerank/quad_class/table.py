"""Bulk class group data for many discriminants, with an optional CSV cache.

The compiled kernels do the work; this layer keeps a write-once map from
discriminant to ``ClassGroupInfo`` and persists new rows append-only.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from pathlib import Path
from typing import Iterable

import numpy as np

from ..core_arith import field_discriminants, is_fundamental, smallest_prime_factors
from . import _kernels
from .group import ClassGroupInfo

log = logging.getLogger(__name__)

CACHE_COLUMNS = ["disc", "h_narrow", "h", "invariant_factors"]


def _parse_row(row: dict) -> ClassGroupInfo:
    D = int(row["disc"])
    h_narrow = int(row["h_narrow"])
    h = int(row["h"])
    text = (row.get("invariant_factors") or "").strip()
    factors = tuple(int(x) for x in text.split(";")) if text else ()
    if not is_fundamental(D):
        raise ValueError(f"disc {D} is not fundamental")
    if math.prod(factors) != h_narrow or h_narrow < 1:
        raise ValueError("invariant factors do not multiply to h_narrow")
    if any(b % a for a, b in zip(factors, factors[1:])) or any(f < 2 for f in factors):
        raise ValueError("invariant factors are not a divisor chain")
    if D < 0:
        if h != h_narrow:
            raise ValueError("h != h_narrow for an imaginary field")
        return ClassGroupInfo(D, h_narrow, h, factors)
    if h == h_narrow:
        return ClassGroupInfo(D, h_narrow, h, factors, True)
    if 2 * h == h_narrow:
        return ClassGroupInfo(D, h_narrow, h, factors, False)
    raise ValueError("h_narrow / h not in {1, 2}")


def read_cache(path: str | os.PathLike) -> dict[int, ClassGroupInfo]:
    """Load a cache file; malformed rows are skipped with a warning."""
    out: dict[int, ClassGroupInfo] = {}
    path = Path(path)
    if not path.exists():
        return out
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != CACHE_COLUMNS:
            log.warning("cache %s has unexpected header %s; ignoring it", path, reader.fieldnames)
            return out
        for lineno, row in enumerate(reader, start=2):
            try:
                info = _parse_row(row)
            except (TypeError, ValueError) as exc:
                log.warning("skipping corrupt cache row %s:%d (%s)", path, lineno, exc)
                continue
            out.setdefault(info.disc, info)
    return out


def append_cache(path: str | os.PathLike, infos: Iterable[ClassGroupInfo]) -> None:
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CACHE_COLUMNS, lineterminator="\n")
        if fresh:
            writer.writeheader()
        for info in infos:
            writer.writerow(info.to_row())
        fh.flush()
        os.fsync(fh.fileno())


def _info_from_row(D: int, row: np.ndarray) -> ClassGroupInfo:
    nf = int(row[3])
    factors = tuple(int(x) for x in row[4 : 4 + nf])
    unit = None if D < 0 else bool(row[2] == -1)
    return ClassGroupInfo(D, int(row[0]), int(row[1]), factors, unit)


class ClassGroupTable:
    """Write-once map from fundamental discriminant to its class group data.

    Parameters
    ----------
    cache_path : path, optional
        CSV file (``disc,h_narrow,h,invariant_factors``) read at start-up and
        appended to after each batch of new discriminants.
    workers : int, optional
        Threads for the compiled kernels; defaults to ``THREERANK_WORKERS``
        or numba's own default.
    """

    def __init__(self, cache_path: str | os.PathLike | None = None, workers: int | None = None):
        self.cache_path = Path(cache_path) if cache_path else None
        self._infos: dict[int, ClassGroupInfo] = {}
        if self.cache_path is not None:
            self._infos.update(read_cache(self.cache_path))
        self._spf = np.zeros(0, dtype=np.int64)
        self._neg_counts = np.zeros(0, dtype=np.int64)
        if workers is None and os.environ.get("THREERANK_WORKERS"):
            workers = int(os.environ["THREERANK_WORKERS"])
        if workers:
            import numba

            numba.set_num_threads(max(1, min(workers, numba.config.NUMBA_NUM_THREADS)))

    def __len__(self):
        return len(self._infos)

    def __contains__(self, D) -> bool:
        return int(D) in self._infos

    def _spf_upto(self, n: int) -> np.ndarray:
        if self._spf.shape[0] <= n:
            self._spf = smallest_prime_factors(max(n, 2 * self._spf.shape[0], 1024))
        return self._spf

    def ensure(self, discs: Iterable[int]) -> None:
        """Compute (or load) class group data for every fundamental D in ``discs``."""
        wanted = np.unique(np.asarray(list(discs) if not isinstance(discs, np.ndarray) else discs, dtype=np.int64))
        wanted = wanted[wanted != 1]
        missing = np.array([d for d in wanted.tolist() if d not in self._infos], dtype=np.int64)
        if missing.size == 0:
            return
        for d in missing.tolist():
            if not is_fundamental(d):
                raise ValueError(f"{d} is not a fundamental discriminant")
        spf = self._spf_upto(int(np.abs(missing).max()) // 2 + 2)
        rows = _kernels.class_group_rows(missing, spf)
        new = [_info_from_row(int(D), row) for D, row in zip(missing, rows)]
        for info in new:
            self._infos[info.disc] = info
        if self.cache_path is not None:
            append_cache(self.cache_path, new)

    def info(self, D: int) -> ClassGroupInfo:
        D = int(D)
        if D not in self._infos:
            self.ensure([D])
        return self._infos[D]

    def infos(self) -> list[ClassGroupInfo]:
        return [self._infos[d] for d in sorted(self._infos)]

    def class_numbers(self, discs) -> np.ndarray:
        """h for each entry of ``discs`` (1 for the sentinel D = 1)."""
        discs = np.asarray(discs, dtype=np.int64)
        out = np.ones(discs.shape, dtype=np.int64)
        neg = discs < 0
        if np.any(neg):
            # counting reduced forms is enough for h when D < 0
            top = int(-discs[neg].min())
            if self._neg_counts.shape[0] <= top:
                self._neg_counts = _kernels.count_definite_forms(max(top, 2 * self._neg_counts.shape[0]))
            out[neg] = self._neg_counts[-discs[neg]]
        pos = discs > 1
        if np.any(pos):
            self.ensure(discs[pos])
            lookup = {d: self._infos[d].h for d in np.unique(discs[pos]).tolist()}
            out[pos] = [lookup[d] for d in discs[pos].tolist()]
        return out

    def p_ranks(self, discs, p: int = 3) -> np.ndarray:
        discs = np.asarray(discs, dtype=np.int64)
        out = np.zeros(discs.shape, dtype=np.int64)
        real = discs != 1
        if not np.any(real):
            return out
        self.ensure(discs[real])
        uniq = np.unique(discs[real]).tolist()
        lookup = {d: self._infos[d].p_rank(p) for d in uniq}
        out[real] = [lookup[d] for d in discs[real].tolist()]
        return out

    def class_numbers_of(self, ns) -> np.ndarray:
        """h of Q(sqrt(n)) for each integer n."""
        return self.class_numbers(field_discriminants(ns))

    def p_ranks_of(self, ns, p: int = 3) -> np.ndarray:
        return self.p_ranks(field_discriminants(ns), p)


_default: ClassGroupTable | None = None


def default_table() -> ClassGroupTable:
    global _default
    if _default is None:
        _default = ClassGroupTable()
    return _default

"""Simulated external memory with exact block-transfer accounting.

Every bulk array lives in an ``ExtSequence``. Reads and writes are charged by
the number of distinct blocks they touch. A session owns one pair of counters
shared by all of its sequences.
"""
from __future__ import annotations

import contextlib
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from sortedcontainers import SortedList

STORE_ENV = "IOCUT_STORE_DIR"


class ConfigError(ValueError):
    pass


class MemoryBudgetError(AssertionError):
    """An in-memory buffer was requested that exceeds M records."""


@dataclass(frozen=True)
class IoConfig:
    memory_words: int  # M, measured in records
    block_words: int  # B, measured in records

    def __post_init__(self) -> None:
        if self.block_words < 2:
            raise ConfigError(f"B must be >= 2, got {self.block_words}")
        if self.memory_words < 4 * self.block_words:
            raise ConfigError(
                f"M must be >= 4B, got M={self.memory_words} B={self.block_words}"
            )

    @property
    def M(self) -> int:
        return self.memory_words

    @property
    def B(self) -> int:
        return self.block_words

    @property
    def fan_in(self) -> int:
        return self.M // self.B - 1

    def blocks(self, n: int) -> int:
        return -(-n // self.B)

    def sort_bound(self, n: int) -> float:
        """(n/B)(1 + log_{M/B}(n/B)), the normaliser used by benchmarks."""
        nb = max(n / self.B, 1.0)
        return nb * (1.0 + math.log(nb) / math.log(self.M / self.B))


@dataclass
class IoStats:
    block_reads: int = 0
    block_writes: int = 0

    @property
    def total(self) -> int:
        return self.block_reads + self.block_writes

    def copy(self) -> "IoStats":
        return IoStats(self.block_reads, self.block_writes)

    def __sub__(self, other: "IoStats") -> "IoStats":
        return IoStats(self.block_reads - other.block_reads,
                       self.block_writes - other.block_writes)


@dataclass
class Measurement:
    """Filled in when a ``Session.measure()`` block exits."""
    stats: IoStats = field(default_factory=IoStats)

    @property
    def total(self) -> int:
        return self.stats.total


class Session:
    def __init__(self, config: IoConfig, store_dir: str | os.PathLike | None = None):
        self.config = config
        self.stats = IoStats()
        self._next_seq = 0
        if store_dir is None:
            store_dir = os.environ.get(STORE_ENV) or None
        self.store_dir = Path(store_dir) if store_dir else None
        if self.store_dir is not None:
            self.store_dir.mkdir(parents=True, exist_ok=True)

    @property
    def M(self) -> int:
        return self.config.M

    @property
    def B(self) -> int:
        return self.config.B

    # accounting primitives
    def charge_reads(self, blocks: int) -> None:
        assert blocks >= 0
        self.stats.block_reads += int(blocks)

    def charge_writes(self, blocks: int) -> None:
        assert blocks >= 0
        self.stats.block_writes += int(blocks)

    def require_memory(self, records: int) -> None:
        if records > self.M:
            raise MemoryBudgetError(f"buffer of {records} records exceeds M={self.M}")

    @contextlib.contextmanager
    def measure(self) -> Iterator[Measurement]:
        m = Measurement()
        before = self.stats.copy()
        try:
            yield m
        finally:
            m.stats = self.stats - before

    # sequences
    def _name(self, name: str | None) -> str:
        self._next_seq += 1
        return f"{self._next_seq:06d}" + (f"-{name}" if name else "")

    def place(self, data: np.ndarray, name: str | None = None) -> "ExtSequence":
        """Put an input array on disk without charge (it is already there)."""
        return ExtSequence(self, _as_records(data), self._name(name))

    def empty(self, width: int, name: str | None = None, dtype=np.int64) -> "ExtSequence":
        return ExtSequence(self, np.empty((0, width), dtype=dtype), self._name(name))

    def store(self, data: np.ndarray, name: str | None = None) -> "ExtSequence":
        """Write a freshly produced array as a new sequence, charging ceil(n/B)."""
        data = _as_records(data)
        self.charge_writes(self.config.blocks(len(data)))
        return ExtSequence(self, data, self._name(name))

    def writer(self, width: int, name: str | None = None, dtype=np.int64) -> "SequenceWriter":
        return SequenceWriter(self, width, self._name(name), dtype)


def _as_records(data: np.ndarray) -> np.ndarray:
    a = np.asarray(data)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.dtype.kind not in "iu":
        raise TypeError("records must be integer words")
    return a


def blocks_touched(start: int, count: int, B: int) -> int:
    if count <= 0:
        return 0
    return (start + count - 1) // B - start // B + 1


class ExtSequence:
    """Fixed-width integer records on the simulated disk."""

    def __init__(self, session: Session, data: np.ndarray, name: str):
        self.session = session
        self._data = data
        self.name = name
        self._flush()

    def __len__(self) -> int:
        return len(self._data)

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def dtype(self):
        return self._data.dtype

    def _check(self, start: int, count: int) -> None:
        if start < 0 or count < 0 or start + count > len(self._data):
            raise IndexError(f"range [{start}, {start + count}) outside 0..{len(self._data)}")

    def read(self, start: int, count: int) -> np.ndarray:
        """Load records into a memory buffer (must fit in M)."""
        self._check(start, count)
        self.session.require_memory(count)
        self.session.charge_reads(blocks_touched(start, count, self.session.B))
        return self._data[start:start + count].copy()

    def transfer(self, start: int, count: int) -> np.ndarray:
        """Stream a range straight through (e.g. to an output); not bounded by M."""
        self._check(start, count)
        self.session.charge_reads(blocks_touched(start, count, self.session.B))
        return self._data[start:start + count]

    def write(self, start: int, records: np.ndarray) -> None:
        records = _as_records(records)
        n = len(records)
        if start < 0 or start > len(self._data):
            raise IndexError("write must start inside the sequence or at its end")
        if n == 0:
            return
        self.session.require_memory(n)
        self.session.charge_writes(blocks_touched(start, n, self.session.B))
        end = start + n
        if end > len(self._data):
            grown = np.empty((end, self.width), dtype=self._data.dtype)
            grown[:len(self._data)] = self._data
            self._data = grown
        self._data[start:end] = records
        self._flush()

    def append(self, records: np.ndarray) -> None:
        self.write(len(self._data), records)

    def scan(self, chunk: int | None = None) -> Iterator[np.ndarray]:
        """Sequential block-aligned scan in memory-sized chunks."""
        B = self.session.B
        if chunk is None:
            chunk = (self.session.M // B) * B
        chunk = max(B, (chunk // B) * B)
        for s in range(0, len(self._data), chunk):
            yield self.read(s, min(chunk, len(self._data) - s))

    def scan_all(self) -> np.ndarray:
        """Same charge as a full ``scan()``; returns the records in one array.

        Used where an algorithm streams the sequence and only needs O(M)
        state at a time but vectorised code wants the whole column.
        """
        self.session.charge_reads(self.session.config.blocks(len(self._data)))
        return self._data

    def peek(self) -> np.ndarray:
        """Uncharged view for oracles, tests and dumps."""
        return self._data

    def _flush(self) -> None:
        d = self.session.store_dir
        if d is not None:
            self._data.astype("<i8").tofile(d / f"{self.name}.bin")


class SequenceWriter:
    """Buffered appender: n appended records cost ceil(n/B) writes in total."""

    def __init__(self, session: Session, width: int, name: str, dtype=np.int64):
        self.session = session
        self.width = width
        self.name = name
        self.dtype = dtype
        self._parts: list[np.ndarray] = []
        self._pending = 0
        self.count = 0

    def extend(self, records: np.ndarray) -> None:
        records = _as_records(records)
        if records.shape[1] != self.width:
            raise ValueError("record width mismatch")
        if len(records) == 0:
            return
        self._parts.append(records.astype(self.dtype, copy=False))
        self.count += len(records)
        self._pending += len(records)
        full = self._pending // self.session.B
        self.session.charge_writes(full)
        self._pending -= full * self.session.B

    def close(self) -> ExtSequence:
        if self._pending:
            self.session.charge_writes(1)
            self._pending = 0
        if self._parts:
            data = np.concatenate(self._parts)
        else:
            data = np.empty((0, self.width), dtype=self.dtype)
        self._parts = []
        return ExtSequence(self.session, data, self.name)


def btree_height(size: int, B: int) -> int:
    return max(1, math.ceil(math.log(size + 1, B)))


class ExternalOrderedMap:
    """Ordered map with a B-tree cost model: each op charges the tree height.

    Keys are tuples. Lookups charge ``height`` reads; updates additionally
    charge one write.
    """

    def __init__(self, session: Session | None, charged: bool = True):
        self.session = session
        self.charged = charged
        self.keys = SortedList()
        self.ops = 0

    def __len__(self) -> int:
        return len(self.keys)

    def _r(self) -> None:
        if self.charged:
            self.session.charge_reads(btree_height(len(self.keys), self.session.B))

    def _w(self) -> None:
        if self.charged:
            self.session.charge_writes(1)

    def insert(self, key: tuple) -> None:
        self.ops += 1
        self._r()
        self._w()
        self.keys.add(key)

    def delete(self, key: tuple) -> None:
        self.ops += 1
        self._r()
        self._w()
        self.keys.remove(key)

    def successor(self, key: tuple) -> tuple | None:
        """Smallest stored key >= key."""
        self.ops += 1
        self._r()
        i = self.keys.bisect_left(key)
        return self.keys[i] if i < len(self.keys) else None

    def pop_max(self) -> tuple:
        self.ops += 1
        self._r()
        self._w()
        return self.keys.pop()

    def peek_max(self) -> tuple | None:
        return self.keys[-1] if self.keys else None


def open_session(config: IoConfig, store_dir: str | None = None) -> Session:
    return Session(config, store_dir)

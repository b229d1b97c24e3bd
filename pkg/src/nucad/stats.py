"""Run statistics and the instrumentation hooks shared by the solver stack."""
from __future__ import annotations

import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class SolveStats:
    """Counters and timers reported for every run.

    `real_root_time` accumulates wall time spent isolating and refining real
    roots (including the exact sign fallbacks); `non_algebraic_time` is the
    remainder of `total_time`.
    """

    atoms: int = 0
    cells: int = 0
    symbolic_intervals: int = 0
    sections: int = 0
    steps: int = 0
    omitted_empty: int = 0
    real_root_time: float = 0.0
    total_time: float = 0.0
    aborted: bool = False

    @property
    def non_algebraic_time(self) -> float:
        return max(self.total_time - self.real_root_time, 0.0)

    def merge_counters(self, other: "SolveStats") -> None:
        self.atoms += other.atoms
        self.cells += other.cells
        self.symbolic_intervals += other.symbolic_intervals
        self.sections += other.sections
        self.steps += other.steps
        self.omitted_empty += other.omitted_empty
        self.real_root_time += other.real_root_time
        self.aborted = self.aborted or other.aborted

    def as_dict(self) -> dict:
        return {
            "atoms": self.atoms,
            "cells": self.cells,
            "symbolic_intervals": self.symbolic_intervals,
            "sections": self.sections,
            "real_root_time": round(self.real_root_time, 6),
            "non_algebraic_time": round(self.non_algebraic_time, 6),
            "total_time": round(self.total_time, 6),
            "aborted": self.aborted,
        }


class Workspace:
    """Per-run scratch state: root caches, sign caches, stats, and timers.

    All cached functions are pure, so the caches affect speed only; results
    are identical with or without them (and across threads).
    """

    def __init__(self, stats: SolveStats | None = None):
        self.stats = stats if stats is not None else SolveStats()
        self.root_cache: dict = {}
        self.sign_cache: dict = {}
        self.sqfree_cache: dict = {}
        self._local = threading.local()

    @contextmanager
    def timed_roots(self):
        depth = getattr(self._local, "depth", 0)
        if depth:
            self._local.depth = depth + 1
            yield
            self._local.depth -= 1
            return
        self._local.depth = 1
        start = time.perf_counter()
        try:
            yield
        finally:
            self._local.depth = 0
            elapsed = time.perf_counter() - start
            with _STATS_LOCK:
                self.stats.real_root_time += elapsed


_STATS_LOCK = threading.Lock()


@contextmanager
def maybe_timed(ws: Workspace | None):
    if ws is None:
        yield
    else:
        with ws.timed_roots():
            yield

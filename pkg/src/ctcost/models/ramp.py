"""Parameter ramps ``g(t)`` with analytic first and second derivatives."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import InvalidInputError

KINDS = ("cosine", "linear", "constant")


@dataclass(frozen=True)
class Ramp:
    """A scalar control parameter swept from ``start`` to ``end`` over ``[t0, t1]``.

    The cosine ramp ``start + (end - start) * (1 - cos(pi s)) / 2`` with
    ``s = (t - t0) / (t1 - t0)`` has zero velocity at both ends, so the sweep
    starts and stops without a sudden quench.
    """

    kind: str
    start: float
    end: float
    t0: float = 0.0
    t1: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"ramp kind must be one of {KINDS}, got {self.kind!r}")
        if not self.t1 > self.t0:
            raise InvalidInputError("ramp needs t0 < t1")

    @property
    def duration(self):
        return self.t1 - self.t0

    def with_duration(self, duration):
        return replace(self, t1=self.t0 + duration)

    def _s(self, t):
        return (np.asarray(t, dtype=float) - self.t0) / self.duration

    def value(self, t):
        s = self._s(t)
        d = self.end - self.start
        if self.kind == "cosine":
            return self.start + d * (1 - np.cos(np.pi * s)) / 2
        if self.kind == "linear":
            return self.start + d * s
        return self.start + 0 * s

    def rate(self, t):
        s = self._s(t)
        d = self.end - self.start
        if self.kind == "cosine":
            return d * np.pi * np.sin(np.pi * s) / (2 * self.duration)
        if self.kind == "linear":
            return d / self.duration + 0 * s
        return 0 * s

    def accel(self, t):
        s = self._s(t)
        d = self.end - self.start
        if self.kind == "cosine":
            return d * np.pi**2 * np.cos(np.pi * s) / (2 * self.duration**2)
        return 0 * s

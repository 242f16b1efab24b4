"""Stochastic rounding of exact intermediates with reproducible randomness.

Randomness comes from counter-based Philox streams keyed by
``(master_seed, stream_id)``: stream ``i`` yields the same sequence whether
it is consumed one draw at a time through :class:`RngStream` or as one lane
of a :class:`StreamBank`. Rounding a representable value consumes no draw.
"""
from __future__ import annotations

import contextlib
import enum
import os
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .fp_core import (
    ExactValue,
    FloatFormat,
    exact_add,
    exact_div,
    exact_mul,
    exact_sub,
    neighborhood,
    round_nearest,
    to_fraction,
    vec_neighbors,
)

_HALF = Fraction(1, 2)
_SEED_MASK = (1 << 64) - 1

# Test-harness fault injection: rounds up with probability 1 - theta.
_flip_threshold = False


class SRMode(enum.Enum):
    SR_NEARNESS = "sr-nearness"
    SR_UP_OR_DOWN = "sr-up-or-down"
    RN_NEAREST = "rn"

    @property
    def stochastic(self) -> bool:
        return self is not SRMode.RN_NEAREST

    @classmethod
    def parse(cls, text: str) -> "SRMode":
        aliases = {
            "nearness": cls.SR_NEARNESS,
            "up-or-down": cls.SR_UP_OR_DOWN,
            "updown": cls.SR_UP_OR_DOWN,
            "nearest": cls.RN_NEAREST,
            "rn-nearest": cls.RN_NEAREST,
        }
        key = text.strip().lower().replace("_", "-")
        for m in cls:
            if key in (m.value, m.name.lower().replace("_", "-")):
                return m
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown rounding mode {text!r}")


def _philox(master_seed: int, stream_id: int) -> np.random.Generator:
    key = np.array([master_seed & _SEED_MASK, stream_id & _SEED_MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def seed_from_env(default: int = 0) -> int:
    """Master seed from ``SR_SEED`` (decimal 64-bit integer), else ``default``."""
    raw = os.environ.get("SR_SEED")
    if raw is None or raw.strip() == "":
        return default
    try:
        seed = int(raw.strip(), 10)
    except ValueError:
        raise ConfigError(f"SR_SEED must be a decimal integer, got {raw!r}") from None
    if not 0 <= seed <= _SEED_MASK:
        raise ConfigError("SR_SEED must fit in 64 unsigned bits")
    return seed


class RngStream:
    """A single deterministic stream of uniform draws in [0, 1)."""

    _BLOCK = 256

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = master_seed
        self.stream_id = stream_id
        self._gen = _philox(master_seed, stream_id)
        self._buf = np.empty(0)
        self._pos = 0
        self.draws = 0

    def draw_unit(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(self._BLOCK)
            self._pos = 0
        v = float(self._buf[self._pos])
        self._pos += 1
        self.draws += 1
        return v

    def __repr__(self):
        return f"RngStream(seed={self.master_seed}, stream={self.stream_id}, draws={self.draws})"


class StreamBank:
    """Lockstep view of many streams, one lane per stream id.

    Each lane keeps its own draw counter, so lanes that round a
    representable value do not advance.
    """

    def __init__(self, master_seed: int, stream_ids: Sequence[int], max_draws: int):
        self.master_seed = master_seed
        self.stream_ids = np.asarray(stream_ids, dtype=np.uint64)
        self.max_draws = max_draws
        self._table = np.empty((len(self.stream_ids), max(max_draws, 1)))
        for i, sid in enumerate(self.stream_ids):
            self._table[i] = _philox(master_seed, int(sid)).random(self._table.shape[1])
        self.counters = np.zeros(len(self.stream_ids), dtype=np.int64)
        self._lanes = np.arange(len(self.stream_ids))

    def __len__(self):
        return len(self.stream_ids)

    def draw(self, need: np.ndarray) -> np.ndarray:
        """Next draw of every lane; only lanes flagged in ``need`` advance."""
        if self.counters.max(initial=0) >= self.max_draws and need.any():
            raise RuntimeError("stream bank exhausted; raise max_draws")
        out = self._table[self._lanes, np.minimum(self.counters, self._table.shape[1] - 1)]
        self.counters += need
        return out


class SequentialDraws:
    """Draw source for bulk checks: needy lanes take consecutive draws of one stream.

    Cheaper than a :class:`StreamBank` when lanes need not replay
    individually.
    """

    def __init__(self, rng: RngStream):
        self.rng = rng

    def draw(self, need: np.ndarray) -> np.ndarray:
        out = np.full(need.shape, 0.5)
        k = int(np.count_nonzero(need))
        if k:
            out[need] = self.rng._gen.random(k)
            self.rng.draws += k
        return out


@contextlib.contextmanager
def inject_threshold_fault():
    """Make SR-nearness round up with probability 1 - theta (harness self-test)."""
    global _flip_threshold
    saved = _flip_threshold
    _flip_threshold = True
    try:
        yield
    finally:
        _flip_threshold = saved


def _round_up(theta, draw, mode: SRMode):
    if mode is SRMode.SR_UP_OR_DOWN:
        return draw < 0.5
    if _flip_threshold:
        return draw >= theta
    return draw < theta


def sr_round(x: ExactValue, fmt: FloatFormat, mode: SRMode, rng: RngStream | None = None) -> float:
    """Round an exact value to ``fmt`` under ``mode``.

    Representable values are returned unchanged without consuming a draw.
    """
    if mode is SRMode.RN_NEAREST:
        return round_nearest(x, fmt)
    nb = neighborhood(x, fmt)
    if nb.representable:
        return nb.down
    if rng is None:
        raise ValueError("stochastic modes need an RngStream")
    draw = rng.draw_unit()
    theta = nb.theta if mode is SRMode.SR_NEARNESS else _HALF
    return nb.up if _round_up(theta, Fraction(draw), mode) else nb.down


def sr_add(a, b, fmt, mode, rng=None) -> float:
    return sr_round(to_fraction(a) + to_fraction(b), fmt, mode, rng)


def sr_sub(a, b, fmt, mode, rng=None) -> float:
    return sr_round(to_fraction(a) - to_fraction(b), fmt, mode, rng)


def sr_mul(a, b, fmt, mode, rng=None) -> float:
    return sr_round(to_fraction(a) * to_fraction(b), fmt, mode, rng)


def sr_div(a, b, fmt, mode, rng=None) -> float:
    b = to_fraction(b)
    if b == 0:
        raise ZeroDivisionError("sr_div by zero")
    return sr_round(to_fraction(a) / b, fmt, mode, rng)


def outcome_law(x: ExactValue, fmt: FloatFormat, mode: SRMode) -> list[tuple[float, Fraction]]:
    """The two-point (or one-point) distribution of ``sr_round(x)``."""
    nb = neighborhood(x, fmt)
    if nb.representable:
        return [(nb.down, Fraction(1))]
    if mode is SRMode.RN_NEAREST:
        return [(round_nearest(x, fmt), Fraction(1))]
    p_up = nb.theta if mode is SRMode.SR_NEARNESS else _HALF
    return [(nb.down, 1 - p_up), (nb.up, p_up)]


def expected_round(x: ExactValue, fmt: FloatFormat, mode: SRMode) -> Fraction:
    return sum((Fraction(v) * p for v, p in outcome_law(x, fmt, mode)), Fraction(0))


def bias_up_or_down(x: ExactValue, fmt: FloatFormat) -> Fraction:
    """E(round(x) - x) under SR-up-or-down: epsilon * (1/2 - theta)."""
    nb = neighborhood(x, fmt)
    return nb.epsilon * (_HALF - nb.theta)


# ---------------------------------------------------------------------------
# vectorized rounding over lanes of a StreamBank

def vec_round(hi, lo, fmt: FloatFormat, mode: SRMode, bank: StreamBank | None = None):
    """Round the exact values ``hi + lo`` lane by lane."""
    nb = vec_neighbors(hi, lo, fmt)
    if mode is SRMode.RN_NEAREST:
        up = nb.theta > 0.5
        tie = nb.theta == 0.5
        if tie.any():
            # ties to even: the neighbor whose significand is even
            _, ex = np.frexp(np.abs(nb.down))
            m = np.ldexp(np.abs(nb.down), fmt.precision - ex)
            up = up | (tie & (np.fmod(m, 2.0) != 0.0))
        return np.where(up, nb.up, nb.down)
    need = ~nb.representable
    draw = bank.draw(need)
    go_up = _round_up(nb.theta, draw, mode)
    return np.where(need & go_up, nb.up, nb.down)


def vec_add(a, b, fmt, mode, bank=None):
    return vec_round(*exact_add(a, b), fmt, mode, bank)


def vec_sub(a, b, fmt, mode, bank=None):
    return vec_round(*exact_sub(a, b), fmt, mode, bank)


def vec_mul(a, b, fmt, mode, bank=None):
    return vec_round(*exact_mul(a, b), fmt, mode, bank)


def vec_div(a, b, fmt, mode, bank=None):
    if np.any(np.asarray(b) == 0):
        raise ZeroDivisionError("vec_div by zero")
    return vec_round(*exact_div(a, b), fmt, mode, bank)

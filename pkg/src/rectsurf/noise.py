"""Biased Pauli channel and reproducible i.i.d. error sampling.

Every trial owns a fixed window of a Philox counter stream: trial ``t`` of a
code with ``n`` data qubits uses the uniforms at positions
``[t * m, t * m + n)`` where ``m`` is ``n`` rounded up to a multiple of four
(Philox emits four 64-bit words per counter step). Any batch ``[a, b)`` can
therefore be drawn independently and still reproduce the per-trial errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import SurfaceCode
from .pauli import PauliError

GENERATOR_NAME = "numpy.Philox4x64 (SeedSequence key, per-trial counter offset)"

INF = math.inf


class ChannelError(ValueError):
    pass


def kappa_to_p(kappa: float) -> float:
    """Per-cycle error rate for a cycle of eight steps each failing with ``kappa``."""
    if not 0.0 <= kappa <= 1.0:
        raise ChannelError(f"kappa must lie in [0, 1], got {kappa}")
    return 1.0 - (1.0 - kappa) ** 8


def p_to_kappa(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"p must lie in [0, 1], got {p}")
    return 1.0 - (1.0 - p) ** 0.125


@dataclass(frozen=True)
class ChannelParams:
    p: float
    delta: float  # p_z / p_x; math.inf for pure dephasing, 0 for pure bit flip
    p_x: float
    p_y: float
    p_z: float

    @property
    def counted_failures(self) -> str:
        """Which logical failures define P_L for this channel: "x", "z" or "any"."""
        if self.p_y == 0 and self.p_z == 0 and self.p_x > 0:
            return "x"
        if self.p_x == 0 and self.p_y == 0 and self.p_z > 0:
            return "z"
        return "any"

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "delta": format_delta(self.delta),
            "p_x": self.p_x,
            "p_y": self.p_y,
            "p_z": self.p_z,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ChannelParams:
        return cls(float(d["p"]), parse_delta(d["delta"]), float(d["p_x"]), float(d["p_y"]), float(d["p_z"]))


def parse_delta(value) -> float:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "infinity", "∞"):
            return INF
        value = float(v)
    value = float(value)
    if math.isnan(value):
        raise ChannelError("bias must not be NaN")
    return value


def format_delta(delta: float) -> str | float:
    if math.isinf(delta):
        return "inf"
    return int(delta) if float(delta).is_integer() else delta


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"p must lie in [0, 1], got {p}")


def make_channel(p: float, delta: float | str = 1.0) -> ChannelParams:
    """Split ``p`` into ``(p/(D+2), p/(D+2), p*D/(D+2))`` for bias ``D``."""
    _check_p(p)
    delta = parse_delta(delta)
    if delta < 1:
        raise ChannelError(f"bias must be >= 1 (swap d_x and d_z for bit-flip bias), got {delta}")
    if math.isinf(delta):
        return ChannelParams(p, INF, 0.0, 0.0, p)
    px = p / (delta + 2)
    pz = p - 2 * px
    return ChannelParams(p, delta, px, px, pz)


def make_pure_channel(p: float, kind: str) -> ChannelParams:
    _check_p(p)
    kind = kind.upper().replace("_ONLY", "")
    if kind == "X":
        return ChannelParams(p, 0.0, p, 0.0, 0.0)
    if kind == "Z":
        return ChannelParams(p, INF, 0.0, 0.0, p)
    raise ChannelError(f"pure channel kind must be X_only or Z_only, got {kind!r}")


@dataclass(frozen=True)
class RngSeed:
    master_seed: int
    stream: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master seed must fit in 64 bits, got {self.master_seed}")
        object.__setattr__(self, "stream", tuple(int(s) for s in self.stream))

    def child(self, *stream: int) -> RngSeed:
        return RngSeed(self.master_seed, self.stream + tuple(stream))

    def key(self) -> np.ndarray:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.stream)
        return ss.generate_state(2, np.uint64)


def _stride(n: int) -> int:
    return 4 * ((n + 3) // 4)


def trial_uniforms(seed: RngSeed, n: int, start: int, stop: int) -> np.ndarray:
    """Uniforms for trials ``[start, stop)``, shape ``(stop - start, n)``."""
    stride = _stride(n)
    bitgen = np.random.Philox(key=seed.key())
    bitgen.advance(start * (stride // 4))
    u = np.random.Generator(bitgen).random((stop - start, stride))
    return u[:, :n]


def sample_components(u: np.ndarray, ch: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    """Map uniforms to (x, z) components: [0,p_x) X, [p_x,p_x+p_y) Y, [.., p) Z."""
    x = u < ch.p_x + ch.p_y
    z = (u >= ch.p_x) & (u < ch.p_x + ch.p_y + ch.p_z)
    return x, z


def sample_errors(
    code: SurfaceCode, ch: ChannelParams, seed: RngSeed, start: int, stop: int
) -> tuple[np.ndarray, np.ndarray]:
    """Batch of errors for trials ``[start, stop)`` as boolean (x, z) matrices."""
    return sample_components(trial_uniforms(seed, code.n_data, start, stop), ch)


def sample_error(code: SurfaceCode, ch: ChannelParams, seed: RngSeed, trial: int) -> PauliError:
    x, z = sample_errors(code, ch, seed, trial, trial + 1)
    return PauliError(x[0], z[0])

"""Phaseless Pauli operators on data qubits as (x, z) bit-vector pairs."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .lattice import SurfaceCode


class ContractError(RuntimeError):
    """An internal invariant was violated (points to a decoder bug)."""


def _bits(v, n: int | None = None) -> np.ndarray:
    a = np.asarray(v, dtype=bool).ravel().copy()
    if n is not None and a.size != n:
        raise ValueError(f"expected {n} bits, got {a.size}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PauliError:
    """Pauli operator with Y on q iff bit q is set in both ``x`` and ``z``."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        x, z = _bits(self.x), _bits(self.z)
        if x.size != z.size:
            raise ValueError(f"x/z length mismatch: {x.size} != {z.size}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def identity(cls, n: int) -> PauliError:
        return cls(np.zeros(n, bool), np.zeros(n, bool))

    @classmethod
    def from_sites(cls, n: int, x=(), z=(), y=()) -> PauliError:
        xs, zs = np.zeros(n, bool), np.zeros(n, bool)
        for q in x:
            xs[q] ^= True
        for q in z:
            zs[q] ^= True
        for q in y:
            xs[q] ^= True
            zs[q] ^= True
        return cls(xs, zs)

    @classmethod
    def parse(cls, text: str, n: int) -> PauliError:
        """Parse tokens like ``"X3,Y6,Z10"``; repeated sites compose."""
        xs, zs = np.zeros(n, bool), np.zeros(n, bool)
        for token in (t.strip() for t in text.split(",")):
            if not token:
                continue
            m = re.fullmatch(r"([IXYZ])(\d+)", token.upper())
            if m is None:
                raise ValueError(f"cannot parse Pauli token {token!r}")
            op, q = m.group(1), int(m.group(2))
            if q >= n:
                raise ValueError(f"token {token!r}: qubit {q} out of range for {n} qubits")
            if op in "XY":
                xs[q] ^= True
            if op in "ZY":
                zs[q] ^= True
        return cls(xs, zs)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def __mul__(self, other: PauliError) -> PauliError:
        return compose(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliError):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes()))

    def __str__(self) -> str:
        letters = {(True, False): "X", (True, True): "Y", (False, True): "Z"}
        tokens = [
            f"{letters[bool(self.x[q]), bool(self.z[q])]}{q}"
            for q in np.flatnonzero(self.x | self.z)
        ]
        return ",".join(tokens) if tokens else "I"

    def __repr__(self) -> str:
        return f"PauliError({self}, n={self.n})"


@dataclass(frozen=True, eq=False)
class Syndrome:
    x_bits: np.ndarray  # one bit per X stabilizer (fires on Z/Y components)
    z_bits: np.ndarray  # one bit per Z stabilizer (fires on X/Y components)

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_bits", _bits(self.x_bits))
        object.__setattr__(self, "z_bits", _bits(self.z_bits))

    @classmethod
    def zeros(cls, code: SurfaceCode) -> Syndrome:
        return cls(np.zeros(len(code.x_stabilizers), bool), np.zeros(len(code.z_stabilizers), bool))

    def is_trivial(self) -> bool:
        return not (self.x_bits.any() or self.z_bits.any())

    def bits(self, kind: str) -> np.ndarray:
        return self.x_bits if kind == "X" else self.z_bits

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Syndrome):
            return NotImplemented
        return np.array_equal(self.x_bits, other.x_bits) and np.array_equal(self.z_bits, other.z_bits)

    def __xor__(self, other: Syndrome) -> Syndrome:
        return Syndrome(self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)

    def __str__(self) -> str:
        fmt = lambda v: "[" + ", ".join(str(int(b)) for b in v) + "]"  # noqa: E731
        return f"X: {fmt(self.x_bits)} Z: {fmt(self.z_bits)}"


def _check_sizes(a: PauliError, b: PauliError) -> None:
    if a.n != b.n:
        raise ValueError(f"Pauli length mismatch: {a.n} != {b.n}")


def commutes(a: PauliError, b: PauliError) -> bool:
    _check_sizes(a, b)
    form = np.count_nonzero(a.x & b.z) + np.count_nonzero(a.z & b.x)
    return form % 2 == 0


def compose(a: PauliError, b: PauliError) -> PauliError:
    _check_sizes(a, b)
    return PauliError(a.x ^ b.x, a.z ^ b.z)


def stabilizer_operator(code: SurfaceCode, kind: str, index: int) -> PauliError:
    support = code.stabilizers(kind)[index].support
    return PauliError.from_sites(code.n_data, **{kind.lower(): support})


def logical_operator(code: SurfaceCode, kind: str, index: int = 0) -> PauliError:
    reps = code.logical_x_reps if kind == "X" else code.logical_z_reps
    return PauliError.from_sites(code.n_data, **{kind.lower(): reps[index]})


def measure_syndrome(code: SurfaceCode, e: PauliError) -> Syndrome:
    if e.n != code.n_data:
        raise ValueError(f"error acts on {e.n} qubits, code has {code.n_data}")
    x_bits = (code.hx.astype(np.int64) @ e.z) % 2
    z_bits = (code.hz.astype(np.int64) @ e.x) % 2
    return Syndrome(x_bits, z_bits)


def logical_failure(code: SurfaceCode, residual: PauliError) -> tuple[bool, bool]:
    """Return ``(x_fail, z_fail)`` for a residual with trivial syndrome.

    ``x_fail`` is an odd overlap of the X part with the row-0 Z logical and
    ``z_fail`` an odd overlap of the Z part with the column-0 X logical.
    """
    if not measure_syndrome(code, residual).is_trivial():
        raise ContractError(f"residual {residual} has non-trivial syndrome")
    x_fail = bool(np.count_nonzero(residual.x[list(code.logical_z)]) % 2)
    z_fail = bool(np.count_nonzero(residual.z[list(code.logical_x)]) % 2)
    return x_fail, z_fail

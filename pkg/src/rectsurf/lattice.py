"""Rectangular rotated surface code [d_x, d_z].

Data qubits sit on a ``d_x`` by ``d_z`` grid (``d_x`` rows, ``d_z`` columns) and
are indexed row-major, ``q = r * d_z + c``. Logical X runs down a column
(weight ``d_x``), logical Z along a row (weight ``d_z``).

Faces of the grid are labelled by their upper-left corner ``(r, c)`` with
``r`` in ``[-1, d_x - 1]`` and ``c`` in ``[-1, d_z - 1]``. Interior faces
alternate Z/X in a checkerboard; the half-faces on the top/bottom edges carry
weight-2 X checks and those on the left/right edges weight-2 Z checks.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterator

import numpy as np


class CodeError(ValueError):
    """Invalid code parameters."""


@dataclass(frozen=True)
class Distances:
    d_x: int
    d_z: int

    def __post_init__(self) -> None:
        for name, d in (("d_x", self.d_x), ("d_z", self.d_z)):
            if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
                raise CodeError(f"{name} must be an integer, got {d!r}")
            if d < 3:
                raise CodeError(f"{name} must be at least 3, got {d}")
            if d % 2 == 0:
                raise CodeError(f"{name} must be odd, got {d}")

    def __str__(self) -> str:
        return f"[{self.d_x},{self.d_z}]"


@dataclass(frozen=True)
class Stabilizer:
    kind: str  # "X" or "Z"
    support: tuple[int, ...]
    anchor: tuple[int, int, str]  # face (r, c) and side: bulk/top/bottom/left/right

    @property
    def weight(self) -> int:
        return len(self.support)

    def __str__(self) -> str:
        return "".join(f"{self.kind}{q}" for q in self.support)


@dataclass(frozen=True)
class SurfaceCode:
    distances: Distances
    x_stabilizers: tuple[Stabilizer, ...]
    z_stabilizers: tuple[Stabilizer, ...]
    logical_x_reps: tuple[tuple[int, ...], ...]
    logical_z_reps: tuple[tuple[int, ...], ...]

    @property
    def d_x(self) -> int:
        return self.distances.d_x

    @property
    def d_z(self) -> int:
        return self.distances.d_z

    @property
    def n_data(self) -> int:
        return self.d_x * self.d_z

    def qubit(self, r: int, c: int) -> int:
        if not (0 <= r < self.d_x and 0 <= c < self.d_z):
            raise IndexError(f"({r}, {c}) outside {self.d_x}x{self.d_z} grid")
        return r * self.d_z + c

    def coord(self, q: int) -> tuple[int, int]:
        if not 0 <= q < self.n_data:
            raise IndexError(f"qubit {q} outside code with {self.n_data} qubits")
        return divmod(q, self.d_z)

    def stabilizers(self, kind: str) -> tuple[Stabilizer, ...]:
        if kind == "X":
            return self.x_stabilizers
        if kind == "Z":
            return self.z_stabilizers
        raise ValueError(f"unknown stabilizer kind {kind!r}")

    # Check matrices are derived lazily; the frozen dataclass still caches them.
    @functools.cached_property
    def hx(self) -> np.ndarray:
        """X-check matrix, shape (n_x_stabilizers, n_data)."""
        return _check_matrix(self.x_stabilizers, self.n_data)

    @functools.cached_property
    def hz(self) -> np.ndarray:
        """Z-check matrix, shape (n_z_stabilizers, n_data)."""
        return _check_matrix(self.z_stabilizers, self.n_data)

    @property
    def logical_x(self) -> tuple[int, ...]:
        """Canonical X-logical representative: column 0."""
        return self.logical_x_reps[0]

    @property
    def logical_z(self) -> tuple[int, ...]:
        """Canonical Z-logical representative: row 0."""
        return self.logical_z_reps[0]

    def __str__(self) -> str:
        return f"SurfaceCode{self.distances}"


def _check_matrix(stabs: tuple[Stabilizer, ...], n: int) -> np.ndarray:
    h = np.zeros((len(stabs), n), dtype=np.uint8)
    for i, s in enumerate(stabs):
        h[i, list(s.support)] = 1
    h.flags.writeable = False
    return h


def _faces(d_x: int, d_z: int) -> Iterator[tuple[str, int, int, str]]:
    """Yield (kind, r, c, side) for every stabilizer face."""
    for r in range(d_x - 1):
        for c in range(d_z - 1):
            yield ("Z" if (r + c) % 2 == 0 else "X"), r, c, "bulk"
    for c in range(0, d_z - 1, 2):
        yield "X", -1, c, "top"
    for c in range(d_z - 1):
        if (d_x - 2 + c) % 2 == 0:
            yield "X", d_x - 1, c, "bottom"
    for r in range(1, d_x - 1, 2):
        yield "Z", r, -1, "left"
    for r in range(d_x - 1):
        if (r + d_z - 2) % 2 == 1:
            yield "Z", r, d_z - 1, "right"


def build_code(d_x: int | Distances, d_z: int | None = None) -> SurfaceCode:
    """Build the [d_x, d_z] rotated surface code.

    X checks are ordered by their smallest data-qubit index and Z checks by
    face anchor in column-major order. For [3, 3] this gives exactly the
    labels X_0..X_3 = X0X1, X1X2X4X5, X3X4X6X7, X7X8 and
    Z_0..Z_3 = Z3Z6, Z0Z1Z3Z4, Z4Z5Z7Z8, Z2Z5.
    """
    dist = d_x if isinstance(d_x, Distances) else Distances(d_x, d_z)
    rows, cols = dist.d_x, dist.d_z

    xs: list[Stabilizer] = []
    zs: list[Stabilizer] = []
    for kind, r, c, side in _faces(rows, cols):
        support = sorted(
            rr * cols + cc
            for rr in (r, r + 1)
            for cc in (c, c + 1)
            if 0 <= rr < rows and 0 <= cc < cols
        )
        stab = Stabilizer(kind, tuple(support), (r, c, side))
        (xs if kind == "X" else zs).append(stab)

    xs.sort(key=lambda s: s.support[0])
    zs.sort(key=lambda s: (s.anchor[1], s.anchor[0]))

    columns = tuple(tuple(r * cols + c for r in range(rows)) for c in range(cols))
    row_sets = tuple(tuple(r * cols + c for c in range(cols)) for r in range(rows))
    return SurfaceCode(dist, tuple(xs), tuple(zs), columns, row_sets)


def correctable_weights(code: SurfaceCode) -> tuple[int, int]:
    return (code.d_x - 1) // 2, (code.d_z - 1) // 2


def qubit_savings_percent(d: Distances | SurfaceCode) -> float:
    """Data-qubit saving of [d_x, d_z] relative to the square [d_z, d_z] code."""
    if isinstance(d, SurfaceCode):
        d = d.distances
    if d.d_z < d.d_x:
        raise CodeError("qubit savings defined for d_z >= d_x")
    return (d.d_z - d.d_x) / d.d_z * 100.0

"""Makhlin local invariants and the catalog of named local equivalence classes.

For ``U`` in U(4) the invariants are taken in the magic (Bell) basis,
``m_U = U_B^T U_B`` with ``U_B = Q^dagger U Q``::

    g1 + i g2 = tr^2(m_U) / (16 det U)
    g3        = (tr^2(m_U) - tr(m_U^2)) / (4 det U)

Dividing by the determinant removes the global phase, so braid blocks with an
arbitrary phase can be compared directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._kernels import DET_FLOOR, MAGIC

__all__ = [
    "CATALOG",
    "DegenerateBlockError",
    "EquivalenceClass",
    "LocalInvariants",
    "MAGIC",
    "bell_transform",
    "canonical_gates",
    "class_distance",
    "closest_class",
    "get_class",
    "invariants_u4",
    "makhlin_matrix",
]


class DegenerateBlockError(ValueError):
    """Raised when the 4x4 block is (nearly) singular, i.e. leaks heavily."""


@dataclass(frozen=True)
class LocalInvariants:
    g1: float
    g2: float
    g3: float
    g3_imag_residual: float = 0.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.g1, self.g2, self.g3)


@dataclass(frozen=True)
class EquivalenceClass:
    name: str
    g: tuple[float, float, float]

    def __str__(self) -> str:
        return f"[{self.name}]"


CATALOG: tuple[EquivalenceClass, ...] = (
    EquivalenceClass("ID", (1.0, 0.0, 3.0)),
    EquivalenceClass("CNOT", (0.0, 0.0, 1.0)),
    EquivalenceClass("DCNOT", (0.0, 0.0, -1.0)),
    EquivalenceClass("SWAP", (-1.0, 0.0, -3.0)),
    EquivalenceClass("B", (0.0, 0.0, 0.0)),
    EquivalenceClass("SQRT_SWAP", (0.0, 0.25, 0.0)),
)

_ALIASES = {"I": "ID", "IDENTITY": "ID", "SQRTSWAP": "SQRT_SWAP", "√SWAP": "SQRT_SWAP",
            "BGATE": "B", "DOUBLE_CNOT": "DCNOT"}


def get_class(name: str) -> EquivalenceClass:
    """Look up a catalog class by name, case-insensitively."""
    key = name.strip().strip("[]").upper().replace("-", "_")
    key = _ALIASES.get(key, key)
    for cls in CATALOG:
        if cls.name == key:
            return cls
    known = ", ".join(c.name for c in CATALOG)
    raise KeyError(f"unknown equivalence class {name!r}; known classes: {known}")


def bell_transform(u: np.ndarray) -> np.ndarray:
    return MAGIC.conj().T @ np.asarray(u, dtype=np.complex128) @ MAGIC


def makhlin_matrix(u_bell: np.ndarray) -> np.ndarray:
    u_bell = np.asarray(u_bell, dtype=np.complex128)
    return u_bell.T @ u_bell


def invariants_u4(u: np.ndarray) -> LocalInvariants:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {u.shape}")
    det = np.linalg.det(u)
    if abs(det) <= DET_FLOOR:
        raise DegenerateBlockError(
            f"|det U| = {abs(det):.3g} is below {DET_FLOOR:g}; the block is far from "
            "unitary (severe leakage out of the computational subspace)")
    m = makhlin_matrix(bell_transform(u))
    tr = np.trace(m)
    tr2 = tr * tr
    z = tr2 / (16 * det)
    g3 = (tr2 - np.trace(m @ m)) / (4 * det)
    return LocalInvariants(float(z.real), float(z.imag), float(g3.real), float(g3.imag))


def _triple(x: LocalInvariants | EquivalenceClass | Sequence[float]) -> tuple[float, float, float]:
    if isinstance(x, LocalInvariants):
        return x.as_tuple()
    if isinstance(x, EquivalenceClass):
        return x.g
    g1, g2, g3 = x
    return (float(g1), float(g2), float(g3))


def class_distance(inv: LocalInvariants | Sequence[float],
                   cls: EquivalenceClass | Sequence[float]) -> float:
    """Sum of squared invariant deviations; no square root is taken."""
    a = _triple(inv)
    b = _triple(cls)
    return sum((bi - ai) ** 2 for ai, bi in zip(a, b))


def closest_class(inv: LocalInvariants | Sequence[float],
                  catalog: Iterable[EquivalenceClass] = CATALOG) -> tuple[EquivalenceClass, float]:
    """Nearest class; ties keep the earlier catalog entry."""
    best = None
    best_d = np.inf
    for cls in catalog:
        d = class_distance(inv, cls)
        if d < best_d:
            best, best_d = cls, d
    if best is None:
        raise ValueError("catalog is empty")
    return best, best_d


def canonical_gates() -> dict[str, np.ndarray]:
    """Standard-basis representatives of each catalog class."""
    i4 = np.eye(4, dtype=np.complex128)
    cnot12 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
    cnot21 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
    # The square root of SWAP whose class sits at g2 = +1/4; the other root
    # (entries (1+i)/2 on the diagonal) is its mirror image at g2 = -1/4.
    p, m = (1 - 1j) / 2, (1 + 1j) / 2
    sqrt_swap = np.array([[1, 0, 0, 0], [0, p, m, 0], [0, m, p, 0], [0, 0, 0, 1]], dtype=np.complex128)
    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    xx, yy = np.kron(x, x), np.kron(y, y)
    # XX and YY commute, so the exponential factorizes; (XX)^2 = (YY)^2 = I.
    b_gate = ((np.cos(np.pi / 4) * i4 + 1j * np.sin(np.pi / 4) * xx)
              @ (np.cos(np.pi / 8) * i4 + 1j * np.sin(np.pi / 8) * yy))
    return {
        "ID": i4,
        "CNOT": cnot12,
        # CNOT with control 1, then CNOT with control 2.
        "DCNOT": cnot21 @ cnot12,
        "SWAP": swap,
        "B": b_gate,
        "SQRT_SWAP": sqrt_swap,
    }

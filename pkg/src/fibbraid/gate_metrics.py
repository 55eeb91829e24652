"""Leakage, unitarity and Hilbert-Schmidt distance of the computational block."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .anyon_core import parse_matrix

__all__ = [
    "BlockDecomposition",
    "CNOT_TARGET",
    "DEFAULT_LEAKAGE_THRESHOLD",
    "DEFAULT_UNITARITY_THRESHOLD",
    "MetricDomainError",
    "TargetGate",
    "UnitarityReport",
    "decompose",
    "distance_to_gate",
    "hs_distance",
    "reassemble",
    "schatten_norm",
    "trace_unitarity",
    "unitarity_measure",
    "unitarity_report",
]

DEFAULT_LEAKAGE_THRESHOLD = 1e-3
DEFAULT_UNITARITY_THRESHOLD = 0.1


class MetricDomainError(ValueError):
    pass


@dataclass(frozen=True)
class BlockDecomposition:
    """``m11`` plus the 4x4 computational block; off-block entries kept for reassembly."""

    m11: complex
    a_block: np.ndarray = field(repr=False)
    first_row: np.ndarray = field(repr=False)
    first_col: np.ndarray = field(repr=False)


def decompose(m: np.ndarray) -> BlockDecomposition:
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (5, 5):
        raise ValueError(f"expected a 5x5 matrix, got shape {m.shape}")
    return BlockDecomposition(
        m11=complex(m[0, 0]),
        a_block=m[1:, 1:].copy(),
        first_row=m[0, 1:].copy(),
        first_col=m[1:, 0].copy(),
    )


def reassemble(block: BlockDecomposition) -> np.ndarray:
    out = np.empty((5, 5), dtype=np.complex128)
    out[0, 0] = block.m11
    out[0, 1:] = block.first_row
    out[1:, 0] = block.first_col
    out[1:, 1:] = block.a_block
    return out


def _singular_values(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    ev = np.linalg.eigvalsh(a.conj().T @ a)
    return np.sqrt(np.clip(ev, 0.0, None))


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm, ``(sum_i s_i^p)^(1/p)``; ``p=np.inf`` gives the spectral norm."""
    if not p >= 1:
        raise MetricDomainError(f"Schatten norm needs p >= 1, got {p}")
    s = _singular_values(a)
    if np.isinf(p):
        return float(s.max())
    return float(np.sum(s ** p) ** (1.0 / p))


def unitarity_measure(a: np.ndarray) -> float:
    """Trace norm of ``A^dagger A - I``; zero exactly when A is unitary."""
    a = np.asarray(a, dtype=np.complex128)
    h = a.conj().T @ a - np.eye(a.shape[0])
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))


def trace_unitarity(a: np.ndarray) -> float:
    """``tr(A^dagger A) / dim``. Equals 1 for unitaries but also for many non-unitaries."""
    a = np.asarray(a, dtype=np.complex128)
    return float(np.real(np.trace(a.conj().T @ a)) / a.shape[0])


def hs_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise MetricDomainError("Hilbert-Schmidt distance undefined for a zero matrix")
    return float(np.linalg.norm(a / na - b / nb))


@dataclass(frozen=True)
class TargetGate:
    name: str
    matrix: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ValueError(f"target gate {self.name!r} must be 4x4, got {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(4))) >= 1e-12:
            raise ValueError(f"target gate {self.name!r} is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_file(cls, path: str | Path, name: str | None = None) -> "TargetGate":
        path = Path(path)
        m = parse_matrix(path.read_text(encoding="utf-8"), sizes=(4,))
        return cls(name or path.stem, m)


CNOT_TARGET = TargetGate("CNOT", np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=np.complex128))


def distance_to_gate(a: np.ndarray, target: TargetGate = CNOT_TARGET) -> float:
    return hs_distance(a, target.matrix)


@dataclass(frozen=True)
class UnitarityReport:
    m11_norm: float
    leakage_delta: float
    trace_measure: float
    schatten1_measure: float

    def is_leakage_free(self, delta: float = DEFAULT_LEAKAGE_THRESHOLD) -> bool:
        return self.leakage_delta < delta


def unitarity_report(m: np.ndarray) -> UnitarityReport:
    block = decompose(m)
    norm = abs(block.m11)
    return UnitarityReport(
        m11_norm=norm,
        leakage_delta=abs(1.0 - norm),
        trace_measure=trace_unitarity(block.a_block),
        schatten1_measure=unitarity_measure(block.a_block),
    )

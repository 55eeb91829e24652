"""Fibonacci data, six-anyon braid generators and braid words.

The five generators act on the ordered basis ``|NC>, |11>, |1t>, |t1>, |tt>``
where ``|NC>`` is the single non-computational state. A braid word is written
as a digit string: under the basic alphabet digit ``d`` is sigma_{d+1}; the
extended alphabet adds digits 5..9 for the inverses sigma_{d-4}^{-1}.

The i-th token of a word is the i-th left-to-right factor of the product,
``M = G(t1) G(t2) ... G(tL)``.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "Alphabet",
    "BraidParseError",
    "BraidWord",
    "FIBONACCI",
    "FibonacciConstants",
    "GeneratorToken",
    "MatrixParseError",
    "evaluate_braid",
    "format_braid_string",
    "format_matrix",
    "generator_matrix",
    "generator_table",
    "parse_braid_string",
    "parse_matrix",
]

BASIS_LABELS = ("NC", "11", "1t", "t1", "tt")
N_GENERATORS = 5


class Alphabet(str, enum.Enum):
    BASIC = "basic"
    EXTENDED = "extended"

    @property
    def size(self) -> int:
        return N_GENERATORS if self is Alphabet.BASIC else 2 * N_GENERATORS


class BraidParseError(ValueError):
    """Invalid operator string; ``position`` is the 0-based offending index."""

    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class MatrixParseError(ValueError):
    pass


def _direct_sum(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


@dataclass(frozen=True)
class FibonacciConstants:
    """Golden ratio, R-matrix phases and the recoupling matrix F."""

    phi: float
    r_one: complex
    r_tau: complex
    f_matrix: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def standard(cls) -> "FibonacciConstants":
        phi = (math.sqrt(5.0) + 1.0) / 2.0
        # (t,t) entry carries the minus sign so that F is orthogonal.
        f = np.array([[1.0 / phi, math.sqrt(1.0 / phi)],
                      [math.sqrt(1.0 / phi), -1.0 / phi]])
        f.setflags(write=False)
        return cls(
            phi=phi,
            r_one=complex(np.exp(-4j * np.pi / 5)),
            r_tau=complex(np.exp(3j * np.pi / 5)),
            f_matrix=f,
        )

    @property
    def r_matrix(self) -> np.ndarray:
        return np.diag([self.r_one, self.r_tau])

    @property
    def frf(self) -> np.ndarray:
        f = self.f_matrix
        return f @ self.r_matrix @ f


FIBONACCI = FibonacciConstants.standard()


@dataclass(frozen=True, order=True)
class GeneratorToken:
    index: int
    inverted: bool = False

    def __post_init__(self):
        if not isinstance(self.index, (int, np.integer)) or not 1 <= self.index <= N_GENERATORS:
            raise ValueError(f"generator index must be in 1..{N_GENERATORS}, got {self.index!r}")
        object.__setattr__(self, "index", int(self.index))
        object.__setattr__(self, "inverted", bool(self.inverted))

    @property
    def digit(self) -> int:
        return self.index - 1 + (N_GENERATORS if self.inverted else 0)

    @classmethod
    def from_digit(cls, digit: int) -> "GeneratorToken":
        if not 0 <= digit < 2 * N_GENERATORS:
            raise ValueError(f"digit out of range: {digit}")
        return cls(digit % N_GENERATORS + 1, digit >= N_GENERATORS)

    def inverse(self) -> "GeneratorToken":
        return GeneratorToken(self.index, not self.inverted)

    def __str__(self) -> str:
        return f"s{self.index}" + ("^-1" if self.inverted else "")


@dataclass(frozen=True)
class BraidWord:
    """An immutable sequence of generator tokens over a fixed alphabet."""

    tokens: tuple[GeneratorToken, ...] = ()
    alphabet: Alphabet = Alphabet.BASIC

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        if self.alphabet is Alphabet.BASIC:
            for pos, tok in enumerate(self.tokens):
                if tok.inverted:
                    raise ValueError(f"inverse generator {tok} at position {pos} "
                                     "is not in the basic alphabet")

    @classmethod
    def from_digits(cls, digits: Iterable[int], alphabet: Alphabet | str = Alphabet.BASIC) -> "BraidWord":
        return cls(tuple(GeneratorToken.from_digit(int(d)) for d in digits), Alphabet(alphabet))

    @property
    def digits(self) -> np.ndarray:
        return np.fromiter((t.digit for t in self.tokens), dtype=np.uint8, count=len(self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[GeneratorToken]:
        return iter(self.tokens)

    def __add__(self, other: "BraidWord") -> "BraidWord":
        alphabet = Alphabet.EXTENDED if Alphabet.EXTENDED in (self.alphabet, other.alphabet) else Alphabet.BASIC
        return BraidWord(self.tokens + other.tokens, alphabet)

    def __str__(self) -> str:
        return format_braid_string(self)


def _generator_matrix(index: int, c: FibonacciConstants) -> np.ndarray:
    rt = np.array([[c.r_tau]])
    r = c.r_matrix
    frf = c.frf
    i2 = np.eye(2)
    if index == 1:
        return _direct_sum(rt, np.kron(r, i2))
    if index == 2:
        return _direct_sum(rt, np.kron(frf, i2))
    if index == 3:
        p14 = np.eye(5)[[3, 1, 2, 0, 4]]
        return p14 @ _direct_sum(rt, r, frf) @ p14
    if index == 4:
        return _direct_sum(rt, np.kron(i2, frf))
    return _direct_sum(rt, np.kron(i2, r))


@lru_cache(maxsize=None)
def _cached_generator(index: int, inverted: bool) -> np.ndarray:
    g = _generator_matrix(index, FIBONACCI)
    if inverted:
        g = g.conj().T
    g = np.ascontiguousarray(g, dtype=np.complex128)
    g.setflags(write=False)
    return g


def generator_matrix(token: GeneratorToken, constants: FibonacciConstants = FIBONACCI) -> np.ndarray:
    """5x5 matrix of a braid generator, or its conjugate transpose if inverted."""
    if constants is FIBONACCI:
        return _cached_generator(token.index, token.inverted)
    g = _generator_matrix(token.index, constants)
    return g.conj().T if token.inverted else g


@lru_cache(maxsize=None)
def _table(alphabet: Alphabet) -> np.ndarray:
    table = np.stack([_cached_generator(*_split_digit(d)) for d in range(alphabet.size)])
    table.setflags(write=False)
    return table


def _split_digit(digit: int) -> tuple[int, bool]:
    return digit % N_GENERATORS + 1, digit >= N_GENERATORS


def generator_table(alphabet: Alphabet | str = Alphabet.BASIC) -> np.ndarray:
    """Stacked generator matrices indexed by operator digit."""
    return _table(Alphabet(alphabet))


def evaluate_braid(word: BraidWord) -> np.ndarray:
    """Ordered product of the generator matrices of ``word`` (I5 if empty)."""
    table = _table(Alphabet.EXTENDED)
    return _kernels.fold_word(table, word.digits)


def parse_braid_string(s: str, alphabet: Alphabet | str = Alphabet.BASIC) -> BraidWord:
    alphabet = Alphabet(alphabet)
    limit = alphabet.size
    digits = []
    for pos, ch in enumerate(s):
        if not ch.isdigit() or not ch.isascii():
            raise BraidParseError(f"invalid character {ch!r} at position {pos}", pos)
        d = int(ch)
        if d >= limit:
            raise BraidParseError(
                f"digit {ch!r} at position {pos} is outside the {alphabet.value} alphabet (0-{limit - 1})",
                pos)
        digits.append(d)
    return BraidWord.from_digits(digits, alphabet)


def format_braid_string(word: BraidWord) -> str:
    return "".join(str(t.digit) for t in word.tokens)


# -- matrix text dump ---------------------------------------------------------

def _fmt_real(x: float) -> str:
    # -0.0 -> 0 keeps dumps stable across sign-of-zero noise.
    return format(float(x) + 0.0, ".17g")


def format_complex(z: complex) -> str:
    im = _fmt_real(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{_fmt_real(z.real)}{im}i"


def format_matrix(m: np.ndarray) -> str:
    """Rows of space-separated ``re<sign>im i`` fields, 17 significant digits."""
    m = np.asarray(m)
    return "\n".join(" ".join(format_complex(complex(z)) for z in row) for row in m) + "\n"


_FIELD = re.compile(
    r"^(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"(?:(?P<im>[+-](?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)[ij])?$")


def parse_complex(text: str) -> complex:
    m = _FIELD.match(text)
    if m is None:
        raise MatrixParseError(f"malformed complex field {text!r}")
    return complex(float(m["re"]), float(m["im"] or 0.0))


def parse_matrix(text: str, sizes: Sequence[int] = (4, 5)) -> np.ndarray:
    """Parse a square matrix dump; blank lines and ``#`` comments are skipped."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([parse_complex(f) for f in line.split()])
        except MatrixParseError as exc:
            raise MatrixParseError(f"line {lineno}: {exc}") from None
    n = len(rows)
    if n not in sizes:
        raise MatrixParseError(f"expected a square matrix of size {' or '.join(map(str, sizes))}, got {n} rows")
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MatrixParseError(f"row {i + 1} has {len(row)} entries, expected {n}")
    return np.array(rows, dtype=np.complex128)

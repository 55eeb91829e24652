"""Exhaustive and seeded random search over braid words.

Each candidate word is evaluated to its 5x5 matrix, screened by the unitarity
of its computational block and, if accepted, scored against the objective:

* ``gate``   normalized Hilbert-Schmidt distance to a target 4x4 gate,
* ``class``  squared invariant distance to a local equivalence class,
* ``survey`` squared invariant distance to the closest catalog class.

Results are the ``top_k`` records ordered by
``(objective_distance, length, operator string, draw index)``.

Exhaustive mode splits the word space by prefix; each block is extended depth
first with one 5x5 product per node. Random mode draws fixed-size chunks of
words, chunk ``c`` of length ``L`` using
``PCG64(SeedSequence(seed, spawn_key=(L, c)))``. Neither partitioning depends
on the worker count, and all floating point work goes through the same
compiled kernels, so the output is identical for any number of workers.
"""
from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import __version__, _kernels
from .anyon_core import Alphabet, BraidWord, GeneratorToken, generator_matrix, generator_table
from .gate_metrics import (CNOT_TARGET, DEFAULT_LEAKAGE_THRESHOLD,
                           DEFAULT_UNITARITY_THRESHOLD, TargetGate)
from .local_invariants import CATALOG, EquivalenceClass, LocalInvariants

__all__ = [
    "BudgetExceededError",
    "DEFAULT_BUDGET",
    "Objective",
    "ObjectiveKind",
    "RANDOM_CHUNK",
    "SearchConfig",
    "SearchMode",
    "SearchRecord",
    "SearchResult",
    "chunk_words",
    "enumerate_words",
    "incremental_evaluator",
    "partition_search",
    "run_search",
    "score_matrices",
    "word_count",
]

DEFAULT_BUDGET = 5 ** 14
RANDOM_CHUNK = 8192
PRNG_NAME = "numpy.random.PCG64"

# Leaves per exhaustive block: 5**7 basic, 10**5 extended.
_BLOCK_DEPTH = {Alphabet.BASIC: 7, Alphabet.EXTENDED: 5}

_CATALOG_G = np.array([c.g for c in CATALOG], dtype=np.float64)


class BudgetExceededError(RuntimeError):
    pass


class SearchMode(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    RANDOM = "random"


class ObjectiveKind(str, enum.Enum):
    GATE = "gate"
    CLASS = "class"
    SURVEY = "survey"


@dataclass(frozen=True)
class Objective:
    kind: ObjectiveKind
    gate: TargetGate | None = None
    target_class: EquivalenceClass | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if self.kind is ObjectiveKind.GATE and self.gate is None:
            raise ValueError("gate objective needs a target gate")
        if self.kind is ObjectiveKind.CLASS and self.target_class is None:
            raise ValueError("class objective needs an equivalence class")

    @classmethod
    def to_gate(cls, gate: TargetGate = CNOT_TARGET) -> "Objective":
        return cls(ObjectiveKind.GATE, gate=gate)

    @classmethod
    def to_class(cls, target: EquivalenceClass) -> "Objective":
        return cls(ObjectiveKind.CLASS, target_class=target)

    @classmethod
    def survey(cls) -> "Objective":
        return cls(ObjectiveKind.SURVEY)

    @property
    def label(self) -> str:
        if self.kind is ObjectiveKind.GATE:
            return f"gate:{self.gate.name}"
        if self.kind is ObjectiveKind.CLASS:
            return f"class:{self.target_class.name}"
        return "survey"


@dataclass(frozen=True)
class SearchConfig:
    objective: Objective
    lengths: tuple[int, int] | int
    alphabet: Alphabet = Alphabet.BASIC
    mode: SearchMode = SearchMode.EXHAUSTIVE
    sample_count: int = 100_000
    seed: int = 0
    unitarity_threshold: float = DEFAULT_UNITARITY_THRESHOLD
    leakage_threshold: float = DEFAULT_LEAKAGE_THRESHOLD
    strict_leakage: bool = False
    top_k: int | None = 10
    reduce_words: bool = False
    dedup: bool = False
    budget: int = DEFAULT_BUDGET
    accept_target: int | None = None
    with_invariants: bool = False

    def __post_init__(self):
        lengths = self.lengths
        if isinstance(lengths, (int, np.integer)):
            lengths = (int(lengths), int(lengths))
        lo, hi = (int(x) for x in lengths)
        object.__setattr__(self, "lengths", (lo, hi))
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        object.__setattr__(self, "mode", SearchMode(self.mode))
        if lo < 1 or hi < lo:
            raise ValueError(f"invalid length range {lo}..{hi}")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be >= 1 (or None for all accepted records)")
        if self.mode is SearchMode.RANDOM:
            if self.sample_count < 1:
                raise ValueError("sample_count must be >= 1 in random mode")
            if not 0 <= self.seed < 2 ** 64:
                raise ValueError("seed must be an unsigned 64-bit integer")
        if self.accept_target is not None and self.accept_target < 1:
            raise ValueError("accept_target must be >= 1")
        if not self.unitarity_threshold > 0:
            raise ValueError("unitarity_threshold must be positive")

    @property
    def length_range(self) -> range:
        return range(self.lengths[0], self.lengths[1] + 1)

    def describe(self) -> dict:
        d = asdict(self)
        d["objective"] = self.objective.label
        d["alphabet"] = self.alphabet.value
        d["mode"] = self.mode.value
        d["lengths"] = list(self.lengths)
        return d


@dataclass(frozen=True)
class SearchRecord:
    word: BraidWord
    m11_norm: float
    d_unitary: float
    objective_distance: float
    invariants: LocalInvariants | None = None
    closest: str | None = None
    closest_distance: float | None = None
    draw: int = field(default=0, compare=False, repr=False)

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def operator(self) -> str:
        return str(self.word)

    @property
    def leakage_delta(self) -> float:
        return abs(1.0 - self.m11_norm)

    def sort_key(self) -> tuple:
        return (self.objective_distance, self.length, self.operator, self.draw)


@dataclass
class SearchResult:
    """Ranked records plus the configuration and counters that produced them."""

    config: SearchConfig
    records: list[SearchRecord]
    evaluated: int
    accepted: int
    provenance: dict

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SearchRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


# -- word space ---------------------------------------------------------------

def _inverse_digit(d: int) -> int:
    return (d + 5) % 10


def _reducing(alphabet: Alphabet, reduce_words: bool) -> bool:
    return reduce_words and alphabet is Alphabet.EXTENDED


def _allowed(alphabet: Alphabet, reduce_words: bool) -> np.ndarray:
    ng = alphabet.size
    allowed = np.ones((ng, ng), dtype=np.bool_)
    if _reducing(alphabet, reduce_words):
        for p in range(ng):
            allowed[p, _inverse_digit(p)] = False
    return allowed


def word_count(alphabet: Alphabet | str, length: int, reduce_words: bool = False) -> int:
    alphabet = Alphabet(alphabet)
    ng = alphabet.size
    if _reducing(alphabet, reduce_words):
        return ng * (ng - 1) ** (length - 1)
    return ng ** length


def _digit_tuples(alphabet: Alphabet, length: int, reduce_words: bool) -> Iterator[tuple[int, ...]]:
    reducing = _reducing(alphabet, reduce_words)
    for digits in itertools.product(range(alphabet.size), repeat=length):
        if reducing and any(b == _inverse_digit(a) for a, b in zip(digits, digits[1:])):
            continue
        yield digits


def enumerate_words(alphabet: Alphabet | str, length: int, reduce_words: bool = False) -> Iterator[BraidWord]:
    """Every word of ``length`` exactly once, in lexicographic digit order."""
    if length < 1:
        raise ValueError("length must be >= 1")
    alphabet = Alphabet(alphabet)
    for digits in _digit_tuples(alphabet, length, reduce_words):
        yield BraidWord.from_digits(digits, alphabet)


def incremental_evaluator(prefix_product: np.ndarray, next_token: GeneratorToken) -> np.ndarray:
    """``prefix_product @ G(next_token)`` through the shared product kernel."""
    out = np.empty((5, 5), dtype=np.complex128)
    _kernels.mul_gen(np.ascontiguousarray(prefix_product, dtype=np.complex128),
                     generator_matrix(next_token), out)
    return out


def chunk_words(alphabet: Alphabet | str, length: int, seed: int, chunk: int,
                count: int = RANDOM_CHUNK) -> np.ndarray:
    """Digit array drawn for random-mode chunk ``chunk`` of words of ``length``."""
    alphabet = Alphabet(alphabet)
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(length), int(chunk)))
    rng = np.random.Generator(np.random.PCG64(ss))
    return rng.integers(0, alphabet.size, size=(count, length), dtype=np.uint8)


# -- scoring ------------------------------------------------------------------

@dataclass
class _Scores:
    accepted: np.ndarray
    m11_norm: np.ndarray
    d_unitary: np.ndarray
    objective: np.ndarray
    inv: np.ndarray
    closest: np.ndarray


def score_matrices(mats: np.ndarray, config: SearchConfig) -> _Scores:
    """Run the compiled filter and objective over a stack of 5x5 matrices."""
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    n = mats.shape[0]
    obj = config.objective
    kind = {ObjectiveKind.GATE: _kernels.OBJ_GATE,
            ObjectiveKind.CLASS: _kernels.OBJ_CLASS,
            ObjectiveKind.SURVEY: _kernels.OBJ_SURVEY}[obj.kind]
    if obj.kind is ObjectiveKind.GATE:
        target = obj.gate.matrix / np.linalg.norm(obj.gate.matrix)
    else:
        target = np.zeros((4, 4), dtype=np.complex128)
    target = np.ascontiguousarray(target, dtype=np.complex128)
    class_g = np.array(obj.target_class.g if obj.target_class else (0.0, 0.0, 0.0))
    s = _Scores(
        accepted=np.empty(n, dtype=np.bool_),
        m11_norm=np.empty(n),
        d_unitary=np.empty(n),
        objective=np.empty(n),
        inv=np.empty((n, 4)),
        closest=np.empty(n, dtype=np.int64),
    )
    _kernels.score_batch(mats, kind, target, class_g, _CATALOG_G,
                         float(config.unitarity_threshold), float(config.leakage_threshold),
                         bool(config.strict_leakage), bool(config.with_invariants),
                         s.accepted, s.m11_norm, s.d_unitary, s.objective, s.inv, s.closest)
    return s


def _make_record(s: _Scores, i: int, word: BraidWord, draw: int = 0) -> SearchRecord:
    inv = None
    closest = None
    closest_d = None
    if not np.isnan(s.inv[i, 0]):
        g = s.inv[i]
        inv = LocalInvariants(float(g[0]), float(g[1]), float(g[2]), float(g[3]))
        c = CATALOG[int(s.closest[i])]
        closest = c.name
        closest_d = float(((_CATALOG_G[s.closest[i]] - g[:3]) ** 2).sum())
    return SearchRecord(
        word=word,
        m11_norm=float(s.m11_norm[i]),
        d_unitary=float(s.d_unitary[i]),
        objective_distance=float(s.objective[i]),
        invariants=inv,
        closest=closest,
        closest_distance=closest_d,
        draw=draw,
    )


def _top_indices(s: _Scores, keys: Sequence[np.ndarray], top_k: int | None) -> np.ndarray:
    """Accepted indices ordered by objective then ``keys`` (most significant first)."""
    idx = np.flatnonzero(s.accepted)
    if top_k is not None and idx.size > top_k:
        o = s.objective[idx]
        kth = np.partition(o, top_k - 1)[top_k - 1]
        idx = idx[o <= kth]
    order = np.lexsort(tuple(k[idx] for k in reversed(keys)) + (s.objective[idx],))
    idx = idx[order]
    return idx if top_k is None else idx[:top_k]


# -- exhaustive ---------------------------------------------------------------

def _decode(code: int, ng: int, length: int) -> list[int]:
    digits = [0] * length
    for pos in range(length - 1, -1, -1):
        code, digits[pos] = divmod(code, ng)
    return digits


def _exhaustive_blocks(config: SearchConfig) -> list[tuple[int, tuple[int, ...]]]:
    blocks = []
    for length in config.length_range:
        p = max(length - _BLOCK_DEPTH[config.alphabet], 1 if length > 1 else 0)
        for prefix in _digit_tuples(config.alphabet, p, config.reduce_words):
            blocks.append((length, prefix))
    return blocks


def _run_block(config: SearchConfig, length: int, prefix: tuple[int, ...]):
    alphabet = config.alphabet
    ng = alphabet.size
    table = generator_table(alphabet)
    depth = length - len(prefix)
    prefix_m = _kernels.fold_word(table, np.array(prefix, dtype=np.uint8))
    code = 0
    for d in prefix:
        code = code * ng + d
    last = prefix[-1] if prefix else -1
    cap = ng ** depth
    out_codes = np.empty(cap, dtype=np.int64)
    out_mats = np.empty((cap, 5, 5), dtype=np.complex128)
    floor = max(0.0, 1.0 - config.unitarity_threshold - 2 * _kernels.SCREEN_MARGIN)
    n, leaves = _kernels.dfs_leaves(prefix_m, code, last, table, depth,
                                    _allowed(alphabet, config.reduce_words),
                                    floor, out_codes, out_mats)
    codes = out_codes[:n]
    s = score_matrices(out_mats[:n], config)
    accepted = int(s.accepted.sum())
    records = [
        _make_record(s, i, BraidWord.from_digits(_decode(int(codes[i]), ng, length), alphabet))
        for i in _top_indices(s, [codes], config.top_k)
    ]
    return records, leaves, accepted


def _exhaustive_total(config: SearchConfig) -> int:
    return sum(word_count(config.alphabet, L, config.reduce_words) for L in config.length_range)


def _map(worker_count: int, fn, items):
    if worker_count <= 1:
        return [fn(*it) for it in items]
    with ThreadPoolExecutor(max_workers=worker_count) as pool:
        return list(pool.map(lambda it: fn(*it), items))


def _finalize(config: SearchConfig, records: list[SearchRecord]) -> list[SearchRecord]:
    records.sort(key=SearchRecord.sort_key)
    if config.dedup:
        seen = set()
        unique = []
        for r in records:
            if r.operator not in seen:
                seen.add(r.operator)
                unique.append(r)
        records = unique
    return records if config.top_k is None else records[:config.top_k]


def _search_exhaustive(config: SearchConfig, worker_count: int):
    total = _exhaustive_total(config)
    if total >= config.budget:
        raise BudgetExceededError(
            f"exhaustive search over {total} words reaches the enumeration budget of "
            f"{config.budget} (the budget is an exclusive bound); raise the budget or use random mode")
    items = [(config, L, prefix) for L, prefix in _exhaustive_blocks(config)]
    out = _map(worker_count, _run_block, items)
    records = [r for recs, _, _ in out for r in recs]
    evaluated = sum(leaves for _, leaves, _ in out)
    accepted = sum(a for _, _, a in out)
    return _finalize(config, records), evaluated, accepted, {}


# -- random -------------------------------------------------------------------

def _reducible_rows(words: np.ndarray) -> np.ndarray:
    if words.shape[1] < 2:
        return np.zeros(words.shape[0], dtype=np.bool_)
    a = words[:, :-1].astype(np.int16)
    b = words[:, 1:].astype(np.int16)
    return ((a + 5) % 10 == b).any(axis=1)


def _run_chunk(config: SearchConfig, length: int, chunk: int, keep_all: bool):
    count = min(RANDOM_CHUNK, config.sample_count - chunk * RANDOM_CHUNK)
    words = chunk_words(config.alphabet, length, config.seed, chunk, RANDOM_CHUNK)[:count]
    draws = chunk * RANDOM_CHUNK + np.arange(count, dtype=np.int64)
    keep = np.ones(count, dtype=np.bool_)
    if _reducing(config.alphabet, config.reduce_words):
        keep &= ~_reducible_rows(words)
    if config.dedup:
        _, first = np.unique(words, axis=0, return_index=True)
        mask = np.zeros(count, dtype=np.bool_)
        mask[first] = True
        keep &= mask
    words, draws = words[keep], draws[keep]
    mats = np.empty((words.shape[0], 5, 5), dtype=np.complex128)
    _kernels.fold_batch(generator_table(config.alphabet), words, mats)
    s = score_matrices(mats, config)
    accepted = int(s.accepted.sum())
    if keep_all:
        idx = np.flatnonzero(s.accepted)
    else:
        keys = [words[:, j] for j in range(length)] + [draws]
        idx = _top_indices(s, keys, config.top_k)
    records = [_make_record(s, i, BraidWord.from_digits(words[i], config.alphabet), int(draws[i]))
               for i in idx]
    return records, int(words.shape[0]), accepted


def _search_random(config: SearchConfig, worker_count: int):
    n_chunks = math.ceil(config.sample_count / RANDOM_CHUNK)
    records: list[SearchRecord] = []
    evaluated = 0
    accepted = 0
    reached = {}
    for length in config.length_range:
        if config.accept_target is None:
            out = _map(worker_count, _run_chunk,
                       [(config, length, c, False) for c in range(n_chunks)])
            for recs, ev, acc in out:
                records.extend(recs)
                evaluated += ev
                accepted += acc
            continue
        # Stop at the first accept_target accepted draws, in draw order.
        kept: list[SearchRecord] = []
        seen: set[str] = set()
        window = max(1, worker_count)
        c = 0
        while c < n_chunks and len(kept) < config.accept_target:
            batch = [(config, length, k, True) for k in range(c, min(c + window, n_chunks))]
            for recs, ev, _ in _map(worker_count, _run_chunk, batch):
                if len(kept) >= config.accept_target:
                    break
                evaluated += ev
                for r in recs:
                    if config.dedup and r.operator in seen:
                        continue
                    seen.add(r.operator)
                    kept.append(r)
            c += len(batch)
        kept = kept[:config.accept_target]
        reached[length] = len(kept)
        accepted += len(kept)
        records.extend(kept)
    extra = {"accepted_per_length": reached} if config.accept_target is not None else {}
    return _finalize(config, records), evaluated, accepted, extra


# -- entry points -------------------------------------------------------------

def partition_search(config: SearchConfig, worker_count: int = 1) -> SearchResult:
    """Run ``config`` over ``worker_count`` threads; output does not depend on it."""
    if worker_count < 1:
        raise ValueError("worker_count must be >= 1")
    if config.mode is SearchMode.EXHAUSTIVE:
        records, evaluated, accepted, extra = _search_exhaustive(config, worker_count)
    else:
        records, evaluated, accepted, extra = _search_random(config, worker_count)
    provenance = {
        "package": f"fibbraid {__version__}",
        "numpy": np.__version__,
        "config": config.describe(),
        "evaluated": evaluated,
        "accepted": accepted,
        "ordering": "objective_distance, length, operator, draw",
    }
    if config.mode is SearchMode.RANDOM:
        provenance["prng"] = {
            "algorithm": PRNG_NAME,
            "seeding": "SeedSequence(seed, spawn_key=(length, chunk))",
            "chunk_size": RANDOM_CHUNK,
            "draw": "Generator.integers(0, alphabet_size, size=(chunk_size, length), dtype=uint8)",
        }
    provenance.update(extra)
    return SearchResult(config, records, evaluated, accepted, provenance)


def run_search(config: SearchConfig) -> SearchResult:
    return partition_search(config, 1)

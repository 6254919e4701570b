"""Offline phase: multi-level residual + SAX word index and its text file format."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pla
from .sax import (
    SaxWord,
    breakpoints,
    check_alphabet,
    check_frames,
    letters_to_symbols,
    paa_values,
    symbols_to_letters,
    symbolize_values,
)
from .series import Dataset

MAGIC = "FASTSAX 1"


class IndexFormatError(ValueError):
    """Raised when an index file is malformed, truncated or corrupted."""


@dataclass(frozen=True)
class LevelConfig:
    """Frame counts ordered from the lowest level (most frames) upward."""

    levels: tuple[int, ...]
    alphabet_size: int

    def __post_init__(self):
        levels = tuple(int(N) for N in self.levels)
        if not levels:
            raise ValueError("at least one level is required")
        if any(N < 1 for N in levels):
            raise ValueError(f"frame counts must be positive, got {levels}")
        if any(a <= b for a, b in zip(levels, levels[1:])):
            raise ValueError(f"levels must be strictly decreasing frame counts, got {levels}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "alphabet_size", check_alphabet(self.alphabet_size))

    def validate(self, n: int) -> "LevelConfig":
        for N in self.levels:
            check_frames(n, N)
        return self

    def __len__(self):
        return len(self.levels)


def default_levels(n: int) -> tuple[int, ...]:
    """Divisors of ``n`` closest to ``n/4``, ``n/8`` and ``n/16`` (at least 2 frames)."""
    divisors = [d for d in range(2, n + 1) if n % d == 0]
    picked = set()
    for target in (n / 4, n / 8, n / 16):
        picked.add(min(divisors, key=lambda d: (abs(d - target), -d)))
    return tuple(sorted(picked, reverse=True))


@dataclass(frozen=True)
class LevelEntry:
    residual: float
    word: SaxWord


class MultiLevelIndex:
    """Per-series residuals and SAX words for every level.

    ``residuals`` has shape ``(count, L)``; ``words[l]`` is a ``(count, N_l)``
    uint8 symbol matrix. Rows follow ``ids`` order.
    """

    def __init__(self, config: LevelConfig, n: int, ids, residuals, words, dataset_fingerprint: str):
        config.validate(n)
        self.config = config
        self.n = int(n)
        self.ids = list(ids)
        self.residuals = np.asarray(residuals, dtype=np.float64)
        self.words = [np.asarray(w, dtype=np.uint8) for w in words]
        self.dataset_fingerprint = dataset_fingerprint
        count, L = len(self.ids), len(config)
        if self.residuals.shape != (count, L):
            raise ValueError(f"residual matrix shape {self.residuals.shape}, expected {(count, L)}")
        for N, w in zip(config.levels, self.words):
            if w.shape != (count, N):
                raise ValueError(f"word matrix shape {w.shape}, expected {(count, N)}")
        self.residuals.setflags(write=False)
        for w in self.words:
            w.setflags(write=False)

    @property
    def table(self):
        return breakpoints(self.config.alphabet_size)

    def __len__(self):
        return len(self.ids)

    def entry(self, row: int, level: int) -> LevelEntry:
        word = SaxWord(self.words[level][row].copy(), self.config.alphabet_size, self.n)
        return LevelEntry(float(self.residuals[row, level]), word)

    def entries(self, row: int) -> list[LevelEntry]:
        return [self.entry(row, level) for level in range(len(self.config))]

    def __eq__(self, other):
        if not isinstance(other, MultiLevelIndex):
            return NotImplemented
        return (
            self.config == other.config
            and self.n == other.n
            and self.ids == other.ids
            and self.dataset_fingerprint == other.dataset_fingerprint
            and np.array_equal(self.residuals, other.residuals)
            and all(np.array_equal(a, b) for a, b in zip(self.words, other.words))
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"MultiLevelIndex(count={len(self)}, n={self.n}, levels={self.config.levels}, "
            f"a={self.config.alphabet_size})"
        )


def build_index(dataset: Dataset, config: LevelConfig) -> MultiLevelIndex:
    """Compute residuals and SAX words for every series at every level.

    An unnormalized dataset is z-normalized first; the fingerprint always
    refers to the normalized values.
    """
    config.validate(dataset.n)
    data = dataset.normalize()
    table = breakpoints(config.alphabet_size)
    residuals = np.empty((len(data), len(config)))
    words = []
    for level, N in enumerate(config.levels):
        residuals[:, level] = pla.residuals(data.values, N)
        words.append(symbolize_values(paa_values(data.values, N), table))
    return MultiLevelIndex(config, data.n, data.ids, residuals, words, data.fingerprint())


def _serialize(idx: MultiLevelIndex) -> str:
    cfg = idx.config
    lines = [
        MAGIC,
        f"n={idx.n} a={cfg.alphabet_size} levels={','.join(map(str, cfg.levels))} count={len(idx)}",
        f"fingerprint={idx.dataset_fingerprint}",
    ]
    for row, sid in enumerate(idx.ids):
        for level in range(len(cfg)):
            res = f"{idx.residuals[row, level]:.17g}"
            lines.append(f"{sid} {level} {res} {symbols_to_letters(idx.words[level][row])}")
    body = "".join(line + "\n" for line in lines)
    return body + f"checksum={hashlib.sha256(body.encode('utf-8')).hexdigest()}\n"


def save_index(idx: MultiLevelIndex, path) -> None:
    for sid in idx.ids:
        text = str(sid)
        if not text or any(c.isspace() for c in text):
            raise ValueError(f"series id {sid!r} cannot be stored: empty or contains whitespace")
    Path(path).write_bytes(_serialize(idx).encode("utf-8"))


def _parse_id(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def _header_fields(line: str, keys) -> dict:
    fields = dict(part.split("=", 1) for part in line.split(" ") if "=" in part)
    if sorted(fields) != sorted(keys) or len(line.split(" ")) != len(keys):
        raise IndexFormatError(f"malformed header line: {line!r}")
    return fields


def load_index(path) -> MultiLevelIndex:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IndexFormatError(f"{path}: not valid UTF-8 text (corrupted?): {exc}") from None
    first = text.split("\n", 1)[0]
    if first != MAGIC:
        raise IndexFormatError(f"{path}: unknown format/version {first[:40]!r}, expected {MAGIC!r}")
    if not text.endswith("\n"):
        raise IndexFormatError(f"{path}: truncated file (no trailing newline)")
    cut = text.rfind("\n", 0, len(text) - 1) + 1
    body, last = text[:cut], text[cut:-1]
    if not last.startswith("checksum="):
        raise IndexFormatError(f"{path}: truncated file (missing checksum line)")
    expected = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if last[len("checksum="):] != expected:
        raise IndexFormatError(f"{path}: checksum mismatch, file is corrupted")

    lines = body.split("\n")[:-1]
    if len(lines) < 3:
        raise IndexFormatError(f"{path}: truncated header")
    try:
        head = _header_fields(lines[1], ("n", "a", "levels", "count"))
        n, a, count = int(head["n"]), int(head["a"]), int(head["count"])
        config = LevelConfig(tuple(int(v) for v in head["levels"].split(",")), a)
        config.validate(n)
    except (ValueError, KeyError) as exc:
        raise IndexFormatError(f"{path}: bad header: {exc}") from None
    fp = _header_fields(lines[2], ("fingerprint",))["fingerprint"]

    L = len(config)
    records = lines[3:]
    if len(records) != count * L:
        raise IndexFormatError(f"{path}: expected {count * L} entry lines, found {len(records)}")
    ids = []
    residuals = np.empty((count, L))
    words = [np.empty((count, N), dtype=np.uint8) for N in config.levels]
    for k, line in enumerate(records):
        row, level = divmod(k, L)
        parts = line.split(" ")
        try:
            if len(parts) != 4 or int(parts[1]) != level:
                raise ValueError("bad field layout")
            sid = _parse_id(parts[0])
            residuals[row, level] = float(parts[2])
            symbols = letters_to_symbols(parts[3], a)
            if symbols.shape[0] != config.levels[level]:
                raise ValueError(f"word length {symbols.shape[0]}, expected {config.levels[level]}")
            words[level][row] = symbols
        except ValueError as exc:
            raise IndexFormatError(f"{path}: entry line {k + 4}: {exc}") from None
        if level == 0:
            ids.append(sid)
        elif sid != ids[row]:
            raise IndexFormatError(f"{path}: entry line {k + 4}: id {sid!r} out of order")
    if len(set(ids)) != len(ids):
        raise IndexFormatError(f"{path}: duplicate series ids")
    return MultiLevelIndex(config, n, ids, residuals, words, fp)

"""Computads and allowed-word algebra.

A computad here is a set of generating 0-, 1-, 2-cells in the whiskered
presentation: 1-generators have source and target 0-generators, and
2-generators have source and target *words* of 1-generators.  Words chain
through matching endpoints; the empty word carries an explicit anchor
0-generator so that its endpoints are defined.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .errors import ChainError
from .report import ValidationReport


@dataclass(frozen=True, order=True)
class K1Entry:
    """A 1-generator: either a signed surface label or a transparent unit."""

    label: str
    sign: int  # +1 / -1 for signed entries, 0 for unit entries
    src: str
    tgt: str

    @property
    def is_unit(self) -> bool:
        return self.sign == 0

    def flipped(self) -> "K1Entry":
        if self.is_unit:
            return self
        return K1Entry(self.label, -self.sign, self.tgt, self.src)

    def __str__(self) -> str:
        if self.is_unit:
            return f"unit:{self.label}"
        return f"{self.label}:{'+' if self.sign > 0 else '-'}"


def unit_entry(u: str) -> K1Entry:
    return K1Entry(u, 0, u, u)


def signed_entry(label: str, sign: int, src: str, tgt: str) -> K1Entry:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return K1Entry(label, sign, src, tgt)


@dataclass(frozen=True)
class Word:
    """A chain of 1-generators; empty words carry an anchor 0-generator."""

    entries: tuple[K1Entry, ...]
    anchor: str | None = None

    def __post_init__(self):
        if not self.entries and self.anchor is None:
            raise ChainError("empty word needs an anchor")
        for a, b in zip(self.entries, self.entries[1:]):
            if a.tgt != b.src:
                raise ChainError(f"entries do not chain: {a} then {b}")

    @property
    def src(self) -> str:
        return self.entries[0].src if self.entries else self.anchor

    @property
    def tgt(self) -> str:
        return self.entries[-1].tgt if self.entries else self.anchor

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        if not self.entries:
            return f"()@{self.anchor}"
        return "(" + ",".join(map(str, self.entries)) + ")"


@dataclass(frozen=True)
class Computad:
    """Generating cells with source/target maps."""

    k2: tuple[str, ...]
    k1: dict[str, K1Entry]
    k0: dict[str, tuple[Word, Word]]


def reverse_word(w: Word) -> Word:
    """Reverse the entry order and flip signs; unit entries are unchanged."""
    return Word(tuple(e.flipped() for e in reversed(w.entries)), anchor=w.anchor)


def concat_words(a: Word, b: Word) -> Word:
    """Concatenate two chains; the target of the first must match."""
    if a.tgt != b.src:
        raise ChainError(f"cannot concatenate: target {a.tgt} != source {b.src}")
    if not a.entries and not b.entries:
        return Word((), anchor=a.anchor)
    return Word(a.entries + b.entries)


def allowed_words(k: Computad, m: int) -> list[Word]:
    """All chains of m 1-generators; for m = 0, one empty word per 0-generator."""
    if m < 0:
        raise ValueError("word length must be nonnegative")
    if m == 0:
        return [Word((), anchor=u) for u in k.k2]
    entries = [k.k1[name] for name in sorted(k.k1)]
    words = []
    for combo in itertools.product(entries, repeat=m):
        if all(a.tgt == b.src for a, b in zip(combo, combo[1:])):
            words.append(Word(combo))
    return words


def validate_computad(k: Computad) -> ValidationReport:
    """Compatibility of 2-generator boundaries with 1-generator endpoints."""
    report = ValidationReport()
    for name in sorted(k.k0):
        src, tgt = k.k0[name]
        if src.src != tgt.src:
            report.add(
                f"2-generator {name!r}: source-of-source {src.src} != source-of-target {tgt.src}"
            )
        if src.tgt != tgt.tgt:
            report.add(
                f"2-generator {name!r}: target-of-source {src.tgt} != target-of-target {tgt.tgt}"
            )
        for word in (src, tgt):
            for entry in word.entries:
                if entry.src not in k.k2 or entry.tgt not in k.k2:
                    report.add(
                        f"2-generator {name!r}: entry {entry} has endpoints outside k2"
                    )
    return report


def words_equal(a: Word, b: Word) -> bool:
    if len(a) != len(b):
        return False
    if not a.entries:
        return a.anchor == b.anchor
    return a.entries == b.entries


def brute_force_allowed_count(k: Computad, m: int) -> int:
    """Independent count of allowed words by filtering all m-tuples."""
    if m == 0:
        return len(k.k2)
    names = sorted(k.k1)
    count = 0
    for combo in itertools.product(names, repeat=m):
        entries = [k.k1[n] for n in combo]
        if all(x.tgt == y.src for x, y in zip(entries, entries[1:])):
            count += 1
    return count

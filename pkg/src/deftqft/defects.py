"""Defect label data: label sets, folding maps, and the derived computad.

A defect datum is a triple of label sets for 3-, 2- and 1-dimensional strata
together with source/target maps on surface labels and, for every line label,
the cyclic signed list of surface labels allowed around it.  Two standard
families are provided: the group family (surfaces labelled by group elements,
lines by cyclic words multiplying to the identity) and the ribbon family
(a single transparent surface label with exactly one positively oriented
sheet around every line).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .computads import Computad, K1Entry, Word, signed_entry, unit_entry
from .errors import DefectDataError, GroupError, LabelError
from .groups import GroupTable
from .report import ValidationReport

Sign = int  # +1 or -1

SIGN_CHAR = {1: "+", -1: "-"}


@dataclass(frozen=True, order=True)
class SignedLabel:
    """A surface label together with an orientation sign."""

    label: str
    sign: Sign

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def flipped(self) -> "SignedLabel":
        return SignedLabel(self.label, -self.sign)

    def __str__(self) -> str:
        return f"{self.label}:{SIGN_CHAR[self.sign]}"


def _sort_key(entry: SignedLabel):
    return (entry.label, 0 if entry.sign > 0 else 1)


@dataclass(frozen=True)
class CyclicWord:
    """A nonempty cyclic word of signed labels, stored in canonical rotation.

    The canonical rotation is the lexicographically minimal one under the
    order (label, sign) with "+" before "-"; equality of cyclic words is
    equality of canonical rotations.
    """

    entries: tuple[SignedLabel, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ValueError("cyclic words have length >= 1")
        object.__setattr__(self, "entries", canonical_rotation(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def rotated(self, k: int) -> "CyclicWord":
        n = len(self.entries)
        k %= n
        return CyclicWord(self.entries[k:] + self.entries[:k])

    def reversed(self) -> "CyclicWord":
        return CyclicWord(tuple(e.flipped() for e in reversed(self.entries)))

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.entries)) + "]"


def canonical_rotation(entries: tuple[SignedLabel, ...]) -> tuple[SignedLabel, ...]:
    n = len(entries)
    rotations = [entries[k:] + entries[:k] for k in range(n)]
    return min(rotations, key=lambda rot: [_sort_key(e) for e in rot])


FoldImage = Union[CyclicWord, str]  # a cyclic word, or a d3 label for m = 0


class ExplicitD1:
    """A finite map from line labels to their folding images."""

    kind = "explicit"

    def __init__(self, table: dict[str, FoldImage]):
        self.table = dict(table)

    def items(self, max_len: int | None = None) -> Iterable[tuple[str, FoldImage]]:
        for key in sorted(self.table):
            image = self.table[key]
            if max_len is None or isinstance(image, str) or len(image) <= max_len:
                yield key, image

    def preimages(self, word: CyclicWord) -> tuple[str, ...]:
        return tuple(k for k, v in sorted(self.table.items())
                     if isinstance(v, CyclicWord) and v == word)

    def fold(self, label: str) -> FoldImage:
        try:
            return self.table[label]
        except KeyError:
            raise LabelError(f"unknown line label {label!r}") from None


class GroupD1:
    """Lines of the group family: cyclic words with signed product one.

    The set is infinite, so membership is an oracle and enumeration is
    bounded by a maximal word length.
    """

    kind = "group"

    def __init__(self, group: GroupTable, max_len: int = 8):
        self.group = group
        self.max_len = max_len

    def accepts(self, word: CyclicWord) -> bool:
        try:
            pairs = [(self.group.index(e.label), e.sign) for e in word.entries]
        except GroupError:
            return False
        return self.group.signed_product(pairs) == self.group.identity

    def label_for(self, word: CyclicWord) -> str:
        return str(word)

    def preimages(self, word: CyclicWord) -> tuple[str, ...]:
        return (self.label_for(word),) if self.accepts(word) else ()

    def fold(self, label: str) -> FoldImage:
        word = _parse_word_label(label)
        if word is None or not self.accepts(word):
            raise LabelError(f"unknown line label {label!r}")
        return word

    def items(self, max_len: int | None = None) -> Iterable[tuple[str, FoldImage]]:
        bound = self.max_len if max_len is None else min(max_len, self.max_len)
        letters = [SignedLabel(g, s) for g in self.group.elements for s in (1, -1)]
        seen = set()
        for m in range(1, bound + 1):
            for combo in _tuples(letters, m):
                word = CyclicWord(combo)
                if word.entries != combo:  # only canonical representatives
                    continue
                if word in seen or not self.accepts(word):
                    continue
                seen.add(word)
                yield self.label_for(word), word


class RibbonD1:
    """Lines of the ribbon family over a set of object labels.

    A line label is a pair of an object label and a cyclic word over the
    single surface label with exactly one positive sign; the folding map
    projects to the word.
    """

    kind = "rt"

    def __init__(self, objects: tuple[str, ...], surface_label: str = "*", max_len: int = 8):
        if not objects:
            raise DefectDataError("ribbon family needs a nonempty object set")
        self.objects = tuple(sorted(objects))
        self.surface_label = surface_label
        self.max_len = max_len

    def accepts(self, word: CyclicWord) -> bool:
        if any(e.label != self.surface_label for e in word.entries):
            return False
        return sum(1 for e in word.entries if e.sign > 0) == 1

    def label_for(self, obj: str, word: CyclicWord) -> str:
        return f"{obj}@{word}"

    def preimages(self, word: CyclicWord) -> tuple[str, ...]:
        if not self.accepts(word):
            return ()
        return tuple(self.label_for(obj, word) for obj in self.objects)

    def fold(self, label: str) -> FoldImage:
        obj, _, rest = label.partition("@")
        word = _parse_word_label(rest)
        if obj not in self.objects or word is None or not self.accepts(word):
            raise LabelError(f"unknown line label {label!r}")
        return word

    def items(self, max_len: int | None = None) -> Iterable[tuple[str, FoldImage]]:
        bound = self.max_len if max_len is None else min(max_len, self.max_len)
        for m in range(1, bound + 1):
            for plus_at in range(1):  # canonical rotation puts the + first
                entries = tuple(
                    SignedLabel(self.surface_label, 1 if k == plus_at else -1)
                    for k in range(m)
                )
                word = CyclicWord(entries)
                for obj in self.objects:
                    yield self.label_for(obj, word), word


D1Spec = Union[ExplicitD1, GroupD1, RibbonD1]


def _parse_word_label(text: str) -> CyclicWord | None:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        return None
    body = text[1:-1]
    if not body:
        return None
    entries = []
    for chunk in body.split(","):
        name, _, sign = chunk.rpartition(":")
        if sign not in ("+", "-") or not name:
            return None
        entries.append(SignedLabel(name, 1 if sign == "+" else -1))
    return CyclicWord(tuple(entries))


def _tuples(letters, m):
    if m == 0:
        yield ()
        return
    for rest in _tuples(letters, m - 1):
        for x in letters:
            yield rest + (x,)


@dataclass(frozen=True)
class DefectData:
    """Label sets with source/target maps and a folding map."""

    d3: tuple[str, ...]
    d2: dict[str, tuple[str, str]]  # label -> (source, target) in d3
    d1: D1Spec

    def __post_init__(self):
        object.__setattr__(self, "d3", tuple(sorted(set(self.d3))))
        for label, (s, t) in self.d2.items():
            if s not in self.d3 or t not in self.d3:
                raise DefectDataError(
                    f"surface label {label!r} has endpoints outside d3"
                )

    def source(self, label: str) -> str:
        return self._endpoints(label)[0]

    def target(self, label: str) -> str:
        return self._endpoints(label)[1]

    def _endpoints(self, label: str) -> tuple[str, str]:
        try:
            return self.d2[label]
        except KeyError:
            raise LabelError(f"unknown surface label {label!r}") from None


def signed_endpoint(dd: DefectData, x: SignedLabel, which: str) -> str:
    """Endpoint of a signed surface label; a negative sign swaps endpoints."""
    s, t = dd._endpoints(x.label)
    if which == "source":
        return s if x.sign > 0 else t
    if which == "target":
        return t if x.sign > 0 else s
    raise ValueError("which must be 'source' or 'target'")


def word_is_chain(dd: DefectData, word: CyclicWord) -> list[str]:
    """Violations of the cyclic chain condition for a folding-map image."""
    bad = []
    n = len(word.entries)
    for i in range(n):
        cur = word.entries[i]
        nxt = word.entries[(i + 1) % n]
        try:
            t_cur = signed_endpoint(dd, cur, "target")
            s_nxt = signed_endpoint(dd, nxt, "source")
        except LabelError as exc:
            bad.append(f"position {i}: {exc}")
            continue
        if t_cur != s_nxt:
            bad.append(
                f"position {i}: target({cur}) = {t_cur} != {s_nxt} = source({nxt})"
            )
    return bad


def validate_defect_data(dd: DefectData, max_len: int | None = None) -> ValidationReport:
    """Check the cyclic chain condition on every (enumerable) line label."""
    violations = []
    for label, image in dd.d1.items(max_len):
        if isinstance(image, str):
            if image not in dd.d3:
                violations.append(f"line {label!r}: fold image {image!r} not in d3")
            continue
        for detail in word_is_chain(dd, image):
            violations.append(f"line {label!r}: {detail}")
    return ValidationReport(violations)


def build_group_defect_data(group: GroupTable, max_len: int = 8) -> DefectData:
    """The group family: one 3-label, surfaces = group elements."""
    d2 = {g: ("*", "*") for g in group.elements}
    return DefectData(d3=("*",), d2=d2, d1=GroupD1(group, max_len))


def build_rt_defect_data(object_labels: Iterable[str], max_len: int = 8) -> DefectData:
    """The ribbon family: singleton label sets with object-decorated lines."""
    return DefectData(
        d3=("*",),
        d2={"*": ("*", "*")},
        d1=RibbonD1(tuple(object_labels), max_len=max_len),
    )


# ---------------------------------------------------------------------------
# The derived computad
# ---------------------------------------------------------------------------

def _k1_entry(dd: DefectData, sl: SignedLabel) -> K1Entry:
    return signed_entry(
        sl.label,
        sl.sign,
        signed_endpoint(dd, sl, "source"),
        signed_endpoint(dd, sl, "target"),
    )


def _signed_words(dd: DefectData, length: int) -> Iterable[tuple[SignedLabel, ...]]:
    """All chains of signed surface labels of the given length."""
    letters = [SignedLabel(a, s) for a in sorted(dd.d2) for s in (1, -1)]

    def extend(prefix: tuple[SignedLabel, ...]):
        if len(prefix) == length:
            yield prefix
            return
        for x in letters:
            if prefix and signed_endpoint(dd, x, "source") != signed_endpoint(
                dd, prefix[-1], "target"
            ):
                continue
            yield from extend(prefix + (x,))

    yield from extend(())


def build_computad(dd: DefectData, max_word_len: int = 8) -> Computad:
    """The computad generated by defect data.

    Generating 2-cells come in two kinds: one per 3-label, and one per pair
    of a line label and a splitting (A, A') of its folding word as A' followed
    by the reversed flip of A, with |A| + |A'| bounded by ``max_word_len``.
    """
    report = validate_defect_data(dd, max_len=max_word_len)
    if not report.clean:
        raise DefectDataError(f"invalid defect data: {report}")

    k2 = dd.d3
    k1: dict[str, K1Entry] = {}
    for u in dd.d3:
        k1[f"unit:{u}"] = unit_entry(u)
    for a in sorted(dd.d2):
        for s in (1, -1):
            sl = SignedLabel(a, s)
            k1[str(sl)] = _k1_entry(dd, sl)

    def word_of(entries: tuple[SignedLabel, ...], anchor: str) -> Word:
        if not entries:
            return Word((), anchor=anchor)
        return Word(tuple(_k1_entry(dd, e) for e in entries))

    k0: dict[str, tuple[Word, Word]] = {}
    for u in dd.d3:
        w = Word((), anchor=u)
        k0[f"unit:{u}"] = (w, w)

    splittings: list[tuple[str, tuple[SignedLabel, ...], tuple[SignedLabel, ...]]] = []
    for m_total in range(1, max_word_len + 1):
        for m in range(0, m_total + 1):
            m_prime = m_total - m
            for a_part in _signed_words(dd, m):
                for a_prime in _signed_words(dd, m_prime):
                    if m and m_prime:
                        if signed_endpoint(dd, a_part[0], "source") != signed_endpoint(
                            dd, a_prime[0], "source"
                        ):
                            continue
                        if signed_endpoint(dd, a_part[-1], "target") != signed_endpoint(
                            dd, a_prime[-1], "target"
                        ):
                            continue
                    elif m and not m_prime:
                        if signed_endpoint(dd, a_part[0], "source") != signed_endpoint(
                            dd, a_part[-1], "target"
                        ):
                            continue
                    elif m_prime and not m:
                        if signed_endpoint(dd, a_prime[0], "source") != signed_endpoint(
                            dd, a_prime[-1], "target"
                        ):
                            continue
                    hashed = tuple(e.flipped() for e in reversed(a_part))
                    cyc = CyclicWord(a_prime + hashed)
                    for line in dd.d1.preimages(cyc):
                        splittings.append((line, a_part, a_prime))

    for line, a_part, a_prime in splittings:
        if a_part:
            anchor_a = signed_endpoint(dd, a_part[0], "source")
        else:
            anchor_a = signed_endpoint(dd, a_prime[0], "source")
        if a_prime:
            anchor_p = signed_endpoint(dd, a_prime[0], "source")
        else:
            anchor_p = anchor_a
        src = word_of(a_part, anchor_a)
        tgt = word_of(a_prime, anchor_p)
        name = f"{line}|A={_word_str(a_part)}|A'={_word_str(a_prime)}"
        k0[name] = (src, tgt)

    return Computad(k2=k2, k1=k1, k0=k0)


def _word_str(entries: tuple[SignedLabel, ...]) -> str:
    return "(" + ",".join(map(str, entries)) + ")"

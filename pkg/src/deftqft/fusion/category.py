"""Graded spherical fusion category data and the path-basis calculus.

A category is specified skeletally: simple objects with grades, duals,
quantum dimensions and pivotal coefficients, multiplicity-free fusion
coefficients, and F-symbols.  The convention for ``[F^{abc}_d]_{ef}``:
the fusion tree that combines a with b through e and then with c equals
the F-weighted sum over trees combining b with c through f.

All diagram evaluation is done in left-combed path bases: the space of
invariant vectors of a word of (simple, sign) letters has one basis vector
per admissible path of intermediate simples from the unit back to the unit.
The elementary layer coefficients (splitting a strand, fusing two strands,
and the four cup/cap variants) are whiskered F-symbols; duality
normalisations are derived from the F-data once and checked against the
quantum dimensions by the validator (the two loop values per simple).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import ColourError, DegeneracyError, SchemaError
from ..groups import GroupTable, trivial_group
from ..report import ValidationReport

Letter = tuple[int, int]  # (simple index, sign)


@dataclass
class FusionCategoryData:
    group: GroupTable
    simples: tuple[str, ...]
    grade: tuple[int, ...]      # group element index per simple
    dual: tuple[int, ...]
    qdim: tuple[float, ...]
    pivotal: tuple[complex, ...]
    unit: int
    fusion: frozenset[tuple[int, int, int]]  # admissible (i, j, k) triples
    f_symbols: dict[tuple[int, int, int, int, int, int], complex]
    name: str = "category"
    _caches: dict = field(default_factory=dict, repr=False)

    # -- fusion ring -------------------------------------------------------

    def n(self, i: int, j: int, k: int) -> int:
        return 1 if (i, j, k) in self.fusion else 0

    def products(self, i: int, j: int) -> tuple[int, ...]:
        key = ("prod", i, j)
        if key not in self._caches:
            self._caches[key] = tuple(
                k for k in range(len(self.simples)) if (i, j, k) in self.fusion
            )
        return self._caches[key]

    def index(self, simple_id: str) -> int:
        try:
            return self.simples.index(simple_id)
        except ValueError:
            raise ColourError(f"unknown simple {simple_id!r}") from None

    def neutral_simples(self) -> tuple[int, ...]:
        e = self.group.identity
        return tuple(i for i in range(len(self.simples)) if self.grade[i] == e)

    def global_dimension_neutral(self) -> float:
        return float(sum(self.qdim[i] ** 2 for i in self.neutral_simples()))

    def letter_object(self, letter: Letter) -> int:
        i, sign = letter
        return i if sign > 0 else self.dual[i]

    # -- F-symbols ---------------------------------------------------------

    def f_admissible(self, a, b, c, d, e, f) -> bool:
        return (
            self.n(a, b, e)
            and self.n(e, c, d)
            and self.n(b, c, f)
            and self.n(a, f, d)
        )

    def f(self, a, b, c, d, e, f) -> complex:
        if not self.f_admissible(a, b, c, d, e, f):
            return 0.0
        key = (a, b, c, d, e, f)
        if key in self.f_symbols:
            return self.f_symbols[key]
        if self.unit in (a, b, c):
            return 1.0
        return 1.0  # unwritten admissible entries default to one (Vec-like)

    def f_matrix(self, a, b, c, d):
        """The change of basis between the two trees on (a, b, c) -> d."""
        key = ("fmat", a, b, c, d)
        if key not in self._caches:
            es = [e for e in self.products(a, b) if self.n(e, c, d)]
            fs = [f for f in self.products(b, c) if self.n(a, f, d)]
            mat = np.array(
                [[self.f(a, b, c, d, e, f) for f in fs] for e in es],
                dtype=complex,
            ).reshape(len(es), len(fs))
            self._caches[key] = (tuple(es), tuple(fs), mat)
        return self._caches[key]

    def f_inv(self, a, b, c, d, f, e) -> complex:
        """Entry [f, e] of the inverse F-matrix for (a, b, c; d)."""
        key = ("finv", a, b, c, d)
        if key not in self._caches:
            es, fs, mat = self.f_matrix(a, b, c, d)
            if mat.size == 0:
                self._caches[key] = (fs, es, mat.reshape(0, 0))
            else:
                if mat.shape[0] != mat.shape[1]:
                    raise DegeneracyError(
                        f"F-matrix for {(a, b, c, d)} is not square"
                    )
                self._caches[key] = (fs, es, np.linalg.inv(mat))
        fs, es, inv = self._caches[key]
        if f not in fs or e not in es:
            return 0.0
        return complex(inv[fs.index(f), es.index(e)])

    # -- duality normalisations ---------------------------------------------

    def lam(self, x: int) -> complex:
        """Normalisation of the fusion-to-unit vertex on (dual x, x)."""
        u = self.unit
        val = self.f(x, self.dual[x], x, x, u, u)
        if val == 0:
            raise DegeneracyError(
                f"vanishing bending coefficient for simple {self.simples[x]!r}"
            )
        return 1.0 / val

    def loop_ccw(self, x: int) -> complex:
        return self.lam(x) / self.pivotal[x]

    def loop_cw(self, x: int) -> complex:
        return self.pivotal[x] * self.lam(self.dual[x])

    # -- path bases ----------------------------------------------------------

    def resolve_word(self, word: tuple[Letter, ...]) -> tuple[int, ...]:
        return tuple(self.letter_object(l) for l in word)

    def paths(self, objects: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Admissible intermediate-simple paths from unit to unit."""
        key = ("paths", objects)
        if key in self._caches:
            return self._caches[key]
        states = [(self.unit,)]
        for y in objects:
            nxt = []
            for p in states:
                for k in self.products(p[-1], y):
                    nxt.append(p + (k,))
            states = nxt
        result = [p for p in states if p[-1] == self.unit]
        result.sort()
        self._caches[key] = result
        return result

    def hom_dimension_objects(self, objects: tuple[int, ...]) -> int:
        return len(self.paths(objects))

    # -- elementary layer coefficients --------------------------------------

    def split_coeff(self, s, t, a, b, c, u) -> complex:
        """Split a strand a -> (b, c) at left-state s; path value between."""
        return self.f(s, b, c, t, u, a)

    def fuse_coeff(self, s, t, b, c, a, u) -> complex:
        """Fuse strands (b, c) -> a; inverse F entry."""
        return self.f_inv(s, b, c, t, a, u)

    def cup_coeffs(self, s: int, x: int, right_handed: bool):
        """Create an adjacent pair: (x, dual x) if right-handed else (dual x, x).

        Returns a list of (u, coefficient) over middle path values u.
        """
        u_candidates = self.products(s, x if right_handed else self.dual[x])
        out = []
        for u in u_candidates:
            if right_handed:
                coeff = self.f(s, x, self.dual[x], s, u, self.unit)
            else:
                coeff = self.f(s, self.dual[x], x, s, u, self.unit) / self.pivotal[x]
            if coeff != 0:
                out.append((u, coeff))
        return out

    def cap_coeff(self, s: int, x: int, u: int, right_handed: bool) -> complex:
        """Close an adjacent pair; mirror of :meth:`cup_coeffs`."""
        if right_handed:
            return (
                self.pivotal[x]
                * self.lam(self.dual[x])
                * self.f_inv(s, x, self.dual[x], s, self.unit, u)
            )
        return self.lam(x) * self.f_inv(s, self.dual[x], x, s, self.unit, u)


# ---------------------------------------------------------------------------
# Queries used throughout the engines
# ---------------------------------------------------------------------------

def hom_dimension(cat: FusionCategoryData, word: tuple[Letter, ...]) -> int:
    """Multiplicity of the unit in the signed tensor word."""
    return cat.hom_dimension_objects(cat.resolve_word(word))


def global_dimension_neutral(cat: FusionCategoryData) -> float:
    return cat.global_dimension_neutral()


@dataclass(frozen=True)
class HomSpaceBasis:
    """Left-combed fusion-tree basis of the invariant space of a word."""

    word: tuple[Letter, ...]
    objects: tuple[int, ...]
    trees: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.trees)


def hom_basis(cat: FusionCategoryData, word: tuple[Letter, ...]) -> HomSpaceBasis:
    objects = cat.resolve_word(word)
    return HomSpaceBasis(word=word, objects=objects, trees=tuple(cat.paths(objects)))


def word_grade(cat: FusionCategoryData, word: tuple[Letter, ...]) -> int:
    """Product of grades with signs; homs vanish unless this is the identity."""
    pairs = [(cat.grade[i], sign) for i, sign in word]
    return cat.group.signed_product(pairs)


def reversed_word(word: tuple[Letter, ...]) -> tuple[Letter, ...]:
    return tuple((i, -s) for i, s in reversed(word))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_category(cat: FusionCategoryData, tol: float = 1e-9) -> ValidationReport:
    """Structural and coherence checks; clean iff everything is within tol."""
    report = ValidationReport()
    n = len(cat.simples)
    u = cat.unit
    g1 = cat.group.identity

    if cat.dual[u] != u:
        report.add("unit is not self-dual")
    if abs(cat.qdim[u] - 1.0) > tol:
        report.add(f"unit qdim {cat.qdim[u]} != 1")
    if cat.grade[u] != g1:
        report.add("unit grade is not the group identity")
    for i in range(n):
        if cat.dual[cat.dual[i]] != i:
            report.add(f"dual is not an involution at {cat.simples[i]!r}")
        if abs(cat.qdim[i] - cat.qdim[cat.dual[i]]) > tol:
            report.add(f"qdim({cat.simples[i]!r}) != qdim of its dual")
        if cat.group.mul(cat.grade[i], cat.grade[cat.dual[i]]) != g1:
            report.add(f"grade of dual of {cat.simples[i]!r} is not the inverse grade")
        if cat.n(u, i, i) != 1 or cat.n(i, u, i) != 1:
            report.add(f"unit fusion missing for {cat.simples[i]!r}")
        if cat.n(i, cat.dual[i], u) != 1 or cat.n(cat.dual[i], i, u) != 1:
            report.add(f"duality fusion missing for {cat.simples[i]!r}")

    for (i, j, k) in sorted(cat.fusion):
        if cat.group.mul(cat.grade[i], cat.grade[j]) != cat.grade[k]:
            report.add(
                f"grading violated: {cat.simples[i]}*{cat.simples[j]} -> {cat.simples[k]}"
            )

    # fusion-ring consistency of quantum dimensions
    for i, j in itertools.product(range(n), repeat=2):
        lhs = cat.qdim[i] * cat.qdim[j]
        rhs = sum(cat.qdim[k] for k in cat.products(i, j))
        if abs(lhs - rhs) > max(tol, 1e-7):
            report.add(
                f"qdim inconsistency at {cat.simples[i]}*{cat.simples[j]}: {lhs} vs {rhs}"
            )

    # pivotal coefficients form a monoidal natural transformation
    for (i, j, k) in sorted(cat.fusion):
        if abs(cat.pivotal[i] * cat.pivotal[j] - cat.pivotal[k]) > tol:
            report.add(
                f"pivotal not multiplicative on ({cat.simples[i]},{cat.simples[j]};{cat.simples[k]})"
            )

    # triangle constraints: F with a unit outer index must be one
    for a, b in itertools.product(range(n), repeat=2):
        for d in cat.products(a, b):
            for (x, y, z, w, e, f) in (
                (u, a, b, d, a, d),
                (a, u, b, d, a, d),
                (a, b, u, d, d, b),
            ):
                if cat.f_admissible(x, y, z, w, e, f):
                    val = cat.f(x, y, z, w, e, f)
                    if abs(val - 1.0) > tol:
                        report.add(
                            f"triangle violated at F[{x},{y},{z};{w}]({e},{f}) = {val}"
                        )

    # pentagon
    worst = 0.0
    worst_at = None
    for a, b, c, d in itertools.product(range(n), repeat=4):
        for e in cat.products(a, b):
            for g in cat.products(e, c):
                for s in cat.products(g, d):
                    for h in cat.products(c, d):
                        for k in cat.products(b, h):
                            if not cat.n(a, k, s):
                                continue
                            lhs = cat.f(e, c, d, s, g, h) * cat.f(a, b, h, s, e, k)
                            rhs = 0.0
                            for f in cat.products(b, c):
                                rhs += (
                                    cat.f(a, b, c, g, e, f)
                                    * cat.f(a, f, d, s, g, k)
                                    * cat.f(b, c, d, k, f, h)
                                )
                            err = abs(lhs - rhs)
                            if err > worst:
                                worst, worst_at = err, (a, b, c, d, s, e, g, h, k)
    if worst > tol:
        report.add(f"pentagon violated: residual {worst:.3e} at {worst_at}")

    # sphericality: both loop values must equal the quantum dimension
    for x in range(n):
        try:
            ccw, cw = cat.loop_ccw(x), cat.loop_cw(x)
        except DegeneracyError as exc:
            report.add(str(exc))
            continue
        if abs(ccw - cat.qdim[x]) > max(tol, 1e-7):
            report.add(
                f"left trace of {cat.simples[x]!r} is {ccw}, expected {cat.qdim[x]}"
            )
        if abs(cw - cat.qdim[x]) > max(tol, 1e-7):
            report.add(
                f"right trace of {cat.simples[x]!r} is {cw}, expected {cat.qdim[x]}"
            )

    return report


# ---------------------------------------------------------------------------
# Constructors for the standard examples
# ---------------------------------------------------------------------------

def vec_category(
    group: GroupTable,
    grading: GroupTable | None = None,
    cocycle=None,
    name: str | None = None,
) -> FusionCategoryData:
    """Group-algebra category: one simple per group element.

    ``grading`` defaults to the trivial group (trivially graded); passing the
    group itself grades each simple by its own element.  ``cocycle`` may be a
    callable (i, j, k) -> complex for twisted associators.
    """
    n = group.order
    if grading is None:
        gr_group = trivial_group()
        grades = tuple(0 for _ in range(n))
    else:
        gr_group = grading
        if gr_group.elements != group.elements:
            raise SchemaError("self-grading requires the same element list")
        grades = tuple(range(n))
    fusion = frozenset(
        (i, j, group.mul(i, j)) for i in range(n) for j in range(n)
    )
    f_symbols = {}
    if cocycle is not None:
        for i, j, k in itertools.product(range(n), repeat=3):
            val = complex(cocycle(i, j, k))
            d = group.mul(group.mul(i, j), k)
            f_symbols[(i, j, k, d, group.mul(i, j), group.mul(j, k))] = val
    return FusionCategoryData(
        group=gr_group,
        simples=tuple(f"x_{e}" for e in group.elements),
        grade=grades,
        dual=tuple(group.inverse),
        qdim=tuple(1.0 for _ in range(n)),
        pivotal=tuple(1.0 + 0.0j for _ in range(n)),
        unit=group.identity,
        fusion=fusion,
        f_symbols=f_symbols,
        name=name or f"vec[{'x'.join(group.elements)}]",
    )


def fibonacci_category() -> FusionCategoryData:
    """The Fibonacci category: simples 1, tau with tau^2 = 1 + tau."""
    phi = (1.0 + 5.0 ** 0.5) / 2.0
    s = phi ** -0.5
    fusion = frozenset(
        {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1)}
    )
    f_symbols = {
        (1, 1, 1, 1, 0, 0): complex(1.0 / phi),
        (1, 1, 1, 1, 0, 1): complex(s),
        (1, 1, 1, 1, 1, 0): complex(s),
        (1, 1, 1, 1, 1, 1): complex(-1.0 / phi),
    }
    return FusionCategoryData(
        group=trivial_group(),
        simples=("1", "tau"),
        grade=(0, 0),
        dual=(0, 1),
        qdim=(1.0, phi),
        pivotal=(1.0 + 0j, 1.0 + 0j),
        unit=0,
        fusion=fusion,
        f_symbols=f_symbols,
        name="fibonacci",
    )

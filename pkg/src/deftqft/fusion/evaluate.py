"""Evaluation of coloured sphere graphs in a spherical fusion category.

The evaluator runs the slice program of each connected component on a path
state: a sparse vector over admissible intermediate-simple paths of the
frontier word.  Graph vertices are inserted as left-combed splitting trees
at whatever cyclic rotation the sweep dictates; the result is converted to
the vertex's own boundary word by the cyclic rotation isomorphism, which is
itself computed inside the same calculus (create a cancelling pair, insert
the tree, close the first leg).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegeneracyError, TopologyError
from .category import FusionCategoryData
from .planar import CapEvent, CupEvent, SphereMap, VertexEvent, slice_program

_PROGRAM_CACHE: dict[str, list] = {}


class PathState:
    """A vector over unit-to-unit paths through a word of simple objects."""

    def __init__(self, cat: FusionCategoryData):
        self.cat = cat
        self.word: list[int] = []
        self.amps: dict[tuple[int, ...], complex] = {(cat.unit,): 1.0 + 0.0j}

    def apply_cup(self, pos: int, x: int, right_handed: bool) -> None:
        cat = self.cat
        pair = [x, cat.dual[x]] if right_handed else [cat.dual[x], x]
        new_amps: dict[tuple[int, ...], complex] = {}
        for path, amp in self.amps.items():
            s = path[pos]
            for u, coeff in cat.cup_coeffs(s, x, right_handed):
                new_path = path[: pos + 1] + (u, s) + path[pos + 1 :]
                new_amps[new_path] = new_amps.get(new_path, 0.0) + amp * coeff
        self.word[pos:pos] = pair
        self.amps = new_amps

    def apply_cap(self, pos: int, right_handed: bool) -> None:
        cat = self.cat
        x = self.word[pos] if right_handed else self.word[pos + 1]
        new_amps: dict[tuple[int, ...], complex] = {}
        for path, amp in self.amps.items():
            s, u, t = path[pos], path[pos + 1], path[pos + 2]
            if s != t:
                continue
            coeff = cat.cap_coeff(s, x, u, right_handed)
            if coeff == 0:
                continue
            new_path = path[: pos + 1] + path[pos + 3 :]
            new_amps[new_path] = new_amps.get(new_path, 0.0) + amp * coeff
        del self.word[pos : pos + 2]
        self.amps = new_amps

    def apply_split(self, pos: int, b: int, c: int) -> None:
        """Replace the strand at pos (object a) by strands (b, c)."""
        cat = self.cat
        a = self.word[pos]
        new_amps: dict[tuple[int, ...], complex] = {}
        for path, amp in self.amps.items():
            s, t = path[pos], path[pos + 1]
            for u in cat.products(s, b):
                coeff = cat.split_coeff(s, t, a, b, c, u)
                if coeff == 0:
                    continue
                new_path = path[: pos + 1] + (u,) + path[pos + 1 :]
                new_amps[new_path] = new_amps.get(new_path, 0.0) + amp * coeff
        self.word[pos : pos + 1] = [b, c]
        self.amps = new_amps

    def apply_node(self, pos: int, objects: tuple[int, ...], tree: tuple[int, ...]) -> None:
        """Insert a splitting-tree basis vector with all legs up at pos."""
        cat = self.cat
        m = len(objects)
        if m == 0:
            return
        if m == 1:
            if objects[0] != cat.unit:
                self.amps = {}
                self.word[pos:pos] = list(objects)
                return
            new_amps = {}
            for path, amp in self.amps.items():
                new_path = path[: pos + 1] + (path[pos],) + path[pos + 1 :]
                new_amps[new_path] = new_amps.get(new_path, 0.0) + amp
            self.word[pos:pos] = list(objects)
            self.amps = new_amps
            return
        # birth of the top pair, then peel off letters by splitting
        self.apply_cup(pos, tree[m - 1], right_handed=True)
        for j in range(m - 1, 1, -1):
            self.apply_split(pos, tree[j - 1], objects[j - 1])

    def scalar(self) -> complex:
        if self.word:
            raise TopologyError("state is not closed")
        return self.amps.get((self.cat.unit,), 0.0 + 0.0j)

    def coefficients(self, paths: list[tuple[int, ...]]) -> np.ndarray:
        return np.array([self.amps.get(p, 0.0) for p in paths], dtype=complex)


# ---------------------------------------------------------------------------
# Cyclic rotation isomorphisms
# ---------------------------------------------------------------------------


def rotation_matrix(cat: FusionCategoryData, objects: tuple[int, ...], steps: int) -> np.ndarray:
    """Matrix of the iso from paths(objects) to paths(objects rotated left)."""
    key = ("rotmat", objects, steps)
    if key in cat._caches:
        return cat._caches[key]
    mat = np.eye(len(cat.paths(objects)), dtype=complex)
    word = objects
    for _ in range(steps % max(len(objects), 1)):
        step = _rotate_once_matrix(cat, word)
        mat = step @ mat
        word = word[1:] + word[:1]
    cat._caches[key] = mat
    return mat


def _rotate_once_matrix(cat: FusionCategoryData, objects: tuple[int, ...]) -> np.ndarray:
    src_paths = cat.paths(objects)
    rotated = objects[1:] + objects[:1]
    dst_paths = cat.paths(rotated)
    y = objects[0]
    mat = np.zeros((len(dst_paths), len(src_paths)), dtype=complex)
    for col, tree in enumerate(src_paths):
        state = PathState(cat)
        state.apply_cup(0, y, right_handed=False)      # objects (y*, y)
        state.apply_node(1, objects, tree)              # (y*, Y1..Ym, y)
        state.apply_cap(0, right_handed=False)          # close (y*, Y1)
        if state.word != list(rotated):
            raise TopologyError("rotation bookkeeping failed")
        mat[:, col] = state.coefficients(dst_paths)
    return mat


# ---------------------------------------------------------------------------
# Sphere graph evaluation
# ---------------------------------------------------------------------------


@dataclass
class SphereFunctional:
    """Values of a coloured sphere graph on tuples of vertex basis trees.

    ``array`` has one axis per entry of ``vertices`` (sorted ids); the basis
    along an axis is ``cat.paths`` of the vertex's boundary word objects.
    """

    vertices: tuple[str, ...]
    words: dict[str, tuple]
    bases: dict[str, list[tuple[int, ...]]]
    array: np.ndarray

    def scalar(self) -> complex:
        if self.array.ndim != 0 and self.array.size != 1:
            raise TopologyError("functional is not scalar")
        return complex(self.array.reshape(()))


def _structure_signature(m: SphereMap) -> str:
    rot = sorted((v, m.rotation[v], m.marked_dart.get(v)) for v in m.rotation)
    return repr((rot, m.n_edges, m.outer_dart))


def _component_program(m: SphereMap, component: set[str]) -> list:
    sig = _structure_signature(m) + repr(sorted(component))
    if sig not in _PROGRAM_CACHE:
        _PROGRAM_CACHE[sig] = slice_program(m, component)
    return _PROGRAM_CACHE[sig]


def evaluate_sphere_graph(cat: FusionCategoryData, graph: SphereMap) -> SphereFunctional:
    """Evaluate a graph whose edge colours are simple-object indices."""
    graph.check_sphere()
    vertices = tuple(graph.vertices())
    words = {v: graph.vertex_word(v) for v in vertices}
    bases = {
        v: cat.paths(cat.resolve_word(words[v])) for v in vertices
    }

    prefactor = 1.0 + 0.0j
    for colour in graph.free_loops:
        prefactor *= cat.qdim[colour]

    arrays = []
    axis_vertices: list[str] = []
    for component in graph.components():
        comp_vertices = sorted(component)
        program = _component_program(graph, component)
        arr = _evaluate_component(cat, graph, program, comp_vertices)
        arrays.append(arr)
        axis_vertices.extend(comp_vertices)

    if arrays:
        total = arrays[0]
        for arr in arrays[1:]:
            total = np.tensordot(total, arr, axes=0)
    else:
        total = np.array(1.0 + 0.0j)
    total = total * prefactor

    # reorder axes to the global sorted vertex order
    order = [axis_vertices.index(v) for v in vertices]
    if order:
        total = np.transpose(total, axes=order)
    return SphereFunctional(vertices=vertices, words=words, bases=bases, array=total)


def _evaluate_component(cat, graph, program, comp_vertices):
    # insertion-rotation bases and their sizes
    ins_objects: dict[str, tuple[int, ...]] = {}
    shifts: dict[str, int] = {}
    for ev in program:
        if isinstance(ev, VertexEvent):
            objs = tuple(
                cat.letter_object(
                    (graph.edge_color[graph.edge_of(d)], graph.dart_sign(d))
                )
                for d in ev.word_darts
            )
            ins_objects[ev.vertex] = objs
            shifts[ev.vertex] = ev.shift
    ins_bases = {v: cat.paths(ins_objects[v]) for v in comp_vertices}
    dims = [len(ins_bases[v]) for v in comp_vertices]
    out = np.zeros(dims, dtype=complex)
    if 0 in dims:
        pass
    else:
        for idx in np.ndindex(*dims):
            assignment = {
                v: ins_bases[v][idx[k]] for k, v in enumerate(comp_vertices)
            }
            out[idx] = _run_program(cat, graph, program, assignment)

    # convert from insertion rotations back to the boundary words
    for k, v in enumerate(comp_vertices):
        canon_objects = tuple(
            cat.letter_object(letter) for letter in graph.vertex_word(v)
        )
        rot = rotation_matrix(cat, canon_objects, shifts[v])
        # out currently indexed by insertion trees s; F_canon[t] = sum_s R[s,t] F_ins[s]
        out = np.tensordot(rot, out, axes=([0], [k]))
        out = np.moveaxis(out, 0, k)
    return out


def _run_program(cat, graph, program, assignment) -> complex:
    state = PathState(cat)
    for ev in program:
        if isinstance(ev, CupEvent):
            state.apply_cup(ev.position, graph.edge_color[ev.edge], ev.left_up)
        elif isinstance(ev, CapEvent):
            state.apply_cap(ev.position, ev.left_up)
        elif isinstance(ev, VertexEvent):
            objects = tuple(
                cat.letter_object(
                    (graph.edge_color[graph.edge_of(d)], graph.dart_sign(d))
                )
                for d in ev.word_darts
            )
            n_down = len(ev.down_edges)
            state.apply_node(ev.position + n_down, objects, assignment[ev.vertex])
            for j in range(n_down):
                state.apply_cap(ev.position + n_down - 1 - j, ev.down_up[n_down - 1 - j])
        else:
            raise TopologyError(f"unknown event {ev!r}")
        if not state.amps:
            return 0.0 + 0.0j
    return state.scalar()


# ---------------------------------------------------------------------------
# Edge pairings
# ---------------------------------------------------------------------------


def pairing_graph(word: tuple) -> SphereMap:
    """Two vertices joined by parallel strands: 'p' reads the word, 'q' its reverse."""
    m = len(word)
    rotation = {
        "p": tuple(2 * e for e in reversed(range(m))),
        "q": tuple(2 * e + 1 for e in range(m)),
    }
    colors = []
    swap = []
    for k, (i, s) in enumerate(word):
        colors.append(i)
        swap.append(s < 0)
    # darts: edge k runs p -> q when the letter is positive, else q -> p
    rot_p = []
    rot_q = []
    for e in reversed(range(m)):
        rot_p.append(2 * e + (1 if swap[e] else 0))
    for e in range(m):
        rot_q.append(2 * e + (0 if swap[e] else 1))
    dart_vertex = {}
    for e in range(m):
        if swap[e]:
            dart_vertex[2 * e] = "q"
            dart_vertex[2 * e + 1] = "p"
        else:
            dart_vertex[2 * e] = "p"
            dart_vertex[2 * e + 1] = "q"
    marked = {}
    if m:
        marked["p"] = rot_p[-1]   # dart of edge 0: word starts with letter 0
        marked["q"] = rot_q[-1]   # dart of edge m-1: reversed word starts there
    return SphereMap(
        rotation={"p": tuple(rot_p), "q": tuple(rot_q)},
        edge_color=colors,
        dart_vertex=dart_vertex,
        marked_dart=marked,
    )


@dataclass
class EdgePairing:
    word: tuple
    ev: np.ndarray      # rows: trees of the word; cols: trees of the reverse
    coev: np.ndarray    # inverse matrix

    @property
    def dim(self) -> int:
        return self.ev.shape[0]


def edge_pairing(cat: FusionCategoryData, word: tuple, tol: float = 1e-9) -> EdgePairing:
    """Evaluation pairing between a word's space and its reverse's, with inverse."""
    graph = pairing_graph(word)
    functional = evaluate_sphere_graph(cat, graph)
    arr = functional.array
    if arr.ndim != 2:
        arr = arr.reshape((1, 1) if arr.size == 1 else arr.shape)
    # axes are sorted vertices ('p', 'q'); 'p' carries the word itself
    ev = np.asarray(arr, dtype=complex)
    if ev.size == 0:
        return EdgePairing(word=word, ev=ev.reshape(0, 0), coev=ev.reshape(0, 0))
    if ev.shape[0] != ev.shape[1]:
        raise DegeneracyError("pairing matrix is not square")
    sing = np.linalg.svd(ev, compute_uv=False)
    if sing.min() <= tol * max(1.0, sing.max()):
        raise DegeneracyError("edge pairing is singular; category data is bad")
    coev = np.linalg.inv(ev)
    return EdgePairing(word=word, ev=ev, coev=coev)

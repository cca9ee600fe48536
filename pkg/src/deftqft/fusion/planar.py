"""Combinatorial sphere maps and their reduction to sliced diagrams.

A :class:`SphereMap` is a graph with a rotation system (counter-clockwise
dart order at every vertex), oriented coloured edges, optional vertex-free
loops, and a marked outer face.  Maps are checked to be genus zero per
connected component.

``slice_program`` turns a connected component into a bottom-to-top sequence
of cup, cap and vertex events.  The construction is geometric: the map is
refined to a simple triangulation (one round of edge subdivision and face
starring removes loops and bridges, a second round removes parallel edges),
drawn with a Tutte embedding that realises the given rotation system, and
swept by a horizontal line.  Every original edge becomes a polyline whose
runs between local extrema are y-monotone, so the sweep events are exactly
the extrema of edges plus the original vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import TopologyError


@dataclass
class SphereMap:
    """Oriented coloured combinatorial map.

    Edge ``e`` has darts ``2e`` (at its source vertex) and ``2e + 1`` (at its
    target).  ``rotation[v]`` lists the darts at ``v`` in counter-clockwise
    order.  ``marked_dart[v]`` selects the start of the vertex's boundary
    word, which is read in *clockwise* dart order.
    """

    rotation: dict[str, tuple[int, ...]]
    edge_color: list  # colour payload per edge
    dart_vertex: dict[int, str] = field(default_factory=dict)
    free_loops: list = field(default_factory=list)
    marked_dart: dict[str, int] = field(default_factory=dict)
    outer_dart: int | None = None

    def __post_init__(self):
        self.rotation = {v: tuple(d) for v, d in self.rotation.items()}
        if not self.dart_vertex:
            for v, darts in self.rotation.items():
                for d in darts:
                    if d in self.dart_vertex:
                        raise TopologyError(f"dart {d} listed twice")
                    self.dart_vertex[d] = v
        for e in range(len(self.edge_color)):
            has0 = 2 * e in self.dart_vertex
            has1 = 2 * e + 1 in self.dart_vertex
            if has0 != has1:
                raise TopologyError(f"edge {e} has exactly one placed dart")
        for v, darts in self.rotation.items():
            if darts and v not in self.marked_dart:
                self.marked_dart[v] = min(darts)

    # -- basic structure ----------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edge_color)

    def vertices(self) -> list[str]:
        return sorted(self.rotation)

    def mate(self, d: int) -> int:
        return d ^ 1

    def edge_of(self, d: int) -> int:
        return d // 2

    def next_ccw(self, d: int) -> int:
        darts = self.rotation[self.dart_vertex[d]]
        return darts[(darts.index(d) + 1) % len(darts)]

    def prev_ccw(self, d: int) -> int:
        darts = self.rotation[self.dart_vertex[d]]
        return darts[(darts.index(d) - 1) % len(darts)]

    def next_in_face(self, d: int) -> int:
        """Walk with the face on the left of each dart."""
        return self.prev_ccw(self.mate(d))

    def faces(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for v in self.vertices():
            for d0 in self.rotation[v]:
                if d0 in seen:
                    continue
                walk = []
                d = d0
                while True:
                    walk.append(d)
                    seen.add(d)
                    d = self.next_in_face(d)
                    if d == d0:
                        break
                out.append(tuple(walk))
        return out

    def components(self) -> list[set[str]]:
        remaining = set(self.rotation)
        comps = []
        while remaining:
            start = min(remaining)
            comp = {start}
            stack = [start]
            while stack:
                v = stack.pop()
                for d in self.rotation[v]:
                    w = self.dart_vertex[self.mate(d)]
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            comps.append(comp)
            remaining -= comp
        return comps

    def check_sphere(self) -> None:
        """Euler characteristic 2 for every connected component."""
        faces = self.faces()
        for comp in self.components():
            v = len(comp)
            darts = [d for w in comp for d in self.rotation[w]]
            e = len(darts) // 2
            f = sum(1 for walk in faces if walk and self.dart_vertex[walk[0]] in comp)
            if v - e + f != 2:
                raise TopologyError(f"component not a sphere: V={v} E={e} F={f}")

    def vertex_word_darts(self, v: str) -> tuple[int, ...]:
        """Darts at v in clockwise order, starting at the marked dart."""
        darts = self.rotation[v]
        if not darts:
            return ()
        cw = tuple(reversed(darts))
        k = cw.index(self.marked_dart[v])
        return cw[k:] + cw[:k]

    def dart_sign(self, d: int) -> int:
        """+1 for a dart at the edge's source (outgoing), else -1."""
        return 1 if d % 2 == 0 else -1

    def vertex_word(self, v: str) -> tuple:
        """The boundary word of v: (edge colour, sign) in clockwise order."""
        return tuple(
            (self.edge_color[self.edge_of(d)], self.dart_sign(d))
            for d in self.vertex_word_darts(v)
        )


# ---------------------------------------------------------------------------
# Refinement towards a simple triangulation
# ---------------------------------------------------------------------------


@dataclass
class _Refined:
    """A simple triangulation refining one component of a sphere map."""

    rotation: dict[str, list[int]]
    dart_vertex: dict[int, str]
    n_edges: int
    edge_paths: dict[int, list[str]]  # original edge id -> refined vertex chain
    outer_walk: tuple[int, ...]       # dart walk of the outer triangle


def _subdivide_and_star(rotation, dart_vertex, n_edges, outer_dart, cuts):
    """One refinement round; returns (rot, dart_vertex, n_edges, paths, outer)."""
    new_rot: dict[str, list[int]] = {v: [] for v in rotation}
    new_dart_vertex: dict[int, str] = {}
    new_edges = 0
    seg_of_dart: dict[int, int] = {}
    paths: dict[int, list[str]] = {}

    def alloc_edge(u, w):
        nonlocal new_edges
        e = new_edges
        new_edges += 1
        new_dart_vertex[2 * e] = u
        new_dart_vertex[2 * e + 1] = w
        return e

    for e in range(n_edges):
        src = dart_vertex[2 * e]
        tgt = dart_vertex[2 * e + 1]
        mids = [f"m{n_edges}:{e}.{k}" for k in range(cuts)]
        chain = [src] + mids + [tgt]
        segs = [alloc_edge(a, b) for a, b in zip(chain, chain[1:])]
        seg_of_dart[2 * e] = 2 * segs[0]
        seg_of_dart[2 * e + 1] = 2 * segs[-1] + 1
        for m, left, right in zip(mids, segs[:-1], segs[1:]):
            new_rot[m] = [2 * left + 1, 2 * right]
        paths[e] = chain

    for v, darts in rotation.items():
        new_rot[v] = [seg_of_dart[d] for d in darts]

    def next_in_face(d):
        lst = new_rot[new_dart_vertex[d ^ 1]]
        return lst[(lst.index(d ^ 1) - 1) % len(lst)]

    seen = set()
    walks = []
    for v in sorted(new_rot):
        for d0 in new_rot[v]:
            if d0 in seen:
                continue
            walk = []
            d = d0
            while True:
                walk.append(d)
                seen.add(d)
                d = next_in_face(d)
                if d == d0:
                    break
            walks.append(walk)

    tracked = seg_of_dart[outer_dart]
    insert_before: dict[int, int] = {}
    for fi, walk in enumerate(walks):
        center = f"c{n_edges}:{fi}!"
        star_darts = []
        for d in walk:
            corner_vertex = new_dart_vertex[d ^ 1]
            e = alloc_edge(center, corner_vertex)
            star_darts.append(2 * e)
            insert_before[d ^ 1] = 2 * e + 1
        new_rot[center] = star_darts

    for v in list(rotation) + [m for ch in paths.values() for m in ch[1:-1]]:
        lst = new_rot[v]
        out = []
        for d in lst:
            if d in insert_before:
                out.append(insert_before[d])
            out.append(d)
        new_rot[v] = out

    return new_rot, new_dart_vertex, new_edges, paths, tracked


def refine_to_triangulation(m: SphereMap, component: set[str]) -> _Refined:
    """Two refinement rounds restricted to one connected component."""
    edges = []
    edge_index = {}
    for v in sorted(component):
        for d in m.rotation[v]:
            e = m.edge_of(d)
            if e not in edge_index:
                edge_index[e] = len(edges)
                edges.append(e)
    n_edges = len(edges)
    rot = {v: [2 * edge_index[m.edge_of(d)] + (d % 2) for d in m.rotation[v]]
           for v in component}
    dart_vertex = {d: v for v, lst in rot.items() for d in lst}

    outer_dart = None
    if m.outer_dart is not None and m.dart_vertex.get(m.outer_dart) in component:
        outer_dart = 2 * edge_index[m.edge_of(m.outer_dart)] + (m.outer_dart % 2)
    if outer_dart is None:
        outer_dart = min(dart_vertex)

    rot1, dv1, ne1, paths1, outer1 = _subdivide_and_star(
        rot, dart_vertex, n_edges, outer_dart, cuts=2
    )
    rot2, dv2, ne2, paths2, outer2 = _subdivide_and_star(
        rot1, dv1, ne1, outer1, cuts=1
    )

    # stitch original edge chains through both rounds: round-1 segments of
    # original edge e are the consecutively allocated edges 3e, 3e+1, 3e+2
    edge_paths = {}
    for local_e in range(n_edges):
        full = [paths2[3 * local_e][0]]
        for k in range(3):
            seg_chain = paths2[3 * local_e + k]
            full.extend(seg_chain[1:])
        edge_paths[edges[local_e]] = full

    def next_in_face(d):
        lst = rot2[dv2[d ^ 1]]
        return lst[(lst.index(d ^ 1) - 1) % len(lst)]

    walk = [outer2]
    d = next_in_face(outer2)
    while d != outer2:
        walk.append(d)
        d = next_in_face(d)
    if len(walk) != 3:
        raise TopologyError(f"outer face of refined map has size {len(walk)}")

    return _Refined(
        rotation=rot2,
        dart_vertex=dv2,
        n_edges=ne2,
        edge_paths=edge_paths,
        outer_walk=tuple(walk),
    )


# ---------------------------------------------------------------------------
# Tutte layout
# ---------------------------------------------------------------------------


def tutte_layout(ref: _Refined) -> dict[str, tuple[float, float]]:
    verts = sorted(ref.rotation)
    index = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    tri = [ref.dart_vertex[d] for d in ref.outer_walk]
    # the outer face walk runs clockwise in the drawing
    fixed = {
        name: (math.cos(math.pi / 2 - 2 * math.pi * k / 3),
               math.sin(math.pi / 2 - 2 * math.pi * k / 3))
        for k, name in enumerate(tri)
    }
    lap = np.zeros((n, n))
    rhs = np.zeros((n, 2))
    for v in verts:
        i = index[v]
        if v in fixed:
            lap[i, i] = 1.0
            rhs[i] = fixed[v]
            continue
        nbrs = [ref.dart_vertex[d ^ 1] for d in ref.rotation[v]]
        lap[i, i] = len(nbrs)
        for w in nbrs:
            if w in fixed:
                rhs[i, 0] += fixed[w][0]
                rhs[i, 1] += fixed[w][1]
            else:
                lap[i, index[w]] -= 1.0
    sol = np.linalg.solve(lap, rhs)
    pos = {v: (float(sol[index[v], 0]), float(sol[index[v], 1])) for v in verts}

    # orientation: interior face walks must be counter-clockwise
    outer_darts = set(ref.outer_walk)
    mirrored = False
    for d0 in sorted(ref.dart_vertex):
        if d0 in outer_darts:
            continue
        walk = [d0]
        d = _next_in_face(ref, d0)
        while d != d0:
            walk.append(d)
            d = _next_in_face(ref, d)
        if set(walk) & outer_darts:
            continue
        pts = [pos[ref.dart_vertex[x]] for x in walk]
        area = _signed_area(pts)
        if abs(area) < 1e-12:
            continue
        if area < 0:
            mirrored = True
        break
    if mirrored:
        pos = {v: (-x, y) for v, (x, y) in pos.items()}
    return pos


def _next_in_face(ref: _Refined, d: int) -> int:
    lst = ref.rotation[ref.dart_vertex[d ^ 1]]
    return lst[(lst.index(d ^ 1) - 1) % len(lst)]


def _signed_area(pts) -> float:
    area = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:] + pts[:1]):
        area += x1 * y2 - x2 * y1
    return area / 2.0


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


@dataclass
class CupEvent:
    position: int       # insertion index in the frontier
    edge: int           # original edge id
    left_up: bool       # left strand carries the edge arrow upward


@dataclass
class CapEvent:
    position: int       # index of the left strand of the closing pair
    edge: int
    left_up: bool


@dataclass
class VertexEvent:
    position: int                  # index of the leftmost down strand
    vertex: str
    down_edges: tuple[int, ...]    # original edge per down strand, left to right
    down_up: tuple[bool, ...]      # arrow-points-up per down strand
    word_darts: tuple[int, ...]    # insertion rotation, as map darts
    shift: int                     # cw steps from the marked dart


class _Strand:
    """A run of an edge polyline between two sweep events."""

    def __init__(self, edge, chain, pts, birth, direction):
        self.edge = edge
        self.chain = chain
        self.pts = pts
        self.birth = birth
        self.direction = direction
        k = birth
        while True:
            nxt = k + direction
            if nxt <= 0 or nxt >= len(pts) - 1:
                k = nxt
                break
            if _is_extremum(pts, nxt):
                k = nxt
                break
            k = nxt
        self.death = k
        lo = min(birth, self.death)
        hi = max(birth, self.death)
        self.lo, self.hi = lo, hi

    def first_step_up(self) -> bool:
        return self.pts[self.birth + self.direction][1] > self.pts[self.birth][1]

    def x_at(self, y: float) -> float:
        for i in range(self.lo, self.hi):
            (x1, y1), (x2, y2) = self.pts[i], self.pts[i + 1]
            if min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12:
                if abs(y2 - y1) < 1e-15:
                    return x1
                t = (y - y1) / (y2 - y1)
                return x1 + t * (x2 - x1)
        raise TopologyError("sweep strand queried outside its span")

    def slope_key(self) -> float:
        (x1, y1) = self.pts[self.birth]
        (x2, y2) = self.pts[self.birth + self.direction]
        return (x2 - x1) / abs(y2 - y1)

    def dies_at_point(self, edge, idx) -> bool:
        return self.edge == edge and self.death == idx and self.birth != idx

    def dies_at_vertex(self, v) -> bool:
        if self.death == 0:
            return self.chain[0] == v
        if self.death == len(self.pts) - 1:
            return self.chain[-1] == v
        return False

    def dart_at_birth(self) -> int:
        return 2 * self.edge + (0 if self.birth == 0 else 1)

    def dart_at_death(self) -> int:
        return 2 * self.edge + (0 if self.death == 0 else 1)


def _is_extremum(pts, k) -> bool:
    y_prev, y_here, y_next = pts[k - 1][1], pts[k][1], pts[k + 1][1]
    return (y_here < y_prev and y_here < y_next) or (
        y_here > y_prev and y_here > y_next
    )


def slice_program(m: SphereMap, component: set[str]) -> list:
    """Sweep one connected component into cup/cap/vertex events."""
    if len(component) == 1:
        v = next(iter(component))
        if not m.rotation[v]:
            return [VertexEvent(0, v, (), (), (), 0)]

    ref = refine_to_triangulation(m, component)
    pos = tutte_layout(ref)
    pos = _generic_rotation(ref, pos)

    polylines = {e: [pos[w] for w in chain] for e, chain in ref.edge_paths.items()}

    events = []
    for v in sorted(component):
        events.append((pos[v][1], pos[v][0], "vertex", v))
    for e, pts in polylines.items():
        for k in range(1, len(pts) - 1):
            if pts[k][1] < pts[k - 1][1] and pts[k][1] < pts[k + 1][1]:
                events.append((pts[k][1], pts[k][0], "cup", (e, k)))
            elif pts[k][1] > pts[k - 1][1] and pts[k][1] > pts[k + 1][1]:
                events.append((pts[k][1], pts[k][0], "cap", (e, k)))
    events.sort(key=lambda t: (t[0], t[1], t[2]))

    frontier: list[_Strand] = []
    program: list = []

    for y, _x, kind, payload in events:
        if kind == "cup":
            e, k = payload
            pts = polylines[e]
            chain = ref.edge_paths[e]
            fwd = _Strand(e, chain, pts, k, +1)
            bwd = _Strand(e, chain, pts, k, -1)
            pair = sorted([fwd, bwd], key=lambda s: s.slope_key())
            idx = sum(1 for s in frontier if s.x_at(y) < pts[k][0])
            frontier[idx:idx] = pair
            program.append(CupEvent(idx, e, pair[0].direction == +1))
        elif kind == "cap":
            e, k = payload
            dying = [s for s in frontier if s.dies_at_point(e, k)]
            if len(dying) != 2:
                raise TopologyError("cap without exactly two strands")
            i0, i1 = sorted(frontier.index(s) for s in dying)
            if i1 != i0 + 1:
                raise TopologyError("cap strands are not adjacent")
            program.append(CapEvent(i0, e, frontier[i0].direction == +1))
            del frontier[i1]
            del frontier[i0]
        else:
            v = payload
            idxs = [i for i, s in enumerate(frontier) if s.dies_at_vertex(v)]
            if idxs and idxs != list(range(idxs[0], idxs[0] + len(idxs))):
                raise TopologyError(f"down strands of {v!r} not contiguous")
            p = idxs[0] if idxs else sum(
                1 for s in frontier if s.x_at(y) < pos[v][0]
            )
            down = [frontier[i] for i in idxs]
            rising = []
            for e in sorted(ref.edge_paths):
                chain = ref.edge_paths[e]
                pts = polylines[e]
                if chain[0] == v:
                    s = _Strand(e, chain, pts, 0, +1)
                    if s.first_step_up():
                        rising.append(s)
                if chain[-1] == v:
                    s = _Strand(e, chain, pts, len(pts) - 1, -1)
                    if s.first_step_up():
                        rising.append(s)
            rising.sort(key=lambda s: s.slope_key())
            down_darts = [s.dart_at_death() for s in down]
            up_darts = [s.dart_at_birth() for s in rising]
            word_darts = tuple(reversed(down_darts)) + tuple(up_darts)
            shift = 0
            if word_darts:
                cw = tuple(reversed(m.rotation[v]))
                k0 = cw.index(m.marked_dart[v])
                canon = cw[k0:] + cw[:k0]
                for sh in range(len(canon)):
                    if canon[sh:] + canon[:sh] == word_darts:
                        shift = sh
                        break
                else:
                    raise TopologyError(
                        f"sweep word at {v!r} is not a rotation of its boundary word"
                    )
            program.append(
                VertexEvent(
                    position=p,
                    vertex=v,
                    down_edges=tuple(s.edge for s in down),
                    down_up=tuple(s.direction == +1 for s in down),
                    word_darts=word_darts,
                    shift=shift,
                )
            )
            for i in reversed(idxs):
                del frontier[i]
            frontier[p:p] = rising
    if frontier:
        raise TopologyError("sweep finished with open strands")
    return program


def _generic_rotation(ref: _Refined, pos):
    """Rotate coordinates so relevant ys are distinct and no segment is level."""
    for attempt in range(96):
        angle = 0.137508 + attempt * 0.04721
        ca, sa = math.cos(angle), math.sin(angle)
        rotated = {v: (ca * x - sa * y, sa * x + ca * y) for v, (x, y) in pos.items()}
        ok = True
        ys = []
        for chain in ref.edge_paths.values():
            for a, b in zip(chain, chain[1:]):
                if abs(rotated[a][1] - rotated[b][1]) < 1e-9:
                    ok = False
                    break
            if not ok:
                break
            ys.extend(rotated[w][1] for w in chain)
        if not ok:
            continue
        ys = sorted(set(ys))
        if all(b - a > 1e-11 for a, b in zip(ys, ys[1:])):
            return rotated
    raise TopologyError("could not find a generic sweep direction")

"""Three-dimensional combinatorial cell complexes.

A :class:`CellComplex3` has oriented edges, disc faces given by boundary
walks, and ball cells given by signed face sets.  The sign of a face in a
cell is +1 when the face's reference orientation agrees with the boundary
orientation the cell induces (outward normal first).  All state-sum data is
derived from this: links of edges are face cycles, links of interior
vertices are sphere maps, and the boundary is a decorated surface.

Sign convention (calibrated against the simplicial case): the sign of a
face in the link word of a directed edge equals the sign with which the
face's reference walk traverses that edge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import TopologyError
from .fusion.planar import SphereMap

Walk = tuple[tuple[str, int], ...]  # ordered (edge id, ±1) traversals


@dataclass
class Face:
    walk: Walk
    label: str

    def traverses(self, edge: str) -> list[int]:
        return [k for k, (e, _) in enumerate(self.walk) if e == edge]


@dataclass
class Cell:
    faces: dict[str, int]  # face id -> sign
    label: str


@dataclass
class CellComplex3:
    vertices: set[str]
    edges: dict[str, tuple[str, str]]  # id -> (tail, head)
    faces: dict[str, Face]
    cells: dict[str, Cell]

    # -- elementary incidence ------------------------------------------------

    def edge_ends(self, e: str) -> tuple[str, str]:
        return self.edges[e]

    def walk_vertices(self, walk: Walk) -> list[str]:
        """Vertex before each traversal of the walk."""
        out = []
        for e, s in walk:
            t, h = self.edges[e]
            out.append(t if s > 0 else h)
        return out

    def check(self) -> None:
        for e, (t, h) in self.edges.items():
            if t not in self.vertices or h not in self.vertices:
                raise TopologyError(f"edge {e!r} has missing endpoints")
        for fid, f in self.faces.items():
            if not f.walk:
                raise TopologyError(f"face {fid!r} has an empty walk")
            vs = self.walk_vertices(f.walk)
            for k, (e, s) in enumerate(f.walk):
                t, h = self.edges[e]
                head = h if s > 0 else t
                nxt = vs[(k + 1) % len(f.walk)]
                if head != nxt:
                    raise TopologyError(f"face {fid!r} walk does not chain at {k}")
        # every face bounds one or two cells, with opposite signs if two
        count: dict[str, list[int]] = {}
        for cid, c in self.cells.items():
            for fid, sign in c.faces.items():
                if fid not in self.faces:
                    raise TopologyError(f"cell {cid!r} uses unknown face {fid!r}")
                count.setdefault(fid, []).append(sign)
        for fid in self.faces:
            signs = count.get(fid, [])
            if len(signs) == 0 or len(signs) > 2:
                raise TopologyError(f"face {fid!r} bounds {len(signs)} cells")
            if len(signs) == 2 and signs[0] + signs[1] != 0:
                raise TopologyError(f"face {fid!r} has equal signs in both cells")
        # interior edge links must close into cycles
        for e in self.edges:
            if not self.edge_on_boundary(e):
                self.edge_link_walk(e)

    # -- boundary ------------------------------------------------------------

    def boundary_faces(self) -> set[str]:
        count: dict[str, int] = {}
        for c in self.cells.values():
            for fid in c.faces:
                count[fid] = count.get(fid, 0) + 1
        return {fid for fid in self.faces if count.get(fid, 0) == 1}

    def boundary_edges(self) -> set[str]:
        out = set()
        for fid in self.boundary_faces():
            for e, _ in self.faces[fid].walk:
                out.add(e)
        return out

    def boundary_vertices(self) -> set[str]:
        out = set()
        for e in self.boundary_edges():
            out.update(self.edges[e])
        return out

    def edge_on_boundary(self, e: str) -> bool:
        return e in self.boundary_edges()

    # -- links ---------------------------------------------------------------

    def _face_cells(self) -> dict[str, list[tuple[str, int]]]:
        out: dict[str, list[tuple[str, int]]] = {}
        for cid, c in sorted(self.cells.items()):
            for fid, sign in c.faces.items():
                out.setdefault(fid, []).append((cid, sign))
        return out

    def edge_link_walk(self, e: str) -> list[tuple[str, int, int]]:
        """Cyclic walk of (face, sign, traversal position) around edge ``e``.

        The walk is taken around the edge directed tail to head, starting at
        the lexicographically smallest (face, position) traversal.  Interior
        edges only.
        """
        traversals = []
        for fid in sorted(self.faces):
            f = self.faces[fid]
            for k in f.traverses(e):
                traversals.append((fid, f.walk[k][1], k))
        if not traversals:
            raise TopologyError(f"edge {e!r} lies in no face")
        face_cells = self._face_cells()
        # index traversals per cell at this edge
        by_cell: dict[str, list[tuple[str, int, int]]] = {}
        for fid, s, k in traversals:
            for cid, _ in face_cells[fid]:
                by_cell.setdefault(cid, []).append((fid, s, k))
        start = min(traversals)
        walk = []
        current = start
        while True:
            walk.append(current)
            fid, s, k = current
            nxt_cell = None
            for cid, sign in face_cells[fid]:
                if sign == -s:
                    nxt_cell = cid
                    break
            if nxt_cell is None:
                raise TopologyError(
                    f"edge {e!r}: no cell continues past face {fid!r}"
                )
            candidates = [
                t for t in by_cell.get(nxt_cell, [])
                if t != current
                and t[1] * self._cell_sign(nxt_cell, t[0]) > 0
            ]
            if len(candidates) != 1:
                raise TopologyError(
                    f"edge {e!r}: link is not a cycle at cell {nxt_cell!r}"
                )
            current = candidates[0]
            if current == start:
                break
            if len(walk) > 2 * len(traversals):
                raise TopologyError(f"edge {e!r}: link walk does not close")
        if len(walk) != len(traversals):
            raise TopologyError(f"edge {e!r}: link has several components")
        return walk

    def _cell_sign(self, cid: str, fid: str) -> int:
        return self.cells[cid].faces[fid]

    def edge_word(self, e: str) -> tuple[tuple[str, int], ...]:
        """Canonical link word of the edge directed tail to head."""
        return tuple((fid, s) for fid, s, _ in self.edge_link_walk(e))

    def vertex_link_map(self, v: str, germ_marks: dict | None = None) -> SphereMap:
        """The link sphere graph of an interior vertex.

        Graph vertices are edge germs ``f"{edge}@{end}"`` (end 0 = tail),
        graph edges are face corners at ``v`` coloured by the face id.
        ``germ_marks`` optionally overrides the marked (starting) corner per
        germ, as (face, traversal position) pairs.
        """
        germs = []
        for e in sorted(self.edges):
            t, h = self.edges[e]
            if t == v:
                germs.append((e, 0))
            if h == v:
                germs.append((e, 1))
        # corners of faces at v: keyed by (face, junction position)
        corner_ids: dict[tuple[str, int], int] = {}
        corner_info = []
        for fid in sorted(self.faces):
            f = self.faces[fid]
            vs = self.walk_vertices(f.walk)
            n = len(f.walk)
            for k in range(n):
                if vs[k] == v:
                    # junction before traversal k: arrives via k-1, leaves via k
                    e_in, s_in = f.walk[(k - 1) % n]
                    e_out, s_out = f.walk[k]
                    germ_in = (e_in, 1 if s_in > 0 else 0)   # end at v
                    germ_out = (e_out, 0 if s_out > 0 else 1)
                    corner_ids[(fid, k)] = len(corner_info)
                    corner_info.append((fid, k, germ_out, germ_in))
        # darts: corner edge oriented out-germ -> in-germ
        rotation: dict[str, tuple[int, ...]] = {}
        marked: dict[str, int] = {}
        for e, end in germs:
            walk = self.edge_link_walk(e)
            if end == 1:
                walk = [(fid, -s, k) for fid, s, k in reversed(walk)]
            darts = []
            for fid, s, k in walk:
                corner_key = self._corner_at(fid, k, end)
                c = corner_ids[corner_key]
                _, j, germ_out, germ_in = corner_info[c]
                n_f = len(self.faces[fid].walk)
                if k == j and germ_out == (e, end):
                    darts.append(2 * c)       # this traversal leaves the corner
                elif (j - 1) % n_f == k and germ_in == (e, end):
                    darts.append(2 * c + 1)   # this traversal arrives at it
                else:
                    raise TopologyError(
                        f"corner {corner_key} not incident to germ {(e, end)}"
                    )
            name = f"{e}@{end}"
            rotation[name] = tuple(reversed(darts))
            marked[name] = darts[0]
        dart_vertex = {}
        for c, (fid, k, germ_out, germ_in) in enumerate(corner_info):
            dart_vertex[2 * c] = f"{germ_out[0]}@{germ_out[1]}"
            dart_vertex[2 * c + 1] = f"{germ_in[0]}@{germ_in[1]}"
        # drop corners at v that belong to faces not touching any germ of v?
        # (cannot happen: corners at v always touch germs at v)
        return SphereMap(
            rotation=rotation,
            edge_color=[corner_info[c][0] for c in range(len(corner_info))],
            dart_vertex=dart_vertex,
            marked_dart=marked,
        )

    def _corner_at(self, fid: str, traversal_k: int, end: int) -> tuple[str, int]:
        """Corner of face ``fid`` adjacent to the given end of traversal ``k``.

        End 0 is the edge's tail.  When the traversal runs forward, the tail
        end is the junction before it (position k) and the head end the
        junction after it; backwards traversals swap the two.  This stays
        correct for loop edges, where both ends sit at the same vertex.
        """
        f = self.faces[fid]
        n = len(f.walk)
        _, sign = f.walk[traversal_k]
        if (sign > 0) == (end == 0):
            return (fid, traversal_k)
        return (fid, (traversal_k + 1) % n)

    # -- global sanity ---------------------------------------------------------

    def euler_characteristic(self) -> int:
        return (
            len(self.vertices) - len(self.edges) + len(self.faces) - len(self.cells)
        )


# ---------------------------------------------------------------------------
# Simplicial builders
# ---------------------------------------------------------------------------


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def complex_from_tetrahedra(
    tets: list[tuple],
    face_label: str,
    cell_label: str,
    face_labels: dict | None = None,
    name_prefix: str = "",
) -> CellComplex3:
    """A closed oriented simplicial complex as a cell complex.

    Vertices may be arbitrary sortable ids.  Faces are sorted triples with
    the reference walk in ascending order; cells get consistent orientations
    by propagation and enter with boundary signs relative to the references.
    ``face_labels`` optionally overrides the label of individual (sorted)
    triangles.
    """
    tets = [tuple(sorted(t)) for t in tets]
    tri_set = sorted({tuple(sorted(c)) for t in tets for c in itertools.combinations(t, 3)})
    edge_set = sorted({tuple(sorted(c)) for t in tets for c in itertools.combinations(t, 2)})
    vions = sorted({v for t in tets for v in t})

    def vname(v):
        return f"{name_prefix}v{v}"

    def ename(e):
        return f"{name_prefix}e{e[0]}.{e[1]}"

    def fname(t):
        return f"{name_prefix}f{t[0]}.{t[1]}.{t[2]}"

    def cname(t):
        return f"{name_prefix}c" + ".".join(map(str, t))

    # orientations by propagation
    tri_tets: dict[tuple, list[int]] = {}
    for i, t in enumerate(tets):
        for tri in itertools.combinations(t, 3):
            tri_tets.setdefault(tri, []).append(i)
    orient = {0: 1}
    queue = [0]
    while queue:
        i = queue.pop()
        for tri in itertools.combinations(tets[i], 3):
            for j in tri_tets[tri]:
                if j == i or j in orient:
                    continue
                # shared face must receive opposite induced signs
                si = _induced_sign(tets[i], tri)
                sj = _induced_sign(tets[j], tri)
                orient[j] = -orient[i] * si * sj
                queue.append(j)
    if len(orient) != len(tets):
        raise TopologyError("tetrahedron list is not connected")

    edges = {ename(e): (vname(e[0]), vname(e[1])) for e in edge_set}
    faces = {}
    for tri in tri_set:
        p, q, r = tri
        walk = (
            (ename((p, q)), 1),
            (ename((q, r)), 1),
            (ename((p, r)), -1),
        )
        label = face_label
        if face_labels and tri in face_labels:
            label = face_labels[tri]
        faces[fname(tri)] = Face(walk=walk, label=label)
    cells = {}
    for i, t in enumerate(tets):
        fsigns = {}
        for tri in itertools.combinations(t, 3):
            fsigns[fname(tuple(sorted(tri)))] = orient[i] * _induced_sign(t, tri)
        cells[cname(t) + f"#{i}"] = Cell(faces=fsigns, label=cell_label)
    cx = CellComplex3(
        vertices={vname(v) for v in vions},
        edges=edges,
        faces=faces,
        cells=cells,
    )
    cx.check()
    return cx


def _induced_sign(tet: tuple, tri: tuple) -> int:
    """Sign of the sorted triple in the boundary of the sorted tetrahedron."""
    omitted = [v for v in tet if v not in tri][0]
    i = tet.index(omitted)
    return (-1) ** i


# ---------------------------------------------------------------------------
# Orientation solving
# ---------------------------------------------------------------------------


def orient_cell(faces: dict[str, Face], members: list[str]) -> dict[str, int]:
    """Signs making the listed face walks a coherently oriented sphere.

    Each edge of the union must be traversed exactly twice; the signs are
    fixed up to a global flip, resolved by giving the smallest face +1.
    """
    by_edge: dict[str, list[tuple[str, int]]] = {}
    for fid in members:
        for e, s in faces[fid].walk:
            by_edge.setdefault(e, []).append((fid, s))
    sign: dict[str, int] = {}
    order = sorted(members)
    for root in order:
        if root in sign:
            continue
        sign[root] = 1
        stack = [root]
        while stack:
            f = stack.pop()
            for e, s in faces[f].walk:
                traversals = by_edge[e]
                if len(traversals) != 2:
                    raise TopologyError(
                        f"edge {e!r} traversed {len(traversals)} times in a cell"
                    )
                (f1, s1), (f2, s2) = traversals
                other, so = (f2, s2) if (f1, s1) == (f, s) else (f1, s1)
                want = -s * sign[f] * so
                if other in sign:
                    if sign[other] != want:
                        raise TopologyError(
                            "cell boundary is not orientable with these walks"
                        )
                else:
                    sign[other] = want
                    stack.append(other)
    if len(sign) != len(set(members)):
        raise TopologyError("cell boundary is not connected")
    return sign


def build_complex(
    vertices: set[str],
    edges: dict[str, tuple[str, str]],
    faces: dict[str, Face],
    cell_members: dict[str, list[str]],
    cell_labels: dict[str, str],
) -> CellComplex3:
    """Assemble a complex, solving all cell orientations automatically.

    Per-cell signs come from :func:`orient_cell`; global flips are then
    propagated so that every interior face receives opposite signs from its
    two cells, with the smallest cell id anchored at +1 per component.
    """
    local: dict[str, dict[str, int]] = {
        cid: orient_cell(faces, members) for cid, members in cell_members.items()
    }
    face_cells: dict[str, list[str]] = {}
    for cid, members in cell_members.items():
        for f in members:
            face_cells.setdefault(f, []).append(cid)
    flip: dict[str, int] = {}
    for root in sorted(cell_members):
        if root in flip:
            continue
        flip[root] = 1
        stack = [root]
        while stack:
            cid = stack.pop()
            for f in cell_members[cid]:
                cells = face_cells[f]
                if len(cells) != 2:
                    continue
                other = cells[0] if cells[1] == cid else cells[1]
                if other == cid:
                    continue
                want = -flip[cid] * local[cid][f] * local[other][f]
                if other in flip:
                    if flip[other] != want:
                        raise TopologyError("cells cannot be consistently oriented")
                else:
                    flip[other] = want
                    stack.append(other)
    cells = {
        cid: Cell(
            faces={f: flip[cid] * local[cid][f] for f in members},
            label=cell_labels[cid],
        )
        for cid, members in cell_members.items()
    }
    cx = CellComplex3(vertices=vertices, edges=edges, faces=faces, cells=cells)
    cx.check()
    return cx

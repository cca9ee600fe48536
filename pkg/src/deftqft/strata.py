"""Stratified surfaces and bordisms as combinatorial records.

Two tiers: a :class:`StratifiedBordism` always carries stratum records
(labels, links, Euler characteristics) sufficient for validation and the
trivial-extension engine; bordisms built from a :class:`CellComplex3` also
expose the fine data (ball cells, vertex link graphs, collar structure) the
state-sum engine needs.

Surfaces are abstract 2-complexes: edges may be arcs or closed circles, and
faces list their boundary walks explicitly (several walks for non-disc
faces; bare circles are their own walks).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .complexes import Cell, CellComplex3, Face, complex_from_tetrahedra
from .defects import CyclicWord, DefectData, SignedLabel, signed_endpoint, word_is_chain
from .errors import FinenessError, LabelError, ParallelError, TopologyError
from .fusion.planar import SphereMap
from .groups import GroupTable
from .report import ValidationReport

NEUTRAL_LABEL = "1"  # label of refinement-created 2-strata (group identity)


# ---------------------------------------------------------------------------
# Decorated surfaces
# ---------------------------------------------------------------------------


@dataclass
class SurfaceEdge:
    label: str
    tail: str | None = None   # None, None: a closed circle
    head: str | None = None

    @property
    def is_circle(self) -> bool:
        return self.tail is None


@dataclass
class SurfaceFace:
    label: str
    walks: list  # each entry: list[(edge, sign)] or ("circle", edge_id, sign)


@dataclass
class DecoratedSurface:
    """A closed decorated surface as an abstract 2-complex."""

    vertices: dict[str, str | None]        # id -> line label (optional)
    edges: dict[str, SurfaceEdge]
    faces: dict[str, SurfaceFace]
    name: str = "surface"

    def check(self) -> None:
        seen: dict[tuple[str, int], int] = {}
        for fid, f in self.faces.items():
            for walk in f.walks:
                if walk and walk[0] == "circle":
                    _, eid, sign = walk
                    if not self.edges[eid].is_circle:
                        raise TopologyError(f"face {fid!r} uses arc {eid!r} as circle")
                    seen[(eid, sign)] = seen.get((eid, sign), 0) + 1
                    continue
                for k, (eid, sign) in enumerate(walk):
                    e = self.edges[eid]
                    if e.is_circle:
                        raise TopologyError(f"face {fid!r} uses circle {eid!r} in a walk")
                    seen[(eid, sign)] = seen.get((eid, sign), 0) + 1
                    head = e.head if sign > 0 else e.tail
                    nid, nsign = walk[(k + 1) % len(walk)]
                    ne = self.edges[nid]
                    ntail = ne.tail if nsign > 0 else ne.head
                    if head != ntail:
                        raise TopologyError(f"face {fid!r} walk does not chain")
        for eid in self.edges:
            if seen.get((eid, 1), 0) != 1 or seen.get((eid, -1), 0) != 1:
                raise TopologyError(
                    f"edge {eid!r} is not traversed once in each direction"
                )

    def vertex_word(self, v: str) -> tuple[tuple[str, int], ...]:
        """Cyclic word of (edge label ref, sign) around a vertex.

        Signs follow the graph convention: positive when the edge points out
        of the vertex.  The cyclic order chains face corners.
        """
        word_ids = self.vertex_word_ids(v)
        return tuple((self.edges[e].label, s) for e, s in word_ids)

    def vertex_word_ids(self, v: str) -> tuple[tuple[str, int], ...]:
        corners = {}
        for fid, f in sorted(self.faces.items()):
            for w_i, walk in enumerate(f.walks):
                if walk and walk[0] == "circle":
                    continue
                n = len(walk)
                for k in range(n):
                    eid, sign = walk[k]
                    e = self.edges[eid]
                    tail = e.tail if sign > 0 else e.head
                    if tail != v:
                        continue
                    pid, psign = walk[(k - 1) % n]
                    in_germ = self._germ(pid, psign, at_head=True)
                    out_germ = self._germ(eid, sign, at_head=False)
                    corners[out_germ] = in_germ
        if not corners:
            return ()
        start = min(corners)
        cycle = [start]
        germ = corners[start]
        while germ != start:
            cycle.append(germ)
            germ = corners[germ]
            if len(cycle) > 2 * len(corners):
                raise TopologyError(f"vertex {v!r} corners do not close")
        if len(cycle) != len(corners):
            raise TopologyError(f"vertex {v!r} link has several components")
        out = []
        for eid, end in cycle:
            out.append((eid, 1 if end == 0 else -1))
        return tuple(out)

    def _germ(self, eid: str, sign: int, at_head: bool) -> tuple[str, int]:
        # germ key: (edge, end index); end 0 = tail
        e = self.edges[eid]
        if sign > 0:
            return (eid, 1 if at_head else 0)
        return (eid, 0 if at_head else 1)

    def components(self) -> list[set[str]]:
        """Connected components as sets of face ids."""
        adj: dict[str, set[str]] = {fid: set() for fid in self.faces}
        side: dict[tuple[str, int], str] = {}
        for fid, f in self.faces.items():
            for walk in f.walks:
                if walk and walk[0] == "circle":
                    _, eid, sign = walk
                    side[(eid, sign)] = fid
                else:
                    for eid, sign in walk:
                        side[(eid, sign)] = fid
        for eid in self.edges:
            a = side.get((eid, 1))
            b = side.get((eid, -1))
            if a and b:
                adj[a].add(b)
                adj[b].add(a)
        remaining = set(self.faces)
        comps = []
        while remaining:
            start = min(remaining)
            comp = {start}
            stack = [start]
            while stack:
                f = stack.pop()
                for g in adj[f]:
                    if g not in comp:
                        comp.add(g)
                        stack.append(g)
            comps.append(comp)
            remaining -= comp
        return comps

    def face_chi(self, fid: str) -> int:
        """Euler characteristic of the open face (disc = 1, annulus = 0, ...)."""
        f = self.faces[fid]
        b = len(f.walks)
        # open surface with b boundary circles and genus g: chi = 2 - 2g - b;
        # faces are required to be planar pieces here (genus zero)
        return 2 - b

    def euler(self) -> int:
        nv = len(self.vertices)
        ne = len(self.edges)
        nf = len(self.faces)
        return nv - ne + nf


def sphere_with_loops(labels: list[str], name: str = "sphere") -> DecoratedSurface:
    """A 2-sphere with nested label circles and no vertices."""
    edges = {f"l{k}": SurfaceEdge(label=lab) for k, lab in enumerate(labels)}
    faces: dict[str, SurfaceFace] = {}
    n = len(labels)
    for k in range(n + 1):
        walks = []
        if k > 0:
            walks.append(("circle", f"l{k-1}", -1))
        if k < n:
            walks.append(("circle", f"l{k}", 1))
        faces[f"f{k}"] = SurfaceFace(label="*", walks=walks)
    return DecoratedSurface(vertices={}, edges=edges, faces=faces, name=name)


def bare_sphere(name: str = "bare-sphere") -> DecoratedSurface:
    return DecoratedSurface(
        vertices={}, edges={}, faces={"f0": SurfaceFace(label="*", walks=[])}, name=name
    )


def bare_torus(name: str = "bare-torus") -> DecoratedSurface:
    """The hexagonal torus: two vertices, three edges, one hexagon face."""
    edges = {
        "a": SurfaceEdge(label=NEUTRAL_LABEL, tail="v", head="w"),
        "b": SurfaceEdge(label=NEUTRAL_LABEL, tail="w", head="v"),
        "c": SurfaceEdge(label=NEUTRAL_LABEL, tail="v", head="w"),
    }
    faces = {
        "f": SurfaceFace(
            label="*",
            walks=[[("a", 1), ("b", 1), ("c", 1), ("a", -1), ("b", -1), ("c", -1)]],
        )
    }
    return DecoratedSurface(
        vertices={"v": None, "w": None}, edges=edges, faces=faces, name=name
    )



# ---------------------------------------------------------------------------
# Triangulation of surfaces
# ---------------------------------------------------------------------------


def triangulate_surface(s: DecoratedSurface, neutral: str = NEUTRAL_LABEL) -> DecoratedSurface:
    """A simplicial-style refinement: all faces become triangular discs.

    Circle edges are cut into three arcs and every arc is subdivided once,
    so all edges have distinct endpoints.  A face with several boundary
    walks is first merged into one walk by neutral bridge edges (traversed
    once in each direction), then starred from a new centre vertex.  Bare
    sphere components are replaced by tetrahedral spheres.  New edges carry
    the neutral label; subdivided pieces keep their parent's label.
    """
    vertices = dict(s.vertices)
    edges: dict[str, SurfaceEdge] = {}
    faces: dict[str, SurfaceFace] = {}
    pieces: dict[str, list[str]] = {}

    def cut(eid: str, e: SurfaceEdge) -> list[str]:
        if e.is_circle:
            ws = [f"{eid}:w{k}" for k in range(3)]
            for w in ws:
                vertices[w] = None
            names = []
            for k in range(3):
                nid = f"{eid}:s{k}"
                edges[nid] = SurfaceEdge(label=e.label, tail=ws[k], head=ws[(k + 1) % 3])
                names.append(nid)
            return names
        mid = f"{eid}:m"
        vertices[mid] = None
        edges[f"{eid}:s0"] = SurfaceEdge(label=e.label, tail=e.tail, head=mid)
        edges[f"{eid}:s1"] = SurfaceEdge(label=e.label, tail=mid, head=e.head)
        return [f"{eid}:s0", f"{eid}:s1"]

    for eid in sorted(s.edges):
        pieces[eid] = cut(eid, s.edges[eid])

    def refined(walk):
        if walk and walk[0] == "circle":
            _, eid, sign = walk
            segs = pieces[eid]
            return [(p, 1) for p in segs] if sign > 0 else [(p, -1) for p in reversed(segs)]
        out = []
        for eid, sign in walk:
            segs = pieces[eid]
            if sign > 0:
                out.extend((p, 1) for p in segs)
            else:
                out.extend((p, -1) for p in reversed(segs))
        return out

    def walk_tail(w):
        eid, sign = w[0]
        e = edges[eid]
        return e.tail if sign > 0 else e.head

    for fid in sorted(s.faces):
        f = s.faces[fid]
        if not f.walks:
            # bare component: replace by a tetrahedral sphere
            vs = [f"{fid}:p{k}" for k in range(4)]
            for v in vs:
                vertices[v] = None
            eids = {}
            for i in range(4):
                for j in range(i + 1, 4):
                    nid = f"{fid}:q{i}{j}"
                    edges[nid] = SurfaceEdge(label=neutral, tail=vs[i], head=vs[j])
                    eids[(i, j)] = nid
            for k, (i, j, l) in enumerate([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]):
                tri = [(eids[(i, j)], 1), (eids[(j, l)], 1), (eids[(i, l)], -1)]
                omitted = ({0, 1, 2, 3} - {i, j, l}).pop()
                if (-1) ** omitted < 0:
                    tri = [(e, -s) for e, s in reversed(tri)]
                faces[f"{fid}:t{k}"] = SurfaceFace(label=f.label, walks=[tri])
            continue
        walks = [refined(w) for w in f.walks]
        merged = walks[0]
        for extra_i, w2 in enumerate(walks[1:]):
            bridge = f"{fid}:b{extra_i}"
            edges[bridge] = SurfaceEdge(
                label=neutral, tail=walk_tail(merged), head=walk_tail(w2)
            )
            merged = [(bridge, 1)] + w2 + [(bridge, -1)] + merged
        centre = f"{fid}:c"
        vertices[centre] = None
        n = len(merged)
        spokes = []
        for k, (eid2, sign2) in enumerate(merged):
            e2 = edges[eid2]
            corner = e2.tail if sign2 > 0 else e2.head
            nid = f"{fid}:r{k}"
            edges[nid] = SurfaceEdge(label=neutral, tail=centre, head=corner)
            spokes.append(nid)
        for k, (eid2, sign2) in enumerate(merged):
            tri = [(spokes[k], 1), (eid2, sign2), (spokes[(k + 1) % n], -1)]
            faces[f"{fid}:t{k}"] = SurfaceFace(label=f.label, walks=[tri])

    out = DecoratedSurface(vertices=vertices, edges=edges, faces=faces, name=f"{s.name}~")
    out.check()
    return out


# ---------------------------------------------------------------------------
# Stratified bordisms
# ---------------------------------------------------------------------------


@dataclass
class Stratum2:
    label: str
    chi: int
    on_boundary: bool = False


@dataclass
class Stratum1:
    label: str | None
    closed: bool
    link: tuple[tuple[str, int], ...]  # (2-stratum id, sign), canonical rotation
    ends: tuple = ()  # per end: ("vertex", vid) | ("boundary", comp, vid) | ()


@dataclass
class BoundaryComponent:
    role: str                      # "in" | "out"
    surface: DecoratedSurface
    vertex_strand: dict[str, tuple[str, int]] = field(default_factory=dict)
    # surface vertex -> (interior 1-stratum id, end index)
    edge_wall: dict[str, str] = field(default_factory=dict)
    # surface edge -> interior 2-stratum id


@dataclass
class StratifiedBordism:
    """Combinatorial record of a decorated stratified bordism."""

    strata3: dict[str, str]                   # id -> 3-label
    strata2: dict[str, Stratum2]
    strata1: dict[str, Stratum1]
    strata0: dict[str, SphereMap | None]      # interior vertices -> link graph
    boundary: dict[str, BoundaryComponent] = field(default_factory=dict)
    complex: CellComplex3 | None = None
    ball_cells: bool = False
    name: str = "bordism"

    @property
    def closed(self) -> bool:
        return not self.boundary

    def n_cells(self) -> int:
        return len(self.strata3)


def edge_link(b: StratifiedBordism, one_stratum_id: str) -> CyclicWord:
    """The canonical cyclic word of signed 2-strata around a 1-stratum."""
    try:
        s1 = b.strata1[one_stratum_id]
    except KeyError:
        raise LabelError(f"unknown 1-stratum {one_stratum_id!r}") from None
    return CyclicWord(tuple(SignedLabel(fid, sign) for fid, sign in s1.link))


def vertex_link_graph(b: StratifiedBordism, vertex_id: str) -> SphereMap:
    if vertex_id not in b.strata0:
        raise TopologyError(f"{vertex_id!r} is not an interior 0-stratum")
    link = b.strata0[vertex_id]
    if link is None:
        raise TopologyError(f"no link data stored for {vertex_id!r}")
    link.check_sphere()
    return link


def validate_bordism(
    dd: DefectData, b: StratifiedBordism, group: GroupTable | None = None
) -> ValidationReport:
    """Label and adjacency consistency against defect data.

    For group defect data, the condition that the signed product of labels
    around every 1-stratum is the identity is checked via the group table.
    """
    report = ValidationReport()
    for fid, s2 in b.strata2.items():
        if s2.label is None:
            continue
        if s2.label not in dd.d2:
            report.add(f"2-stratum {fid!r}: unknown label {s2.label!r}")
    for eid, s1 in b.strata1.items():
        word_labels = []
        ok = True
        for fid, sign in s1.link:
            if fid not in b.strata2:
                report.add(f"1-stratum {eid!r}: unknown 2-stratum {fid!r}")
                ok = False
                continue
            word_labels.append(SignedLabel(_label_of(b, fid), sign))
        if not ok or not word_labels:
            continue
        word = CyclicWord(tuple(word_labels))
        for detail in word_is_chain(dd, word):
            report.add(f"1-stratum {eid!r}: {detail}")
        if not dd.d1.preimages(word):
            report.add(
                f"1-stratum {eid!r}: link word {word} admits no line label"
            )
        if group is not None:
            pairs = []
            for sl in word.entries:
                try:
                    pairs.append((group.index(sl.label), sl.sign))
                except Exception:
                    pairs.append(None)
            if None not in pairs:
                if group.signed_product(pairs) != group.identity:
                    report.add(
                        f"1-stratum {eid!r}: signed product of labels is not 1"
                    )
    return report


def _label_of(b: StratifiedBordism, fid: str) -> str:
    label = b.strata2[fid].label
    return NEUTRAL_LABEL if label is None else label


# ---------------------------------------------------------------------------
# Building bordisms from cell complexes
# ---------------------------------------------------------------------------


def bordism_from_complex(
    cx: CellComplex3,
    boundary_roles: dict[str, str] | None = None,
    name: str = "bordism",
) -> StratifiedBordism:
    """Wrap a cell complex as a stratified bordism.

    ``boundary_roles`` maps boundary-component names (``b0``, ``b1``, ... in
    deterministic order) to "in"/"out"; all components default to "out".
    """
    bfaces = cx.boundary_faces()
    bedges = cx.boundary_edges()
    bverts = cx.boundary_vertices()

    strata3 = {cid: cx.cells[cid].label for cid in sorted(cx.cells)}
    strata2 = {}
    for fid in sorted(cx.faces):
        if fid in bfaces:
            continue
        strata2[fid] = Stratum2(label=cx.faces[fid].label, chi=1)
    strata1 = {}
    for eid in sorted(cx.edges):
        if eid in bedges:
            continue
        word = cx.edge_word(eid)
        strata1[eid] = Stratum1(label=None, closed=False, link=word)
    strata0 = {}
    for v in sorted(cx.vertices):
        if v in bverts:
            continue
        link = cx.vertex_link_map(v)
        link.edge_color = [c for c in link.edge_color]
        strata0[v] = link

    boundary = _extract_boundary(cx, bfaces, bedges, bverts, boundary_roles)
    b = StratifiedBordism(
        strata3=strata3,
        strata2=strata2,
        strata1=strata1,
        strata0=strata0,
        boundary=boundary,
        complex=cx,
        ball_cells=True,
        name=name,
    )
    _fill_strata1_ends(b)
    return b


def _extract_boundary(cx, bfaces, bedges, bverts, roles):
    if not bfaces:
        return {}
    # boundary surface: faces = boundary faces, edges = boundary edges
    comps: list[set[str]] = []
    remaining = set(bfaces)
    edge_faces: dict[str, list[str]] = {}
    for fid in bfaces:
        for e, _ in cx.faces[fid].walk:
            edge_faces.setdefault(e, []).append(fid)
    while remaining:
        start = min(remaining)
        comp = {start}
        stack = [start]
        while stack:
            f = stack.pop()
            for e, _ in cx.faces[f].walk:
                for g in edge_faces[e]:
                    if g in remaining and g not in comp:
                        comp.add(g)
                        stack.append(g)
        comps.append(comp)
        remaining -= comp

    out = {}
    for ci, comp in enumerate(sorted(comps, key=min)):
        name = f"b{ci}"
        role = (roles or {}).get(name, "out")
        verts = {}
        edges = {}
        faces = {}
        vertex_strand = {}
        edge_wall = {}
        comp_edges = sorted({e for f in comp for e, _ in cx.faces[f].walk})
        comp_verts = sorted({v for e in comp_edges for v in cx.edges[e]})
        for e in comp_edges:
            walls = [
                fid for fid in sorted(cx.faces)
                if fid not in bfaces and e in [x for x, _ in cx.faces[fid].walk]
            ]
            if len(walls) != 1:
                raise FinenessError(
                    f"boundary edge {e!r} must bound exactly one interior face"
                )
            edge_wall[e] = walls[0]
            t, h = cx.edges[e]
            edges[e] = SurfaceEdge(label=cx.faces[walls[0]].label, tail=t, head=h)
        for v in comp_verts:
            germs = []
            for e in sorted(cx.edges):
                if e in bedges:
                    continue
                t, h = cx.edges[e]
                if t == v:
                    germs.append((e, 0))
                if h == v:
                    germs.append((e, 1))
            if len(germs) != 1:
                raise FinenessError(
                    f"boundary vertex {v!r} must meet exactly one interior 1-stratum"
                )
            vertex_strand[v] = germs[0]
            verts[v] = None
        for f in sorted(comp):
            cells = [cid for cid, c in cx.cells.items() if f in c.faces]
            faces[f] = SurfaceFace(label=cx.cells[cells[0]].label, walks=[list(cx.faces[f].walk)])
        surf = DecoratedSurface(vertices=verts, edges=edges, faces=faces, name=name)
        out[name] = BoundaryComponent(
            role=role, surface=surf, vertex_strand=vertex_strand, edge_wall=edge_wall
        )
    return out


# ---------------------------------------------------------------------------
# Bundled manifolds
# ---------------------------------------------------------------------------


def sphere_3_boundary_delta4(
    cell_label: str = "*", face_label: str = NEUTRAL_LABEL
) -> StratifiedBordism:
    """The boundary of the 4-simplex: five tetrahedra triangulating S^3."""
    verts = range(5)
    tets = [tuple(sorted(set(verts) - {i})) for i in verts]
    cx = complex_from_tetrahedra(tets, face_label, cell_label, name_prefix="s3.")
    return bordism_from_complex(cx, name="s3-boundary-delta4")


def product_with_circle(
    s: DecoratedSurface,
    segments: int = 3,
    cell_label: str = "*",
    layer_face_labels: dict[int, str] | None = None,
) -> StratifiedBordism:
    """The closed product of a fine surface with a circle, as prism cells.

    Faces of the surface must be discs (single boundary walk).  With
    ``layer_face_labels`` the horizontal faces of chosen layers get a
    non-neutral label (decorating surface fibres).
    """
    s.check()
    for fid, f in s.faces.items():
        if len(f.walks) != 1 or (f.walks[0] and f.walks[0][0] == "circle"):
            raise FinenessError(f"face {fid!r} of the base is not a walked disc")
    vertices = set()
    edges: dict[str, tuple[str, str]] = {}
    faces: dict[str, Face] = {}
    members: dict[str, list[str]] = {}
    labels: dict[str, str] = {}

    def nv(v, k):
        return f"{v}|{k % segments}"

    def he(v, k):
        k %= segments
        name = f"E{v}|{k}"
        if name not in edges:
            edges[name] = (nv(v, k), nv(v, k + 1))
            vertices.update(edges[name])
        return name

    def le(eid, k):
        k %= segments
        name = f"H{eid}|{k}"
        if name not in edges:
            e = s.edges[eid]
            edges[name] = (nv(e.tail, k), nv(e.head, k))
            vertices.update(edges[name])
        return name

    for k in range(segments):
        for fid in sorted(s.faces):
            walk = s.faces[fid].walks[0]
            label = NEUTRAL_LABEL
            if layer_face_labels and k in layer_face_labels:
                label = layer_face_labels[k]
            faces[f"F{fid}|{k}"] = Face(
                walk=tuple((le(e, k), sg) for e, sg in walk), label=label
            )
        for eid in sorted(s.edges):
            e = s.edges[eid]
            faces[f"W{eid}|{k}"] = Face(
                walk=(
                    (le(eid, k), 1),
                    (he(e.head, k), 1),
                    (le(eid, k + 1), -1),
                    (he(e.tail, k), -1),
                ),
                label=s.edges[eid].label,
            )
        for fid in sorted(s.faces):
            walk = s.faces[fid].walks[0]
            cid = f"P{fid}|{k}"
            members[cid] = [f"F{fid}|{k}", f"F{fid}|{(k+1) % segments}"] + [
                f"W{e}|{k}" for e, _ in walk
            ]
            labels[cid] = cell_label

    from .complexes import build_complex

    cx = build_complex(vertices, edges, faces, members, labels)
    return bordism_from_complex(cx, name=f"{s.name}xS1")


def loop_sphere_fine(label: str = NEUTRAL_LABEL) -> DecoratedSurface:
    """A fine sphere: one vertex, one loop edge, two disc faces."""
    return DecoratedSurface(
        vertices={"w": None},
        edges={"e": SurfaceEdge(label=label, tail="w", head="w")},
        faces={
            "fN": SurfaceFace(label="*", walks=[[("e", 1)]]),
            "fS": SurfaceFace(label="*", walks=[[("e", -1)]]),
        },
        name="loop-sphere",
    )


def s2_x_s1(
    cell_label: str = "*",
    face_label: str = NEUTRAL_LABEL,
    fiber_label: str | None = None,
) -> StratifiedBordism:
    """S^2 x S^1 as prisms over the one-loop sphere times three segments."""
    base = loop_sphere_fine(label=face_label)
    layer_labels = {0: fiber_label} if fiber_label else None
    b = product_with_circle(base, segments=3, cell_label=cell_label,
                            layer_face_labels=layer_labels)
    b.name = "s2xs1"
    return b


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------


def fine_surface(s: DecoratedSurface, neutral: str = NEUTRAL_LABEL) -> DecoratedSurface:
    """A minimal refinement whose faces are prism-ready discs.

    Prism-ready: a single boundary walk with pairwise distinct edges and
    pairwise distinct corner vertices (so the prism over the face is an
    honest ball cell).  Circles get a subdivision vertex, bare sphere
    components become one-loop spheres, multi-walk faces are merged with
    neutral bridges, and the remaining offenders are starred (subdividing
    their edges first when consecutive corners coincide).
    """
    s.check()

    def corners_of(edges, walk):
        out = []
        for eid, sign in walk:
            e = edges[eid]
            out.append(e.tail if sign > 0 else e.head)
        return out

    def prism_ready(edges, walk):
        if len({e for e, _ in walk}) != len(walk):
            return False
        corners = corners_of(edges, walk)
        return len(set(corners)) == len(corners)

    # phase A: normalise to single-walk faces with arc edges
    vertices = dict(s.vertices)
    edges: dict[str, SurfaceEdge] = {}
    walks: dict[str, list] = {}
    labels: dict[str, str] = {}
    pieces: dict[str, list[str]] = {}
    for eid in sorted(s.edges):
        e = s.edges[eid]
        if e.is_circle:
            w = f"{eid}:w"
            vertices[w] = None
            edges[f"{eid}:s"] = SurfaceEdge(label=e.label, tail=w, head=w)
            pieces[eid] = [f"{eid}:s"]
        else:
            edges[eid] = e
            pieces[eid] = [eid]

    def refined(walk):
        if walk and walk[0] == "circle":
            _, eid, sign = walk
            return [(pieces[eid][0], sign)]
        out = []
        for eid, sign in walk:
            ps = pieces[eid] if sign > 0 else list(reversed(pieces[eid]))
            out.extend((p, sign) for p in ps)
        return out

    for fid in sorted(s.faces):
        f = s.faces[fid]
        if not f.walks:
            w = f"{fid}:w"
            vertices[w] = None
            loop = f"{fid}:loop"
            edges[loop] = SurfaceEdge(label=neutral, tail=w, head=w)
            walks[f"{fid}:N"] = [(loop, 1)]
            labels[f"{fid}:N"] = f.label
            walks[f"{fid}:S"] = [(loop, -1)]
            labels[f"{fid}:S"] = f.label
            continue
        ws = [refined(w) for w in f.walks]
        merged = ws[0]
        for extra_i, w2 in enumerate(ws[1:]):
            bridge = f"{fid}:b{extra_i}"

            def tail_of(w):
                eid, sign = w[0]
                e = edges[eid]
                return e.tail if sign > 0 else e.head

            edges[bridge] = SurfaceEdge(
                label=neutral, tail=tail_of(merged), head=tail_of(w2)
            )
            merged = [(bridge, 1)] + w2 + [(bridge, -1)] + merged
        walks[fid] = merged
        labels[fid] = f.label

    # phase B: subdivide edges of faces whose consecutive corners coincide
    def consecutive_equal(walk):
        cs = corners_of(edges, walk)
        n = len(cs)
        if n <= 1:
            return len(walk) == 1 and edges[walk[0][0]].tail == edges[walk[0][0]].head and False
        return any(cs[k] == cs[(k + 1) % n] for k in range(n))

    to_subdivide = set()
    for fid, walk in walks.items():
        if not prism_ready(edges, walk) and consecutive_equal(walk):
            to_subdivide.update(e for e, _ in walk)
    halves: dict[str, list[str]] = {}
    for eid in sorted(to_subdivide):
        e = edges.pop(eid)
        mid = f"{eid}+m"
        vertices[mid] = None
        edges[f"{eid}+0"] = SurfaceEdge(label=e.label, tail=e.tail, head=mid)
        edges[f"{eid}+1"] = SurfaceEdge(label=e.label, tail=mid, head=e.head)
        halves[eid] = [f"{eid}+0", f"{eid}+1"]
    if halves:
        for fid in walks:
            out = []
            for eid, sign in walks[fid]:
                if eid not in halves:
                    out.append((eid, sign))
                elif sign > 0:
                    out.extend((h, 1) for h in halves[eid])
                else:
                    out.extend((h, -1) for h in reversed(halves[eid]))
            walks[fid] = out

    # phase C: star the remaining offenders
    faces: dict[str, SurfaceFace] = {}
    for fid in sorted(walks):
        walk = walks[fid]
        if prism_ready(edges, walk):
            faces[fid] = SurfaceFace(label=labels[fid], walks=[walk])
            continue
        centre = f"{fid}:c"
        vertices[centre] = None
        n = len(walk)
        spokes = []
        for k, (eid2, sign2) in enumerate(walk):
            e2 = edges[eid2]
            corner = e2.tail if sign2 > 0 else e2.head
            nid = f"{fid}:r{k}"
            edges[nid] = SurfaceEdge(label=neutral, tail=centre, head=corner)
            spokes.append(nid)
        for k, (eid2, sign2) in enumerate(walk):
            faces[f"{fid}:t{k}"] = SurfaceFace(
                label=labels[fid],
                walks=[[(spokes[k], 1), (eid2, sign2), (spokes[(k + 1) % n], -1)]],
            )
    out = DecoratedSurface(vertices=vertices, edges=edges, faces=faces, name=f"{s.name}~")
    out.check()
    for f in out.faces.values():
        assert prism_ready(out.edges, f.walks[0])
    return out


def cylinder(
    s: DecoratedSurface,
    neutral: str = NEUTRAL_LABEL,
    cell_label: str = "*",
    layers: int = 2,
) -> StratifiedBordism:
    """A fine stratification of surface x interval by prism cells.

    The surface is refined to a fine one; three layers of prisms are
    stacked, so every copy of the surface skeleton at the inner layers
    consists of honest interior strata (the middle recolouring makes the
    cylinder a nontrivial projector for the state-sum engine), while both
    boundary components are collared copies of the refined surface.
    """
    st = fine_surface(s, neutral=neutral)

    vertices = set()
    edges: dict[str, tuple[str, str]] = {}
    faces: dict[str, Face] = {}
    members: dict[str, list[str]] = {}
    labels: dict[str, str] = {}

    def nv(v, k):
        return f"{v}|{k}"

    def he(v, k):
        name = f"E{v}|{k}"
        if name not in edges:
            edges[name] = (nv(v, k), nv(v, k + 1))
            vertices.update(edges[name])
        return name

    def le(eid, k):
        name = f"H{eid}|{k}"
        if name not in edges:
            e = st.edges[eid]
            edges[name] = (nv(e.tail, k), nv(e.head, k))
            vertices.update(edges[name])
        return name

    for k in range(layers + 1):
        for fid in sorted(st.faces):
            walk = st.faces[fid].walks[0]
            label = st.faces[fid].label if k in (0, layers) else neutral
            faces[f"F{fid}|{k}"] = Face(
                walk=tuple((le(e, k), sg) for e, sg in walk), label=label
            )
    for k in range(layers):
        for eid in sorted(st.edges):
            e = st.edges[eid]
            faces[f"W{eid}|{k}"] = Face(
                walk=(
                    (le(eid, k), 1),
                    (he(e.head, k), 1),
                    (le(eid, k + 1), -1),
                    (he(e.tail, k), -1),
                ),
                label=st.edges[eid].label,
            )
        for fid in sorted(st.faces):
            walk = st.faces[fid].walks[0]
            cid = f"P{fid}|{k}"
            members[cid] = [f"F{fid}|{k}", f"F{fid}|{k+1}"] + sorted(
                {f"W{e}|{k}" for e, _ in walk}
            )
            labels[cid] = cell_label

    from .complexes import build_complex

    cx = build_complex(vertices, edges, faces, members, labels)
    b = bordism_from_complex(cx, name=f"cylinder({s.name})")
    for name, comp in b.boundary.items():
        verts = set(comp.surface.vertices)
        comp.role = "in" if any(v.endswith("|0") for v in verts) else "out"
    _fill_strata1_ends(b)
    return b


def _tri_corners(st: DecoratedSurface, walk) -> list[str]:
    corners = []
    for e, s in walk:
        edge = st.edges[e]
        corners.append(edge.tail if s > 0 else edge.head)
    return corners


def _fill_strata1_ends(b: StratifiedBordism) -> None:
    """Record where each interior 1-stratum ends (vertex or boundary)."""
    cx = b.complex
    if cx is None:
        return
    bvert_comp = {}
    for name, comp in b.boundary.items():
        for v in comp.surface.vertices:
            bvert_comp[v] = name
    for eid, s1 in b.strata1.items():
        ends = []
        for v in cx.edges[eid]:
            if v in b.strata0:
                ends.append(("vertex", v))
            elif v in bvert_comp:
                ends.append(("boundary", bvert_comp[v], v))
            else:
                raise TopologyError(
                    f"1-stratum {eid!r} ends at unclassified vertex {v!r}"
                )
        s1.ends = tuple(ends)


# ---------------------------------------------------------------------------
# Linear fills
# ---------------------------------------------------------------------------


def linear_fill(s: DecoratedSurface, cell_label: str = "*") -> StratifiedBordism:
    """Cone a genus-zero decorated surface to a stratified ball.

    The apex is an interior 0-stratum whose link graph is the surface graph
    itself (circles become vertex-free loops); each surface vertex cones to
    an open 1-stratum, each edge to a disc 2-stratum, each face to a
    3-stratum.  A bare sphere gives a ball with no interior strata.
    """
    s.check()
    strata3 = {f"fill({f})": cell_label for f in sorted(s.faces)}
    if not s.edges and not s.vertices:
        if len(s.faces) != 1:
            raise TopologyError("bare fill needs a single sphere face")
        surf = s
        comp = BoundaryComponent(role="out", surface=surf)
        return StratifiedBordism(
            strata3=strata3, strata2={}, strata1={}, strata0={},
            boundary={"b0": comp}, complex=None, ball_cells=True,
            name=f"fill({s.name})",
        )
    strata2 = {}
    for eid in sorted(s.edges):
        strata2[f"cone({eid})"] = Stratum2(label=s.edges[eid].label, chi=1)
    strata1 = {}
    rotation = {}
    marked = {}
    apex_edges = []
    eidx = {}
    for eid in sorted(s.edges):
        if not s.edges[eid].is_circle:
            eidx[eid] = len(apex_edges)
            apex_edges.append(eid)
    dart_vertex = {}
    for v in sorted(s.vertices):
        word_ids = s.vertex_word_ids(v)
        link = tuple((f"cone({e})", sign) for e, sign in word_ids)
        strata1[f"cone({v})"] = Stratum1(
            label=s.vertices.get(v), closed=False, link=link,
            ends=(("vertex", "apex"), ("boundary", "b0", v)),
        )
        darts = []
        for e, sign in word_ids:
            d = 2 * eidx[e] + (0 if sign > 0 else 1)
            darts.append(d)
            dart_vertex[d] = f"cone({v})@0"
        rotation[f"cone({v})@0"] = tuple(reversed(darts))
        marked[f"cone({v})@0"] = darts[0]
    free = [f"cone({e})" for e in sorted(s.edges) if s.edges[e].is_circle]
    apex_link = SphereMap(
        rotation=rotation,
        edge_color=[f"cone({e})" for e in apex_edges],
        dart_vertex=dart_vertex,
        free_loops=free,
        marked_dart=marked,
    )
    apex_link.check_sphere()
    surf = s
    comp = BoundaryComponent(
        role="out",
        surface=surf,
        vertex_strand={v: (f"cone({v})", 1) for v in s.vertices},
        edge_wall={e: f"cone({e})" for e in s.edges},
    )
    ball_flags = all(s.face_chi(f) == 1 or not s.faces[f].walks for f in s.faces)
    return StratifiedBordism(
        strata3=strata3,
        strata2=strata2,
        strata1=strata1,
        strata0={"apex": apex_link},
        boundary={"b0": comp},
        complex=None,
        ball_cells=ball_flags,
        name=f"fill({s.name})",
    )


# ---------------------------------------------------------------------------
# Refinement moves
# ---------------------------------------------------------------------------


def refine(b: StratifiedBordism, move: str, site: str) -> StratifiedBordism:
    """Apply a single refinement move to a complex-backed bordism.

    Moves: ``edge-subdivide`` (new 0-stratum on a 1-stratum),
    ``face-star`` (star a 2-stratum from a new centre), ``cell-cone``
    (cone a 3-stratum from a new centre; new 2-strata are neutral).
    """
    from .complexes import build_complex

    cx = b.complex
    if cx is None:
        raise FinenessError("refinement needs a complex-backed bordism")
    vertices = set(cx.vertices)
    edges = dict(cx.edges)
    faces = {fid: Face(walk=tuple(f.walk), label=f.label) for fid, f in cx.faces.items()}
    members = {cid: sorted(c.faces) for cid, c in cx.cells.items()}
    labels = {cid: c.label for cid, c in cx.cells.items()}

    if move == "edge-subdivide":
        if site not in edges:
            raise LabelError(f"unknown edge {site!r}")
        t, h = edges.pop(site)
        m = f"{site}:mid"
        vertices.add(m)
        edges[f"{site}:0"] = (t, m)
        edges[f"{site}:1"] = (m, h)
        for fid, f in faces.items():
            walk = []
            for e, sgn in f.walk:
                if e != site:
                    walk.append((e, sgn))
                elif sgn > 0:
                    walk.extend([(f"{site}:0", 1), (f"{site}:1", 1)])
                else:
                    walk.extend([(f"{site}:1", -1), (f"{site}:0", -1)])
            faces[fid] = Face(walk=tuple(walk), label=f.label)
    elif move == "face-star":
        if site not in faces:
            raise LabelError(f"unknown face {site!r}")
        f = faces.pop(site)
        centre = f"{site}:c"
        vertices.add(centre)
        walk = f.walk
        n = len(walk)
        spokes = []
        for k, (e, sgn) in enumerate(walk):
            t, h = edges[e]
            corner = t if sgn > 0 else h
            spoke = f"{site}:r{k}"
            edges[spoke] = (centre, corner)
            spokes.append(spoke)
        new_faces = []
        for k, (e, sgn) in enumerate(walk):
            nid = f"{site}:t{k}"
            faces[nid] = Face(
                walk=((spokes[k], 1), (e, sgn), (spokes[(k + 1) % n], -1)),
                label=f.label,
            )
            new_faces.append(nid)
        for cid in members:
            if site in members[cid]:
                members[cid] = sorted(set(members[cid]) - {site} | set(new_faces))
    elif move == "cell-cone":
        if site not in members:
            raise LabelError(f"unknown cell {site!r}")
        # coning needs every boundary face to have pairwise distinct edges
        # and corners; prepare the site with subdivisions and stars if not
        prep = _cone_preparation(b, site)
        if prep is not None:
            return refine(prep, "cell-cone", site)
        boundary_faces = members.pop(site)
        labels_site = labels.pop(site)
        centre = f"{site}:a"
        vertices.add(centre)
        cell_verts = set()
        cell_edges = set()
        for fid in boundary_faces:
            for e, _ in faces[fid].walk:
                cell_edges.add(e)
                cell_verts.update(edges[e])
        spoke = {}
        for v in sorted(cell_verts):
            spoke[v] = f"{site}:s{v}"
            edges[spoke[v]] = (v, centre)
        conef = {}
        for e in sorted(cell_edges):
            t, h = edges[e]
            nid = f"{site}:k{e}"
            conef[e] = nid
            faces[nid] = Face(
                walk=((e, 1), (spoke[h], 1), (spoke[t], -1)),
                label=NEUTRAL_LABEL,
            )
        for fid in boundary_faces:
            nid = f"{site}:cell{fid}"
            members[nid] = sorted([fid] + [conef[e] for e, _ in faces[fid].walk])
            labels[nid] = labels_site
    else:
        raise LabelError(f"unknown refinement move {move!r}")

    roles = {name: comp.role for name, comp in b.boundary.items()}
    cx2 = build_complex(vertices, edges, faces, members, labels)
    out = bordism_from_complex(cx2, boundary_roles=None, name=f"{b.name}+{move}")
    for name, comp in out.boundary.items():
        if name in roles:
            comp.role = roles[name]
    _fill_strata1_ends(out)
    return out


# ---------------------------------------------------------------------------
# Straight-product cylinders (records tier, for the trivial engine)
# ---------------------------------------------------------------------------


def straight_cylinder(s: DecoratedSurface, cell_label: str = "*") -> StratifiedBordism:
    """The product stratification of surface x interval, no new strata."""
    s.check()
    strata3 = {f"{f}xI": cell_label for f in sorted(s.faces)}
    strata2 = {}
    for eid in sorted(s.edges):
        e = s.edges[eid]
        strata2[f"{eid}xI"] = Stratum2(label=e.label, chi=0 if e.is_circle else 1)
    strata1 = {}
    for v in sorted(s.vertices):
        link = tuple((f"{e}xI", sign) for e, sign in s.vertex_word_ids(v))
        strata1[f"{v}xI"] = Stratum1(
            label=s.vertices.get(v), closed=False, link=link,
            ends=(("boundary", "b0", v), ("boundary", "b1", v)),
        )
    comp_in = BoundaryComponent(
        role="in", surface=s,
        vertex_strand={v: (f"{v}xI", 0) for v in s.vertices},
        edge_wall={e: f"{e}xI" for e in s.edges},
    )
    comp_out = BoundaryComponent(
        role="out", surface=s,
        vertex_strand={v: (f"{v}xI", 1) for v in s.vertices},
        edge_wall={e: f"{e}xI" for e in s.edges},
    )
    return StratifiedBordism(
        strata3=strata3, strata2=strata2, strata1=strata1, strata0={},
        boundary={"b0": comp_in, "b1": comp_out},
        complex=None, ball_cells=False, name=f"{s.name}xI",
    )


def _cone_preparation(b: StratifiedBordism, site: str) -> StratifiedBordism | None:
    """One preparatory move making a cell closer to cone-ready, or None."""
    cx = b.complex
    cell = cx.cells[site]
    for fid in sorted(cell.faces):
        walk = cx.faces[fid].walk
        edges_seq = [e for e, _ in walk]
        corners = cx.walk_vertices(walk)
        distinct = len(set(edges_seq)) == len(edges_seq) and len(set(corners)) == len(corners)
        if distinct:
            continue
        n = len(corners)
        if any(corners[k] == corners[(k + 1) % n] for k in range(n)) or len(walk) == 1:
            # subdivide the first edge whose endpoints collide along the walk
            for k in range(n):
                if corners[k] == corners[(k + 1) % n]:
                    return refine(b, "edge-subdivide", walk[k][0])
            return refine(b, "edge-subdivide", walk[0][0])
        return refine(b, "face-star", fid)
    return None

"""The two defect TQFT engines.

Engine A ("triv") extends the trivial TQFT: state spaces are direct sums
over colourings of tensor products of invariant spaces at surface vertices,
bordisms act through copairings of edge spaces, and closed 1-strata
contribute dimension factors.

Engine B ("statesum") is the Turaev-Viro-type state sum on fine bordisms:
a colouring-weighted contraction of vertex link-graph evaluations through
edge copairings, normalised by the neutral global dimension per 3-stratum.
Outgoing boundary slots are converted through the evaluation pairings,
which makes gluing equal to matrix composition and the straight collar act
as the identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import FinenessError, TopologyError
from .fusion.category import FusionCategoryData, reversed_word
from .fusion.evaluate import edge_pairing, evaluate_sphere_graph
from .fusion.planar import SphereMap
from .strata import DecoratedSurface, NEUTRAL_LABEL, StratifiedBordism, cylinder

Colouring = tuple  # sorted tuple of (key, simple index) pairs


def label_grade(cat: FusionCategoryData, label: str | None) -> int:
    """Group element index carried by a surface label."""
    if cat.group.order == 1:
        return cat.group.identity
    if label is None or label == NEUTRAL_LABEL:
        return cat.group.identity
    return cat.group.index(label)


def admissible_simples(cat: FusionCategoryData, label: str | None) -> tuple[int, ...]:
    g = label_grade(cat, label)
    return tuple(i for i in range(len(cat.simples)) if cat.grade[i] == g)


def enumerate_colourings(cat, labelled: dict[str, str | None], constraints=()):
    """Lexicographic colourings of labelled strata, grade-admissible.

    ``constraints`` is a list of signed 2-stratum words (edge links); a
    backtracking search rejects partial colourings as soon as a fully
    coloured word has no invariant vectors.
    """
    ids = sorted(labelled)
    index = {fid: k for k, fid in enumerate(ids)}
    pools = [admissible_simples(cat, labelled[i]) for i in ids]
    triggers: dict[int, list] = {}
    for word in constraints:
        if not word:
            continue
        last = max(index[fid] for fid, _ in word)
        triggers.setdefault(last, []).append(word)

    n = len(ids)
    assignment: dict[str, int] = {}

    def admissible_here(k: int) -> bool:
        for word in triggers.get(k, ()):  # all faces of the word are set
            coloured = tuple((assignment[fid], sign) for fid, sign in word)
            if cat.hom_dimension_objects(cat.resolve_word(coloured)) == 0:
                return False
        return True

    def rec(k: int):
        if k == n:
            yield dict(assignment)
            return
        fid = ids[k]
        for colour in pools[k]:
            assignment[fid] = colour
            if admissible_here(k):
                yield from rec(k + 1)
        del assignment[fid]

    yield from rec(0)


def colour_key(c: dict) -> Colouring:
    return tuple(sorted(c.items()))


# ---------------------------------------------------------------------------
# Shared block-map container
# ---------------------------------------------------------------------------


@dataclass
class BlockMap:
    """Block linear map keyed by (incoming, outgoing) boundary colourings."""

    blocks: dict
    in_components: list[str]
    out_components: list[str]
    in_blocks: dict = field(default_factory=dict)
    out_blocks: dict = field(default_factory=dict)
    bordism: StratifiedBordism | None = None

    def compose(self, other: "BlockMap") -> dict:
        """Matrix composition self after other (other feeds into self)."""
        out: dict = {}
        for (cin1, cmid1), m1 in other.blocks.items():
            for (cmid2, cout2), m2 in self.blocks.items():
                if cmid1 != cmid2:
                    continue
                key = (cin1, cout2)
                prod = m2 @ m1
                out[key] = out.get(key, 0) + prod
        return out

    def scalar(self) -> complex:
        total = 0.0 + 0.0j
        for mat in self.blocks.values():
            total += complex(np.asarray(mat).reshape(()))
        return total


@dataclass
class StateSpace:
    """Block dimensions per colouring, with optional projector data."""

    blocks: list[tuple[Colouring, int]]
    projector: np.ndarray | None = None
    rank: int | None = None
    idempotency_defect: float | None = None
    surface: DecoratedSurface | None = None

    @property
    def total_dim(self) -> int:
        return sum(d for _, d in self.blocks)


@dataclass
class InvariantVector:
    """Per-colouring payload of an invariant computation."""

    engine: str
    scalar: complex | None = None
    blocks: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Engine A: the trivial defect extension
# ---------------------------------------------------------------------------


def surface_vertex_word(s: DecoratedSurface, v: str, c: dict[str, int]):
    return tuple((c[e], sign) for e, sign in s.vertex_word_ids(v))


def triv_state_space(cat: FusionCategoryData, s: DecoratedSurface) -> StateSpace:
    s.check()
    labelled = {e: s.edges[e].label for e in s.edges}
    blocks = []
    for c in enumerate_colourings(cat, labelled):
        dim = 1
        for v in sorted(s.vertices):
            dim *= cat.hom_dimension_objects(
                cat.resolve_word(surface_vertex_word(s, v, c))
            )
            if dim == 0:
                break
        blocks.append((colour_key(c), dim))
    return StateSpace(blocks=blocks)


def _edge_word_coloured(b: StratifiedBordism, eid: str, c: dict[str, int]):
    return tuple((c[fid], sign) for fid, sign in b.strata1[eid].link)


def triv_invariant(cat: FusionCategoryData, b: StratifiedBordism) -> InvariantVector:
    """Closed 1-strata give dimension factors; open ones give copairings."""
    if b.closed:
        total = 0.0 + 0.0j
        labelled = {fid: s2.label for fid, s2 in b.strata2.items()}
        constraints = [s1.link for s1 in b.strata1.values()]
        for c in enumerate_colourings(cat, labelled, constraints):
            factor = 1
            for eid, s1 in b.strata1.items():
                if not s1.closed:
                    raise TopologyError(f"closed bordism with open 1-stratum {eid!r}")
                factor *= cat.hom_dimension_objects(
                    cat.resolve_word(_edge_word_coloured(b, eid, c))
                )
                if factor == 0:
                    break
            total += factor
        return InvariantVector(engine="triv", scalar=total)
    bm = triv_map(cat, b)
    return InvariantVector(engine="triv", blocks=bm.blocks)


def triv_map(cat: FusionCategoryData, b: StratifiedBordism) -> BlockMap:
    """The block linear map of a trivial-engine bordism."""
    return _bordism_blocks(cat, b, statesum=False)


# ---------------------------------------------------------------------------
# Engine B: the state sum
# ---------------------------------------------------------------------------


def check_fine(b: StratifiedBordism) -> None:
    if not b.ball_cells:
        raise FinenessError("state sum needs ball 3-strata")
    for fid, s2 in b.strata2.items():
        if s2.chi != 1:
            raise FinenessError(f"2-stratum {fid!r} has chi {s2.chi} != 1")
    for eid, s1 in b.strata1.items():
        if s1.closed or len(s1.ends) != 2:
            raise FinenessError(f"1-stratum {eid!r} is not an open spanning arc")


_LINK_CACHE: dict = {}
_PAIRING_CACHE: dict = {}


def _pairing(cat, word):
    key = (id(cat), word)
    if key not in _PAIRING_CACHE:
        _PAIRING_CACHE[key] = edge_pairing(cat, word)
    return _PAIRING_CACHE[key]


def _link_functional(cat, link: SphereMap, colours, loop_colours):
    sig = (
        id(cat),
        tuple(sorted((v, link.rotation[v], link.marked_dart.get(v)) for v in link.rotation)),
        tuple(colours),
        tuple(loop_colours),
    )
    if sig not in _LINK_CACHE:
        coloured = SphereMap(
            rotation=dict(link.rotation),
            edge_color=list(colours),
            dart_vertex=dict(link.dart_vertex),
            free_loops=list(loop_colours),
            marked_dart=dict(link.marked_dart),
        )
        _LINK_CACHE[sig] = evaluate_sphere_graph(cat, coloured)
    return _LINK_CACHE[sig]


def _contract(tensors):
    """Contract labelled tensors over all shared labels; free labels remain."""
    if not tensors:
        return np.array(1.0 + 0.0j), []
    tensors = [(np.asarray(a, dtype=complex), list(l)) for a, l in tensors]
    while len(tensors) > 1:
        found = None
        for i in range(len(tensors)):
            for j in range(i + 1, len(tensors)):
                shared = set(tensors[i][1]) & set(tensors[j][1])
                if shared:
                    found = (i, j, sorted(shared, key=str))
                    break
            if found:
                break
        if not found:
            a, la = tensors.pop()
            b_, lb = tensors.pop()
            tensors.append((np.tensordot(a, b_, axes=0), la + lb))
            continue
        i, j, shared = found
        a, la = tensors[i]
        b_, lb = tensors[j]
        ax_a = [la.index(s) for s in shared]
        ax_b = [lb.index(s) for s in shared]
        out = np.tensordot(a, b_, axes=(ax_a, ax_b))
        labels = [l for l in la if l not in shared] + [l for l in lb if l not in shared]
        tensors = [t for k, t in enumerate(tensors) if k not in (i, j)]
        tensors.append((out, labels))
    arr, labels = tensors[0]
    return arr, labels


def _bordism_blocks(cat, b: StratifiedBordism, statesum: bool) -> BlockMap:
    """Shared contraction machinery for both engines.

    Engine A skips vertex functionals and normalisation (bordisms without
    interior 0-strata); engine B adds link evaluations and the state-sum
    weights and requires fineness.
    """
    if statesum:
        check_fine(b)
        dim_a1 = cat.global_dimension_neutral()
    elif b.strata0:
        raise TopologyError("trivial engine expects bordisms without 0-strata")
    in_comps = sorted(n for n, c in b.boundary.items() if c.role == "in")
    out_comps = sorted(n for n, c in b.boundary.items() if c.role == "out")

    blocks: dict = {}
    in_block_dims: dict = {}
    out_block_dims: dict = {}
    labelled = {fid: s2.label for fid, s2 in b.strata2.items()}
    constraints = [s1.link for s1 in b.strata1.values() if not s1.closed]
    for ctilde in enumerate_colourings(cat, labelled, constraints):
        words = {}
        closed_factor = 1.0 + 0.0j
        ok = True
        for eid, s1 in b.strata1.items():
            w = _edge_word_coloured(b, eid, ctilde)
            dim = cat.hom_dimension_objects(cat.resolve_word(w))
            if s1.closed:
                closed_factor *= dim
                if dim == 0:
                    ok = False
                    break
                continue
            words[eid] = w
        if not ok:
            continue
        pairings = {eid: _pairing(cat, w) for eid, w in words.items()}

        tensors = []
        if statesum:
            for v in sorted(b.strata0):
                link = b.strata0[v]
                colours = [ctilde[f] for f in link.edge_color]
                loops = [ctilde[f] for f in link.free_loops]
                func = _link_functional(cat, link, colours, loops)
                tensors.append((func.array, list(func.vertices)))
        for eid in words:
            tensors.append((pairings[eid].coev, [f"{eid}@1", f"{eid}@0"]))
        arr, labels = _contract(tensors)

        in_ports, out_ports = [], []
        conversions = []
        for eid, s1 in b.strata1.items():
            if s1.closed:
                continue
            for end_idx, end in enumerate(s1.ends):
                if end[0] != "boundary":
                    continue
                comp_name, vtx = end[1], end[2]
                comp = b.boundary[comp_name]
                port = f"{eid}@{end_idx}"
                if comp.role == "in":
                    in_ports.append((comp_name, vtx, port))
                else:
                    w_port = words[eid] if end_idx == 0 else reversed_word(words[eid])
                    w_out = reversed_word(w_port)
                    conversions.append((port, _pairing(cat, w_out).ev))
                    out_ports.append((comp_name, vtx, port))
        for port, ev in conversions:
            ax = labels.index(port)
            arr = np.tensordot(ev, arr, axes=([1], [ax]))
            arr = np.moveaxis(arr, 0, ax)

        in_ports.sort()
        out_ports.sort()
        if labels:
            order = [labels.index(p) for _, _, p in out_ports] + [
                labels.index(p) for _, _, p in in_ports
            ]
            if sorted(order) != list(range(len(labels))):
                leftover = [
                    k for k in range(len(labels)) if k not in order
                ]
                raise TopologyError(
                    f"unmatched contraction labels: {[labels[k] for k in leftover]}"
                )
            arr = np.transpose(arr, axes=order)
        d_out = 1
        for k in range(len(out_ports)):
            d_out *= arr.shape[k]
        d_in = 1
        for k in range(len(out_ports), arr.ndim):
            d_in *= arr.shape[k]
        mat = arr.reshape(d_out, d_in) * closed_factor

        if statesum:
            weight = dim_a1 ** (-b.n_cells())
            for fid, s2 in b.strata2.items():
                weight *= cat.qdim[ctilde[fid]] ** s2.chi
            for comp_name in out_comps:
                comp = b.boundary[comp_name]
                weight *= dim_a1 ** len(comp.surface.faces)
                for e in comp.surface.edges:
                    weight *= 1.0 / cat.qdim[ctilde[comp.edge_wall[e]]]
            mat = mat * weight

        cin = colour_key(
            {
                (comp_name, e): ctilde[b.boundary[comp_name].edge_wall[e]]
                for comp_name in in_comps
                for e in b.boundary[comp_name].surface.edges
            }
        )
        cout = colour_key(
            {
                (comp_name, e): ctilde[b.boundary[comp_name].edge_wall[e]]
                for comp_name in out_comps
                for e in b.boundary[comp_name].surface.edges
            }
        )
        key = (cin, cout)
        blocks[key] = blocks.get(key, 0) + mat
        in_block_dims[cin] = mat.shape[1]
        out_block_dims[cout] = mat.shape[0]

    return BlockMap(
        blocks=blocks,
        in_components=in_comps,
        out_components=out_comps,
        in_blocks=in_block_dims,
        out_blocks=out_block_dims,
        bordism=b,
    )


def statesum_blocks(cat: FusionCategoryData, b: StratifiedBordism) -> BlockMap:
    return _bordism_blocks(cat, b, statesum=True)


statesum_map = statesum_blocks


def closed_invariant(cat: FusionCategoryData, b: StratifiedBordism) -> complex:
    """The scalar state-sum invariant of a closed fine bordism."""
    if not b.closed:
        raise TopologyError("closed_invariant needs an empty boundary")
    return statesum_blocks(cat, b).scalar()


def statesum_vector(cat: FusionCategoryData, b: StratifiedBordism) -> InvariantVector:
    bm = statesum_blocks(cat, b)
    return InvariantVector(engine="statesum", blocks=bm.blocks)


# ---------------------------------------------------------------------------
# Projectors and state spaces
# ---------------------------------------------------------------------------


def projector_matrix(cat, cyl: StratifiedBordism, tol: float = 1e-6):
    """Dense cylinder map with the two boundary copies identified."""
    bm = statesum_blocks(cat, cyl)
    in_comp = [n for n, c in cyl.boundary.items() if c.role == "in"][0]
    out_comp = [n for n, c in cyl.boundary.items() if c.role == "out"][0]
    pair_of = _cylinder_alignment(cyl, in_comp, out_comp)
    in_keys = sorted(bm.in_blocks)
    offsets = {}
    off = 0
    for k in in_keys:
        offsets[k] = off
        off += bm.in_blocks[k]
    n = off
    mat = np.zeros((n, n), dtype=complex)
    for (cin, cout), arr in bm.blocks.items():
        cout_aligned = colour_key({pair_of[k]: v for k, v in dict(cout).items()})
        if cout_aligned not in offsets:
            continue
        r = offsets[cout_aligned]
        c = offsets[cin]
        mat[r : r + arr.shape[0], c : c + arr.shape[1]] += arr
    return mat, [(k, bm.in_blocks[k]) for k in in_keys]


def state_space(
    cat: FusionCategoryData, s: DecoratedSurface, tol: float = 1e-6
) -> StateSpace:
    """Rank data of the cylinder projector over a decorated surface."""
    cyl = cylinder(s)
    mat, order = projector_matrix(cat, cyl, tol=tol)
    n = mat.shape[0]
    defect = float(np.abs(mat @ mat - mat).max()) if n else 0.0
    if n:
        eigs = np.linalg.eigvals(mat)
        rank = int(np.sum(np.abs(eigs) > tol))
    else:
        rank = 0
    in_comp = [n_ for n_, c in cyl.boundary.items() if c.role == "in"][0]
    return StateSpace(
        blocks=order,
        projector=mat,
        rank=rank,
        idempotency_defect=defect,
        surface=cyl.boundary[in_comp].surface,
    )


def _cylinder_alignment(cyl: StratifiedBordism, in_comp: str, out_comp: str):
    """Map (out component, edge) keys onto (in component, edge) keys."""
    out_edges = cyl.boundary[out_comp].surface.edges
    mapping = {}
    for e in out_edges:
        base = e.rsplit("|", 1)[0]
        mapping[(out_comp, e)] = (in_comp, f"{base}|0")
    return mapping

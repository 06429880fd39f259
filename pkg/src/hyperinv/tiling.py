"""Hyperbolic {7,3} and {5,4} disk tilings and their layer structure.

The graph is generated ring by ring: every gap between consecutive
outward edges of the current boundary circle is closed by one new
face, whose outer arc supplies the next circle. This face-by-face
sweep keeps vertex identity canonical (each vertex is created exactly
once, shared arcs are never duplicated) and produces the rotation
system, rings, faces and dangling boundary legs in one deterministic
pass.

Layer language: circles are indexed from the center outward, the
lattice L_z collects the radial edges crossing between two circles,
with z = 0 the outermost (physical) lattice. The annulus above L_z is
a cyclic word of vertices that either carry a radial edge toward the
center (attachments, 'U') or only radial edges outward ('D');
maximal [U D^k] groups are the unit cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

__all__ = [
    "TilingError",
    "TilingGraph",
    "Cell",
    "Layer",
    "LayerDecomposition",
    "ScaleFactors",
    "build_tiling",
    "layer_decompose",
    "scale_factors",
    "export_text",
]

SUPPORTED = {(7, 3), (5, 4)}
DEFAULT_VERTEX_CAP = 300_000


class TilingError(ValueError):
    pass


def _edge(u: int, v: int) -> tuple:
    return (u, v) if u < v else (v, u)


class TilingGraph:
    """Immutable-by-convention {p,q} disk tiling.

    vertices are 0..n-1 with 0 the center. rings[c] lists circle c
    counterclockwise; leaves are degree-1 endpoints of the dangling
    boundary legs (the physical lattice L0, in cyclic order).
    rot[v] is the counterclockwise neighbor order around v.
    """

    def __init__(self, p, q, depth, rot, rings, ring_of, in_nbr, leaves,
                 boundary_legs, edges, faces):
        self.p = p
        self.q = q
        self.depth = depth
        self.rot = rot
        self.rings = rings
        self.ring_of = ring_of
        self.in_nbr = in_nbr
        self.leaves = leaves
        self.boundary_legs = boundary_legs
        self.edges = edges
        self.faces = faces
        self.n_vertices = len(rot)
        self.edge_id = {e: i for i, e in enumerate(edges)}
        self.is_leaf = [False] * self.n_vertices
        for v in leaves:
            self.is_leaf[v] = True
        self.faces_of = [[] for _ in range(self.n_vertices)]
        for fi, cyc in enumerate(faces):
            for v in cyc:
                self.faces_of[v].append(fi)

    @property
    def vertices(self):
        return range(self.n_vertices)

    def degree(self, v: int) -> int:
        return len(self.rot[v])

    def neighbors(self, v: int):
        return self.rot[v]

    def face_edges(self, fi: int):
        cyc = self.faces[fi]
        return [_edge(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]

    def is_interior(self, v: int) -> bool:
        """Full vertex: degree q and all q faces present."""
        return len(self.rot[v]) == self.q and len(self.faces_of[v]) == self.q


def _projected_counts(p: int, q: int, depth: int) -> int:
    """Exact vertex count of build_tiling(p, q, depth) without building."""
    if depth == 1:
        return 1 + q
    if (p, q) == (7, 3):
        ring = 5 * q          # q cells of [U DDDD]
        n3, n2 = 0, 0
        dangling = 4 * q
        first = True
    else:
        ring = 3 * q          # q cells of [a p p]
        n3, n5 = 0, q
        dangling = 5 * q
        first = True
    total = 1 + ring
    for _ in range(depth - 2):
        if (p, q) == (7, 3):
            if first:
                n3, n2 = 3 * q, q     # children of the q exceptional 4-cells
                first = False
            else:
                n3, n2 = 2 * n3 + n2, n3 + n2
            ring = 4 * n3 + 3 * n2
            dangling = 3 * n3 + 2 * n2
        else:
            if first:
                n3, n5 = 3 * q, 2 * q
                first = False
            else:
                n3, n5 = 2 * n3 + 3 * n5, n3 + 2 * n5
            ring = 2 * n3 + 3 * n5
            dangling = 3 * n3 + 5 * n5
        total += ring
    return total + dangling


def build_tiling(p: int, q: int, depth: int,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> TilingGraph:
    """Generate the depth-ring {p,q} disk, vertex centered.

    depth counts generation rings; depth 1 is the bare center star
    with no closed face. Dangling legs of the outermost circle are
    materialized as leaf vertices so the boundary lattice has explicit
    edges.
    """
    if (p, q) not in SUPPORTED:
        raise TilingError(f"unsupported family ({p},{q}); expected (7,3) or (5,4)")
    if depth < 1:
        raise TilingError(f"depth must be >= 1, got {depth}")
    projected = _projected_counts(p, q, depth)
    if projected > vertex_cap:
        raise TilingError(
            f"depth {depth} would create {projected} vertices, over the cap {vertex_cap}")

    rot = [[]]          # center = 0
    in_nbr = [-1]
    ring_of = [0]
    rings = [(0,)]
    edges = []
    edge_set = set()
    faces = []
    outs = [[]]         # per-vertex outward neighbors, CCW

    def new_vertex(parent: Optional[int]) -> int:
        rot.append([])
        outs.append([])
        in_nbr.append(-1 if parent is None else parent)
        ring_of.append(0)
        return len(rot) - 1

    def add_edge(u: int, v: int):
        e = _edge(u, v)
        if e in edge_set:
            raise TilingError(f"duplicate edge {e}")
        edge_set.add(e)
        edges.append(e)

    # frontier: per out slot, (parent vertex, position of parent in its circle)
    circle = [0]
    slots = [(0, 0)] * q

    for c in range(1, depth):
        ncirc = len(circle)
        nslots = len(slots)
        # attachment vertex per slot
        attach = []
        for (v, _pos) in slots:
            x = new_vertex(v)
            ring_of[x] = c
            add_edge(v, x)
            outs[v].append(x)
            attach.append(x)
        new_circle = []
        pos_of = {}
        segments = []           # per gap: [x_g] + interior vertices
        for g in range(nslots):
            v_g, pos_g = slots[g]
            v_n, pos_n = slots[(g + 1) % nslots]
            b = (pos_n - pos_g) % ncirc + 1
            n_int = p - b - 2
            if n_int < 0:
                raise TilingError("face closure underflow; construction invariant broken")
            seg = [attach[g]]
            for _ in range(n_int):
                w = new_vertex(None)
                ring_of[w] = c
                seg.append(w)
            segments.append(seg)
        for g in range(nslots):
            seg = segments[g]
            nxt = segments[(g + 1) % nslots][0]
            chain = seg + [nxt]
            for a, b2 in zip(chain, chain[1:]):
                add_edge(a, b2)
            for w in seg:
                pos_of[w] = len(new_circle)
                new_circle.append(w)
        for g in range(nslots):
            v_g, pos_g = slots[g]
            v_n, pos_n = slots[(g + 1) % nslots]
            b = (pos_n - pos_g) % ncirc + 1
            inner = [circle[(pos_g + t) % ncirc] for t in range(b)]
            arc = segments[g]
            x_next = segments[(g + 1) % nslots][0]
            # CCW cycle: inner path, up the next attachment, back along the arc
            faces.append(tuple(inner + [x_next] + list(reversed(arc[1:])) + [arc[0]]))
        # rotation order of the finished circle
        m = len(new_circle)
        for i, w in enumerate(new_circle):
            tp = new_circle[(i - 1) % m]
            tn = new_circle[(i + 1) % m]
            if in_nbr[w] >= 0:
                rot[w] = [tp, in_nbr[w], tn]
            else:
                rot[w] = [tp, tn]
        rings.append(tuple(new_circle))
        # next frontier: pending out slots, CCW
        slots = []
        for i, w in enumerate(new_circle):
            pending = q - (3 if in_nbr[w] >= 0 else 2)
            for _ in range(pending):
                slots.append((w, i))
        circle = new_circle

    # dangling legs as leaves
    leaves = []
    legs = []
    for (v, _pos) in slots:
        x = new_vertex(v)
        ring_of[x] = depth if depth > 1 else 1
        add_edge(v, x)
        outs[v].append(x)
        rot[x] = [v]
        leaves.append(x)
        legs.append(_edge(v, x))

    # outward fan goes into the rotation reversed (it sweeps CW seen from v)
    for v in range(len(rot)):
        if outs[v]:
            if v == 0:
                rot[0] = list(outs[0])
            else:
                rot[v] = rot[v] + list(reversed(outs[v]))

    g = TilingGraph(
        p=p, q=q, depth=depth,
        rot=[tuple(r) for r in rot],
        rings=tuple(rings),
        ring_of=ring_of,
        in_nbr=in_nbr,
        leaves=tuple(leaves),
        boundary_legs=tuple(legs),
        edges=tuple(edges),
        faces=tuple(faces),
    )
    return g


@dataclass(frozen=True)
class Cell:
    """One unit cell of an annulus: an attachment and its interior run.

    label is the number of fine lattice sites the cell carries (2 or 3
    on {7,3}; 3 or 5 on {5,4}; the exceptional first annulus may
    differ). up_edges are the two coarse sites flanking the cell: the
    in-edge of its own attachment and of the next cell's attachment.
    """

    label: int
    vertices: tuple
    sites: tuple
    up_edges: tuple


@dataclass(frozen=True)
class Layer:
    """Annulus between two lattices: ring vertices, word, and cells."""

    z: int
    ring: int
    vertices: tuple
    word: str
    cells: tuple
    intra_edges: tuple


@dataclass(frozen=True)
class LayerDecomposition:
    center: int
    p: int
    q: int
    layers: tuple            # z = 0 (outermost) first
    lattice_sites: tuple     # z = 0..len(layers); last entry is the center star
    exceptional_z: int       # z index of the annulus adjacent to the center
    graph: TilingGraph = field(repr=False, compare=False, default=None)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def lattice_index(self, z: int):
        return {e: i for i, e in enumerate(self.lattice_sites[z])}


def _boundary_walk(g: TilingGraph, region_faces: set) -> list:
    """Vertex cycle of the region boundary, oriented with region on the left.

    Boundary edges are those with exactly one incident region face;
    each is traversed in the direction it has inside that face (faces
    are stored CCW, so the walk is CCW with the region inside).
    """
    edge_face = {}
    for fi in region_faces:
        cyc = g.faces[fi]
        for i in range(len(cyc)):
            u, v = cyc[i], cyc[(i + 1) % len(cyc)]
            edge_face.setdefault(_edge(u, v), []).append((u, v))
    nxt = {}
    for e, lst in edge_face.items():
        if len(lst) == 2:
            continue
        u, v = lst[0]
        if u in nxt:
            raise TilingError("region boundary is pinched; not a simple disk")
        nxt[u] = v
    if not nxt:
        raise TilingError("region has no boundary")
    start = min(nxt)
    walk = [start]
    v = nxt[start]
    while v != start:
        walk.append(v)
        v = nxt[v]
        if len(walk) > len(nxt):
            raise TilingError("region boundary failed to close")
    # face cycles orient this walk clockwise; flip to counterclockwise so
    # walk successors match the rotation system's tangential order
    return [walk[0]] + walk[:0:-1]


def _annulus(g: TilingGraph, walk: list, inner: set):
    """Word, cells and ordered out-edges for one boundary circle.

    inner is the set of vertices strictly inside the region; a walk
    vertex is an attachment (U) if one of its edges leads inside.
    """
    m = len(walk)
    on_walk = set(walk)
    word = []
    outs_per = []
    for i, v in enumerate(walk):
        tp = walk[(i - 1) % m]
        tn = walk[(i + 1) % m]
        rotv = g.rot[v]
        ins = [w for w in rotv if w in inner and w not in (tp, tn)]
        word.append("U" if ins else "D")
        k = len(rotv)
        j = rotv.index(tn)
        seg = []
        t = (j + 1) % k
        while rotv[t] != tp:
            seg.append(rotv[t])
            t = (t + 1) % k
        fan = [w for w in reversed(seg) if w not in ins]
        outs_per.append([_edge(v, w) for w in fan])
    return word, outs_per


def _cells_from_word(g: TilingGraph, walk, word, outs_per, up_edge_of):
    m = len(walk)
    att = [i for i in range(m) if word[i] == "U"]
    if not att:
        raise TilingError("annulus without attachments")
    cells = []
    for a_idx, i0 in enumerate(att):
        i1 = att[(a_idx + 1) % len(att)]
        span = (i1 - i0) % m or m
        idxs = [(i0 + t) % m for t in range(span)]
        verts = tuple(walk[i] for i in idxs)
        sites = tuple(e for i in idxs for e in outs_per[i])
        cells.append(Cell(
            label=len(sites),
            vertices=verts,
            sites=sites,
            up_edges=(up_edge_of[walk[i0]], up_edge_of[walk[i1]]),
        ))
    return tuple(cells)


def layer_decompose(g: TilingGraph, center: int) -> LayerDecomposition:
    """Concentric annuli around center, trimmed to complete rings."""
    if center < 0 or center >= g.n_vertices or g.is_leaf[center]:
        raise TilingError(f"vertex {center} is not a bulk vertex")
    if not g.is_interior(center):
        raise TilingError(
            f"center {center} too close to generation boundary; max usable depth 0")

    region_faces = set(g.faces_of[center])
    region_vertices = {center}
    layers_rev = []      # collected center-out, reversed at the end
    lats_rev = [tuple(_edge(center, w) for w in g.rot[center])]
    ring_idx = 0
    while True:
        ring_idx += 1
        walk = _boundary_walk(g, region_faces)
        word, outs_per = _annulus(g, walk, region_vertices)
        up_edge_of = {}
        for i, v in enumerate(walk):
            if word[i] == "U":
                ins = [w for w in g.rot[v] if w in region_vertices]
                up_edge_of[v] = _edge(v, ins[0])
        cells = _cells_from_word(g, walk, word, outs_per, up_edge_of)
        sites = tuple(e for c in cells for e in c.sites)
        intra = tuple(_edge(walk[i], walk[(i + 1) % len(walk)]) for i in range(len(walk)))
        layers_rev.append((ring_idx, tuple(walk), "".join(word), cells, intra))
        lats_rev.append(sites)
        region_vertices.update(walk)
        grow = all(g.is_interior(v) for v in walk)
        if not grow:
            break
        for v in walk:
            region_faces.update(g.faces_of[v])

    n = len(layers_rev)
    layers = []
    for zi, (ring, verts, word, cells, intra) in enumerate(reversed(layers_rev)):
        layers.append(Layer(z=zi, ring=ring, vertices=verts, word=word,
                            cells=cells, intra_edges=intra))
    lattice_sites = tuple(reversed(lats_rev))
    return LayerDecomposition(
        center=center, p=g.p, q=g.q,
        layers=tuple(layers),
        lattice_sites=lattice_sites,
        exceptional_z=n - 1,
        graph=g,
    )


@dataclass(frozen=True)
class ScaleFactors:
    r_est: float
    s_est: float
    flag: str              # "ok" or "pre-asymptotic"
    n_layers: int


def _cell_ratio(p: int, cells) -> float:
    c3 = sum(1 for c in cells if c.label == 3)
    other = sum(1 for c in cells if c.label == (2 if p == 7 else 5))
    if other == 0:
        return float("nan")
    return c3 / other


def scale_factors(d: LayerDecomposition) -> ScaleFactors:
    """Estimate (r, s) from the outer layers of a decomposition.

    r is the cell-type ratio of the outermost complete annulus
    (3-site over 2-site cells on {7,3}, 3-site over 5-site on {5,4});
    s averages the lattice-size ratios |L_z| / |L_{z+1}| over the
    outermost three usable layer boundaries. The annulus adjacent to
    the center is excluded. Fewer than 4 usable layers flags the
    result pre-asymptotic; with nothing to measure an error is raised.
    """
    usable = [ly for ly in d.layers if ly.z != d.exceptional_z]
    if not usable:
        raise TilingError("too few layers to estimate scale factors")
    r_est = _cell_ratio(d.p, usable[0].cells)
    ratios = []
    for z in range(min(3, d.n_layers)):
        a = len(d.lattice_sites[z])
        b = len(d.lattice_sites[z + 1])
        ratios.append(a / b)
    if not ratios:
        raise TilingError("too few layers to estimate scale factors")
    s_est = sum(ratios) / len(ratios)
    flag = "ok" if len(usable) >= 4 else "pre-asymptotic"
    return ScaleFactors(r_est=r_est, s_est=s_est, flag=flag, n_layers=d.n_layers)


def export_text(g: TilingGraph) -> str:
    """Line-oriented dump: v <id>, e <u> <v>, f <edge ids>. Deterministic."""
    lines = [f"v {i}" for i in range(g.n_vertices)]
    lines += [f"e {u} {v}" for (u, v) in g.edges]
    for cyc in g.faces:
        eids = [g.edge_id[_edge(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))]
        lines.append("f " + " ".join(str(x) for x in eids))
    return "\n".join(lines) + "\n"

"""Boundary regions, minimal cuts, and causal cones on a tiling.

Regions live on the physical boundary lattice (the dangling legs of
the outermost circle, in cyclic order). Minimal cuts are computed by
max-flow with unit capacities on bulk edges; boundary legs are
uncuttable so the cut anchors between region and complement. Causal
cones propagate a window of lattice sites inward annulus by annulus
using the unit-cell structure: a window maps to the coarse sites
flanking its cells, and a two-site straddle across a cell boundary
narrows to the shared attachment (plus the outer flank of a 2-site
cell on {7,3}, whose short run needs its full context).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .tiling import TilingGraph, TilingError, _edge

__all__ = [
    "RegionSpec",
    "CutResult",
    "CausalCone",
    "ConeLayer",
    "minimal_cut",
    "apparent_causal_cone",
    "true_causal_cone",
    "cone_apex",
    "disjoint_cone_report",
    "wedge_cone_report",
]

_INF = 10 ** 9


@dataclass(frozen=True)
class RegionSpec:
    """One contiguous boundary interval, or two disjoint ones.

    start indexes the cyclic boundary lattice; length counts sites.
    """

    start: int
    length: int
    second: Optional[tuple] = None

    def intervals(self):
        iv = [(self.start, self.length)]
        if self.second is not None:
            iv.append(tuple(self.second))
        return iv

    def resolve(self, g: TilingGraph):
        """Site index tuples per interval, validated against the boundary."""
        n = len(g.boundary_legs)
        out = []
        taken = set()
        for (s, ln) in self.intervals():
            if ln < 1:
                raise TilingError(f"region length must be >= 1, got {ln}")
            if ln > n:
                raise TilingError(f"region length {ln} exceeds boundary size {n}")
            idxs = tuple((s + t) % n for t in range(ln))
            if taken & set(idxs):
                raise TilingError("region intervals overlap")
            taken.update(idxs)
            out.append(idxs)
        return out

    def sites(self, g: TilingGraph):
        return [tuple(g.boundary_legs[i] for i in iv) for iv in self.resolve(g)]


@dataclass(frozen=True)
class CutResult:
    cut_edges: tuple
    wedge_vertices: frozenset
    cut_size: int


def _maxflow(adj, cap, source, sink):
    """Edmonds-Karp; mutates cap to the residual. Returns flow value."""
    flow = 0
    while True:
        parent = {source: None}
        dq = deque([source])
        while dq:
            u = dq.popleft()
            if u == sink:
                break
            for v in adj[u]:
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    dq.append(v)
        if sink not in parent:
            return flow
        b = _INF
        v = sink
        while parent[v] is not None:
            u = parent[v]
            b = min(b, cap[(u, v)])
            v = u
        v = sink
        while parent[v] is not None:
            u = parent[v]
            cap[(u, v)] -= b
            cap[(v, u)] += b
            v = u
        flow += b


def minimal_cut(g: TilingGraph, region: RegionSpec) -> CutResult:
    """Minimum edge cut separating region sites from the complement.

    Unit capacity on every bulk edge; boundary legs carry infinite
    capacity so the cut cannot trivially sever a site from itself. Of
    the minimum cuts, the canonical one nearest the region is returned
    (edges leaving the source-side residual-reachable set), which is
    deterministic.
    """
    idxs = region.resolve(g)
    n = len(g.boundary_legs)
    picked = set(i for iv in idxs for i in iv)
    if len(picked) >= n:
        raise TilingError("region covers the whole boundary")

    source, sink = -1, -2
    adj = {source: [], sink: []}
    cap = {}

    def arc(u, v, c):
        if (u, v) not in cap:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
            cap[(u, v)] = 0
            cap[(v, u)] = 0
        cap[(u, v)] += c

    legs = set(g.boundary_legs)
    for (u, v) in g.edges:
        c = _INF if (u, v) in legs else 1
        arc(u, v, c)
        arc(v, u, c)
    for i in range(n):
        leaf = g.leaves[i]
        if i in picked:
            arc(source, leaf, _INF)
        else:
            arc(leaf, sink, _INF)

    flow = _maxflow(adj, cap, source, sink)

    reach = {source}
    dq = deque([source])
    while dq:
        u = dq.popleft()
        for v in adj[u]:
            if v not in reach and cap[(u, v)] > 0:
                reach.add(v)
                dq.append(v)
    cut = [e for e in g.edges
           if e not in legs and ((e[0] in reach) != (e[1] in reach))]
    if len(cut) != flow:
        raise TilingError(f"cut reconstruction mismatch: {len(cut)} edges vs flow {flow}")
    wedge = frozenset(v for v in reach
                      if isinstance(v, int) and v >= 0 and not g.is_leaf[v])
    return CutResult(cut_edges=tuple(sorted(cut)), wedge_vertices=wedge, cut_size=flow)


# ---------------------------------------------------------------- cones

@dataclass(frozen=True)
class ConeLayer:
    step: int            # 1-based, counting inward from the boundary
    ring: int            # circle index around the cone's center
    window: tuple        # input sites (edges) on the finer interface
    support: tuple       # output sites on the coarser interface
    cells: tuple         # involved cells as vertex tuples
    vertices: tuple
    regime: str          # "shrinking" or "steady"
    n_clusters: int


@dataclass(frozen=True)
class CausalCone:
    center: int
    kind: str            # "apparent" or "true"
    region_sites: tuple
    layers: tuple
    vertices: frozenset
    crossover: int       # first step with a single window of width <= 2

    def __contains__(self, v):
        return v in self.vertices

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


def _ring_indices(g: TilingGraph, center: int):
    """Annulus index of every vertex around center (face-distance rings)."""
    ring = {center: 0}
    cur = set(g.faces_of[center])
    seen = set(cur)
    k = 0
    while cur:
        k += 1
        verts = sorted({v for fi in cur for v in g.faces[fi]} - ring.keys())
        for v in verts:
            ring[v] = k
        nxt = {fi for v in verts for fi in g.faces_of[v]} - seen
        seen |= nxt
        cur = nxt
    for leaf in g.leaves:
        parent = g.rot[leaf][0]
        if parent in ring and leaf not in ring:
            ring[leaf] = ring[parent] + 1
    return ring


class _Annuli:
    """Local annulus navigation around one cone center."""

    def __init__(self, g: TilingGraph, center: int):
        self.g = g
        self.ring = _ring_indices(g, center)
        self.center = center

    def level(self, v):
        return self.ring.get(v)

    def tang(self, v):
        r = self.ring[v]
        return [w for w in self.g.rot[v]
                if not self.g.is_leaf[w] and self.ring.get(w) == r]

    def _segment(self, v, a, b):
        """Neighbors strictly between a and b in v's CCW rotation."""
        rot = self.g.rot[v]
        i = rot.index(a)
        seg = []
        t = (i + 1) % len(rot)
        while rot[t] != b:
            seg.append(rot[t])
            t = (t + 1) % len(rot)
        return seg

    def tang_next(self, v):
        """Tangential successor: the rotation segment from it to the other
        tangential neighbor holds all outward edges and no inward edge."""
        r = self.ring[v]
        tg = self.tang(v)
        if len(tg) != 2:
            raise TilingError(f"vertex {v} lacks two tangential neighbors")
        a, b = tg
        for cand, other in ((a, b), (b, a)):
            seg = self._segment(v, cand, other)
            lv = [self.ring.get(w) for w in seg]
            if all(x == r + 1 or self.g.is_leaf[w] for x, w in zip(lv, seg)) \
                    and sum(1 for x in lv if x == r - 1) == 0:
                outs_elsewhere = [w for w in self._segment(v, other, cand)
                                  if self.ring.get(w) == r + 1 or self.g.is_leaf[w]]
                if not outs_elsewhere:
                    return cand
        raise TilingError(f"could not orient tangential walk at vertex {v}")

    def is_attachment(self, v):
        r = self.ring[v]
        return any(self.ring.get(w) == r - 1 for w in self.g.rot[v])

    def up_edge(self, v):
        r = self.ring[v]
        ins = [w for w in self.g.rot[v] if self.ring.get(w) == r - 1]
        if len(ins) != 1:
            raise TilingError(f"attachment {v} has {len(ins)} inward edges")
        return _edge(v, ins[0])

    def outs_ordered(self, v):
        """Outward edges of v in tangential walk order."""
        tn = self.tang_next(v)
        tg = self.tang(v)
        other = tg[0] if tg[1] == tn else tg[1]
        r = self.ring[v]
        seg = self._segment(v, tn, other)
        fan = [w for w in seg if self.g.is_leaf[w] or self.ring.get(w) == r + 1]
        return [_edge(v, w) for w in reversed(fan)]

    def anchor(self, v):
        """Attachment starting the cell that contains v."""
        u = v
        guard = 0
        while not self.is_attachment(u):
            tg = self.tang(u)
            tn = self.tang_next(u)
            u = tg[0] if tg[1] == tn else tg[1]   # step against the walk
            guard += 1
            if guard > 16:
                raise TilingError("cell walk failed to find an attachment")
        return u

    def cell_from(self, u):
        """Cell anchored at attachment u: (members, sites, right_flank)."""
        members = [u]
        v = self.tang_next(u)
        guard = 0
        while not self.is_attachment(v):
            members.append(v)
            v = self.tang_next(v)
            guard += 1
            if guard > 16:
                raise TilingError("cell walk failed to close")
        sites = [e for w in members for e in self.outs_ordered(w)]
        return members, sites, v


def _ascend_level(ann: _Annuli, window_at_level):
    """One annulus step: window sites on interface (c-1, c) -> supports.

    Returns (cells, clusters, support_edges, vertices) where clusters
    is a list of ordered cell-anchor chains.
    """
    g = ann.g
    inner = {}
    for e in window_at_level:
        u, v = e
        lu, lv_ = ann.level(u), ann.level(v)
        if lu is None or (lv_ is not None and lv_ < lu):
            u, v = v, u
            lu, lv_ = lv_, lu
        inner.setdefault(u, []).append(e)

    anchors = {}
    for v in inner:
        a = ann.anchor(v)
        anchors.setdefault(a, set()).update(inner[v])

    cells = {}
    for a in anchors:
        members, sites, rflank = ann.cell_from(a)
        cells[a] = (members, sites, rflank)

    # chain cells into clusters: successor = cell at my right flank, or one
    # cell beyond it (a single uninvolved cell between clusters fuses them,
    # and gets pulled into the cone so the fused support is contiguous)
    succ = {}
    for a in sorted(cells):
        _m, _s, rf = cells[a]
        if rf in cells:
            succ[a] = rf
        else:
            m2, s2, rf2 = ann.cell_from(rf)
            if rf2 in cells and rf2 != a:
                cells[rf] = (m2, s2, rf2)
                succ[a] = rf
                succ[rf] = rf2

    heads = set(cells)
    for a, b in succ.items():
        heads.discard(b)
    if not heads:               # cyclic chain covering the whole annulus
        heads = {min(cells)}
    clusters = []
    seen = set()
    for h in sorted(heads):
        if h in seen:
            continue
        chain = [h]
        seen.add(h)
        while chain[-1] in succ:
            b = succ[chain[-1]]
            if b in seen:
                break
            chain.append(b)
            seen.add(b)
        clusters.append(chain)
    for a in sorted(cells):
        if a not in seen:
            clusters.append([a])
            seen.add(a)

    support = []
    verts = []
    for chain in clusters:
        sup = _cluster_support(ann, chain, cells, anchors)
        support.extend(sup)
        for a in chain:
            members, _s, rf = cells[a]
            verts.extend(members)
            verts.append(rf)
    return cells, clusters, support, sorted(set(verts))


def _cluster_support(ann, chain, cells, anchors):
    """Coarse sites a cluster of involved cells maps into.

    Candidates are the attachments' inward edges plus the closing
    flank. An outer flank is dropped when the window leaves at least
    two uncovered sites at that end of the edge cell; the tensors
    beyond such a margin regroup away from the cone, which is what
    narrows a cell-boundary straddle to the shared coarse site.
    """
    first, last = chain[0], chain[-1]
    rf_last = cells[last][2]
    cyclic = rf_last == first and len(chain) > 1
    sup = [ann.up_edge(a) for a in chain]
    if not cyclic:
        sup.append(ann.up_edge(rf_last))
        s_first = cells[first][1]
        s_last = cells[last][1]
        w_first = anchors.get(first, set())
        w_last = anchors.get(last, set())
        lead = min((i for i, e in enumerate(s_first) if e in w_first),
                   default=0)
        tail = min((i for i, e in enumerate(reversed(s_last)) if e in w_last),
                   default=0)
        if len(sup) > 1 and lead >= 2:
            sup = sup[1:]
        if len(sup) > 1 and tail >= 2:
            sup = sup[:-1]
    out, seen = [], set()
    for e in sup:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


_STEADY_WIDTH = 2      # sustained cone width once fully narrowed


def _propagate(g: TilingGraph, center: int, site_groups, kind: str):
    """Shared cone engine; site_groups is a list of site-edge tuples."""
    ann = _Annuli(g, center)
    window = set()
    for grp in site_groups:
        window.update(grp)
    region_sites = tuple(sorted(window))
    vertices = set()
    raw = []
    crossover = None   # regime boundary: width stops shrinking
    bottom = None      # two-site fixed-point form reached
    if sum(len(grp) for grp in site_groups) <= 2 and len(site_groups) == 1:
        crossover = 0
        bottom = 0
    step = 0
    while window:
        levels = {}
        for e in window:
            lv = min(x for x in (ann.level(e[0]), ann.level(e[1])) if x is not None)
            levels.setdefault(lv, set()).add(e)
        c = max(levels)
        if c == 0:
            vertices.add(center)
            break
        cur = levels[c]
        step += 1
        cells, clusters, support, verts = _ascend_level(ann, cur)
        vertices.update(verts)
        rest = window - cur
        window = rest | set(support)
        width = len(support)
        if len(clusters) == 1 and not rest:
            if crossover is None and width <= _STEADY_WIDTH + 1:
                crossover = step
            if bottom is None and width <= _STEADY_WIDTH:
                bottom = step
        raw.append((step, c, cur, support, clusters, cells, verts))
        if kind == "true" and bottom is not None and step >= bottom + 1:
            # tip of the cone: the coarse vertices its last supports hang from
            for e in support:
                vertices.add(min(e, key=lambda v: ann.level(v)
                                 if ann.level(v) is not None else _INF))
            break
    if crossover is None:
        crossover = step
    layers = tuple(ConeLayer(
        step=st, ring=c, window=tuple(sorted(cur)), support=tuple(sup),
        cells=tuple(tuple(cells[a][0]) + (cells[a][2],) for ch in clusters for a in ch),
        vertices=tuple(verts),
        regime="shrinking" if st <= crossover else "steady",
        n_clusters=len(clusters))
        for (st, c, cur, sup, clusters, cells, verts) in raw)
    return CausalCone(center=center, kind=kind, region_sites=region_sites,
                      layers=layers, vertices=frozenset(vertices),
                      crossover=crossover)


def apparent_causal_cone(d, region: RegionSpec) -> CausalCone:
    """All cone vertices of the region, propagated to the decomposition center."""
    g = d.graph
    groups = region.sites(g)
    return _propagate(g, d.center, groups, "apparent")


def true_causal_cone(d, region: RegionSpec) -> CausalCone:
    """Shrinking-regime cone plus the single layer preceding the steady regime."""
    g = d.graph
    groups = region.sites(g)
    return _propagate(g, d.center, groups, "true")


def cone_apex(g: TilingGraph, cone: CausalCone) -> int:
    """Apex of a true cone: the tip vertex T with C_T(R) = C(R) exactly.

    Candidates are the coarse vertices around the cone tip, tried from
    the middle of the final support outward; the first whose recentered
    cone reproduces the given vertex set wins.
    """
    if cone.kind != "true":
        raise TilingError("apex is defined for true cones")
    if not cone.layers:
        raise TilingError("cone has no layers")
    sup = list(cone.layers[-1].support)
    if not sup:
        raise TilingError("top cone layer has no support")
    ring = _ring_indices(g, cone.center)
    mid = (len(sup) - 1) // 2
    order = sorted(range(len(sup)), key=lambda i: (abs(i - mid), i))
    cand = []
    for i in order:
        u, v = sup[i]
        pair = sorted((u, v), key=lambda x: ring.get(x, _INF))
        cand.extend(pair)
    extra = []
    for v in cand:
        extra.extend(w for w in g.rot[v]
                     if not g.is_leaf[w] and w not in cand and w not in extra)
    best = None
    for t in cand + extra:
        try:
            ct = _propagate(g, t, [cone.region_sites], "apparent")
        except TilingError:
            continue
        if ct.vertices == cone.vertices:
            return t
        if best is None:
            best = (t, len(ct.vertices.symmetric_difference(cone.vertices)))
    raise TilingError(
        f"no apex candidate reproduces the cone exactly; closest {best}")


def wedge_cone_report(d, region: RegionSpec) -> dict:
    """True cone vs entanglement wedge: sizes and symmetric difference."""
    g = d.graph
    cone = true_causal_cone(d, region)
    cut = minimal_cut(g, region)
    c, e = cone.vertices, cut.wedge_vertices
    sym = c.symmetric_difference(e)
    ratio = (len(sym) / len(e)) if e else float("inf")
    return {
        "cone_size": len(c),
        "wedge_size": len(e),
        "cut_size": cut.cut_size,
        "sym_diff": len(sym),
        "sym_diff_ratio": ratio,
        "within_default": ratio <= 0.3,
    }


def disjoint_cone_report(d, r1: RegionSpec, r2: RegionSpec) -> dict:
    """Fusion behavior of two disjoint intervals' causal cones."""
    if r1.second is not None or r2.second is not None:
        raise TilingError("pass two single-interval regions")
    g = d.graph
    n = len(g.boundary_legs)
    a = set(i for iv in r1.resolve(g) for i in iv)
    b = set(i for iv in r2.resolve(g) for i in iv)
    if a & b:
        raise TilingError("regions overlap")
    c1 = true_causal_cone(d, r1)
    c2 = true_causal_cone(d, r2)
    touching = any((i + 1) % n in b or (i - 1) % n in b for i in a)
    union_region = RegionSpec(r1.start, r1.length, (r2.start, r2.length)) \
        if not touching else _merge_touching(n, a | b)
    cu = true_causal_cone(d, union_region)
    fusion = None
    for ly in cu.layers:
        if ly.n_clusters == 1:
            fusion = ly.step
            break
    union_sets = c1.vertices | c2.vertices
    return {
        "cone1": c1,
        "cone2": c2,
        "cone_union_region": cu,
        "fusion_scale": fusion,
        "strict_superset": cu.vertices > union_sets,
        "extra_vertices": len(cu.vertices - union_sets),
    }


def _merge_touching(n, idxs):
    """Contiguous RegionSpec from a touching union of boundary indices."""
    idxs = sorted(idxs)
    if len(idxs) == n:
        raise TilingError("region covers the whole boundary")
    starts = [i for i in idxs if (i - 1) % n not in idxs]
    if len(starts) != 1:
        raise TilingError("expected a single contiguous union")
    return RegionSpec(starts[0], len(idxs))

"""The scattering engine: reflection networks and their repair.

A reflection network is a graph whose vertices are projections.  An edge
between two vertices is either ``UNKNOWN`` (relation not yet resolved) or
``Reflecting(lam)`` meaning ``P_u P_v P_u = lam P_u`` and
``P_v P_u P_v = lam P_v``.  A missing edge means the two projections are
orthogonal.  The network is *proper* when no ``UNKNOWN`` edge is left.

The algorithm runs in phases:

1. ``build_initial_network`` collects the spectral projections of the
   generators.
2. ``scatter_until_proper`` scatters unknown pairs until the network is
   proper.
3. ``establish_minimality`` / ``establish_completeness`` repair the two
   ways a proper network can still fail to describe the algebra.
4. ``maximal_orthogonal_set`` and ``path_isometry`` provide what is needed
   to write down the bipartition table (see :mod:`irrepscatter.bipartition`).
"""

from __future__ import annotations

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    DisconnectedPath,
    EmptyGeneratorSet,
    MultipleSingularValues,
    NonTermination,
    NotProjection,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    PartialIsometry,
    Projection,
    ToleranceConfig,
    check_hermitian,
    cluster_sorted,
    is_zero,
    orthonormalize,
    phase_fix,
    spectral_projections,
    unitary_eigenspaces,
)

log = logging.getLogger(__name__)

UNKNOWN = "unknown"

# Relative spread allowed among the singular values of a path product.
SINGULAR_VALUE_RTOL = 1e-7
# Chord distance below which unit-circle eigenvalues of a holonomy are merged.
HOLONOMY_GAP = 1e-6


@dataclass(frozen=True)
class Reflecting:
    lam: float


@dataclass
class Vertex:
    id: int
    proj: Projection
    label: str = ""

    @property
    def rank(self) -> int:
        return self.proj.rank


@dataclass
class ScatterOutcome:
    """Pieces of a scattered pair, ``(lam, Projection)`` with ``lam = 0`` for null pieces."""

    pieces1: list
    pieces2: list

    @property
    def lambdas(self) -> list[float]:
        return [lam for lam, _ in self.pieces1 if lam > 0]


@dataclass
class PathIsometry:
    path: tuple
    isometry: PartialIsometry
    singular_value: float


@dataclass
class NetworkStats:
    scatter_count: int = 0
    minimality_repairs: int = 0
    completeness_additions: int = 0
    merges: int = 0
    merged_rank: int = 0


class ReflectionNetwork:
    """Mutable graph of projections with typed edges.

    Vertex ids are never reused.  Every ``UNKNOWN`` edge is also pushed
    onto a priority queue keyed by ``(min endpoint rank, insertion order)``
    so that low-rank pairs are scattered first.
    """

    def __init__(self, dim: int, tol: ToleranceConfig = DEFAULT_TOLERANCES):
        self.dim = dim
        self.tol = tol
        self.vertices: dict[int, Vertex] = {}
        self._adj: dict[int, dict[int, object]] = {}
        self._next_id = 0
        self._heap: list = []
        self._counter = itertools.count()
        self.stats = NetworkStats()
        self.trace: list[dict] = []

    # -- basic graph manipulation -------------------------------------

    def add_vertex(self, proj: Projection, label: str = "") -> int:
        if proj.dim != self.dim:
            raise DimensionMismatch("projection dimension does not match the network")
        vid = self._next_id
        self._next_id += 1
        self.vertices[vid] = Vertex(vid, proj, label)
        self._adj[vid] = {}
        return vid

    def remove_vertex(self, vid: int) -> None:
        for n in list(self._adj[vid]):
            del self._adj[n][vid]
        del self._adj[vid]
        del self.vertices[vid]

    def edge(self, u: int, v: int):
        """Edge kind between ``u`` and ``v``; ``None`` means orthogonal."""
        return self._adj[u].get(v)

    def set_edge(self, u: int, v: int, kind) -> None:
        if u == v:
            raise ValueError("self loops are not allowed")
        if kind is None:
            self._adj[u].pop(v, None)
            self._adj[v].pop(u, None)
            return
        self._adj[u][v] = kind
        self._adj[v][u] = kind
        if kind == UNKNOWN:
            key = min(self.vertices[u].rank, self.vertices[v].rank)
            heapq.heappush(self._heap, (key, next(self._counter), min(u, v), max(u, v)))

    def neighbors(self, vid: int) -> list[int]:
        return sorted(self._adj[vid])

    def edges(self):
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield (u, v), self._adj[u][v]

    def unknown_edges(self) -> list[tuple[int, int]]:
        return [e for e, k in self.edges() if k == UNKNOWN]

    def is_proper(self) -> bool:
        return not self.unknown_edges()

    def projection(self, vid: int) -> Projection:
        return self.vertices[vid].proj

    def total_rank(self) -> int:
        return sum(v.rank for v in self.vertices.values())

    def components(self) -> list[list[int]]:
        """Connected components as sorted id lists, ordered by smallest id."""
        seen = set()
        comps = []
        for start in sorted(self.vertices):
            if start in seen:
                continue
            comp = []
            queue = deque([start])
            seen.add(start)
            while queue:
                x = queue.popleft()
                comp.append(x)
                for n in self.neighbors(x):
                    if n not in seen:
                        seen.add(n)
                        queue.append(n)
            comps.append(sorted(comp))
        return comps

    def copy(self) -> "ReflectionNetwork":
        other = ReflectionNetwork(self.dim, self.tol)
        other.vertices = {k: Vertex(v.id, v.proj, v.label) for k, v in self.vertices.items()}
        other._adj = {k: dict(v) for k, v in self._adj.items()}
        other._next_id = self._next_id
        other._heap = list(self._heap)
        other._counter = itertools.count(next(self._counter))
        other.stats = NetworkStats(**vars(self.stats))
        other.trace = list(self.trace)
        return other

    def _pop_unknown(self):
        while self._heap:
            _, _, u, v = heapq.heappop(self._heap)
            if u in self._adj and v in self._adj[u] and self._adj[u][v] == UNKNOWN:
                return u, v
        return None

    def __repr__(self):
        return (f"ReflectionNetwork(dim={self.dim}, vertices={len(self.vertices)}, "
                f"unknown={len(self.unknown_edges())})")


# -- scattering of a pair ------------------------------------------------


def scatter(p1: Projection, p2: Projection, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ScatterOutcome:
    """Break two projections into matched, pairwise reflecting pieces.

    Side 1 comes from the spectrum of ``P1 P2 P1`` (computed as ``C C^H``
    with ``C = Q1^H Q2``).  Side 2 pieces are obtained from side 1 through
    ``P2^(lam) = P2 P1^(lam) P2 / lam`` instead of a second eigensolve,
    so both sides share the same ``lam`` set by construction.  Null pieces
    are what is left of each projection.
    """
    if not isinstance(p1, Projection) or not isinstance(p2, Projection):
        raise NotProjection("scatter expects Projection instances")
    if p1.dim != p2.dim:
        raise DimensionMismatch("projections live in different dimensions")
    q1, q2 = p1.basis, p2.basis
    c = q1.conj().T @ q2
    if is_zero(c, tol, dim=p1.dim):
        return ScatterOutcome([(0.0, p1)], [(0.0, p2)])
    m = c @ c.conj().T
    w, u = np.linalg.eigh((m + m.conj().T) / 2)
    # P1 P2 P1 has unit scale, so the clustering threshold is absolute here.
    gap = tol.tol_eig_cluster
    pieces1, pieces2 = [], []
    null1 = None
    images = []
    for idx in cluster_sorted(w, gap):
        lam = float(np.mean(w[idx]))
        vecs = u[:, idx] if len(idx) == 1 else orthonormalize(u[:, idx], rank=len(idx))
        if w[idx[0]] <= gap:
            null1 = vecs
            continue
        if lam >= 1 - gap:
            lam = 1.0
        img = c.conj().T @ vecs / np.sqrt(lam)
        img = orthonormalize(img, rank=len(idx))
        images.append(img)
        pieces1.append((lam, Projection(q1 @ vecs)))
        pieces2.append((lam, Projection(q2 @ img)))
    pieces1.reverse()
    pieces2.reverse()
    if null1 is not None and null1.shape[1]:
        pieces1.append((0.0, Projection(q1 @ null1)))
    k = sum(im.shape[1] for im in images)
    if k < p2.rank:
        wmat = np.hstack(images)
        full, _, _ = np.linalg.svd(wmat, full_matrices=True)
        pieces2.append((0.0, Projection(q2 @ full[:, k:])))
    if sum(p.rank for _, p in pieces1) != p1.rank or sum(p.rank for _, p in pieces2) != p2.rank:
        raise NonTermination("rank bookkeeping failed during scattering")  # pragma: no cover
    return ScatterOutcome(pieces1, pieces2)


# -- phase 1 -------------------------------------------------------------


def build_initial_network(generators, include_identity: bool = False,
                          tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ReflectionNetwork:
    """Vertices are the nonzero-eigenvalue spectral projections of every generator.

    The kernel projection of a generator is not an element of the algebra
    it generates (unless the identity is), so it is left out; passing
    ``include_identity=True`` appends the identity as an extra generator.
    Projections of one generator are mutually orthogonal; every cross-pair
    starts ``UNKNOWN`` except rank-1 pairs, which are resolved directly.
    """
    mats = [check_hermitian(g, tol) for g in generators]
    if not mats:
        raise EmptyGeneratorSet("at least one generator is required")
    dim = mats[0].shape[0]
    if any(m.shape[0] != dim for m in mats):
        raise DimensionMismatch("generators have different dimensions")
    if include_identity:
        mats.append(np.eye(dim, dtype=complex))
    net = ReflectionNetwork(dim, tol)
    families = []
    for gi, m in enumerate(mats):
        norm = float(np.linalg.norm(m, 2))
        fam = []
        for lam, proj in spectral_projections(m, tol):
            if abs(lam) <= tol.tol_eig_cluster * norm:
                continue
            fam.append(net.add_vertex(proj, label=f"g{gi}:{lam:.6g}"))
        families.append(fam)
    if not net.vertices:
        raise EmptyGeneratorSet("all generators are zero")
    for i, fam in enumerate(families):
        for prev in families[:i]:
            for u in prev:
                for v in fam:
                    kind = UNKNOWN
                    pu, pv = net.projection(u), net.projection(v)
                    if pu.rank == 1 and pv.rank == 1:
                        ov = abs(np.vdot(pu.basis[:, 0], pv.basis[:, 0])) ** 2
                        if ov <= tol.tol_zero * dim:
                            kind = None
                        elif ov < 1 - tol.tol_eig_cluster:
                            kind = Reflecting(float(ov))
                    net.set_edge(u, v, kind)
    return net


# -- phase 2 -------------------------------------------------------------


def _merge(net: ReflectionNetwork, a: int, b: int) -> int:
    """Merge two vertices carrying the same projection; keep the lower id."""
    keep, drop = min(a, b), max(a, b)
    for n in net.neighbors(drop):
        if n == keep:
            continue
        kd = net.edge(drop, n)
        kk = net.edge(keep, n)
        if kk is None:
            # The kept copy is known orthogonal to n; that fact wins.
            continue
        if isinstance(kk, Reflecting):
            continue
        if isinstance(kd, Reflecting):
            net.set_edge(keep, n, kd)
    net.stats.merges += 1
    net.stats.merged_rank += net.vertices[drop].rank
    net.remove_vertex(drop)
    return keep


def _apply_outcome(net: ReflectionNetwork, u: int, v: int, out: ScatterOutcome) -> dict:
    broken_u = len(out.pieces1) > 1
    broken_v = len(out.pieces2) > 1
    event = {"edge": (u, v), "lambdas": out.lambdas,
             "pieces_u": [(lam, p.rank) for lam, p in out.pieces1],
             "pieces_v": [(lam, p.rank) for lam, p in out.pieces2]}
    if not broken_u and not broken_v:
        lam = out.pieces1[0][0]
        if lam == 0:
            net.set_edge(u, v, None)
        elif lam == 1.0:
            event["merged"] = _merge(net, u, v)
        else:
            net.set_edge(u, v, Reflecting(lam))
        return event

    nb_u = [(n, net.edge(u, n)) for n in net.neighbors(u) if n != v]
    nb_v = [(n, net.edge(v, n)) for n in net.neighbors(v) if n != u]

    def children(vid, pieces, broken, nbrs):
        if not broken:
            return [(pieces[0][0], vid)]
        label = net.vertices[vid].label
        kids = []
        for lam, proj in pieces:
            cid = net.add_vertex(proj, label=f"{label}>{lam:.4g}")
            for n, kind in nbrs:
                # Inherited relations: unknown stays unknown, a reflecting
                # relation of a broken parent is no longer valid.
                net.set_edge(cid, n, UNKNOWN)
            kids.append((lam, cid))
        return kids

    kids_u = children(u, out.pieces1, broken_u, nb_u)
    kids_v = children(v, out.pieces2, broken_v, nb_v)
    if broken_u:
        net.remove_vertex(u)
    if broken_v:
        net.remove_vertex(v)
    by_lam_v = {lam: cid for lam, cid in kids_v if lam > 0}
    for lam, cid in kids_u:
        other = by_lam_v.get(lam)
        if other is None:
            continue
        if lam == 1.0:
            _merge(net, cid, other)
        else:
            net.set_edge(cid, other, Reflecting(lam))
    event["children_u"] = [cid for _, cid in kids_u]
    event["children_v"] = [cid for _, cid in kids_v]
    return event


def scatter_until_proper(net: ReflectionNetwork, cap: int | None = None) -> ReflectionNetwork:
    """Scatter ``UNKNOWN`` edges until none remain (mutates and returns ``net``)."""
    if cap is None:
        cap = 10 * net.dim * net.dim
    count = 0
    while True:
        item = net._pop_unknown()
        if item is None:
            return net
        count += 1
        if count > cap:
            raise NonTermination(f"scattering did not finish within {cap} steps")
        u, v = item
        out = scatter(net.projection(u), net.projection(v), net.tol)
        net.stats.scatter_count += 1
        event = _apply_outcome(net, u, v, out)
        net.trace.append(event)
        log.debug("scatter %s lambdas=%s u=%s v=%s", event["edge"], event["lambdas"],
                  event["pieces_u"], event["pieces_v"])


# -- paths ---------------------------------------------------------------


def _path_core(net: ReflectionNetwork, path) -> np.ndarray:
    """Product of overlaps ``Q1^H Q2 Q2^H Q3 ...`` along a path (r x r)."""
    core = None
    for a, b in zip(path[:-1], path[1:]):
        ov = net.projection(a).basis.conj().T @ net.projection(b).basis
        core = ov if core is None else core @ ov
    if core is None:
        core = np.eye(net.projection(path[0]).rank, dtype=complex)
    return core


def _certified_core(net: ReflectionNetwork, path) -> tuple[np.ndarray, float]:
    core = _path_core(net, path)
    sv = np.linalg.svd(core, compute_uv=False)
    lam = float(np.mean(sv))
    if lam <= 0 or (sv.max() - sv.min()) > SINGULAR_VALUE_RTOL * max(lam, 1e-300) or sv.size != net.projection(path[-1]).rank:
        raise MultipleSingularValues(f"path {tuple(path)} has singular values {sv}")
    return core / lam, lam


def path_isometry(net: ReflectionNetwork, path) -> PathIsometry:
    """Normalized product of the projections along ``path``.

    Maps the range of the last vertex onto the range of the first.  The
    global phase is fixed so that the largest-magnitude entry is real
    positive.
    """
    path = tuple(path)
    if not path:
        raise DisconnectedPath("empty path")
    for a, b in zip(path[:-1], path[1:]):
        if not isinstance(net.edge(a, b), Reflecting):
            raise DisconnectedPath(f"vertices {a} and {b} are not connected by a reflecting edge")
    core, lam = _certified_core(net, path)
    qa = net.projection(path[0]).basis
    qb = net.projection(path[-1]).basis
    s = phase_fix(qa @ core @ qb.conj().T)
    return PathIsometry(path=path,
                        isometry=PartialIsometry(matrix=s, initial=net.projection(path[-1]),
                                                 final=net.projection(path[0])),
                        singular_value=lam)


def shortest_path(net: ReflectionNetwork, source: int, target: int) -> list[int]:
    """BFS shortest path (neighbours visited in id order)."""
    parent = {source: None}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        if x == target:
            break
        for n in net.neighbors(x):
            if n not in parent:
                parent[n] = x
                queue.append(n)
    if target not in parent:
        raise DisconnectedPath(f"no path between {source} and {target}")
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    return path[::-1]


# -- phase 3: minimality -------------------------------------------------


def proportional(a: np.ndarray, b: np.ndarray, rank: int, rtol: float = 1e-8) -> bool:
    """``a = e^{i phi} b`` for the HS-optimal phase, within ``rtol * sqrt(rank)``."""
    ip = np.vdot(b, a)
    phase = ip / abs(ip) if abs(ip) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b)) <= rtol * np.sqrt(rank)


def find_minimality_violation(net: ReflectionNetwork):
    """Return ``(root, [bases])`` for the first non-trivial holonomy, else ``None``.

    Fundamental cycles of a BFS spanning tree are checked per component.
    """
    for comp in net.components():
        if len(comp) < 3 or net.vertices[comp[0]].rank == 1:
            continue
        root = comp[0]
        parent = {root: None}
        queue = deque([root])
        tree = set()
        while queue:
            x = queue.popleft()
            for n in net.neighbors(x):
                if n not in parent:
                    parent[n] = x
                    tree.add((min(x, n), max(x, n)))
                    queue.append(n)

        def to_root(x):
            p = [x]
            while parent[p[-1]] is not None:
                p.append(parent[p[-1]])
            return p[::-1]

        rank = net.vertices[root].rank
        for (a, b), _ in net.edges():
            if a not in parent or (a, b) in tree:
                continue
            core1, _ = _certified_core(net, to_root(a) + [b])
            core2, _ = _certified_core(net, to_root(b))
            if proportional(core1, core2, rank):
                continue
            hol = core1 @ core2.conj().T
            spaces = unitary_eigenspaces(hol, HOLONOMY_GAP)
            if len(spaces) < 2:
                continue
            q = net.projection(root).basis
            return root, [q @ vecs for _, vecs in spaces]
    return None


def _split_vertex(net: ReflectionNetwork, vid: int, bases) -> list[int]:
    nbrs = net.neighbors(vid)
    label = net.vertices[vid].label
    kids = []
    for i, b in enumerate(bases):
        cid = net.add_vertex(Projection(orthonormalize(b, rank=b.shape[1])), label=f"{label}|{i}")
        for n in nbrs:
            net.set_edge(cid, n, UNKNOWN)
        kids.append(cid)
    net.remove_vertex(vid)
    return kids


def establish_minimality(net: ReflectionNetwork, max_rounds: int | None = None) -> ReflectionNetwork:
    """Refine vertices until every path-isometry depends only on its endpoints."""
    if max_rounds is None:
        max_rounds = max(4, net.dim)
    for _ in range(max_rounds):
        found = find_minimality_violation(net)
        if found is None:
            return net
        root, bases = found
        log.debug("minimality repair at vertex %d into ranks %s", root, [b.shape[1] for b in bases])
        _split_vertex(net, root, bases)
        net.stats.minimality_repairs += 1
        scatter_until_proper(net)
    if find_minimality_violation(net) is None:
        return net
    raise NonTermination("minimality repair did not converge")


# -- phase 3: completeness -----------------------------------------------


def maximal_orthogonal_set(net: ReflectionNetwork) -> list[tuple[int, list[int]]]:
    """Maximal pairwise-orthogonal vertex set per component.

    Greedy scan in ascending (rank, id) order, restarted from every vertex
    of the component; the largest result wins (ties go to the earliest
    start).  A plain greedy pass can get stuck on a hub vertex, e.g. the
    middle of a chain, which would leave the completion step to repair it.
    The returned ids are sorted, so the first one is the lowest id.
    """
    out = []
    for ci, comp in enumerate(net.components()):
        order = sorted(comp, key=lambda x: (net.vertices[x].rank, x))
        best = []
        for start in order:
            chosen = [start]
            for v in order:
                if v != start and all(net.edge(v, c) is None for c in chosen):
                    chosen.append(v)
            if len(chosen) > len(best):
                best = chosen
        out.append((ci, sorted(best)))
    return out


def completion_candidates(net: ReflectionNetwork) -> list[np.ndarray]:
    """Bases of ``(I - I_A) P_v (I - I_A) / (1 - lam)`` for every vertex not covered by ``I_A``."""
    chosen = [v for _, ids in maximal_orthogonal_set(net) for v in ids]
    qa = np.hstack([net.projection(v).basis for v in chosen])
    out = []
    for v in sorted(net.vertices):
        if v in chosen:
            continue
        qv = net.projection(v).basis
        rest = qv - qa @ (qa.conj().T @ qv)
        if is_zero(rest, net.tol, dim=net.dim):
            continue
        lam = float(np.real(np.trace(qv.conj().T @ qa @ qa.conj().T @ qv))) / qv.shape[1]
        out.append(orthonormalize(rest / np.sqrt(1 - lam), rank=qv.shape[1]))
    return out


def establish_completeness(net: ReflectionNetwork, max_rounds: int | None = None) -> ReflectionNetwork:
    """Add complementary projections until the chosen orthogonal set acts as the identity."""
    if max_rounds is None:
        max_rounds = max(4, net.dim)
    for _ in range(max_rounds):
        new = completion_candidates(net)
        if not new:
            return net
        for basis in new:
            existing = sorted(net.vertices)
            cid = net.add_vertex(Projection(basis), label="completion")
            for n in existing:
                ov = net.projection(n).basis.conj().T @ basis
                if not is_zero(ov, net.tol, dim=net.dim):
                    net.set_edge(cid, n, UNKNOWN)
        net.stats.completeness_additions += len(new)
        log.debug("completion added %d projections", len(new))
        scatter_until_proper(net)
        establish_minimality(net)
    raise NonTermination("completion did not converge")


def run_scattering(generators, include_identity: bool = False,
                   tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ReflectionNetwork:
    """Phases 1-3: a proper, minimal and complete reflection network."""
    net = build_initial_network(generators, include_identity, tol)
    scatter_until_proper(net)
    establish_minimality(net)
    establish_completeness(net)
    return net

"""Finite-dimensional left modules as quiver representations.

Provides minimal projective covers, syzygies, projective dimension with an
honest three-way outcome, isomorphism testing, radical/socle layers, and
the layered-graph presentation language for describing modules by their
tops and surviving path diagrams.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import Algebra
from .fields import EchelonSpan, PrimeField
from .quiver import Path

__all__ = [
    "Representation",
    "ModuleMap",
    "PdimResult",
    "IsoResult",
    "ModuleLayers",
    "simple_module",
    "projective_module",
    "projective_sum",
    "path_ideal_module",
    "standard_module",
    "module_from_presentation",
    "parse_layered_graph",
    "LayeredGraph",
    "module_layers",
    "projective_cover",
    "syzygy",
    "projective_dimension",
    "is_isomorphic",
    "hom_basis",
    "direct_sum",
    "submodule_spans",
    "subrep_from_spans",
    "quotient_by_spans",
    "restrict_to_corner",
    "extend_to_algebra",
    "fitting_split",
    "try_split_indecomposable",
    "radical_spans",
    "nilpotent_loop_module",
]

VALIDATE_REPS = True


class RepresentationError(ValueError):
    pass


class Representation:
    """Per-vertex spaces with one matrix per arrow (target-dim x source-dim).

    `tops` optionally records distinguished top elements as
    (name, vertex, vector) triples, used by presentations and reports.
    """

    __slots__ = ("algebra", "dims", "maps", "tops", "meta")

    def __init__(self, algebra: Algebra, dims: dict[str, int],
                 maps: dict[str, np.ndarray] | None = None,
                 tops=None, check: bool | None = None, meta=None):
        self.algebra = algebra
        f = algebra.field
        self.dims = {v: int(dims.get(v, 0)) for v in algebra.quiver.vertices}
        self.maps = {}
        maps = maps or {}
        for a in algebra.quiver.arrows:
            m = maps.get(a.name)
            if m is None:
                m = f.zeros(self.dims[a.target], self.dims[a.source])
            self.maps[a.name] = m
        self.tops = tops
        self.meta = meta or {}
        if check if check is not None else VALIDATE_REPS:
            self.validate()

    # -- structure ---------------------------------------------------------------

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())

    @property
    def is_zero(self) -> bool:
        return self.total_dim == 0

    def dim_vector(self) -> tuple[int, ...]:
        return tuple(self.dims[v] for v in self.algebra.quiver.vertices)

    def validate(self) -> None:
        q = self.algebra.quiver
        for a in q.arrows:
            m = self.maps[a.name]
            want = (self.dims[a.target], self.dims[a.source])
            if m.shape != want:
                raise RepresentationError(
                    f"matrix for {a.name} has shape {m.shape}, wanted {want}")
        f = self.algebra.field
        for rel in self.algebra.relations:
            for (src, tgt, action) in [self._relation_action(rel)]:
                if not f.is_zero(action):
                    raise RepresentationError(f"relation {rel} does not act as zero")

    def _relation_action(self, rel):
        f = self.algebra.field
        terms = rel.terms()
        src = terms[0][0].source
        tgt = terms[0][0].target
        total = f.zeros(self.dims[tgt], self.dims[src])
        for p, c in terms:
            total = f.add(total, f.scale(f.coerce(c), self.path_matrix(p)))
        return src, tgt, total

    def path_matrix(self, p: Path) -> np.ndarray:
        f = self.algebra.field
        m = f.eye(self.dims[p.source])
        for nm in p.arrows:
            m = f.matmul(self.maps[nm], m)
        return m

    def act_path(self, p: Path, vec: np.ndarray) -> np.ndarray:
        f = self.algebra.field
        v = vec
        for nm in p.arrows:
            v = f.matvec(self.maps[nm], v)
        return v

    def support(self) -> frozenset[str]:
        return frozenset(v for v, d in self.dims.items() if d > 0)

    def vertex_nonzero(self, v: str) -> bool:
        return self.dims.get(v, 0) > 0


@dataclass
class ModuleMap:
    """Per-vertex matrices source -> target commuting with all arrows."""

    source: Representation
    target: Representation
    blocks: dict[str, np.ndarray]

    def check(self) -> bool:
        f = self.source.algebra.field
        for a in self.source.algebra.quiver.arrows:
            lhs = f.matmul(self.blocks[a.target], self.source.maps[a.name])
            rhs = f.matmul(self.target.maps[a.name], self.blocks[a.source])
            if not f.eq(lhs, rhs):
                return False
        return True

    def is_invertible(self) -> bool:
        f = self.source.algebra.field
        for v in self.source.algebra.quiver.vertices:
            b = self.blocks[v]
            if b.shape[0] != b.shape[1] or f.rank(b) != b.shape[0]:
                return False
        return True

    def is_injective(self) -> bool:
        f = self.source.algebra.field
        return all(f.rank(self.blocks[v]) == self.source.dims[v]
                   for v in self.source.algebra.quiver.vertices)

    def is_surjective(self) -> bool:
        f = self.source.algebra.field
        return all(f.rank(self.blocks[v]) == self.target.dims[v]
                   for v in self.source.algebra.quiver.vertices)


@dataclass(frozen=True)
class PdimResult:
    """Outcome of a projective-dimension computation.

    kind: "finite" | "infinite" | "exceeds_cutoff".  `value` is the dimension
    for finite results and the cutoff for exceeded ones; `reason` names the
    certificate for infinite results.
    """

    kind: str
    value: int | None = None
    reason: str | None = None
    syzygy_dims: tuple[int, ...] = ()

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    def __str__(self):
        if self.kind == "finite":
            return f"Finite({self.value})"
        if self.kind == "infinite":
            return f"InfiniteDetected({self.reason})"
        return f"ExceedsCutoff({self.value})"


@dataclass(frozen=True)
class IsoResult:
    verdict: str  # "yes" | "no" | "undetermined"
    reason: str = ""

    def __bool__(self):
        return self.verdict == "yes"


@dataclass
class ModuleLayers:
    top: dict[str, int]
    radical_series: list[dict[str, int]]  # dims of J^k M per vertex, k = 0, 1, ...
    socle: dict[str, int]
    loewy_length: int


# ---------------------------------------------------------------------------
# standard modules
# ---------------------------------------------------------------------------


@dataclass
class ProjInfo:
    """Bookkeeping for P = direct sum of indecomposable projectives.

    slots[v] lists (summand index, algebra basis index) in column order of
    P_v; `offset[(i, bidx)]` inverts that.
    """

    types: list[str]
    slots: dict[str, list[tuple[int, int]]]
    offset: dict[tuple[int, int], tuple[str, int]]


def simple_module(alg: Algebra, v: str) -> Representation:
    if v not in alg.quiver.vertices:
        raise RepresentationError(f"no vertex {v!r}")
    dims = {v: 1}
    f = alg.field
    m = Representation(alg, dims, check=False)
    m.tops = [("x0", v, f.vec([1]))]
    return m


def projective_sum(alg: Algebra, types: list[str]) -> tuple[Representation, ProjInfo]:
    f = alg.field
    slots: dict[str, list[tuple[int, int]]] = {v: [] for v in alg.quiver.vertices}
    for i, t in enumerate(types):
        if t not in alg.quiver.vertices:
            raise RepresentationError(f"no vertex {t!r}")
        for bidx in alg.basis_paths_from(t):
            slots[alg.basis[bidx].target].append((i, bidx))
    offset = {}
    for v, lst in slots.items():
        for pos, key in enumerate(lst):
            offset[key] = (v, pos)
    dims = {v: len(lst) for v, lst in slots.items()}
    maps = {}
    for a in alg.quiver.arrows:
        m = f.zeros(dims[a.target], dims[a.source])
        arrow_idx = alg.basis_index[(a.source, (a.name,))]
        for col, (i, bidx) in enumerate(slots[a.source]):
            for k, c in alg.product_indices(arrow_idx, bidx):
                v2, row = offset[(i, k)]
                m[row, col] = f.coerce(c)
        maps[a.name] = m
    tops = []
    for i, t in enumerate(types):
        vec = f.zeros_vec(dims[t])
        unit_idx = alg.vertex_unit[t]
        vec[offset[(i, unit_idx)][1]] = f.one
        tops.append((f"x{i}", t, vec))
    rep = Representation(alg, dims, maps, tops=tops, check=False)
    return rep, ProjInfo(list(types), slots, offset)


def cached_projective_sum(alg: Algebra, types) -> tuple[Representation, ProjInfo]:
    """Shared immutable projective sums, keyed by the exact type tuple."""
    key = ("psum", tuple(types))
    hit = alg._proj_cache.get(key)
    if hit is None:
        hit = projective_sum(alg, list(types))
        alg._proj_cache[key] = hit
    return hit


def projective_module(alg: Algebra, v: str) -> Representation:
    return cached_projective_sum(alg, (v,))[0]


def cached_projective(alg: Algebra, v: str) -> tuple[Representation, ProjInfo]:
    return cached_projective_sum(alg, (v,))


def path_ideal_module(alg: Algebra, p: Path | str) -> Representation:
    """The cyclic left module generated by (the class of) the path p,
    realized inside the projective at its source."""
    if isinstance(p, str):
        p = alg.quiver.path_from_word(p)
    cls = alg.path_class(p)
    if not cls:
        raise RepresentationError(f"path {p} is zero in the algebra")
    P, info = cached_projective(alg, p.source)
    f = alg.field
    gen = {v: f.zeros_vec(P.dims[v]) for v in alg.quiver.vertices}
    for bidx, c in cls.items():
        v, pos = info.offset[(0, bidx)]
        gen[v][pos] = f.coerce(c)
    spans = submodule_spans(P, [gen])
    sub = subrep_from_spans(P, spans, check=False)
    sub.meta["path_ideal"] = str(p)
    return sub


def standard_module(alg: Algebra, kind: str, arg) -> Representation:
    """kind in {"simple", "projective", "path_ideal"}."""
    if kind == "simple":
        return simple_module(alg, arg)
    if kind == "projective":
        return projective_module(alg, arg)
    if kind == "path_ideal":
        return path_ideal_module(alg, arg)
    raise ValueError(f"unknown standard module kind {kind!r}")


# ---------------------------------------------------------------------------
# subspaces, submodules, quotients
# ---------------------------------------------------------------------------


def _vertex_vec(alg, dims, v, vec):
    out = {w: alg.field.zeros_vec(dims[w]) for w in alg.quiver.vertices}
    out[v] = vec
    return out


def submodule_spans(M: Representation, generators) -> dict[str, EchelonSpan]:
    """Close generating elements (dicts vertex -> vector) under all arrow
    actions; returns per-vertex echelon spans."""
    alg = M.algebra
    f = alg.field
    spans = {v: EchelonSpan(f, M.dims[v]) for v in alg.quiver.vertices}
    work: list[tuple[str, np.ndarray]] = []
    for g in generators:
        for v, vec in g.items():
            if vec.shape[0] and not f.is_zero(vec):
                if spans[v].add(vec):
                    work.append((v, vec))
    while work:
        v, vec = work.pop()
        for a in alg.quiver.arrows_from(v):
            img = f.matvec(M.maps[a.name], vec)
            if not f.is_zero(img) and spans[a.target].add(img):
                work.append((a.target, img))
    return spans


def subrep_from_spans(M: Representation, spans: dict[str, EchelonSpan],
                      check: bool | None = None) -> Representation:
    """The subrepresentation with the given per-vertex spans (caller must
    supply spans closed under the arrow actions).

    Coordinates in an echelon basis are read off at the pivot positions, so
    no solving is needed; closure is verified by reconstructing the image."""
    alg = M.algebra
    f = alg.field
    dims = {v: spans[v].rank for v in alg.quiver.vertices}
    basis = {v: spans[v].basis_columns() for v in alg.quiver.vertices}
    maps = {}
    for a in alg.quiver.arrows:
        bu = basis[a.source]
        img = f.matmul(M.maps[a.name], bu)
        if dims[a.target] == 0:
            if not f.is_zero(img):
                raise RepresentationError("spans not closed under arrows")
            maps[a.name] = f.zeros(0, dims[a.source])
            continue
        coords = img[spans[a.target].pivots, :]
        if not f.eq(f.matmul(basis[a.target], coords), img):
            raise RepresentationError("spans not closed under arrows")
        maps[a.name] = coords
    sub = Representation(alg, dims, maps, check=check)
    sub.meta["ambient_basis"] = basis
    return sub


def sub_inclusion(M: Representation, sub: Representation) -> ModuleMap:
    basis = sub.meta["ambient_basis"]
    return ModuleMap(sub, M, dict(basis))


def quotient_by_spans(M: Representation, spans: dict[str, EchelonSpan],
                      check: bool | None = None) -> tuple[Representation, ModuleMap]:
    """M / V for V given by arrow-closed spans; returns (quotient, projection)."""
    alg = M.algebra
    f = alg.field
    comp = {v: spans[v].complement_indices() for v in alg.quiver.vertices}
    dims = {v: len(comp[v]) for v in alg.quiver.vertices}

    proj_blocks = {}
    embed = {}
    for v in alg.quiver.vertices:
        d = M.dims[v]
        pr = f.zeros(dims[v], d)
        em = f.zeros(d, dims[v])
        # projection: reduce mod span, read complement coordinates
        span = spans[v]
        for j in range(d):
            unit = f.zeros_vec(d)
            unit[j] = f.one
            red = span.reduce_vec(unit)
            for k, cidx in enumerate(comp[v]):
                pr[k, j] = red[cidx]
        for k, cidx in enumerate(comp[v]):
            em[cidx, k] = f.one
        proj_blocks[v] = pr
        embed[v] = em
    maps = {}
    for a in alg.quiver.arrows:
        maps[a.name] = f.matmul(proj_blocks[a.target],
                                f.matmul(M.maps[a.name], embed[a.source]))
    tops = None
    if M.tops is not None:
        tops = [(name, v, f.matvec(proj_blocks[v], vec)) for (name, v, vec) in M.tops]
    Q = Representation(alg, dims, maps, tops=tops, check=check)
    return Q, ModuleMap(M, Q, proj_blocks)


def direct_sum(*reps: Representation) -> Representation:
    alg = reps[0].algebra
    f = alg.field
    if any(r.algebra is not alg for r in reps):
        raise RepresentationError("direct sum needs a common algebra")
    dims = {v: sum(r.dims[v] for r in reps) for v in alg.quiver.vertices}
    maps = {}
    for a in alg.quiver.arrows:
        m = f.zeros(dims[a.target], dims[a.source])
        r0 = c0 = 0
        for r in reps:
            blk = r.maps[a.name]
            m[r0:r0 + blk.shape[0], c0:c0 + blk.shape[1]] = blk
            r0 += blk.shape[0]
            c0 += blk.shape[1]
        maps[a.name] = m
    return Representation(alg, dims, maps, check=False)


# ---------------------------------------------------------------------------
# layers, covers, syzygies
# ---------------------------------------------------------------------------


def radical_spans(M: Representation) -> dict[str, EchelonSpan]:
    """Span of all arrow images: JM per vertex (one elimination per vertex)."""
    alg = M.algebra
    f = alg.field
    stacks: dict[str, list[np.ndarray]] = {v: [] for v in alg.quiver.vertices}
    for a in alg.quiver.arrows:
        m = M.maps[a.name]
        if m.shape[0] and m.shape[1]:
            stacks[a.target].append(m.T)
    spans = {}
    for v in alg.quiver.vertices:
        if not stacks[v]:
            spans[v] = EchelonSpan(f, M.dims[v])
        elif len(stacks[v]) == 1:
            spans[v] = EchelonSpan.from_rows(f, stacks[v][0])
        else:
            spans[v] = EchelonSpan.from_rows(f, np.concatenate(stacks[v], axis=0))
    return spans


def module_layers(M: Representation) -> ModuleLayers:
    alg = M.algebra
    f = alg.field
    series = [dict(M.dims)]
    # iterate J^k M by closing arrow images of the previous layer
    cur = {v: EchelonSpan(f, M.dims[v]) for v in alg.quiver.vertices}
    for v in alg.quiver.vertices:
        for j in range(M.dims[v]):
            unit = f.zeros_vec(M.dims[v])
            unit[j] = f.one
            cur[v].add(unit)
    while True:
        nxt = {v: EchelonSpan(f, M.dims[v]) for v in alg.quiver.vertices}
        for a in alg.quiver.arrows:
            m = M.maps[a.name]
            for row in cur[a.source].rows:
                nxt[a.target].add(f.matvec(m, row))
        dims = {v: nxt[v].rank for v in alg.quiver.vertices}
        if sum(dims.values()) == 0:
            break
        series.append(dims)
        if sum(dims.values()) == sum(series[-2].values()):
            raise RepresentationError("radical series does not terminate")
        cur = nxt
    top = {v: series[0][v] - (series[1][v] if len(series) > 1 else 0)
           for v in alg.quiver.vertices}
    socle = {}
    for v in alg.quiver.vertices:
        stacked = [M.maps[a.name] for a in alg.quiver.arrows_from(v)]
        if not stacked:
            socle[v] = M.dims[v]
            continue
        mat = f.zeros(sum(b.shape[0] for b in stacked), M.dims[v])
        r0 = 0
        for b in stacked:
            mat[r0:r0 + b.shape[0], :] = b
            r0 += b.shape[0]
        socle[v] = M.dims[v] - f.rank(mat)
    return ModuleLayers(top=top, radical_series=series, socle=socle,
                        loewy_length=len(series))


def _top_lifts(M: Representation) -> list[tuple[str, np.ndarray]]:
    """One lift per top basis vector: the unit vectors at the non-pivot
    coordinates of the radical span complete it to all of M."""
    alg = M.algebra
    f = alg.field
    rad = radical_spans(M)
    out = []
    for v in alg.quiver.vertices:
        for j in rad[v].complement_indices():
            unit = f.zeros_vec(M.dims[v])
            unit[j] = f.one
            out.append((v, unit))
    return out


def projective_cover(M: Representation) -> tuple[Representation, ModuleMap, ProjInfo]:
    """Minimal projective cover P -> M (lift a basis of M/JM)."""
    if M.is_zero:
        raise RepresentationError("projective cover of the zero module")
    alg = M.algebra
    f = alg.field
    lifts = _top_lifts(M)
    P, info = cached_projective_sum(alg, tuple(v for v, _ in lifts))
    blocks = {v: f.zeros(M.dims[v], P.dims[v]) for v in alg.quiver.vertices}
    # image of basis slot (i, path p) is p . x_i; walk the path basis by
    # degree, extending prefix images one arrow at a time, batched per arrow
    images: dict[tuple[int, int], np.ndarray] = {}
    for i, (v, x) in enumerate(lifts):
        images[(i, alg.vertex_unit[v])] = x
    by_degree: dict[int, list[tuple[int, int]]] = {}
    for key in info.offset:
        by_degree.setdefault(alg.degrees[key[1]], []).append(key)
    for d in sorted(by_degree):
        if d == 0:
            continue
        by_arrow: dict[str, list[tuple[tuple[int, int], tuple[int, int]]]] = {}
        for (i, bidx) in by_degree[d]:
            p = alg.basis[bidx]
            q_idx = alg.basis_index.get((p.source, p.arrows[:-1]))
            if q_idx is not None and (i, q_idx) in images:
                by_arrow.setdefault(p.arrows[-1], []).append(((i, bidx), (i, q_idx)))
            else:  # prefix not a basis path: act by the whole path
                images[(i, bidx)] = M.act_path(
                    p, images[(i, alg.vertex_unit[p.source])])
        for arrow_name, pairs in by_arrow.items():
            src_dim = M.maps[arrow_name].shape[1]
            cols = f.zeros(src_dim, len(pairs))
            for k, (_new, old) in enumerate(pairs):
                cols[:, k] = images[old]
            out = f.matmul(M.maps[arrow_name], cols)
            for k, (new, _old) in enumerate(pairs):
                images[new] = out[:, k]
    for (i, bidx), img in images.items():
        v, pos = info.offset[(i, bidx)]
        blocks[v][:, pos] = img
    cover = ModuleMap(P, M, blocks)
    return P, cover, info


def kernel_of_map(fmap: ModuleMap) -> Representation:
    """Kernel of a module map as a subrepresentation of the source.

    Nullspace columns carry unit vectors at the free coordinates, so their
    transpose is already a reduced echelon row basis with the free indices
    as pivots."""
    P = fmap.source
    alg = P.algebra
    f = alg.field
    spans = {}
    for v in alg.quiver.vertices:
        ns = f.nullspace(fmap.blocks[v])
        free = [int(np.flatnonzero(ns[:, j] != 0)[0]) for j in range(ns.shape[1])]
        spans[v] = EchelonSpan.from_rref(f, ns.T.copy(), free)
    return subrep_from_spans(P, spans, check=False)


def syzygy(M: Representation, k: int = 1) -> Representation:
    """k-fold kernel of minimal projective covers."""
    if k < 1:
        raise ValueError("k must be >= 1")
    X = M
    for _ in range(k):
        if X.is_zero:
            return X
        _P, cover, _info = projective_cover(X)
        X = kernel_of_map(cover)
    return X


def _layer_profile(M: Representation) -> tuple:
    layers = module_layers(M)
    key = tuple(tuple(sorted(d.items())) for d in layers.radical_series)
    return (M.dim_vector(), key, tuple(sorted(layers.socle.items())))


def projective_dimension(M: Representation, cutoff: int = 32,
                         finite_bound: int | None = None,
                         detect_cycles: bool = True,
                         iso_budget: int = 2048) -> PdimResult:
    """Resolve by iterated minimal covers.

    Certificates for infinity: (a) a syzygy isomorphic (certain-yes) to an
    earlier one; (b) for monomial algebras, exceeding the exact finitistic
    bound from the critical-path calculus; (c) exceeding a caller-supplied
    certified bound on finite projective dimensions.  Otherwise the honest
    answer past the cutoff is ExceedsCutoff.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    alg = M.algebra
    bound = finite_bound
    if alg.is_monomial:
        from .monomial import finite_pdim_bound

        mb = finite_pdim_bound(alg)
        bound = mb if bound is None else min(bound, mb)
    X = M
    dims_chain = [X.total_dim]
    history: list[tuple[tuple, Representation]] = []
    step = 0
    while True:
        if X.is_zero:
            return PdimResult("finite", max(step - 1, 0), syzygy_dims=tuple(dims_chain))
        _P, cover, _info = projective_cover(X)
        K = kernel_of_map(cover)
        if K.is_zero:
            return PdimResult("finite", step, syzygy_dims=tuple(dims_chain))
        step += 1
        dims_chain.append(K.total_dim)
        if bound is not None and step > bound:
            return PdimResult(
                "infinite", reason=f"resolution passes the certified finite bound {bound}",
                syzygy_dims=tuple(dims_chain))
        if detect_cycles:
            prof = _layer_profile(K)
            for old_prof, old_rep in history:
                if old_prof == prof:
                    iso = is_isomorphic(K, old_rep, budget=iso_budget)
                    if iso.verdict == "yes":
                        return PdimResult(
                            "infinite",
                            reason="syzygy repeats an earlier syzygy (cycle)",
                            syzygy_dims=tuple(dims_chain))
            history.append((prof, K))
        if step > cutoff:
            return PdimResult("exceeds_cutoff", cutoff, syzygy_dims=tuple(dims_chain))
        X = K


# ---------------------------------------------------------------------------
# hom spaces and isomorphism
# ---------------------------------------------------------------------------


def hom_basis(M: Representation, N: Representation) -> list[dict[str, np.ndarray]]:
    """Basis of the space of module maps M -> N."""
    alg = M.algebra
    if N.algebra is not alg:
        raise RepresentationError("hom needs a common algebra")
    f = alg.field
    verts = list(alg.quiver.vertices)
    sizes = {v: N.dims[v] * M.dims[v] for v in verts}
    offs = {}
    total = 0
    for v in verts:
        offs[v] = total
        total += sizes[v]
    if total == 0:
        return []
    rows = []
    for a in alg.quiver.arrows:
        u, w = a.source, a.target
        n_rows = N.dims[w] * M.dims[u]
        if n_rows == 0:
            continue
        block = f.zeros(n_rows, total)
        # constraint T_w . M_a - N_a . T_u = 0, unknowns vec(T_v) row-major
        Ma, Na = M.maps[a.name], N.maps[a.name]
        for r in range(N.dims[w]):
            for c in range(M.dims[u]):
                ridx = r * M.dims[u] + c
                for k in range(M.dims[w]):
                    if Ma[k, c] != 0:
                        block[ridx, offs[w] + r * M.dims[w] + k] += f.coerce(Ma[k, c])
                for k in range(N.dims[u]):
                    if Na[r, k] != 0:
                        block[ridx, offs[u] + k * M.dims[u] + c] -= f.coerce(Na[r, k])
        rows.append(f.reduce(block))
    if rows:
        mat = f.zeros(sum(b.shape[0] for b in rows), total)
        r0 = 0
        for b in rows:
            mat[r0:r0 + b.shape[0], :] = b
            r0 += b.shape[0]
        ns = f.nullspace(mat)
    else:
        ns = f.eye(total)
    out = []
    for j in range(ns.shape[1]):
        blocks = {}
        for v in verts:
            seg = ns[offs[v]:offs[v] + sizes[v], j]
            blocks[v] = seg.reshape(N.dims[v], M.dims[v]) if sizes[v] else f.zeros(N.dims[v], M.dims[v])
        out.append(blocks)
    return out


def _combine_blocks(f, basis_blocks, coeffs, M, N):
    blocks = {v: f.zeros(N.dims[v], M.dims[v]) for v in M.algebra.quiver.vertices}
    for c, b in zip(coeffs, basis_blocks):
        if c == 0:
            continue
        for v in blocks:
            blocks[v] = f.add(blocks[v], f.scale(f.coerce(c), b[v]))
    return blocks


def is_isomorphic(M: Representation, N: Representation, budget: int = 4096,
                  seed: int = 20240 + 1) -> IsoResult:
    """Certain-yes via an explicit invertible intertwiner, certain-no via
    invariants or an exhausted finite search, else undetermined."""
    alg = M.algebra
    f = alg.field
    if N.algebra is not alg:
        raise RepresentationError("isomorphism test needs a common algebra")
    if M.dim_vector() != N.dim_vector():
        return IsoResult("no", "dimension vectors differ")
    if M.total_dim == 0:
        return IsoResult("yes", "both zero")
    lm, ln = module_layers(M), module_layers(N)
    if lm.radical_series != ln.radical_series:
        return IsoResult("no", "radical layer dimensions differ")
    if lm.socle != ln.socle:
        return IsoResult("no", "socle dimensions differ")
    basis = hom_basis(M, N)
    h = len(basis)
    if h == 0:
        return IsoResult("no", "no nonzero homomorphisms")

    def check(coeffs):
        blocks = _combine_blocks(f, basis, coeffs, M, N)
        phi = ModuleMap(M, N, blocks)
        return phi if phi.is_invertible() else None

    # unit coefficient vectors first (catches identity-like maps cheaply)
    for i in range(h):
        coeffs = [0] * h
        coeffs[i] = 1
        if check(coeffs):
            return IsoResult("yes", "invertible basis homomorphism")
    if isinstance(f, PrimeField) and f.p ** h <= budget:
        for combo in itertools.product(range(f.p), repeat=h):
            if all(c == 0 for c in combo):
                continue
            if check(list(combo)):
                return IsoResult("yes", "invertible intertwiner (exhaustive)")
        return IsoResult("no", "hom space exhausted without invertible map")
    rng = random.Random(seed)
    trials = max(32, min(budget, 256))
    for _ in range(trials):
        coeffs = [f.random_scalar(rng) for _ in range(h)]
        if check(coeffs):
            return IsoResult("yes", "invertible intertwiner (random)")
    return IsoResult("undetermined", "search budget exhausted")


# ---------------------------------------------------------------------------
# presentations and the layered-graph language
# ---------------------------------------------------------------------------


def module_from_presentation(alg: Algebra, top_types: list[str],
                             relation_elements, tops_names=None,
                             check: bool | None = None):
    """Quotient of the projective sum on `top_types` by the submodule
    generated by `relation_elements` (each a dict vertex -> vector in the
    coordinates of the projective sum)."""
    P, info = projective_sum(alg, top_types)
    spans = submodule_spans(P, relation_elements)
    rad = radical_spans(P)
    for v in alg.quiver.vertices:
        for row in spans[v].rows:
            if not rad[v].contains(row):
                raise RepresentationError(
                    "presentation relations must lie in the radical")
    M, proj = quotient_by_spans(P, spans, check=check)
    if tops_names:
        M.tops = [(tops_names[i],) + M.tops[i][1:] for i in range(len(M.tops))]
    return M, P, info, proj


@dataclass
class LayeredGraph:
    """Parsed layered-graph presentation: tops, edges, identification classes."""

    tops: list[tuple[str, str]]  # (node id, vertex)
    edges: list[tuple[str, str, str]]  # (parent, arrow, child)
    identify: list[tuple[str, str]]
    node_vertex: dict[str, str] = dc_field(default_factory=dict)
    node_layer: dict[str, int] = dc_field(default_factory=dict)

    def is_tree(self) -> bool:
        """Acyclicity of the underlying unlayered graph, identified nodes
        merged into single vertices."""
        ident_parent: dict[str, str] = {}

        def find(x):
            while ident_parent.get(x, x) != x:
                ident_parent[x] = ident_parent.get(ident_parent[x], ident_parent[x])
                x = ident_parent[x]
            return x

        for a, b in self.identify:
            ra, rb = find(a), find(b)
            if ra != rb:
                ident_parent[ra] = rb
        comp: dict[str, str] = {}

        def cfind(x):
            while comp.get(x, x) != x:
                comp[x] = comp.get(comp[x], comp[x])
                x = comp[x]
            return x

        for p, _arrow, c in self.edges:
            rp, rc = cfind(find(p)), cfind(find(c))
            if rp == rc:
                return False
            comp[rp] = rc
        return True


def parse_layered_graph_text(text: str, alg: Algebra) -> LayeredGraph:
    tops: list[tuple[str, str]] = []
    edges: list[tuple[str, str, str]] = []
    ident: list[tuple[str, str]] = []
    node_vertex: dict[str, str] = {}
    node_layer: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("top "):
                rest = line[4:]
                name, vtx = (s.strip() for s in rest.split(":", 1))
                if name in node_vertex:
                    raise ValueError(f"node {name!r} already defined")
                if vtx not in alg.quiver.vertices:
                    raise ValueError(f"unknown vertex {vtx!r}")
                tops.append((name, vtx))
                node_vertex[name] = vtx
                node_layer[name] = 0
            elif line.startswith("edge "):
                rest = line[5:]
                lhs, _, rhs = rest.partition("-->")
                parent, _, arrow = lhs.partition("--")
                parent, arrow, child = parent.strip(), arrow.strip(), rhs.strip()
                if not parent or not arrow or not child:
                    raise ValueError("malformed edge line")
                a = alg.quiver.arrow(arrow)
                if parent not in node_vertex:
                    raise ValueError(f"unknown parent node {parent!r}")
                if node_vertex[parent] != a.source:
                    raise ValueError(
                        f"arrow {arrow} starts at {a.source}, not at "
                        f"{node_vertex[parent]} (type of {parent!r})")
                if child in node_vertex:
                    if node_vertex[child] != a.target:
                        raise ValueError(
                            f"node {child!r} already has type {node_vertex[child]}")
                    if node_layer[child] != node_layer[parent] + 1:
                        raise ValueError(f"node {child!r} reused across layers")
                else:
                    node_vertex[child] = a.target
                    node_layer[child] = node_layer[parent] + 1
                edges.append((parent, arrow, child))
            elif line.startswith("identify "):
                parts = line.split()
                if len(parts) != 3:
                    raise ValueError("identify needs exactly two nodes")
                a, b = parts[1], parts[2]
                for n in (a, b):
                    if n not in node_vertex:
                        raise ValueError(f"unknown node {n!r}")
                if node_vertex[a] != node_vertex[b]:
                    raise ValueError("identified nodes must share a vertex type")
                if node_layer[a] != node_layer[b]:
                    raise ValueError("identified nodes must share a layer")
                ident.append((a, b))
            else:
                raise ValueError(f"unrecognized statement {line!r}")
        except (KeyError, ValueError) as exc:
            raise GraphParseError(lineno, str(exc)) from None
    return LayeredGraph(tops, edges, ident, node_vertex, node_layer)


class GraphParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def parse_layered_graph(text: str, alg: Algebra) -> Representation:
    """Module presented by a layered graph: quotient of the projective sum on
    the tops by (a) all paths leaving the drawn diagram and (b) differences of
    identified node paths (coefficient 1)."""
    g = parse_layered_graph_text(text, alg)
    return module_from_layered_graph(g, alg)


def module_from_layered_graph(g: LayeredGraph, alg: Algebra) -> Representation:
    f = alg.field
    P, info = projective_sum(alg, [v for _n, v in g.tops])
    top_index = {name: i for i, (name, _v) in enumerate(g.tops)}

    # element of P carried by each node: follow one defining path per node
    node_elem: dict[str, dict[str, np.ndarray]] = {}
    for name, vtx in g.tops:
        vec = {w: f.zeros_vec(P.dims[w]) for w in alg.quiver.vertices}
        unit_idx = alg.vertex_unit[vtx]
        v0, pos = info.offset[(top_index[name], unit_idx)]
        vec[v0][pos] = f.one
        node_elem[name] = vec
    relations: list[dict[str, np.ndarray]] = []
    children: dict[str, set[str]] = {}
    pending = list(g.edges)
    progressed = True
    while pending and progressed:
        progressed = False
        rest = []
        for parent, arrow, child in pending:
            if parent not in node_elem:
                rest.append((parent, arrow, child))
                continue
            progressed = True
            a = alg.quiver.arrow(arrow)
            img = _act_on_element(P, a.name, node_elem[parent], f)
            children.setdefault(parent, set()).add(arrow)
            if child in node_elem:
                # a second route into an existing node: identified with coefficient 1
                relations.append(_elem_sub(f, img, node_elem[child]))
            else:
                node_elem[child] = img
        pending = rest
    if pending:
        raise GraphParseError(0, "graph has unreachable edges")
    for a, b in g.identify:
        relations.append(_elem_sub(f, node_elem[a], node_elem[b]))
    # kill every arrow exit without a drawn child
    for name, vtx in g.node_vertex.items():
        for a in alg.quiver.arrows_from(vtx):
            if a.name in children.get(name, set()):
                continue
            img = _act_on_element(P, a.name, node_elem[name], f)
            if any(not f.is_zero(v) for v in img.values()):
                relations.append(img)
    spans = submodule_spans(P, relations)
    M, _proj = quotient_by_spans(P, spans)
    M.tops = [(name, vtx, spans[vtx].project_coords(node_elem[name][vtx]))
              for name, vtx in g.tops]
    M.meta["graph"] = g
    return M


def _act_on_element(P, arrow_name, elem, f):
    a = P.algebra.quiver.arrow(arrow_name)
    out = {w: f.zeros_vec(P.dims[w]) for w in P.algebra.quiver.vertices}
    out[a.target] = f.matvec(P.maps[arrow_name], elem[a.source])
    return out


def _elem_sub(f, x, y):
    return {v: f.sub(x[v], y[v]) for v in x}


# ---------------------------------------------------------------------------
# transport along corners
# ---------------------------------------------------------------------------


def restrict_to_corner(M: Representation, corner: Algebra) -> Representation:
    """View an M supported on the corner's vertices as a corner module."""
    for v, d in M.dims.items():
        if d and v not in corner.quiver.vertices:
            raise RepresentationError(f"module not supported on corner ({v})")
    dims = {v: M.dims.get(v, 0) for v in corner.quiver.vertices}
    maps = {a.name: M.maps[a.name] for a in corner.quiver.arrows}
    return Representation(corner, dims, maps, check=False)


def extend_to_algebra(M: Representation, big: Algebra) -> Representation:
    """View a corner module as a module over the bigger algebra (zero action
    on everything new)."""
    dims = {v: M.dims.get(v, 0) for v in big.quiver.vertices}
    maps = {}
    for a in big.quiver.arrows:
        if a.name in M.maps:
            maps[a.name] = M.maps[a.name]
    return Representation(big, dims, maps, check=False)


def truncate_to_vertices(M: Representation, verts, corner: Algebra) -> Representation:
    """e.M as a corner module: per-vertex spaces on `verts`, internal arrows."""
    dims = {v: (M.dims.get(v, 0) if v in verts else 0) for v in corner.quiver.vertices}
    maps = {}
    for a in corner.quiver.arrows:
        if a.source in verts and a.target in verts:
            maps[a.name] = M.maps[a.name]
    return Representation(corner, dims, maps, check=False)


# ---------------------------------------------------------------------------
# splitting heuristics (decomposability certificates)
# ---------------------------------------------------------------------------


def fitting_split(M: Representation, phi_blocks: dict[str, np.ndarray]):
    """Split M = ker(phi^inf) + im(phi^inf) if the stable kernel/image are
    both nonzero; returns (kernel_rep, image_rep) or None."""
    alg = M.algebra
    f = alg.field
    blocks = dict(phi_blocks)
    n = M.total_dim + 1
    # iterate squaring until ranks stabilize
    for _ in range(n.bit_length() + 1):
        blocks = {v: f.matmul(blocks[v], blocks[v]) for v in blocks}
    ranks = {v: f.rank(blocks[v]) for v in blocks}
    k = sum(M.dims[v] - ranks[v] for v in blocks)
    r = sum(ranks.values())
    if k == 0 or r == 0:
        return None
    ker_spans = {}
    im_spans = {}
    for v in alg.quiver.vertices:
        ks = EchelonSpan(f, M.dims[v])
        ns = f.nullspace(blocks[v])
        for j in range(ns.shape[1]):
            ks.add(ns[:, j])
        ker_spans[v] = ks
        im = EchelonSpan(f, M.dims[v])
        for j in range(blocks[v].shape[1]):
            im.add(blocks[v][:, j])
        im_spans[v] = im
    for v in alg.quiver.vertices:
        if ker_spans[v].rank + im_spans[v].rank != M.dims[v]:
            return None  # not yet stable; caller may iterate more
    K = subrep_from_spans(M, ker_spans, check=False)
    I = subrep_from_spans(M, im_spans, check=False)
    return K, I


def try_split_indecomposable(M: Representation, rng: random.Random,
                             tries: int = 24):
    """Look for a nontrivial direct decomposition via random Fitting
    decompositions of endomorphisms.  Returns (A, B) or None (= no split
    found; module treated as indecomposable)."""
    if M.total_dim <= 1:
        return None
    ends = hom_basis(M, M)
    f = M.algebra.field
    if len(ends) == 1:
        return None  # End = K, certainly indecomposable
    candidates = list(ends)
    for _ in range(tries):
        coeffs = [f.random_scalar(rng) for _ in ends]
        blocks = _combine_blocks(f, ends, coeffs, M, M)
        candidates.append(blocks)
    for blocks in candidates:
        res = fitting_split(M, blocks)
        if res is not None:
            return res
    return None


def nilpotent_loop_module(alg: Algebra, vertex: str, loop_arrow: str) -> Representation:
    """The 2-dimensional module at `vertex` on which the loop acts with a
    single nontrivial Jordan block and every other arrow acts as zero."""
    f = alg.field
    a = alg.quiver.arrow(loop_arrow)
    if a.source != vertex or a.target != vertex:
        raise RepresentationError(f"{loop_arrow} is not a loop at {vertex}")
    dims = {vertex: 2}
    maps = {loop_arrow: f.mat([[0, 0], [1, 0]])}
    return Representation(alg, dims, maps)

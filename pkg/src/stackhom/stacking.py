"""Stacked algebras: vertex partitions with one-way arrow flow, corner
algebras, two-layer stacks, and the verifiers relating syzygies over a
stack to syzygies over its layers.

A stacking partition splits the vertex set into a lower part (arrows from
it stay inside) and an upper part, with the extra condition that a
composite (arrow into the lower part) . (arrow out of a non-source) always
dies.  Second syzygies then split into lower and upper components, which
drives the finitistic-dimension bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .algebra import Algebra, AlgebraError, Binomial, Monomial, _build, _relation_vectors
from .fields import EchelonSpan
from .quiver import Arrow, Path, Quiver, compose_paths, enumerate_paths
from . import rephom as rh

__all__ = [
    "StackingPartition",
    "PartitionCheck",
    "check_partition",
    "corner_algebra",
    "build_2stack",
    "StackInvariants",
    "stack_invariants",
    "verify_splitting",
    "SplittingReport",
    "corner_module_of_vertex",
    "findim_upper_bound_for_interval",
]


@dataclass(frozen=True)
class StackingPartition:
    """lower/upper vertex sets; `complexity` relaxes the kill condition to
    composites through endpoints of length-c paths (c = 1 is the standard
    condition: through non-sources)."""

    lower: frozenset[str]
    upper: frozenset[str]
    complexity: int = 1

    @staticmethod
    def of(lower, upper, complexity: int = 1) -> "StackingPartition":
        return StackingPartition(frozenset(lower), frozenset(upper), complexity)


@dataclass
class PartitionCheck:
    valid: bool
    violations: list[str]


def _length_c_endpoints(quiver: Quiver, c: int) -> set[str]:
    """Vertices that end some path of length c in the quiver."""
    current = set(quiver.vertices)
    for _ in range(c):
        current = {a.target for a in quiver.arrows if a.source in current}
    return current


def check_partition(alg: Algebra, lower, upper, complexity: int = 1) -> PartitionCheck:
    """Condition (one-way flow): arrows from the lower set stay inside it.
    Condition (composite kill) at complexity c: for every arrow a from upper
    to lower and every arrow b ending at a's source, if a.b survives then b
    starts at the endpoint of no length-c path."""
    lower, upper = frozenset(lower), frozenset(upper)
    verts = set(alg.quiver.vertices)
    violations: list[str] = []
    if lower & upper:
        raise AlgebraError("partition parts overlap")
    if (lower | upper) != verts:
        raise AlgebraError("partition does not cover the vertex set")
    for a in alg.quiver.arrows:
        if a.source in lower and a.target not in lower:
            violations.append(f"arrow {a.name}: {a.source} -> {a.target} leaves the lower part")
    deep = _length_c_endpoints(alg.quiver, complexity)
    for a in alg.quiver.arrows:
        if not (a.source in upper and a.target in lower):
            continue
        for b in alg.quiver.arrows_into(a.source):
            prod = compose_paths(alg.quiver.arrow_path(a.name),
                                 alg.quiver.arrow_path(b.name))
            if alg.is_zero_path(prod):
                continue
            if b.source in deep:
                violations.append(
                    f"surviving composite {a.name}*{b.name} with {b.name} "
                    f"starting at a depth-{complexity} vertex")
    return PartitionCheck(not violations, violations)


def corner_algebra(alg: Algebra, vertex_set) -> Algebra:
    """Algebra on the full subquiver with the induced relations (the
    degreewise intersection of the relation ideal with internal paths)."""
    S = [v for v in alg.quiver.vertices if v in set(vertex_set)]
    in_S = set(S)
    arrows = [a for a in alg.quiver.arrows if a.source in in_S and a.target in in_S]
    sub = Quiver(S, arrows)
    f = alg.field
    rel_vecs = _relation_vectors(alg.relations)
    all_paths = enumerate_paths(alg.quiver, alg.nilp_bound)
    bucket: dict[tuple[int, str, str], list[Path]] = {}
    for p in all_paths:
        bucket.setdefault((p.length, p.source, p.target), []).append(p)
    induced: list = []
    for d in range(2, alg.nilp_bound):
        paths_d = [p for p in all_paths if p.length == d]
        if not paths_d:
            continue
        col_of = {(p.source, p.arrows): j for j, p in enumerate(paths_d)}
        internal = [j for j, p in enumerate(paths_d)
                    if p.source in in_S and p.target in in_S
                    and all(alg.quiver.arrow(nm).target in in_S for nm in p.arrows)]
        if not internal:
            continue
        external = [j for j in range(len(paths_d)) if j not in set(internal)]
        rows = _ideal_rows(alg, rel_vecs, bucket, paths_d, col_of, f, d)
        if not rows:
            continue
        mat = f.zeros(len(rows), len(paths_d))
        for i, row in enumerate(rows):
            mat[i, :] = row
        # intersect the row space with the coordinate subspace of internal paths:
        # combos of rows vanishing on all external columns
        if external:
            ext = mat[:, external]
            coeffs = f.nullspace(ext.T).T  # rows spanning left-kernel of ext
            if coeffs.shape[0]:
                inter = f.matmul(coeffs, mat)
            else:
                inter = f.zeros(0, len(paths_d))
        else:
            inter = mat
        red, piv = f.rref(inter)
        for i in range(len(piv)):
            terms = [(paths_d[j], red[i, j]) for j in range(len(paths_d)) if red[i, j] != 0]
            induced.append(_vector_to_relation(terms, f))
    corner = _build(sub, _relation_vectors(induced), f, alg.nilp_bound, tuple(induced))
    return corner


def _ideal_rows(alg, rel_vecs, bucket, paths_d, col_of, f, d):
    rows = []
    for g, src, tgt, terms in rel_vecs:
        if g > d:
            continue
        for lv in range(0, d - g + 1):
            lu = d - g - lv
            tails = [p for (ln, s, t), ps in bucket.items() if ln == lv and t == src for p in ps]
            heads = [p for (ln, s, t), ps in bucket.items() if ln == lu and s == tgt for p in ps]
            for v in tails:
                for u in heads:
                    row = f.zeros_vec(len(paths_d))
                    for term_path, coeff in terms:
                        w = compose_paths(term_path, v)
                        w = compose_paths(u, w)
                        row[col_of[(w.source, w.arrows)]] += f.coerce(coeff)
                    rows.append(f.reduce(row))
    return rows


def _vector_to_relation(terms, f):
    """Render a homogeneous ideal vector as a supported relation shape
    (a path, or a coefficient-one difference of parallel paths)."""
    terms = [(p, f.coerce(c)) for p, c in terms if c != 0]
    if len(terms) == 1:
        return Monomial(terms[0][0])
    if len(terms) == 2:
        (p, cp), (q, cq) = terms
        if cp == f.coerce(-cq):
            return Binomial(p, q) if cp == f.one else Binomial(q, p)
    raise AlgebraError(
        "induced corner relation is not a path or a coefficient-one "
        f"difference of paths: {[(str(p), str(c)) for p, c in terms]}")


def build_2stack(lower: Algebra, upper: Algebra, connecting, extra_relations=()) -> Algebra:
    """Glue `upper` on top of `lower` along new arrows from upper vertices to
    lower vertices.  Composites (connecting arrow).(upper arrow out of a
    non-source) are forced into the ideal; extra relations must cross the
    boundary.  Validates that both corners are recovered."""
    if upper.dim == 0 or lower.dim == 0:
        raise AlgebraError("both layers of a stack must be nonzero")
    if lower.field.spec != upper.field.spec:
        raise AlgebraError("layers must share a field")
    lowset, upset = set(lower.quiver.vertices), set(upper.quiver.vertices)
    if lowset & upset:
        raise AlgebraError("layer vertex sets overlap")
    verts = list(upper.quiver.vertices) + list(lower.quiver.vertices)
    arrows = [(a.name, a.source, a.target) for a in upper.quiver.arrows]
    arrows += [(a.name, a.source, a.target) for a in lower.quiver.arrows]
    for (name, src, dst) in connecting:
        if src not in upset or dst not in lowset:
            raise AlgebraError(f"connecting arrow {name} must run upper -> lower")
        arrows.append((name, src, dst))
    quiver = Quiver(verts, arrows)
    nilp = max(lower.nilp_bound, upper.nilp_bound)
    rels = list(lower.relations) + list(upper.relations)
    upper_sources = set(upper.quiver.sources())
    for (name, src, dst) in connecting:
        for b in upper.quiver.arrows_into(src):
            if b.source in upper_sources:
                continue
            rels.append(Monomial(quiver.path([b.name, name])))
    conn_names = {name for (name, _s, _d) in connecting}
    if hasattr(extra_relations, "materialize"):
        extra_relations = extra_relations.materialize(quiver)
    elif callable(extra_relations):
        extra_relations = extra_relations(quiver)
    for rel in extra_relations:
        for p, _c in rel.terms():
            crosses = any(nm in conn_names for nm in p.arrows)
            if not crosses:
                raise AlgebraError(
                    f"extra stack relation {rel} does not cross the boundary")
        rels.append(rel)
    out = _build(quiver, _relation_vectors(rels), lower.field, nilp, tuple(rels))
    for corner_verts, reference in ((lowset, lower), (upset, upper)):
        got = corner_algebra(out, [v for v in out.quiver.vertices if v in corner_verts])
        if not algebras_structurally_equal(got, reference):
            raise AlgebraError("stack does not restrict to its layers")
    return out


def algebras_structurally_equal(a: Algebra, b: Algebra) -> bool:
    """Equality as presented algebras: same quiver data, same surviving basis
    paths, same structure constants."""
    if tuple(a.quiver.vertices) != tuple(b.quiver.vertices):
        return False
    if [(x.name, x.source, x.target) for x in a.quiver.arrows] != \
       [(x.name, x.source, x.target) for x in b.quiver.arrows]:
        return False
    if [(p.source, p.arrows) for p in a.basis] != [(p.source, p.arrows) for p in b.basis]:
        return False
    f = a.field
    for i in range(a.dim):
        for j in range(a.dim):
            pa = a.product_indices(i, j)
            pb = b.product_indices(i, j)
            if len(pa) != len(pb):
                return False
            for (k1, c1), (k2, c2) in zip(pa, pb):
                if k1 != k2 or f.coerce(c1) != f.coerce(c2):
                    return False
    return True


# ---------------------------------------------------------------------------
# invariants of a stacking partition
# ---------------------------------------------------------------------------


def corner_module_of_vertex(alg: Algebra, corner: Algebra, lower: frozenset[str],
                            e: str) -> rh.Representation:
    """The lower slice of the projective at e (all basis paths from e landing
    in the lower part) as a module over the lower corner algebra."""
    P = rh.projective_module(alg, e)
    spans = {}
    f = alg.field
    for v in alg.quiver.vertices:
        span = EchelonSpan(f, P.dims[v])
        if v in lower:
            for j in range(P.dims[v]):
                unit = f.zeros_vec(P.dims[v])
                unit[j] = f.one
                span.add(unit)
        spans[v] = span
    sub = rh.subrep_from_spans(P, spans, check=False)
    return rh.restrict_to_corner(sub, corner)


@dataclass
class StackInvariants:
    partition: StackingPartition
    corner_pdim_bound: int  # the paper-style t: max finite lower-pdim of e'Le
    corner_pdims: dict[str, str]
    homogeneous_vertices: list[str]
    all_critical_endpoints_homogeneous: bool
    corollary9_applicable: bool
    lower_findim: tuple[int, int] | None  # interval, exact iff lo == hi
    upper_findim: tuple[int, int] | None
    findim_bounds: tuple[int, int] | None  # induced interval for the stack
    notes: list[str] = dc_field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "lower": sorted(self.partition.lower),
            "upper": sorted(self.partition.upper),
            "corner_pdim_bound": self.corner_pdim_bound,
            "corner_pdims": self.corner_pdims,
            "homogeneous_vertices": self.homogeneous_vertices,
            "all_critical_endpoints_homogeneous": self.all_critical_endpoints_homogeneous,
            "corollary9_applicable": self.corollary9_applicable,
            "lower_findim": self.lower_findim,
            "upper_findim": self.upper_findim,
            "findim_bounds": self.findim_bounds,
            "notes": self.notes,
        }


def _findim_interval_of(alg: Algebra, cutoff: int) -> tuple[int, int] | None:
    """Best certified interval for the little finitistic dimension."""
    from . import monomial as mono

    exact0 = mono.radical_square_zero_findim(alg)
    if exact0 is not None:
        return (0, 0)
    if alg.is_monomial:
        lo, hi = mono.findim_interval(alg)
        g = global_dim_if_finite(alg, cutoff)
        if g is not None:
            # finite global dimension pins the value
            return (g, g)
        return (lo, hi)
    return None


def global_dim_if_finite(alg: Algebra, cutoff: int = 16):
    from .monomial import global_dimension

    r = global_dimension(alg, cutoff=cutoff)
    return r.value if r.kind == "finite" else None


def stack_invariants(alg: Algebra, part: StackingPartition, cutoff: int = 16,
                     lower_findim: tuple[int, int] | None = None,
                     upper_findim: tuple[int, int] | None = None) -> StackInvariants:
    """Compute the corner-pdim bound, homogeneity data, monomial-reduction
    applicability, and the induced finitistic-dimension interval."""
    from . import monomial as mono

    chk = check_partition(alg, part.lower, part.upper, part.complexity)
    if not chk.valid:
        raise AlgebraError("invalid stacking partition: " + "; ".join(chk.violations))
    lower_alg = corner_algebra(alg, sorted(part.lower, key=alg.quiver.vertices.index))
    upper_alg = corner_algebra(alg, sorted(part.upper, key=alg.quiver.vertices.index))
    notes: list[str] = []

    upper_sub = Quiver(
        [v for v in alg.quiver.vertices if v in part.upper],
        [a for a in alg.quiver.arrows if a.source in part.upper and a.target in part.upper])
    upper_sources = set(upper_sub.sources())
    t_val = -1
    corner_pdims: dict[str, str] = {}
    for e in alg.quiver.vertices:
        if e not in part.upper or e in upper_sources:
            continue
        slice_mod = corner_module_of_vertex(alg, lower_alg, part.lower, e)
        if slice_mod.is_zero:
            corner_pdims[e] = "zero module"
            continue
        if lower_alg.is_monomial:
            r = mono.monomial_pdim(slice_mod)
        else:
            r = rh.projective_dimension(slice_mod, cutoff=cutoff)
        corner_pdims[e] = str(r)
        if r.kind == "finite":
            t_val = max(t_val, r.value)
        elif r.kind == "exceeds_cutoff":
            notes.append(f"corner slice at {e} unresolved at cutoff {cutoff}")

    homogeneous = [
        v for v in alg.quiver.vertices
        if v in part.upper and all(a.target in part.upper for a in alg.quiver.arrows_from(v))
    ]
    all_homog = False
    cor9 = False
    if upper_alg.is_monomial:
        crit = mono.critical_report(upper_alg)
        endpoints = {p.target for p in crit.critical_paths}
        all_homog = endpoints.issubset(set(homogeneous))
        cor9 = True
        for p in crit.critical_paths:
            if p.target in homogeneous:
                continue
            # refined check: the full-algebra pdim must be infinite or agree
            ideal_full = rh.path_ideal_module(alg, p)
            r_full = rh.projective_dimension(ideal_full, cutoff=cutoff)
            r_upper = mono.pdim_path_module(upper_alg, p)
            if r_full.kind == "infinite":
                continue
            if r_full.kind == "finite" and r_upper.kind == "finite" \
                    and r_full.value == r_upper.value:
                continue
            cor9 = False
            notes.append(f"critical path {p} obstructs the monomial reduction")
            break

    lf = lower_findim if lower_findim is not None else _findim_interval_of(lower_alg, cutoff)
    uf = upper_findim if upper_findim is not None else _findim_interval_of(upper_alg, cutoff)
    bounds = None
    if lf is not None and uf is not None:
        bounds = (lf[0], lf[1] + uf[1] + 1)
    elif lf is not None:
        notes.append("upper corner finitistic dimension unresolved; no upper bound")
        bounds = None
    return StackInvariants(
        partition=part,
        corner_pdim_bound=t_val,
        corner_pdims=corner_pdims,
        homogeneous_vertices=homogeneous,
        all_critical_endpoints_homogeneous=all_homog,
        corollary9_applicable=cor9,
        lower_findim=lf,
        upper_findim=uf,
        findim_bounds=bounds,
        notes=notes,
    )


def findim_upper_bound_for_interval(lower_iv, upper_iv) -> int:
    return lower_iv[1] + upper_iv[1] + 1


# ---------------------------------------------------------------------------
# splitting verifier
# ---------------------------------------------------------------------------


@dataclass
class SplittingReport:
    passed: bool
    checks: list[str]
    failures: list[str]

    def to_json(self):
        return {"passed": self.passed, "checks": self.checks, "failures": self.failures}


def _crossing_maps_zero(X: rh.Representation, upper, lower) -> bool:
    f = X.algebra.field
    for a in X.algebra.quiver.arrows:
        if a.source in upper and a.target in lower:
            if not f.is_zero(X.maps[a.name]):
                return False
    return True


def verify_splitting(alg: Algebra, part: StackingPartition, N: rh.Representation,
                     depth: int = 2, cutoff: int = 16) -> SplittingReport:
    """Check: the second syzygy splits into lower/upper vertex components as
    submodules; the lower slice resolves identically over the lower corner;
    the upper slice's corner resolution matches the corner slices of the
    full resolution up to `depth`."""
    checks: list[str] = []
    failures: list[str] = []
    chk = check_partition(alg, part.lower, part.upper, part.complexity)
    if not chk.valid:
        raise AlgebraError("invalid stacking partition: " + "; ".join(chk.violations))
    lower_alg = corner_algebra(alg, sorted(part.lower, key=alg.quiver.vertices.index))
    upper_alg = corner_algebra(alg, sorted(part.upper, key=alg.quiver.vertices.index))

    if not N.is_zero:
        X = rh.syzygy(N, 2)
        if X.is_zero:
            checks.append("second syzygy vanishes; splitting vacuous")
        elif _crossing_maps_zero(X, part.upper, part.lower):
            checks.append("second syzygy splits into lower/upper submodules")
        else:
            failures.append("second syzygy has nonzero upper-to-lower action")

    # lower slice: resolutions agree over the stack and over the lower corner
    eN_lower = rh.truncate_to_vertices(N, part.lower, alg)
    if not eN_lower.is_zero:
        over_stack = eN_lower
        over_corner = rh.restrict_to_corner(
            rh.truncate_to_vertices(N, part.lower, alg), lower_alg)
        ok = True
        A, B = over_stack, over_corner
        for k in range(1, depth + 1):
            A = rh.syzygy(A, 1)
            B = rh.syzygy(B, 1)
            a_restr = rh.restrict_to_corner(A, lower_alg) if _supported_in(A, part.lower) else None
            if a_restr is None:
                failures.append(f"lower-slice syzygy {k} leaves the lower part")
                ok = False
                break
            iso = rh.is_isomorphic(a_restr, B)
            if iso.verdict != "yes":
                failures.append(f"lower-slice syzygy {k} differs over stack vs corner ({iso.verdict})")
                ok = False
                break
        if ok:
            checks.append(f"lower slice resolves identically over the corner (depth {depth})")
    else:
        checks.append("lower slice is zero; lower comparison vacuous")

    # upper slice: corner resolution = corner slices of the full resolution
    eN_upper = rh.truncate_to_vertices(N, part.upper, upper_alg)
    if not eN_upper.is_zero:
        corner_side = eN_upper
        full_side = N
        ok = True
        for k in range(1, depth + 1):
            corner_side = rh.syzygy(corner_side, 1)
            full_side = rh.syzygy(full_side, 1)
            sliced = rh.truncate_to_vertices(full_side, part.upper, upper_alg)
            iso = rh.is_isomorphic(sliced, corner_side)
            if iso.verdict != "yes":
                failures.append(
                    f"upper slice of syzygy {k} differs from the corner syzygy ({iso.verdict})")
                ok = False
                break
        if ok:
            checks.append(f"upper corner syzygies match the sliced resolution (depth {depth})")
    else:
        checks.append("upper slice is zero; upper comparison vacuous")

    return SplittingReport(not failures, checks, failures)


def _supported_in(M: rh.Representation, verts) -> bool:
    return all(d == 0 or v in verts for v, d in M.dims.items())

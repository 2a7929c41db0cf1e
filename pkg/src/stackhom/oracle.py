"""Exhaustive/sampled enumeration of Loewy-length-two modules over a prime
field, certifying bounded-multiplicity finitistic dimension values.

Modules with squared-radical kill and prescribed top are the quotients
P/V with P the projective sum for a multiplicity vector and V a submodule
squeezed between the squared radical and the radical.  Such V correspond
exactly to tuples of subspaces of the per-vertex radical-layer components
(a submodule of a semisimple module is a vertex-graded subspace), so the
lattice is a product of Gaussian subspace lattices and can be enumerated
or uniformly sampled per vertex.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import Algebra
from .fields import EchelonSpan, ExactField, GF, PrimeField
from . import monomial as mono
from . import rephom as rh

__all__ = [
    "EnumerationBudget",
    "FindimObservation",
    "gaussian_binomial",
    "subspace_count",
    "enumerate_subspaces",
    "random_subspace",
    "graded_lattice_size",
    "enumerate_loewy2",
    "observed_findim",
    "BudgetExceeded",
]


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    """Controls for a finitistic-dimension observation run."""

    field: ExactField = dc_field(default_factory=lambda: GF(2))
    max_lattice: int = 200_000        # full enumeration cap per multiplicity vector
    sample_size: int = 200            # samples when a lattice exceeds the cap
    seed: int = 7
    pdim_cutoff: int = 16
    max_dim: int | None = None        # skip lattices with dim JP/J^2P beyond this
    use_reductions: bool = True       # allow certified wholesale classification

    def __post_init__(self):
        if self.max_lattice < 1 or self.sample_size < 0 or self.pdim_cutoff < 1:
            raise ValueError("budget parameters out of range")


# ---------------------------------------------------------------------------
# subspace lattices over F_q
# ---------------------------------------------------------------------------


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def subspace_count(n: int, q: int) -> int:
    """Total number of subspaces of F_q^n."""
    return sum(gaussian_binomial(n, k, q) for k in range(n + 1))


def enumerate_subspaces(d: int, field: PrimeField):
    """All subspaces of F_q^d as reduced-echelon row matrices (k x d),
    deterministic order: by rank, then pivot set, then free entries."""
    q = field.p
    yield field.zeros(0, d)
    for k in range(1, d + 1):
        for pivots in itertools.combinations(range(d), k):
            free_pos = _free_positions(pivots, d)
            for values in itertools.product(range(q), repeat=len(free_pos)):
                m = field.zeros(k, d)
                for i, p in enumerate(pivots):
                    m[i, p] = field.one
                for (i, j), val in zip(free_pos, values):
                    m[i, j] = field.coerce(val)
                yield m


def random_subspace(d: int, field: PrimeField, rng: random.Random) -> np.ndarray:
    """Uniformly random subspace of F_q^d (rank weighted by the Gaussian
    binomial, then pivots weighted by their free-entry count)."""
    q = field.p
    weights = [gaussian_binomial(d, k, q) for k in range(d + 1)]
    k = rng.choices(range(d + 1), weights=weights)[0]
    if k == 0:
        return field.zeros(0, d)
    combos = list(itertools.combinations(range(d), k))
    cw = []
    for pivots in combos:
        free = _free_positions(pivots, d)
        cw.append(q ** len(free))
    pivots = combos[rng.choices(range(len(combos)), weights=cw)[0]]
    m = field.zeros(k, d)
    for i, p in enumerate(pivots):
        m[i, p] = field.one
    for (i, j) in _free_positions(pivots, d):
        m[i, j] = field.coerce(rng.randrange(q))
    return m


def _free_positions(pivots, d):
    out = []
    pset = set(pivots)
    for i, p in enumerate(pivots):
        for j in range(p + 1, d):
            if j not in pset:
                out.append((i, j))
    return out


# ---------------------------------------------------------------------------
# the Loewy-2 lattice over an algebra
# ---------------------------------------------------------------------------


@dataclass
class _Lattice:
    """Per-multiplicity-vector data: the projective sum, the squared-radical
    spans, and lifted bases of the radical-layer components."""

    P: rh.Representation
    mu: dict[str, int]
    rad: dict[str, EchelonSpan]
    rad2: dict[str, EchelonSpan]
    layer_basis: dict[str, list[np.ndarray]]  # lifts of JP/J^2P per vertex

    @property
    def layer_dims(self) -> dict[str, int]:
        return {v: len(b) for v, b in self.layer_basis.items()}

    @property
    def total_layer_dim(self) -> int:
        return sum(len(b) for b in self.layer_basis.values())


def _build_lattice(alg: Algebra, mu: dict[str, int]) -> _Lattice:
    f = alg.field
    types = []
    for v in alg.quiver.vertices:
        types.extend([v] * mu.get(v, 0))
    P, _info = rh.cached_projective_sum(alg, tuple(types))
    rad = rh.radical_spans(P)
    rad2 = {v: EchelonSpan(f, P.dims[v]) for v in alg.quiver.vertices}
    for a in alg.quiver.arrows:
        for row in rad[a.source].rows:
            rad2[a.target].add(f.matvec(P.maps[a.name], row))
    layer = {}
    for v in alg.quiver.vertices:
        lifts = []
        probe = rad2[v].copy()
        for row in rad[v].rows:
            if probe.add(row):
                lifts.append(row)
        layer[v] = lifts
    return _Lattice(P, dict(mu), rad, rad2, layer)


def _module_spans(lat: _Lattice, choice: dict[str, np.ndarray]) -> dict[str, EchelonSpan]:
    """Spans of the kernel V for one lattice point: squared radical plus the
    chosen layer subspaces lifted along the stored layer bases.  Vertices
    without a choice share the (read-only) squared-radical span."""
    f = lat.P.algebra.field
    spans = {}
    for v in lat.P.algebra.quiver.vertices:
        rows = choice.get(v)
        if rows is None or rows.shape[0] == 0:
            spans[v] = lat.rad2[v]
            continue
        span = lat.rad2[v].copy()
        lifts = lat.layer_basis[v]
        for i in range(rows.shape[0]):
            vec = f.zeros_vec(lat.P.dims[v])
            for j in range(rows.shape[1]):
                c = rows[i, j]
                if c != 0:
                    vec = f.add(vec, f.scale(f.coerce(c), lifts[j]))
            span.add(vec)
        spans[v] = span
    return spans


@dataclass
class LatticePoint:
    """One module of the lattice; the kernel representation and the module
    itself are built lazily (the kernel's vertex dimensions are already
    determined by the spans)."""

    mu: dict[str, int]
    choice: dict[str, np.ndarray]
    _lattice: "_Lattice"
    _spans: dict[str, EchelonSpan]
    _kernel: rh.Representation | None = None

    def kernel_dim(self, v: str) -> int:
        return self._spans[v].rank

    @property
    def kernel_total_dim(self) -> int:
        return sum(s.rank for s in self._spans.values())

    @property
    def kernel(self) -> rh.Representation:
        if self._kernel is None:
            self._kernel = rh.subrep_from_spans(self._lattice.P, self._spans,
                                                check=False)
        return self._kernel

    @property
    def module(self) -> rh.Representation:
        M, _ = rh.quotient_by_spans(self._lattice.P, self._spans, check=False)
        return M


def enumerate_loewy2(alg: Algebra, mu: dict[str, int], budget: EnumerationBudget):
    """Yield (module, presentation) for the multiplicity vector; exhaustive
    when the graded lattice fits the budget, else uniform seeded samples.
    Raises BudgetExceeded only if sampling is disabled (sample_size = 0)."""
    if not isinstance(budget.field, PrimeField):
        raise ValueError("lattice enumeration needs a prime field")
    if all(k <= 0 for k in mu.values()):
        raise ValueError("multiplicity vector must be nonzero")
    work = _make_field_algebra(alg, budget.field)
    lat = _build_lattice(work, mu)
    size = graded_lattice_size(lat.layer_dims, budget.field.p)
    verts = [v for v in work.quiver.vertices if lat.layer_dims[v] > 0]
    if size <= budget.max_lattice:
        iters = [enumerate_subspaces(lat.layer_dims[v], budget.field) for v in verts]
        for combo in itertools.product(*iters) if verts else iter([()]):
            choice = dict(zip(verts, combo))
            yield _lattice_point(lat, choice), True
    else:
        if budget.sample_size == 0:
            raise BudgetExceeded(
                f"lattice of size {size} exceeds the cap {budget.max_lattice}")
        rng = _mu_rng(budget.seed, mu)
        for _ in range(budget.sample_size):
            choice = {v: random_subspace(lat.layer_dims[v], budget.field, rng)
                      for v in verts}
            yield _lattice_point(lat, choice), False


def _lattice_point(lat: _Lattice, choice) -> LatticePoint:
    return LatticePoint(lat.mu, choice, lat, _module_spans(lat, choice))


def graded_lattice_size(layer_dims: dict[str, int], q: int) -> int:
    size = 1
    for d in layer_dims.values():
        size *= subspace_count(d, q)
    return size


def _mu_rng(seed: int, mu: dict[str, int]) -> random.Random:
    import hashlib

    key = f"{seed}|{_mu_str(mu)}".encode()
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))


def _make_field_algebra(alg: Algebra, field: ExactField) -> Algebra:
    """The same presented algebra over the requested field."""
    if alg.field.spec == field.spec:
        return alg
    from .algebra import build_algebra

    key = ("field_variant", field.spec)
    hit = alg._proj_cache.get(key)
    if hit is None:
        hit = build_algebra(alg.quiver, alg.relations, field, alg.nilp_bound)
        alg._proj_cache[key] = hit
    return hit


# ---------------------------------------------------------------------------
# observed finitistic dimension
# ---------------------------------------------------------------------------


@dataclass
class FindimObservation:
    n: int
    field: str
    observed: int | None
    attaining: dict | None
    exhaustive: bool
    total_modules: int
    enumerated_mu: int
    sampled_mu: list
    skipped_mu: list
    reduced_mu: list
    unresolved: list
    seed: int

    def to_json(self):
        return {
            "n": self.n,
            "field": self.field,
            "observed": self.observed,
            "attaining": self.attaining,
            "exhaustive": self.exhaustive,
            "total_modules": self.total_modules,
            "enumerated_mu": self.enumerated_mu,
            "sampled_mu": self.sampled_mu,
            "skipped_mu": self.skipped_mu,
            "reduced_mu": self.reduced_mu,
            "unresolved": self.unresolved,
            "seed": self.seed,
        }


def _mu_vectors(alg: Algebra, n: int):
    verts = list(alg.quiver.vertices)
    for combo in itertools.product(range(n + 1), repeat=len(verts)):
        if any(combo):
            yield dict(zip(verts, combo))


def _family_reduction(alg: Algebra, mu: dict[str, int], family) -> tuple[str, int | None] | None:
    """Certified wholesale classification of a whole lattice, when the
    family structure applies.  Returns (reason, finite-contribution bound)
    with bound None meaning every module in the lattice has infinite pdim."""
    if family is None:
        return None
    try:
        top_lvl = max((family.level_of_vertex(v) for v, k in mu.items() if k),
                      default=0)
    except KeyError:
        return None
    if top_lvl == 0:
        base_bound = mono.finite_pdim_bound(family.algebra(0))
        return ("base-level lattice bounded by the monomial interval", base_bound)
    lev = family.levels[top_lvl]
    apex = lev.apex
    loops = [lev.loop_vertex] + (lev.primed_vertices if top_lvl > family.s else [])
    if mu.get(apex, 0) == 0 and any(mu.get(v, 0) for v in loops):
        # no place for an apex top (machine-checked: nothing maps into the apex)
        if not alg.quiver.arrows_into(apex):
            return ("loop tops without an apex top force infinite pdim", None)
    return None


def _resolve_lattice_point(point: LatticePoint, alg: Algebra, budget, family):
    """Projective dimension of P/V via its kernel: pdim = 1 + pdim V when V
    is nonzero, resolved with the certified machinery."""
    if point.kernel_total_dim == 0:
        return rh.PdimResult("finite", 0)
    if family is not None:
        from .families import resolve_pdim

        # V is the first syzygy of the lattice module, a module over the
        # algebra of the multiplicity vector's top level; finite dimension
        # forbids any loop-vertex component there.  Rank data suffices, so
        # this costs nothing.
        lvl = max((family.level_of_vertex(v) for v, k in point.mu.items() if k),
                  default=0)
        if lvl >= 1:
            lev = family.levels[lvl]
            watch = [lev.loop_vertex]
            if family.t > 0 and lvl > family.s:
                watch += lev.primed_vertices
            if any(point.kernel_dim(v) for v in watch):
                return rh.PdimResult(
                    "infinite",
                    reason=f"first syzygy meets a level-{lvl} loop vertex")
        r = resolve_pdim(family, point.kernel)
    elif alg.is_monomial:
        r = mono.monomial_pdim(point.kernel)
    else:
        r = rh.projective_dimension(point.kernel, cutoff=budget.pdim_cutoff)
    if r.kind == "finite":
        return rh.PdimResult("finite", r.value + 1, syzygy_dims=r.syzygy_dims)
    return r


def observed_findim(alg: Algebra, n: int, budget: EnumerationBudget,
                    family=None, progress=None) -> FindimObservation:
    """Max finite projective dimension over the Loewy-length-<=2 class with
    top multiplicities <= n, within the budget.

    Certified wholesale reductions (family lemmas or the base monomial
    bound) may classify an entire lattice; all-infinite lattices never
    affect the result, and bounded lattices only keep the run exhaustive
    when the final observed value dominates their bound."""
    if n < 1:
        raise ValueError("n must be >= 1")
    work = _make_field_algebra(alg, budget.field)
    fam = None
    if family is not None:
        from .families import bundle_over_field

        fam = bundle_over_field(family, budget.field)
    best: int | None = None
    attaining = None
    total = 0
    enumerated = 0
    sampled, skipped, reduced, unresolved = [], [], [], []
    reduced_bounds: list[int] = []
    exhaustive = True
    for mu in _mu_vectors(work, n):
        layer_dims = _layer_dims_for_mu(work, mu)
        dim = sum(layer_dims.values())
        mu_str = _mu_str(mu)
        if budget.max_dim is not None and dim > budget.max_dim:
            skipped.append(mu_str)
            continue
        size = graded_lattice_size(layer_dims, budget.field.p)
        if budget.use_reductions:
            red = _family_reduction(work, mu, fam)
            if red is not None:
                reason, bound = red
                if bound is None:
                    # certified all-infinite: contributes nothing, any size
                    reduced.append({"mu": mu_str, "reason": reason, "bound": None})
                    continue
                if size > budget.max_lattice:
                    # certified bounded: skip the oversized lattice, remember
                    # the bound for the exhaustiveness verdict
                    reduced.append({"mu": mu_str, "reason": reason, "bound": bound})
                    reduced_bounds.append(bound)
                    continue
        if size > budget.max_lattice:
            if budget.sample_size == 0:
                skipped.append(mu_str)
                exhaustive = False
                continue
            sampled.append({"mu": mu_str, "lattice": size})
            exhaustive = False
        else:
            enumerated += 1
        if progress:
            progress(f"mu={mu_str} lattice={min(size, budget.max_lattice)}")
        for point, _exact in enumerate_loewy2(work, mu, budget):
            total += 1
            r = _resolve_lattice_point(point, work, budget, fam)
            if r.kind == "finite":
                if best is None or r.value > best:
                    best = r.value
                    attaining = _describe_point(point, r)
            elif r.kind == "exceeds_cutoff":
                if len(unresolved) < 64:
                    unresolved.append({"mu": mu_str, "cutoff": r.value})
                exhaustive = False
    if reduced_bounds and (best is None or max(reduced_bounds) > best):
        exhaustive = False
    return FindimObservation(
        n=n, field=budget.field.spec.label, observed=best, attaining=attaining,
        exhaustive=exhaustive, total_modules=total, enumerated_mu=enumerated,
        sampled_mu=sampled, skipped_mu=skipped, reduced_mu=reduced,
        unresolved=unresolved, seed=budget.seed)


def _layer_dims_for_mu(alg: Algebra, mu: dict[str, int]) -> dict[str, int]:
    """dim of each vertex component of JP/J^2P without building P: additive
    over the projective layer data of the algebra."""
    per_vertex: dict[str, dict[str, int]] = alg._proj_cache.get("layer_dims")  # type: ignore
    if per_vertex is None:
        per_vertex = {}
        for v in alg.quiver.vertices:
            P = rh.projective_module(alg, v)
            layers = rh.module_layers(P)
            rs = layers.radical_series
            j1 = rs[1] if len(rs) > 1 else {w: 0 for w in alg.quiver.vertices}
            j2 = rs[2] if len(rs) > 2 else {w: 0 for w in alg.quiver.vertices}
            per_vertex[v] = {w: j1.get(w, 0) - j2.get(w, 0) for w in alg.quiver.vertices}
        alg._proj_cache["layer_dims"] = per_vertex
    out = {w: 0 for w in alg.quiver.vertices}
    for v, k in mu.items():
        if k:
            for w, d in per_vertex[v].items():
                out[w] += k * d
    return out


def _mu_str(mu: dict[str, int]) -> str:
    return ",".join(f"{v}:{k}" for v, k in sorted(mu.items()) if k)


def _describe_point(point: LatticePoint, r: rh.PdimResult) -> dict:
    from .fileformats import lattice_point_graph_text

    M = point.module
    return {
        "mu": _mu_str(point.mu),
        "pdim": r.value,
        "dims": {v: d for v, d in M.dims.items() if d},
        "kernel_rows": {
            v: [[str(x) for x in row] for row in rows.tolist()]
            for v, rows in point.choice.items() if getattr(rows, "size", 0)
        },
        "syzygy_dims": list(r.syzygy_dims),
        "graph": lattice_point_graph_text(point),
    }

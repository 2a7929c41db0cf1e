"""Algebra families realizing prescribed n-generated finitistic dimensions.

For an increasing step function with base value r and jumps of sizes s at m
and optionally t at n, builds the tower of algebras level by level (each
level a monomial layer stacked on the previous algebra, glued with the
coefficient-one square identifications), the witness modules whose syzygy
chains realize the jump values, the alternate coarser partition into
monomial layers, and the verification suites for the structural claims.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field as dc_field

from .algebra import Algebra, AlgebraError, Binomial, Monomial, build_algebra
from .fields import ExactField, QQ, make_field
from .quiver import Quiver
from . import monomial as mono
from . import rephom as rh
from . import stacking as st

__all__ = [
    "StepFunction",
    "FamilyLevel",
    "FamilyBundle",
    "generate_family",
    "witness_module",
    "witness_graph_text",
    "x_chain_module",
    "verify_family",
    "FamilyVerification",
    "certified_finite_bound",
]


@dataclass(frozen=True)
class StepFunction:
    """Increasing step function on positive integers with finitely many
    values: value `base` at 1, then jumps (position, size).  At most two
    jumps are supported; the deeper recursion is not implemented."""

    base: int
    jumps: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base value must be >= 2")
        positions = [p for p, _ in self.jumps]
        if any(s < 1 for _, s in self.jumps):
            raise ValueError("jump sizes must be >= 1")
        if any(p < 2 for p in positions):
            raise ValueError("jump positions must be >= 2")
        if sorted(set(positions)) != positions:
            raise ValueError("jump positions must be strictly increasing")
        if len(self.jumps) > 2:
            raise ValueError(
                "at most two jumps are supported; deeper step functions need "
                "the recursive tower construction, which is not implemented")

    @staticmethod
    def parse(spec: str) -> "StepFunction":
        """Parse breakpoints \"1:2,2:3,5:4\" (argument:value pairs)."""
        pts = []
        for tok in spec.split(","):
            k, v = tok.split(":")
            pts.append((int(k), int(v)))
        pts.sort()
        if not pts or pts[0][0] != 1:
            raise ValueError("breakpoints must include the value at 1")
        base = pts[0][1]
        jumps = []
        cur = base
        for k, v in pts[1:]:
            if v < cur:
                raise ValueError("step function must be increasing")
            if v > cur:
                jumps.append((k, v - cur))
                cur = v
        return StepFunction(base, tuple(jumps))

    def value_at(self, k: int) -> int:
        v = self.base
        for pos, size in self.jumps:
            if k >= pos:
                v += size
        return v

    @property
    def total_rise(self) -> int:
        return sum(s for _, s in self.jumps)

    def describe(self) -> dict:
        return {"base": self.base, "jumps": list(self.jumps)}


@dataclass
class FamilyLevel:
    index: int
    algebra: Algebra
    new_vertices: list[str]
    apex: str | None          # the a-vertex introduced at this level
    loop_vertex: str | None   # the b-vertex introduced at this level
    primed_vertices: list[str]
    standard_partition: st.StackingPartition | None


@dataclass
class FamilyBundle:
    step: StepFunction
    field: ExactField
    m: int                      # first jump position
    n: int | None               # second jump position
    r: int
    s: int                      # first jump size (levels 1..s are unprimed)
    t: int                      # second jump size (levels s+1..s+t carry primes)
    levels: list[FamilyLevel]
    alternate_layers: list[frozenset[str]]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def algebra(self, level: int) -> Algebra:
        return self.levels[level].algebra

    def top(self) -> Algebra:
        return self.levels[-1].algebra

    def level_of_vertex(self, v: str) -> int:
        for lev in self.levels:
            if v in lev.new_vertices:
                return lev.index
        raise KeyError(v)

    def support_level(self, M: rh.Representation) -> int:
        """Smallest level whose vertex set supports M."""
        lvl = 0
        for v, d in M.dims.items():
            if d:
                lvl = max(lvl, self.level_of_vertex(v))
        return lvl

    def describe(self) -> dict:
        return {
            "step_function": self.step.describe(),
            "levels": [
                {
                    "index": lev.index,
                    "vertices": list(lev.algebra.quiver.vertices),
                    "new_vertices": lev.new_vertices,
                    "dimension": lev.algebra.dim,
                }
                for lev in self.levels
            ],
            "alternate_layers": [sorted(E) for E in self.alternate_layers],
        }


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def _base_algebra(r: int, m: int, field: ExactField) -> tuple[Algebra, FamilyLevel]:
    verts = [f"c{j}" for j in range(r, 0, -1)] + ["a0", "b-1", "b0"]
    arrows = [(f"gamma{j}", f"c{j}" if j else "a0", f"c{j+1}") for j in range(r)]
    arrows += [(f"alpha0_{i}", "a0", "b-1") for i in range(1, m + 1)]
    arrows += [("eps-1", "b-1", "b-1"), ("eps0", "b0", "b0"), ("beta0", "b0", "b-1")]
    q = Quiver(verts, arrows)
    rels = [Monomial(q.path_from_word(w)) for w in
            ("eps-1*eps-1", "eps0*eps0", "eps-1*beta0", "beta0*eps0")]
    rels += [Monomial(q.path_from_word(f"gamma{j}*gamma{j-1}")) for j in range(1, r)]
    alg = build_algebra(q, rels, field, 3)
    lev = FamilyLevel(0, alg, list(verts), "a0", "b0", [], None)
    return alg, lev


def _apex_arrow_to_previous(level: int) -> str:
    """Arrow name out of the previous apex killed by composition with the
    new apex-to-apex arrow."""
    return "gamma0" if level == 1 else f"alpha{level - 1}_0"


def _stack_unprimed_level(prev: Algebra, level: int, m: int, field) -> Algebra:
    """One ordinary level: apex a_l over (a_{l-1}, b_{l-1}^m) with the square
    identifications, and the loop extension b_l."""
    a, b = f"a{level}", f"b{level}"
    ap, bp = f"a{level - 1}", f"b{level - 1}"
    upper_q = Quiver([a, b], [(f"eps{level}", b, b)])
    upper = build_algebra(upper_q, [Monomial(upper_q.path_from_word(
        f"eps{level}*eps{level}"))], field, 3)
    connecting = [(f"alpha{level}_0", a, ap)]
    connecting += [(f"alpha{level}_{i}", a, bp) for i in range(1, m + 1)]
    connecting += [(f"beta{level}", b, bp)]
    return st.build_2stack(prev, upper, connecting, _DeferredRelations(level, m, primed=False))


class _DeferredRelations:
    """Extra cross-boundary relations for one level, instantiated once the
    glued quiver exists (build_2stack passes them through `terms`)."""

    def __init__(self, level, m, primed, n=0, first_primed_level=None):
        self.level = level
        self.m = m
        self.primed = primed
        self.n = n
        self.first_primed_level = first_primed_level

    def materialize(self, quiver: Quiver):
        lvl, m = self.level, self.m
        prev_apex_arrow = _apex_arrow_to_previous(lvl)
        rels = [Monomial(quiver.path([f"alpha{lvl}_0", prev_apex_arrow]))]
        rels += [Monomial(quiver.path([f"alpha{lvl}_{i}", f"eps{lvl - 1}"]))
                 for i in range(1, m + 1)]
        rels += [Monomial(quiver.path([f"beta{lvl}", f"beta{lvl - 1}"]))]
        prev_mid = "alpha0" if lvl == 1 else f"alpha{lvl - 1}"
        rels += [Binomial(quiver.path([f"alpha{lvl}_0", f"{prev_mid}_{i}"]),
                          quiver.path([f"alpha{lvl}_{i}", f"beta{lvl - 1}"]))
                 for i in range(1, m + 1)]
        return rels


def _stack_first_primed_level(prev: Algebra, level: int, m: int, n: int, field) -> Algebra:
    """The gear-switch level: ordinary apex plus the fresh primed pair
    bp-1, bp0 receiving n new arrows from the apex."""
    a, b = f"a{level}", f"b{level}"
    upper_q = Quiver(
        [a, b, "bp-1", "bp0"],
        [(f"eps{level}", b, b), ("epsp-1", "bp-1", "bp-1"),
         ("epsp0", "bp0", "bp0"), ("betap0", "bp0", "bp-1"),
         *[(f"alphap0_{j}", a, "bp-1") for j in range(1, n + 1)]],
    )
    urels = [Monomial(upper_q.path_from_word(w)) for w in (
        f"eps{level}*eps{level}", "epsp-1*epsp-1", "epsp0*epsp0",
        "epsp-1*betap0", "betap0*epsp0")]
    upper = build_algebra(upper_q, urels, field, 3)
    ap, bp_prev = f"a{level - 1}", f"b{level - 1}"
    connecting = [(f"alpha{level}_0", a, ap)]
    connecting += [(f"alpha{level}_{i}", a, bp_prev) for i in range(1, m + 1)]
    connecting += [(f"beta{level}", b, bp_prev)]
    return st.build_2stack(prev, upper, connecting,
                           _DeferredRelations(level, m, primed=False))


def _stack_primed_level(prev: Algebra, level: int, primed_level: int,
                        m: int, n: int, field) -> Algebra:
    """Levels past the gear switch: apex a_l over both chains, loop
    extensions b_l and bp_{primed_level}."""
    a, b, bpv = f"a{level}", f"b{level}", f"bp{primed_level}"
    upper_q = Quiver([a, b, bpv], [(f"eps{level}", b, b),
                                   (f"epsp{primed_level}", bpv, bpv)])
    urels = [Monomial(upper_q.path_from_word(f"eps{level}*eps{level}")),
             Monomial(upper_q.path_from_word(f"epsp{primed_level}*epsp{primed_level}"))]
    upper = build_algebra(upper_q, urels, field, 3)
    ap, b_prev, bp_prev = f"a{level - 1}", f"b{level - 1}", f"bp{primed_level - 1}"
    connecting = [(f"alpha{level}_0", a, ap)]
    connecting += [(f"alpha{level}_{i}", a, b_prev) for i in range(1, m + 1)]
    connecting += [(f"alphap{primed_level}_{j}", a, bp_prev) for j in range(1, n + 1)]
    connecting += [(f"beta{level}", b, b_prev), (f"betap{primed_level}", bpv, bp_prev)]
    return st.build_2stack(prev, upper,
                           connecting,
                           _DeferredPrimedRelations(level, primed_level, m, n))


class _DeferredPrimedRelations:
    def __init__(self, level, primed_level, m, n):
        self.level = level
        self.primed_level = primed_level
        self.m = m
        self.n = n

    def materialize(self, quiver: Quiver):
        lvl, pl, m, n = self.level, self.primed_level, self.m, self.n
        rels = _DeferredRelations(lvl, m, primed=False).materialize(quiver)
        rels += [Monomial(quiver.path([f"alphap{pl}_{j}", f"epsp{pl - 1}"]))
                 for j in range(1, n + 1)]
        rels += [Monomial(quiver.path([f"betap{pl}", f"betap{pl - 1}"]))]
        rels += [Binomial(quiver.path([f"alpha{lvl}_0", f"alphap{pl - 1}_{j}"]),
                          quiver.path([f"alphap{pl}_{j}", f"betap{pl - 1}"]))
                 for j in range(1, n + 1)]
        return rels


def generate_family(step: StepFunction, field=None) -> FamilyBundle:
    """Build the whole tower for the step function, validate each level
    (radical cube zero, valid standard partition, corner recovery), and
    assemble the alternate monomial layering."""
    field = make_field(field) if field is not None else QQ()
    r = step.base
    if len(step.jumps) == 0:
        m, s, n, t = 2, 0, None, 0
    elif len(step.jumps) == 1:
        (m, s), n, t = step.jumps[0], None, 0
    else:
        (m, s), (n, t) = step.jumps
    alg0, lev0 = _base_algebra(r, m, field)
    levels = [lev0]
    prev = alg0
    for lvl in range(1, s + 1):
        if t > 0 and lvl == s:
            alg = _stack_first_primed_level(prev, lvl, m, n, field)
            new = [f"a{lvl}", f"b{lvl}", "bp-1", "bp0"]
            primed = ["bp-1", "bp0"]
        else:
            alg = _stack_unprimed_level(prev, lvl, m, field)
            new = [f"a{lvl}", f"b{lvl}"]
            primed = []
        part = st.StackingPartition.of(
            [v for v in prev.quiver.vertices], new)
        levels.append(FamilyLevel(lvl, alg, new, f"a{lvl}", f"b{lvl}", primed, part))
        prev = alg
    if t > 0 and s == 0:
        raise AlgebraError("a second jump requires a first jump")
    for pl in range(1, t + 1):
        lvl = s + pl
        alg = _stack_primed_level(prev, lvl, pl, m, n, field)
        new = [f"a{lvl}", f"b{lvl}", f"bp{pl}"]
        part = st.StackingPartition.of([v for v in prev.quiver.vertices], new)
        levels.append(FamilyLevel(lvl, alg, new, f"a{lvl}", f"b{lvl}",
                                  [f"bp{pl}"], part))
        prev = alg
    bundle = FamilyBundle(step, field, m, n, r, s, t, levels,
                          _alternate_layers(levels, s, t))
    _validate_bundle(bundle)
    return bundle


def _alternate_layers(levels, s: int, t: int) -> list[frozenset[str]]:
    """Coarser layering pairing consecutive levels; the first primed pair is
    pushed one layer down when the gear switch happens at an odd level, so
    every layer induces a monomial corner."""
    d = len(levels) - 1
    layer_of_level: dict[int, int] = {0: 0}
    for lvl in range(1, d + 1):
        layer_of_level[lvl] = (lvl + 1) // 2
    out: dict[int, set[str]] = {}
    for lev in levels:
        for v in lev.new_vertices:
            lay = layer_of_level[lev.index]
            if t > 0 and lev.index == s and v in ("bp-1", "bp0") and s % 2 == 1:
                lay = max(lay - 1, 0)
            out.setdefault(lay, set()).add(v)
    return [frozenset(out[k]) for k in sorted(out)]


def _validate_bundle(bundle: FamilyBundle) -> None:
    for lev in bundle.levels:
        alg = lev.algebra
        if len(alg.radical_power(3)) != 0:
            raise AlgebraError(f"level {lev.index}: radical cube does not vanish")
        if lev.standard_partition is not None:
            chk = st.check_partition(alg, lev.standard_partition.lower,
                                     lev.standard_partition.upper)
            if not chk.valid:
                raise AlgebraError(
                    f"level {lev.index}: standard partition invalid: {chk.violations}")
            corner = st.corner_algebra(alg, list(lev.standard_partition.lower))
            if not st.algebras_structurally_equal(
                    corner, bundle.levels[lev.index - 1].algebra):
                raise AlgebraError(
                    f"level {lev.index}: lower corner differs from previous level")
    # alternate layering: cumulative cuts are stacking partitions with
    # monomial layers
    acc: list[str] = []
    top = bundle.top()
    for k, layer in enumerate(bundle.alternate_layers):
        layer_sorted = [v for v in top.quiver.vertices if v in layer]
        corner = st.corner_algebra(top, layer_sorted)
        if not corner.is_monomial:
            raise AlgebraError(f"alternate layer {k} is not monomial")
        if k > 0:
            upto = acc + layer_sorted
            partial = st.corner_algebra(top, upto)
            chk = st.check_partition(partial, acc, layer_sorted)
            if not chk.valid:
                raise AlgebraError(
                    f"alternate cut {k} is not a stacking partition: {chk.violations}")
        acc += layer_sorted


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


def witness_graph_text(bundle: FamilyBundle, level: int) -> str:
    """Layered-graph source for the witness module at a level: one apex top,
    m loop tops sharing the apex's children, plus (past the gear switch)
    n primed loop tops."""
    m, s, t, n = bundle.m, bundle.s, bundle.t, bundle.n
    mid = "alpha0" if level == 0 else f"alpha{level}"
    lines = [f"top x0: a{level}"]
    for i in range(1, m + 1):
        lines.append(f"top x{i}: b{level}")
    for i in range(1, m + 1):
        lines.append(f"edge x0 --{mid}_{i}--> u{i}")
        lines.append(f"edge x{i} --beta{level}--> v{i}")
        lines.append(f"identify u{i} v{i}")
        lines.append(f"edge x{i} --eps{level}--> w{i}")
    if t > 0 and level > s:
        pl = level - s
        for j in range(1, n + 1):
            lines.append(f"top y{j}: bp{pl}")
            lines.append(f"edge x0 --alphap{pl}_{j}--> p{j}")
            lines.append(f"edge y{j} --betap{pl}--> q{j}")
            lines.append(f"identify p{j} q{j}")
            lines.append(f"edge y{j} --epsp{pl}--> z{j}")
    return "\n".join(lines) + "\n"


def witness_module(bundle: FamilyBundle, level: int,
                   over_level: int | None = None) -> rh.Representation:
    """The presented module whose syzygy chain steps down the tower one
    level at a time."""
    if not (0 <= level <= bundle.depth):
        raise ValueError(f"level must be in 0..{bundle.depth}")
    text = witness_graph_text(bundle, level)
    alg = bundle.algebra(level)
    M = rh.parse_layered_graph(text, alg)
    if over_level is not None and over_level != level:
        if over_level < level:
            raise ValueError("witness lives over its own or a higher level")
        M = rh.extend_to_algebra(M, bundle.algebra(over_level))
    return M


def x_chain_module(bundle: FamilyBundle, level: int, j: int,
                   primed: bool = False) -> rh.Representation:
    """The two-dimensional module at the loop vertex of a level whose
    syzygies walk down the loop chain."""
    alg = bundle.algebra(level)
    v = (f"bp{j}" if primed else f"b{j}")
    loop = (f"epsp{j}" if primed else f"eps{j}")
    return rh.nilpotent_loop_module(alg, v, loop)


def certified_finite_bound(bundle: FamilyBundle, level: int) -> int:
    """Certified upper bound for finite projective dimensions over the
    level algebra: the monomial interval at the base, plus one monomial
    layer bound (+1) per stacking step."""
    cache = bundle.__dict__.setdefault("_bound_cache", {})
    if level in cache:
        return cache[level]
    base = mono.finite_pdim_bound(bundle.algebra(0))
    bound = base
    for lev in bundle.levels[1:level + 1]:
        upper = st.corner_algebra(lev.algebra, lev.new_vertices)
        bound += mono.finite_pdim_bound(upper) + 1
        cache[lev.index] = bound
    cache[0] = base
    return cache[level]


def bundle_over_field(bundle: FamilyBundle, field) -> FamilyBundle:
    """The same family rebuilt over another coefficient field (cached)."""
    field = make_field(field)
    if field.spec == bundle.field.spec:
        return bundle
    cache = bundle.__dict__.setdefault("_field_variants", {})
    if field.spec not in cache:
        cache[field.spec] = generate_family(bundle.step, field)
    return cache[field.spec]


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class FamilyVerification:
    passed: bool
    results: dict
    counterexample: dict | None = None

    def to_json(self):
        return {"passed": self.passed, "results": self.results,
                "counterexample": self.counterexample}


def resolve_pdim(bundle: FamilyBundle, M: rh.Representation,
                 level: int | None = None) -> rh.PdimResult:
    """Projective dimension over a bundle algebra, exact for both outcomes.

    The resolution walks syzygies, descending to the lowest supporting
    level corner at every step; at the base the monomial calculus finishes
    exactly.  Infinity is certified two ways: a syzygy retaining the
    current level's loop-vertex top (the vanishing property tested in the
    family suites), or passing the stacked certified bound."""
    steps = 0
    X = M
    total_bound = certified_finite_bound(
        bundle, bundle.support_level(M) if not M.is_zero else 0)
    while True:
        if X.is_zero:
            return rh.PdimResult("finite", max(steps - 1, 0))
        lvl = bundle.support_level(X)
        if X.algebra is not bundle.algebra(lvl):
            X = rh.restrict_to_corner(X, bundle.algebra(lvl))
        if lvl == 0:
            tail = mono.monomial_pdim(X)
            if tail.kind == "finite":
                return rh.PdimResult("finite", steps + tail.value)
            return tail
        _P, cover, _info = rh.projective_cover(X)
        K = rh.kernel_of_map(cover)
        if K.is_zero:
            return rh.PdimResult("finite", steps)
        steps += 1
        lev = bundle.levels[lvl]
        watch = [lev.loop_vertex]
        if bundle.t > 0 and lvl > bundle.s:
            watch += lev.primed_vertices
        if any(K.dims.get(v, 0) for v in watch):
            return rh.PdimResult(
                "infinite",
                reason=f"syzygy keeps a level-{lvl} loop top (finite pdim forbids it)")
        if steps > total_bound:
            return rh.PdimResult(
                "infinite",
                reason=f"resolution passes the certified finite bound {total_bound}")
        X = K


def _sample_presented_module(bundle: FamilyBundle, level: int,
                             rng: random.Random, deep: bool) -> rh.Representation:
    """Random quotient of a random small projective sum by a random
    radical submodule; `deep` allows generators below the first radical
    layer."""
    alg = bundle.algebra(level)
    f = alg.field
    verts = list(alg.quiver.vertices)
    k = rng.randint(1, 3)
    types = [rng.choice(verts) for _ in range(k)]
    P, _info = rh.projective_sum(alg, types)
    rad = rh.radical_spans(P)
    gens = []
    for _ in range(rng.randint(0, 4)):
        v = rng.choice(verts)
        if rad[v].rank == 0:
            continue
        vec = f.zeros_vec(P.dims[v])
        for row in rad[v].matrix():
            if rng.random() < 0.5:
                vec = f.add(vec, f.scale(f.random_scalar(rng), row))
        if not f.is_zero(vec):
            gens.append({v: vec})
    spans = rh.submodule_spans(P, gens)
    M, _ = rh.quotient_by_spans(P, spans, check=False)
    return M


def sample_finite_pdim_modules(bundle: FamilyBundle, level: int, count: int,
                               seed: int, max_tries: int | None = None):
    """Sampled modules over the level algebra with certified finite
    projective dimension, as (module, pdim) pairs."""
    rng = random.Random(seed)
    out = []
    tries = 0
    limit = max_tries or count * 60
    while len(out) < count and tries < limit:
        tries += 1
        M = _sample_presented_module(bundle, level, rng, deep=True)
        if M.is_zero:
            continue
        r = resolve_pdim(bundle, M, level)
        if r.kind == "finite":
            out.append((M, r))
    return out


def _top_multiplicity(M: rh.Representation, v: str) -> int:
    layers = rh.module_layers(M)
    return layers.top.get(v, 0)


def _has_killed_apex_top(M: rh.Representation, apex: str, kill_arrow: str):
    """A top element of apex type annihilated by the apex-to-apex arrow:
    exact rank test on ker(arrow) vs the radical at the apex."""
    alg = M.algebra
    f = alg.field
    if M.dims.get(apex, 0) == 0:
        return False
    ker = f.nullspace(M.maps[kill_arrow])
    rad = rh.radical_spans(M)[apex]
    span = rad.copy()
    for j in range(ker.shape[1]):
        if span.add(ker[:, j]):
            return True
    return False


def verify_family(bundle: FamilyBundle, samples: int = 200, seed: int = 0,
                  oracle_budget=None, progress=None) -> FamilyVerification:
    """Witness-chain checks, the per-level property suites on sampled
    finite-pdim modules, the base-level exact invariants, and (for Part-I
    style bundles) bounded finitistic observations."""
    results: dict = {"witness_chain": [], "suites": {}, "base": {}, "findim": []}

    def note(msg):
        if progress:
            progress(msg)

    # --- base level exact invariants
    alg0 = bundle.algebra(0)
    rep = mono.critical_report(alg0)
    results["base"] = {
        "max_critical_pdim": rep.max_pdim,
        "witness": str(rep.witness),
        "findim_interval": list(mono.findim_interval(alg0)),
        "pdim_apex_simple": str(rh.projective_dimension(
            rh.simple_module(alg0, "a0"))),
    }
    if rep.max_pdim != bundle.r - 2:
        return FamilyVerification(False, results, {"check": "base_invariant"})

    # --- witness chain
    for lvl in range(bundle.depth, 0, -1):
        note(f"witness chain at level {lvl}")
        N = witness_module(bundle, lvl)
        seam = bundle.t > 0 and lvl == bundle.s + 1
        if bundle.t > 0 and lvl == bundle.s:
            # gear-switch level: the syzygy drops a level and sheds n
            # projectives on the fresh primed socle vertex
            omega = rh.syzygy(N, 1)
            expected = rh.direct_sum(
                witness_module(bundle, lvl - 1, over_level=lvl),
                *[rh.projective_module(bundle.algebra(lvl), "bp-1")
                  for _ in range(bundle.n)])
            iso = rh.is_isomorphic(omega, expected)
            desc = "syzygy = previous witness + primed projectives"
        elif seam:
            # one past the gear switch: the second syzygy matches the first
            # syzygy of the gear-level witness
            omega = rh.syzygy(N, 2)
            prev = witness_module(bundle, lvl - 1, over_level=lvl)
            expected = rh.syzygy(prev, 1)
            iso = rh.is_isomorphic(omega, expected)
            desc = "second syzygy = syzygy of previous witness"
        else:
            omega = rh.syzygy(N, 1)
            expected = witness_module(bundle, lvl - 1, over_level=lvl)
            iso = rh.is_isomorphic(omega, expected)
            desc = "syzygy = previous witness"
        pd = resolve_pdim(bundle, N, lvl)
        want = bundle.r + lvl
        entry = {"level": lvl, "relation": desc, "syzygy_matches": iso.verdict,
                 "pdim": str(pd), "expected_pdim": want}
        results["witness_chain"].append(entry)
        if iso.verdict != "yes" or pd.kind != "finite" or pd.value != want:
            return FamilyVerification(False, results, {"check": "witness_chain", **entry})
    N0 = witness_module(bundle, 0)
    pd0 = resolve_pdim(bundle, N0, 0)
    results["witness_chain"].append({"level": 0, "pdim": str(pd0),
                                     "expected_pdim": bundle.r})
    if pd0.kind != "finite" or pd0.value != bundle.r:
        return FamilyVerification(False, results, {"check": "witness_chain", "level": 0})

    # --- property suites
    suites, counter = run_property_suites(bundle, samples, seed, progress=progress)
    results["suites"] = suites
    if counter is not None:
        return FamilyVerification(False, results, counter)

    # --- bounded finitistic observations (small budgets)
    if oracle_budget is not None:
        from . import oracle as orc

        for nval in (1, bundle.m):
            obs = orc.observed_findim(bundle.top(), nval, oracle_budget,
                                      family=bundle)
            results["findim"].append({"n": nval, "observed": obs.observed,
                                      "exhaustive": obs.exhaustive})
    return FamilyVerification(True, results)


def run_property_suites(bundle: FamilyBundle, samples: int, seed: int,
                        progress=None):
    """The structural module properties behind the jump bookkeeping, run on
    sampled finite-pdim modules per level.  Returns (summary, counterexample
    or None).  A module violating an implication must exhibit an explicit
    decomposition or hypothesis failure; otherwise it is dumped."""
    summary: dict = {}
    rng = random.Random(seed ^ 0x5F5E5F)
    for lvl in range(1, bundle.depth + 1):
        if progress:
            progress(f"suite sampling at level {lvl} ({samples} modules)")
        pool = sample_finite_pdim_modules(bundle, lvl, samples, seed + lvl)
        lev = bundle.levels[lvl]
        apex, loop_v = lev.apex, lev.loop_vertex
        primed = lev.primed_vertices
        stats = {"finite_sampled": len(pool), "syzygy_top_vanishing": 0,
                 "forced_top_multiplicity": 0, "loewy2_infinite": 0,
                 "syzygy_hits_lower_apex": 0, "top_multiplicity_floor": 0}

        vanish = [loop_v]
        if bundle.t > 0 and lvl > bundle.s:
            vanish += primed  # the primed loop vertex of this level
        for M, pd in pool:
            omega = rh.syzygy(M, 1)
            # finite pdim forces the loop-vertex tops (and the primed loop
            # vertex past the gear switch) out of the first syzygy
            bad = [v for v in vanish if omega.dims.get(v, 0)]
            if bad:
                return summary, _dump_counterexample(
                    bundle, lvl, M, "syzygy_top_vanishing",
                    f"first syzygy meets {bad} despite finite pdim {pd.value}")
            stats["syzygy_top_vanishing"] += 1

            # killed apex top forces m-fold loop-top multiplicity
            kill = f"alpha{lvl}_0"
            if _has_killed_apex_top(M, apex, kill):
                need = [(loop_v, bundle.m)]
                if bundle.t > 0 and lvl > bundle.s:
                    need.append((f"bp{lvl - bundle.s}", bundle.n))
                for v, mult in need:
                    if _top_multiplicity(M, v) < mult:
                        return summary, _dump_counterexample(
                            bundle, lvl, M, "forced_top_multiplicity",
                            f"killed apex top but top multiplicity at {v} < {mult}")
                stats["forced_top_multiplicity"] += 1

        # Loewy-length-2 no-apex modules with loop support have infinite pdim
        alg = bundle.algebra(lvl)
        inf_checked = 0
        for _ in range(max(8, samples // 8)):
            M = _sample_loewy2_no_apex(bundle, lvl, rng)
            if M is None:
                continue
            r = resolve_pdim(bundle, M, lvl)
            if r.kind == "finite":
                return summary, _dump_counterexample(
                    bundle, lvl, M, "loewy2_infinite",
                    f"no-apex Loewy-2 module resolved finite ({r.value})")
            inf_checked += 1
        stats["loewy2_infinite"] = inf_checked

        # the loop chain: syzygies of the chain module walk down to the
        # base loop simple
        for primed_flag in ([False] if bundle.t == 0 or lvl <= bundle.s else [False, True]):
            j = lvl - 1 if not primed_flag else (lvl - bundle.s - 1)
            if j < 0 or (primed_flag and j < 0):
                continue
            try:
                X = x_chain_module(bundle, lvl, j, primed=primed_flag)
            except Exception:
                continue
            steps = j + 1
            omega = rh.syzygy(X, steps)
            target = rh.simple_module(
                bundle.algebra(lvl), "bp-1" if primed_flag else "b-1")
            iso = rh.is_isomorphic(omega, target)
            if iso.verdict != "yes":
                return summary, _dump_counterexample(
                    bundle, lvl, X, "loop_chain",
                    f"chain syzygy {steps} is not the base loop simple")

        # indecomposable-style implications, decomposition certificates allowed
        if lvl >= 2:
            checked = 0
            for M, pd in pool:
                if not (M.vertex_nonzero(apex) or M.vertex_nonzero(loop_v)):
                    continue
                omega = rh.syzygy(M, 1)
                prev_apex = f"a{lvl - 1}"
                if omega.dims.get(prev_apex, 0) == 0 or \
                        _top_multiplicity(M, loop_v) < bundle.m:
                    split = rh.try_split_indecomposable(M, rng)
                    if split is None and not _is_projective(M):
                        which = ("syzygy_hits_lower_apex"
                                 if omega.dims.get(prev_apex, 0) == 0
                                 else "top_multiplicity_floor")
                        return summary, _dump_counterexample(
                            bundle, lvl, M, which,
                            "indecomposable finite-pdim module violates the implication")
                else:
                    checked += 1
            stats["syzygy_hits_lower_apex"] = checked
            stats["top_multiplicity_floor"] = checked
        summary[f"level_{lvl}"] = stats
    return summary, None


def _is_projective(M: rh.Representation) -> bool:
    if M.is_zero:
        return True
    _P, cover, _ = rh.projective_cover(M)
    return rh.kernel_of_map(cover).is_zero


def _sample_loewy2_no_apex(bundle: FamilyBundle, lvl: int, rng: random.Random):
    """Random Loewy-length-<=2 module with loop-vertex top but no apex
    support at the given level."""
    alg = bundle.algebra(lvl)
    lev = bundle.levels[lvl]
    f = alg.field
    choices = [lev.loop_vertex] + lev.primed_vertices
    types = [rng.choice(choices)]
    for v in alg.quiver.vertices:
        if v != lev.apex and rng.random() < 0.25:
            types.append(v)
    if lev.apex in types:
        return None
    P, _info = rh.projective_sum(alg, types)
    if P.dims.get(lev.apex, 0):
        return None
    rad = rh.radical_spans(P)
    rad2 = {v: rh.EchelonSpan(f, P.dims[v]) for v in alg.quiver.vertices}
    for a in alg.quiver.arrows:
        for row in rad[a.source].rows:
            rad2[a.target].add(f.matvec(P.maps[a.name], row))
    spans = {}
    for v in alg.quiver.vertices:
        span = rad2[v].copy()
        for row in rad[v].rows:
            if rng.random() < 0.4:
                span.add(row)
        spans[v] = span
    M, _ = rh.quotient_by_spans(P, spans, check=False)
    lev_loop_tops = any(M.dims.get(v, 0) for v in choices)
    if not lev_loop_tops or rh.module_layers(M).loewy_length > 2:
        return None
    return M


def _dump_counterexample(bundle: FamilyBundle, lvl: int, M: rh.Representation,
                         check: str, message: str) -> dict:
    return {
        "check": check,
        "level": lvl,
        "message": message,
        "dims": {v: d for v, d in M.dims.items() if d},
        "maps": {a: [[str(x) for x in row] for row in M.maps[a].tolist()]
                 for a in M.maps if M.maps[a].size},
    }

"""The verification suite behind `stackhom verify-all` and the acceptance
tests: each criterion is a function returning a structured outcome, so the
CLI and pytest share one implementation.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass

from . import families as fam
from . import monomial as mono
from . import oracle as orc
from . import rephom as rh
from . import stacking as st
from .algebra import Monomial, build_algebra, rad_square_zero_relations
from .fields import GF, QQ
from .quiver import Quiver

__all__ = ["Outcome", "run_all", "CRITERIA"]


@dataclass
class Outcome:
    name: str
    passed: bool
    detail: str
    seconds: float


def _wrap(name, fn, *args, **kwargs) -> Outcome:
    t0 = time.perf_counter()
    try:
        ok, detail = fn(*args, **kwargs)
    except Exception as exc:  # a crash is a failure with the exception recorded
        import traceback

        return Outcome(name, False, f"exception: {exc!r}\n{traceback.format_exc()}",
                       time.perf_counter() - t0)
    return Outcome(name, ok, detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# shared constructions
# ---------------------------------------------------------------------------


def _base(r: int, m: int, field=None):
    """The bottom algebra of every family: the gamma chain, the m parallel
    arrows into the looped socle vertex, and the two-vertex loop tail."""
    verts = [f"c{j}" for j in range(r, 0, -1)] + ["a0", "b-1", "b0"]
    arrows = [(f"gamma{j}", f"c{j}" if j else "a0", f"c{j+1}") for j in range(r)]
    arrows += [(f"alpha0_{i}", "a0", "b-1") for i in range(1, m + 1)]
    arrows += [("eps-1", "b-1", "b-1"), ("eps0", "b0", "b0"), ("beta0", "b0", "b-1")]
    q = Quiver(verts, arrows)
    rels = [Monomial(q.path_from_word(w)) for w in
            ("eps-1*eps-1", "eps0*eps0", "eps-1*beta0", "beta0*eps0")]
    rels += [Monomial(q.path_from_word(f"gamma{j}*gamma{j-1}")) for j in range(1, r)]
    return build_algebra(q, rels, field or QQ(), 3)


def five_vertex_example(field=None):
    """The radical-square-zero algebra on five vertices whose upper corner
    has global dimension three while the whole algebra has finitistic
    dimension zero."""
    arrows = [("a12", "1", "2"), ("a15", "1", "5"), ("a23", "2", "3"),
              ("a25", "2", "5"), ("a34", "3", "4"), ("a35", "3", "5"),
              ("a45", "4", "5"), ("loop5", "5", "5")]
    q = Quiver(["1", "2", "3", "4", "5"], arrows)
    return build_algebra(q, rad_square_zero_relations(q), field or QQ(), 3)


def linear_five_example(field=None):
    """The linear five-vertex quiver with radical square zero."""
    q = Quiver(["1", "2", "3", "4", "5"],
               [(f"a{i}{i+1}", str(i), str(i + 1)) for i in range(1, 5)])
    return build_algebra(q, rad_square_zero_relations(q), field or QQ(), 3)


def corner_without_socle_vertex(r: int, m: int, field=None):
    """The big corner of the level-1 algebra at everything except the looped
    socle vertex; monomial, with the gamma arrow realizing the critical
    bound."""
    bundle = fam.generate_family(fam.StepFunction(r, ((m, 1),)), field or QQ())
    alg1 = bundle.algebra(1)
    keep = [v for v in alg1.quiver.vertices if v != "b-1"]
    return st.corner_algebra(alg1, keep)


# ---------------------------------------------------------------------------
# criterion 1: monomial invariants
# ---------------------------------------------------------------------------


def criterion_monomial_invariants(fast=False):
    fails = []
    for (r, m) in ((2, 2), (3, 2), (4, 3)):
        t0 = time.perf_counter()
        alg = _base(r, m)
        rep = mono.critical_report(alg)
        iv = mono.findim_interval(alg)
        checks = [
            ("critical bound", rep.max_pdim, r - 2),
            ("interval lo", iv[0], r - 1),
            ("interval hi", iv[1], r),
        ]
        pa = rh.projective_dimension(rh.simple_module(alg, "a0"))
        checks.append(("pdim simple at a0", str(pa), f"Finite({r})"))
        pg = mono.pdim_path_module(alg, "gamma1")
        checks.append(("pdim gamma1 ideal", str(pg), f"Finite({r-2})"))
        pb = rh.projective_dimension(rh.simple_module(alg, "b-1"))
        checks.append(("socle loop simple infinite", pb.kind, "infinite"))
        dt = time.perf_counter() - t0
        for name, got, want in checks:
            if got != want:
                fails.append(f"(r={r},m={m}) {name}: got {got}, want {want}")
        if dt > 1.0:
            fails.append(f"(r={r},m={m}) took {dt:.2f}s > 1s")
    return not fails, "; ".join(fails) or "all exact invariants match"


# ---------------------------------------------------------------------------
# criterion 2: first-syzygy decomposition with witnesses
# ---------------------------------------------------------------------------


def _enumerated_submodules(alg, rng, want: int):
    """Submodules of projective sums, generated by random radical elements
    (plus whole projectives for the vacuous case)."""
    f = alg.field
    out = []
    verts = list(alg.quiver.vertices)
    seen = set()
    tries = 0
    while len(out) < want and tries < want * 40:
        tries += 1
        types = [rng.choice(verts) for _ in range(rng.randint(1, 2))]
        P, _ = rh.cached_projective_sum(alg, tuple(types))
        rad = rh.radical_spans(P)
        gens = []
        for _ in range(rng.randint(1, 2)):
            v = rng.choice(verts)
            if rad[v].rank == 0:
                continue
            vec = f.zeros_vec(P.dims[v])
            for row in rad[v].matrix():
                if rng.random() < 0.6:
                    vec = f.add(vec, f.scale(f.random_scalar(rng), row))
            if not f.is_zero(vec):
                gens.append({v: vec})
        if not gens:
            continue
        spans = rh.submodule_spans(P, gens)
        M = rh.subrep_from_spans(P, spans, check=False)
        if M.is_zero:
            continue
        key = (tuple(types), M.dim_vector(),
               tuple(tuple(spans[v].pivots) for v in verts))
        if key in seen:
            continue
        seen.add(key)
        out.append(M)
    return out


def criterion_first_syzygy(fast=False):
    want = 25 if fast else 50
    total = 0
    failures = []
    rng = random.Random(20240)
    for maker in (lambda: _base(2, 2), lambda: _base(3, 2),
                  lambda: corner_without_socle_vertex(2, 2),
                  lambda: corner_without_socle_vertex(3, 2)):
        alg = maker()
        mods = _enumerated_submodules(alg, rng, want // 2 + 4)
        for M in mods:
            rep = mono.first_syzygy_report(alg, M, embedded=True)
            total += 1
            if not rep.passed:
                failures.append("; ".join(rep.failures))
            if total >= 2 * want:
                break
    ok = total >= want and not failures
    return ok, (f"{total} submodules checked, zero failures" if ok else
                f"{len(failures)} failures: {failures[:3]}")


# ---------------------------------------------------------------------------
# criterion 3: corner examples
# ---------------------------------------------------------------------------


def criterion_corner_examples(fast=False):
    fails = []
    t0 = time.perf_counter()
    alg = five_vertex_example()
    chk = st.check_partition(alg, ["5"], ["1", "2", "3", "4"])
    if not chk.valid:
        fails.append(f"five-vertex partition invalid: {chk.violations}")
    upper = st.corner_algebra(alg, ["1", "2", "3", "4"])
    g = mono.global_dimension(upper)
    if str(g) != "Finite(3)":
        fails.append(f"upper corner gl dim: {g}, want 3")
    if mono.radical_square_zero_findim(alg) != 0:
        fails.append("finitistic dimension of the five-vertex algebra not certified 0")
    budget = orc.EnumerationBudget(field=GF(2), max_lattice=20_000,
                                   sample_size=0, seed=7)
    obs = orc.observed_findim(alg, 1, budget)
    if not (obs.exhaustive and obs.observed == 0):
        fails.append(f"five-vertex oracle n=1: observed {obs.observed}, "
                     f"exhaustive {obs.exhaustive}")

    lin = linear_five_example()
    lower = st.corner_algebra(lin, ["4", "5"])
    upper2 = st.corner_algebra(lin, ["1", "2", "3"])
    gl_lo = mono.global_dimension(lower)
    gl_up = mono.global_dimension(upper2)
    gl_all = mono.global_dimension(lin)
    if (str(gl_lo), str(gl_up), str(gl_all)) != ("Finite(1)", "Finite(2)", "Finite(4)"):
        fails.append(f"linear example gl dims: {gl_lo}, {gl_up}, {gl_all}")
    inv = st.stack_invariants(lin, st.StackingPartition.of(["4", "5"], ["1", "2", "3"]))
    if inv.findim_bounds is None or not (
            inv.findim_bounds[0] <= 4 <= inv.findim_bounds[1] == 4):
        fails.append(f"interval {inv.findim_bounds} does not pin the upper bound 4")
    dt = time.perf_counter() - t0
    if dt > 5.0:
        fails.append(f"corner examples took {dt:.1f}s > 5s")
    return not fails, "; ".join(fails) or \
        "both corner examples verified (gl dims, partitions, findim 0 certified + exhaustive)"


# ---------------------------------------------------------------------------
# criterion 4: witness chains
# ---------------------------------------------------------------------------


def criterion_witness_chains(fast=False):
    fails = []
    t0 = time.perf_counter()
    b1 = fam.generate_family(fam.StepFunction(2, ((2, 2),)))
    for lvl in (1, 2):
        N = fam.witness_module(b1, lvl)
        omega = rh.syzygy(N, 1)
        prev = fam.witness_module(b1, lvl - 1, over_level=lvl)
        iso = rh.is_isomorphic(omega, prev)
        if iso.verdict != "yes":
            fails.append(f"two-jump-free level {lvl}: syzygy iso {iso.verdict}")
        pd = fam.resolve_pdim(b1, N, lvl)
        if str(pd) != f"Finite({2 + lvl})":
            fails.append(f"level {lvl} witness pdim {pd}, want {2 + lvl}")
        lev = b1.levels[lvl]
        split = st.verify_splitting(
            b1.algebra(lvl), lev.standard_partition, N, depth=2)
        if not split.passed:
            fails.append(f"level {lvl} splitting: {split.failures}")

    b2 = fam.generate_family(fam.StepFunction(2, ((2, 1), (3, 1))))
    N1 = fam.witness_module(b2, 1)
    omega = rh.syzygy(N1, 1)
    expected = rh.direct_sum(
        fam.witness_module(b2, 0, over_level=1),
        *[rh.projective_module(b2.algebra(1), "bp-1") for _ in range(3)])
    iso = rh.is_isomorphic(omega, expected)
    if iso.verdict != "yes":
        fails.append(f"gear-level witness syzygy iso {iso.verdict}")
    N2 = fam.witness_module(b2, 2)
    pd = fam.resolve_pdim(b2, N2, 2)
    if str(pd) != "Finite(4)":
        fails.append(f"top witness pdim {pd}, want 4")
    dt = time.perf_counter() - t0
    if dt > 30:
        fails.append(f"witness chains took {dt:.1f}s > 30s")
    return not fails, "; ".join(fails) or \
        "witness syzygy chains, dimensions, and second-syzygy splittings verified"


# ---------------------------------------------------------------------------
# criterion 5: jump certification
# ---------------------------------------------------------------------------


def criterion_jump_certification(fast=False):
    fails = []
    bundle = fam.generate_family(fam.StepFunction(2, ((2, 1),)))
    budget = orc.EnumerationBudget(field=GF(2), max_lattice=100_000,
                                   sample_size=0, seed=7, max_dim=12)
    obs1 = orc.observed_findim(bundle.top(), 1, budget, family=bundle)
    if obs1.observed != 2:
        fails.append(f"multiplicity-1 observed {obs1.observed}, want 2")
    if not obs1.exhaustive:
        fails.append("multiplicity-1 run not exhaustive within the dim cap")
    obs2 = orc.observed_findim(bundle.top(), 2, budget, family=bundle)
    if obs2.observed != 3:
        fails.append(f"multiplicity-2 observed {obs2.observed}, want 3")
    if obs2.observed is not None and obs1.observed is not None \
            and obs2.observed < obs1.observed:
        fails.append("observation not monotone in the multiplicity bound")
    detail = (f"n=1: {obs1.observed} over {obs1.total_modules} modules; "
              f"n=2: {obs2.observed} over {obs2.total_modules} modules "
              f"({len(obs2.reduced_mu)} lattices certified wholesale, "
              f"{len(obs2.skipped_mu)} beyond the dim cap)")
    return not fails, "; ".join(fails) or detail


# ---------------------------------------------------------------------------
# criterion 6: family property suites
# ---------------------------------------------------------------------------


def criterion_family_suites(fast=False):
    samples = 60 if fast else 200
    fails = []
    details = []
    for jumps in (((2, 2),), ((2, 1), (3, 1))):
        bundle = fam.generate_family(fam.StepFunction(2, jumps))
        summary, counter = fam.run_property_suites(bundle, samples, seed=11)
        if counter is not None:
            fails.append(f"jumps {jumps}: counterexample {counter['check']} "
                         f"at level {counter['level']}: {counter['message']}")
        else:
            per = {k: v["finite_sampled"] for k, v in summary.items()}
            details.append(f"jumps {jumps}: finite samples {per}")
    return not fails, "; ".join(fails) or "; ".join(details)


# ---------------------------------------------------------------------------
# criterion 7: stacking structure
# ---------------------------------------------------------------------------


def criterion_stack_structure(fast=False):
    fails = []
    for jumps in (((2, 2),), ((2, 1), (3, 1)), ()):
        step = fam.StepFunction(2, jumps)
        try:
            bundle = fam.generate_family(step)  # construction self-validates
        except Exception as exc:
            fails.append(f"jumps {jumps}: {exc}")
            continue
        d = bundle.depth
        want_layers = -(-max(d, 0) // 2) + 1
        if len(bundle.alternate_layers) != want_layers:
            fails.append(f"jumps {jumps}: {len(bundle.alternate_layers)} "
                         f"alternate layers, want {want_layers}")
        for k, layer in enumerate(bundle.alternate_layers):
            corner = st.corner_algebra(bundle.top(), sorted(layer))
            if not corner.is_monomial:
                fails.append(f"jumps {jumps}: alternate layer {k} not monomial")
    return not fails, "; ".join(fails) or \
        "all levels validated: radical cube zero, partitions, corner recovery, monomial layers"


# ---------------------------------------------------------------------------
# criterion 8: the two pdim routes agree
# ---------------------------------------------------------------------------


def _random_monomial_algebra(rng: random.Random):
    nv = rng.randint(3, 5)
    verts = [f"v{i}" for i in range(nv)]
    arrows = []
    for k in range(rng.randint(nv - 1, nv + 3)):
        a, b = rng.randrange(nv), rng.randrange(nv)
        arrows.append((f"e{k}", verts[a], verts[b]))
    q = Quiver(verts, arrows)
    from .quiver import enumerate_paths

    L = rng.choice((2, 3))
    paths = [p for p in enumerate_paths(q, L, cap=4000) if p.length >= 2]
    if len(paths) > 120:
        return None
    rels = []
    for p in paths:
        if p.length == L or (p.length >= 2 and rng.random() < 0.4):
            rels.append(Monomial(p))
    if not rels:
        return None
    try:
        return build_algebra(q, rels, QQ(), L)
    except Exception:
        return None


def _check_pdim_routes(alg, mismatches) -> int:
    bound = mono.finite_pdim_bound(alg)
    n = 0
    for p in alg.basis:
        if p.length == 0:
            continue
        n += 1
        a = mono.pdim_path_module(alg, p)
        b = rh.projective_dimension(rh.path_ideal_module(alg, p),
                                    cutoff=bound + 1, finite_bound=bound,
                                    detect_cycles=False)
        if (a.kind, a.value if a.kind == "finite" else None) != \
                (b.kind, b.value if b.kind == "finite" else None):
            mismatches.append(f"path {p}: {a} vs {b}")
    return n


def criterion_pdim_equivalence(fast=False):
    target = 200 if fast else 500
    count = 0
    mismatches: list[str] = []
    corpus = [_base(2, 2), _base(3, 2), _base(4, 3),
              corner_without_socle_vertex(2, 2), five_vertex_example(),
              linear_five_example()]
    for alg in corpus:
        if alg.is_monomial:
            count += _check_pdim_routes(alg, mismatches)
    rng = random.Random(97)
    tries = 0
    while count < target and tries < 4000:
        tries += 1
        extra = _random_monomial_algebra(rng)
        if extra is not None:
            count += _check_pdim_routes(extra, mismatches)
    ok = not mismatches and count >= target
    return ok, (f"{count} path ideals agree across both routes" if ok else
                f"count={count}, {len(mismatches)} mismatches: {mismatches[:3]}")


CRITERIA = [
    ("1-monomial-invariants", criterion_monomial_invariants),
    ("2-first-syzygy-structure", criterion_first_syzygy),
    ("3-corner-examples", criterion_corner_examples),
    ("4-witness-chains", criterion_witness_chains),
    ("5-jump-certification", criterion_jump_certification),
    ("6-family-property-suites", criterion_family_suites),
    ("7-stack-structure", criterion_stack_structure),
    ("8-pdim-equivalence", criterion_pdim_equivalence),
]


def run_all(fast: bool = False, progress=None) -> list[Outcome]:
    outcomes = []
    for name, fn in CRITERIA:
        if progress:
            progress(f"running {name} ...")
        out = _wrap(name, fn, fast)
        if progress:
            progress(f"  {'PASS' if out.passed else 'FAIL'} "
                     f"[{out.seconds:.1f}s] {out.detail[:160]}")
        outcomes.append(out)
    return outcomes

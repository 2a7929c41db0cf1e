"""Finite-dimensional path algebras modulo length-homogeneous relations.

Only length-homogeneous relations are supported: single paths (monomial)
and differences p - q of parallel equal-length paths with coefficient 1.
The basis then splits by path length and is computed degree by degree as
the quotient of the path span by the relation span, with all paths of
length >= nilp_bound forced to zero (after checking that this already
follows from the given relations).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ExactField, make_field, QQ
from .quiver import Path, Quiver, compose_paths, enumerate_paths

__all__ = [
    "Monomial",
    "Binomial",
    "Relation",
    "Algebra",
    "AlgebraError",
    "build_algebra",
    "multiply",
    "radical_power",
    "rad_square_zero_relations",
]


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Monomial:
    path: Path

    def terms(self):
        return [(self.path, 1)]

    def __str__(self):
        return str(self.path)


@dataclass(frozen=True)
class Binomial:
    """The relation left - right (coefficient 1 on both paths)."""

    left: Path
    right: Path

    def terms(self):
        return [(self.left, 1), (self.right, -1)]

    def __str__(self):
        return f"{self.left} - {self.right}"


Relation = Monomial | Binomial


def _path_key(p: Path):
    return (p.source, p.arrows)


class Algebra:
    """K-quiver algebra with a path basis, multiplication table, and
    radical filtration.  Immutable after construction."""

    def __init__(self, quiver: Quiver, field: ExactField, nilp_bound: int,
                 relations: tuple[Relation, ...], basis: list[Path],
                 reduce_map: dict, is_monomial: bool):
        self.quiver = quiver
        self.field = field
        self.nilp_bound = nilp_bound
        self.relations = relations
        self.basis = basis
        self.is_monomial = is_monomial
        self._reduce = reduce_map  # path key -> tuple[(basis index, coeff)]
        self.basis_index = {_path_key(p): i for i, p in enumerate(basis)}
        self.degrees = [p.length for p in basis]
        self.dim = len(basis)
        self.vertex_unit = {
            p.source: i for i, p in enumerate(basis) if p.is_trivial
        }
        self._paths_from = {v: [] for v in quiver.vertices}
        for i, p in enumerate(basis):
            self._paths_from[p.source].append(i)
        self._table: dict[tuple[int, int], tuple[tuple[int, object], ...]] = {}
        self._proj_cache: dict[str, object] = {}
        self._annihilator_graph = None  # cached by stackhom.monomial

    # -- basic structure -------------------------------------------------------

    def basis_paths_from(self, v: str) -> list[int]:
        """Indices of basis paths with source v (the path basis of the
        projective at v)."""
        return self._paths_from[v]

    def path_class(self, p: Path) -> dict[int, object]:
        """Normal form of a quiver path as {basis index: coefficient}."""
        self.quiver.validate_path(p)
        if p.length >= self.nilp_bound:
            return {}
        red = self._reduce.get(_path_key(p))
        if red is None:
            raise AlgebraError(f"path {p} not defined over this quiver")
        return {i: c for i, c in red}

    def is_zero_path(self, p: Path) -> bool:
        return not self.path_class(p)

    def product_indices(self, i: int, j: int) -> tuple[tuple[int, object], ...]:
        """Normal form of basis[i] * basis[j] (basis[j] traversed first)."""
        key = (i, j)
        hit = self._table.get(key)
        if hit is not None:
            return hit
        raw = compose_paths(self.basis[i], self.basis[j])
        if raw is None or raw.length >= self.nilp_bound:
            val: tuple[tuple[int, object], ...] = ()
        else:
            val = self._reduce[_path_key(raw)]
        self._table[key] = val
        return val

    def multiply_elements(self, x: dict[int, object], y: dict[int, object]) -> dict[int, object]:
        f = self.field
        out: dict[int, object] = {}
        for i, ci in x.items():
            for j, cj in y.items():
                c = f.coerce(ci) * f.coerce(cj)
                if c == 0:
                    continue
                for k, ck in self.product_indices(i, j):
                    v = f.coerce(out.get(k, 0)) + c * f.coerce(ck)
                    if v == 0:
                        out.pop(k, None)
                    else:
                        out[k] = v
        return out

    def unit(self) -> dict[int, object]:
        return {i: self.field.one for i in self.vertex_unit.values()}

    def radical_power(self, k: int) -> frozenset[int]:
        """Basis index set of J^k (k = 0 gives the whole algebra)."""
        if k < 0:
            raise ValueError("k must be >= 0")
        return frozenset(i for i, d in enumerate(self.degrees) if d >= k)

    def element_str(self, x: dict[int, object]) -> str:
        if not x:
            return "0"
        parts = []
        for i in sorted(x):
            c = x[i]
            parts.append(f"{c}*{self.basis[i]}" if c != 1 else str(self.basis[i]))
        return " + ".join(parts)

    def describe(self) -> dict:
        return {
            "field": self.field.spec.label,
            "vertices": list(self.quiver.vertices),
            "arrows": [[a.name, a.source, a.target] for a in self.quiver.arrows],
            "dimension": self.dim,
            "is_monomial": self.is_monomial,
            "nilpotency_bound": self.nilp_bound,
            "radical_layer_dims": [
                len(self.radical_power(k)) - len(self.radical_power(k + 1))
                for k in range(self.nilp_bound)
            ],
            "basis": [str(p) for p in self.basis],
            "relations": [str(r) for r in self.relations],
        }


def _relation_vectors(relations) -> list[tuple[int, str, str, list[tuple[Path, object]]]]:
    """Normalize relations to (degree, source, target, [(path, coeff)])."""
    out = []
    for rel in relations:
        terms = rel.terms()
        p0 = terms[0][0]
        out.append((p0.length, p0.source, p0.target, terms))
    return out


def build_algebra(quiver: Quiver, relations, field=None, nilp_bound: int = 3) -> Algebra:
    """Build K(quiver)/I for I generated by the given relations, with paths of
    length >= nilp_bound required to vanish modulo I."""
    field = make_field(field) if field is not None else QQ()
    relations = tuple(relations)
    if nilp_bound < 2:
        raise AlgebraError("nilp_bound must be >= 2")
    for rel in relations:
        if isinstance(rel, Monomial):
            quiver.validate_path(rel.path)
            if rel.path.length < 2:
                raise AlgebraError(f"relation {rel} has length < 2 (not admissible)")
        elif isinstance(rel, Binomial):
            quiver.validate_path(rel.left)
            quiver.validate_path(rel.right)
            if rel.left.length < 2:
                raise AlgebraError(f"relation {rel} has length < 2 (not admissible)")
            if rel.left.length != rel.right.length:
                raise AlgebraError(f"binomial {rel} mixes lengths")
            if (rel.left.source, rel.left.target) != (rel.right.source, rel.right.target):
                raise AlgebraError(f"binomial {rel} is not parallel")
        else:
            raise AlgebraError(f"unknown relation {rel!r}")
    rel_vecs = _relation_vectors(relations)
    return _build(quiver, rel_vecs, field, nilp_bound, relations)


def _build(quiver: Quiver, rel_vecs, field: ExactField, nilp_bound: int,
           relations: tuple[Relation, ...]) -> Algebra:
    all_paths = enumerate_paths(quiver, nilp_bound)
    by_len: dict[int, list[Path]] = {}
    for p in all_paths:
        by_len.setdefault(p.length, []).append(p)
    # paths bucketed by (length, source, target) for sandwich enumeration
    bucket: dict[tuple[int, str, str], list[Path]] = {}
    for p in all_paths:
        bucket.setdefault((p.length, p.source, p.target), []).append(p)

    basis: list[Path] = []
    reduce_map: dict = {}
    # degree 0 and 1 are always independent (admissible ideal sits in J^2)
    for d in (0, 1):
        for p in by_len.get(d, []):
            basis.append(p)

    for d in range(2, nilp_bound + 1):
        paths_d = by_len.get(d, [])
        if not paths_d:
            if d == nilp_bound:
                break
            continue
        col_of = {_path_key(p): j for j, p in enumerate(paths_d)}
        rows = []
        for g, src, tgt, terms in rel_vecs:
            if g > d:
                continue
            for lv in range(0, d - g + 1):
                lu = d - g - lv
                for v in _sandwich_tails(bucket, lv, src):
                    for u in _sandwich_heads(bucket, lu, tgt):
                        row = field.zeros_vec(len(paths_d))
                        for term_path, coeff in terms:
                            w = compose_paths(term_path, v)
                            w = compose_paths(u, w) if w is not None else None
                            if w is None:
                                raise AlgebraError("relation sandwich failed to compose")
                            row[col_of[_path_key(w)]] += field.coerce(coeff)
                        rows.append(field.reduce(row))
        if rows:
            mat = field.zeros(len(rows), len(paths_d))
            for i, row in enumerate(rows):
                mat[i, :] = row
            rref, pivots = field.rref(mat)
        else:
            rref, pivots = field.zeros(0, len(paths_d)), []
        pivot_set = set(pivots)
        if d == nilp_bound:
            if len(pivots) != len(paths_d):
                alive = [str(paths_d[j]) for j in range(len(paths_d)) if j not in pivot_set][:5]
                raise AlgebraError(
                    f"J^{nilp_bound} != 0 under the given relations; "
                    f"surviving length-{nilp_bound} paths include {alive}"
                )
            break
        keep = [j for j in range(len(paths_d)) if j not in pivot_set]
        keep_paths = [paths_d[j] for j in keep]
        basis.extend(keep_paths)
        # fill reductions for this degree once global indices are known later;
        # record (path row) data now
        for j in keep:
            reduce_map[_path_key(paths_d[j])] = [(paths_d[j], field.one)]
        for i, pcol in enumerate(pivots):
            expr = []
            for j in keep:
                c = rref[i, j]
                if c != 0:
                    expr.append((paths_d[j], field.coerce(-c)))
            reduce_map[_path_key(paths_d[pcol])] = expr

    # re-key reductions onto basis indices
    index = {_path_key(p): i for i, p in enumerate(basis)}
    final_reduce: dict = {}
    for p in by_len.get(0, []) + by_len.get(1, []):
        final_reduce[_path_key(p)] = ((index[_path_key(p)], field.one),)
    for key, expr in reduce_map.items():
        if expr is None:
            continue
        if isinstance(expr, list):
            final_reduce[key] = tuple((index[_path_key(q)], c) for q, c in expr)

    is_monomial = all(isinstance(r, Monomial) for r in relations)
    alg = Algebra(quiver, field, nilp_bound, relations, basis, final_reduce, is_monomial)
    if is_monomial:
        # basis of a monomial algebra = surviving paths; already guaranteed by
        # the construction, asserted cheaply here
        assert all(len(v) <= 1 for v in final_reduce.values() if v)
    return alg


def _sandwich_tails(bucket, length: int, rel_source: str):
    """Paths v of given length with target = rel_source (traversed first)."""
    for (lv, _src, tgt), plist in bucket.items():
        if lv == length and tgt == rel_source:
            yield from plist


def _sandwich_heads(bucket, length: int, rel_target: str):
    """Paths u of given length with source = rel_target (applied last)."""
    for (lu, src, _tgt), plist in bucket.items():
        if lu == length and src == rel_target:
            yield from plist


def multiply(alg: Algebra, x: dict[int, object], y: dict[int, object]) -> dict[int, object]:
    """Bilinear extension of the multiplication table."""
    return alg.multiply_elements(x, y)


def radical_power(alg: Algebra, k: int) -> frozenset[int]:
    return alg.radical_power(k)


def rad_square_zero_relations(quiver: Quiver) -> list[Monomial]:
    """All length-2 paths; quotienting by them gives the radical-square-zero
    algebra on the quiver."""
    out = []
    for a in quiver.arrows:
        for b in quiver.arrows_from(a.target):
            p = compose_paths(quiver.arrow_path(b.name), quiver.arrow_path(a.name))
            out.append(Monomial(p))
    return out

"""Line-based text formats.

Algebra files (``.alg``)::

    # comment
    field Q            # or F2, F5, ...
    nilp 3
    vertex a0
    arrow gamma0 a0 c1
    zero eps-1*eps-1           # path relation, leftmost arrow applied last
    rel alpha0_1*alpha1_0 - beta0*alpha1_1   # difference of parallel paths
    partition E' = a0,c1 ; E'' = a1,b1

Module files (``.mod``) use the layered-graph statements::

    top x0: a1
    edge x0 --alpha1_1--> u1
    identify u1 v1
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .algebra import Algebra, Binomial, Monomial, build_algebra
from .fields import make_field, parse_field_label
from .quiver import Quiver

__all__ = [
    "ParseError",
    "AlgebraFile",
    "parse_algebra_text",
    "load_algebra",
    "algebra_to_text",
    "parse_partition_spec",
    "file_digest",
    "lattice_point_graph_text",
]


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass
class AlgebraFile:
    algebra: Algebra
    partition: tuple[list[str], list[str]] | None


def parse_algebra_text(text: str) -> AlgebraFile:
    field_label = "Q"
    nilp = 3
    vertices: list[str] = []
    arrows: list[tuple[str, str, str]] = []
    zero_words: list[tuple[int, str]] = []
    rel_words: list[tuple[int, str, str]] = []
    partition = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "field":
                field_label = rest
                parse_field_label(field_label)
            elif head == "nilp":
                nilp = int(rest)
            elif head == "vertex":
                if not rest or " " in rest:
                    raise ValueError("vertex needs exactly one id")
                vertices.append(rest)
            elif head == "arrow":
                parts = rest.split()
                if len(parts) != 3:
                    raise ValueError("arrow needs: id source target")
                arrows.append((parts[0], parts[1], parts[2]))
            elif head == "zero":
                zero_words.append((lineno, rest))
            elif head == "rel":
                lhs, _, rhs = rest.partition(" - ")
                if not rhs:
                    raise ValueError("rel needs: path - path")
                rel_words.append((lineno, lhs.strip(), rhs.strip()))
            elif head == "partition":
                partition = _parse_partition(rest)
            else:
                raise ValueError(f"unknown statement {head!r}")
        except ParseError:
            raise
        except (ValueError, KeyError) as exc:
            raise ParseError(lineno, str(exc)) from None
    try:
        quiver = Quiver(vertices, arrows)
    except ValueError as exc:
        raise ParseError(0, str(exc)) from None
    rels = []
    for lineno, word in zero_words:
        try:
            rels.append(Monomial(quiver.path_from_word(word)))
        except (ValueError, KeyError) as exc:
            raise ParseError(lineno, str(exc)) from None
    for lineno, lhs, rhs in rel_words:
        try:
            rels.append(Binomial(quiver.path_from_word(lhs),
                                 quiver.path_from_word(rhs)))
        except (ValueError, KeyError) as exc:
            raise ParseError(lineno, str(exc)) from None
    alg = build_algebra(quiver, rels, make_field(field_label), nilp)
    return AlgebraFile(alg, partition)


def _parse_partition(rest: str):
    lower = upper = None
    for chunk in rest.split(";"):
        name, _, vals = chunk.partition("=")
        name = name.strip()
        vs = [v.strip() for v in vals.split(",") if v.strip()]
        if name in ("E'", "E1", "lower"):
            lower = vs
        elif name in ("E''", "E2", "upper"):
            upper = vs
        else:
            raise ValueError(f"unknown partition part {name!r}")
    if lower is None or upper is None:
        raise ValueError("partition needs both E' and E'' parts")
    return lower, upper


def parse_partition_spec(spec: str):
    """CLI-style partition flag: \"E'=a0,c1;E''=a1,b1\"."""
    return _parse_partition(spec)


def load_algebra(path: str) -> AlgebraFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_algebra_text(fh.read())


def algebra_to_text(alg: Algebra, partition=None) -> str:
    lines = [f"field {alg.field.spec.label}", f"nilp {alg.nilp_bound}"]
    lines += [f"vertex {v}" for v in alg.quiver.vertices]
    lines += [f"arrow {a.name} {a.source} {a.target}" for a in alg.quiver.arrows]
    for rel in alg.relations:
        if isinstance(rel, Monomial):
            lines.append(f"zero {rel.path}")
        else:
            lines.append(f"rel {rel.left} - {rel.right}")
    if partition is not None:
        lower, upper = partition
        lines.append("partition E' = " + ",".join(lower) + " ; E'' = " + ",".join(upper))
    return "\n".join(lines) + "\n"


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def lattice_point_graph_text(point) -> str | None:
    """Layered-graph source for a Loewy-2 lattice module, when its kernel
    rows are single paths (kills) or coefficient-one differences of two
    paths (identifications); None otherwise."""
    lat_mu = point.mu
    M = point.module
    alg = M.algebra
    f = alg.field
    # reconstruct the projective sum bookkeeping
    types = []
    for v in alg.quiver.vertices:
        types.extend([v] * lat_mu.get(v, 0))
    from . import rephom as rh

    P, info = rh.projective_sum(alg, types)
    lines = [f"top x{i}: {t}" for i, t in enumerate(types)]
    # per vertex: kernel rows in the coordinates of P_v
    spans = point.kernel.meta.get("ambient_basis")
    killed: set[tuple[int, int]] = set()
    identified: list[tuple[tuple[int, int], tuple[int, int], object]] = []
    for v in alg.quiver.vertices:
        basis = spans[v] if spans else None
        if basis is None or basis.shape[1] == 0:
            continue
        for j in range(basis.shape[1]):
            col = basis[:, j]
            nz = [k for k in range(col.shape[0]) if col[k] != 0]
            slots = [info.slots[v][k] for k in nz]
            if len(nz) == 1:
                killed.add(slots[0])
            elif len(nz) == 2 and f.coerce(col[nz[0]]) == f.coerce(-col[nz[1]]):
                identified.append((slots[0], slots[1], None))
            else:
                return None
    node_of: dict[tuple[int, int], str] = {}
    counter = 0
    for v in alg.quiver.vertices:
        for (i, bidx) in info.slots[v]:
            p = alg.basis[bidx]
            if p.length == 0:
                node_of[(i, bidx)] = f"x{i}"
    emitted = set()

    def ensure_node(key):
        nonlocal counter
        if key in node_of:
            return node_of[key]
        counter += 1
        node_of[key] = f"n{counter}"
        return node_of[key]

    for v in alg.quiver.vertices:
        for (i, bidx) in info.slots[v]:
            p = alg.basis[bidx]
            if p.length == 0 or (i, bidx) in killed:
                continue
            parent_key = (i, alg.basis_index.get((p.source, p.arrows[:-1])))
            if parent_key[1] is None or parent_key not in node_of:
                return None
            child = ensure_node((i, bidx))
            line = f"edge {node_of[parent_key]} --{p.arrows[-1]}--> {child}"
            if line not in emitted:
                emitted.add(line)
                lines.append(line)
    for (a, b, _c) in identified:
        if a in node_of and b in node_of:
            lines.append(f"identify {node_of[a]} {node_of[b]}")
        else:
            return None
    return "\n".join(lines) + "\n"

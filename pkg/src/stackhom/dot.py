"""Graphviz DOT emitters for quivers and layered module graphs."""
from __future__ import annotations

from .algebra import Algebra
from .quiver import Quiver
from .rephom import LayeredGraph

__all__ = ["quiver_dot", "layered_graph_dot"]


def _q(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def quiver_dot(quiver: Quiver, name: str = "quiver") -> str:
    lines = [f"digraph {_q(name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for v in quiver.vertices:
        lines.append(f"  {_q(v)};")
    for a in quiver.arrows:
        lines.append(f"  {_q(a.source)} -> {_q(a.target)} [label={_q(a.name)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def algebra_dot(alg: Algebra, name: str = "algebra") -> str:
    return quiver_dot(alg.quiver, name)


def layered_graph_dot(g: LayeredGraph, name: str = "module") -> str:
    """Undirected layered rendering: one rank per layer, identified nodes
    merged."""
    rep: dict[str, str] = {}

    def find(x):
        while rep.get(x, x) != x:
            rep[x] = rep.get(rep[x], rep[x])
            x = rep[x]
        return x

    for a, b in g.identify:
        ra, rb = find(a), find(b)
        if ra != rb:
            rep[ra] = rb
    lines = [f"graph {_q(name)} {{", "  node [shape=box];"]
    layers: dict[int, list[str]] = {}
    for node, lay in g.node_layer.items():
        r = find(node)
        layers.setdefault(lay, [])
        if r not in layers[lay]:
            layers[lay].append(r)
    for lay in sorted(layers):
        for node in layers[lay]:
            lines.append(f"  {_q(node)} [label={_q(g.node_vertex[node])}];")
        members = " ".join(_q(n) + ";" for n in layers[lay])
        lines.append("  { rank=same; " + members + " }")
    seen = set()
    for p, arrow, c in g.edges:
        key = (find(p), arrow, find(c))
        if key in seen:
            continue
        seen.add(key)
        lines.append(f"  {_q(key[0])} -- {_q(key[2])} [label={_q(arrow)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

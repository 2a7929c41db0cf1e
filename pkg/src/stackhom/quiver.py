"""Finite quivers and path combinatorics.

Paths store their arrows in traversal order (source first); printing is
right-to-left, so the displayed word `p*q` means "q, then p".  Composition
follows the same convention: compose_paths(p, q) is defined when q ends
where p starts and traverses q first.
"""
from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "Arrow",
    "Path",
    "Quiver",
    "compose_paths",
    "enumerate_paths",
    "PathBudgetExceeded",
]


class PathBudgetExceeded(RuntimeError):
    """Raised when path enumeration exceeds the configured cap."""


@dataclass(frozen=True)
class Arrow:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Path:
    """A path in a quiver; length 0 means the trivial path at `source`."""

    source: str
    target: str
    arrows: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.arrows)

    @property
    def is_trivial(self) -> bool:
        return not self.arrows

    def __str__(self) -> str:
        if self.is_trivial:
            return f"e({self.source})"
        return "*".join(reversed(self.arrows))


class Quiver:
    """Immutable finite quiver with declaration-ordered vertices and arrows."""

    def __init__(self, vertices, arrows):
        self.vertices: tuple[str, ...] = tuple(str(v) for v in vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        arr = []
        for a in arrows:
            if isinstance(a, Arrow):
                arr.append(a)
            else:
                name, src, dst = a
                arr.append(Arrow(str(name), str(src), str(dst)))
        self.arrows: tuple[Arrow, ...] = tuple(arr)
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise ValueError("duplicate arrow ids")
        vset = set(self.vertices)
        for a in self.arrows:
            if a.source not in vset or a.target not in vset:
                raise ValueError(f"arrow {a.name} has undeclared endpoint")
        self._arrow_by_name = {a.name: a for a in self.arrows}
        self._arrows_from: dict[str, list[Arrow]] = {v: [] for v in self.vertices}
        self._arrows_into: dict[str, list[Arrow]] = {v: [] for v in self.vertices}
        for a in self.arrows:
            self._arrows_from[a.source].append(a)
            self._arrows_into[a.target].append(a)

    # -- lookups ---------------------------------------------------------------

    def arrow(self, name: str) -> Arrow:
        try:
            return self._arrow_by_name[name]
        except KeyError:
            raise KeyError(f"no arrow named {name!r}") from None

    def arrows_from(self, v: str) -> list[Arrow]:
        return self._arrows_from[v]

    def arrows_into(self, v: str) -> list[Arrow]:
        return self._arrows_into[v]

    def sources(self) -> list[str]:
        """Vertices with no incoming arrow; a loop disqualifies its vertex."""
        return [v for v in self.vertices if not self._arrows_into[v]]

    # -- path constructors -------------------------------------------------------

    def trivial_path(self, v: str) -> Path:
        if v not in self._arrows_from:
            raise KeyError(f"no vertex named {v!r}")
        return Path(v, v, ())

    def arrow_path(self, name: str) -> Path:
        a = self.arrow(name)
        return Path(a.source, a.target, (name,))

    def path(self, arrow_names, at: str | None = None) -> Path:
        """Path from arrow names in traversal order; `at` names the vertex
        of a trivial path."""
        names = list(arrow_names)
        if not names:
            if at is None:
                raise ValueError("trivial path needs a vertex")
            return self.trivial_path(at)
        p = self.arrow_path(names[0])
        for nm in names[1:]:
            q = compose_paths(self.arrow_path(nm), p)
            if q is None:
                raise ValueError(f"arrows do not compose: {names}")
            p = q
        return p

    def path_from_word(self, word: str) -> Path:
        """Parse `a*b*c` (leftmost applied last) or `e(v)`."""
        word = word.strip()
        if word.startswith("e(") and word.endswith(")"):
            return self.trivial_path(word[2:-1])
        names = [t.strip() for t in word.split("*") if t.strip()]
        return self.path(list(reversed(names)))

    def initial_segments(self, p: Path):
        """Right subpaths of p (traversed-first prefixes), length 0..length."""
        v = p.source
        yield Path(v, v, ())
        for k in range(1, p.length + 1):
            v = self.arrow(p.arrows[k - 1]).target
            yield Path(p.source, v, p.arrows[:k])

    def validate_path(self, p: Path) -> None:
        v = p.source
        for nm in p.arrows:
            a = self.arrow(nm)
            if a.source != v:
                raise ValueError(f"path {p} does not compose at {nm}")
            v = a.target
        if v != p.target:
            raise ValueError(f"path {p} has wrong target")


def compose_paths(p: Path, q: Path) -> Path | None:
    """The composite pq (q traversed first); None when endpoints mismatch."""
    if q.target != p.source:
        return None
    return Path(q.source, p.target, q.arrows + p.arrows)


def enumerate_paths(quiver: Quiver, max_len: int, cap: int = 1_000_000) -> list[Path]:
    """All paths of length <= max_len in length-lexicographic order
    (arrow order = declaration order).  Prefix-closed by construction."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    out: list[Path] = [quiver.trivial_path(v) for v in quiver.vertices]
    frontier = out[:]
    for _ in range(max_len):
        nxt: list[Path] = []
        for p in frontier:
            for a in quiver.arrows_from(p.target):
                nxt.append(Path(p.source, a.target, p.arrows + (a.name,)))
                if len(out) + len(nxt) > cap:
                    raise PathBudgetExceeded(
                        f"more than {cap} paths of length <= {max_len}"
                    )
        out.extend(nxt)
        frontier = nxt
        if not frontier:
            break
    return out

"""Redundancy lattice of two or three sources.

A node is a *collection*: a set of non-empty source sets, none contained in
another. ``a <= b`` when every set of ``b`` contains some set of ``a``. Names
join the sets with dots, each set written as its sorted variable letters
(``"XY.XZ"``, ``"X.Y.Z"``); sets are listed singletons first, then by letters.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from functools import lru_cache
from itertools import combinations

from .errors import ArityMismatch, BadIndex, EmptyPart, MissingAtom, NotAntichain, UnsupportedArity

__all__ = ["Collection", "atoms", "names", "leq", "down_set", "accumulate", "top", "bottom"]

_LETTERS = "XYZ"


def _check_arity(n):
    if isinstance(n, bool) or not isinstance(n, int) or n not in (2, 3):
        raise UnsupportedArity(f"lattices are provided for 2 or 3 sources, got {n!r}")


def _part_name(part) -> str:
    return "".join(_LETTERS[v - 1] for v in sorted(part))


class Collection:
    """Antichain of source sets over sources ``1..n_sources``.

    Raises
    ------
    NotAntichain
        One set contains another.
    EmptyPart, BadIndex
        An empty set, or a source outside ``1..n_sources``.
    """

    __slots__ = ("sources", "n_sources", "_name")

    def __init__(self, sources: Iterable[Iterable[int]], n_sources: int = 3):
        _check_arity(n_sources)
        parts = frozenset(frozenset(int(v) for v in p) for p in sources)
        if not parts:
            raise EmptyPart("a collection needs at least one source set")
        for p in parts:
            if not p:
                raise EmptyPart("empty source set in collection")
            if not all(1 <= v <= n_sources for v in p):
                raise BadIndex(f"source set {sorted(p)} outside 1..{n_sources}")
        for p, q in combinations(parts, 2):
            if p < q or q < p:
                raise NotAntichain(f"{_part_name(p)} and {_part_name(q)} are nested")
        object.__setattr__(self, "sources", parts)
        object.__setattr__(self, "n_sources", n_sources)
        ordered = sorted(parts, key=lambda p: (len(p), _part_name(p)))
        object.__setattr__(self, "_name", ".".join(_part_name(p) for p in ordered))

    def __setattr__(self, name, value):
        raise AttributeError("Collection is immutable")

    @classmethod
    def parse(cls, name: str, n_sources: int = 3) -> "Collection":
        """Collection from dotted notation, e.g. ``"X.YZ"``."""
        _check_arity(n_sources)
        parts = []
        for token in name.split("."):
            letters = token.strip().upper()
            if not letters or any(c not in _LETTERS[:n_sources] for c in letters):
                raise BadIndex(f"bad source set {token!r} in {name!r}")
            parts.append({_LETTERS.index(c) + 1 for c in letters})
        return cls(parts, n_sources)

    @property
    def name(self) -> str:
        return self._name

    def __eq__(self, other):
        return (isinstance(other, Collection) and self.sources == other.sources
                and self.n_sources == other.n_sources)

    def __hash__(self):
        return hash((self.sources, self.n_sources))

    def __le__(self, other):
        return leq(self, other)

    def __repr__(self):
        return f"Collection({self._name!r})"

    def __str__(self):
        return self._name


def _sort_key(c: Collection):
    sizes = [len(p) for p in c.sources]
    return (-min(sizes), len(sizes), -sum(sizes), c.name)


@lru_cache(maxsize=None)
def _atoms(n: int) -> tuple:
    subsets = [frozenset(s) for k in range(1, n + 1) for s in combinations(range(1, n + 1), k)]
    found = []
    for k in range(1, len(subsets) + 1):
        for combo in combinations(subsets, k):
            if all(not (p < q or q < p) for p, q in combinations(combo, 2)):
                found.append(Collection(combo, n))
    return tuple(sorted(found, key=_sort_key))


def atoms(n_sources: int) -> list:
    """All lattice nodes: 4 for two sources, 18 for three.

    Ordered from the top (the full source set) through the other synergy
    nodes, then the unique nodes, with the all-singletons node last.
    """
    _check_arity(n_sources)
    return list(_atoms(n_sources))


def names(n_sources: int) -> list[str]:
    return [c.name for c in atoms(n_sources)]


def top(n_sources: int) -> Collection:
    return Collection([range(1, n_sources + 1)], n_sources)


def bottom(n_sources: int) -> Collection:
    return Collection([[v] for v in range(1, n_sources + 1)], n_sources)


def leq(a: Collection, b: Collection) -> bool:
    """``a <= b``: every set of ``b`` contains a set of ``a``.

    Raises
    ------
    ArityMismatch
        The collections live on different numbers of sources.
    """
    if a.n_sources != b.n_sources:
        raise ArityMismatch(f"cannot compare {a.n_sources}- and {b.n_sources}-source collections")
    return all(any(p <= q for p in a.sources) for q in b.sources)


def down_set(a: Collection) -> list:
    """Nodes below or equal to ``a``, in :func:`atoms` order."""
    return [c for c in _atoms(a.n_sources) if leq(c, a)]


def accumulate(atom_values: Mapping, a, n_sources: int | None = None) -> float:
    """Sum of the atom values over the down-set of ``a``.

    ``atom_values`` maps atom names (or :class:`Collection` objects) to
    numbers; ``a`` is a collection or its name. For a name, ``n_sources``
    defaults to 2 when exactly four values are given, else 3.

    Raises
    ------
    MissingAtom
        A node of the down-set has no value.
    """
    if not isinstance(a, Collection):
        a = Collection.parse(a, n_sources or (2 if len(atom_values) == 4 else 3))
    total = 0.0
    for c in down_set(a):
        if c.name in atom_values:
            total += atom_values[c.name]
        elif c in atom_values:
            total += atom_values[c]
        else:
            raise MissingAtom(f"no value for atom {c.name}")
    return total

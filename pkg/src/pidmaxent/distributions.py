"""Discrete joint distributions of a target and up to three sources.

Variable 0 is always the target ``T``; variables ``1..arity`` are the sources
(``X``, ``Y``, ``Z`` in the three-source case). Symbols are arbitrary hashable
labels; internally every variable is re-coded to dense integers ``0..k-1``.
"""
from __future__ import annotations

import json
import math
import re
from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction

import numpy as np

from .errors import (
    BadIndex,
    BadSize,
    DuplicateTuple,
    EmptyInput,
    EmptyPart,
    InputError,
    MassNotNormalizable,
    NegativeMass,
    OverlappingParts,
    UnknownGate,
)

__all__ = [
    "T", "X", "Y", "Z",
    "JointDistribution",
    "Marginal",
    "MarginalSpec",
    "from_pairs",
    "marginal",
    "group_sources",
    "gate",
    "GATES",
    "random_simplex",
    "copy_gate",
    "to_tsv",
    "from_tsv",
    "to_json",
    "from_json",
    "read_distribution",
]

T, X, Y, Z = 0, 1, 2, 3
VAR_NAMES = ("T", "X", "Y", "Z")

PRUNE_BELOW = 1e-14
_UNIT_SLACK = 1e-12


def _label_key(sym):
    return (type(sym).__name__, sym)


def _sorted_labels(labels):
    labels = list(dict.fromkeys(labels))
    try:
        return tuple(sorted(labels, key=_label_key))
    except TypeError:
        # mixed tuple contents that do not compare; keep first-seen order
        return tuple(labels)


class JointDistribution:
    """Immutable sparse pmf over tuples ``(t, x_1, ..., x_arity)``.

    Use :func:`from_pairs` to construct one from user data; the constructor
    trusts its arguments.

    Attributes
    ----------
    labels : tuple of tuple
        ``labels[v][c]`` is the symbol coded as ``c`` for variable ``v``.
    codes : ndarray of int, shape (n_atoms, arity + 1)
        Dense symbol codes of each support tuple, rows sorted lexicographically.
    probs : ndarray of float, shape (n_atoms,)
    """

    __slots__ = ("labels", "codes", "probs", "_mass")

    def __init__(self, labels, codes, probs):
        codes = np.ascontiguousarray(codes, dtype=np.int64)
        probs = np.ascontiguousarray(probs, dtype=np.float64)
        codes.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "labels", tuple(tuple(l) for l in labels))
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_mass", None)

    def __setattr__(self, name, value):
        raise AttributeError("JointDistribution is immutable")

    @property
    def nvars(self) -> int:
        return self.codes.shape[1]

    @property
    def arity(self) -> int:
        return self.nvars - 1

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return tuple(len(l) for l in self.labels)

    @property
    def mass(self) -> dict:
        """Mapping from symbol tuple to probability."""
        if self._mass is None:
            m = {}
            for row, p in zip(self.codes.tolist(), self.probs.tolist()):
                m[tuple(self.labels[v][c] for v, c in enumerate(row))] = p
            object.__setattr__(self, "_mass", m)
        return dict(self._mass)

    def items(self):
        return self.mass.items()

    def __len__(self):
        return len(self.probs)

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return self.nvars == other.nvars and self.mass == other.mass

    def __hash__(self):
        return hash(frozenset(self.mass.items()))

    def __repr__(self):
        return (f"JointDistribution(arity={self.arity}, "
                f"alphabet_sizes={self.alphabet_sizes}, atoms={len(self)})")


def _entries(entries) -> list:
    if isinstance(entries, JointDistribution):
        return list(entries.items())
    if isinstance(entries, Mapping):
        return list(entries.items())
    return [tuple(e) for e in entries]


def from_pairs(entries, *, prune: float = PRUNE_BELOW) -> JointDistribution:
    """Validate, normalize and encode a distribution.

    Parameters
    ----------
    entries : mapping or iterable of (tuple, float)
        Symbol tuples ``(t, x1, ..., xk)`` with ``1 <= k <= 3`` and their
        (possibly unnormalized) masses.
    prune : float
        Probabilities below this value after normalization are dropped.

    Raises
    ------
    EmptyInput, NegativeMass, DuplicateTuple, MassNotNormalizable, BadIndex
    """
    pairs = _entries(entries)
    if not pairs:
        raise EmptyInput("distribution has no entries")
    width = None
    seen = set()
    for key, p in pairs:
        if not isinstance(key, tuple):
            raise BadIndex(f"outcome {key!r} is not a tuple")
        if width is None:
            width = len(key)
        elif len(key) != width:
            raise BadIndex(f"outcome {key!r} has {len(key)} entries, expected {width}")
        if key in seen:
            raise DuplicateTuple(f"outcome {key!r} appears more than once")
        seen.add(key)
        try:
            p = float(p)
        except (TypeError, ValueError):
            raise InputError(f"probability {p!r} of {key!r} is not a number") from None
        if not math.isfinite(p):
            raise InputError(f"probability of {key!r} is not finite")
        if p < 0:
            raise NegativeMass(f"outcome {key!r} has negative mass {p}")
    if not 2 <= width <= 4:
        raise BadIndex(f"tuples must hold a target and 1-3 sources, got width {width}")
    total = math.fsum(float(p) for _, p in pairs)
    if total <= 0:
        raise MassNotNormalizable("total mass is zero")

    # already-normalized input is kept bit for bit, so written files re-read equal
    scale = 1.0 if abs(total - 1.0) <= _UNIT_SLACK else total
    kept = [(k, float(p) / scale) for k, p in pairs]
    kept = [(k, p) for k, p in kept if p >= prune and p > 0]
    if not kept:
        raise MassNotNormalizable("no outcome survives pruning")
    total = math.fsum(p for _, p in kept)
    if abs(total - 1.0) > _UNIT_SLACK:
        kept = [(k, p / total) for k, p in kept]
    return _encode(kept, width)


def _encode(kept, width) -> JointDistribution:
    labels = [_sorted_labels(k[v] for k, _ in kept) for v in range(width)]
    index = [{s: i for i, s in enumerate(l)} for l in labels]
    codes = np.array([[index[v][k[v]] for v in range(width)] for k, _ in kept],
                     dtype=np.int64)
    probs = np.array([p for _, p in kept])
    order = np.lexsort(codes.T[::-1])
    return JointDistribution(labels, codes[order], probs[order])


def _check_vars(nvars, vars_) -> tuple[int, ...]:
    out = []
    for v in vars_:
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise BadIndex(f"variable index {v!r} is not an integer")
        if not 0 <= v < nvars:
            raise BadIndex(f"variable index {v} outside 0..{nvars - 1}")
        out.append(int(v))
    if len(set(out)) != len(out):
        raise BadIndex(f"repeated variable index in {tuple(vars_)}")
    return tuple(out)


class Marginal(Mapping):
    """Marginal table over a subset of variables.

    Behaves as a read-only ``{symbol tuple: probability}`` mapping. The sums are
    kept as exact rationals so that marginalizing a marginal gives bit-for-bit
    the same floats as marginalizing the original distribution directly.
    """

    def __init__(self, variables: tuple[int, ...], exact: dict):
        self.variables = tuple(variables)
        self._exact = exact
        self._float = {k: float(v) for k, v in exact.items()}

    def __getitem__(self, key):
        return self._float[key]

    def __iter__(self):
        return iter(self._float)

    def __len__(self):
        return len(self._float)

    def __repr__(self):
        return f"Marginal(variables={self.variables}, {self._float!r})"


def marginal(dist, vars_: Sequence[int]) -> Marginal:
    """Marginal table of ``dist`` over the variables ``vars_`` (in that order).

    ``dist`` may itself be a :class:`Marginal`, in which case ``vars_`` still
    names original variable indices and must be a subset of its variables.
    """
    if isinstance(dist, Marginal):
        pos = {v: i for i, v in enumerate(dist.variables)}
        for v in vars_:
            if v not in pos:
                raise BadIndex(f"variable {v} not in marginal over {dist.variables}")
        vars_ = tuple(vars_)
        sel = [pos[v] for v in vars_]
        acc: dict = {}
        for key, p in dist._exact.items():
            k = tuple(key[i] for i in sel)
            acc[k] = acc.get(k, 0) + p
        return Marginal(vars_, acc)
    vars_ = _check_vars(dist.nvars, vars_)
    if not vars_:
        raise BadIndex("empty variable set")
    acc = {}
    for key, p in dist.mass.items():
        k = tuple(key[v] for v in vars_)
        acc[k] = acc.get(k, 0) + Fraction(p)
    return Marginal(vars_, acc)


def marginal_codes(dist: JointDistribution, vars_) -> tuple[np.ndarray, np.ndarray]:
    """Fast float marginal: unique code rows over ``vars_`` and their masses."""
    sub = dist.codes[:, list(vars_)]
    rows, inv = np.unique(sub, axis=0, return_inverse=True)
    return rows, np.bincount(inv.ravel(), weights=dist.probs, minlength=len(rows))


class MarginalSpec:
    """Pinned target-with-group marginals defining a feasible polytope.

    Parameters
    ----------
    groups : sequence of iterables of int
        Source-index sets (``1..arity``); the target is implicit in each.
    values : sequence of Marginal
        ``values[i]`` is the table over variables ``(0,) + sorted(groups[i])``.

    Use :meth:`from_distribution` to pin the marginals of a reference
    distribution.
    """

    __slots__ = ("groups", "values")

    def __init__(self, groups, values):
        gs = []
        for g in groups:
            g = frozenset(int(v) for v in g)
            if not g:
                raise EmptyPart("pinned group is empty")
            if 0 in g:
                raise BadIndex("pinned groups list sources only; the target is implicit")
            if g in gs:
                raise OverlappingParts(f"pinned group {sorted(g)} listed twice")
            gs.append(g)
        if not gs:
            raise EmptyInput("no pinned groups")
        values = tuple(values)
        if len(values) != len(gs):
            raise InputError("one marginal table is needed per pinned group")
        for g, table in zip(gs, values):
            if tuple(table.variables) != (0,) + tuple(sorted(g)):
                raise BadIndex(f"table over {table.variables} does not match group {sorted(g)}")
            if any(p < 0 for p in table.values()):
                raise NegativeMass("pinned table has negative mass")
        self.groups = tuple(gs)
        self.values = values

    @classmethod
    def from_distribution(cls, dist: JointDistribution, groups) -> "MarginalSpec":
        groups = [frozenset(g) for g in groups]
        for g in groups:
            _check_vars(dist.nvars, tuple(g))
        return cls(groups, [marginal(dist, (0,) + tuple(sorted(g))) for g in groups])

    @classmethod
    def pairwise(cls, dist: JointDistribution) -> "MarginalSpec":
        """Pin every (target, source) marginal."""
        return cls.from_distribution(dist, [{v} for v in range(1, dist.nvars)])

    def __len__(self):
        return len(self.groups)

    def __repr__(self):
        names = ["".join(VAR_NAMES[v] for v in sorted(g)) for g in self.groups]
        return f"MarginalSpec({', '.join(names)})"


def group_sources(dist: JointDistribution, partition: Sequence[Iterable[int]]) -> JointDistribution:
    """Regroup sources into (possibly composite) new sources.

    ``partition`` lists source-index sets (indices ``1..arity``). Each part
    becomes one new source; a multi-member part takes tuple symbols ordered by
    variable index. Parts may share variables (e.g. ``[{X, Y}, {X, Z}]``) but
    may not be empty or identical.
    """
    parts = []
    for part in partition:
        part = tuple(sorted(set(part)))
        if not part:
            raise EmptyPart("partition contains an empty part")
        for v in part:
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 1 <= v <= dist.arity:
                raise BadIndex(f"source index {v!r} outside 1..{dist.arity}")
        if part in parts:
            raise OverlappingParts(f"part {set(part)} listed twice")
        parts.append(part)
    if not 1 <= len(parts) <= 3:
        raise BadSize(f"partition must have 1-3 parts, got {len(parts)}")
    entries = []
    for key, p in dist.mass.items():
        new = [key[0]]
        for part in parts:
            new.append(key[part[0]] if len(part) == 1 else tuple(key[v] for v in part))
        entries.append((tuple(new), p))
    # distinct original tuples always map to distinct regrouped tuples only when
    # every source is covered; otherwise merge.
    merged: dict = {}
    for k, p in entries:
        merged[k] = merged.get(k, 0.0) + p
    return _encode(list(merged.items()), len(parts) + 1)


# ---------------------------------------------------------------------------
# generators

def _xor_duplicate():
    return {(x ^ y, x, y, x): 0.25 for x in (0, 1) for y in (0, 1)}


def _xor_loses():
    return {(x ^ y, x, y, x ^ y): 0.25 for x in (0, 1) for y in (0, 1)}


def _xor_multicoal():
    return {(u ^ v ^ w, (u, v), (u, w), (v, w)): 0.125
            for u in (0, 1) for v in (0, 1) for w in (0, 1)}


def _and_duplicate():
    return {(x & y, x, y, x): 0.25 for x in (0, 1) for y in (0, 1)}


def copy_gate(sizes=(2, 2, 2)) -> JointDistribution:
    """Uniform ``(x, y, z)`` with target ``t = (x, y, z)``."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 3 or min(sizes) < 2:
        raise BadSize(f"copy gate needs three sizes >= 2, got {sizes}")
    l, m, n = sizes
    w = 1.0 / (l * m * n)
    return from_pairs({((x, y, z), x, y, z): w
                       for x in range(l) for y in range(m) for z in range(n)})


def random_simplex(sizes=(2, 2, 2, 2), seed=None) -> JointDistribution:
    """Joint pmf drawn uniformly from the probability simplex.

    Flat Dirichlet via normalized standard exponentials; ``sizes`` gives the
    alphabet size of each variable, target first.
    """
    sizes = tuple(int(s) for s in sizes)
    if not 2 <= len(sizes) <= 4 or min(sizes) < 2:
        raise BadSize(f"random distribution needs 2-4 sizes >= 2, got {sizes}")
    rng = np.random.default_rng(seed)
    w = rng.standard_exponential(int(np.prod(sizes)))
    w = w / w.sum()
    keys = np.array(np.unravel_index(np.arange(w.size), sizes)).T.tolist()
    return from_pairs({tuple(k): p for k, p in zip(keys, w.tolist())})


GATES = {
    "xor-duplicate": _xor_duplicate,
    "xor-loses": _xor_loses,
    "xor-multicoal": _xor_multicoal,
    "and-duplicate": _and_duplicate,
}


def gate(name: str, **params) -> JointDistribution:
    """Named test distribution.

    ``name`` is one of ``xor-duplicate``, ``xor-loses``, ``xor-multicoal``,
    ``and-duplicate``, ``copy`` (``sizes=(l, m, n)``) or ``random``
    (``sizes=(|T|, |X|, |Y|, |Z|)``, ``seed``). Underscores and case are
    ignored, so ``AndDuplicate`` works too.
    """
    key = re.sub(r"(?<=[a-z])(?=[A-Z])", "-", name).replace("_", "-").lower()
    if key == "copy":
        return copy_gate(params.get("sizes", (2, 2, 2)))
    if key in ("random", "random-simplex"):
        return random_simplex(params.get("sizes", (2, 2, 2, 2)), params.get("seed"))
    if key not in GATES:
        raise UnknownGate(f"unknown gate {name!r}; choose from "
                          f"{', '.join(sorted(GATES) + ['copy', 'random'])}")
    return from_pairs(GATES[key]())


# ---------------------------------------------------------------------------
# text formats

_BARE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_INT = re.compile(r"^-?\d+$")


def format_symbol(sym) -> str:
    if isinstance(sym, (bool, np.bool_)):
        return json.dumps(str(sym))
    if isinstance(sym, (int, np.integer)):
        return str(int(sym))
    if isinstance(sym, tuple):
        return "(" + ",".join(format_symbol(s) for s in sym) + ")"
    if isinstance(sym, str):
        if _BARE.match(sym):
            return sym
        # quoted, with whitespace escaped so a symbol stays one TSV field
        return re.sub(r"\s", lambda m: f"\\u{ord(m.group()):04x}", json.dumps(sym))
    raise InputError(f"cannot serialize symbol {sym!r}")


def _split_top(text: str) -> list[str]:
    parts, depth, cur, quoted = [], 0, [], False
    i = 0
    while i < len(text):
        ch = text[i]
        if quoted:
            cur.append(ch)
            if ch == "\\" and i + 1 < len(text):
                cur.append(text[i + 1])
                i += 1
            elif ch == '"':
                quoted = False
        elif ch == '"':
            quoted = True
            cur.append(ch)
        elif ch == "(":
            depth += 1
            cur.append(ch)
        elif ch == ")":
            depth -= 1
            cur.append(ch)
        elif ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
        i += 1
    if depth != 0 or quoted:
        raise InputError(f"unbalanced symbol text {text!r}")
    parts.append("".join(cur))
    return parts


def parse_symbol(text: str):
    text = text.strip()
    if not text:
        raise InputError("empty symbol")
    if text.startswith("(") and text.endswith(")"):
        inner = text[1:-1]
        return tuple(parse_symbol(p) for p in _split_top(inner)) if inner else ()
    if text.startswith('"'):
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            raise InputError(f"bad quoted symbol {text!r}") from None
    if _INT.match(text):
        return int(text)
    if not _BARE.match(text):
        raise InputError(f"bad symbol {text!r}; quote symbols with special characters")
    return text


def to_tsv(dist: JointDistribution) -> str:
    """One line per atom: symbols then probability, tab separated."""
    lines = []
    for key, p in dist.items():
        lines.append("\t".join([format_symbol(s) for s in key] + [repr(p)]))
    return "\n".join(lines) + "\n"


def from_tsv(text: str) -> JointDistribution:
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) < 3:
            raise InputError(f"line {lineno}: expected symbols and a probability")
        try:
            p = float(fields[-1])
        except ValueError:
            raise InputError(f"line {lineno}: bad probability {fields[-1]!r}") from None
        entries.append((tuple(parse_symbol(f) for f in fields[:-1]), p))
    return from_pairs(entries)


def to_json(dist: JointDistribution) -> str:
    """JSON object mapping ``"t,x,y,z"`` strings to probabilities."""
    obj = {",".join(format_symbol(s) for s in key): p for key, p in dist.items()}
    return json.dumps(obj, indent=1) + "\n"


def from_json(text: str) -> JointDistribution:
    try:
        obj = json.loads(text, object_pairs_hook=list)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not text.lstrip().startswith("{"):
        raise InputError("JSON distribution must be an object")
    entries = []
    for key, p in obj:
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise InputError(f"probability for {key!r} is not a number")
        entries.append((tuple(parse_symbol(s) for s in _split_top(key)), p))
    return from_pairs(entries)


def read_distribution(text: str, fmt: str | None = None) -> JointDistribution:
    """Parse TSV or JSON text; ``fmt=None`` sniffs the first character."""
    if fmt is None:
        fmt = "json" if text.lstrip().startswith("{") else "tsv"
    if fmt == "json":
        return from_json(text)
    if fmt == "tsv":
        return from_tsv(text)
    raise InputError(f"unknown format {fmt!r}")

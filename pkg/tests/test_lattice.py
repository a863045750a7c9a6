import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pidmaxent.errors import ArityMismatch, BadIndex, EmptyPart, MissingAtom, NotAntichain, UnsupportedArity
from pidmaxent.lattice import Collection, accumulate, atoms, bottom, down_set, leq, names, top

X, Y, Z = 1, 2, 3
TRI = atoms(3)


def test_counts_and_names():
    assert set(names(2)) == {"X.Y", "X", "Y", "XY"}
    assert len(TRI) == 18 and len(set(TRI)) == 18
    assert {"XY.XZ.YZ", "X.Y.Z", "X.YZ", "XYZ"} <= set(names(3))
    assert names(3)[0] == "XYZ" and names(3)[-1] == "X.Y.Z"


@pytest.mark.parametrize("n", [0, 1, 4, True, 2.0])
def test_unsupported_arity(n):
    with pytest.raises(UnsupportedArity):
        atoms(n)


def test_order_examples():
    assert leq(Collection.parse("X.Y", 2), Collection.parse("X", 2))
    assert not leq(Collection.parse("X", 2), Collection.parse("Y", 2))
    assert set(c.name for c in down_set(Collection.parse("X", 2))) == {"X", "X.Y"}
    assert set(down_set(top(3))) == set(TRI)
    assert down_set(bottom(3)) == [bottom(3)]


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        leq(Collection.parse("X", 2), Collection.parse("X", 3))


def test_partial_order_axioms():
    for a in TRI:
        assert leq(a, a)
    for a, b in itertools.permutations(TRI, 2):
        assert not (leq(a, b) and leq(b, a))
    for a, b, c in itertools.product(TRI, repeat=3):
        if leq(a, b) and leq(b, c):
            assert leq(a, c)


def _extremum(bounds, better):
    # the unique bound that is better than every other one, or None
    for c in bounds:
        if all(better(c, d) for d in bounds):
            return c
    return None


def test_every_pair_has_meet_and_join():
    for a, b in itertools.combinations(TRI, 2):
        lower = [c for c in TRI if leq(c, a) and leq(c, b)]
        upper = [c for c in TRI if leq(a, c) and leq(b, c)]
        assert _extremum(lower, lambda c, d: leq(d, c)) is not None, (a, b)
        assert _extremum(upper, lambda c, d: leq(c, d)) is not None, (a, b)


def test_monotone_down_sets():
    for a, b in itertools.product(TRI, repeat=2):
        if leq(a, b):
            assert set(down_set(a)) <= set(down_set(b))


def test_accumulate():
    values = {name: float(i + 1) for i, name in enumerate(names(3))}
    assert accumulate(values, "XYZ") == sum(values.values())
    want = sum(values[k] for k in ("X", "X.YZ", "X.Y", "X.Z", "X.Y.Z"))
    assert accumulate(values, "X") == want
    assert accumulate(values, Collection.parse("X")) == want
    zeros = dict.fromkeys(names(3), 0.0)
    assert all(accumulate(zeros, c) == 0.0 for c in TRI)


def test_accumulate_bivariate_by_count():
    values = {"XY": 1.0, "X": 2.0, "Y": 3.0, "X.Y": 4.0}
    assert accumulate(values, "X") == 6.0
    assert accumulate(values, "XY") == 10.0


def test_missing_atom():
    values = dict.fromkeys(names(3), 1.0)
    del values["X.Y.Z"]
    with pytest.raises(MissingAtom):
        accumulate(values, "X")


def test_construction_errors():
    with pytest.raises(NotAntichain):
        Collection([{X}, {X, Y}])
    with pytest.raises(EmptyPart):
        Collection([])
    with pytest.raises(EmptyPart):
        Collection([set()])
    with pytest.raises(BadIndex):
        Collection([{Z}], 2)
    with pytest.raises(BadIndex):
        Collection.parse("X.W")


@given(st.sampled_from(TRI))
def test_parse_round_trip(c):
    assert Collection.parse(c.name) == c
    assert Collection.parse(c.name.lower().replace(".", " . ")) == c
    assert hash(Collection.parse(c.name)) == hash(c)


def test_names_are_canonical():
    assert Collection([{Z, Y}, {X}]).name == "X.YZ"
    assert Collection([{Y, Z}, {X, Z}, {X, Y}]).name == "XY.XZ.YZ"
    with pytest.raises(AttributeError):
        top(3).n_sources = 2

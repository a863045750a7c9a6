import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_pmf
from pidmaxent import broja, gate, pid, read_distribution
from pidmaxent.bivariate import broja_groups
from pidmaxent.distributions import from_pairs
from pidmaxent.errors import ArityMismatch
from pidmaxent.info import entropy, mutual_information
from test_distributions import distributions


def _two(rows):
    return read_distribution("\n".join(f"{t} {a} {b} {p!r}" for (t, a, b), p in rows.items()))


XOR = _two({(a ^ b, a, b): 0.25 for a in (0, 1) for b in (0, 1)})
COPY_A = _two({(a, a, b): 0.25 for a in (0, 1) for b in (0, 1)})
IDENTICAL = _two({(0, 0, 0): 0.3, (1, 1, 1): 0.7})


def test_xor_is_pure_synergy():
    r = broja(XOR)
    assert math.isclose(r.CI, 1.0, abs_tol=1e-7)
    assert all(abs(v) <= 1e-7 for v in (r.UI_A, r.UI_B, r.SI))


def test_copied_source_is_unique():
    r = broja(COPY_A)
    assert math.isclose(r.UI_A, 1.0, abs_tol=1e-7)
    assert all(abs(v) <= 1e-7 for v in (r.CI, r.UI_B, r.SI))


def test_identical_sources_are_shared():
    r = broja(IDENTICAL)
    h = entropy({0: 0.3, 1: 0.7})
    assert math.isclose(r.SI, h, abs_tol=1e-7)
    assert all(abs(v) <= 1e-7 for v in (r.CI, r.UI_A, r.UI_B))


def test_frozen_cases(reference):
    for name, entry in reference["bivariate"].items():
        r = broja(load_pmf(entry))
        for k in ("CI", "UI_A", "UI_B", "SI"):
            assert abs(getattr(r, k) - entry[k]) <= 1e-6, (name, k)


@settings(max_examples=30)
@given(distributions(arity=2))
def test_identities_and_nonnegativity(d):
    r = broja(d)
    assert abs(r.total() - mutual_information(d, 0, (1, 2))) <= 1e-6
    assert abs(r.SI + r.UI_A - mutual_information(d, 0, (1,))) <= 1e-6
    assert abs(r.SI + r.UI_B - mutual_information(d, 0, (2,))) <= 1e-6
    assert min(r.CI, r.UI_A, r.UI_B, r.SI) >= -1e-7


@settings(max_examples=30)
@given(distributions(arity=2))
def test_swap_symmetry(d):
    swapped = _two({(t, b, a): p for (t, a, b), p in d.items()})
    r, s = broja(d), broja(swapped)
    assert abs(r.UI_A - s.UI_B) <= 1e-9 and abs(r.UI_B - s.UI_A) <= 1e-9
    assert abs(r.CI - s.CI) <= 1e-9 and abs(r.SI - s.SI) <= 1e-9


@settings(max_examples=15)
@given(distributions(arity=2, max_size=2), st.lists(st.floats(0.05, 1.0), min_size=1, max_size=3))
def test_matches_trivariate_with_independent_third_source(d, weights):
    # Z independent of (T, X, Y): the three-source decomposition has the same
    # synergy and X/Y unique parts, and the shared part of the pair splits into
    # SI + UIXY
    zs = [w / sum(weights) for w in weights]
    tri = from_pairs({(t, a, b, z): p * q for (t, a, b), p in d.items() for z, q in enumerate(zs)})
    r, full = broja(d), pid(tri)
    assert abs(r.CI - full["CI"]) <= 1e-5
    assert abs(r.UI_A - full["UIX"]) <= 1e-5
    assert abs(r.UI_B - full["UIY"]) <= 1e-5
    assert abs(r.SI - (full["SI"] + full["UIXY"])) <= 1e-5


def test_composite_groups_may_overlap():
    d = gate("xor-duplicate")
    r = broja_groups(d, {1, 2}, {1, 3})
    assert math.isclose(r.total(), mutual_information(d, 0, (1, 2, 3)), abs_tol=1e-9)
    assert r.report is not None and len(r.violations) == 3


def test_arity():
    with pytest.raises(ArityMismatch):
        broja(gate("xor-duplicate"))

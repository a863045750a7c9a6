import math

import pytest
from hypothesis import given

import oracle
from pidmaxent import gate, random_simplex
from pidmaxent.errors import BadIndex
from pidmaxent.info import (
    co_information,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    joint_entropy,
    mutual_information,
)
from test_distributions import distributions


def test_entropy_of_tables():
    assert entropy([0.5, 0.5]) == 1.0
    assert entropy({"a": 1.0, "b": 0.0}) == 0.0
    assert math.isclose(entropy([0.25] * 4), 2.0)


def test_gate_values():
    d = gate("xor-duplicate")
    assert math.isclose(mutual_information(d, 0, (1, 2, 3)), 1.0)
    assert abs(mutual_information(d, 0, (1,))) < 1e-15
    assert math.isclose(conditional_mutual_information(d, 0, 2, given=1), 1.0)
    # XOR: pairwise independent, jointly determined
    assert math.isclose(co_information(d, 0, 1, 2), -1.0)


def test_default_sources_are_all_others():
    d = random_simplex(seed=3)
    assert mutual_information(d) == mutual_information(d, 0, (1, 2, 3))


def test_bad_index():
    with pytest.raises(BadIndex):
        joint_entropy(gate("xor-loses"), (0, 5))


@given(distributions())
def test_chain_rule(d):
    # MI(T; X, Y, Z) = MI(T; X) + MI(T; Y | X) + MI(T; Z | X, Y)
    lhs = mutual_information(d, 0, (1, 2, 3))
    rhs = (mutual_information(d, 0, (1,)) + conditional_mutual_information(d, 0, 2, (1,))
           + conditional_mutual_information(d, 0, 3, (1, 2)))
    assert math.isclose(lhs, rhs, abs_tol=1e-12)


@given(distributions())
def test_bounds(d):
    h_t = joint_entropy(d, (0,))
    for srcs in [(1,), (2, 3), (1, 2, 3)]:
        mi = mutual_information(d, 0, srcs)
        assert -1e-12 <= mi <= h_t + 1e-12
    assert conditional_entropy(d, 0, (1, 2, 3)) >= -1e-12


@given(distributions())
def test_matches_independent_plug_in(d):
    pmf = dict(d.items())
    for srcs in [(1,), (1, 3), (1, 2, 3)]:
        assert math.isclose(mutual_information(d, 0, srcs), oracle.mi(pmf, srcs), abs_tol=1e-12)

import numpy as np
import pytest

from epsobol.core import Sample, VacuousHypothesisError, bounding_box_design
from epsobol.selection import Selector, SubsetError, nested_test
from epsobol.testing import ep_test
from epsobol.core import SubsetMask

from conftest import ishigami_frame


@pytest.fixture
def sample():
    df = ishigami_frame(3000, 2)
    return Sample(df["y"], df[["x1", "x2", "x3"]], ("x1", "x2", "x3"))


@pytest.fixture
def design(sample):
    return bounding_box_design(sample, 10, seed=5)


def test_nested_test_restricts_to_v(sample, design):
    a = nested_test(sample, [1], [1, 2], design)
    b = ep_test(sample.restrict([1, 2]), SubsetMask((0,), 2), design.project([1, 2]))
    assert a == b


def test_nested_test_errors(sample, design):
    with pytest.raises(SubsetError):
        nested_test(sample, [0], [1, 2], design)
    with pytest.raises(VacuousHypothesisError):
        nested_test(sample, [1], [1], design)


def test_screen_one_test_per_input(sample, design):
    sel = Selector(sample, design)
    screen = sel.screen()
    assert sel.tests_run == 3
    assert screen["x1"]["p_value"] < 0.01
    assert screen["x2"]["p_value"] < 0.05  # S(2) is only about 0.011
    assert screen["x3"]["p_value"] > 0.05


def test_empty_included_reproduces_screen(sample, design):
    state = Selector(sample, design).run([])
    assert state.add == {} and state.drop == {}
    direct = {j: nested_test(sample, [], [i], design).to_dict() for i, j in enumerate(sample.names)}
    assert state.screen == direct
    assert state.global_test["p_value"] < 0.01


def test_add_and_drop(sample, design):
    state = Selector(sample, design).run(["x1", "x2"])
    assert set(state.add) == {"x3"} and set(state.drop) == {"x1", "x2"}
    assert state.add["x3"]["p_value"] < 0.05  # x3 interacts with x1
    assert state.global_test == state.add["x3"]  # same hypothesis, same design


def test_saturated_model_has_no_global_test(sample, design):
    state = Selector(sample, design).run(["x1", "x2", "x3"])
    assert state.global_test is None and state.add == {}


def test_greedy_adds_influential_inputs(sample, design):
    state = Selector(sample, design).run([], greedy_alpha=0.05)
    # x2 carries about 1% of the variance and may stay out at this sample size
    assert {"x1", "x3"} <= set(state.included)
    assert state.history[0].input == "x1"
    assert all(d.action == "add" for d in state.history)


def test_unknown_input(sample, design):
    with pytest.raises(SubsetError):
        Selector(sample, design).run(["x9"])

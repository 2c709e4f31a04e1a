import random

import pytest

from hypersynth import Controller, build_parameter_space, impose, reach_probs, root_node
from hypersynth.analysis import extremal_reach
from hypersynth.counterexamples import (
    CeSide,
    build_deflated,
    complement_boxes,
    conflict_classes,
    deflated_reach,
    grow_conflict,
)

from conftest import notes_example, random_model


def test_build_deflated_shape(notes_mdp):
    mc = impose(notes_mdp, Controller((0, 0, 0, 0)))
    weights = (0.5, 0.5, 1.0, 0.0)
    d = build_deflated(mc, frozenset({0}), weights)
    n = notes_mdp.num_states
    assert d.num_states == n + 2
    # kept state keeps its original row
    assert d.trans[0] == mc.trans[0]
    # dropped states go to top with their weight, bottom with the rest
    assert d.trans[1] == ((n, 0.5), (n + 1, 0.5))
    assert d.trans[2] == ((n, 1.0),)
    assert d.trans[3] == ((n + 1, 1.0),)
    # top and bottom absorb
    assert d.trans[n] == ((n, 1.0),)
    assert d.trans[n + 1] == ((n + 1, 1.0),)


def test_deflation_brackets_member_value():
    # with the node's extremal vectors as exit weights, the deflated value
    # brackets the true value from the matching side, for any kept set
    rng = random.Random(3)
    for _ in range(60):
        m = random_model(rng, max_states=6)
        target = m.target("goal")
        lo = extremal_reach(m, target, "min").values
        hi = extremal_reach(m, target, "max").values
        ctrl = Controller(tuple(rng.randrange(m.num_actions(s)) for s in range(m.num_states)))
        mc = impose(m, ctrl)
        true = reach_probs(mc, target)
        root = rng.randrange(m.num_states)
        keep = frozenset(rng.sample(range(m.num_states), rng.randint(0, m.num_states - 1)))
        tset = frozenset(target.states)
        below = deflated_reach(mc, keep, tuple(lo), tset, root)
        above = deflated_reach(mc, keep, tuple(hi), tset, root)
        assert below <= true[root] + 1e-9
        assert above >= true[root] - 1e-9


def test_grow_conflict_on_worked_example():
    m, spec = notes_example()
    space = build_parameter_space(m, 1, spec.constraints)
    node = root_node(space)
    lo = extremal_reach(m, m.target("target"), "min").values
    mc = impose(m, Controller((0, 0, 0, 0)))  # violates at state 0: 0.7 > 0.6
    left = CeSide(mc, 0, frozenset({2}), tuple(lo))
    got = grow_conflict(left, 0.6, 0.0, 1e-7, [m.num_actions(s) for s in range(4)])
    assert got is not None
    keep_left, keep_right = got
    # the violation is certified by the choice at state 0 alone: dropping
    # everything else still pushes the value above 0.6
    assert keep_left == frozenset({0})
    assert keep_right == frozenset()
    # and the matching classes name exactly the state-0 choice
    ks = conflict_classes(space, node, 0, keep_left, None, keep_right)
    assert ks == (space.class_index(0, 0),)


def test_grow_conflict_gives_up_without_certificate():
    m, _ = notes_example()
    lo = extremal_reach(m, m.target("target"), "min").values
    mc = impose(m, Controller((1, 1, 0, 0)))  # satisfies: 0.4 <= 0.6
    left = CeSide(mc, 0, frozenset({2}), tuple(lo))
    got = grow_conflict(left, 0.6, 0.0, 1e-7, [m.num_actions(s) for s in range(4)])
    assert got is None


def test_complement_boxes_partition_counts():
    rng = random.Random(17)
    for _ in range(200):
        m = random_model(rng)
        space = build_parameter_space(m, rng.randint(1, 2))
        node = root_node(space)
        for k in range(space.n_classes):
            if len(node.domain(k)) > 1 and rng.random() < 0.25:
                keep = sorted(rng.sample(node.domain(k), rng.randint(1, len(node.domain(k)))))
                node = node.with_domain(k, tuple(keep))
        real = tuple(rng.choice(node.domain(k)) for k in range(space.n_classes))
        pool = [k for k in range(space.n_classes) if len(node.domain(k)) > 1]
        classes = tuple(sorted(rng.sample(pool, min(len(pool), rng.randint(0, 3)))))
        agree, rest = complement_boxes(node, real, classes)
        # the agreeing box plus the complements tile the node exactly
        assert agree.size() + sum(b.size() for b in rest) == node.size()
        assert agree.contains(real)
        assert not any(b.contains(real) for b in rest)
        for _ in range(10):
            sample = tuple(rng.choice(node.domain(k)) for k in range(space.n_classes))
            hits = agree.contains(sample) + sum(b.contains(sample) for b in rest)
            assert hits == 1


def test_scalar_sides_pass_through():
    m, _ = notes_example()
    space = build_parameter_space(m, 1)
    node = root_node(space)
    ks = conflict_classes(space, node, None, None, None, None)
    assert ks == ()
    agree, rest = complement_boxes(node, node.first_realisation(), ())
    assert agree.size() == node.size() and rest == []

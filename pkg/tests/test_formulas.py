from hypersynth.formulas import (
    FALSE,
    TRUE,
    Atom,
    Query,
    atoms_in,
    evaluate,
    f_and,
    f_atom,
    f_or,
    mandatory_atoms,
    substitute,
)


def q(state):
    return Query("reach", 0, state, "goal")


def test_atom_holds():
    a = Atom(q(0), 0.5, strict=False)
    assert a.holds(0.5, 0.5)
    assert not a.holds(0.6, 0.5)
    s = Atom(q(0), q(1), strict=True)
    assert s.holds(0.4, 0.5)
    assert not s.holds(0.5, 0.5)
    o = Atom(q(0), q(1), strict=False, offset=0.1)
    assert o.holds(0.6, 0.5)
    assert not o.holds(0.61, 0.5)


def test_connective_folding():
    assert f_and([TRUE, TRUE]) == TRUE
    assert f_and([TRUE, FALSE]) == FALSE
    assert f_or([FALSE, FALSE]) == FALSE
    assert f_or([FALSE, TRUE]) == TRUE
    assert f_and([f_atom(0)]) == f_atom(0)
    assert f_and([TRUE, f_atom(1)]) == f_atom(1)
    assert f_or([FALSE, f_atom(1)]) == f_atom(1)
    # nested same-op nodes flatten
    node = f_and([f_atom(0), f_and([f_atom(1), f_atom(2)])])
    assert node == ("and", (f_atom(0), f_atom(1), f_atom(2)))


def test_evaluate_and_substitute():
    node = f_and([f_atom(0), f_or([f_atom(1), f_atom(2)])])
    assert evaluate(node, {0: True, 1: False, 2: True})
    assert not evaluate(node, {0: True, 1: False, 2: False})
    part = substitute(node, {1: False})
    assert part == f_and([f_atom(0), f_atom(2)])
    assert substitute(node, {0: False}) == FALSE
    assert substitute(node, {0: True, 2: True}) == TRUE


def test_atom_order_and_mandatory():
    node = f_or([f_and([f_atom(2), f_atom(0)]), f_and([f_atom(2), f_atom(1)])])
    assert atoms_in(node) == (2, 0, 1)
    # an atom is mandatory when every way of satisfying needs it
    assert mandatory_atoms(node) == {2}
    assert mandatory_atoms(f_and([f_atom(0), f_atom(1)])) == {0, 1}
    assert mandatory_atoms(f_or([f_atom(0), f_atom(1)])) == set()
    assert mandatory_atoms(TRUE) == set()

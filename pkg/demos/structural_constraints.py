"""How same() and obs() ties reshape the search space.

Both constraints merge per-state choices into shared parameter classes:
same() across controllers at one state, obs() across states one controller
cannot tell apart.  Fewer classes means a smaller family and coarser
splits.
"""

from hypersynth import build_parameter_space, parse_model, parse_spec, synthesize

MODEL = """\
mdp
states 4
action 0 0 a
action 0 1 b
action 1 0 a
action 1 1 b
trans 0 0 2 0.7
trans 0 0 3 0.3
trans 0 1 2 0.4
trans 0 1 3 0.6
trans 1 0 2 0.65
trans 1 0 3 0.35
trans 1 1 2 0.5
trans 1 1 3 0.5
trans 2 0 2 1.0
trans 3 0 3 1.0
label target 2
"""

FREE = (
    "exists c1, c2 : forall s in {0} [c1], forall t in {0} [c2] :"
    " P(s, F target) <= P(t, F target)\n"
)
TIED = (
    "exists c1, c2 : same(0, {c1, c2}) & obs({0, 1}, c1) ;"
    " forall s in {0} [c1], forall t in {0} [c2] :"
    " P(s, F target) <= P(t, F target)\n"
)

m = parse_model(MODEL)
for label, text in (("unconstrained", FREE), ("tied", TIED)):
    spec = parse_spec(text)
    space = build_parameter_space(m, spec.n_controllers, spec.constraints)
    print(f"{label}: {space.n_classes} classes, family size {space.family_size()}")
    for k in range(space.n_classes):
        if len(space.domains[k]) > 1:
            print("   ", space.describe_class(k), "choices", space.domains[k])
    out = synthesize(m, spec)
    print("    verdict:", out.verdict, "in", out.stats["iterations"], "iterations")

# One bit of controller memory, paid for in family size.
# unfold_memory() products the state space with a private memory register;
# every action choice then also decides the next memory value, and the
# lifted spec pins quantifiers to memory value 0.

from hypersynth import (
    build_parameter_space,
    lift_spec_memory,
    parse_model,
    parse_spec,
    synthesize,
    unfold_memory,
)

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

SPEC = "exists sigma : forall s in {0, 1} [sigma] : P(s, F target) <= 0.6\n"

m = parse_model(MODEL)
spec = parse_spec(SPEC)
space = build_parameter_space(m, spec.n_controllers, spec.constraints)

mu = unfold_memory(m, 1)
spec_u = lift_spec_memory(spec, 1)
space_u = build_parameter_space(mu, spec_u.n_controllers, spec_u.constraints)

base = space.family_size()
print(f"base model: {m.num_states} states, family {base}, "
      f"{space.n_classes} classes")
print(f"1 bit:      {mu.num_states} states, family {space_u.family_size()}")
print(f"law check:  base^2 * 4^classes = {base ** 2 * 4 ** space.n_classes}")

print("lifted menu at (state 0, mem 0):",
      [mu.action_name(0, a) for a in range(mu.num_actions(0))])

out = synthesize(mu, spec_u)
print("verdict on the unfolded family:", out.verdict,
      "after", out.stats["iterations"], "iterations")

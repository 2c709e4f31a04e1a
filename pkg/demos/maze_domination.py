# Two maze questions: can any policy dominate its own start, and how
# different can two structurally tied policies be made?

from hypersynth import generate, synthesize

# No memoryless policy reaches the goal better from the far corner than
# from next door, so the spec is unfeasible; the run has to account for
# every one of the 16384 members before saying so.
m, spec = generate("maze-sd")
out = synthesize(m, spec)
print("plain maze:", out.verdict)
print("  explored fraction:", out.stats["explored_fraction"])
print("  iterations:", out.stats["iterations"],
      "splits:", out.stats["splits"])

# The checkpoint variant asks for two observation-tied policies with equal
# checkpoint-entry reward, as far apart in their choices as possible.
m, spec = generate("maze-sd", variant="checkpoint")
out = synthesize(m, spec, mode="optimal")
print("checkpoint maze:", out.verdict)
print("  best distance:", out.optimal_value)
if out.feasible:
    a, b = out.witness
    diff = [s for s in range(m.num_states) if a[s] != b[s]]
    # the distance counts tied decision pairs, so the observation classes
    # (1,2,3) and (6,7,8) each contribute once however many states differ
    print("  controllers differ at states:", diff)

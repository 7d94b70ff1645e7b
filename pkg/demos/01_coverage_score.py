# %% [markdown]
# # Measuring coverage
#
# The coverage score integrates, over a bounded objective space, the
# pointwise maximum of Gaussian kernels centred on visited states.  Two
# far-apart states each contribute a full unit of mass; a third state close
# to an existing one adds much less.

# %%
import numpy as np

from covexplorer.coverage import ObjectiveSpace, OccupancyField, score_states

space = ObjectiveSpace(projection=(0,), bounds=[(0.0, 100.0)], sigma=3.0)
print("two distant states   :", round(score_states(space, [[20.0], [60.0]]), 4))
print("plus a nearby state  :", round(score_states(space, [[20.0], [25.0], [60.0]]), 4))
print("plus a duplicate     :", round(score_states(space, [[20.0], [20.0], [60.0]]), 4))

# %% [markdown]
# The field is mutable and only ever grows.  Occupancy (kernel height over
# the peak) is what the target sampler consults.

# %%
field = OccupancyField(space)
for x in (20.0, 60.0, 61.0, 90.0):
    field.insert([[x]])
    print(f"after {x:5.1f}: score={field.score():.4f}")
for q in (20.0, 23.0, 40.0):
    print(f"occupancy at {q}: {field.occupancy_at([q]):.3f}")

# %% [markdown]
# Scores of 2-D trajectories work the same way; here a straight line versus
# a zig-zag of equal length in a 100 x 100 box.

# %%
plane = ObjectiveSpace((0, 1), [(0, 100), (0, 100)])
t = np.linspace(0, 1, 200)
straight = np.column_stack([100 * t, np.full_like(t, 50)])
zigzag = np.column_stack([100 * t, 50 + 40 * np.sign(np.sin(12 * np.pi * t)) * t])
print("straight:", round(score_states(plane, straight), 2))
print("zig-zag :", round(score_states(plane, zigzag), 2))

# %% [markdown]
# # ACAS Xu encounters with stub networks
#
# The ownship follows network advisories; the intruder's turn rate is the
# input under test.  The package ships five small hand-built networks in
# NNet format so this runs without the real tables.  Point
# `AcasXuPlant(network_dir=...)` at the public files to use those instead.

# %%
import numpy as np

from covexplorer.plants import ADVISORIES, AcasXuPlant, encounter_geometry

plant = AcasXuPlant()
print("network inputs at start (rho, theta, psi):",
      np.round(encounter_geometry(plant.x0[:3], plant.x0[3:6]), 3))

for turn_deg in (0.0, 1.5, -3.0):
    trace = plant.simulate(np.full((60, 1), np.deg2rad(turn_deg)))
    advisories = [ADVISORIES[int(a)] for a in trace.states[:, 6]]
    sep = np.hypot(*(trace.states[:, 3:5] - trace.states[:, 0:2]).T)
    changes = [(k, a) for k, a in enumerate(advisories) if k and a != advisories[k - 1]]
    print(f"intruder turn {turn_deg:+.1f} deg/s: min separation {sep.min():7.0f} ft, "
          f"advisory changes {changes[:6]}")

# %% [markdown]
# The same pipeline runs on this plant; absolute scores mean little with
# stub networks, so this is a smoke run.

# %%
from covexplorer.pipeline import TrainParams, compare_methods

report = compare_methods(plant, 10, [0], TrainParams(iterations=2, sim_count=8,
                                                      cluster_count=3, steps=60))
for row in report["rows"]:
    print(f"{row['method']:16s} {row['mean']:.2f}")

# %% [markdown]
# # Coverage-guided test cases versus random inputs
#
# Both methods get the same number of test cases and the same trace
# length; each suite is scored on a fresh field.  This takes a few minutes.

# %%
from covexplorer.pipeline import TrainParams, compare_methods
from covexplorer.plants import KinematicCar, PointMass

for plant in (KinematicCar(), PointMass()):
    report = compare_methods(plant, count=50, seeds=[0, 1, 2], params=TrainParams(steps=100))
    print(plant.name)
    for row in report["rows"]:
        print(f"  {row['method']:16s} {row['mean']:8.2f} +- {row['std']:6.2f}"
              f"  ({row['plant_steps']} plant steps)")

"""Systems under test."""

from .acasxu import (ADVISORIES, AcasScenario, AcasXuPlant, dubins_encounter_step,
                     encounter_geometry, load_acas_networks, nn_advisory, stub_network,
                     stub_networks)
from .base import IntegrationError, Plant, step_rk4
from .nnet import NNetNetwork, NNetParseError, load_nnet, parse_nnet, write_nnet
from .simple import KinematicCar, PointMass, kinematic_car_derivative, point_mass_step

PLANTS = {
    PointMass.name: PointMass,
    KinematicCar.name: KinematicCar,
    AcasXuPlant.name: AcasXuPlant,
}


def make_plant(name: str, **params) -> Plant:
    try:
        cls = PLANTS[name]
    except KeyError:
        raise ValueError(f"unknown plant {name!r}; choose from {sorted(PLANTS)}") from None
    return cls(**params)

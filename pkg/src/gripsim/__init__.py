"""Proximity-sensor-driven grasp simulation for a two-finger parallel gripper.

The package couples a reflected-light-intensity sensor model, a three-layer
cascaded impedance/admittance controller and a Baumgarte-stabilized contact
plant into deterministic closed-loop scenarios, and ships the sweep
harnesses used to compare the control variants.
"""

from .controller import (
    ControlCase,
    ControllerParams,
    VirtualState,
    controller_step,
    impedance_input,
    step_layer2,
    step_layer3,
    trajectory_planner,
    virtual_force_proximity,
    virtual_force_simultaneous,
)
from .plant import (
    ContactState,
    CsmGains,
    PlantConfig,
    SimState,
    SimulationDiverged,
    csm_contact_force,
    step,
    update_contact_set,
)
from .scenario import (
    POSITION_SWEEP_DEFAULT,
    REFLECTANCE_PAIRS_DEFAULT,
    TIMESERIES_COLUMNS,
    ConfigError,
    ScenarioConfig,
    ScenarioReport,
    compare_impact,
    predicted_center_offset,
    run_scenario,
    sweep_positions,
    sweep_reflectances,
)
from .sensor import (
    ObjectGeometry,
    SensorParams,
    SurfaceReflectance,
    gap_distance,
    sensor_output,
    sensor_rate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ControlCase",
    "ControllerParams",
    "VirtualState",
    "controller_step",
    "impedance_input",
    "step_layer2",
    "step_layer3",
    "trajectory_planner",
    "virtual_force_proximity",
    "virtual_force_simultaneous",
    "ContactState",
    "CsmGains",
    "PlantConfig",
    "SimState",
    "SimulationDiverged",
    "csm_contact_force",
    "step",
    "update_contact_set",
    "POSITION_SWEEP_DEFAULT",
    "REFLECTANCE_PAIRS_DEFAULT",
    "TIMESERIES_COLUMNS",
    "ConfigError",
    "ScenarioConfig",
    "ScenarioReport",
    "compare_impact",
    "predicted_center_offset",
    "run_scenario",
    "sweep_positions",
    "sweep_reflectances",
    "ObjectGeometry",
    "SensorParams",
    "SurfaceReflectance",
    "gap_distance",
    "sensor_output",
    "sensor_rate",
]

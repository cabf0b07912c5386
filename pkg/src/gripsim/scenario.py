"""Closed-loop grasp scenarios, evaluation metrics and sweep harnesses.

A scenario wires sensor, controller and plant together at a single fixed
rate, records the full time series, and distills the grasp metrics used in
the comparison tables: per-finger time to contact, contact-time difference,
impact speed, peak and steady contact forces, and the trajectory of the
balancing layer's virtual object.  Runs are deterministic; sweep cells are
independent of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .controller import ControlCase, ControllerParams, _controller_step
from .plant import PlantConfig, SimulationDiverged, _plant_rk4, _resolve_contacts
from .sensor import SensorParams, SurfaceReflectance, _output, _rate

__all__ = [
    "TIMESERIES_COLUMNS",
    "POSITION_SWEEP_DEFAULT",
    "REFLECTANCE_PAIRS_DEFAULT",
    "ConfigError",
    "ScenarioConfig",
    "ScenarioReport",
    "run_scenario",
    "sweep_positions",
    "sweep_reflectances",
    "compare_impact",
    "predicted_center_offset",
]

# Column layout of the per-run time series (and of timeseries.csv).
TIMESERIES_COLUMNS = (
    "t", "x1", "x2", "v1", "v2", "u1", "u2", "fc1", "fc2",
    "xi1", "xi2", "fs", "fp1", "fp2", "xv2", "xv1_1", "xv1_2",
)

# Object center positions of the published position sweep (m).
POSITION_SWEEP_DEFAULT = (0.00, 0.01, 0.02, 0.03, 0.04, 0.05)

# Reflectance ratios of white, blue, red, brown and black paper, applied to
# both sides, plus the mixed brown/white pair both ways around.
REFLECTANCE_PAIRS_DEFAULT = (
    (1.00, 1.00), (0.93, 0.93), (0.92, 0.92), (0.86, 0.86), (0.57, 0.57),
    (0.86, 1.00), (1.00, 0.86),
)

# Contact must persist this long before an activation counts as the
# time-to-contact event (metrics only; the dynamics are untouched).
CONTACT_DWELL = 0.010

# Width of the trailing window used for steady-state averages (s).
STEADY_WINDOW = 0.5

# Relative spread allowed inside the steady window before a run is flagged
# as not converged.
STEADY_RTOL = 1e-6


class ConfigError(ValueError):
    """A scenario configuration violates one or more invariants."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one closed-loop run.

    Defaults reproduce the reference setup: full cascade, white surfaces,
    object of width 0.07 m centered at +0.03 m.  Runs are seed-free and
    deterministic.

    ``virtual_init`` selects where the per-finger virtual objects start:
    ``"finger"`` parks each at its own finger for a bumpless start (zero
    actuation at t = 0), ``"center"`` parks both at the gripper center,
    which makes the reduced cases collapse onto each other exactly.  The
    balancing layer's virtual object always starts at the gripper center.
    """

    case: ControlCase = ControlCase.SIMULTANEOUS
    sensor: SensorParams = field(default_factory=SensorParams)
    reflectance: SurfaceReflectance = field(default_factory=SurfaceReflectance)
    controller: ControllerParams = field(default_factory=ControllerParams)
    plant: PlantConfig = field(default_factory=PlantConfig)
    virtual_init: str = "finger"

    @property
    def x_m(self) -> float:
        return self.plant.geometry.x_m

    @property
    def t_end(self) -> float:
        return self.plant.t_end

    def with_x_m(self, x_m: float) -> "ScenarioConfig":
        geo = replace(self.plant.geometry, x_m=float(x_m))
        return replace(self, plant=replace(self.plant, geometry=geo))

    def with_case(self, case: ControlCase | int) -> "ScenarioConfig":
        return replace(self, case=ControlCase(case))

    def with_reflectance(self, alpha1: float, alpha2: float) -> "ScenarioConfig":
        ref = SurfaceReflectance(float(alpha1), float(alpha2))
        return replace(self, reflectance=ref)

    def violations(self) -> list[str]:
        out = []
        try:
            ControlCase(self.case)
        except ValueError:
            out.append("scenario.case must be 0, 1 or 2")
        if self.virtual_init not in ("finger", "center"):
            out.append("scenario.virtual_init must be 'finger' or 'center'")
        out += self.sensor.violations()
        out += self.reflectance.violations()
        out += self.controller.violations()
        out += self.plant.violations()
        return out

    def validate(self) -> "ScenarioConfig":
        problems = self.violations()
        if problems:
            raise ConfigError("; ".join(problems))
        return self


@dataclass(frozen=True)
class ScenarioReport:
    """Metrics and full time series of one run.

    ``t_contact`` entries are ``nan`` if a finger never held contact.  For
    the reduced cases 0/1 the ``x_v2`` fields describe the live gripper
    center instead of the (frozen) layer-3 virtual object.
    """

    case: ControlCase
    x_m: float
    alpha: tuple[float, float]
    t_contact: tuple[float, float]
    dt_contact: float
    v_impact: tuple[float, float]
    peak_force: tuple[float, float]
    f_c_final: tuple[float, float]
    x_v2_final: float
    x_v2_max: float
    converged: bool
    series: np.ndarray
    contact_active: np.ndarray


@njit(cache=True)
def _run_loop(case, m1, m2, x10, x20, face1, face2, a_csm, b_csm, dt, n_steps,
              init_at_center, k_gain, n_diff, l_offset, alpha1, alpha2,
              m_a2, d_a2, k_a2, k_s, m_a1, d_a1, k_a1, d_p1, d_p2, d_i, k_i):
    series = np.zeros((n_steps + 1, 17))
    active = np.zeros((n_steps + 1, 2), dtype=np.uint8)

    x1 = x10
    v1 = 0.0
    x2 = x20
    v2 = 0.0
    x_d0 = 0.5 * (x10 + x20)
    xv2 = x_d0
    vv2 = 0.0
    if init_at_center:
        xv11 = x_d0
        xv12 = x_d0
    else:
        xv11 = x10
        xv12 = x20
    vv11 = 0.0
    vv12 = 0.0
    act1 = False
    act2 = False
    status = -1

    for i in range(n_steps + 1):
        gap1 = x1 - face1
        gap2 = face2 - x2
        xi1 = _output(gap1, alpha1, k_gain, n_diff, l_offset)
        xi2 = _output(gap2, alpha2, k_gain, n_diff, l_offset)
        xid1 = _rate(gap1, v1, alpha1, k_gain, n_diff, l_offset)
        xid2 = _rate(gap2, -v2, alpha2, k_gain, n_diff, l_offset)

        (u1, u2, nxv2, nvv2, nxv11, nvv11, nxv12, nvv12,
         f_s, f_p1, f_p2, _x_d) = _controller_step(
            case, xi1, xi2, xid1, xid2, x1, v1, x2, v2,
            xv2, vv2, xv11, vv11, xv12, vv12,
            m_a2, d_a2, k_a2, k_s, m_a1, d_a1, k_a1, d_p1, d_p2,
            d_i, k_i, dt)

        act1, act2, lam1, lam2 = _resolve_contacts(
            x1, v1, x2, v2, u1, u2, act1, act2,
            m1, m2, face1, face2, a_csm, b_csm)

        series[i, 0] = i * dt
        series[i, 1] = x1
        series[i, 2] = x2
        series[i, 3] = v1
        series[i, 4] = v2
        series[i, 5] = u1
        series[i, 6] = u2
        series[i, 7] = lam1
        series[i, 8] = -lam2
        series[i, 9] = xi1
        series[i, 10] = xi2
        series[i, 11] = f_s
        series[i, 12] = f_p1
        series[i, 13] = f_p2
        series[i, 14] = xv2
        series[i, 15] = xv11
        series[i, 16] = xv12
        active[i, 0] = 1 if act1 else 0
        active[i, 1] = 1 if act2 else 0

        if i == n_steps:
            break

        xv2 = nxv2
        vv2 = nvv2
        xv11 = nxv11
        vv11 = nvv11
        xv12 = nxv12
        vv12 = nvv12
        x1, v1, x2, v2 = _plant_rk4(x1, v1, x2, v2, u1, u2, act1, act2,
                                    m1, m2, face1, face2, a_csm, b_csm, dt)
        if not (math.isfinite(x1) and math.isfinite(v1)
                and math.isfinite(x2) and math.isfinite(v2)):
            status = i
            break

    return series, active, status


def _first_confirmed_contact(flags: np.ndarray, dwell_steps: int) -> int | None:
    """Index of the first activation that persists for ``dwell_steps`` rows."""
    on = flags.astype(bool)
    starts = np.flatnonzero(on & ~np.concatenate(([False], on[:-1])))
    for i in starts:
        if on[i:i + dwell_steps].all():
            return int(i)
    return None


def _steady(values: np.ndarray) -> tuple[float, bool]:
    mean = float(values.mean())
    spread = float(values.max() - values.min())
    return mean, spread <= STEADY_RTOL * max(abs(mean), 1.0)


def run_scenario(cfg: ScenarioConfig) -> ScenarioReport:
    """Execute one closed-loop run and distill its grasp metrics."""
    cfg.validate()
    plant = cfg.plant
    geo = plant.geometry
    n_steps = int(round(plant.t_end / plant.dt))
    if n_steps < 1:
        raise ConfigError("plant.t_end must cover at least one step")

    series, active, status = _run_loop(
        int(cfg.case), plant.m[0], plant.m[1], plant.x_init[0], plant.x_init[1],
        geo.face_1, geo.face_2, plant.csm.a_gain, plant.csm.b_gain,
        plant.dt, n_steps,
        cfg.sensor.k_gain, cfg.sensor.n_diff, cfg.sensor.l_offset,
        cfg.reflectance.alpha_rel_1, cfg.reflectance.alpha_rel_2,
        cfg.controller.m_a2, cfg.controller.d_a2, cfg.controller.k_a2,
        cfg.controller.k_s, cfg.controller.m_a1, cfg.controller.d_a1,
        cfg.controller.k_a1, cfg.controller.d_p1, cfg.controller.d_p2,
        cfg.controller.d_i, cfg.controller.k_i)
    if status >= 0:
        raise SimulationDiverged(status, status * plant.dt)

    dwell_steps = max(1, int(round(CONTACT_DWELL / plant.dt)))
    t_contact = []
    v_impact = []
    for j in (0, 1):
        hit = _first_confirmed_contact(active[:, j], dwell_steps)
        if hit is None:
            t_contact.append(math.nan)
            v_impact.append(math.nan)
        else:
            t_contact.append(float(series[hit, 0]))
            v_impact.append(abs(float(series[hit, 3 + j])))
    dt_contact = abs(t_contact[0] - t_contact[1])

    peak_force = (float(np.abs(series[:, 7]).max()),
                  float(np.abs(series[:, 8]).max()))

    window = slice(-(int(round(STEADY_WINDOW / plant.dt)) + 1), None)
    if cfg.case == ControlCase.SIMULTANEOUS:
        xv2_track = series[:, 14]
    else:
        xv2_track = 0.5 * (series[:, 1] + series[:, 2])
    fc1_mean, ok1 = _steady(series[window, 7])
    fc2_mean, ok2 = _steady(series[window, 8])
    xv2_mean, ok3 = _steady(xv2_track[window])

    return ScenarioReport(
        case=cfg.case,
        x_m=geo.x_m,
        alpha=(cfg.reflectance.alpha_rel_1, cfg.reflectance.alpha_rel_2),
        t_contact=(t_contact[0], t_contact[1]),
        dt_contact=dt_contact,
        v_impact=(v_impact[0], v_impact[1]),
        peak_force=peak_force,
        f_c_final=(fc1_mean, fc2_mean),
        x_v2_final=xv2_mean,
        x_v2_max=float(xv2_track.max()),
        converged=ok1 and ok2 and ok3,
        series=series,
        contact_active=active,
    )


def predicted_center_offset(alpha1: float, alpha2: float,
                            params: ControllerParams) -> float:
    """Closed-form steady offset of the balancing layer for unequal sides.

    With both fingers resting on the object the two readings settle to the
    zero-gap value scaled by each side's reflectance, so the balance force
    and the layer-3 spring reach equilibrium at this offset from the
    gripper center.  Zero for equal reflectances.
    """
    ratio = (alpha1 - alpha2) / (alpha1 + alpha2)
    return params.k_s / params.k_a2 * math.tanh(ratio)


def _run_cell(cfg: ScenarioConfig, labels: dict) -> dict:
    cell = dict(labels)
    try:
        cell["report"] = run_scenario(cfg)
        cell["error"] = None
    except (ConfigError, SimulationDiverged) as exc:
        cell["report"] = None
        cell["error"] = f"{type(exc).__name__}: {exc}"
    return cell


def sweep_positions(cases=(ControlCase.IMPACT_REDUCTION, ControlCase.SIMULTANEOUS),
                    x_m_list=POSITION_SWEEP_DEFAULT,
                    base: ScenarioConfig | None = None) -> list[dict]:
    """Run every (case, object center) combination of the position sweep.

    Returns one cell per combination, in the declared order, each carrying
    the labels, the report, and an ``error`` string instead of a report for
    cells that failed.
    """
    base = base if base is not None else ScenarioConfig()
    cells = []
    for x_m in x_m_list:
        for case in cases:
            cfg = base.with_case(case).with_x_m(x_m)
            cells.append(_run_cell(cfg, {"x_m": float(x_m), "case": int(case)}))
    return cells


def sweep_reflectances(pairs=REFLECTANCE_PAIRS_DEFAULT,
                       base: ScenarioConfig | None = None) -> list[dict]:
    """Run the full-cascade scenario once per reflectance pair.

    Each cell also carries the closed-form prediction of the steady offset
    between the balancing layer's virtual object and the gripper center.
    """
    base = base if base is not None else ScenarioConfig()
    cells = []
    for alpha1, alpha2 in pairs:
        cfg = base.with_case(ControlCase.SIMULTANEOUS).with_reflectance(alpha1, alpha2)
        cell = _run_cell(cfg, {"alpha1": float(alpha1), "alpha2": float(alpha2)})
        cell["offset_predicted"] = predicted_center_offset(alpha1, alpha2,
                                                           base.controller)
        cells.append(cell)
    return cells


def compare_impact(x_m: float | None = None,
                   base: ScenarioConfig | None = None) -> list[dict]:
    """Run all three control cases at identical geometry.

    The resulting cells expose the per-finger speed at contact and the peak
    contact force, the quantities that show how much the upper layers
    soften the touch.
    """
    base = base if base is not None else ScenarioConfig()
    if x_m is not None:
        base = base.with_x_m(x_m)
    cells = []
    for case in (ControlCase.FORCE_ONLY, ControlCase.IMPACT_REDUCTION,
                 ControlCase.SIMULTANEOUS):
        cfg = base.with_case(case)
        cells.append(_run_cell(cfg, {"case": int(case), "x_m": base.x_m}))
    return cells

"""Finger dynamics and unilateral contact with the fixed rigid object.

Each finger is an independent unit-DOF mass driven by its actuation force
plus, while touching the object, a constraint force.  Touch is handled with
Baumgarte stabilization: instead of enforcing the hard stop directly, the
constraint force is chosen so the penetration error follows the stable
dynamics ``C'' + 2a C' + b^2 C = 0``.  The active contact set is resolved
once per step from the gap signs and the adhesion test, then held fixed
while a classical RK4 step advances the fingers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from numba import njit

from .sensor import ObjectGeometry

__all__ = [
    "CsmGains",
    "PlantConfig",
    "ContactState",
    "SimState",
    "SimulationDiverged",
    "csm_contact_force",
    "update_contact_set",
    "step",
]


class SimulationDiverged(RuntimeError):
    """A finger state became non-finite; carries the offending step index."""

    def __init__(self, step_index: int, t: float):
        self.step_index = step_index
        self.t = t
        super().__init__(f"non-finite state after step {step_index} (t = {t:.6g} s)")


@dataclass(frozen=True)
class CsmGains:
    """Constraint-stabilization feedback rates (1/s).

    Equal gains give a critically damped penetration error with settling
    time well below the grasp timescales.
    """

    a_gain: float = 5000.0
    b_gain: float = 5000.0

    def violations(self, prefix: str = "plant") -> list[str]:
        out = []
        if not self.a_gain > 0:
            out.append(f"{prefix}.a_gain must be positive")
        if not self.b_gain > 0:
            out.append(f"{prefix}.b_gain must be positive")
        return out


@dataclass(frozen=True)
class PlantConfig:
    """Masses, initial pose, object geometry and integration settings."""

    m: tuple[float, float] = (0.5, 0.5)
    x_init: tuple[float, float] = (0.11, -0.11)
    geometry: ObjectGeometry = field(default_factory=ObjectGeometry)
    csm: CsmGains = field(default_factory=CsmGains)
    dt: float = 1e-4
    t_end: float = 6.0

    def violations(self, prefix: str = "plant") -> list[str]:
        out = []
        for j in (0, 1):
            if not self.m[j] > 0:
                out.append(f"{prefix}.m{j + 1} must be positive")
        out += self.geometry.violations(prefix)
        if self.geometry.width > 0:
            if not self.x_init[0] > self.geometry.face_1:
                out.append(f"{prefix}.x_init1 must start outside the object (> x_m + width/2)")
            if not self.x_init[1] < self.geometry.face_2:
                out.append(f"{prefix}.x_init2 must start outside the object (< x_m - width/2)")
        out += self.csm.violations(prefix)
        if not self.dt > 0:
            out.append(f"{prefix}.dt must be positive")
        if not self.t_end > 0:
            out.append(f"{prefix}.t_end must be positive")
        return out


@dataclass(frozen=True)
class ContactState:
    """Active flags and x-axis contact forces, one entry per finger.

    The force pushes the finger away from the object, so entry 0 is
    non-negative and entry 1 non-positive; inactive contacts carry zero.
    """

    active: tuple[bool, bool] = (False, False)
    force: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class SimState:
    """Finger positions/velocities, contact state and simulation time."""

    x: tuple[float, float]
    v: tuple[float, float] = (0.0, 0.0)
    contact: ContactState = field(default_factory=ContactState)
    t: float = 0.0


@njit(cache=True)
def _csm_lambda(c, c_dot, u_n, mass, a_gain, b_gain):
    # Force along the constraint normal that makes the penetration error
    # follow  c'' + 2a c' + b^2 c = 0  given  mass*c'' = u_n + lambda.
    return mass * (-2.0 * a_gain * c_dot - b_gain * b_gain * c) - u_n


@njit(cache=True)
def _resolve_contacts(x1, v1, x2, v2, u1, u2, act1, act2,
                      m1, m2, face1, face2, a_gain, b_gain):
    c1 = x1 - face1
    c2 = face2 - x2
    if not act1 and c1 <= 0.0:
        act1 = True
    if not act2 and c2 <= 0.0:
        act2 = True
    lam1 = 0.0
    lam2 = 0.0
    if act1:
        lam1 = _csm_lambda(c1, v1, u1, m1, a_gain, b_gain)
        if lam1 < 0.0:  # adhesive: release instead of pulling
            act1 = False
            lam1 = 0.0
    if act2:
        lam2 = _csm_lambda(c2, -v2, -u2, m2, a_gain, b_gain)
        if lam2 < 0.0:
            act2 = False
            lam2 = 0.0
    return act1, act2, lam1, lam2


@njit(cache=True)
def _accel(x, v, u, active, mass, face, sign, a_gain, b_gain):
    # sign maps between the x axis and the constraint normal:
    # +1 for finger 1 (c = x - face), -1 for finger 2 (c = face - x).
    if active:
        c = sign * (x - face)
        lam = _csm_lambda(c, sign * v, sign * u, mass, a_gain, b_gain)
        return (u + sign * lam) / mass
    return u / mass


@njit(cache=True)
def _plant_rk4(x1, v1, x2, v2, u1, u2, act1, act2,
               m1, m2, face1, face2, a_gain, b_gain, dt):
    # The contact set stays frozen over the step; the constraint force is
    # re-evaluated at every stage from the stage state.
    a11 = _accel(x1, v1, u1, act1, m1, face1, 1.0, a_gain, b_gain)
    a21 = _accel(x2, v2, u2, act2, m2, face2, -1.0, a_gain, b_gain)

    x1b = x1 + 0.5 * dt * v1
    v1b = v1 + 0.5 * dt * a11
    x2b = x2 + 0.5 * dt * v2
    v2b = v2 + 0.5 * dt * a21
    a12 = _accel(x1b, v1b, u1, act1, m1, face1, 1.0, a_gain, b_gain)
    a22 = _accel(x2b, v2b, u2, act2, m2, face2, -1.0, a_gain, b_gain)

    x1c = x1 + 0.5 * dt * v1b
    v1c = v1 + 0.5 * dt * a12
    x2c = x2 + 0.5 * dt * v2b
    v2c = v2 + 0.5 * dt * a22
    a13 = _accel(x1c, v1c, u1, act1, m1, face1, 1.0, a_gain, b_gain)
    a23 = _accel(x2c, v2c, u2, act2, m2, face2, -1.0, a_gain, b_gain)

    x1d = x1 + dt * v1c
    v1d = v1 + dt * a13
    x2d = x2 + dt * v2c
    v2d = v2 + dt * a23
    a14 = _accel(x1d, v1d, u1, act1, m1, face1, 1.0, a_gain, b_gain)
    a24 = _accel(x2d, v2d, u2, act2, m2, face2, -1.0, a_gain, b_gain)

    nx1 = x1 + dt * (v1 + 2.0 * v1b + 2.0 * v1c + v1d) / 6.0
    nv1 = v1 + dt * (a11 + 2.0 * a12 + 2.0 * a13 + a14) / 6.0
    nx2 = x2 + dt * (v2 + 2.0 * v2b + 2.0 * v2c + v2d) / 6.0
    nv2 = v2 + dt * (a21 + 2.0 * a22 + 2.0 * a23 + a24) / 6.0
    return nx1, nv1, nx2, nv2


def csm_contact_force(c: float, c_dot: float, u_n: float, mass: float,
                      gains: CsmGains) -> float:
    """Constraint force (along the constraint normal) for an active contact.

    ``c``/``c_dot`` are the gap and gap rate on the constraint axis and
    ``u_n`` the actuation force mapped onto that axis.  A positive result
    pushes the finger off the object; a negative one would be adhesive and
    means the contact should release instead.
    """
    return _csm_lambda(float(c), float(c_dot), float(u_n), float(mass),
                       gains.a_gain, gains.b_gain)


def update_contact_set(sim: SimState, u: tuple[float, float],
                       cfg: PlantConfig) -> ContactState:
    """Resolve the active contact set and forces for the coming step.

    A finger joins the set when its gap reaches zero and leaves it as soon
    as the solved constraint force turns adhesive.
    """
    geo = cfg.geometry
    act1, act2, lam1, lam2 = _resolve_contacts(
        sim.x[0], sim.v[0], sim.x[1], sim.v[1], float(u[0]), float(u[1]),
        sim.contact.active[0], sim.contact.active[1],
        cfg.m[0], cfg.m[1], geo.face_1, geo.face_2,
        cfg.csm.a_gain, cfg.csm.b_gain)
    return ContactState(active=(act1, act2), force=(lam1, -lam2))


def step(sim: SimState, u1: float, u2: float, cfg: PlantConfig) -> SimState:
    """Advance the fingers one fixed RK4 step under frozen actuation.

    The contact set in ``sim`` is held fixed for the whole step; call
    :func:`update_contact_set` first to refresh it.  Raises
    :class:`SimulationDiverged` when a state stops being finite.
    """
    geo = cfg.geometry
    nx1, nv1, nx2, nv2 = _plant_rk4(
        sim.x[0], sim.v[0], sim.x[1], sim.v[1], float(u1), float(u2),
        sim.contact.active[0], sim.contact.active[1],
        cfg.m[0], cfg.m[1], geo.face_1, geo.face_2,
        cfg.csm.a_gain, cfg.csm.b_gain, cfg.dt)
    t_new = sim.t + cfg.dt
    if not (math.isfinite(nx1) and math.isfinite(nv1)
            and math.isfinite(nx2) and math.isfinite(nv2)):
        raise SimulationDiverged(round(sim.t / cfg.dt), t_new)
    return SimState(x=(nx1, nx2), v=(nv1, nv2), contact=sim.contact, t=t_new)

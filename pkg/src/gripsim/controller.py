"""Three-layer cascaded controller for the two-finger gripper.

The cascade runs top-down once per control period:

* layer 3 -- admittance dynamics on the gripper center, driven by a bounded
  balance force built from the two proximity readings; its virtual object
  becomes the motion reference for layer 2 (contact-time balancing),
* layer 2 -- per-finger admittance dynamics driven by a virtual damping
  force proportional to the log-rate of the proximity output (impact
  reduction),
* layer 1 -- an impedance law rendering damping/stiffness between each
  finger and its layer-2 virtual object; its output is the actuation force.

Reduced variants bypass the upper layers: case 1 feeds layer 2 straight
from the gripper-center reference, case 0 applies the impedance law to that
reference directly.  Virtual objects of bypassed layers stay frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from numba import njit

__all__ = [
    "EPS_XI",
    "ControlCase",
    "ControllerParams",
    "VirtualState",
    "trajectory_planner",
    "virtual_force_simultaneous",
    "virtual_force_proximity",
    "step_layer3",
    "step_layer2",
    "impedance_input",
    "controller_step",
]

# Readings below this level mean "no object in range"; both virtual force
# generators return zero instead of dividing by a vanishing output.
EPS_XI = 1e-6


class ControlCase(IntEnum):
    """Which layers of the cascade are active."""

    FORCE_ONLY = 0       # impedance layer alone, referenced to the gripper center
    IMPACT_REDUCTION = 1 # damping layer + impedance layer
    SIMULTANEOUS = 2     # full three-layer cascade


@dataclass(frozen=True)
class ControllerParams:
    """Gains of the three layers.

    ``m_a2/d_a2/k_a2/k_s`` shape the center-balancing layer, ``m_a1/d_a1/
    k_a1/d_p1/d_p2`` the impact-reduction layer, ``d_i/k_i`` the impedance
    layer.  ``d_p1``/``d_p2`` carry opposite signs so each damping force
    opposes its own finger's closing motion.
    """

    m_a2: float = 1.0
    d_a2: float = 12.0
    k_a2: float = 36.0
    k_s: float = 3.0
    m_a1: float = 1.0
    d_a1: float = 10.0
    k_a1: float = 25.0
    d_p1: float = 0.6
    d_p2: float = -0.6
    d_i: float = 14.0
    k_i: float = 98.0

    def violations(self, prefix: str = "controller") -> list[str]:
        out = []
        for name in ("m_a2", "m_a1"):
            if not getattr(self, name) > 0:
                out.append(f"{prefix}.{name} must be positive")
        for name in ("d_a2", "k_a2", "k_s", "d_a1", "k_a1", "d_i", "k_i"):
            if getattr(self, name) < 0:
                out.append(f"{prefix}.{name} must be non-negative")
        if self.d_p1 != -self.d_p2:
            out.append(f"{prefix}.d_p1 must equal -d_p2")
        return out


@dataclass(frozen=True)
class VirtualState:
    """State of all virtual objects: layer 3 plus one layer-2 object per finger."""

    x_v2: float
    v_v2: float
    x_v1: tuple[float, float]
    v_v1: tuple[float, float]

    @classmethod
    def at_rest(cls, x: float) -> "VirtualState":
        """All virtual objects parked at ``x`` with zero velocity (run start)."""
        return cls(x_v2=x, v_v2=0.0, x_v1=(x, x), v_v1=(0.0, 0.0))


@njit(cache=True)
def _balance_force(xi1, xi2, k_s):
    total = xi1 + xi2
    if total < EPS_XI:
        return 0.0
    return k_s * math.tanh((xi1 - xi2) / total)


@njit(cache=True)
def _damping_force(xi, xi_rate, d_p):
    if xi < EPS_XI:
        return 0.0
    return d_p * xi_rate / xi


@njit(cache=True)
def _impedance(x, v, ref_x, ref_v, d_i, k_i):
    return -d_i * (v - ref_v) - k_i * (x - ref_x)


@njit(cache=True)
def _admittance_rk4(x, v, ref_x, ref_v, ref_a, force, mass, damping, stiffness, dt):
    # One RK4 step of  mass*(x'' - ref_a) + damping*(x' - ref_v)
    #                  + stiffness*(x - ref_x) = force
    # with the reference triple and the force held over the step.
    a1 = ref_a + (force - damping * (v - ref_v) - stiffness * (x - ref_x)) / mass
    x2 = x + 0.5 * dt * v
    v2 = v + 0.5 * dt * a1
    a2 = ref_a + (force - damping * (v2 - ref_v) - stiffness * (x2 - ref_x)) / mass
    x3 = x + 0.5 * dt * v2
    v3 = v + 0.5 * dt * a2
    a3 = ref_a + (force - damping * (v3 - ref_v) - stiffness * (x3 - ref_x)) / mass
    x4 = x + dt * v3
    v4 = v + dt * a3
    a4 = ref_a + (force - damping * (v4 - ref_v) - stiffness * (x4 - ref_x)) / mass
    x_new = x + dt * (v + 2.0 * v2 + 2.0 * v3 + v4) / 6.0
    v_new = v + dt * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
    return x_new, v_new, a1  # a1 is the acceleration at the start of the step


@njit(cache=True)
def _controller_step(case, xi1, xi2, xid1, xid2,
                     x1, v1, x2, v2,
                     xv2, vv2, xv11, vv11, xv12, vv12,
                     m_a2, d_a2, k_a2, k_s,
                     m_a1, d_a1, k_a1, d_p1, d_p2,
                     d_i, k_i, dt):
    x_d = 0.5 * (x1 + x2)

    f_s = 0.0
    f_p1 = 0.0
    f_p2 = 0.0
    if case == 2:
        f_s = _balance_force(xi1, xi2, k_s)
    if case >= 1:
        f_p1 = _damping_force(xi1, xid1, d_p1)
        f_p2 = _damping_force(xi2, xid2, d_p2)

    # Actuation uses the virtual states as they stand at the start of the step.
    if case == 0:
        u1 = _impedance(x1, v1, x_d, 0.0, d_i, k_i)
        u2 = _impedance(x2, v2, x_d, 0.0, d_i, k_i)
    else:
        u1 = _impedance(x1, v1, xv11, vv11, d_i, k_i)
        u2 = _impedance(x2, v2, xv12, vv12, d_i, k_i)

    # Advance the virtual chain; bypassed layers keep their state frozen.
    if case == 2:
        nxv2, nvv2, a_v2 = _admittance_rk4(xv2, vv2, x_d, 0.0, 0.0, f_s,
                                           m_a2, d_a2, k_a2, dt)
        ref_x, ref_v, ref_a = xv2, vv2, a_v2
    else:
        nxv2, nvv2 = xv2, vv2
        ref_x, ref_v, ref_a = x_d, 0.0, 0.0
    if case >= 1:
        nxv11, nvv11, _ = _admittance_rk4(xv11, vv11, ref_x, ref_v, ref_a, f_p1,
                                          m_a1, d_a1, k_a1, dt)
        nxv12, nvv12, _ = _admittance_rk4(xv12, vv12, ref_x, ref_v, ref_a, f_p2,
                                          m_a1, d_a1, k_a1, dt)
    else:
        nxv11, nvv11 = xv11, vv11
        nxv12, nvv12 = xv12, vv12

    return u1, u2, nxv2, nvv2, nxv11, nvv11, nxv12, nvv12, f_s, f_p1, f_p2, x_d


def trajectory_planner(x1: float, x2: float) -> tuple[float, float, float]:
    """Reference triple (position, velocity, acceleration) for the cascade.

    The position reference is the live geometric center of the gripper; its
    velocity and acceleration feedforwards are identically zero.
    """
    return 0.5 * (x1 + x2), 0.0, 0.0


def virtual_force_simultaneous(xi1: float, xi2: float, k_s: float) -> float:
    """Bounded balance force from the two proximity readings.

    Positive when finger 1 reads stronger (is closer), pushing the layer-3
    virtual object toward finger 1.  Always within (-k_s, k_s); zero when
    both readings are below the no-object guard.
    """
    return _balance_force(float(xi1), float(xi2), float(k_s))


def virtual_force_proximity(xi: float, xi_rate: float, d_p: float) -> float:
    """Virtual damping force from one sensor's output and output rate.

    Proportional to the logarithmic rate of the reading, so it is invariant
    to the surface reflectance; zero below the no-object guard.
    """
    return _damping_force(float(xi), float(xi_rate), float(d_p))


def step_layer3(vs: VirtualState, f_s: float, traj: tuple[float, float, float],
                params: ControllerParams, dt: float) -> tuple[VirtualState, float]:
    """Advance the center-balancing virtual object one step.

    ``traj`` is the planner triple; the force and reference are held over
    the step.  Returns the updated state together with the virtual-object
    acceleration at the start of the step (the reference acceleration that
    layer 2 consumes).
    """
    ref_x, ref_v, ref_a = traj
    x_new, v_new, a0 = _admittance_rk4(vs.x_v2, vs.v_v2, ref_x, ref_v, ref_a,
                                       float(f_s), params.m_a2, params.d_a2,
                                       params.k_a2, dt)
    return VirtualState(x_new, v_new, vs.x_v1, vs.v_v1), a0


def step_layer2(vs: VirtualState, f_p: tuple[float, float],
                ref: tuple[float, float, float],
                params: ControllerParams, dt: float) -> VirtualState:
    """Advance both per-finger virtual objects one step against ``ref``.

    ``ref`` is the (position, velocity, acceleration) of the upstream
    virtual object; pass the planner triple instead to bypass layer 3.
    """
    ref_x, ref_v, ref_a = ref
    x1, v1, _ = _admittance_rk4(vs.x_v1[0], vs.v_v1[0], ref_x, ref_v, ref_a,
                                float(f_p[0]), params.m_a1, params.d_a1, params.k_a1, dt)
    x2, v2, _ = _admittance_rk4(vs.x_v1[1], vs.v_v1[1], ref_x, ref_v, ref_a,
                                float(f_p[1]), params.m_a1, params.d_a1, params.k_a1, dt)
    return VirtualState(vs.x_v2, vs.v_v2, (x1, x2), (v1, v2))


def impedance_input(x: float, x_dot: float, x_v1: float, v_v1: float,
                    params: ControllerParams) -> float:
    """Actuation force rendering the desired damping and stiffness.

    No inertia shaping is applied; the finger mass is left as is.
    """
    return _impedance(float(x), float(x_dot), float(x_v1), float(v_v1),
                      params.d_i, params.k_i)


def controller_step(case: ControlCase, xi: tuple[float, float],
                    xi_rate: tuple[float, float], x: tuple[float, float],
                    v: tuple[float, float], vs: VirtualState,
                    params: ControllerParams, dt: float,
                    ) -> tuple[tuple[float, float], VirtualState]:
    """One control period: actuation forces plus the advanced virtual state.

    The actuation is computed from the states as they stand, then the
    virtual chain of the active case is integrated over ``dt``.
    """
    for name, pair in (("xi", xi), ("xi_rate", xi_rate), ("x", x), ("v", v)):
        if len(pair) != 2:
            raise ValueError(f"{name} must hold exactly two entries, got {len(pair)}")
    (u1, u2, xv2, vv2, xv11, vv11, xv12, vv12,
     _fs, _fp1, _fp2, _xd) = _controller_step(
        int(case), float(xi[0]), float(xi[1]), float(xi_rate[0]), float(xi_rate[1]),
        float(x[0]), float(v[0]), float(x[1]), float(v[1]),
        vs.x_v2, vs.v_v2, vs.x_v1[0], vs.v_v1[0], vs.x_v1[1], vs.v_v1[1],
        params.m_a2, params.d_a2, params.k_a2, params.k_s,
        params.m_a1, params.d_a1, params.k_a1, params.d_p1, params.d_p2,
        params.d_i, params.k_i, float(dt))
    return (u1, u2), VirtualState(xv2, vv2, (xv11, xv12), (vv11, vv12))

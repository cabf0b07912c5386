"""Optical proximity sensing model for the gripper fingertips.

Each fingertip carries a reflected-light-intensity sensor whose voltage
grows as an inverse power of the gap to the object face and scales linearly
with the surface reflectance.  The rate of change of the output is computed
analytically so closed-loop runs stay noise-free and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from numba import njit

__all__ = [
    "SensorParams",
    "SurfaceReflectance",
    "ObjectGeometry",
    "gap_distance",
    "sensor_output",
    "sensor_rate",
]


@dataclass(frozen=True)
class SensorParams:
    """Fitted constants of the reflected-light-intensity model.

    ``k_gain`` is the composite optical gain for a white reference surface
    (V*m^n), ``n_diff`` the diffusion exponent of the emitter/receiver
    arrangement, and ``l_offset`` the built-in standoff (m) that keeps the
    lens from touching the object at zero gap.
    """

    k_gain: float = 0.0024
    n_diff: float = 1.1506
    l_offset: float = 0.005

    def violations(self, prefix: str = "sensor") -> list[str]:
        out = []
        if not self.k_gain > 0:
            out.append(f"{prefix}.k_gain must be positive")
        if not self.n_diff > 0:
            out.append(f"{prefix}.n_diff must be positive")
        if not self.l_offset > 0:
            out.append(f"{prefix}.l_offset must be positive")
        return out


@dataclass(frozen=True)
class SurfaceReflectance:
    """Per-side reflectance ratios relative to white paper (= 1.00)."""

    alpha_rel_1: float = 1.0
    alpha_rel_2: float = 1.0

    def violations(self, prefix: str = "sensor") -> list[str]:
        out = []
        for name, value in (("alpha1", self.alpha_rel_1), ("alpha2", self.alpha_rel_2)):
            if not 0 < value <= 1:
                out.append(f"{prefix}.{name} must be in (0, 1]")
        return out


@dataclass(frozen=True)
class ObjectGeometry:
    """Rigid object on the gripper axis: center position ``x_m`` and width (m)."""

    x_m: float = 0.03
    width: float = 0.07

    @property
    def face_1(self) -> float:
        """Position of the face seen by finger 1 (approaching from +x)."""
        return self.x_m + 0.5 * self.width

    @property
    def face_2(self) -> float:
        """Position of the face seen by finger 2 (approaching from -x)."""
        return self.x_m - 0.5 * self.width

    def violations(self, prefix: str = "plant") -> list[str]:
        if not self.width > 0:
            return [f"{prefix}.width must be positive"]
        return []


@njit(cache=True)
def _gap(pos, index, x_m, width):
    if index == 1:
        return pos - (x_m + 0.5 * width)
    return (x_m - 0.5 * width) - pos


@njit(cache=True)
def _output(gap, alpha_rel, k_gain, n_diff, l_offset):
    g = gap if gap > 0.0 else 0.0  # saturate at the zero-gap value while in contact
    return alpha_rel * (k_gain / (g + l_offset) ** n_diff)


@njit(cache=True)
def _rate(gap, gap_rate, alpha_rel, k_gain, n_diff, l_offset):
    g = gap if gap > 0.0 else 0.0
    xi = alpha_rel * (k_gain / (g + l_offset) ** n_diff)
    return -n_diff * xi * gap_rate / (g + l_offset)


def gap_distance(finger_pos: float, finger_index: int, obj: ObjectGeometry) -> float:
    """Signed gap between a fingertip and the object face it approaches.

    Positive while the finger is outside the object, zero at touch, negative
    during (transient) penetration.  Finger 1 closes in the -x direction,
    finger 2 in +x.
    """
    if finger_index not in (1, 2):
        raise ValueError(f"finger_index must be 1 or 2, got {finger_index}")
    return _gap(float(finger_pos), finger_index, obj.x_m, obj.width)


def sensor_output(gap: float, alpha_rel: float, params: SensorParams) -> float:
    """Sensor voltage at a given gap; the gap is clamped at 0 in contact."""
    if params.l_offset <= 0:
        raise ValueError("sensor.l_offset must be positive")
    return _output(float(gap), float(alpha_rel), params.k_gain, params.n_diff, params.l_offset)


def sensor_rate(gap: float, gap_rate: float, alpha_rel: float, params: SensorParams) -> float:
    """Analytic time derivative of :func:`sensor_output` for a moving finger.

    ``gap_rate`` is d(gap)/dt; approaching fingers (negative rate) give a
    rising output.
    """
    if params.l_offset <= 0:
        raise ValueError("sensor.l_offset must be positive")
    return _rate(float(gap), float(gap_rate), float(alpha_rel), params.k_gain, params.n_diff, params.l_offset)

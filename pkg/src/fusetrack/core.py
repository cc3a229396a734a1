"""Coordinate frames, trajectory containers, and validation.

Conventions used throughout the package:
    - angles are radians in (-pi, pi], atan2 semantics
    - times are float seconds on a common clock
    - positions are meters in the reader frame (reader at the origin)

Distances between points are always computed in the Cartesian frame; polar
pairs are converted first.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyTrajectoryError,
    MixedFramesError,
    NonMonotoneTimeError,
)

TWO_PI = 2.0 * math.pi


class Frame(enum.Enum):
    POLAR = "polar"  # coords = (r meters, theta radians)
    CARTESIAN = "cartesian"  # coords = (x meters, y meters)


class Source(enum.Enum):
    CAMERA = "camera"
    RFID = "rfid"
    SIMULATED = "simulated"


def wrap_angle(angle):
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.fmod(angle, TWO_PI)
    if wrapped > math.pi:
        wrapped -= TWO_PI
    elif wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


@dataclass(frozen=True)
class TimedPoint:
    """A timestamped 2-D point in a declared coordinate frame.

    Polar points require r >= 0 and theta in (-pi, pi]; all fields finite.
    """

    t: float
    coords: tuple
    frame: Frame

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError(f"timestamp must be finite, got {self.t}")
        if len(self.coords) != 2:
            raise ValueError(f"coords must be a 2-vector, got {self.coords}")
        a, b = self.coords
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError(f"coordinates must be finite, got {self.coords}")
        if self.frame is Frame.POLAR:
            r, theta = a, b
            if r < 0:
                raise ValueError(f"polar radius must be >= 0, got {r}")
            if not (-math.pi < theta <= math.pi):
                raise ValueError(f"theta must lie in (-pi, pi], got {theta}")


def polar_to_cartesian(p: TimedPoint) -> TimedPoint:
    """Map a polar point (r, theta) to Cartesian (r cos theta, r sin theta)."""
    if p.frame is not Frame.POLAR:
        raise ValueError("polar_to_cartesian expects a polar point")
    r, theta = p.coords
    return TimedPoint(p.t, (r * math.cos(theta), r * math.sin(theta)), Frame.CARTESIAN)


def cartesian_to_polar(p: TimedPoint) -> TimedPoint:
    """Map a Cartesian point to (sqrt(x^2+y^2), atan2(y, x)).

    The origin maps to (0, 0) by convention; atan2 there is undefined.
    """
    if p.frame is not Frame.CARTESIAN:
        raise ValueError("cartesian_to_polar expects a Cartesian point")
    x, y = p.coords
    r = math.hypot(x, y)
    theta = wrap_angle(math.atan2(y, x)) if r > 0.0 else 0.0
    return TimedPoint(p.t, (r, theta), Frame.POLAR)


@dataclass
class Trajectory:
    """An ordered, single-frame sequence of timestamped points.

    Containers are cheap to build and are not validated on construction;
    call validate_trajectory (ingestion and the pipeline do) to enforce the
    invariants: strictly increasing timestamps, one shared frame, length >= 1.
    """

    id: str
    points: list = field(default_factory=list)
    source: Source = Source.SIMULATED

    def __len__(self):
        return len(self.points)

    @property
    def frame(self):
        return self.points[0].frame if self.points else None

    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.points], dtype=float)

    def xy(self) -> np.ndarray:
        """Coordinates as an (n, 2) float array, converting polar points."""
        out = np.empty((len(self.points), 2), dtype=float)
        for i, p in enumerate(self.points):
            if p.frame is Frame.POLAR:
                p = polar_to_cartesian(p)
            out[i] = p.coords
        return out

    def to_cartesian(self) -> "Trajectory":
        pts = [
            polar_to_cartesian(p) if p.frame is Frame.POLAR else p
            for p in self.points
        ]
        return Trajectory(self.id, pts, self.source)

    @classmethod
    def from_arrays(cls, traj_id, t, xy, source=Source.SIMULATED) -> "Trajectory":
        t = np.asarray(t, dtype=float)
        xy = np.asarray(xy, dtype=float)
        pts = [
            TimedPoint(float(ti), (float(x), float(y)), Frame.CARTESIAN)
            for ti, (x, y) in zip(t, xy)
        ]
        return cls(traj_id, pts, source)


def validate_trajectory(traj: Trajectory) -> None:
    """Raise the first invariant violation found, if any.

    Raises:
        EmptyTrajectoryError: no points.
        NonMonotoneTimeError: timestamps not strictly increasing.
        MixedFramesError: points do not share a single frame.
    """
    if len(traj.points) == 0:
        raise EmptyTrajectoryError(f"trajectory {traj.id!r} is empty")
    frame = traj.points[0].frame
    prev_t = None
    for i, p in enumerate(traj.points):
        if p.frame is not frame:
            raise MixedFramesError(
                f"trajectory {traj.id!r}: point {i} is {p.frame.value}, expected {frame.value}"
            )
        if prev_t is not None and p.t <= prev_t:
            raise NonMonotoneTimeError(
                f"trajectory {traj.id!r}: t[{i}]={p.t} does not increase past {prev_t}"
            )
        prev_t = p.t

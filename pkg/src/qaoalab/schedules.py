"""Ramp schedules and the per-step angle sequences sampled from them.

A schedule is a ramp magnitude ``delta`` and a warp F on [0, 1] with
F(0) = 0, F(1) = 1, strictly increasing.  The step angles are

    f_j = j / (p + 1),   gamma_j = delta * F(f_j),   beta_j = delta * (1 - F(f_j))

for j = 1..p, so gamma_j + beta_j = delta for every step.  Warps: linear
F(f) = f, root F(f) = sqrt(f), and a tangent warp steep at both ends,

    F(f) = (tan((f - 1/2)/c) + tan(1/(2c))) / (2 tan(1/(2c)))

with shape parameter c (default 0.37, finite and monotone on [0, 1]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SCHEDULE_KINDS = ("linear", "root", "tangent")
DEFAULT_TANGENT_C = 0.37
_WARP_GRID_POINTS = 1001


def warp_function(kind: str, tangent_c: float = DEFAULT_TANGENT_C):
    """The warp F as a vectorized callable on [0, 1]."""
    if kind == "linear":
        return lambda f: np.asarray(f, dtype=float)
    if kind == "root":
        return lambda f: np.sqrt(np.asarray(f, dtype=float))
    if kind == "tangent":
        half_span = math.tan(1.0 / (2.0 * tangent_c))

        def tangent(f):
            f = np.asarray(f, dtype=float)
            return (np.tan((f - 0.5) / tangent_c) + half_span) / (2.0 * half_span)

        return tangent
    raise ValueError(f"unknown schedule kind {kind!r}; choose from {SCHEDULE_KINDS}")


@dataclass(frozen=True)
class Schedule:
    """Ramp kind, magnitude delta, step count p, and the tangent shape c.

    ``p = 0`` is accepted as the identity protocol (empty angle sequence);
    grids start at p = 1.
    """

    kind: str
    delta: float
    p: int
    tangent_c: float = DEFAULT_TANGENT_C

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        if self.tangent_c <= 0:
            raise ValueError("tangent_c must be positive")
        self._validate_warp()

    def _validate_warp(self):
        warp = warp_function(self.kind, self.tangent_c)
        grid = np.linspace(0.0, 1.0, _WARP_GRID_POINTS)
        values = warp(grid)
        if not (abs(values[0]) < 1e-12 and abs(values[-1] - 1.0) < 1e-12):
            raise ValidationError(
                f"warp endpoints F(0)={values[0]:.3g}, F(1)={values[-1]:.3g} "
                "must be 0 and 1"
            )
        if np.any(np.diff(values) <= 0):
            raise ValidationError(
                f"warp for kind={self.kind!r}, c={self.tangent_c} is not "
                "strictly increasing on [0, 1]"
            )

    def warp(self):
        return warp_function(self.kind, self.tangent_c)

    def total_time(self) -> float:
        """Continuous-evolution time associated with this schedule: delta*(p+1).

        A convention matching the f_j = j/(p+1) sampling endpoints; recorded
        in sweep provenance so it can be revisited.
        """
        return self.delta * (self.p + 1)

    def to_json_dict(self) -> dict:
        data = {"kind": self.kind, "delta": self.delta, "p": self.p}
        if self.kind == "tangent":
            data["c"] = self.tangent_c
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "Schedule":
        return cls(
            kind=data["kind"], delta=float(data["delta"]), p=int(data["p"]),
            tangent_c=float(data.get("c", DEFAULT_TANGENT_C)),
        )


@dataclass(frozen=True)
class AngleSequence:
    """Sampled per-step angles; gammas[j] + betas[j] == delta for all j."""

    gammas: np.ndarray
    betas: np.ndarray
    delta: float

    def __post_init__(self):
        gammas = np.asarray(self.gammas, dtype=np.float64)
        betas = np.asarray(self.betas, dtype=np.float64)
        gammas.setflags(write=False)
        betas.setflags(write=False)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "betas", betas)
        if gammas.shape != betas.shape:
            raise ValidationError("gamma and beta sequences differ in length")

    @property
    def p(self) -> int:
        return self.gammas.size


def schedule_angles(schedule: Schedule) -> AngleSequence:
    """Sample the ramps at f_j = j/(p+1), j = 1..p."""
    if schedule.p == 0:
        empty = np.zeros(0)
        return AngleSequence(gammas=empty, betas=empty, delta=schedule.delta)
    j = np.arange(1, schedule.p + 1, dtype=np.float64)
    f = j / (schedule.p + 1)
    warped = schedule.warp()(f)
    gammas = schedule.delta * warped
    betas = schedule.delta * (1.0 - warped)
    return AngleSequence(gammas=gammas, betas=betas, delta=schedule.delta)

"""Polar grids over an annulus and the residual report record."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .core_model import OrbitParams, turning_points
from .errors import DegenerateAnnulusError, DomainError, SingularBoundaryError

Spacing = Literal["clustered", "uniform"]


def _logit(x):
    return np.log(x / (1.0 - x))


@dataclass(frozen=True)
class PolarGrid:
    """Tensor grid ``r x phi`` on ``[r_lo, r_hi] x [0, 2 pi)``.

    With ``spacing="clustered"`` the radial nodes are
    ``r = r_min + (r_max - r_min) * sigmoid(s)`` for ``s`` uniform, where
    ``r_min, r_max`` are recovered from ``r_lo, r_hi`` and the margin.  The
    nodes crowd towards the turning points, where the density has its
    ``(r - r_min)**(-1/4)`` growth.
    """

    r_lo: float
    r_hi: float
    n_r: int = 256
    n_phi: int = 64
    margin_fraction: float | None = None
    spacing: Spacing = "uniform"
    r: np.ndarray = field(init=False, repr=False, compare=False)
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_r < 8 or self.n_phi < 8:
            raise DomainError("grid needs n_r >= 8 and n_phi >= 8")
        if not 0 < self.r_lo < self.r_hi:
            raise DomainError("grid needs 0 < r_lo < r_hi")
        if self.spacing == "clustered":
            mg = self.margin_fraction
            if mg is None or not 0 < mg < 0.4:
                raise DomainError("clustered spacing needs margin_fraction in (0, 0.4)")
            width = (self.r_hi - self.r_lo) / (1.0 - 2.0 * mg)
            r_min = self.r_lo - mg * width
            s = np.linspace(_logit(mg), -_logit(mg), self.n_r)
            r = r_min + width / (1.0 + np.exp(-s))
            r[0], r[-1] = self.r_lo, self.r_hi
        elif self.spacing == "uniform":
            r = np.linspace(self.r_lo, self.r_hi, self.n_r)
        else:
            raise DomainError(f"unknown spacing {self.spacing!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", np.arange(self.n_phi) * (2.0 * np.pi / self.n_phi))

    @classmethod
    def for_params(cls, p: OrbitParams, n_r=256, n_phi=64, margin=0.05, spacing="clustered"):
        """Grid inset by ``margin * (r_max - r_min)`` from both turning points."""
        if not margin > 0:
            raise SingularBoundaryError(f"margin {margin:g} puts grid on the turning points")
        if not margin < 0.4:
            raise DomainError(f"margin must be < 0.4, got {margin:g}")
        tp = turning_points(p)
        if not tp.width > 0:
            raise DegenerateAnnulusError("circular orbit has zero radial extent")
        width = tp.width
        return cls(
            r_lo=tp.r_min + margin * width,
            r_hi=tp.r_max - margin * width,
            n_r=n_r,
            n_phi=n_phi,
            margin_fraction=margin,
            spacing=spacing,
        )

    @property
    def shape(self):
        return (self.n_r, self.n_phi)

    @property
    def h_phi(self):
        return 2.0 * np.pi / self.n_phi

    @property
    def h_r(self):
        """Largest radial spacing."""
        return float(np.max(np.diff(self.r)))

    def mesh(self):
        return np.meshgrid(self.r, self.phi, indexing="ij")

    def valid_rows(self):
        """Radial rows where three-point stencils are defined."""
        mask = np.ones(self.n_r, dtype=bool)
        mask[0] = mask[-1] = False
        return mask

    def descriptor(self) -> dict:
        return {
            "r_lo": self.r_lo,
            "r_hi": self.r_hi,
            "n_r": self.n_r,
            "n_phi": self.n_phi,
            "margin_fraction": self.margin_fraction,
            "spacing": self.spacing,
        }

    def check_inside(self, r_min, r_max, reach=0.0):
        """Raise unless ``[r_lo - reach, r_hi + reach]`` lies strictly inside ``(r_min, r_max)``."""
        if not (self.r_lo - reach > r_min and self.r_hi + reach < r_max):
            raise SingularBoundaryError(
                f"grid [{self.r_lo:g}, {self.r_hi:g}] touches turning points [{r_min:g}, {r_max:g}]"
            )


@dataclass(frozen=True)
class ResidualReport:
    kind: str
    grid: dict
    h_r: float
    h_phi: float
    max_residual: float
    rms_residual: float
    normalization_scale: float

    def __post_init__(self):
        if not self.max_residual >= self.rms_residual >= 0:
            raise ValueError("residual report needs max >= rms >= 0")

    @classmethod
    def from_field(cls, kind, grid: PolarGrid, values, scale, h_r=None):
        vals = np.abs(np.asarray(values))
        vals = vals[np.isfinite(vals)] / scale
        rms = float(np.sqrt(np.mean(vals * vals)))
        mx = float(np.max(vals))
        # rms can exceed max by one ulp when all entries are equal
        rms = min(rms, mx)
        return cls(
            kind=kind,
            grid=grid.descriptor(),
            h_r=float(grid.h_r if h_r is None else h_r),
            h_phi=float(grid.h_phi),
            max_residual=mx,
            rms_residual=rms,
            normalization_scale=float(scale),
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid_shape": [self.grid["n_r"], self.grid["n_phi"]],
            "margin": self.grid["margin_fraction"],
            "h_r": self.h_r,
            "h_phi": self.h_phi,
            "max_residual": self.max_residual,
            "rms_residual": self.rms_residual,
            "normalization_scale": self.normalization_scale,
        }


REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "kind",
        "grid_shape",
        "margin",
        "max_residual",
        "rms_residual",
        "normalization_scale",
    ],
    "properties": {
        "kind": {"enum": ["HJ", "Continuity", "SLE"]},
        "grid_shape": {
            "type": "array",
            "items": {"type": "integer", "minimum": 8},
            "minItems": 2,
            "maxItems": 2,
        },
        "margin": {"type": ["number", "null"]},
        "h_r": {"type": "number", "exclusiveMinimum": 0},
        "h_phi": {"type": "number", "exclusiveMinimum": 0},
        "max_residual": {"type": "number", "minimum": 0},
        "rms_residual": {"type": "number", "minimum": 0},
        "normalization_scale": {"type": "number", "exclusiveMinimum": 0},
    },
}

"""Sparse binary state features from overlapping tile grids.

The continuous state is two-dimensional: a control-signal value in [0, 1]
and the learner joint angle in its mechanical range.  Each of the
``num_tilings`` grids is displaced by a fixed fraction of a tile width, so
a state activates exactly one tile per grid and nearby states share tiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EMG_RANGE = (0.0, 1.0)
ANGLE_RANGE = (0.0349, 1.5446)


@dataclass(frozen=True)
class TileCoderConfig:
    """Immutable layout of the tilings.

    ``offsets`` are per-tiling displacements expressed as a fraction of one
    tile width, applied identically in both dimensions.  ``None`` selects
    the uniform stagger k / num_tilings.
    """

    num_tilings: int = 8
    tiles_per_dim: int = 10
    ranges: tuple[tuple[float, float], ...] = (EMG_RANGE, ANGLE_RANGE)
    offsets: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.num_tilings < 1:
            raise ValueError(f"num_tilings must be >= 1, got {self.num_tilings}")
        if self.tiles_per_dim < 1:
            raise ValueError(f"tiles_per_dim must be >= 1, got {self.tiles_per_dim}")
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        if len(ranges) != 2:
            raise ValueError("state is two-dimensional; exactly two ranges required")
        for lo, hi in ranges:
            if not lo < hi:
                raise ValueError(f"empty range [{lo}, {hi}]")
        if self.offsets is None:
            offsets = tuple(k / self.num_tilings for k in range(self.num_tilings))
        else:
            offsets = tuple(float(o) for o in self.offsets)
        if len(offsets) != self.num_tilings:
            raise ValueError("need one offset per tiling")
        if any(not 0.0 <= o < 1.0 for o in offsets):
            raise ValueError("offsets must lie in [0, 1) tile widths")
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "offsets", offsets)

    @property
    def table_size(self) -> int:
        return self.num_tilings * self.tiles_per_dim ** 2

    @property
    def tile_widths(self) -> tuple[float, ...]:
        return tuple((hi - lo) / self.tiles_per_dim for lo, hi in self.ranges)

    def to_dict(self) -> dict:
        return {
            "num_tilings": self.num_tilings,
            "tiles_per_dim": self.tiles_per_dim,
            "ranges": [list(r) for r in self.ranges],
            "offsets": list(self.offsets),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TileCoderConfig":
        return cls(
            num_tilings=d["num_tilings"],
            tiles_per_dim=d["tiles_per_dim"],
            ranges=tuple(tuple(r) for r in d["ranges"]),
            offsets=tuple(d["offsets"]) if d.get("offsets") is not None else None,
        )


@dataclass(frozen=True)
class FeatureVector:
    """Active binary feature indices, one per tiling, sorted ascending."""

    indices: np.ndarray
    table_size: int

    def __len__(self) -> int:
        return len(self.indices)


@lru_cache(maxsize=8)
def _grids(cfg: TileCoderConfig):
    offs = np.asarray(cfg.offsets, dtype=np.float64)
    k = np.arange(cfg.num_tilings)
    # Alternate the displacement direction by tiling parity.  With a fixed
    # cell count per grid, every boundary pushed past a range endpoint is
    # swallowed by the endpoint clamp; one-directional offsets would lose
    # all staggered boundaries at one end of the range, leaving a full tile
    # width there with no sub-tile resolution.  Opposing directions keep
    # staggered boundaries alive at both ends, where this task's two hold
    # set points sit.
    signed = np.where(k % 2 == 0, offs, -offs)
    base = (k * cfg.tiles_per_dim ** 2).astype(np.int64)
    return signed, base


def encode(emg: float, angle: float, cfg: TileCoderConfig) -> FeatureVector:
    """Map (emg, angle) to its active tile per tiling.

    Inputs outside the configured ranges are clamped to the range endpoints
    first; live control signals can transiently exceed calibration.
    """
    offs, base = _grids(cfg)
    tiles = cfg.tiles_per_dim
    cells = []
    for value, (lo, hi) in zip((emg, angle), cfg.ranges):
        v = min(max(float(value), lo), hi)
        u = (v - lo) * tiles / (hi - lo)
        c = np.floor(u + offs).astype(np.int64)
        np.clip(c, 0, tiles - 1, out=c)
        cells.append(c)
    # within a tiling: cell = angle_cell * tiles + emg_cell
    indices = base + cells[1] * tiles + cells[0]
    return FeatureVector(indices=indices, table_size=cfg.table_size)


def dot(weights: np.ndarray, fv: FeatureVector) -> float:
    """Inner product of a weight vector with the binary feature vector."""
    if weights.shape != (fv.table_size,):
        raise ValueError(
            f"weight vector has shape {weights.shape}, expected ({fv.table_size},)"
        )
    return float(weights[fv.indices].sum())

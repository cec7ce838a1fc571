"""Tile coder tests.

The reference oracle below recomputes the active cell of each tiling by
counting grid boundaries at or below the query point, which is a different
route to the same geometry than the floor arithmetic in the implementation.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mirrorlearn import tile_coder
from mirrorlearn.tile_coder import ANGLE_RANGE, EMG_RANGE, TileCoderConfig, dot, encode

CFG = TileCoderConfig()


def signed_offset(cfg: TileCoderConfig, k: int) -> float:
    """Displacement of tiling k in tile widths (direction alternates by parity)."""
    return cfg.offsets[k] if k % 2 == 0 else -cfg.offsets[k]


def oracle_cell(value: float, lo: float, hi: float, tiles: int, s: float) -> int:
    """Active cell by boundary counting: boundary j of a grid displaced by s
    tile widths sits at lo + (j - s) * width; the cell is how many interior
    boundaries lie at or below the (clamped) value."""
    v = min(max(value, lo), hi)
    width = (hi - lo) / tiles
    cell = 0
    for j in range(1, tiles):
        if v >= lo + (j - s) * width:
            cell += 1
    return cell


def oracle_indices(emg: float, angle: float, cfg: TileCoderConfig) -> list[int]:
    out = []
    for k in range(cfg.num_tilings):
        s = signed_offset(cfg, k)
        cells = [
            oracle_cell(v, lo, hi, cfg.tiles_per_dim, s)
            for v, (lo, hi) in zip((emg, angle), cfg.ranges)
        ]
        out.append(
            k * cfg.tiles_per_dim**2 + cells[1] * cfg.tiles_per_dim + cells[0]
        )
    return out


def grid_position(value: float, lo: float, hi: float, tiles: int) -> float:
    return (min(max(value, lo), hi) - lo) * tiles / (hi - lo)


def away_from_boundaries(emg: float, angle: float, cfg: TileCoderConfig) -> bool:
    """True when neither coordinate sits within float noise of an interior
    grid line, where the implementation and the counting oracle may legally
    disagree.  Clamped coordinates are exempt: both computations pin them to
    the endpoint cell."""
    for value, (lo, hi) in zip((emg, angle), cfg.ranges):
        if value <= lo or value >= hi:
            continue
        u = grid_position(value, lo, hi, cfg.tiles_per_dim)
        for k in range(cfg.num_tilings):
            frac = u + signed_offset(cfg, k)
            if abs(frac - round(frac)) < 1e-9:
                return False
    return True


# --- frozen values -----------------------------------------------------------


def test_reference_point_active_tiles():
    fv = encode(0.5, 0.8, CFG)
    assert fv.indices.tolist() == [55, 144, 255, 344, 455, 544, 655, 744]


def test_nearby_points_share_most_tiles():
    a = encode(0.5, 0.8, CFG)
    b = encode(0.5001, 0.8, CFG)
    shared = len(set(a.indices.tolist()) & set(b.indices.tolist()))
    assert shared >= 7
    assert shared == 8  # current grid geometry; the contract is >= 7


def test_dot_uniform_weights():
    # 8 active features at 0.1/8 each sum to 0.1 exactly
    weights = np.full(CFG.table_size, 0.1 / 8)
    assert dot(weights, encode(0.5, 0.8, CFG)) == pytest.approx(0.1, abs=1e-12)


def test_table_size_and_widths():
    assert CFG.table_size == 800
    assert CFG.tile_widths == pytest.approx((0.1, (1.5446 - 0.0349) / 10))


# --- oracle equivalence ------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(
    emg=st.floats(min_value=-0.5, max_value=1.5),
    angle=st.floats(min_value=-0.5, max_value=2.0),
)
def test_matches_boundary_counting_oracle(emg, angle):
    assume(away_from_boundaries(emg, angle, CFG))
    fv = encode(emg, angle, CFG)
    assert fv.indices.tolist() == oracle_indices(emg, angle, CFG)


# --- structural properties ---------------------------------------------------


@given(
    emg=st.floats(min_value=0.0, max_value=1.0),
    angle=st.floats(min_value=ANGLE_RANGE[0], max_value=ANGLE_RANGE[1]),
)
def test_one_active_tile_per_tiling(emg, angle):
    fv = encode(emg, angle, CFG)
    assert len(fv) == CFG.num_tilings
    blocks = fv.indices // CFG.tiles_per_dim**2
    assert blocks.tolist() == list(range(CFG.num_tilings))
    assert (fv.indices >= 0).all() and (fv.indices < CFG.table_size).all()


@given(
    emg=st.floats(min_value=0.0, max_value=1.0),
    angle=st.floats(min_value=ANGLE_RANGE[0], max_value=ANGLE_RANGE[1]),
)
def test_encode_is_deterministic(emg, angle):
    first = encode(emg, angle, CFG)
    second = encode(emg, angle, CFG)
    assert first.indices.tolist() == second.indices.tolist()


@given(
    below=st.floats(min_value=-10.0, max_value=-0.001),
    above=st.floats(min_value=1.001, max_value=10.0),
    angle=st.floats(min_value=ANGLE_RANGE[0], max_value=ANGLE_RANGE[1]),
)
def test_out_of_range_inputs_clamp_to_endpoints(below, above, angle):
    lo, hi = EMG_RANGE
    assert encode(below, angle, CFG).indices.tolist() == encode(lo, angle, CFG).indices.tolist()
    assert encode(above, angle, CFG).indices.tolist() == encode(hi, angle, CFG).indices.tolist()


@settings(max_examples=200, deadline=None)
@given(
    emg=st.floats(min_value=0.11, max_value=0.89),
    angle=st.floats(min_value=ANGLE_RANGE[0] + 0.16, max_value=ANGLE_RANGE[1] - 0.16),
    delta=st.floats(min_value=-0.012, max_value=0.012),
)
def test_small_moves_in_one_dimension_share_most_tiles(emg, angle, delta):
    # The 8 grids' boundary fractions tile the unit cell at eighths, so a
    # move shorter than width/8 in one coordinate (away from the clamped
    # edges) crosses at most one boundary and changes at most one tiling.
    assume(abs(delta) < CFG.tile_widths[0] / CFG.num_tilings)
    a = encode(emg, angle, CFG)
    b = encode(emg + delta, angle, CFG)
    shared = len(set(a.indices.tolist()) & set(b.indices.tolist()))
    assert shared >= CFG.num_tilings - 1


def test_distant_points_share_nothing():
    a = encode(0.05, 0.2, CFG)
    b = encode(0.95, 1.4, CFG)
    assert not set(a.indices.tolist()) & set(b.indices.tolist())


# --- config handling ---------------------------------------------------------


def test_default_offsets_are_uniform_stagger():
    assert CFG.offsets == tuple(k / 8 for k in range(8))


def test_config_round_trip():
    cfg = TileCoderConfig(num_tilings=4, tiles_per_dim=5)
    assert TileCoderConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_tilings": 0},
        {"tiles_per_dim": 0},
        {"ranges": ((0.0, 1.0),)},
        {"ranges": ((1.0, 0.0), ANGLE_RANGE)},
        {"offsets": (0.0, 0.5)},          # wrong count for 8 tilings
        {"offsets": tuple([1.5] * 8)},    # outside [0, 1)
    ],
)
def test_bad_config_rejected(kwargs):
    with pytest.raises(ValueError):
        TileCoderConfig(**kwargs)


def test_dot_rejects_wrong_table_size():
    fv = encode(0.5, 0.8, CFG)
    with pytest.raises(ValueError):
        dot(np.zeros(CFG.table_size + 1), fv)


def test_custom_tiling_count_table_size():
    cfg = TileCoderConfig(num_tilings=4, tiles_per_dim=6)
    assert cfg.table_size == 4 * 36
    fv = tile_coder.encode(0.3, 0.9, cfg)
    assert len(fv) == 4

"""Synthetic benthic worlds: substrate maps and wind disturbance.

The map generator produces a two-class (suitable / unsuitable) substrate
grid from smoothed seeded noise. The suitable-area fraction is corrected
to the requested target by rank thresholding, so the measured fraction of
a generated map matches the target to within one cell. Maps are immutable
after construction and safe to share between simulation workers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import TextIO

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import InvalidParameterError, OutOfBoundsError

# Cells are stored row-major as uint8: 1 = suitable, 0 = unsuitable.
SUITABLE_CODE = 1
UNSUITABLE_CODE = 0

# Smoothing length (in cells) applied to the noise field at clustering=1.
# The patch scale is a free knob; this value gives patches roughly an
# order of magnitude wider than a cell at high clustering.
_MAX_SMOOTHING_CELLS = 10.0

_MAP_FORMAT_VERSION = 1


class SubstrateClass(Enum):
    """Two-class benthic substrate label."""

    SUITABLE = "suitable"
    UNSUITABLE = "unsuitable"


@dataclass(frozen=True)
class BenthicMap:
    """Grid of ground-truth substrate classes.

    ``cells`` is a row-major uint8 array of length width*height; use
    :func:`sample_substrate` for world-coordinate lookups. ``origin`` is
    the world position of the grid's lower-left corner.
    """

    width_cells: int
    height_cells: int
    cell_size: float
    origin: tuple[float, float]
    cells: np.ndarray = field(repr=False)
    seed: int

    def __post_init__(self) -> None:
        if self.width_cells < 1 or self.height_cells < 1:
            raise InvalidParameterError("map must be at least 1x1 cells")
        if self.cell_size <= 0:
            raise InvalidParameterError("cell_size must be positive")
        if len(self.cells) != self.width_cells * self.height_cells:
            raise InvalidParameterError(
                "cells length %d does not match %dx%d grid"
                % (len(self.cells), self.width_cells, self.height_cells)
            )
        self.cells.setflags(write=False)

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def extent(self) -> tuple[float, float]:
        """World-frame (width, height) in meters."""
        return (self.width_cells * self.cell_size, self.height_cells * self.cell_size)

    def suitable_fraction(self) -> float:
        return float(np.count_nonzero(self.cells)) / self.cells.size

    def class_at_index(self, ix: int, iy: int) -> SubstrateClass:
        code = self.cells[iy * self.width_cells + ix]
        return SubstrateClass.SUITABLE if code else SubstrateClass.UNSUITABLE


@dataclass(frozen=True)
class WindField:
    """Deterministic wind: a constant velocity plus a sinusoidal gust
    aligned with it. Kept non-stochastic so mission replays stay exact."""

    velocity: tuple[float, float] = (0.0, 0.0)
    gust_amplitude: float = 0.0
    gust_period: float = 60.0

    def __post_init__(self) -> None:
        if self.gust_amplitude < 0:
            raise InvalidParameterError("gust_amplitude must be >= 0")
        if self.gust_period <= 0:
            raise InvalidParameterError("gust_period must be positive")


CALM = WindField()


def generate_reef(
    seed: int,
    width_cells: int,
    height_cells: int,
    cell_size: float,
    target_suitable_fraction: float,
    clustering: float,
    origin: tuple[float, float] = (0.0, 0.0),
) -> BenthicMap:
    """Generate a substrate map with the requested suitable-area fraction.

    Seeded white noise is smoothed by a Gaussian kernel whose width grows
    with ``clustering`` (0 = independent cells, 1 = large contiguous
    patches), then the highest-valued cells are marked suitable until the
    target fraction is met. The same arguments always reproduce the same
    cell array.
    """
    if width_cells < 1 or height_cells < 1:
        raise InvalidParameterError("map must be at least 1x1 cells")
    if cell_size <= 0:
        raise InvalidParameterError("cell_size must be positive")
    if not 0.0 <= target_suitable_fraction <= 1.0:
        raise InvalidParameterError("target_suitable_fraction must be in [0, 1]")
    if not 0.0 <= clustering <= 1.0:
        raise InvalidParameterError("clustering must be in [0, 1]")

    rng = np.random.default_rng(seed)
    noise = rng.random((height_cells, width_cells))
    sigma = _MAX_SMOOTHING_CELLS * clustering * clustering
    if sigma > 0:
        noise = gaussian_filter(noise, sigma=sigma, mode="reflect")

    n_cells = width_cells * height_cells
    n_suitable = int(round(target_suitable_fraction * n_cells))
    flat = noise.ravel()
    cells = np.zeros(n_cells, dtype=np.uint8)
    if n_suitable > 0:
        # Stable argsort keeps tie handling deterministic.
        order = np.argsort(flat, kind="stable")
        cells[order[n_cells - n_suitable :]] = SUITABLE_CODE

    return BenthicMap(
        width_cells=width_cells,
        height_cells=height_cells,
        cell_size=cell_size,
        origin=origin,
        cells=cells,
        seed=seed,
    )


def cell_index_at(reef: BenthicMap, position: tuple[float, float]) -> tuple[int, int]:
    """Grid indices of the cell containing ``position``.

    Cells are half-open along both axes, so a point on a shared edge
    belongs to the cell with the larger index. Raises
    :class:`OutOfBoundsError` for positions outside the grid.
    """
    ix = math.floor((position[0] - reef.origin[0]) / reef.cell_size)
    iy = math.floor((position[1] - reef.origin[1]) / reef.cell_size)
    if not (0 <= ix < reef.width_cells and 0 <= iy < reef.height_cells):
        raise OutOfBoundsError(
            "position (%g, %g) outside map bounds" % (position[0], position[1])
        )
    return ix, iy


def sample_substrate(reef: BenthicMap, position: tuple[float, float]) -> SubstrateClass:
    """Ground-truth substrate class at a world position."""
    ix, iy = cell_index_at(reef, position)
    return reef.class_at_index(ix, iy)


def wind_drift(wind: WindField, t: float) -> tuple[float, float]:
    """Wind velocity at time ``t``: the base field plus the gust component
    aligned with it. Zero base wind always yields a zero vector."""
    vx, vy = wind.velocity
    speed = math.hypot(vx, vy)
    if speed == 0.0:
        return (0.0, 0.0)
    gust = wind.gust_amplitude * math.sin(2.0 * math.pi * t / wind.gust_period)
    scale = 1.0 + gust / speed
    return (vx * scale, vy * scale)


def _rle_encode_row(row: np.ndarray) -> str:
    parts = []
    run_code = int(row[0])
    run_len = 0
    for code in row:
        if int(code) == run_code:
            run_len += 1
        else:
            parts.append("%d%s" % (run_len, "S" if run_code else "U"))
            run_code = int(code)
            run_len = 1
    parts.append("%d%s" % (run_len, "S" if run_code else "U"))
    return "".join(parts)


def save_map(reef: BenthicMap, stream: TextIO) -> None:
    """Write a map as a diffable text file: a short header followed by one
    run-length-encoded row per line (S = suitable, U = unsuitable)."""
    stream.write("reefmap %d\n" % _MAP_FORMAT_VERSION)
    stream.write("size %d %d\n" % (reef.width_cells, reef.height_cells))
    stream.write("cell %r\n" % reef.cell_size)
    stream.write("origin %r %r\n" % (reef.origin[0], reef.origin[1]))
    stream.write("seed %d\n" % reef.seed)
    stream.write("cells\n")
    grid = reef.cells.reshape(reef.height_cells, reef.width_cells)
    for row in grid:
        stream.write(_rle_encode_row(row) + "\n")


_RLE_RUN = re.compile(r"(\d+)([SU])")


def load_map(stream: TextIO) -> BenthicMap:
    """Parse a map written by :func:`save_map`."""
    header = stream.readline().split()
    if len(header) != 2 or header[0] != "reefmap":
        raise InvalidParameterError("not a reefmap file")
    if int(header[1]) != _MAP_FORMAT_VERSION:
        raise InvalidParameterError("unsupported reefmap version %s" % header[1])

    fields: dict[str, list[str]] = {}
    for _ in range(4):
        parts = stream.readline().split()
        if not parts:
            raise InvalidParameterError("truncated reefmap header")
        fields[parts[0]] = parts[1:]
    if stream.readline().strip() != "cells":
        raise InvalidParameterError("missing cells section")

    width, height = (int(v) for v in fields["size"])
    cell_size = float(fields["cell"][0])
    origin = (float(fields["origin"][0]), float(fields["origin"][1]))
    seed = int(fields["seed"][0])

    codes: list[int] = []
    for _ in range(height):
        line = stream.readline().strip()
        row_codes: list[int] = []
        pos = 0
        for match in _RLE_RUN.finditer(line):
            if match.start() != pos:
                raise InvalidParameterError("malformed RLE row: %r" % line)
            pos = match.end()
            run_len = int(match.group(1))
            code = SUITABLE_CODE if match.group(2) == "S" else UNSUITABLE_CODE
            row_codes.extend([code] * run_len)
        if pos != len(line) or len(row_codes) != width:
            raise InvalidParameterError("RLE row length mismatch: %r" % line)
        codes.extend(row_codes)

    return BenthicMap(
        width_cells=width,
        height_cells=height,
        cell_size=cell_size,
        origin=origin,
        cells=np.asarray(codes, dtype=np.uint8),
        seed=seed,
    )

"""Pitch geometry: the 33 interpolation centres and their location weights.

The pitch is split into two independently modelled regions:

* field of play, x in [0, 70] and y in [-10, 100], covered by 30 centres
  on a 5x6 grid (x in {0, 20, 35, 50, 70}, y in {-10, 20, 35, 65, 90, 100});
  a location's weights over the four corners of its grid cell come from
  bilinear interpolation.
* try area, y > 100, covered by 3 centres at x in {0, 35, 70} with no y
  coordinate; weights come from linear interpolation in x between the two
  bracketing centres.

A location in one region always has weight 0 on every centre of the other
region, so each weight vector has at most 4 (field) or 2 (try area)
non-zero entries and always sums to 1.

Centres are indexed 0..29 for the field of play (y-band major, x ascending
within a band, matching the conventional prior-table ordering) and 30..32
for the try area.
"""

from __future__ import annotations

import csv
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RegionError

X_NODES = (0.0, 20.0, 35.0, 50.0, 70.0)
Y_NODES = (-10.0, 20.0, 35.0, 65.0, 90.0, 100.0)
TRY_X_NODES = (0.0, 35.0, 70.0)

X_MIN, X_MAX = 0.0, 70.0
Y_MIN, Y_MAX = -10.0, 110.0
TRY_LINE_Y = 100.0

N_FIELD_CENTRES = len(X_NODES) * len(Y_NODES)
N_TRY_CENTRES = len(TRY_X_NODES)
N_CENTRES = N_FIELD_CENTRES + N_TRY_CENTRES

FIELD = "field"
TRY_AREA = "try"


@dataclass(frozen=True)
class Centre:
    """One mixture centre. Try-area centres have no y coordinate."""

    index: int
    region: str
    x: float
    y: float | None


def centres() -> tuple[Centre, ...]:
    """All 33 centres in index order."""
    out = []
    for iy, y in enumerate(Y_NODES):
        for ix, x in enumerate(X_NODES):
            out.append(Centre(index=iy * len(X_NODES) + ix, region=FIELD, x=x, y=y))
    for j, x in enumerate(TRY_X_NODES):
        out.append(Centre(index=N_FIELD_CENTRES + j, region=TRY_AREA, x=x, y=None))
    return tuple(out)


CENTRES = centres()


def field_centre_index(x: float, y: float) -> int:
    """Index of the field centre at exactly (x, y); raises if not a node."""
    try:
        return Y_NODES.index(y) * len(X_NODES) + X_NODES.index(x)
    except ValueError:
        raise RegionError(f"({x}, {y}) is not a field centre location") from None


def try_centre_index(x: float) -> int:
    """Index of the try-area centre at exactly x; raises if not a node."""
    try:
        return N_FIELD_CENTRES + TRY_X_NODES.index(x)
    except ValueError:
        raise RegionError(f"x={x} is not a try-area centre location") from None


def _cell_index(nodes, v: float) -> int:
    # Half-open convention: a location on an interior grid line belongs to
    # the cell on its greater side; the final node closes the last cell.
    return min(bisect_right(nodes, v) - 1, len(nodes) - 2)


def locate_cell(x: float, y: float) -> tuple[float, float, float, float]:
    """Grid-cell corner coordinates (x1, x2, y1, y2) containing (x, y).

    Only defined in the field of play.
    """
    if not (X_MIN <= x <= X_MAX and Y_MIN <= y <= TRY_LINE_Y):
        raise RegionError(f"({x}, {y}) is outside the field of play")
    ix = _cell_index(X_NODES, x)
    iy = _cell_index(Y_NODES, y)
    return X_NODES[ix], X_NODES[ix + 1], Y_NODES[iy], Y_NODES[iy + 1]


def field_weights(x: float, y: float) -> np.ndarray:
    """Bilinear weights over the 33 centres for a field-of-play location."""
    x1, x2, y1, y2 = locate_cell(x, y)
    d = (x2 - x1) * (y2 - y1)
    z11 = (x2 - x) * (y2 - y) / d
    z12 = (x2 - x) * (y - y1) / d
    z21 = (x - x1) * (y2 - y) / d
    z22 = (x - x1) * (y - y1) / d
    w = np.zeros(N_CENTRES)
    w[field_centre_index(x1, y1)] = z11
    w[field_centre_index(x1, y2)] = z12
    w[field_centre_index(x2, y1)] = z21
    w[field_centre_index(x2, y2)] = z22
    return w


def try_weights(x: float) -> np.ndarray:
    """Linear weights over the 33 centres for a try-area location."""
    if not X_MIN <= x <= X_MAX:
        raise RegionError(f"x={x} is outside the try area width")
    j = _cell_index(TRY_X_NODES, x)
    x1, x2 = TRY_X_NODES[j], TRY_X_NODES[j + 1]
    w = np.zeros(N_CENTRES)
    w[try_centre_index(x1)] = (x2 - x) / (x2 - x1)
    w[try_centre_index(x2)] = (x - x1) / (x2 - x1)
    return w


def weights_for(x: float, y: float) -> np.ndarray:
    """Interpolation weight vector for any on-pitch location.

    The try line y = 100 belongs to the field of play; the try area is
    strictly y > 100.
    """
    if not (X_MIN <= x <= X_MAX and Y_MIN <= y <= Y_MAX):
        raise RegionError(f"({x}, {y}) is outside the pitch")
    if y <= TRY_LINE_Y:
        return field_weights(x, y)
    return try_weights(x)


def weight_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorised ``weights_for``: rows of weights for many locations.

    Same conventions as the scalar functions; used for grid rendering and
    dataset preparation where a Python-level loop would dominate.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-D arrays of equal length")
    if np.any((xs < X_MIN) | (xs > X_MAX) | (ys < Y_MIN) | (ys > Y_MAX)):
        bad = np.flatnonzero((xs < X_MIN) | (xs > X_MAX) | (ys < Y_MIN) | (ys > Y_MAX))[0]
        raise RegionError(f"({xs[bad]}, {ys[bad]}) is outside the pitch")

    n = xs.shape[0]
    w = np.zeros((n, N_CENTRES))
    rows = np.arange(n)
    infield = ys <= TRY_LINE_Y

    if np.any(infield):
        xn = np.asarray(X_NODES)
        yn = np.asarray(Y_NODES)
        fx, fy = xs[infield], ys[infield]
        ix = np.minimum(np.searchsorted(xn, fx, side="right") - 1, len(xn) - 2)
        iy = np.minimum(np.searchsorted(yn, fy, side="right") - 1, len(yn) - 2)
        x1, x2 = xn[ix], xn[ix + 1]
        y1, y2 = yn[iy], yn[iy + 1]
        d = (x2 - x1) * (y2 - y1)
        base = iy * len(X_NODES) + ix
        r = rows[infield]
        w[r, base] = (x2 - fx) * (y2 - fy) / d
        w[r, base + len(X_NODES)] = (x2 - fx) * (fy - y1) / d
        w[r, base + 1] = (fx - x1) * (y2 - fy) / d
        w[r, base + len(X_NODES) + 1] = (fx - x1) * (fy - y1) / d

    if np.any(~infield):
        tn = np.asarray(TRY_X_NODES)
        tx = xs[~infield]
        j = np.minimum(np.searchsorted(tn, tx, side="right") - 1, len(tn) - 2)
        x1, x2 = tn[j], tn[j + 1]
        r = rows[~infield]
        w[r, N_FIELD_CENTRES + j] = (x2 - tx) / (x2 - x1)
        w[r, N_FIELD_CENTRES + j + 1] = (tx - x1) / (x2 - x1)

    return w


def save_centres_csv(path: str | Path) -> None:
    """Export the centre table (index, x, y, region); try centres get y=TRY."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "x", "y", "region"])
        for c in CENTRES:
            y = "TRY" if c.y is None else repr(c.y)
            writer.writerow([c.index, repr(c.x), y, c.region])

"""Location-level probabilities, EPV and their spreads; whole-pitch grids.

Evaluation mixes the 33 centre summaries with the location's interpolation
weights. The spread formulas follow the model description literally:

    P_sd(s; x, y)  = sqrt(sum_k z_k * sd_k(s)^2)
    EPV_sd(x, y)   = sqrt(sum_s P_sd(s; x, y)^2 * Points(s))

Standard independent-error propagation would square the weights and the
points values instead; that variant is available behind ``corrected=True``
on every spread function and on grid rendering, but the literal form is
the default everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, EpvkitError, GridMismatchError
from .mixture.gibbs import Posterior
from .outcomes import POINTS
from .pitch import X_MAX, X_MIN, Y_MIN, weights_for, weight_matrix

TRY_BAND_Y = 105.0  # representative y for try-area rows (no y is modelled there)

GRID_COLUMNS = (
    "x",
    "y",
    "region",
    "p_no",
    "p_drop",
    "p_pen",
    "p_u4",
    "p_c6",
    "epv",
    "sd_no",
    "sd_drop",
    "sd_pen",
    "sd_u4",
    "sd_c6",
    "epv_sd",
)


def prob_at(mean: np.ndarray, x: float, y: float) -> np.ndarray:
    """Outcome probabilities at a location: the weight-mixed centre rows."""
    return weights_for(x, y) @ mean


def epv_at(mean: np.ndarray, x: float, y: float) -> float:
    """Expected points of a possession at a location."""
    return float(prob_at(mean, x, y) @ POINTS)


def prob_sd_at(std: np.ndarray, x: float, y: float, corrected: bool = False) -> np.ndarray:
    """Per-outcome spread at a location (literal form unless corrected)."""
    w = weights_for(x, y)
    if corrected:
        w = w * w
    return np.sqrt(w @ (std * std))


def epv_sd_at(std: np.ndarray, x: float, y: float, corrected: bool = False) -> float:
    """EPV spread at a location (literal form unless corrected)."""
    psd = prob_sd_at(std, x, y, corrected)
    pts = POINTS * POINTS if corrected else POINTS
    return float(np.sqrt(np.sum(psd * psd * pts)))


@dataclass(frozen=True)
class SurfaceGrid:
    """Whole-pitch evaluation: field lattice plus one try-area row band."""

    resolution: float
    x: np.ndarray
    y: np.ndarray
    region: np.ndarray
    prob: np.ndarray
    epv: np.ndarray
    prob_sd: np.ndarray
    epv_sd: np.ndarray
    corrected: bool = False

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class DiffGrid:
    """Cell-wise team-minus-league differences on a shared row set."""

    resolution: float
    x: np.ndarray
    y: np.ndarray
    region: np.ndarray
    prob: np.ndarray
    epv: np.ndarray
    prob_sd: np.ndarray
    epv_sd: np.ndarray
    corrected: bool = False
    metadata: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]


def _axis(start: float, stop: float, step: float) -> np.ndarray:
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.minimum(start + np.arange(n) * step, stop)


def render_surface(
    mean: np.ndarray,
    std: np.ndarray,
    resolution: float = 1.0,
    corrected: bool = False,
) -> SurfaceGrid:
    """Evaluate summary tables over the pitch; rows are y-major over the
    field lattice, then the try band at every grid x."""
    if not 0.0 < resolution <= 10.0:
        raise ConfigError(f"resolution must be in (0, 10], got {resolution}")
    xs = _axis(X_MIN, X_MAX, resolution)
    ys = _axis(Y_MIN, 100.0, resolution)
    gx = np.concatenate([np.tile(xs, ys.shape[0]), xs])
    gy = np.concatenate([np.repeat(ys, xs.shape[0]), np.full(xs.shape[0], TRY_BAND_Y)])
    region = np.array(["field"] * (xs.shape[0] * ys.shape[0]) + ["try"] * xs.shape[0])

    w = weight_matrix(gx, gy)
    prob = w @ mean
    epv = prob @ POINTS
    wz = w * w if corrected else w
    prob_sd = np.sqrt(wz @ (std * std))
    pts = POINTS * POINTS if corrected else POINTS
    epv_sd = np.sqrt((prob_sd * prob_sd) @ pts)
    return SurfaceGrid(
        resolution=float(resolution),
        x=gx,
        y=gy,
        region=region,
        prob=prob,
        epv=epv,
        prob_sd=prob_sd,
        epv_sd=epv_sd,
        corrected=corrected,
    )


def render_grid(
    posterior: Posterior, resolution: float = 1.0, corrected: bool = False
) -> SurfaceGrid:
    """Grid of a fitted posterior's mean and spread summaries."""
    return render_surface(posterior.mean, posterior.std, resolution, corrected)


def diff_grid(team: SurfaceGrid, league: SurfaceGrid, model: str = "attack") -> DiffGrid:
    """Team grid minus league grid, cell by cell."""
    if team.resolution != league.resolution:
        raise GridMismatchError(
            f"resolutions differ: {team.resolution} vs {league.resolution}"
        )
    if team.corrected != league.corrected:
        raise GridMismatchError("grids mix literal and corrected spread forms")
    if not (
        np.array_equal(team.x, league.x)
        and np.array_equal(team.y, league.y)
        and np.array_equal(team.region, league.region)
    ):
        raise GridMismatchError("grids cover different row sets")
    return DiffGrid(
        resolution=team.resolution,
        x=team.x,
        y=team.y,
        region=team.region,
        prob=team.prob - league.prob,
        epv=team.epv - league.epv,
        prob_sd=team.prob_sd - league.prob_sd,
        epv_sd=team.epv_sd - league.epv_sd,
        corrected=team.corrected,
        metadata={
            "model": model,
            "convention": (
                "positive = team value above league value; favourable for the "
                "team except the no-points column (and inverted when reading "
                "a defence model)"
            ),
        },
    )


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def save_grid_csv(grid: SurfaceGrid | DiffGrid, path: str | Path) -> None:
    """Write a grid (or diff grid) with 9 significant digits per value."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(GRID_COLUMNS) + "\n")
        for i in range(grid.n_rows):
            cells = [
                _fmt(grid.x[i]),
                _fmt(grid.y[i]),
                str(grid.region[i]),
                *(_fmt(v) for v in grid.prob[i]),
                _fmt(grid.epv[i]),
                *(_fmt(v) for v in grid.prob_sd[i]),
                _fmt(grid.epv_sd[i]),
            ]
            fh.write(",".join(cells) + "\n")


def save_grid(grid: SurfaceGrid | DiffGrid, csv_path: str | Path) -> None:
    """Write the grid CSV plus a JSON metadata sidecar next to it."""
    csv_path = Path(csv_path)
    save_grid_csv(grid, csv_path)
    meta = {
        "columns": list(GRID_COLUMNS),
        "corrected": grid.corrected,
        "kind": "diff" if isinstance(grid, DiffGrid) else "surface",
        "resolution": grid.resolution,
        "rows": grid.n_rows,
        "try_band_y": TRY_BAND_Y,
    }
    if isinstance(grid, DiffGrid):
        meta["metadata"] = grid.metadata
    csv_path.with_suffix(".json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


_HEATMAP_LAYERS = ("p_no", "p_drop", "p_pen", "p_u4", "p_c6", "epv")


def save_heatmaps(grid: SurfaceGrid | DiffGrid, directory: str | Path, stem: str = "surface") -> list[Path]:
    """Emit one PNG per outcome plus EPV; try-area rows are left out.

    Brighter cells mean higher values. Needs matplotlib (the ``plots``
    extra).
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise EpvkitError(
            "PNG export needs matplotlib; install the 'plots' extra"
        ) from None

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    infield = grid.region == "field"
    xs = np.unique(grid.x[infield])
    ys = np.unique(grid.y[infield])
    written = []
    for j, name in enumerate(_HEATMAP_LAYERS):
        values = grid.epv if name == "epv" else grid.prob[:, j]
        img = values[infield].reshape(ys.shape[0], xs.shape[0])
        fig, ax = plt.subplots(figsize=(4.2, 6.0))
        im = ax.imshow(
            img,
            origin="lower",
            extent=(xs[0], xs[-1], ys[0], ys[-1]),
            aspect="auto",
            cmap="viridis",
        )
        ax.set_xlabel("x (m)")
        ax.set_ylabel("y (m)")
        ax.set_title(name)
        fig.colorbar(im, ax=ax, shrink=0.8)
        out = directory / f"{stem}_{name}.png"
        fig.savefig(out, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(out)
    return written


def density_histogram(
    xs: np.ndarray, ys: np.ndarray, bin_size: float = 5.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """2-D action-location histogram over the pitch (a cheap density view)."""
    if bin_size <= 0:
        raise ConfigError("bin_size must be positive")
    x_edges = _axis(X_MIN, X_MAX, bin_size)
    if x_edges[-1] < X_MAX:
        x_edges = np.append(x_edges, X_MAX)
    y_edges = _axis(Y_MIN, 110.0, bin_size)
    if y_edges[-1] < 110.0:
        y_edges = np.append(y_edges, 110.0)
    counts, _, _ = np.histogram2d(xs, ys, bins=(x_edges, y_edges))
    return counts, x_edges, y_edges


def save_density_csv(
    xs: np.ndarray, ys: np.ndarray, path: str | Path, bin_size: float = 5.0
) -> None:
    counts, x_edges, y_edges = density_histogram(xs, ys, bin_size)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("x_low,x_high,y_low,y_high,count\n")
        for i in range(counts.shape[0]):
            for j in range(counts.shape[1]):
                fh.write(
                    f"{_fmt(x_edges[i])},{_fmt(x_edges[i + 1])},"
                    f"{_fmt(y_edges[j])},{_fmt(y_edges[j + 1])},"
                    f"{int(counts[i, j])}\n"
                )

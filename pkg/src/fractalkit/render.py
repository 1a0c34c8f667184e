"""Deterministic rasterization of point clouds and matplotlib report figures.

The PPM path is byte-reproducible: white background, black pixel wherever a
cloud point falls into the pixel's viewport cell.  The matplotlib helpers
back the CLI's report output (figures written next to the delimited files).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import ContractError, StructuralError

MIN_RENDER_SIZE = 16


@dataclass(frozen=True)
class Viewport:
    """Axis-aligned window (x_min, x_max) x (y_min, y_max)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise StructuralError("viewport must be nonempty")


def rasterize(
    cloud: PointCloud,
    viewport: Viewport,
    width: int,
    height: int,
    axes: tuple[int, int] = (0, 1),
) -> np.ndarray:
    """Boolean occupancy image (row 0 = top). Points outside the viewport are
    dropped; points on the far edges are assigned to the last cell."""
    if width < MIN_RENDER_SIZE or height < MIN_RENDER_SIZE:
        raise ContractError(f"render size must be >= {MIN_RENDER_SIZE} pixels per side")
    ax, ay = axes
    if cloud.dim == 2 and axes == (0, 1):
        pass
    elif not (0 <= ax < cloud.dim and 0 <= ay < cloud.dim and ax != ay):
        raise ContractError(
            "non-2D clouds need a valid projection pair of distinct axes"
        )
    x = cloud.points[:, ax]
    y = cloud.points[:, ay]
    inside = (
        (x >= viewport.x_min)
        & (x <= viewport.x_max)
        & (y >= viewport.y_min)
        & (y <= viewport.y_max)
    )
    img = np.zeros((height, width), dtype=bool)
    if not inside.any():
        return img
    x = x[inside]
    y = y[inside]
    ix = np.minimum(
        ((x - viewport.x_min) / (viewport.x_max - viewport.x_min) * width).astype(np.int64),
        width - 1,
    )
    iy = np.minimum(
        ((y - viewport.y_min) / (viewport.y_max - viewport.y_min) * height).astype(np.int64),
        height - 1,
    )
    img[height - 1 - iy, ix] = True
    return img


def ppm_bytes(occupancy: np.ndarray) -> bytes:
    """Binary P6 pixmap: white background, black occupied pixels."""
    h, w = occupancy.shape
    gray = np.where(occupancy, 0, 255).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    header = f"P6\n{w} {h}\n255\n".encode()
    return header + rgb.tobytes()


def render(
    cloud: PointCloud,
    viewport: Viewport,
    width: int,
    height: int,
    out_path,
    axes: tuple[int, int] = (0, 1),
) -> None:
    """Write the cloud as a deterministic P6 PPM file."""
    occ = rasterize(cloud, viewport, width, height, axes=axes)
    Path(out_path).write_bytes(ppm_bytes(occ))


def viewport_for(cloud: PointCloud, axes: tuple[int, int] = (0, 1), pad: float = 0.05) -> Viewport:
    """Bounding viewport with a proportional margin."""
    ax, ay = axes
    x = cloud.points[:, ax]
    y = cloud.points[:, ay]
    dx = (x.max() - x.min()) or 1.0
    dy = (y.max() - y.min()) or 1.0
    return Viewport(
        float(x.min() - pad * dx),
        float(x.max() + pad * dx),
        float(y.min() - pad * dy),
        float(y.max() + pad * dy),
    )


# ---------------------------------------------------------------------------
# matplotlib figures for the report path
# ---------------------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def save_cloud_figure(cloud: PointCloud, path, title: str = "", axes=(0, 1)) -> None:
    plt = _pyplot()
    ax_i, ax_j = axes
    fig, ax = plt.subplots(figsize=(5, 5))
    if cloud.dim == 1:
        xs = cloud.points[:, 0]
        ax.plot(xs, np.zeros_like(xs), ".", ms=1.5, color="black")
    else:
        ax.plot(cloud.points[:, ax_i], cloud.points[:, ax_j], ".", ms=0.5, color="black")
    ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_loglog_figure(estimate, path, title: str = "box-counting fit") -> None:
    plt = _pyplot()
    x = -np.log(np.asarray(estimate.scales))
    y = np.log(np.asarray(estimate.counts, dtype=float))
    coef = np.polyfit(x, y, 1)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(x, y, "o", color="black", label="counts")
    ax.plot(x, np.polyval(coef, x), "-", color="gray",
            label=f"slope {estimate.slope:.4f} (R^2 {estimate.r_squared:.4f})")
    ax.set_xlabel("-log r")
    ax.set_ylabel("log N(r)")
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_function_figure(g, path, knots=None, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(g.grid, g.values, "-", lw=0.7, color="black")
    if knots is not None:
        ax.plot(knots.x, knots.y, "o", ms=4, color="red")
    if title:
        ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("g(x)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

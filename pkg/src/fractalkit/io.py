"""File formats: cloud CSV, product-set manifests, IFS JSON, knots, estimates.

Cloud CSV puts one point per row (columns = coordinates) under a header row
``# dim=<d> resolution=<eps>``.  A product set is one CSV per factor plus a
JSON manifest listing the factor files in order.  IFS definitions are JSON
with ``dimension`` and ``maps`` (each ``{linear, offset, lipschitz}``), an
optional ``condensation`` block, and ``factors`` for products.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .cloud import PointCloud, ProductSet
from .condensation import CondensationSet, CondensedIfs, CondensedProductIfs
from .dimension import DimensionEstimate
from .errors import StructuralError
from .fif import InterpolationData, SampledFunction
from .ifs import AffineMap, IfsSystem, ProductIfs


def write_cloud_csv(cloud: PointCloud, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# dim={cloud.dim} resolution={cloud.resolution!r}\n")
        np.savetxt(fh, cloud.points, delimiter=",", fmt="%.17g")


def read_cloud_csv(path) -> PointCloud:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise StructuralError(f"{path}: missing '# dim=... resolution=...' header")
        fields = dict(
            part.split("=", 1) for part in header.lstrip("#").split() if "=" in part
        )
        try:
            dim = int(fields["dim"])
            resolution = float(fields["resolution"])
        except (KeyError, ValueError) as exc:
            raise StructuralError(f"{path}: malformed cloud header: {header}") from exc
        pts = np.loadtxt(fh, delimiter=",", ndmin=2)
    if pts.shape[1] != dim:
        raise StructuralError(
            f"{path}: header says dim={dim} but rows have {pts.shape[1]} columns"
        )
    return PointCloud(pts, resolution=resolution)


def write_product_set(ps: ProductSet, manifest_path) -> None:
    """Write one CSV per factor next to a JSON manifest naming them in order."""
    manifest_path = Path(manifest_path)
    stem = manifest_path.stem
    names = []
    for k, factor in enumerate(ps.factors):
        name = f"{stem}_factor{k}.csv"
        write_cloud_csv(factor, manifest_path.parent / name)
        names.append(name)
    manifest_path.write_text(json.dumps({"factors": names}, indent=2) + "\n")


def read_product_set(manifest_path) -> ProductSet:
    manifest_path = Path(manifest_path)
    spec = json.loads(manifest_path.read_text())
    names = spec.get("factors")
    if not isinstance(names, list) or not names:
        raise StructuralError(f"{manifest_path}: manifest needs a 'factors' list")
    factors = tuple(read_cloud_csv(manifest_path.parent / n) for n in names)
    return ProductSet(factors)


# ---------------------------------------------------------------------------
# IFS definition JSON
# ---------------------------------------------------------------------------

def _parse_map(obj: dict, dim: int) -> AffineMap:
    if "linear" not in obj or "offset" not in obj:
        raise StructuralError("each map needs 'linear' and 'offset'")
    linear = np.asarray(obj["linear"], dtype=np.float64)
    if linear.ndim == 0:
        linear = linear.reshape(1, 1)
    offset = np.atleast_1d(np.asarray(obj["offset"], dtype=np.float64))
    if linear.shape != (dim, dim):
        raise StructuralError(
            f"map linear part has shape {linear.shape}, expected ({dim}, {dim})"
        )
    lipschitz = obj.get("lipschitz")
    if lipschitz is None:
        lipschitz = float(np.linalg.norm(linear, 2))
    return AffineMap(linear, offset, float(lipschitz))


def _parse_condensation(obj: Any, dim: int, base_dir: Path) -> CondensationSet:
    if isinstance(obj, dict) and "csv" in obj:
        cloud = read_cloud_csv(base_dir / obj["csv"])
    elif isinstance(obj, dict) and "points" in obj:
        pts = np.asarray(obj["points"], dtype=np.float64)
        cloud = PointCloud(pts, resolution=float(obj.get("resolution", 0.0)))
    else:
        raise StructuralError("condensation needs 'points' or a 'csv' reference")
    if cloud.dim != dim:
        raise StructuralError(
            f"condensation dimension {cloud.dim} does not match system {dim}"
        )
    return CondensationSet(cloud)


def _parse_single(spec: dict, base_dir: Path):
    if "dimension" not in spec or "maps" not in spec:
        raise StructuralError("IFS definition needs 'dimension' and 'maps'")
    dim = int(spec["dimension"])
    maps = tuple(_parse_map(m, dim) for m in spec["maps"])
    system = IfsSystem(maps, label=spec.get("label", ""))
    if "condensation" in spec:
        return CondensedIfs(system, _parse_condensation(spec["condensation"], dim, base_dir))
    return system


def parse_ifs(spec: dict, base_dir: Path | None = None):
    """Parse an IFS definition dict.

    Returns IfsSystem, CondensedIfs, ProductIfs, or CondensedProductIfs
    depending on the presence of 'factors' and 'condensation' blocks.
    """
    base_dir = Path(".") if base_dir is None else base_dir
    if "factors" in spec:
        parsed = [_parse_single(f, base_dir) for f in spec["factors"]]
        condensed = [isinstance(p, CondensedIfs) for p in parsed]
        if all(condensed):
            return CondensedProductIfs(tuple(parsed))
        if any(condensed):
            raise StructuralError(
                "either every factor or no factor may carry a condensation set"
            )
        return ProductIfs(tuple(parsed))
    return _parse_single(spec, base_dir)


def load_ifs(path):
    path = Path(path)
    return parse_ifs(json.loads(path.read_text()), base_dir=path.parent)


# ---------------------------------------------------------------------------
# interpolation data and sampled functions
# ---------------------------------------------------------------------------

def read_knots_csv(path) -> InterpolationData:
    """Knot file: two comma-separated columns x,y (comment lines allowed)."""
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise StructuralError(f"{path}: knot files need exactly columns x,y")
    return InterpolationData(data[:, 0], data[:, 1])


def write_sampled_function_csv(g: SampledFunction, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("# x,g\n")
        np.savetxt(fh, np.column_stack([g.grid, g.values]), delimiter=",", fmt="%.17g")


def write_estimate_json(est: DimensionEstimate, path) -> None:
    payload = {
        "slope": est.slope,
        "scales": list(est.scales),
        "counts": list(est.counts),
        "r_squared": est.r_squared,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")

"""SVG rendering of 1D/2D decompositions.

Cells are rasterized by locating grid points exactly in the tree (per column
for 2D, so univariate root isolations are shared across rows); TRUE cells are
green, FALSE cells red, and the per-column breakpoints are stroked so the
cell boundaries trace the defining curves.
"""
from __future__ import annotations

from fractions import Fraction as F
from typing import Sequence

from .realroots import SamplePoint, compare
from .solver import Leaf, Node, Tree
from .stats import Workspace
from .verify import leaf_cell, tree_locate, _leaf_paths

TRUE_COLOR = "#66bb6a"
FALSE_COLOR = "#ef5350"
BOUNDARY_COLOR = "#263238"


def _finite_bounds(tree: Tree, level: int) -> list[float]:
    out = []

    def walk(t):
        if isinstance(t, Leaf):
            return
        for e in t.edges:
            if e.interval.level == level:
                for v in (e.lo, e.hi):
                    if v is not None:
                        v.refine_below(F(1, 1024))
                        out.append(float(v))
            walk(e.child)

    walk(tree)
    return out


def viewport_for(tree: Tree, dims: int) -> list[tuple[float, float]]:
    """Bounding box of the finite realized bounds, padded 20%; [-5, 5] fallback."""
    box = []
    for level in range(1, dims + 1):
        vals = _finite_bounds(tree, level)
        if not vals:
            box.append((-5.0, 5.0))
            continue
        lo, hi = min(vals), max(vals)
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        pad = 0.2 * (hi - lo)
        box.append((lo - pad, hi + pad))
    return box


def _label_at(tree: Tree, point: SamplePoint, ws: Workspace) -> bool | None:
    hits = tree_locate(tree, point, ws)
    if len(hits) != 1:
        return None
    return hits[0][0].value


def render_svg(
    tree: Tree,
    dims: int,
    ws: Workspace | None = None,
    resolution: int = 400,
    viewport: Sequence[tuple[float, float]] | None = None,
    sample_points: Sequence[SamplePoint] | None = None,
    size: int = 480,
) -> str:
    """SVG document for a decomposition of 1 or 2 dimensions."""
    if dims > 2:
        raise ValueError("plotting supports at most 2 dimensions")
    ws = ws or Workspace()
    box = list(viewport) if viewport else viewport_for(tree, dims)
    if dims == 1:
        return _render_1d(tree, ws, box[0], resolution, size)
    return _render_2d(tree, ws, box, resolution, sample_points or [], size)


def _frac_grid(lo: float, hi: float, n: int) -> list[F]:
    flo, fhi = F(lo).limit_denominator(10 ** 6), F(hi).limit_denominator(10 ** 6)
    step = (fhi - flo) / n
    return [flo + step * (2 * k + 1) / 2 for k in range(n)]


def _render_1d(tree: Tree, ws: Workspace, box: tuple[float, float], resolution: int, size: int) -> str:
    width, height = size, 60
    xs = _frac_grid(box[0], box[1], resolution)
    px = width / resolution
    body = [f'<rect width="{width}" height="{height}" fill="white"/>']
    prev = None
    for i, x in enumerate(xs):
        label = _label_at(tree, SamplePoint([x]), ws)
        if label is None:
            prev = None
            continue
        color = TRUE_COLOR if label else FALSE_COLOR
        body.append(
            f'<rect x="{i * px:.2f}" y="10" width="{px + 0.5:.2f}" height="40" fill="{color}"/>'
        )
        if prev is not None and prev != label:
            body.append(
                f'<line x1="{i * px:.2f}" y1="5" x2="{i * px:.2f}" y2="55" '
                f'stroke="{BOUNDARY_COLOR}" stroke-width="1"/>'
            )
        prev = label
    return _document(width, height, body)


def _render_2d(tree: Tree, ws: Workspace, box, resolution: int, samples, size: int) -> str:
    width = height = size
    xs = _frac_grid(box[0][0], box[0][1], resolution)
    ys = _frac_grid(box[1][0], box[1][1], resolution)
    px = width / resolution
    py = height / resolution
    body = [f'<rect width="{width}" height="{height}" fill="white"/>']
    boundaries = []
    for i, x in enumerate(xs):
        # one exact location pass per column; consecutive equal labels merge
        runs: list[tuple[int, int, bool]] = []
        for j, y in enumerate(ys):
            label = _label_at(tree, SamplePoint([x, y]), ws)
            if label is None:
                continue
            if runs and runs[-1][2] == label and runs[-1][1] == j - 1:
                runs[-1] = (runs[-1][0], j, label)
            else:
                runs.append((j, j, label))
        for j0, j1, label in runs:
            color = TRUE_COLOR if label else FALSE_COLOR
            y_top = height - (j1 + 1) * py
            body.append(
                f'<rect x="{i * px:.2f}" y="{y_top:.2f}" width="{px + 0.5:.2f}" '
                f'height="{(j1 - j0 + 1) * py + 0.5:.2f}" fill="{color}"/>'
            )
        for (a0, a1, la), (b0, b1, lb) in zip(runs, runs[1:]):
            if la != lb and b0 == a1 + 1:
                y = height - b0 * py
                boundaries.append(
                    f'<line x1="{i * px:.2f}" y1="{y:.2f}" x2="{(i + 1) * px:.2f}" '
                    f'y2="{y:.2f}" stroke="{BOUNDARY_COLOR}" stroke-width="1"/>'
                )
    body.extend(boundaries)
    for pt in samples:
        try:
            cx = (float(pt[0]) - box[0][0]) / (box[0][1] - box[0][0]) * width
            cy = height - (float(pt[1]) - box[1][0]) / (box[1][1] - box[1][0]) * height
        except (IndexError, ZeroDivisionError):
            continue
        if 0 <= cx <= width and 0 <= cy <= height:
            body.append(
                f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="black"/>'
            )
    return _document(width, height, body)


def _document(width: int, height: int, body: list[str]) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n' + "\n".join(body) + "\n</svg>\n"
    )

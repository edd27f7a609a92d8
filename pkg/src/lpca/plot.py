"""SVG maps of fitted score spaces and loading bar charts.

The output is plain SVG text built with :mod:`xml.etree.ElementTree`, so
identical inputs give byte-identical files.

Colors:

* proficiency bands: very critical ``#d7191c``, critical ``#fdae61``,
  intermediate ``#a6d96a``, adequate ``#1a9641``; missing scores ``#999999``
* descriptor maps: ``#2c7bb6`` where the fitted probability exceeds 0.5,
  ``#e66101`` otherwise
* categories: the ten-color cycle in :data:`CATEGORY_COLORS`, assigned to
  the sorted distinct values
"""
import dataclasses
import enum
import math
import xml.etree.ElementTree as ET

import numpy as np

from .exceptions import DataError
from .ingest import ProficiencyBand, band_of
from .irt import Side, classify_side, relative_loadings, to_hyperplanes

__all__ = [
    "MapKind",
    "ColorMode",
    "PlotSpec",
    "BAND_COLORS",
    "BINARY_COLORS",
    "CATEGORY_COLORS",
    "levelset_segment",
    "proficiency_map",
    "descriptor_map",
    "category_map",
    "loadings_bar",
    "render",
]

BAND_COLORS = {
    ProficiencyBand.VERY_CRITICAL: "#d7191c",
    ProficiencyBand.CRITICAL: "#fdae61",
    ProficiencyBand.INTERMEDIATE: "#a6d96a",
    ProficiencyBand.ADEQUATE: "#1a9641",
}
MISSING_COLOR = "#999999"
BINARY_COLORS = {True: "#2c7bb6", False: "#e66101"}
CATEGORY_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

_MARGIN = dict(left=60, right=160, top=30, bottom=50)


class MapKind(str, enum.Enum):
    SCATTER = "scatter"
    LOADINGS_BAR = "loadings"


class ColorMode(str, enum.Enum):
    PROFICIENCY = "proficiency"
    DESCRIPTOR = "descriptor"
    CATEGORY = "category"


@dataclasses.dataclass(frozen=True)
class PlotSpec:
    """What to draw.

    ``target`` names the descriptor (DESCRIPTOR mode) or metadata column
    (CATEGORY mode). ``axes`` are 1-based component indices; a loadings
    chart uses the first one.
    """
    kind: MapKind = MapKind.SCATTER
    color_mode: ColorMode = ColorMode.PROFICIENCY
    target: str = None
    overlay_levelset: int = None
    axes: tuple = (1, 2)
    width: int = 640
    height: int = 480
    point_radius: float = 2.5

    def __post_init__(self):
        object.__setattr__(self, "kind", MapKind(self.kind))
        object.__setattr__(self, "color_mode", ColorMode(self.color_mode))
        axes = tuple(int(a) for a in self.axes)
        if len(axes) != 2 or axes[0] == axes[1] or min(axes) < 1:
            raise DataError(f"axes must be two distinct indices >= 1: {axes}")
        object.__setattr__(self, "axes", axes)


def _fmt(v):
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _tick_label(v):
    return "0" if v == 0 else f"{v:.3g}"


class _Frame:
    """Maps data coordinates to pixels inside the plot area."""

    def __init__(self, xlim, ylim, width, height):
        self.xlim, self.ylim = xlim, ylim
        self.x0 = _MARGIN["left"]
        self.x1 = width - _MARGIN["right"]
        self.y0 = height - _MARGIN["bottom"]
        self.y1 = _MARGIN["top"]

    def px(self, x):
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * (self.x1 - self.x0)

    def py(self, y):
        lo, hi = self.ylim
        return self.y0 + (y - lo) / (hi - lo) * (self.y1 - self.y0)


def _limits(v):
    lo, hi = float(np.min(v)), float(np.max(v))
    span = hi - lo
    if span == 0.0:
        span = max(abs(lo), 1.0)
    return lo - 0.05 * span, hi + 0.05 * span


def _svg_root(width, height, title):
    root = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(width), "height": str(height),
        "viewBox": f"0 0 {width} {height}",
        "font-family": "sans-serif", "font-size": "11",
    })
    ET.SubElement(root, "title").text = title
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": str(width),
                                 "height": str(height), "fill": "white"})
    return root


def _to_text(root):
    ET.indent(root, space=" ")
    return ('<?xml version="1.0" encoding="UTF-8"?>\n'
            + ET.tostring(root, encoding="unicode") + "\n")


def _text(parent, x, y, label, **attrs):
    el = ET.SubElement(parent, "text", {"x": _fmt(x), "y": _fmt(y), **attrs})
    el.text = label
    return el


def _draw_axes(root, frame, xlabel, ylabel):
    g = ET.SubElement(root, "g", {"class": "axes"})
    ET.SubElement(g, "rect", {
        "x": _fmt(frame.x0), "y": _fmt(frame.y1),
        "width": _fmt(frame.x1 - frame.x0), "height": _fmt(frame.y0 - frame.y1),
        "fill": "none", "stroke": "#333333"})
    for v in np.linspace(*frame.xlim, 5):
        x = frame.px(v)
        ET.SubElement(g, "line", {"x1": _fmt(x), "y1": _fmt(frame.y0),
                                  "x2": _fmt(x), "y2": _fmt(frame.y0 + 4),
                                  "stroke": "#333333"})
        _text(g, x, frame.y0 + 16, _tick_label(v), **{"text-anchor": "middle"})
    for v in np.linspace(*frame.ylim, 5):
        y = frame.py(v)
        ET.SubElement(g, "line", {"x1": _fmt(frame.x0 - 4), "y1": _fmt(y),
                                  "x2": _fmt(frame.x0), "y2": _fmt(y),
                                  "stroke": "#333333"})
        _text(g, frame.x0 - 6, y + 4, _tick_label(v), **{"text-anchor": "end"})
    _text(g, (frame.x0 + frame.x1) / 2, frame.y0 + 36, xlabel,
          **{"text-anchor": "middle"})
    yl = _text(g, 14, (frame.y0 + frame.y1) / 2, ylabel,
               **{"text-anchor": "middle"})
    yl.set("transform", f"rotate(-90 14 {_fmt((frame.y0 + frame.y1) / 2)})")


def _draw_legend(root, frame, entries, title=None):
    g = ET.SubElement(root, "g", {"class": "legend"})
    x = frame.x1 + 14
    y = frame.y1 + 6
    if title:
        _text(g, x, y + 8, title, **{"font-weight": "bold"})
        y += 18
    for label, color in entries:
        ET.SubElement(g, "rect", {"x": _fmt(x), "y": _fmt(y), "width": "10",
                                  "height": "10", "fill": color})
        _text(g, x + 16, y + 9, label, **{"class": "legend-label"})
        y += 16


def _axis_pair(scores, axes):
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[1] < 2:
        raise DataError("a scatter map needs at least two score dimensions")
    a, b = axes
    if max(a, b) > scores.shape[1]:
        raise DataError(
            f"axes {axes} exceed the {scores.shape[1]} fitted components")
    return scores[:, a - 1], scores[:, b - 1]


def _scatter(scores, colors, axes, spec, title, sides=None):
    xs, ys = _axis_pair(scores, axes)
    frame = _Frame(_limits(xs), _limits(ys), spec.width, spec.height)
    root = _svg_root(spec.width, spec.height, title)
    _draw_axes(root, frame, f"PC{axes[0]}", f"PC{axes[1]}")
    g = ET.SubElement(root, "g", {"class": "points"})
    for i, (x, y, c) in enumerate(zip(xs, ys, colors)):
        attrs = {"class": "point", "cx": _fmt(frame.px(x)),
                 "cy": _fmt(frame.py(y)), "r": _fmt(spec.point_radius),
                 "fill": c, "fill-opacity": "0.7"}
        if sides is not None:
            attrs["data-side"] = sides[i].name.lower()
        ET.SubElement(g, "circle", attrs)
    return root, frame


def proficiency_map(scores, proficiency, spec=PlotSpec(), params=None):
    """Scatter of two score axes colored by proficiency band.

    ``params`` is only needed when ``spec.overlay_levelset`` asks for a
    descriptor's level-set line.
    """
    prof = np.asarray(proficiency, dtype=float)
    colors = [MISSING_COLOR if math.isnan(p) else BAND_COLORS[band_of(p)]
              for p in prof]
    root, frame = _scatter(scores, colors, spec.axes, spec, "Proficiency map")
    _maybe_overlay(root, frame, scores, spec, params)
    _draw_legend(root, frame,
                 [(band.label, BAND_COLORS[band]) for band in ProficiencyBand],
                 title="Proficiency")
    return _to_text(root)


def levelset_segment(b, c, xlim, ylim):
    """Part of the line ``b[0] x + b[1] y = c`` inside the box.

    Returns ``((x1, y1), (x2, y2))`` or None when the line misses the box
    or ``b`` is zero.
    """
    bx, by = float(b[0]), float(b[1])
    if bx == 0.0 and by == 0.0:
        return None
    pts = []
    if by != 0.0:
        for x in xlim:
            y = (c - bx * x) / by
            if ylim[0] <= y <= ylim[1]:
                pts.append((x, y))
    if bx != 0.0:
        for y in ylim:
            x = (c - by * y) / bx
            if xlim[0] <= x <= xlim[1]:
                pts.append((x, y))
    pts = sorted(set(pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def descriptor_map(scores, params, descriptor, spec=PlotSpec()):
    """Scatter colored by whether the fitted probability of ``descriptor``
    exceeds 0.5, with that descriptor's 0.5 level-set line.

    For models with more than two components the line is the slice of the
    level-set hyperplane at the mean of the components not shown.
    """
    j = _descriptor_index(params, descriptor)
    scores = np.asarray(scores, dtype=float)
    h = to_hyperplanes(params)[j]
    sides = [classify_side(h, psi) for psi in scores]
    colors = [BINARY_COLORS[s is Side.POSITIVE] for s in sides]
    name = _descriptor_name(params, j)
    root, frame = _scatter(scores, colors, spec.axes, spec,
                           f"Descriptor map {name}", sides=sides)
    _draw_levelset(root, frame, scores, params, j, spec.axes)
    _draw_legend(root, frame, [("p > 0.5", BINARY_COLORS[True]),
                               ("p <= 0.5", BINARY_COLORS[False])],
                 title=name)
    return _to_text(root)


def category_map(scores, values, spec=PlotSpec(), title="Category",
                 params=None):
    """Scatter colored by a categorical metadata column."""
    values = [str(v) for v in values]
    levels = sorted(set(values))
    palette = {v: CATEGORY_COLORS[i % len(CATEGORY_COLORS)]
               for i, v in enumerate(levels)}
    root, frame = _scatter(scores, [palette[v] for v in values], spec.axes,
                           spec, f"{title} map")
    _maybe_overlay(root, frame, scores, spec, params)
    _draw_legend(root, frame, [(v, palette[v]) for v in levels], title=title)
    return _to_text(root)


def loadings_bar(params, component=1, spec=PlotSpec(width=800, height=360)):
    """Bar chart of one component's relative loadings, largest first, with
    the uniform share ``100 / d`` as a dashed reference line."""
    loads, mean = relative_loadings(params, component)
    names = [_descriptor_name(params, j) for j in range(params.d)]
    order = sorted(range(params.d), key=lambda j: (-loads[j], j))
    top = max(float(loads.max()), mean) * 1.1
    frame = _Frame((0.0, float(params.d)), (0.0, top), spec.width, spec.height)
    root = _svg_root(spec.width, spec.height,
                     f"Relative loadings of PC{component}")
    g = ET.SubElement(root, "g", {"class": "axes"})
    ET.SubElement(g, "line", {"x1": _fmt(frame.x0), "y1": _fmt(frame.y0),
                              "x2": _fmt(frame.x1), "y2": _fmt(frame.y0),
                              "stroke": "#333333"})
    ET.SubElement(g, "line", {"x1": _fmt(frame.x0), "y1": _fmt(frame.y0),
                              "x2": _fmt(frame.x0), "y2": _fmt(frame.y1),
                              "stroke": "#333333"})
    for v in np.linspace(0.0, top, 5):
        _text(g, frame.x0 - 6, frame.py(v) + 4, f"{v:.1f}",
              **{"text-anchor": "end"})
    yl = _text(g, 14, (frame.y0 + frame.y1) / 2, "Loadings in %",
               **{"text-anchor": "middle"})
    yl.set("transform", f"rotate(-90 14 {_fmt((frame.y0 + frame.y1) / 2)})")

    bars = ET.SubElement(root, "g", {"class": "bars"})
    for pos, j in enumerate(order):
        left, right = frame.px(pos + 0.1), frame.px(pos + 0.9)
        ET.SubElement(bars, "rect", {
            "class": "bar", "data-name": names[j],
            "data-value": f"{loads[j]:.4f}",
            "x": _fmt(left), "y": _fmt(frame.py(loads[j])),
            "width": _fmt(right - left),
            "height": _fmt(frame.y0 - frame.py(loads[j])),
            "fill": "#6f8fd9"})
        _text(bars, (left + right) / 2, frame.y0 + 14, names[j],
              **{"text-anchor": "middle", "font-size": "9"})
    ym = frame.py(mean)
    ET.SubElement(root, "line", {
        "class": "mean-rule", "data-mean": f"{mean:.4f}",
        "x1": _fmt(frame.x0), "y1": _fmt(ym),
        "x2": _fmt(frame.x1), "y2": _fmt(ym),
        "stroke": "black", "stroke-dasharray": "5,4"})
    _text(root, frame.x1 + 6, ym + 4, f"Mean ({mean:.2f}%)")
    return _to_text(root)


def _draw_levelset(root, frame, scores, params, j, axes):
    h = to_hyperplanes(params)[j]
    a, b = (ax - 1 for ax in axes)
    others = [l for l in range(params.k) if l not in (a, b)]
    c = h.c - sum(h.b[l] * scores[:, l].mean() for l in others)
    seg = levelset_segment((h.b[a], h.b[b]), c, frame.xlim, frame.ylim)
    if seg is None:
        return
    (x1, y1), (x2, y2) = seg
    ET.SubElement(root, "line", {
        "class": "levelset", "data-descriptor": _descriptor_name(params, j),
        "x1": _fmt(frame.px(x1)), "y1": _fmt(frame.py(y1)),
        "x2": _fmt(frame.px(x2)), "y2": _fmt(frame.py(y2)),
        "data-x1": f"{x1:.6g}", "data-y1": f"{y1:.6g}",
        "data-x2": f"{x2:.6g}", "data-y2": f"{y2:.6g}",
        "stroke": "black", "stroke-width": "1.5"})


def _maybe_overlay(root, frame, scores, spec, params):
    if spec.overlay_levelset is None:
        return
    if params is None:
        raise DataError("a level-set overlay needs the model parameters")
    j = _descriptor_index(params, spec.overlay_levelset)
    _draw_levelset(root, frame, np.asarray(scores, dtype=float), params, j,
                   spec.axes)


def render(spec, params, scores=None, table=None):
    """Draw the map described by ``spec``.

    ``table`` is the :class:`~lpca.ingest.ResponseTable` supplying the
    metadata columns; ``scores`` must match its rows.
    """
    if spec.kind is MapKind.LOADINGS_BAR:
        return loadings_bar(params, spec.axes[0],
                            dataclasses.replace(spec, width=max(spec.width, 800)))
    if scores is None:
        raise DataError("a scatter map needs scores")
    if spec.color_mode is ColorMode.DESCRIPTOR:
        return descriptor_map(scores, params, spec.target, spec)
    if table is None:
        raise DataError("proficiency and category maps need the data table")
    if spec.color_mode is ColorMode.PROFICIENCY:
        if "proficiency" not in table.metadata:
            raise DataError("table has no meta:proficiency column")
        return proficiency_map(scores, table.numeric_metadata("proficiency"),
                               spec, params)
    if spec.target not in table.metadata:
        raise DataError(f"unknown metadata column {spec.target!r}")
    return category_map(scores, table.metadata[spec.target], spec,
                        title=spec.target, params=params)


def _descriptor_name(params, j):
    if params.column_names:
        return params.column_names[j]
    return f"V{j + 1}"


def _descriptor_index(params, descriptor):
    if isinstance(descriptor, (int, np.integer)):
        if not 0 <= descriptor < params.d:
            raise DataError(f"descriptor index {descriptor} out of range")
        return int(descriptor)
    names = [_descriptor_name(params, j) for j in range(params.d)]
    try:
        return names.index(descriptor)
    except ValueError:
        raise DataError(f"unknown descriptor {descriptor!r}") from None

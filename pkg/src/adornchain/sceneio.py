"""Scene files: a small text format for chains, linkages, and their extras.

A scene is either an adorned chain (vertices + per-edge adornment recipes,
optionally a target configuration and marked boundary points) or a bar
linkage (vertices, bars, wedge connections, optional face outlines used
only for drawing).  Files are YAML; the emitter is deterministic, so a
scene written by save_scene round-trips byte-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import yaml

from .adornment import (Adornment, half_disk_adornment, isosceles_adornment,
                        lens_of, max_slender, triangle_adornment)
from .chain import Configuration, make_chain
from .errors import SceneFormatError
from .geom import ArcPath, Segment, unit, vec
from .rigidity import Connection, SelfTouchingLinkage

FORMAT_TAG = "adorn-scene/1"

# adornment recipe kinds and the parameter keys each accepts.
# coordinates are edge-local: base from (0,0) to (L,0), L the edge length.
_ADORN_KINDS = {
    "bare": (),
    "triangle": ("apex", "apex_lower"),
    "isosceles": ("apex_angle_deg", "side", "symmetric"),
    "half-disk": ("side",),
    "max-slender": (),
    "lens": ("z",),
    "polygon": ("upper", "lower"),
}


@dataclass(frozen=True)
class AdornSpec:
    """Serializable recipe for one edge's adornment."""

    kind: str
    params: tuple = ()  # sorted (key, value) pairs, values already plain

    def __post_init__(self):
        if self.kind not in _ADORN_KINDS:
            raise SceneFormatError(
                f"unknown adornment kind '{self.kind}' "
                f"(known: {', '.join(sorted(_ADORN_KINDS))})")
        allowed = _ADORN_KINDS[self.kind]
        for k, _ in self.params:
            if k not in allowed:
                raise SceneFormatError(
                    f"adornment kind '{self.kind}' does not take '{k}'")

    def get(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default

    def adorner(self):
        """None or a callable(length) -> Adornment, for make_chain."""
        kind = self.kind
        if kind == "bare":
            return None
        if kind == "triangle":
            apex = vec(*self.get("apex"))
            low = self.get("apex_lower")
            low = vec(*low) if low is not None else None
            return lambda L: triangle_adornment(vec(0, 0), vec(L, 0), apex, low)
        if kind == "isosceles":
            ang = math.radians(float(self.get("apex_angle_deg")))
            side = int(self.get("side", 1))
            sym = bool(self.get("symmetric", False))
            return lambda L: isosceles_adornment(vec(0, 0), vec(L, 0), ang,
                                                 side=side, symmetric=sym)
        if kind == "half-disk":
            side = int(self.get("side", 1))
            return lambda L: half_disk_adornment(vec(0, 0), vec(L, 0), side)
        if kind == "max-slender":
            return lambda L: max_slender(vec(0, 0), vec(L, 0)).adornment()
        if kind == "lens":
            z = vec(*self.get("z"))
            return lambda L: lens_of(vec(0, 0), vec(L, 0), z).adornment()
        upper = [vec(*q) for q in self.get("upper", ())]
        lower = [vec(*q) for q in self.get("lower", ())]

        def poly(L):
            x, y = vec(0, 0), vec(L, 0)

            def side_path(pts):
                if not pts:
                    return ArcPath([Segment(x, y)])
                stops = [x] + list(pts) + [y]
                return ArcPath([Segment(a, b)
                                for a, b in zip(stops[:-1], stops[1:])])

            return Adornment(Segment(x, y), side_path(upper), side_path(lower))

        return poly


def adorn_spec(kind: str, **params) -> AdornSpec:
    clean = []
    for k in sorted(params):
        v = params[k]
        if v is None:
            continue
        clean.append((k, _plain(v)))
    return AdornSpec(kind, tuple(clean))


def _plain(v):
    """Coerce to the plain nested-tuple form stored in specs and scenes."""
    if isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return tuple(_plain(q) for q in v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise SceneFormatError(f"value {v!r} cannot appear in a scene file")


@dataclass(frozen=True)
class Scene:
    """One self-contained figure: a chain or a linkage plus trimmings.

    Coordinates are stored as plain tuples so two scenes compare equal
    exactly when their files would be identical.
    """

    name: str
    kind: str                         # "chain" | "linkage"
    vertices: tuple                   # ((x, y), ...)
    notes: str = ""
    # chain scenes
    closed: bool = False
    adornments: tuple = ()            # AdornSpec per edge
    target: Optional[tuple] = None    # optional second configuration
    marks: tuple = ()                 # (edge_index, (u, v)) edge-local points
    # linkage scenes
    bars: tuple = ()                  # ((i, j), ...)
    connections: tuple = ()           # ((wedged, host, brace, side), ...)
    faces: tuple = ()                 # ((i, j, k, ...), ...) drawing outlines

    def __post_init__(self):
        if self.kind not in ("chain", "linkage"):
            raise SceneFormatError(f"unknown scene kind '{self.kind}'")
        if self.kind == "chain":
            n_edges = len(self.vertices) if self.closed \
                else len(self.vertices) - 1
            if self.adornments and len(self.adornments) != n_edges:
                raise SceneFormatError(
                    f"scene '{self.name}': {len(self.adornments)} adornments "
                    f"for {n_edges} edges")
            if self.target is not None and \
                    len(self.target) != len(self.vertices):
                raise SceneFormatError(
                    f"scene '{self.name}': target has {len(self.target)} "
                    f"vertices, expected {len(self.vertices)}")

    # -- construction helpers ------------------------------------------

    def positions(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def build_chain(self):
        if self.kind != "chain":
            raise SceneFormatError(f"scene '{self.name}' is not a chain")
        adorners = [a.adorner() for a in self.adornments] \
            if self.adornments else None
        return make_chain(self.positions(), self.closed, adorners)

    def target_configuration(self) -> Optional[Configuration]:
        if self.target is None:
            return None
        return Configuration(np.array(self.target, dtype=float))

    def build_linkage(self) -> SelfTouchingLinkage:
        if self.kind != "linkage":
            raise SceneFormatError(f"scene '{self.name}' is not a linkage")
        conns = tuple(Connection(wedged=w, host=h, brace=b, side=s)
                      for w, h, b, s in self.connections)
        return SelfTouchingLinkage(vertices=self.positions(),
                                   bars=tuple(tuple(b) for b in self.bars),
                                   connections=conns)

    def mark_world(self, c: Configuration) -> np.ndarray:
        """Marked points carried onto a configuration's edge frames."""
        chain, _ = self.build_chain()
        out = []
        for edge_k, (u, v) in self.marks:
            i, j = chain.edges[edge_k]
            e = unit(c.positions[j] - c.positions[i])
            n = vec(-e[1], e[0])
            out.append(c.positions[i] + u * e + v * n)
        return np.array(out) if out else np.zeros((0, 2))


# ---------------------------------------------------------------------------
# writing


def _num(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    s = format(float(x), ".17g")
    return s


def _flat(seq) -> str:
    return "[" + ", ".join(_num(q) for q in seq) + "]"


def _emit_points(lines, key, pts, indent):
    pad = " " * indent
    lines.append(f"{pad}{key}:")
    for p in pts:
        lines.append(f"{pad}- {_flat(p)}")


def scene_text(scene: Scene) -> str:
    """Canonical text of a scene; save_scene writes exactly this."""
    ln = [f"format: {FORMAT_TAG}",
          f"name: {json.dumps(scene.name)}",
          f"kind: {scene.kind}"]
    if scene.notes:
        ln.append(f"notes: {json.dumps(scene.notes)}")
    if scene.kind == "chain":
        ln.append("chain:")
        ln.append(f"  closed: {_num(scene.closed)}")
        _emit_points(ln, "vertices", scene.vertices, 2)
        if scene.adornments:
            ln.append("  adornments:")
            for a in scene.adornments:
                ln.append(f"  - kind: {a.kind}")
                for k, v in a.params:
                    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
                        ln.append(f"    {k}:")
                        for q in v:
                            ln.append(f"    - {_flat(q)}")
                    elif isinstance(v, tuple):
                        ln.append(f"    {k}: {_flat(v)}")
                    else:
                        ln.append(f"    {k}: {_num(v)}")
        if scene.target is not None:
            _emit_points(ln, "target", scene.target, 2)
        if scene.marks:
            ln.append("  marks:")
            for edge_k, p in scene.marks:
                ln.append(f"  - edge: {edge_k}")
                ln.append(f"    at: {_flat(p)}")
    else:
        ln.append("linkage:")
        _emit_points(ln, "vertices", scene.vertices, 2)
        ln.append("  bars:")
        for b in scene.bars:
            ln.append(f"  - {_flat(b)}")
        if scene.connections:
            ln.append("  connections:")
            for w, h, b, s in scene.connections:
                ln.append(f"  - {{wedged: {w}, host: {h}, "
                          f"brace: {b}, side: {s}}}")
        if scene.faces:
            ln.append("  faces:")
            for f in scene.faces:
                ln.append(f"  - {_flat(f)}")
    return "\n".join(ln) + "\n"


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scene_text(scene))


# ---------------------------------------------------------------------------
# reading


def _want(mapping, key, where, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        raise SceneFormatError(f"missing field '{where}{key}'")
    v = mapping[key]
    if kind is not None and not isinstance(v, kind):
        raise SceneFormatError(f"field '{where}{key}' has the wrong type")
    return v


def _point_list(raw, where) -> tuple:
    if not isinstance(raw, list):
        raise SceneFormatError(f"field '{where}' must be a list of points")
    pts = []
    for k, q in enumerate(raw):
        if not isinstance(q, list) or len(q) != 2 or \
                not all(isinstance(t, (int, float)) for t in q):
            raise SceneFormatError(f"field '{where}[{k}]' is not an [x, y] pair")
        pts.append((float(q[0]), float(q[1])))
    return tuple(pts)


def _load_adornments(raw, where) -> tuple:
    if not isinstance(raw, list):
        raise SceneFormatError(f"field '{where}' must be a list")
    specs = []
    for k, item in enumerate(raw):
        here = f"{where}[{k}]."
        kind = _want(item, "kind", here, str)
        params = {}
        for key, v in item.items():
            if key == "kind":
                continue
            params[key] = v
        try:
            specs.append(adorn_spec(kind, **params))
        except SceneFormatError as e:
            raise SceneFormatError(f"field '{where}[{k}]': {e}") from None
    return tuple(specs)


def parse_scene(text: str) -> Scene:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        at = f" at line {mark.line + 1}" if mark is not None else ""
        raise SceneFormatError(f"scene file is not well-formed{at}: "
                               f"{getattr(e, 'problem', e)}") from None
    if not isinstance(doc, dict):
        raise SceneFormatError("missing field 'format'")
    tag = _want(doc, "format", "", str)
    if tag != FORMAT_TAG:
        raise SceneFormatError(
            f"unsupported scene format version '{tag}' "
            f"(this reader understands '{FORMAT_TAG}')")
    name = _want(doc, "name", "", str)
    kind = _want(doc, "kind", "", str)
    notes = doc.get("notes", "")
    if not isinstance(notes, str):
        raise SceneFormatError("field 'notes' must be a string")

    if kind == "chain":
        body = _want(doc, "chain", "")
        closed = _want(body, "closed", "chain.", bool)
        vertices = _point_list(_want(body, "vertices", "chain."),
                               "chain.vertices")
        adorn = _load_adornments(body["adornments"], "chain.adornments") \
            if "adornments" in body else ()
        target = _point_list(body["target"], "chain.target") \
            if "target" in body else None
        marks = []
        for k, m in enumerate(body.get("marks", ())):
            here = f"chain.marks[{k}]."
            edge_k = _want(m, "edge", here, int)
            at = _want(m, "at", here, list)
            if len(at) != 2:
                raise SceneFormatError(f"field '{here}at' is not an [u, v] pair")
            marks.append((edge_k, (float(at[0]), float(at[1]))))
        return Scene(name=name, kind="chain", vertices=vertices, notes=notes,
                     closed=closed, adornments=adorn, target=target,
                     marks=tuple(marks))

    if kind == "linkage":
        body = _want(doc, "linkage", "")
        vertices = _point_list(_want(body, "vertices", "linkage."),
                               "linkage.vertices")
        raw_bars = _want(body, "bars", "linkage.", list)
        bars = []
        for k, b in enumerate(raw_bars):
            if not isinstance(b, list) or len(b) != 2 or \
                    not all(isinstance(t, int) for t in b):
                raise SceneFormatError(
                    f"field 'linkage.bars[{k}]' is not an [i, j] pair")
            bars.append((b[0], b[1]))
        conns = []
        for k, cdoc in enumerate(body.get("connections", ())):
            here = f"linkage.connections[{k}]."
            conns.append((_want(cdoc, "wedged", here, int),
                          _want(cdoc, "host", here, int),
                          _want(cdoc, "brace", here, int),
                          _want(cdoc, "side", here, int)))
        faces = tuple(tuple(int(q) for q in f)
                      for f in body.get("faces", ()))
        return Scene(name=name, kind="linkage", vertices=vertices,
                     notes=notes, bars=tuple(bars),
                     connections=tuple(conns), faces=faces)

    raise SceneFormatError(f"unknown scene kind '{kind}'")


def load_scene(path) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise SceneFormatError(f"cannot read scene file: {e}") from None
    return parse_scene(text)

"""Named starting curves with analytically placed vertices.

Closed presets are sampled uniformly by arc length: a dense parameter
table of the analytic curve is inverted so every vertex still lies exactly
on the curve but consecutive vertices are equidistant along it.  Uniform
spacing makes the first remesh a near no-op and keeps symmetric features
(crests, valleys, axis points) on exact vertex indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curve import CLOSED, PERIODIC, SampledCurve
from .errors import InvalidArgumentError
from .helix import GraphCurveSpec, helix_graph_spec

CIRCLE = "circle"
ELLIPSE = "ellipse"
HELIX = "helix"
GRAPH_CURVE = "graph-curve"
COS2U_CURVE = "cos2u-curve"
SPHERE_PERTURBED = "sphere-perturbed"
CUSTOM_FILE = "custom-file"

PRESET_NAMES = (
    CIRCLE,
    ELLIPSE,
    HELIX,
    GRAPH_CURVE,
    COS2U_CURVE,
    SPHERE_PERTURBED,
    CUSTOM_FILE,
)

_DEFAULTS: dict[str, dict] = {
    CIRCLE: {"r": 1.0},
    ELLIPSE: {"a": 2.0, "b": 1.0},
    HELIX: {"a": 1.0, "b": 1.0},
    GRAPH_CURVE: {"a": 1.0, "b": 1.0, "eps": 0.0, "harmonic": 3},
    COS2U_CURVE: {},
    SPHERE_PERTURBED: {"eps": 0.2, "harmonic": 3},
    CUSTOM_FILE: {"path": None},
}


@dataclass(frozen=True)
class Preset:
    """A named initial-curve family with its shape parameters."""

    name: str
    n: int = 512
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in PRESET_NAMES:
            raise InvalidArgumentError(
                f"unknown preset {self.name!r}; choose from {PRESET_NAMES}"
            )
        if self.n < 4:
            raise InvalidArgumentError("presets need at least 4 vertices")
        allowed = set(_DEFAULTS[self.name])
        unknown = set(self.params) - allowed
        if unknown:
            raise InvalidArgumentError(
                f"preset {self.name!r} does not take {sorted(unknown)}"
            )
        merged = {**_DEFAULTS[self.name], **self.params}
        object.__setattr__(self, "params", merged)


def make_preset(name: str, n: int = 512, **params) -> Preset:
    return Preset(name=name, n=n, params=params)


def _arc_uniform_parameters(
    position, u_end: float, n: int, cyclic: bool
) -> np.ndarray:
    """Parameters whose images are equally spaced along the curve.

    Builds a dense polyline of ``position(u)`` over [0, u_end], accumulates
    chord length, and inverts it at n equal arc targets.  For cyclic curves
    u = u_end duplicates u = 0 and only n targets below the full length are
    used.
    """
    dense = max(4096, 64 * n) + 1
    u = np.linspace(0.0, u_end, dense)
    pts = position(u)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if cyclic:
        targets = np.arange(n) * (total / n)
    else:
        targets = np.linspace(0.0, total, n)
    return np.interp(targets, s, u)


def _circle_points(r: float, n: int) -> np.ndarray:
    u = np.arange(n) * (2.0 * math.pi / n)
    return np.column_stack([r * np.cos(u), r * np.sin(u), np.zeros(n)])


def _ellipse_points(a: float, b: float, n: int) -> np.ndarray:
    def position(u):
        return np.column_stack([a * np.cos(u), b * np.sin(u), np.zeros_like(u)])

    u = _arc_uniform_parameters(position, 2.0 * math.pi, n, cyclic=True)
    return position(u)


def _cos2u_points(n: int) -> np.ndarray:
    def position(u):
        return np.column_stack([np.cos(u), np.sin(u), np.cos(2.0 * u)])

    u = _arc_uniform_parameters(position, 2.0 * math.pi, n, cyclic=True)
    return position(u)


def _sphere_perturbed_points(eps: float, harmonic: int, n: int) -> np.ndarray:
    if not 0.0 < eps <= 0.5:
        raise InvalidArgumentError("perturbation eps must lie in (0, 0.5]")
    if harmonic < 2:
        raise InvalidArgumentError("harmonic must be an integer >= 2")

    def position(u):
        raw = np.column_stack(
            [np.cos(u), np.sin(u), eps * np.cos(harmonic * u)]
        )
        return raw / np.linalg.norm(raw, axis=1)[:, None]

    u = _arc_uniform_parameters(position, 2.0 * math.pi, n, cyclic=True)
    return position(u)


def _helix_points(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    if a <= 0.0 or b == 0.0:
        raise InvalidArgumentError("helix needs a > 0 and b != 0")
    u = np.arange(n) * (2.0 * math.pi / n)
    pts = np.column_stack([a * np.cos(u), a * np.sin(u), b * u])
    return pts, np.array([0.0, 0.0, 2.0 * math.pi * b])


def _graph_curve_points(
    a: float, b: float, eps: float, harmonic: int, n: int
) -> tuple[np.ndarray, np.ndarray]:
    if a <= 0.0 or b == 0.0:
        raise InvalidArgumentError("graph curve needs a > 0 and b != 0")
    u = np.arange(n) * (2.0 * math.pi / n)
    f = a * np.cos(u) + eps * np.cos(harmonic * u)
    g = a * np.sin(u)
    pts = np.column_stack([f, g, b * u])
    return pts, np.array([0.0, 0.0, 2.0 * math.pi * b])


def build_curve(preset: Preset) -> SampledCurve:
    """Materialize the preset as a sampled curve."""
    p = preset.params
    n = preset.n
    if preset.name == CIRCLE:
        if p["r"] <= 0.0:
            raise InvalidArgumentError("circle radius must be positive")
        return SampledCurve(_circle_points(p["r"], n), CLOSED)
    if preset.name == ELLIPSE:
        if p["a"] <= 0.0 or p["b"] <= 0.0:
            raise InvalidArgumentError("ellipse semi-axes must be positive")
        return SampledCurve(_ellipse_points(p["a"], p["b"], n), CLOSED)
    if preset.name == COS2U_CURVE:
        return SampledCurve(_cos2u_points(n), CLOSED)
    if preset.name == SPHERE_PERTURBED:
        pts = _sphere_perturbed_points(p["eps"], int(p["harmonic"]), n)
        return SampledCurve(pts, CLOSED)
    if preset.name == HELIX:
        pts, offset = _helix_points(p["a"], p["b"], n)
        return SampledCurve(pts, PERIODIC, offset)
    if preset.name == GRAPH_CURVE:
        pts, offset = _graph_curve_points(
            p["a"], p["b"], p["eps"], int(p["harmonic"]), n
        )
        return SampledCurve(pts, PERIODIC, offset)
    if preset.name == CUSTOM_FILE:
        if not p["path"]:
            raise InvalidArgumentError("custom-file preset needs a path")
        from . import fileio

        return fileio.read_curve(p["path"])
    raise InvalidArgumentError(f"unknown preset {preset.name!r}")


def graph_spec_for(preset: Preset) -> GraphCurveSpec:
    """Analytic graph-curve spec matching the graph-curve preset grid."""
    if preset.name != GRAPH_CURVE:
        raise InvalidArgumentError("graph specs exist only for graph-curve presets")
    p = preset.params
    return helix_graph_spec(
        a=p["a"],
        b=p["b"],
        n=preset.n,
        eps=p["eps"],
        harmonic=int(p["harmonic"]),
        endpoint=False,
    )


def sphere_radius_for(preset: Preset) -> float | None:
    """Initial sphere radius when the preset is spherical, else None."""
    return 1.0 if preset.name == SPHERE_PERTURBED else None

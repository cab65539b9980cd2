"""Run configuration: strict JSON schema -> validated objects.

The config is a single JSON document; unknown keys anywhere are errors
(silent typos in physics parameters are the main operator hazard).
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .. import analytic_beams as beams
from ..errors import ConfigError, ValidationError
from ..grid_field import Grid1D, make_grid
from ..spectral_propagator import WindowSpec

PLACEMENTS = ("even_range", "even_maxima", "density_quantiles")
_AIRY_FAMILIES = ("ideal_airy", "finite_airy")


@dataclass(frozen=True)
class TrajectoryConfig:
    count: int
    placement: str
    range: tuple = None


@dataclass(frozen=True)
class OutputPaths:
    csv: str
    manifest: str
    svg: str = None


@dataclass(frozen=True)
class RunConfig:
    beam: beams.BeamSpec
    grid: Grid1D
    z0: float
    z1: float
    snapshots: int
    outputs: OutputPaths
    trajectories: TrajectoryConfig = None
    window: WindowSpec = None


def _check_keys(obj, allowed, where):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}",
                          field=sorted(unknown)[0])


def _need(obj, key, where):
    if key not in obj:
        raise ConfigError(f"missing required key {key!r} in {where}", field=key)
    return obj[key]


def _beam_from(obj):
    _check_keys(obj, ("family", "gamma", "sigma0", "z_focus"), "beam")
    family = _need(obj, "family", "beam")
    try:
        return beams.BeamSpec(
            family=family,
            gamma=obj.get("gamma"),
            sigma0=obj.get("sigma0"),
            z_focus=obj.get("z_focus"),
        )
    except ValidationError as exc:
        raise ConfigError(f"beam: {exc}", field=exc.field) from exc


def _grid_from(obj):
    _check_keys(obj, ("x_min", "x_max", "n"), "grid")
    try:
        return make_grid(_need(obj, "x_min", "grid"), _need(obj, "x_max", "grid"),
                         _need(obj, "n", "grid"))
    except ValidationError as exc:
        raise ConfigError(f"grid: {exc}", field=exc.field) from exc


def _trajectories_from(obj, beam):
    _check_keys(obj, ("count", "placement", "range"), "trajectories")
    count = int(_need(obj, "count", "trajectories"))
    if count < 1:
        raise ConfigError("trajectories.count must be >= 1", field="count")
    placement = _need(obj, "placement", "trajectories")
    if placement not in PLACEMENTS:
        raise ConfigError(f"unknown placement {placement!r}", field="placement")
    if placement == "even_maxima" and beam.family not in _AIRY_FAMILIES:
        raise ConfigError("placement even_maxima is only valid for Airy "
                          "families", field="placement")
    rng = obj.get("range")
    if rng is not None:
        if (not isinstance(rng, (list, tuple)) or len(rng) != 2
                or not rng[1] > rng[0]):
            raise ConfigError("trajectories.range must be [lo, hi] with "
                              "hi > lo", field="range")
        rng = (float(rng[0]), float(rng[1]))
    if placement == "even_range" and rng is None:
        raise ConfigError("placement even_range requires trajectories.range",
                          field="range")
    return TrajectoryConfig(count, placement, rng)


def _window_from(obj):
    if obj is None:
        return None
    _check_keys(obj, ("fraction", "profile"), "window")
    try:
        return WindowSpec(float(_need(obj, "fraction", "window")),
                          obj.get("profile", "cosine_taper"))
    except ValidationError as exc:
        raise ConfigError(f"window: {exc}", field=exc.field) from exc


def _outputs_from(obj):
    _check_keys(obj, ("csv", "svg", "manifest"), "outputs")
    paths = OutputPaths(
        csv=str(_need(obj, "csv", "outputs")),
        manifest=str(_need(obj, "manifest", "outputs")),
        svg=(str(obj["svg"]) if obj.get("svg") is not None else None),
    )
    for p in (paths.csv, paths.manifest, paths.svg):
        if p is not None:
            _ensure_writable(p)
    return paths


def _ensure_writable(path):
    parent = os.path.dirname(os.path.abspath(path)) or "."
    try:
        os.makedirs(parent, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory for {path}: {exc}",
                          path=path) from exc
    if not os.access(parent, os.W_OK):
        raise ConfigError(f"output directory not writable: {parent}", path=path)
    if os.path.isdir(path):
        raise ConfigError(f"output path is a directory: {path}", path=path)


def config_from_dict(doc) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, ("beam", "grid", "z_range", "trajectories", "window",
                      "outputs"), "config")
    beam = _beam_from(_need(doc, "beam", "config"))
    grid = _grid_from(_need(doc, "grid", "config"))
    zr = _need(doc, "z_range", "config")
    _check_keys(zr, ("z0", "z1", "snapshots"), "z_range")
    z0 = float(_need(zr, "z0", "z_range"))
    z1 = float(_need(zr, "z1", "z_range"))
    snapshots = int(_need(zr, "snapshots", "z_range"))
    if z1 < z0:
        raise ConfigError("z_range.z1 must be >= z0", field="z1")
    if snapshots < 1:
        raise ConfigError("z_range.snapshots must be >= 1", field="snapshots")
    traj = (None if "trajectories" not in doc
            else _trajectories_from(doc["trajectories"], beam))
    window = _window_from(doc.get("window"))
    outputs = _outputs_from(_need(doc, "outputs", "config"))
    return RunConfig(beam=beam, grid=grid, z0=z0, z1=z1, snapshots=snapshots,
                     outputs=outputs, trajectories=traj, window=window)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}",
                          path=str(path)) from exc
    return config_from_dict(doc)


def initial_positions(cfg: RunConfig):
    """Resolve the trajectory placement rule to initial positions."""
    tc = cfg.trajectories
    if tc is None:
        raise ConfigError("config has no trajectories section",
                          field="trajectories")
    if tc.placement == "even_range":
        return np.linspace(tc.range[0], tc.range[1], tc.count)
    if tc.placement == "even_maxima":
        maxima = beams.airy_maxima(10)
        return np.linspace(maxima[-1], maxima[0], tc.count)
    # density_quantiles
    field0 = beams.sample_field(cfg.beam, cfg.grid, cfg.z0)
    rho = np.abs(field0.values) ** 2
    x = cfg.grid.x
    if tc.range is not None:
        sel = (x >= tc.range[0]) & (x <= tc.range[1])
        x = x[sel]
        rho = rho[sel]
    cdf = np.cumsum(rho)
    cdf /= cdf[-1]
    q = (np.arange(tc.count) + 0.5) / tc.count
    return np.interp(q, cdf, x)

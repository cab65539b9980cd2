"""Built-in figure presets and assembly.

Each figure command writes its datasets as CSVs, a self-contained SVG, and a
manifest.  Parameters live in a preset table (dimensionless units) and can be
overridden with ``--set key=value``.  The lab-unit axes of the Airy figures
depend on parameters outside this package; a fixed default of 3 cm per unit z
maps the documented 30 cm output plane to z = 10 and can be overridden.
"""

import copy
import os

import numpy as np

from .. import analytic_beams as beams
from .. import diagnostics
from ..bohmian_dynamics import IntegrateOpts, integrate_trajectories
from ..errors import ConfigError
from ..grid_field import density
from ..spectral_propagator import PropagationPlan, WindowSpec, propagate_plan
from . import config as cfg_mod
from . import writers

PRESET_VERSION = "1"

#: Dimensionless-z to centimeter map for the Airy figures (sets the meaning
#: of "30 cm" in the presets; override with --set units.cm_per_z=...).
CM_PER_Z = 3.0

FIGURE_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5")


def _airy_preset(gamma):
    beam = {"family": "ideal_airy"} if gamma == 0.0 else \
        {"family": "finite_airy", "gamma": gamma}
    return {
        "beam": beam,
        "grid": {"x_min": -35.0, "x_max": 15.0, "n": 2048},
        "z_range": {"z0": 0.0, "z1": 10.0, "snapshots": 101},
        "trajectories": {"count": 20, "placement": "even_maxima"},
        "units": {"cm_per_z": CM_PER_Z},
        "profiles_cm": [0.0, 10.0, 20.0, 30.0] if gamma else [0.0, 30.0],
        "nodal_lines": 10,
        "csv_stride": 2,
        "scale": "sqrt",
    }


def build_presets():
    sg0 = beams.peres_sigma_g0()
    s_plus, s_minus = beams.sigma_pair(sg0, 1.0)
    traj_span = 2.5 * sg0
    return {
        "fig1": _airy_preset(0.0),
        "fig2": _airy_preset(0.11),
        "fig3": {
            "beam": {"family": "peres", "z_focus": 1.0},
            "grid": {"x_min": -16.0, "x_max": 16.0, "n": 2048},
            "z_range": {"z0": 0.0, "z1": 2.0, "snapshots": 201},
            "trajectories": {"count": 51, "placement": "even_range",
                             "range": [-15.0, 15.0]},
            "window": {"fraction": 0.1, "profile": "cosine_taper"},
            "profiles_z": [0.0],
            "csv_stride": 2,
            "scale": "sqrt",
        },
        "fig4": {
            "z_focus": 1.0,
            "sigma0_range": [0.08, 4.0],
            "samples": 512,
            "profile_span": 15.0,
            "profile_n": 1024,
        },
        "fig5": {
            "panels": {
                "a": {"sigma0": s_plus},
                "b": {"sigma0": s_minus},
            },
            "z_focus": 1.0,
            "grid": {"x_min": -26.0, "x_max": 26.0, "n": 2048},
            "z_range": {"z0": 0.0, "z1": 2.0, "snapshots": 201},
            "trajectories": {"count": 51, "placement": "even_range",
                             "range": [-traj_span, traj_span]},
            "csv_stride": 2,
            "scale": "sqrt",
        },
    }


def apply_overrides(preset, overrides):
    """Apply dotted-path key=value overrides (values parsed as JSON)."""
    import json

    out = copy.deepcopy(preset)
    for key, raw in overrides:
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown preset key {key!r}", field=key)
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown preset key {key!r}", field=key)
        node[parts[-1]] = value
    return out


def _out(outdir, name):
    return os.path.join(outdir, name)


def _run_propagation(preset, outdir, tag=""):
    """Common snapshot + trajectory pipeline for the density figures."""
    beam = cfg_mod._beam_from(preset["beam"])
    grid = cfg_mod._grid_from(preset["grid"])
    zr = preset["z_range"]
    targets = np.linspace(zr["z0"], zr["z1"], int(zr["snapshots"]))
    window = None
    if preset.get("window"):
        window = WindowSpec(preset["window"]["fraction"],
                            preset["window"].get("profile", "cosine_taper"))
    field0 = beams.sample_field(beam, grid, zr["z0"])
    snaps = propagate_plan(field0, PropagationPlan(targets, window=window))

    run_cfg = cfg_mod.RunConfig(
        beam=beam, grid=grid, z0=zr["z0"], z1=zr["z1"],
        snapshots=int(zr["snapshots"]),
        outputs=cfg_mod.OutputPaths(csv="", manifest=""),
        trajectories=cfg_mod.TrajectoryConfig(
            preset["trajectories"]["count"], preset["trajectories"]["placement"],
            tuple(preset["trajectories"].get("range") or ()) or None),
    )
    x0 = cfg_mod.initial_positions(run_cfg)
    traj = integrate_trajectories(beam, x0, zr["z0"], zr["z1"],
                                  IntegrateOpts(output_every=5), grid=grid)

    files = {}
    files[f"snapshots{tag}.csv"] = lambda p: writers.write_snapshots_csv(p, snaps)
    files[f"trajectories{tag}.csv"] = \
        lambda p: writers.write_trajectories_csv(p, traj)
    files[f"reports{tag}.csv"] = lambda p: writers.write_reports_csv(
        p, [diagnostics.beam_report(f) for f in snaps])
    return snaps, traj, files


def _traj_overlays(traj, color="#ffffff"):
    overlays = []
    for i in range(traj.initial.size):
        row = traj.positions[i]
        live = np.isfinite(row)
        overlays.append((traj.z_ladder[live], row[live], color, None))
    return overlays


def _airy_figure(name, preset, outdir):
    snaps, traj, files = _run_propagation(preset, outdir)
    zs = np.array([f.z for f in snaps])
    grid = snaps[0].grid
    dens = np.stack([density(f) for f in snaps])

    n_lines = int(preset["nodal_lines"])
    zeros = beams.airy_zeros(n_lines)
    z_line = np.linspace(zs[0], zs[-1], 200)
    nodal = [(z_line, a + 0.25 * z_line**2) for a in zeros]
    main_max = beams.airy_maxima(1)[0]
    center = (z_line, main_max + 0.25 * z_line**2)

    cm = preset["units"]["cm_per_z"]
    prof_z = [zcm / cm for zcm in preset["profiles_cm"]]
    beam = cfg_mod._beam_from(preset["beam"])
    profiles = [beams.sample_field(beam, grid, z) for z in prof_z]

    files["profiles.csv"] = lambda p: writers.write_profiles_csv(p, profiles)
    files["nodal_lines.csv"] = lambda p: writers.write_lines_csv(p, nodal)

    overlays = _traj_overlays(traj)
    overlays += [(z, x, "#ffe100", "6,4") for z, x in nodal]
    overlays.append((center[0], center[1], "#000000", None))

    def draw(p):
        writers.svg_density_map(p, grid.x, zs, dens, overlays,
                                title=f"{name}: {beam.family}",
                                scale=preset["scale"])

    files["figure.svg"] = draw
    return files


def _fig3(preset, outdir):
    snaps, traj, files = _run_propagation(preset, outdir)
    zs = np.array([f.z for f in snaps])
    grid = snaps[0].grid
    dens = np.stack([density(f) for f in snaps])
    beam = cfg_mod._beam_from(preset["beam"])
    profiles = [beams.sample_field(beam, grid, z) for z in preset["profiles_z"]]
    files["profiles.csv"] = lambda p: writers.write_profiles_csv(p, profiles)

    def draw(p):
        writers.svg_density_map(p, grid.x, zs, dens, _traj_overlays(traj),
                                title="fig3: peres self-focusing",
                                scale=preset["scale"])

    files["figure.svg"] = draw
    return files


def _fig4(preset, outdir):
    z_f = float(preset["z_focus"])
    lo, hi = preset["sigma0_range"]
    s0 = np.linspace(float(lo), float(hi), int(preset["samples"]))
    sg0 = np.array([beams.width_phase(s, z_f, 0.0).modulus for s in s0])
    th0 = np.array([beams.width_phase(s, z_f, 0.0).arg for s in s0])

    span = float(preset["profile_span"])
    n = int(preset["profile_n"])
    x = np.linspace(-span, span, n)
    rho_peres = np.abs(beams.peres_initial(x, z_f)) ** 2
    target = beams.peres_sigma_g0()
    rho_gauss = np.exp(-x * x / (2.0 * target * target))
    s_plus, s_minus = beams.sigma_pair(target, z_f)

    files = {
        "width_phase.csv": lambda p: writers.write_curves_csv(
            p, ["sigma0", "sigma_g0", "theta_g0"], [s0, sg0, th0]),
        "profiles_z0.csv": lambda p: writers.write_curves_csv(
            p, ["x", "density_peres", "density_gaussian"],
            [x, rho_peres, rho_gauss]),
        "markers.csv": lambda p: writers.write_curves_csv(
            p, ["sigma0", "sigma_g0", "theta_g0"],
            [np.array([s_plus, s_minus]),
             np.array([target, target]),
             np.array([beams.width_phase(s_plus, z_f, 0.0).arg,
                       beams.width_phase(s_minus, z_f, 0.0).arg])]),
        "figure.svg": lambda p: writers.svg_line_plot(
            p,
            [(s0, [(th0, "#c02020")], "sigma0", "theta_g0"),
             (s0, [(sg0, "#2040c0")], "sigma0", "sigma_g0")],
            title="fig4: initial width and phase vs waist width"),
    }
    return files


def _fig5(preset, outdir):
    files = {}
    for tag, panel in sorted(preset["panels"].items()):
        sub = copy.deepcopy(preset)
        sub["beam"] = {"family": "generalized_gaussian",
                       "sigma0": float(panel["sigma0"]),
                       "z_focus": float(preset["z_focus"])}
        snaps, traj, part = _run_propagation(sub, outdir, tag=f"_{tag}")
        files.update(part)
        zs = np.array([f.z for f in snaps])
        grid = snaps[0].grid
        dens = np.stack([density(f) for f in snaps])
        sigma0 = float(panel["sigma0"])

        def draw(p, _d=dens, _z=zs, _g=grid, _t=traj, _s=sigma0):
            writers.svg_density_map(
                p, _g.x, _z, _d, _traj_overlays(_t),
                title=f"fig5: focused gaussian, waist {_s:.4g}",
                scale=preset["scale"])

        files[f"figure_{tag}.svg"] = draw
    return files


def run_figure(name, overrides=(), outdir=None):
    """Build one preset figure; returns the list of files written."""
    if name not in FIGURE_NAMES:
        raise ConfigError(f"unknown figure {name!r} (have {FIGURE_NAMES})",
                          field="figure")
    presets = build_presets()
    preset = apply_overrides(presets[name], overrides)
    outdir = outdir or f"out_{name}"
    os.makedirs(outdir, exist_ok=True)

    if name in ("fig1", "fig2"):
        files = _airy_figure(name, preset, outdir)
    elif name == "fig3":
        files = _fig3(preset, outdir)
    elif name == "fig4":
        files = _fig4(preset, outdir)
    else:
        files = _fig5(preset, outdir)

    written = []
    for fname in sorted(files):
        path = _out(outdir, fname)
        files[fname](path)
        written.append(path)
    manifest = _out(outdir, "manifest.json")
    writers.write_manifest(manifest, {"figure": name, "preset": preset},
                           written, extra={"preset_version": PRESET_VERSION})
    return written + [manifest]

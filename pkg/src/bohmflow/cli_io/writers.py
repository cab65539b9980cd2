"""Deterministic output emitters: CSV datasets, manifest, and SVG plots.

All floats are written with 17 significant digits in scientific notation and
every file ends with a trailing newline, so identical runs produce
byte-identical artifacts.  The SVG plots are self-contained (shapes only, no
external assets, no randomized ids).
"""

import hashlib
import json
import os

import numpy as np

from ..errors import ConfigError
from ..grid_field import density


def _fmt(v):
    return f"{v:.16e}"


def _open_out(path):
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}", path=str(path)) from exc


def write_snapshots_csv(path, snapshots):
    """Columns: z, x, re_psi, im_psi, density (z-major row order)."""
    with _open_out(path) as fh:
        fh.write("z,x,re_psi,im_psi,density\n")
        for f in snapshots:
            zs = _fmt(f.z)
            x = f.grid.x
            v = f.values
            rho = v.real**2 + v.imag**2
            for i in range(f.grid.n):
                fh.write(f"{zs},{_fmt(x[i])},{_fmt(v[i].real)},"
                         f"{_fmt(v[i].imag)},{_fmt(rho[i])}\n")


def write_trajectories_csv(path, traj_set):
    """Columns: traj_id, z, x, flag."""
    with _open_out(path) as fh:
        fh.write("traj_id,z,x,flag\n")
        for tid, z, x, flag in traj_set.iter_rows():
            fh.write(f"{tid},{_fmt(z)},{_fmt(x)},{flag}\n")


def write_profiles_csv(path, profiles):
    """Columns: z, x, density; ``profiles`` is a list of fields."""
    with _open_out(path) as fh:
        fh.write("z,x,density\n")
        for f in profiles:
            zs = _fmt(f.z)
            rho = density(f)
            for i in range(f.grid.n):
                fh.write(f"{zs},{_fmt(f.grid.x[i])},{_fmt(rho[i])}\n")


def write_reports_csv(path, reports):
    """Columns: z, norm, rms_width, peak_position, peak_value, edge_leakage."""
    with _open_out(path) as fh:
        fh.write("z,norm,rms_width,peak_position,peak_value,edge_leakage\n")
        for r in reports:
            fh.write(",".join(_fmt(v) for v in (
                r.z, r.norm, r.rms_width, r.peak_position, r.peak_value,
                r.edge_leakage)) + "\n")


def write_lines_csv(path, lines):
    """Columns: line_id, z, x; ``lines`` is a list of (z_array, x_array)."""
    with _open_out(path) as fh:
        fh.write("line_id,z,x\n")
        for lid, (z, x) in enumerate(lines):
            for zz, xx in zip(z, x):
                fh.write(f"{lid},{_fmt(zz)},{_fmt(xx)}\n")


def write_curves_csv(path, header, columns):
    """Generic aligned-column CSV."""
    with _open_out(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, config_doc, output_paths, extra=None):
    """Manifest with engine version and a content hash for every output."""
    from .. import __version__

    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for p in sorted(output_paths):
        entries.append({
            "path": os.path.relpath(os.path.abspath(p), base),
            "sha256": sha256_of(p),
            "bytes": os.path.getsize(p),
        })
    doc = {
        "engine_version": __version__,
        "config": config_doc,
        "outputs": entries,
    }
    if extra:
        doc.update(extra)
    with _open_out(path) as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def verify_manifest(path):
    """Recompute hashes; returns (all_ok, detail rows)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    ok = True
    for entry in doc.get("outputs", []):
        p = os.path.join(base, entry["path"])
        try:
            match = sha256_of(p) == entry["sha256"]
        except OSError:
            match = False
        ok &= match
        rows.append((entry["path"], match))
    return ok, rows


# ---------------------------------------------------------------------------
# SVG


_COLOR_ANCHORS = np.array([
    (0.001, 0.000, 0.014),
    (0.184, 0.050, 0.380),
    (0.445, 0.122, 0.506),
    (0.690, 0.205, 0.388),
    (0.880, 0.350, 0.200),
    (0.975, 0.585, 0.040),
    (0.965, 0.844, 0.273),
    (0.988, 0.998, 0.645),
])


def _color_lut(n=256):
    t = np.linspace(0.0, 1.0, n)
    anchors_t = np.linspace(0.0, 1.0, len(_COLOR_ANCHORS))
    lut = np.stack([np.interp(t, anchors_t, _COLOR_ANCHORS[:, c])
                    for c in range(3)], axis=1)
    return (lut * 255.0 + 0.5).astype(int)


_LUT = _color_lut()


def _downsample(mat, max_rows, max_cols):
    nz, nx = mat.shape
    rz = max(1, int(np.ceil(nz / max_rows)))
    rx = max(1, int(np.ceil(nx / max_cols)))
    tz = (nz // rz) * rz
    tx = (nx // rx) * rx
    m = mat[:tz, :tx].reshape(tz // rz, rz, tx // rx, rx).mean(axis=(1, 3))
    return m


class SvgCanvas:
    """Tiny deterministic SVG assembler."""

    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]

    def rect(self, x, y, w, h, color):
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'fill="{color}"/>')

    def polyline(self, pts, color, width=1.2, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{d}/>')

    def text(self, x, y, s, size=12, anchor="middle"):
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}" fill="#000000">{s}</text>')

    def frame(self, x, y, w, h):
        self.parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
            f'fill="none" stroke="#000000" stroke-width="1"/>')

    def save(self, path):
        self.parts.append("</svg>")
        with _open_out(path) as fh:
            fh.write("\n".join(self.parts))
            fh.write("\n")


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def svg_density_map(path, x, z, dens, overlays=(), title="", scale="sqrt",
                    width=760, height=640):
    """Density map over (x, z) with overlaid polylines.

    ``dens`` has shape (len(z), len(x)); z increases upward.  ``overlays``
    is a sequence of (z_array, x_array, color, dash) polylines in data
    coordinates.
    """
    mL, mR, mT, mB = 64, 16, 36, 46
    pw, ph = width - mL - mR, height - mT - mB
    canvas = SvgCanvas(width, height)

    m = _downsample(np.asarray(dens, dtype=np.float64), 300, 380)
    if scale == "sqrt":
        m = np.sqrt(np.maximum(m, 0.0))
    peak = m.max()
    m = m / peak if peak > 0 else m
    nz, nx = m.shape
    cw = pw / nx
    ch = ph / nz
    idx = np.minimum((m * 255.0).astype(int), 255)
    for r in range(nz):
        py = mT + ph - (r + 1) * ch
        row = idx[r]
        c0 = 0
        for c in range(1, nx + 1):
            if c == nx or row[c] != row[c0]:
                col = _LUT[row[c0]]
                canvas.rect(mL + c0 * cw, py, (c - c0) * cw, ch,
                            f"#{col[0]:02x}{col[1]:02x}{col[2]:02x}")
                c0 = c

    x_lo, x_hi = float(x[0]), float(x[-1])
    z_lo, z_hi = float(z[0]), float(z[-1])

    def to_px(xx):
        return mL + (xx - x_lo) / (x_hi - x_lo) * pw

    def to_py(zz):
        return mT + ph - (zz - z_lo) / (z_hi - z_lo if z_hi > z_lo else 1.0) * ph

    for z_arr, x_arr, color, dash in overlays:
        pts = [(to_px(xx), to_py(zz)) for zz, xx in zip(z_arr, x_arr)
               if x_lo <= xx <= x_hi and np.isfinite(xx)]
        if len(pts) >= 2:
            canvas.polyline(pts, color, dash=dash)

    canvas.frame(mL, mT, pw, ph)
    for t in _ticks(x_lo, x_hi):
        canvas.text(to_px(t), height - mB + 16, f"{t:.3g}", size=10)
    for t in _ticks(z_lo, z_hi):
        canvas.text(mL - 8, to_py(t) + 4, f"{t:.3g}", size=10, anchor="end")
    canvas.text(mL + pw / 2, height - 12, "x")
    canvas.text(16, mT + ph / 2, "z")
    if title:
        canvas.text(mL + pw / 2, 22, title, size=14)
    canvas.save(path)


def svg_line_plot(path, panels, title="", width=760, height=640):
    """Stacked line-plot panels: each panel is (xs, [(ys, color)], xlabel, ylabel)."""
    mL, mR, mT, mB, gap = 64, 16, 36, 46, 30
    n = len(panels)
    ph = (height - mT - mB - gap * (n - 1)) / n
    pw = width - mL - mR
    canvas = SvgCanvas(width, height)
    for p, (xs, series, xlabel, ylabel) in enumerate(panels):
        top = mT + p * (ph + gap)
        ys_all = np.concatenate([np.asarray(ys) for ys, _ in series])
        y_lo, y_hi = float(np.min(ys_all)), float(np.max(ys_all))
        if y_hi == y_lo:
            y_hi = y_lo + 1.0
        x_lo, x_hi = float(xs[0]), float(xs[-1])

        def to_px(xx):
            return mL + (xx - x_lo) / (x_hi - x_lo) * pw

        def to_py(yy):
            return top + ph - (yy - y_lo) / (y_hi - y_lo) * ph

        for ys, color in series:
            pts = [(to_px(xx), to_py(yy)) for xx, yy in zip(xs, ys)]
            canvas.polyline(pts, color)
        canvas.frame(mL, top, pw, ph)
        for t in _ticks(x_lo, x_hi):
            canvas.text(to_px(t), top + ph + 16, f"{t:.3g}", size=10)
        for t in _ticks(y_lo, y_hi):
            canvas.text(mL - 8, to_py(t) + 4, f"{t:.3g}", size=10, anchor="end")
        canvas.text(mL + pw / 2, top + ph + 30, xlabel, size=11)
        canvas.text(16, top + ph / 2, ylabel, size=11)
    if title:
        canvas.text(mL + pw / 2, 22, title, size=14)
    canvas.save(path)

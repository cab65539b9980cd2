"""Quantitative observables over snapshots: widths, focus location,
conservation residuals, and trajectory error against closed forms.
"""

from dataclasses import dataclass

import numpy as np

from . import analytic_beams as beams
from .bohmian_dynamics import TrajectorySet
from .errors import NoBracketError, ValidationError
from .grid_field import ComplexField1D, density, norm


@dataclass(frozen=True)
class BeamReport:
    """Per-snapshot summary row (serialized by the CLI writers)."""

    z: float
    norm: float
    rms_width: float
    peak_position: float
    peak_value: float
    edge_leakage: float


def rms_width(fieldv: ComplexField1D) -> float:
    """sqrt(<x^2> - <x>^2) under the normalized density."""
    rho = density(fieldv)
    total = norm(fieldv)
    if total <= 0.0:
        raise ValidationError("zero-norm field has no width", field="field")
    x = fieldv.grid.x
    w = rho * fieldv.grid.dx / total
    mean = float(np.sum(w * x))
    var = float(np.sum(w * (x - mean) ** 2))
    return np.sqrt(max(var, 0.0))


def edge_leakage(fieldv: ComplexField1D, fraction=0.1) -> float:
    """Probability mass in the outer ``fraction`` of samples (window-sensitivity
    measure reported next to every moment)."""
    rho = density(fieldv)
    total = rho.sum()
    if total == 0.0:
        return 0.0
    edge = max(1, int(round(0.5 * fraction * fieldv.grid.n)))
    return float((rho[:edge].sum() + rho[-edge:].sum()) / total)


def beam_report(fieldv: ComplexField1D) -> BeamReport:
    rho = density(fieldv)
    i = int(np.argmax(rho))
    return BeamReport(
        z=fieldv.z,
        norm=norm(fieldv),
        rms_width=rms_width(fieldv),
        peak_position=float(fieldv.grid.x[i]),
        peak_value=float(rho[i]),
        edge_leakage=edge_leakage(fieldv),
    )


def _parabolic_vertex(z, y):
    """Vertex of the parabola through three points (z equally spaced or not)."""
    z0, z1, z2 = z
    y0, y1, y2 = y
    denom = (z0 - z1) * (z0 - z2) * (z1 - z2)
    a = (z2 * (y1 - y0) + z1 * (y0 - y2) + z0 * (y2 - y1)) / denom
    b = (z2 * z2 * (y0 - y1) + z1 * z1 * (y2 - y0) + z0 * z0 * (y1 - y2)) / denom
    if a == 0.0:
        return z1, y1
    zv = -b / (2.0 * a)
    c = y1 - a * z1 * z1 - b * z1
    return zv, a * zv * zv + b * zv + c


def focus_locate(snapshots, by="width"):
    """Focus position from a snapshot ladder.

    by='width': parabolic interpolation of the RMS width around its interior
    minimum -> (z_star, width_star).  by='peak': on-axis/peak intensity
    maximization -> (z_star, peak_density_star); used for fields whose tails
    make the width divergent or window-dependent.
    """
    snapshots = list(snapshots)
    if len(snapshots) < 3:
        raise ValidationError("need at least 3 snapshots", field="snapshots")
    z = np.array([f.z for f in snapshots])
    if by == "width":
        y = np.array([rms_width(f) for f in snapshots])
        i = int(np.argmin(y))
    elif by == "peak":
        y = -np.array([float(np.max(density(f))) for f in snapshots])
        i = int(np.argmin(y))
    else:
        raise ValidationError(f"unknown mode {by!r}", field="by")
    if i == 0 or i == len(snapshots) - 1:
        raise NoBracketError(
            f"extremum not bracketed: discrete optimum at boundary z={z[i]}")
    zv, yv = _parabolic_vertex(z[i - 1:i + 2], y[i - 1:i + 2])
    return (float(zv), float(yv)) if by == "width" else (float(zv), float(-yv))


def continuity_residual(prev: ComplexField1D, cur: ComplexField1D,
                        next_: ComplexField1D, interior=0.8) -> np.ndarray:
    """Central-difference transport residual d rho/dz + d(rho v)/dx at cur.z.

    The flux rho*v is computed node-safely as Im[conj(psi) psi'] and
    differentiated spectrally; returns the central ``interior`` portion of
    the grid.
    """
    g = cur.grid
    for other in (prev, next_):
        if (other.grid.x_min != g.x_min or other.grid.x_max != g.x_max
                or other.grid.n != g.n):
            raise ValidationError("snapshot grids differ", field="grids")
    dz1 = cur.z - prev.z
    dz2 = next_.z - cur.z
    if not (dz1 > 0 and dz2 > 0) or abs(dz1 - dz2) > 1e-12 * max(dz1, dz2):
        raise ValidationError("z values must form an arithmetic triple",
                              field="z")
    drho_dz = (density(next_) - density(prev)) / (dz1 + dz2)
    k = np.fft.fftfreq(g.n, d=g.dx) * 2.0 * np.pi
    dpsi = np.fft.ifft(1j * k * np.fft.fft(cur.values))
    flux = np.imag(np.conj(cur.values) * dpsi)
    dflux_dx = np.fft.ifft(1j * k * np.fft.fft(flux.astype(np.complex128))).real
    residual = drho_dz + dflux_dx
    margin = int(round(0.5 * (1.0 - interior) * g.n))
    return residual[margin:g.n - margin] if margin > 0 else residual


def trajectory_error(numeric: TrajectorySet, spec: beams.BeamSpec) -> float:
    """Max |numeric - closed form| over trajectories and ladder points."""
    exact = np.stack([
        beams.trajectory_exact(spec, x0, numeric.z_ladder)
        for x0 in numeric.initial
    ])
    return float(np.nanmax(np.abs(numeric.positions - exact)))

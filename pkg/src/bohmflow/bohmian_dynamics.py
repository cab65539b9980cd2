"""Guidance velocity fields, the quantum potential, and trajectory ensembles.

Velocities come from three routes that must agree where they overlap:

* ``velocity_numeric``  -- Im[psi'/psi] with a spectral derivative of a snapshot;
* ``velocity_spectral`` -- the plane-wave double sum over DFT coefficients,
  exact in x and z for band-limited fields (the route that stays accurate
  near nodes);
* ``velocity_exact``    -- closed forms (in :mod:`bohmflow.analytic_beams`).

Trajectories integrate dx/dz = v(x, z) with fixed-step classical RK4.
Velocity providers: a closed-form beam family, a quadrature-backed ladder for
the peres family, or stored snapshots with cubic-in-x / linear-in-z
interpolation and a double-sum fallback near nodes.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import analytic_beams as beams
from . import kernels
from .errors import NodeError, NumericalError, ValidationError
from .grid_field import (
    NODE_EPSILON,
    ComplexField1D,
    Grid1D,
    SpectralField,
    density,
    to_spectral,
)

FLAG_NAMES = {
    kernels.TRAJ_OK: "ok",
    kernels.TRAJ_NODE: "node_truncated",
    kernels.TRAJ_ESCAPED: "escaped",
}

_FAMILY_CODES = {
    "ideal_airy": kernels.FAMILY_IDEAL_AIRY,
    "finite_airy": kernels.FAMILY_FINITE_AIRY,
    "gaussian": kernels.FAMILY_GAUSSIAN,
    "generalized_gaussian": kernels.FAMILY_GENERALIZED_GAUSSIAN,
}


@dataclass(frozen=True)
class VelocityField:
    """Guidance velocity sampled on a grid; NaN (mask False) at nodes."""

    grid: Grid1D
    z: float
    values: np.ndarray
    defined_mask: np.ndarray


def velocity_numeric(fieldv: ComplexField1D) -> VelocityField:
    """v = Im[psi'/psi] with psi' by spectral differentiation."""
    if fieldv.singular:
        raise ValidationError("velocity of a singular field is undefined",
                              field="field")
    mask = fieldv.node_mask()
    if not mask.any():
        raise NodeError("field vanishes everywhere; velocity undefined")
    g = fieldv.grid
    k = np.fft.fftfreq(g.n, d=g.dx) * 2.0 * np.pi
    dpsi = np.fft.ifft(1j * k * np.fft.fft(fieldv.values))
    v = np.full(g.n, np.nan)
    v[mask] = np.imag(dpsi[mask] / fieldv.values[mask])
    return VelocityField(g, fieldv.z, v, mask)


def velocity_spectral(spec: SpectralField, x, z, prune=0.0):
    """Double-sum guidance velocity from synthesis coefficients at (x, z).

    Exact continuation in both x and z for band-limited fields; ``prune``
    drops coefficients below prune * max|c| (speed knob, 0 = exact sum).
    """
    k = spec.wavenumbers
    c = spec.coeffs
    if prune > 0.0:
        keep = np.abs(c) > prune * np.abs(c).max()
        k = k[keep]
        c = c[keep]
    cmod = np.abs(c)
    cphase = np.angle(c)
    num, den = kernels.velocity_double_sum(k, cmod, cphase, float(x),
                                           float(z) - spec.z0)
    total = np.sum(cmod) ** 2
    if abs(den) <= NODE_EPSILON * total:
        raise NodeError(f"spectral velocity undefined at node x={x}, z={z}")
    return num / den


def quantum_potential(fieldv: ComplexField1D) -> np.ndarray:
    """Curvature-of-amplitude term -1/2 [rho''/rho - (rho'/rho)^2 / 2].

    Spectral derivatives of the density; NaN at node samples.  Invariant
    under global rescaling of psi.
    """
    rho = density(fieldv)
    mask = fieldv.node_mask()
    g = fieldv.grid
    k = np.fft.fftfreq(g.n, d=g.dx) * 2.0 * np.pi
    spec = np.fft.fft(rho.astype(np.complex128))
    d1 = np.fft.ifft(1j * k * spec).real
    d2 = np.fft.ifft(-(k * k) * spec).real
    out = np.full(g.n, np.nan)
    r = rho[mask]
    out[mask] = -0.5 * (d2[mask] / r - 0.5 * (d1[mask] / r) ** 2)
    return out


# ---------------------------------------------------------------------------
# Trajectory ensembles


@dataclass(frozen=True)
class TrajectorySet:
    """Trajectory ensemble on a common z ladder.

    ``positions[i, j]`` is trajectory i at z_ladder[j]; NaN past the point
    where a trajectory was truncated (node encounter or grid escape).
    Initial ordering is validated to persist (trajectories of one field
    cannot cross at equal z).
    """

    z_ladder: np.ndarray
    positions: np.ndarray
    initial: np.ndarray
    status: np.ndarray = dc_field(default=None)
    status_z: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        zl = np.asarray(self.z_ladder, dtype=np.float64)
        pos = np.asarray(self.positions, dtype=np.float64)
        init = np.asarray(self.initial, dtype=np.float64)
        if pos.shape != (init.size, zl.size):
            raise ValidationError("positions shape mismatch", field="positions")
        status = (np.zeros(init.size, dtype=np.int64)
                  if self.status is None else np.asarray(self.status))
        status_z = (np.full(init.size, np.nan)
                    if self.status_z is None else np.asarray(self.status_z))
        if not np.allclose(pos[:, 0], init, rtol=0, atol=0):
            raise ValidationError("positions[:, 0] must equal initial",
                                  field="positions")
        object.__setattr__(self, "z_ladder", zl)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "status_z", status_z)
        self._check_non_crossing()

    def _check_non_crossing(self):
        init = self.initial
        if init.size < 2 or not np.all(np.diff(init) > 0):
            return
        for j in range(self.z_ladder.size):
            col = self.positions[:, j]
            live = np.isfinite(col)
            if live.sum() < 2:
                continue
            if not np.all(np.diff(col[live]) > 0):
                raise ValidationError(
                    f"trajectory ordering violated at z={self.z_ladder[j]}",
                    field="positions")

    def flags(self):
        """Per-trajectory flag names."""
        return [FLAG_NAMES[int(s)] for s in self.status]

    def iter_rows(self):
        """Yield (traj_id, z, x, flag) rows for serialization.

        Truncated trajectories stop at their last defined ladder point, which
        carries the truncation flag; all earlier rows are 'ok'.
        """
        for i in range(self.initial.size):
            row = self.positions[i]
            live = np.flatnonzero(np.isfinite(row))
            for j in live:
                last = j == live[-1]
                flag = FLAG_NAMES[int(self.status[i])] if last else "ok"
                yield i, self.z_ladder[j], row[j], flag


@dataclass(frozen=True)
class IntegrateOpts:
    """Integrator knobs.

    step = None picks min(0.01, span/1000); focusing families refine the step
    (halving, up to max_refinements) until two runs differ by < refine_tol,
    unless an explicit step pins it.
    """

    step: float = None
    output_every: int = 1
    density_floor: float = 1e-10
    refine_tol: float = 1e-7
    max_refinements: int = 5


def _default_step(span):
    return min(0.01, span / 1000.0)


def _steps_for(span, step, output_every):
    n = max(1, math.ceil(span / step))
    n = math.ceil(n / output_every) * output_every
    return n


def _mask_after_truncation(z_out, positions, status, status_z):
    pos = positions.copy()
    for i in range(pos.shape[0]):
        if status[i] != kernels.TRAJ_OK and np.isfinite(status_z[i]):
            pos[i, z_out > status_z[i]] = np.nan
    return pos


def _closed_form_run(spec, initial, z0, z1, opts):
    span = z1 - z0
    step = opts.step if opts.step is not None else _default_step(span)
    code = _FAMILY_CODES[spec.family]
    gamma = spec.gamma or 0.0
    sigma0 = spec.sigma0 or 1.0
    z_focus = spec.focus

    def run(n_steps, out_every):
        h = span / n_steps
        z_out, pos, status, status_step = kernels.rk4_closed_form(
            code, gamma, sigma0, z_focus, initial, z0, h, n_steps, out_every)
        status_z = np.where(status_step >= 0, z0 + status_step * h, np.nan)
        return z_out, pos, status, status_z

    n_steps = _steps_for(span, step, opts.output_every)
    z_out, pos, status, status_z = run(n_steps, opts.output_every)

    refine = (spec.family == "generalized_gaussian" and opts.step is None)
    for _ in range(opts.max_refinements if refine else 0):
        z2, pos2, status2, status_z2 = run(2 * n_steps, 2 * opts.output_every)
        diff = np.nanmax(np.abs(pos2 - pos)) if pos.size else 0.0
        z_out, pos, status, status_z = z2, pos2, status2, status_z2
        n_steps *= 2
        if diff < opts.refine_tol:
            break
    pos = _mask_after_truncation(z_out, pos, status, status_z)
    return TrajectorySet(z_out, pos, initial, status, status_z)


class _SnapshotVelocity:
    """Cubic-in-x / linear-in-z interpolation over stored velocity rows,
    falling back to an exact evaluator near nodes."""

    def __init__(self, grid, rows_z, v_rows, bad_rows, exact_fn):
        self.grid = grid
        self.rows_z = rows_z
        self.v_rows = v_rows
        # near-node zones: nodes dilated by two cells
        pad = 2
        self.near = []
        for bad in bad_rows:
            near = bad.copy()
            for shift in range(1, pad + 1):
                near[shift:] |= bad[:-shift]
                near[:-shift] |= bad[shift:]
            self.near.append(near)
        self.exact_fn = exact_fn
        self.x_lo = grid.x[1]
        self.x_hi = grid.x[-3]

    def __call__(self, x, z, escaped):
        """Velocity for active points; marks escapes in-place."""
        g = self.grid
        escaped |= (x < self.x_lo) | (x > self.x_hi)
        xc = np.clip(x, g.x[0], g.x[-1])

        j = np.searchsorted(self.rows_z, z, side="right") - 1
        j = min(max(j, 0), len(self.rows_z) - 2)
        z_l, z_r = self.rows_z[j], self.rows_z[j + 1]
        w = (z - z_l) / (z_r - z_l) if z_r > z_l else 0.0

        idx = np.clip(((xc - g.x_min) / g.dx).astype(np.int64) - 1, 0, g.n - 4)
        t = (xc - g.x[idx]) / g.dx
        l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0
        l1 = t * (t - 2) * (t - 3) / 2.0
        l2 = -t * (t - 1) * (t - 3) / 2.0
        l3 = t * (t - 1) * (t - 2) / 6.0

        v = np.zeros_like(x)
        hard = np.zeros(x.size, dtype=bool)
        for row, weight in ((j, 1.0 - w), (j + 1, w)):
            if weight == 0.0:
                continue
            vr = self.v_rows[row]
            stencil = np.stack([vr[idx], vr[idx + 1], vr[idx + 2], vr[idx + 3]])
            v += weight * (l0 * stencil[0] + l1 * stencil[1]
                           + l2 * stencil[2] + l3 * stencil[3])
            nr = self.near[row]
            hard |= nr[idx] | nr[idx + 1] | nr[idx + 2] | nr[idx + 3]
        hard |= ~np.isfinite(v)

        if hard.any():
            nearest = j if w < 0.5 else j + 1
            for i in np.flatnonzero(hard & ~escaped):
                v[i] = self.exact_fn(nearest, xc[i], z)
        return v


def _snapshot_run(grid, rows_z, v_rows, bad_rows, exact_fn, initial,
                  z0, z1, opts):
    if rows_z[0] > z0 + 1e-12 or rows_z[-1] < z1 - 1e-12:
        raise ValidationError("snapshot ladder does not cover [z0, z1]",
                              field="snapshots")
    vel = _SnapshotVelocity(grid, rows_z, v_rows, bad_rows, exact_fn)
    span = z1 - z0
    step = opts.step if opts.step is not None else _default_step(span)

    inner = rows_z[(rows_z > z0 + 1e-12) & (rows_z < z1 - 1e-12)]
    out_z = np.concatenate([[z0], inner, [z1]])

    n_traj = initial.size
    positions = np.full((n_traj, out_z.size), np.nan)
    positions[:, 0] = initial
    status = np.full(n_traj, kernels.TRAJ_OK, dtype=np.int64)
    status_z = np.full(n_traj, np.nan)
    x = initial.astype(np.float64).copy()
    escaped = np.zeros(n_traj, dtype=bool)

    def freeze(new_escaped, z):
        fresh = new_escaped & (status == kernels.TRAJ_OK)
        status[fresh] = kernels.TRAJ_ESCAPED
        status_z[fresh] = z

    for seg in range(out_z.size - 1):
        za, zb = out_z[seg], out_z[seg + 1]
        m = max(1, math.ceil((zb - za) / step))
        h = (zb - za) / m
        for s in range(m):
            z = za + s * h
            pre = escaped.copy()
            try:
                k1 = vel(x, z, escaped)
                k2 = vel(x + 0.5 * h * k1, z + 0.5 * h, escaped)
                k3 = vel(x + 0.5 * h * k2, z + 0.5 * h, escaped)
                k4 = vel(x + h * k3, min(z + h, rows_z[-1]), escaped)
            except NodeError as exc:
                raise NumericalError(f"node encountered during step at z={z}: "
                                     f"{exc}") from exc
            newly = escaped & ~pre
            freeze(newly, z)
            adv = ~escaped
            x[adv] += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)[adv]
        alive = status == kernels.TRAJ_OK
        positions[alive, seg + 1] = x[alive]

    keep = np.unique(np.concatenate(
        [np.arange(0, out_z.size, opts.output_every), [out_z.size - 1]]))
    return TrajectorySet(out_z[keep], positions[:, keep], initial,
                         status, status_z)


def _numeric_snapshot_provider(snapshots):
    grid = snapshots[0].grid
    rows_z = np.array([f.z for f in snapshots])
    if not np.all(np.diff(rows_z) > 0):
        raise ValidationError("snapshots must be strictly increasing in z",
                              field="snapshots")
    v_rows = []
    bad_rows = []
    specs = []
    for f in snapshots:
        if f.grid is not grid and (f.grid.x_min != grid.x_min
                                   or f.grid.x_max != grid.x_max
                                   or f.grid.n != grid.n):
            raise ValidationError("snapshots must share one grid",
                                  field="snapshots")
        vf = velocity_numeric(f)
        v_rows.append(vf.values)
        bad_rows.append(~vf.defined_mask)
        specs.append(to_spectral(f))

    def exact(row, x, z):
        return velocity_spectral(specs[row], x, z, prune=1e-13)

    return grid, rows_z, v_rows, bad_rows, exact


def _peres_ladder(z_focus, z0, z1):
    """Quadrature-row positions: dense (0.005 z_f) around the focus."""
    fine = 0.005 * z_focus
    coarse = 0.04 * z_focus
    band = 0.2 * z_focus
    marks = [z0]
    z = z0
    while z < z1 - 1e-12:
        near_focus = abs(z - z_focus) < band or abs(z + coarse - z_focus) < band
        z = min(z + (fine if near_focus else coarse), z1)
        marks.append(z)
    return np.array(marks)


def _peres_provider(spec, grid, z0, z1):
    rows_z = _peres_ladder(spec.z_focus, z0, z1)
    v_rows = []
    bad_rows = []
    for z in rows_z:
        psi, v = beams.peres_row(grid.x, z, spec.z_focus)
        mag = np.abs(psi)
        bad = ~(mag > NODE_EPSILON * mag.max()) | ~np.isfinite(v)
        v_rows.append(np.where(bad, np.nan, v))
        bad_rows.append(bad)

    def exact(row, x, z):
        return beams.peres_velocity(float(x), float(z), spec.z_focus)

    return grid, rows_z, v_rows, bad_rows, exact


def _density_floor_check(rho, xs, x0, floor):
    peak = rho.max()
    at0 = np.interp(x0, xs, rho)
    low = at0 < floor * peak
    if low.any():
        bad = x0[low][0]
        raise ValidationError(
            f"initial position {bad} sits below the density floor "
            f"({floor:g} of peak)", field="initial")


def integrate_trajectories(provider, initial, z0, z1, opts=None, grid=None):
    """Integrate dx/dz = v(x, z) for an ensemble of initial positions.

    provider: a BeamSpec (closed-form velocity; the peres family builds a
    quadrature snapshot ladder on ``grid``) or a list of ComplexField1D
    snapshots.  Returns a TrajectorySet on the output ladder.
    """
    opts = opts or IntegrateOpts()
    initial = np.atleast_1d(np.asarray(initial, dtype=np.float64))
    if not z1 > z0:
        raise ValidationError("z1 must exceed z0", field="z1")

    if isinstance(provider, beams.BeamSpec):
        if provider.family == "peres":
            if grid is None:
                raise ValidationError("peres trajectories need a grid",
                                      field="grid")
            psi0, _ = beams.peres_row(grid.x, z0, provider.z_focus)
            _density_floor_check(np.abs(psi0) ** 2, grid.x, initial,
                                 opts.density_floor)
            g, rows_z, v_rows, bad_rows, exact = _peres_provider(
                provider, grid, z0, z1)
            return _snapshot_run(g, rows_z, v_rows, bad_rows, exact, initial,
                                 z0, z1, opts)
        probe = Grid1D(initial.min() - 5.0, initial.max() + 5.0, 2048)
        rho = np.abs(beams.sample_field(provider, probe, z0).values) ** 2
        _density_floor_check(rho, probe.x, initial, opts.density_floor)
        return _closed_form_run(provider, initial, z0, z1, opts)

    snapshots = list(provider)
    if not snapshots:
        raise ValidationError("empty snapshot list", field="provider")
    g, rows_z, v_rows, bad_rows, exact = _numeric_snapshot_provider(snapshots)
    rho0 = density(snapshots[0])
    _density_floor_check(rho0, g.x, initial, opts.density_floor)
    inside = (initial > g.x[1]) & (initial < g.x[-3])
    if not inside.all():
        raise ValidationError("initial positions must lie inside the grid "
                              "interior", field="initial")
    return _snapshot_run(g, rows_z, v_rows, bad_rows, exact, initial,
                         z0, z1, opts)

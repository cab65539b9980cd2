"""Pure-numpy kernel implementations (fallback backend).

Vectorized versions of the hot kernels; the numba module mirrors these
signatures with scalar loops.  Algorithms and coefficient tables are shared
through :mod:`bohmflow.kernels.common` so both backends agree to rounding.
"""

import math

import numpy as np

from . import common
from .common import (
    AI_ZERO,
    AIP_ZERO,
    ASY_TERMS,
    CONNECT_ARG,
    FAMILY_FINITE_AIRY,
    FAMILY_GAUSSIAN,
    FAMILY_GENERALIZED_GAUSSIAN,
    FAMILY_IDEAL_AIRY,
    SERIES_EPS,
    SERIES_MAX_TERMS,
    SERIES_RADIUS,
    TRAJ_NODE,
    TRAJ_OK,
    U_COEF,
    V_COEF,
)

_ROT_P = np.exp(2j * np.pi / 3.0)  # rotations into the front Stokes sectors
_ROT_M = np.exp(-2j * np.pi / 3.0)
_HALF_SQRT_PI = 0.5 / math.sqrt(math.pi)


def _airy_series(y):
    """Maclaurin series for Ai and Ai' (|y| <= SERIES_RADIUS)."""
    y3 = y * y * y
    f = np.ones_like(y)
    g = y.copy()
    fp = np.zeros_like(y)
    gp = np.ones_like(y)
    tf = np.ones_like(y)
    tg = y.copy()
    tgp = np.ones_like(y)
    # f' has no k=0 term; seed its k=1 term directly.
    tfp = 0.5 * y * y

    k = 0
    while k < SERIES_MAX_TERMS:
        tf = tf * y3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * y3 / ((3 * k + 3) * (3 * k + 4))
        tgp = tgp * y3 / ((3 * k + 1) * (3 * k + 3))
        if k >= 1:
            tfp = tfp * y3 * (k + 1) / (k * (3 * k + 2) * (3 * k + 3))
        f = f + tf
        g = g + tg
        fp = fp + tfp
        gp = gp + tgp
        k += 1
        scale = np.abs(f) + np.abs(g) + 1.0
        if np.all(np.abs(tf) + np.abs(tg) + np.abs(tfp) + np.abs(tgp)
                  < SERIES_EPS * scale):
            break

    ai = AI_ZERO * f + AIP_ZERO * g
    aip = AI_ZERO * fp + AIP_ZERO * gp
    return ai, aip


def _airy_asymptotic(y):
    """Direct large-|y| expansion, valid for |arg y| <= 2pi/3."""
    zeta = (2.0 / 3.0) * y ** 1.5
    t = 1.0 / zeta
    s_ai = np.full_like(y, U_COEF[ASY_TERMS - 1])
    s_aip = np.full_like(y, V_COEF[ASY_TERMS - 1])
    for k in range(ASY_TERMS - 2, -1, -1):
        s_ai = U_COEF[k] - t * s_ai
        s_aip = V_COEF[k] - t * s_aip
    yq = y ** 0.25
    damp = np.exp(-zeta) * _HALF_SQRT_PI
    return damp / yq * s_ai, -damp * yq * s_aip


def airy_many(y):
    """Airy Ai and Ai' on arbitrary complex input (vectorized).

    Series inside |y| <= SERIES_RADIUS, asymptotics outside, with the rear
    Stokes sector handled by the rotation identity.  Lower half-plane values
    come from Schwarz reflection.
    """
    y = np.ascontiguousarray(y, dtype=np.complex128)
    flat = y.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)

    lower = flat.imag < 0.0
    w = np.where(lower, flat.conj(), flat)

    small = np.abs(w) <= SERIES_RADIUS
    if small.any():
        ai[small], aip[small] = _airy_series(w[small])

    big = ~small
    if big.any():
        wb = w[big]
        arg = np.angle(wb)
        direct = arg <= CONNECT_ARG
        ai_b = np.empty_like(wb)
        aip_b = np.empty_like(wb)
        if direct.any():
            ai_b[direct], aip_b[direct] = _airy_asymptotic(wb[direct])
        rear = ~direct
        if rear.any():
            wr = wb[rear]
            a_m, p_m = _airy_asymptotic(wr * _ROT_M)
            a_p, p_p = _airy_asymptotic(wr * _ROT_P)
            ai_b[rear] = -(_ROT_M * a_m + _ROT_P * a_p)
            aip_b[rear] = -(_ROT_P * p_m + _ROT_M * p_p)
        ai[big] = ai_b
        aip[big] = aip_b

    ai = np.where(lower, ai.conj(), ai)
    aip = np.where(lower, aip.conj(), aip)
    return ai.reshape(y.shape), aip.reshape(y.shape)


def _peres_gw(nodes, weights, a, half_width, ramp):
    amp = common.window_profile(nodes, half_width, ramp) / (1.0 + nodes * nodes) ** (1.0 / 3.0)
    return weights * amp * np.exp(1j * a * nodes * nodes)


def peres_moments_row(x, z, z_f, half_width, ramp):
    """Windowed oscillatory moments M0 = ∫G e^{-i x x'/z}, M1 = ∫x' G e^{-i x x'/z}.

    ``x`` must be an ascending uniform grid; the e^{-i x x'/z} factor is built
    by a per-node recurrence along the row, so the cost is O(n_x * n_nodes)
    multiplications instead of exponentials.
    """
    x = np.asarray(x, dtype=np.float64)
    a = (z_f - z) / (2.0 * z * z_f)
    b_ref = np.max(np.abs(x)) / z
    nodes, weights = common.peres_quadrature_nodes(a, b_ref, half_width, ramp)
    gw = _peres_gw(nodes, weights, a, half_width, ramp)
    gw1 = gw * nodes

    phase0 = np.exp(-1j * x[0] * nodes / z)
    step = np.exp(-1j * (x[1] - x[0]) * nodes / z) if x.size > 1 else None

    m0 = np.empty(x.size, dtype=np.complex128)
    m1 = np.empty(x.size, dtype=np.complex128)
    run = phase0
    for i in range(x.size):
        m0[i] = gw @ run
        m1[i] = gw1 @ run
        if step is not None and i + 1 < x.size:
            run = run * step
    return m0, m1


def peres_moments_point(x, z, z_f, half_width, ramp):
    """Single-point variant of :func:`peres_moments_row`."""
    a = (z_f - z) / (2.0 * z * z_f)
    nodes, weights = common.peres_quadrature_nodes(a, abs(x) / z, half_width, ramp)
    gw = _peres_gw(nodes, weights, a, half_width, ramp)
    phase = np.exp(-1j * x * nodes / z)
    return complex(gw @ phase), complex((gw * nodes) @ phase)


def velocity_double_sum(wavenumbers, cmod, cphase, x, tau):
    """Guidance velocity from the plane-wave double sum at one (x, tau).

    Literal double sum over mode pairs: cos(dk*x - dE*tau + dphi) weighted by
    |c_j||c_l| (k_j in the numerator).  Returns (numerator, denominator) so
    callers can apply their own node threshold.
    """
    theta = wavenumbers * x - 0.5 * wavenumbers * wavenumbers * tau + cphase
    cos_mat = np.cos(theta[:, None] - theta[None, :])
    wk = cmod * wavenumbers
    num = wk @ cos_mat @ cmod
    den = cmod @ cos_mat @ cmod
    return num, den


def velocity_double_sum_many(wavenumbers, cmod, cphase, xs, taus):
    """Double-sum velocity components at many (x, tau) points."""
    xs = np.asarray(xs, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    num = np.empty(xs.size)
    den = np.empty(xs.size)
    for i in range(xs.size):
        num[i], den[i] = velocity_double_sum(wavenumbers, cmod, cphase,
                                             xs[i], taus[i])
    return num, den


def _family_velocity(family, gamma, sigma0, z_focus, x, z):
    if family == FAMILY_IDEAL_AIRY:
        return np.full_like(x, 0.5 * z), None
    if family == FAMILY_FINITE_AIRY:
        y = x - 0.25 * z * z + 1j * gamma * z
        ai, aip = airy_many(y)
        bad = np.abs(ai) < 1e-280
        safe_ai = np.where(bad, 1.0, ai)
        v = 0.5 * z + np.imag(aip / safe_ai)
        return np.where(bad, 0.0, v), bad
    if family in (FAMILY_GAUSSIAN, FAMILY_GENERALIZED_GAUSSIAN):
        dz = z - z_focus
        sg2 = sigma0 * sigma0 + (0.5 * dz / sigma0) ** 2
        return x * dz / (4.0 * sigma0 * sigma0 * sg2), None
    raise ValueError(f"unknown family code {family}")


def rk4_closed_form(family, gamma, sigma0, z_focus, x0, z0, h, n_steps, out_every):
    """Fixed-step RK4 ensemble for families with a closed-form velocity.

    Returns (z_out, positions[n_traj, n_out], status, status_step) where
    status flags node-truncated trajectories and status_step records the step
    index at which truncation happened (-1 otherwise).  Positions stay frozen
    after truncation.
    """
    x = np.array(x0, dtype=np.float64).copy()
    n_traj = x.size
    n_out = n_steps // out_every + 1
    positions = np.empty((n_traj, n_out))
    positions[:, 0] = x
    z_out = np.empty(n_out)
    z_out[0] = z0
    status = np.full(n_traj, TRAJ_OK, dtype=np.int64)
    status_step = np.full(n_traj, -1, dtype=np.int64)
    alive = np.ones(n_traj, dtype=bool)

    def vel(xs, z, step):
        v, bad = _family_velocity(family, gamma, sigma0, z_focus, xs, z)
        if bad is not None and bad.any():
            hit = alive & bad
            status[hit] = TRAJ_NODE
            status_step[hit] = step
            alive[hit] = False
        return np.where(alive, v, 0.0)

    out_i = 1
    for step in range(1, n_steps + 1):
        z = z0 + (step - 1) * h
        k1 = vel(x, z, step)
        k2 = vel(x + 0.5 * h * k1, z + 0.5 * h, step)
        k3 = vel(x + 0.5 * h * k2, z + 0.5 * h, step)
        k4 = vel(x + h * k3, z + h, step)
        x = x + np.where(alive, (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0)
        if step % out_every == 0:
            positions[:, out_i] = x
            z_out[out_i] = z0 + step * h
            out_i += 1
    return z_out, positions, status, status_step

"""Numba @njit kernel implementations (default backend when numba is present).

Scalar/loop versions of the numpy kernels; signatures and numerics match
:mod:`bohmflow.kernels.numpy_impl` to rounding.  Parallel loops only write to
disjoint output slots, so results are identical for any thread count.
"""

import cmath
import math

import numpy as np
from numba import njit, prange

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

_ROT_P = cmath.exp(2j * math.pi / 3.0)
_ROT_M = cmath.exp(-2j * math.pi / 3.0)
_HALF_SQRT_PI = 0.5 / math.sqrt(math.pi)


@njit(cache=True)
def _airy_series_scalar(y):
    y3 = y * y * y
    f = 1.0 + 0j
    g = y
    fp = 0.0 + 0j
    gp = 1.0 + 0j
    tf = 1.0 + 0j
    tg = y
    tgp = 1.0 + 0j
    tfp = 0.5 * y * y
    for k in range(SERIES_MAX_TERMS):
        tf = tf * y3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * y3 / ((3 * k + 3) * (3 * k + 4))
        tgp = tgp * y3 / ((3 * k + 1) * (3 * k + 3))
        if k >= 1:
            tfp = tfp * y3 * (k + 1) / (k * (3 * k + 2) * (3 * k + 3))
        f += tf
        g += tg
        fp += tfp
        gp += tgp
        if (abs(tf) + abs(tg) + abs(tfp) + abs(tgp)
                < SERIES_EPS * (abs(f) + abs(g) + 1.0)):
            break
    return AI_ZERO * f + AIP_ZERO * g, AI_ZERO * fp + AIP_ZERO * gp


@njit(cache=True)
def _airy_asymptotic_scalar(y, u_coef, v_coef):
    zeta = (2.0 / 3.0) * y ** 1.5
    t = 1.0 / zeta
    s_ai = u_coef[ASY_TERMS - 1] + 0j
    s_aip = v_coef[ASY_TERMS - 1] + 0j
    for k in range(ASY_TERMS - 2, -1, -1):
        s_ai = u_coef[k] - t * s_ai
        s_aip = v_coef[k] - t * s_aip
    yq = y ** 0.25
    damp = cmath.exp(-zeta) * _HALF_SQRT_PI
    return damp / yq * s_ai, -damp * yq * s_aip


@njit(cache=True)
def _airy_scalar(y, u_coef, v_coef):
    lower = y.imag < 0.0
    w = y.conjugate() if lower else y
    if abs(w) <= SERIES_RADIUS:
        ai, aip = _airy_series_scalar(w)
    else:
        arg = cmath.phase(w)
        if arg <= CONNECT_ARG:
            ai, aip = _airy_asymptotic_scalar(w, u_coef, v_coef)
        else:
            a_m, p_m = _airy_asymptotic_scalar(w * _ROT_M, u_coef, v_coef)
            a_p, p_p = _airy_asymptotic_scalar(w * _ROT_P, u_coef, v_coef)
            ai = -(_ROT_M * a_m + _ROT_P * a_p)
            aip = -(_ROT_P * p_m + _ROT_M * p_p)
    if lower:
        return ai.conjugate(), aip.conjugate()
    return ai, aip


@njit(cache=True, parallel=True)
def _airy_many_flat(y, ai, aip, u_coef, v_coef):
    for i in prange(y.size):
        ai[i], aip[i] = _airy_scalar(y[i], u_coef, v_coef)


def airy_many(y):
    """Airy Ai and Ai' on arbitrary complex input (jit loop)."""
    y = np.ascontiguousarray(y, dtype=np.complex128)
    flat = y.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    _airy_many_flat(flat, ai, aip, U_COEF, V_COEF)
    return ai.reshape(y.shape), aip.reshape(y.shape)


@njit(cache=True)
def _smoothstep(s):
    if s <= 0.0:
        return 0.0
    if s >= 1.0:
        return 1.0
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


@njit(cache=True)
def _peres_gw_fill(nodes, weights, a, half_width, ramp, gw, gw1):
    for j in range(nodes.size):
        q = nodes[j]
        win = _smoothstep((half_width - abs(q)) / ramp)
        amp = win / (1.0 + q * q) ** (1.0 / 3.0)
        val = weights[j] * amp * cmath.exp(1j * a * q * q)
        gw[j] = val
        gw1[j] = val * q


@njit(cache=True, parallel=True)
def _peres_row_jit(x, inv_z, nodes, gw, gw1, m0, m1):
    for i in prange(x.size):
        acc0 = 0.0 + 0j
        acc1 = 0.0 + 0j
        c = -x[i] * inv_z
        for j in range(nodes.size):
            ph = cmath.exp(1j * (c * nodes[j]))
            acc0 += gw[j] * ph
            acc1 += gw1[j] * ph
        m0[i] = acc0
        m1[i] = acc1


def peres_moments_row(x, z, z_f, half_width, ramp):
    """Windowed oscillatory moments along a uniform x row (see numpy twin)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    a = (z_f - z) / (2.0 * z * z_f)
    b_ref = np.max(np.abs(x)) / z
    nodes, weights = common.peres_quadrature_nodes(a, b_ref, half_width, ramp)
    gw = np.empty(nodes.size, dtype=np.complex128)
    gw1 = np.empty(nodes.size, dtype=np.complex128)
    _peres_gw_fill(nodes, weights, a, half_width, ramp, gw, gw1)
    m0 = np.empty(x.size, dtype=np.complex128)
    m1 = np.empty(x.size, dtype=np.complex128)
    _peres_row_jit(x, 1.0 / z, nodes, gw, gw1, m0, m1)
    return m0, m1


def peres_moments_point(x, z, z_f, half_width, ramp):
    a = (z_f - z) / (2.0 * z * z_f)
    nodes, weights = common.peres_quadrature_nodes(a, abs(x) / z, half_width, ramp)
    gw = np.empty(nodes.size, dtype=np.complex128)
    gw1 = np.empty(nodes.size, dtype=np.complex128)
    _peres_gw_fill(nodes, weights, a, half_width, ramp, gw, gw1)
    m0 = np.empty(1, dtype=np.complex128)
    m1 = np.empty(1, dtype=np.complex128)
    _peres_row_jit(np.array([float(x)]), 1.0 / z, nodes, gw, gw1, m0, m1)
    return complex(m0[0]), complex(m1[0])


@njit(cache=True)
def _velocity_double_sum_jit(wavenumbers, cmod, cphase, x, tau):
    n = wavenumbers.size
    num = 0.0
    den = 0.0
    for j in range(n):
        theta_j = wavenumbers[j] * x - 0.5 * wavenumbers[j] ** 2 * tau + cphase[j]
        wj = cmod[j]
        kj = wavenumbers[j]
        for l in range(n):
            theta_l = (wavenumbers[l] * x - 0.5 * wavenumbers[l] ** 2 * tau
                       + cphase[l])
            c = wj * cmod[l] * math.cos(theta_j - theta_l)
            num += kj * c
            den += c
    return num, den


def velocity_double_sum(wavenumbers, cmod, cphase, x, tau):
    return _velocity_double_sum_jit(
        np.ascontiguousarray(wavenumbers, dtype=np.float64),
        np.ascontiguousarray(cmod, dtype=np.float64),
        np.ascontiguousarray(cphase, dtype=np.float64),
        float(x), float(tau))


@njit(cache=True, parallel=True)
def _velocity_double_sum_many_jit(wavenumbers, cmod, cphase, xs, taus, num, den):
    for i in prange(xs.size):
        num[i], den[i] = _velocity_double_sum_jit(wavenumbers, cmod, cphase,
                                                  xs[i], taus[i])


def velocity_double_sum_many(wavenumbers, cmod, cphase, xs, taus):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    taus = np.ascontiguousarray(taus, dtype=np.float64)
    num = np.empty(xs.size)
    den = np.empty(xs.size)
    _velocity_double_sum_many_jit(
        np.ascontiguousarray(wavenumbers, dtype=np.float64),
        np.ascontiguousarray(cmod, dtype=np.float64),
        np.ascontiguousarray(cphase, dtype=np.float64),
        xs, taus, num, den)
    return num, den


@njit(cache=True)
def _family_velocity_scalar(family, gamma, sigma0, z_focus, x, z,
                            u_coef, v_coef):
    """Returns (velocity, node_hit)."""
    if family == FAMILY_IDEAL_AIRY:
        return 0.5 * z, False
    if family == FAMILY_FINITE_AIRY:
        y = complex(x - 0.25 * z * z, gamma * z)
        ai, aip = _airy_scalar(y, u_coef, v_coef)
        if abs(ai) < 1e-280:
            return 0.0, True
        return 0.5 * z + (aip / ai).imag, False
    dz = z - z_focus
    sg2 = sigma0 * sigma0 + (0.5 * dz / sigma0) ** 2
    return x * dz / (4.0 * sigma0 * sigma0 * sg2), False


@njit(cache=True, parallel=True)
def _rk4_closed_form_jit(family, gamma, sigma0, z_focus, x0, z0, h,
                         n_steps, out_every, positions, status, status_step,
                         u_coef, v_coef):
    for i in prange(x0.size):
        x = x0[i]
        out_i = 1
        for step in range(1, n_steps + 1):
            z = z0 + (step - 1) * h
            k1, b1 = _family_velocity_scalar(family, gamma, sigma0, z_focus,
                                             x, z, u_coef, v_coef)
            k2, b2 = _family_velocity_scalar(family, gamma, sigma0, z_focus,
                                             x + 0.5 * h * k1, z + 0.5 * h,
                                             u_coef, v_coef)
            k3, b3 = _family_velocity_scalar(family, gamma, sigma0, z_focus,
                                             x + 0.5 * h * k2, z + 0.5 * h,
                                             u_coef, v_coef)
            k4, b4 = _family_velocity_scalar(family, gamma, sigma0, z_focus,
                                             x + h * k3, z + h, u_coef, v_coef)
            if b1 or b2 or b3 or b4:
                status[i] = TRAJ_NODE
                status_step[i] = step
                # freeze: fill the remaining output slots with the last value
                for rest in range(out_i, positions.shape[1]):
                    positions[i, rest] = x
                break
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % out_every == 0:
                positions[i, out_i] = x
                out_i += 1


def rk4_closed_form(family, gamma, sigma0, z_focus, x0, z0, h, n_steps, out_every):
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    n_out = n_steps // out_every + 1
    positions = np.empty((x0.size, n_out))
    positions[:, 0] = x0
    status = np.full(x0.size, TRAJ_OK, dtype=np.int64)
    status_step = np.full(x0.size, -1, dtype=np.int64)
    _rk4_closed_form_jit(family, gamma, sigma0, z_focus, x0, float(z0),
                         float(h), n_steps, out_every, positions, status,
                         status_step, U_COEF, V_COEF)
    z_out = z0 + h * out_every * np.arange(n_out, dtype=np.float64)
    return z_out, positions, status, status_step

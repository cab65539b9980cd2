"""Shared constants and helpers for the kernel backends.

Both kernel implementations (numba and numpy) consume the same coefficient
tables and the same deterministic quadrature-panel layout, so their results
agree to rounding and the backend flag never changes physics.
"""

import math

import numpy as np

# Airy function at the origin: Ai(0) = 3^(-2/3)/Gamma(2/3), Ai'(0) = -3^(-1/3)/Gamma(1/3)
AI_ZERO = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP_ZERO = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)

# Power-series / asymptotic switchover radius.  Below it the Maclaurin series
# keeps cancellation under ~5e-12; above it |zeta| >= 12.3 so the truncated
# asymptotic sums are accurate to ~4e-12.
SERIES_RADIUS = 7.0
SERIES_MAX_TERMS = 160
SERIES_EPS = 1e-18

# Rear Stokes sector: past this arg the direct expansion is replaced by the
# rotation identity Ai(y) = -w*Ai(w*y) - conj(w)*Ai(conj(w)*y), w = e^{2pi i/3}.
CONNECT_ARG = 2.0 * math.pi / 3.0
ASY_TERMS = 20


def _asy_tables(n):
    u = np.empty(n)
    v = np.empty(n)
    u[0] = 1.0
    v[0] = 1.0
    for k in range(n - 1):
        u[k + 1] = (
            u[k]
            * (3.0 * k + 2.5)
            * (3.0 * k + 1.5)
            * (3.0 * k + 0.5)
            / (54.0 * (k + 1.0) * (k + 0.5))
        )
        v[k + 1] = u[k + 1] * (6.0 * (k + 1) + 1.0) / (1.0 - 6.0 * (k + 1))
    return u, v


U_COEF, V_COEF = _asy_tables(ASY_TERMS)

# Fixed-order Gauss-Legendre rule used on every oscillatory panel.  A panel
# carries at most pi of phase, for which order 10 is already at rounding level.
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
PANEL_PHASE = math.pi
PANEL_MAX_WIDTH = 1.0

# Default window for the singular-ansatz quadrature: fixed support half-width
# and edge-ramp width.  Fixed (z-independent) support means the evaluated
# field is the exact free evolution of the windowed initial data.
PERES_HALF_WIDTH = 40.0
PERES_RAMP = 8.0

# Beam family codes shared with the RK4 ensemble kernels.
FAMILY_IDEAL_AIRY = 0
FAMILY_FINITE_AIRY = 1
FAMILY_GAUSSIAN = 2
FAMILY_GENERALIZED_GAUSSIAN = 3

# RK4 ensemble status codes.
TRAJ_OK = 0
TRAJ_NODE = 1
TRAJ_ESCAPED = 2


def smoothstep_ramp(s):
    """C2 ramp 0 -> 1 on s in [0, 1] (quintic smoothstep), clipped outside."""
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def window_profile(xq, half_width=PERES_HALF_WIDTH, ramp=PERES_RAMP):
    """Smooth support window: 1 on the interior, quintic ramp to 0 at ±half_width."""
    return smoothstep_ramp((half_width - np.abs(xq)) / ramp)


def oscillatory_panel_edges(a_abs, b_ref, half_width=PERES_HALF_WIDTH,
                            ramp=PERES_RAMP, budget=PANEL_PHASE,
                            max_width=PANEL_MAX_WIDTH):
    """Panel edges for integrands with quadratic phase a*x^2 + b*x on [-X, X].

    Edges are placed so every panel carries at most ``budget`` of phase for any
    |b| <= b_ref, stays narrower than ``max_width``, and never straddles the
    window-ramp breakpoints.  The layout is symmetric in x, which keeps row
    evaluations exactly even/odd under x -> -x.
    """
    x_max = float(half_width)
    a_abs = abs(float(a_abs))
    b_ref = abs(float(b_ref))

    # Solve |a| x^2 + b_ref x = m*budget for the positive side.
    phase_total = a_abs * x_max * x_max + b_ref * x_max
    m_max = int(phase_total / budget) + 1
    m = np.arange(1, m_max + 1, dtype=np.float64) * budget
    if a_abs > 0.0:
        phase_edges = (np.sqrt(b_ref * b_ref + 4.0 * a_abs * m) - b_ref) / (2.0 * a_abs)
    elif b_ref > 0.0:
        phase_edges = m / b_ref
    else:
        phase_edges = np.empty(0)
    phase_edges = phase_edges[phase_edges < x_max]

    cap_edges = np.arange(max_width, x_max, max_width)
    breakpoints = np.array([x_max - ramp]) if 0.0 < ramp < x_max else np.empty(0)

    pos = np.unique(np.concatenate([phase_edges, cap_edges, breakpoints, [x_max]]))
    pos = pos[pos > 0.0]
    edges = np.concatenate([-pos[::-1], [0.0], pos])
    return edges


def panel_quadrature(edges):
    """Map the fixed Gauss-Legendre rule onto each panel: (nodes, weights)."""
    lo = edges[:-1]
    width = np.diff(edges)
    nodes = lo[:, None] + (GL_NODES[None, :] + 1.0) * (0.5 * width[:, None])
    weights = (0.5 * width[:, None]) * GL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def peres_quadrature_nodes(a, b_ref, half_width=PERES_HALF_WIDTH, ramp=PERES_RAMP):
    """Quadrature nodes/weights for the windowed singular-ansatz integral."""
    edges = oscillatory_panel_edges(abs(a), abs(b_ref), half_width, ramp)
    return panel_quadrature(edges)

"""Closed-form beam families: exact fields, exact trajectories, and the
special functions they need.

Families
--------
ideal_airy
    Non-dispersive self-accelerating profile Ai(x); the intensity pattern
    translates parabolically (x -> x + z^2/4) without changing shape.
finite_airy
    Apodized profile Ai(x) e^{gamma x}; normalizable, gradually loses shape
    invariance.  gamma = 0 degenerates exactly to ideal_airy.
gaussian
    Waist-at-origin Gaussian e^{-x^2/4 sigma0^2} with hyperbolic spreading.
generalized_gaussian
    Gaussian whose complex width parameter is offset so the waist (focus)
    sits at z = z_focus; an imprinted quadratic phase focuses the beam.
peres
    Lens-phase ansatz e^{-i x^2/2 z_f} (1+x^2)^{-1/3} with algebraic tails:
    continuous initial data that free-propagates into an on-axis singularity
    at z = z_f.  No closed-form propagated field exists; evaluation goes
    through an oscillatory quadrature over a fixed smooth window (the border
    truncation also used for the numeric runs).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NodeError, SingularFieldError, ValidationError
from .grid_field import ComplexField1D, Grid1D

FAMILIES = ("ideal_airy", "finite_airy", "gaussian", "generalized_gaussian", "peres")

_FAMILY_CODES = {
    "ideal_airy": kernels.FAMILY_IDEAL_AIRY,
    "finite_airy": kernels.FAMILY_FINITE_AIRY,
    "gaussian": kernels.FAMILY_GAUSSIAN,
    "generalized_gaussian": kernels.FAMILY_GENERALIZED_GAUSSIAN,
}

#: Documented validity window of the complex Airy evaluator.
AIRY_IM_WINDOW = 50.0

#: Half-width of the singular neighbourhood of the peres family at (0, z_f).
SINGULAR_TOL = 1e-6


# ---------------------------------------------------------------------------
# Airy special functions


def airy_real(s):
    """Airy function Ai on the real axis (absolute error < 1e-10 on [-30, 10])."""
    s = np.asarray(s, dtype=np.float64)
    ai, _ = kernels.airy_many(s.astype(np.complex128))
    out = ai.real
    return float(out) if out.ndim == 0 else out


def airy_real_prime(s):
    """Derivative Ai' on the real axis."""
    s = np.asarray(s, dtype=np.float64)
    _, aip = kernels.airy_many(s.astype(np.complex128))
    out = aip.real
    return float(out) if out.ndim == 0 else out


def _check_im_window(y):
    if np.any(np.abs(np.asarray(y).imag) > AIRY_IM_WINDOW):
        raise ValidationError(
            f"airy_complex is validated for |Im y| <= {AIRY_IM_WINDOW}", field="y")


def airy_complex(y):
    """Analytic continuation of Ai (validated for |Im y| <= 50)."""
    y = np.asarray(y, dtype=np.complex128)
    _check_im_window(y)
    ai, _ = kernels.airy_many(y)
    return complex(ai) if ai.ndim == 0 else ai


def airy_complex_prime(y):
    """Analytic continuation of Ai' (validated for |Im y| <= 50)."""
    y = np.asarray(y, dtype=np.complex128)
    _check_im_window(y)
    _, aip = kernels.airy_many(y)
    return complex(aip) if aip.ndim == 0 else aip


def _bisect(fn, lo, hi):
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("no sign change in bracket")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _negative_axis_root(fn, seed, spacing):
    """Bracket-and-bisect a root of fn near a (negative) asymptotic seed."""
    half = 0.25 * spacing
    for _ in range(8):
        lo, hi = seed - half, seed + half
        if fn(lo) * fn(hi) < 0:
            return _bisect(fn, lo, hi)
        half *= 1.6
    raise ValueError(f"failed to bracket root near {seed}")


def airy_zeros(count):
    """First ``count`` zeros of Ai (negative, descending from -2.338...)."""
    zeros = []
    for k in range(1, count + 1):
        t = 3.0 * math.pi * (4 * k - 1) / 8.0
        seed = -(t ** (2.0 / 3.0)) * (1.0 + 5.0 / (48.0 * t * t))
        spacing = math.pi / math.sqrt(abs(seed))
        zeros.append(_negative_axis_root(airy_real, seed, spacing))
    return np.array(zeros)


def airy_maxima(count):
    """First ``count`` stationary points of Ai (lobe centers, negative)."""
    maxima = []
    for k in range(1, count + 1):
        t = 3.0 * math.pi * (4 * k - 3) / 8.0
        seed = -(t ** (2.0 / 3.0)) * (1.0 - 7.0 / (48.0 * t * t))
        spacing = math.pi / math.sqrt(max(abs(seed), 0.5))
        maxima.append(_negative_axis_root(airy_real_prime, seed, spacing))
    return np.array(maxima)


# ---------------------------------------------------------------------------
# Beam specifications


@dataclass(frozen=True)
class BeamSpec:
    """Tagged description of one analytic beam family.

    Only the parameters relevant to the family may be set; the rest must be
    left at None (or zero).  Use the module-level constructors.
    """

    family: str
    gamma: float = None
    sigma0: float = None
    z_focus: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}", field="family")
        relevant = {
            "ideal_airy": (),
            "finite_airy": ("gamma",),
            "gaussian": ("sigma0",),
            "generalized_gaussian": ("sigma0", "z_focus"),
            "peres": ("z_focus",),
        }[self.family]
        for name in ("gamma", "sigma0", "z_focus"):
            val = getattr(self, name)
            if name in relevant:
                continue
            if val not in (None, 0, 0.0):
                raise ValidationError(
                    f"{name} is not a parameter of {self.family}", field=name)
        if self.family == "finite_airy":
            if self.gamma is None or self.gamma < 0:
                raise ValidationError("finite_airy needs gamma >= 0", field="gamma")
        if self.family in ("gaussian", "generalized_gaussian"):
            if self.sigma0 is None or not self.sigma0 > 0:
                raise ValidationError(f"{self.family} needs sigma0 > 0",
                                      field="sigma0")
        if self.family == "generalized_gaussian":
            if self.z_focus is None:
                raise ValidationError("generalized_gaussian needs z_focus",
                                      field="z_focus")
        if self.family == "peres":
            zf = 1.0 if self.z_focus is None else self.z_focus
            if not zf > 0:
                raise ValidationError("peres needs z_focus > 0", field="z_focus")
            object.__setattr__(self, "z_focus", zf)

    @property
    def focus(self):
        """Waist/focus position (0 for families focused at the origin)."""
        if self.family == "generalized_gaussian":
            return self.z_focus
        if self.family == "peres":
            return self.z_focus
        return 0.0


def ideal_airy():
    return BeamSpec("ideal_airy")


def finite_airy(gamma):
    return BeamSpec("finite_airy", gamma=float(gamma))


def gaussian(sigma0):
    return BeamSpec("gaussian", sigma0=float(sigma0))


def generalized_gaussian(sigma0, z_focus):
    return BeamSpec("generalized_gaussian", sigma0=float(sigma0),
                    z_focus=float(z_focus))


def peres(z_focus=1.0):
    return BeamSpec("peres", z_focus=float(z_focus))


@dataclass(frozen=True)
class ComplexWidth:
    """Complex width parameter: modulus = beam width, arg = imprinted phase."""

    value: complex
    modulus: float
    arg: float


# ---------------------------------------------------------------------------
# Width algebra for the (generalized) Gaussian


def width_phase(sigma0, z_f, z) -> ComplexWidth:
    """Complex width sigma0 * (1 + i (z - z_f)/(2 sigma0^2)) and its polar parts."""
    if not sigma0 > 0:
        raise ValidationError("sigma0 must be positive", field="sigma0")
    u = (z - z_f) / (2.0 * sigma0 * sigma0)
    value = sigma0 * (1.0 + 1j * u)
    return ComplexWidth(value, abs(value), math.atan(u))


def sigma_pair(sigma_g0, z_f):
    """The two waist widths producing the same initial width sigma_g0.

    Returns (sigma_plus, sigma_minus), sigma_plus >= sigma_minus; degenerate
    equal pair when sigma_g0^2 == z_f; no solution below that.
    """
    if not z_f > 0:
        raise ValidationError("z_f must be positive", field="z_f")
    s2 = sigma_g0 * sigma_g0
    disc = s2 * s2 - z_f * z_f
    if s2 < z_f:
        raise ValidationError(
            f"no waist solutions: sigma_g0^2 = {s2:.6g} < z_f = {z_f:.6g}",
            field="sigma_g0")
    root = math.sqrt(max(disc, 0.0))
    return (math.sqrt((s2 + root) / 2.0), math.sqrt((s2 - root) / 2.0))


def peres_sigma_g0():
    """Initial Gaussian width whose 10%-of-peak points match the peres profile."""
    return math.sqrt((10.0 * math.sqrt(10.0) - 1.0) / (2.0 * math.log(10.0)))


# ---------------------------------------------------------------------------
# Fields


def _gaussian_field(x, z, sigma0, z_f):
    sig_t = sigma0 * (1.0 + 1j * (z - z_f) / (2.0 * sigma0 * sigma0))
    return np.sqrt(sigma0 / sig_t) * np.exp(-x * x / (4.0 * sigma0 * sig_t))


def _airy_family_field(x, z, gamma):
    y = x - 0.25 * z * z + 1j * gamma * z
    ai, _ = kernels.airy_many(np.asarray(y, dtype=np.complex128))
    envelope = np.exp(1j * (x - z * z / 6.0) * z / 2.0
                      + gamma * (x - 0.5 * z * z)
                      + 0.5j * gamma * gamma * z)
    return envelope * ai


def peres_initial(x, z_f=1.0):
    """The lens-phase ansatz at z = 0."""
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-0.5j * x * x / z_f) / (1.0 + x * x) ** (1.0 / 3.0)


def peres_at(x, z, z_f=1.0, half_width=kernels.PERES_HALF_WIDTH,
             ramp=kernels.PERES_RAMP):
    """Propagated peres field at one point via the windowed quadrature."""
    if z < 0:
        raise ValidationError("peres_at requires z >= 0", field="z")
    if abs(z - z_f) < SINGULAR_TOL and abs(x) < SINGULAR_TOL:
        raise SingularFieldError(
            f"peres field is singular at (x=0, z={z_f}); requested ({x}, {z})")
    if z == 0.0:
        return complex(peres_initial(x, z_f))
    m0, _ = kernels.peres_moments_point(float(x), float(z), float(z_f),
                                        half_width, ramp)
    pref = np.exp(0.5j * x * x / z - 0.25j * np.pi) / math.sqrt(2.0 * math.pi * z)
    return complex(pref * m0)


def peres_row(xs, z, z_f=1.0, half_width=kernels.PERES_HALF_WIDTH,
              ramp=kernels.PERES_RAMP):
    """Propagated peres field and velocity along a uniform x row.

    Returns (psi, v).  The velocity is exact for the windowed field:
    v = x/z - Re(M1/M0)/z with M1 the first moment of the integrand.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if z == 0.0:
        psi = peres_initial(xs, z_f)
        return psi, -xs / z_f
    m0, m1 = kernels.peres_moments_row(xs, float(z), float(z_f), half_width, ramp)
    pref = np.exp(0.5j * xs * xs / z - 0.25j * np.pi) / math.sqrt(2.0 * math.pi * z)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = xs / z - np.real(m1 / m0) / z
    return pref * m0, v


def peres_velocity(x, z, z_f=1.0, half_width=kernels.PERES_HALF_WIDTH,
                   ramp=kernels.PERES_RAMP):
    """Guidance velocity of the peres field at one point."""
    if z == 0.0:
        return -float(x) / z_f
    m0, m1 = kernels.peres_moments_point(float(x), float(z), float(z_f),
                                         half_width, ramp)
    if abs(m0) == 0.0:
        raise NodeError(f"peres velocity undefined at node ({x}, {z})")
    return float(x / z - (m1 / m0).real / z)


def field_at(spec: BeamSpec, x, z):
    """Exact propagated amplitude of the family at (x, z)."""
    if spec.family == "ideal_airy":
        return complex(_airy_family_field(float(x), float(z), 0.0))
    if spec.family == "finite_airy":
        return complex(_airy_family_field(float(x), float(z), spec.gamma))
    if spec.family == "gaussian":
        return complex(_gaussian_field(float(x), float(z), spec.sigma0, 0.0))
    if spec.family == "generalized_gaussian":
        return complex(_gaussian_field(float(x), float(z), spec.sigma0,
                                       spec.z_focus))
    return peres_at(float(x), float(z), spec.z_focus)


def sample_field(spec: BeamSpec, grid: Grid1D, z) -> ComplexField1D:
    """Family field sampled on a grid (vectorized row evaluation)."""
    z = float(z)
    if spec.family == "ideal_airy":
        values = _airy_family_field(grid.x, z, 0.0)
    elif spec.family == "finite_airy":
        values = _airy_family_field(grid.x, z, spec.gamma)
    elif spec.family == "gaussian":
        values = _gaussian_field(grid.x, z, spec.sigma0, 0.0)
    elif spec.family == "generalized_gaussian":
        values = _gaussian_field(grid.x, z, spec.sigma0, spec.z_focus)
    else:
        singular = (abs(z - spec.z_focus) < SINGULAR_TOL
                    and np.any(np.abs(grid.x) < SINGULAR_TOL))
        values, _ = peres_row(grid.x, z, spec.z_focus)
        return ComplexField1D(grid, values, z, singular=singular)
    return ComplexField1D(grid, values, z)


# ---------------------------------------------------------------------------
# Exact velocities and trajectories

_CLOSED_FORM_TRAJECTORIES = ("ideal_airy", "gaussian", "generalized_gaussian")


def velocity_exact(spec: BeamSpec, x, z):
    """Exact guidance velocity of the family at (x, z)."""
    x = float(x)
    z = float(z)
    if spec.family == "ideal_airy":
        return 0.5 * z
    if spec.family == "finite_airy":
        y = complex(x - 0.25 * z * z, spec.gamma * z)
        ai, aip = kernels.airy_many(np.array([y]))
        ai = complex(ai[0])
        aip = complex(aip[0])
        if abs(ai) <= 1e-12 * abs(aip):
            raise NodeError(f"velocity undefined near Airy zero, y = {y}")
        return 0.5 * z + (aip / ai).imag
    if spec.family in ("gaussian", "generalized_gaussian"):
        z_f = spec.focus
        s0 = spec.sigma0
        sg2 = s0 * s0 + (0.5 * (z - z_f) / s0) ** 2
        return x * (z - z_f) / (4.0 * s0 * s0 * sg2)
    raise ValidationError(
        "peres has no closed-form velocity; use peres_velocity or the "
        "numeric integrator", field="family")


def trajectory_exact(spec: BeamSpec, x0, z):
    """Exact trajectory position x(z) for families with a closed form."""
    if spec.family not in _CLOSED_FORM_TRAJECTORIES:
        raise ValidationError(
            f"{spec.family} has no closed-form trajectories; use the numeric "
            "integrator", field="family")
    x0 = np.asarray(x0, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if spec.family == "ideal_airy":
        out = x0 + 0.25 * z * z
    else:
        z_f = spec.focus
        s0 = spec.sigma0
        ratio = np.sqrt(s0 * s0 + (0.5 * (z - z_f) / s0) ** 2) \
            / math.sqrt(s0 * s0 + (0.5 * z_f / s0) ** 2)
        out = x0 * ratio
    return float(out) if out.ndim == 0 else out

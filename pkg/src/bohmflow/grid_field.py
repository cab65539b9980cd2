"""Spatial/spectral field representations and field-level observables.

Everything internal works in the dimensionless frame (propagation variable z,
transverse coordinate x, unit "mass" and "Planck constant"); ``UnitsMap``
converts to and from laboratory pictures only at the edges.

Conventions
-----------
Grids are uniform with n even samples ``x_m = x_min + m*dx``, ``dx =
(x_max - x_min)/n`` (periodic: x_max itself is not a sample).  Spectral
decompositions use synthesis coefficients::

    psi(x) = sum_j c_j exp(i k_j x),   k_j = 2*pi*j/(n*dx),  j = -n/2 .. n/2-1

so a constant field has the single coefficient c_0 = 1 and Parseval reads
``sum |c_j|^2 == sum |psi_m|^2 / n``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NodeError, SingularFieldError, ValidationError

#: Relative magnitude below which a sample counts as a node (phase and
#: velocity undefined there).
NODE_EPSILON = 1e-12


def _lock(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid1D:
    """Uniform sampling of the transverse coordinate."""

    x_min: float
    x_max: float
    n: int
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 8:
            raise ValidationError(f"n must be >= 8, got {self.n}", field="n")
        if self.n % 2 != 0:
            raise ValidationError(f"n must be even, got {self.n}", field="n")
        if not self.x_max > self.x_min:
            raise ValidationError(
                f"x_max must exceed x_min, got ({self.x_min}, {self.x_max})",
                field="x_max",
            )
        object.__setattr__(
            self, "x",
            _lock(self.x_min + self.dx * np.arange(self.n, dtype=np.float64)),
        )

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n

    def wavenumbers(self):
        """Centered DFT wavenumbers, ascending (j = -n/2 .. n/2-1)."""
        return np.fft.fftshift(np.fft.fftfreq(self.n, d=self.dx)) * 2.0 * np.pi


def make_grid(x_min, x_max, n):
    """Validated Grid1D constructor."""
    return Grid1D(float(x_min), float(x_max), int(n))


@dataclass(frozen=True)
class ComplexField1D:
    """A wavefield snapshot psi(x_m) at propagation coordinate z.

    Immutable after construction; the ``singular`` flag marks fields produced
    intentionally at (or next to) a solution singularity, which are excluded
    from spectral operations and norms.
    """

    grid: Grid1D
    values: np.ndarray
    z: float
    singular: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.n,):
            raise ValidationError(
                f"values length {vals.shape} does not match grid n={self.grid.n}",
                field="values",
            )
        if not self.singular and not np.all(np.isfinite(vals.view(np.float64))):
            raise ValidationError("non-finite amplitudes in field", field="values")
        object.__setattr__(self, "values", _lock(vals))

    def node_mask(self):
        """True where |psi| is above the node threshold."""
        mag = np.abs(self.values)
        return mag > NODE_EPSILON * mag.max()


@dataclass(frozen=True)
class SpectralField:
    """Synthesis coefficients c_j on centered wavenumbers k_j, taken at z0.

    Carries the originating grid so the spectral/spatial round trip is exact.
    """

    wavenumbers: np.ndarray
    coeffs: np.ndarray
    z0: float
    grid: Grid1D

    def __post_init__(self):
        k = np.asarray(self.wavenumbers, dtype=np.float64)
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if k.shape != c.shape:
            raise ValidationError("coeffs and wavenumbers length mismatch",
                                  field="coeffs")
        object.__setattr__(self, "wavenumbers", _lock(k))
        object.__setattr__(self, "coeffs", _lock(c))


def _require_regular(fieldv, op):
    if fieldv.singular:
        raise SingularFieldError(f"{op} is undefined on a singular field")


def to_spectral(fieldv: ComplexField1D) -> SpectralField:
    """Decompose a snapshot into plane-wave synthesis coefficients."""
    _require_regular(fieldv, "to_spectral")
    g = fieldv.grid
    k = g.wavenumbers()
    raw = np.fft.fftshift(np.fft.fft(fieldv.values)) / g.n
    coeffs = raw * np.exp(-1j * k * g.x_min)
    return SpectralField(k, coeffs, fieldv.z, g)


def from_spectral(spec: SpectralField) -> ComplexField1D:
    """Inverse of :func:`to_spectral` (synthesis back onto the grid)."""
    g = spec.grid
    raw = spec.coeffs * np.exp(1j * spec.wavenumbers * g.x_min)
    values = np.fft.ifft(np.fft.ifftshift(raw)) * g.n
    return ComplexField1D(g, values, spec.z0)


def norm(fieldv: ComplexField1D) -> float:
    """Riemann-sum L2 norm squared: sum |psi|^2 dx."""
    _require_regular(fieldv, "norm")
    v = fieldv.values
    return float(np.sum(v.real**2 + v.imag**2) * fieldv.grid.dx)


def density(fieldv: ComplexField1D) -> np.ndarray:
    """Pointwise |psi|^2."""
    _require_regular(fieldv, "density")
    v = fieldv.values
    return v.real**2 + v.imag**2


def phase(fieldv: ComplexField1D) -> np.ndarray:
    """Unwrapped phase, left to right; NaN on node-adjacent samples.

    Unwrapping runs independently on each node-free run of samples (bridging
    a node would silently guess a branch), so adjacent defined samples always
    differ by less than pi.
    """
    _require_regular(fieldv, "phase")
    ok = fieldv.node_mask()
    if not ok.any():
        raise NodeError("field is zero everywhere; phase undefined")
    raw = np.angle(fieldv.values)
    out = np.full(fieldv.grid.n, np.nan)
    # contiguous runs of defined samples
    idx = np.flatnonzero(ok)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [idx.size - 1]])
    for s, e in zip(starts, ends):
        run = idx[s:e + 1]
        out[run] = np.unwrap(raw[run])
    return out


@dataclass(frozen=True)
class UnitsMap:
    """Linear map between the laboratory propagation variable and z.

    In the quantum picture the propagation variable is time and
    z = (hbar * k_carrier / mass) * t; the optical picture uses the same map
    with k_carrier the carrier wavenumber (k = refractive_index / lambda0
    when not given directly).  Canonical defaults: quantum hbar = mass = 1,
    optical k_carrier = 1.
    """

    regime: str = "quantum"
    hbar: float = 1.0
    mass: float = 1.0
    k_carrier: float = None
    refractive_index: float = None
    lambda0: float = None

    def __post_init__(self):
        if self.regime not in ("quantum", "optical"):
            raise ValidationError(f"unknown regime {self.regime!r}", field="regime")
        if self.k_carrier is None:
            if self.refractive_index is not None and self.lambda0 is not None:
                object.__setattr__(self, "k_carrier",
                                   self.refractive_index / self.lambda0)
            else:
                object.__setattr__(self, "k_carrier", 1.0)
        for name in ("hbar", "mass", "k_carrier"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive", field=name)


def z_of_t(units: UnitsMap, t: float) -> float:
    """Propagation coordinate for laboratory time t."""
    return units.hbar * units.k_carrier / units.mass * t


def t_of_z(units: UnitsMap, z: float) -> float:
    """Inverse of :func:`z_of_t`."""
    return z * units.mass / (units.hbar * units.k_carrier)

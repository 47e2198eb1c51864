"""Uniform complex-plane grids and the calculus used everywhere else.

A field is a complex-valued sample array on a square node lattice. The module
provides the Wirtinger derivatives (4th-order finite differences), divergence
and curl in the complex convention, polynomially weighted moments with a
boundary-ring truncation diagnostic, annulus sup probes for decay estimates,
the radial cutoff used by the far-field machinery, and a binary snapshot
format. Everything here is deterministic: reductions use a fixed pairwise
tree so reruns are bit-identical.
"""

from __future__ import annotations

# Standard library
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING, Sequence

# Third-party
import numpy as np
from numpy.typing import NDArray

if TYPE_CHECKING:
    from .asymptotics import AsymptoticPart

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

__all__ = [
    "FieldRole",
    "Grid",
    "ComplexField",
    "MomentResult",
    "WeightedSupReport",
    "smoothstep",
    "cutoff_chi",
    "cutoff_chi_prime",
    "cutoff_chi_second",
    "cutoff_chi_scaled",
    "pairwise_fold",
    "wirtinger_dz",
    "wirtinger_dzbar",
    "divergence",
    "curl",
    "moment",
    "weighted_sup_probe",
    "write_field",
    "read_field",
]

_MAGIC = b"ASPD1"

# Boundary ring vs result ratio above which a moment is flagged as truncated.
_TAIL_FLAG_RATIO = 1e-8


class FieldRole(IntEnum):
    """What a field's samples represent. Serialized as a single byte."""

    GENERIC = 0
    VELOCITY = 1
    VORTICITY = 2
    PRESSURE = 3


# --------------------------------------------------------------------------
# Grid and field containers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Square node lattice on [-L, L]^2 with n nodes per side.

    Node coordinates are x_i = -L + i*h with h = 2L/(n-1); both endpoints
    are included. Sample arrays are indexed [ix, iy].
    """

    L: float  # half-width of the box
    n: int    # nodes per side, >= 16

    def __post_init__(self) -> None:
        if not np.isfinite(self.L) or self.L <= 0:
            raise ValueError("Grid half-width L must be positive and finite.")
        if int(self.n) != self.n or self.n < 16:
            raise ValueError("Grid resolution n must be an integer >= 16.")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    def axis(self) -> FloatArray:
        return np.linspace(-self.L, self.L, self.n)

    def nodes(self) -> ComplexArray:
        """Complex node coordinates, shape (n, n), [ix, iy]."""
        x, y = np.meshgrid(self.axis(), self.axis(), indexing="ij")
        return x + 1j * y

    def radii(self) -> FloatArray:
        return np.abs(self.nodes())

    def quad_weights(self) -> FloatArray:
        """Tensor-product trapezoid weights, shape (n, n)."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return np.outer(w, w)


def _as_samples(values: object, n: int) -> ComplexArray:
    a = np.asarray(values, dtype=np.complex128)
    if a.shape != (n, n):
        raise ValueError(f"samples must have shape ({n}, {n}), got {a.shape}.")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("samples contain non-finite values.")
    return a


@dataclass
class ComplexField:
    """Complex samples on a grid plus bookkeeping about what they mean."""

    grid: Grid
    samples: ComplexArray                   # shape (n, n), indexed [ix, iy]
    role: FieldRole = FieldRole.GENERIC
    divergence_free: bool = False           # if set, validated on creation
    div_tol: float = 1e-6
    tail: "AsymptoticPart | None" = None    # known far-field part, if any

    def __post_init__(self) -> None:
        self.samples = _as_samples(self.samples, self.grid.n)
        self.role = FieldRole(self.role)
        if self.divergence_free:
            worst = float(np.max(np.abs(divergence(self))))
            if worst > self.div_tol:
                raise ValueError(
                    f"field tagged divergence-free but max |div| = {worst:.3e} "
                    f"exceeds tolerance {self.div_tol:.3e}."
                )

    def with_samples(self, samples: ComplexArray, role: FieldRole | None = None) -> "ComplexField":
        return ComplexField(self.grid, samples, self.role if role is None else role)


# --------------------------------------------------------------------------
# Radial cutoff
# --------------------------------------------------------------------------


def smoothstep(t: FloatArray | float) -> FloatArray | float:
    """Quintic smoothstep on [0, 1]: 6t^5 - 15t^4 + 10t^3, clamped outside."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def cutoff_chi(r: FloatArray | float) -> FloatArray | float:
    """Radial cutoff: 0 for r <= 1, 1 for r >= 2, quintic blend between."""
    return smoothstep(np.asarray(r, dtype=np.float64) - 1.0)


def cutoff_chi_prime(r: FloatArray | float) -> FloatArray | float:
    """d/dr of cutoff_chi. Supported on 1 < r < 2."""
    r = np.asarray(r, dtype=np.float64)
    t = np.clip(r - 1.0, 0.0, 1.0)
    s = t * (1.0 - t)
    return 30.0 * s * s


def cutoff_chi_second(r: FloatArray | float) -> FloatArray | float:
    """d^2/dr^2 of cutoff_chi. Supported on 1 < r < 2."""
    r = np.asarray(r, dtype=np.float64)
    t = np.clip(r - 1.0, 0.0, 1.0)
    return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)


def cutoff_chi_scaled(r: FloatArray | float, R: float) -> FloatArray | float:
    """cutoff_chi(r / R): 0 inside radius R, 1 beyond 2R."""
    if R <= 0:
        raise ValueError("cutoff scale R must be positive.")
    return cutoff_chi(np.asarray(r, dtype=np.float64) / R)


# --------------------------------------------------------------------------
# Deterministic reduction
# --------------------------------------------------------------------------


def pairwise_fold(values: NDArray, axis: int = -1) -> NDArray:
    """Sum along an axis with a fixed power-of-two pairwise tree.

    The input is zero-padded to the next power of two and halves are added
    until one slot remains. The tree shape depends only on the axis length,
    so the result is bit-reproducible and independent of chunking or thread
    count. All deterministic summations in the package route through this.
    """
    a = np.moveaxis(np.asarray(values), axis, -1)
    m = a.shape[-1]
    if m == 0:
        return np.zeros(a.shape[:-1], dtype=a.dtype)
    p = 1
    while p < m:
        p *= 2
    if p != m:
        pad = np.zeros(a.shape[:-1] + (p - m,), dtype=a.dtype)
        a = np.concatenate([a, pad], axis=-1)
    while a.shape[-1] > 1:
        half = a.shape[-1] // 2
        a = a[..., :half] + a[..., half:]
    return a[..., 0]


# --------------------------------------------------------------------------
# Finite differences
# --------------------------------------------------------------------------

# 5-point stencils, exact for polynomials of degree <= 4. One-sided rows are
# used on the two node layers nearest each boundary.
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def _d_axis0(a: ComplexArray, h: float) -> ComplexArray:
    """d/dx along axis 0, 4th order centered, one-sided at the edges."""
    out = np.empty_like(a)
    out[2:-2] = (a[:-4] - 8.0 * a[1:-3] + 8.0 * a[3:-1] - a[4:]) / (12.0 * h)
    head = a[:5]
    out[0] = np.tensordot(_EDGE0, head, axes=(0, 0)) / h
    out[1] = np.tensordot(_EDGE1, head, axes=(0, 0)) / h
    tail = a[-5:][::-1]
    out[-1] = -np.tensordot(_EDGE0, tail, axes=(0, 0)) / h
    out[-2] = -np.tensordot(_EDGE1, tail, axes=(0, 0)) / h
    return out


def wirtinger_dz(f: ComplexField) -> ComplexField:
    """Apply d/dz = (d/dx - i d/dy)/2 by finite differences.

    Parameters
    ----------
    f : ComplexField
        Field to differentiate.

    Returns
    -------
    ComplexField
        Derivative samples with role GENERIC. Interior nodes use the
        4th-order centered stencil; the two layers nearest each boundary use
        one-sided stencils of the same order, so the operator is exact for
        polynomials in (x, y) of degree <= 4.
    """
    h = f.grid.h
    dx = _d_axis0(f.samples, h)
    dy = _d_axis0(f.samples.T, h).T
    return ComplexField(f.grid, 0.5 * (dx - 1j * dy))


def wirtinger_dzbar(f: ComplexField) -> ComplexField:
    """Apply d/dzbar = (d/dx + i d/dy)/2 by finite differences."""
    h = f.grid.h
    dx = _d_axis0(f.samples, h)
    dy = _d_axis0(f.samples.T, h).T
    return ComplexField(f.grid, 0.5 * (dx + 1j * dy))


def divergence(u: ComplexField) -> FloatArray:
    """Divergence of the velocity field u: 2 Re(du/dz)."""
    return 2.0 * wirtinger_dz(u).samples.real


def curl(u: ComplexField) -> FloatArray:
    """Scalar curl (half the classical one): (u_z - conj(u)_zbar) / 2i.

    The conjugation identity makes the bracket equal 2i Im(u_z) exactly, so
    the returned array is Im(du/dz). For divergence-free u the complex
    vorticity is i times this field, which is also du/dz itself.
    """
    return wirtinger_dz(u).samples.imag


# --------------------------------------------------------------------------
# Moments and decay probes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentResult:
    """Value of a weighted moment plus its truncation diagnostic."""

    value: complex
    boundary_ring_max: float  # max |integrand| over the outermost node ring
    tail_ok: bool             # False when the ring is large next to the value

    def __complex__(self) -> complex:
        return self.value


def moment(f: ComplexField, k: int, l: int) -> MomentResult:
    """Trapezoid quadrature of f(z) * z^k * zbar^l over the grid box.

    Parameters
    ----------
    f : ComplexField
        Integrand samples.
    k, l : int
        Nonnegative polynomial weights z^k and zbar^l.

    Returns
    -------
    MomentResult
        The complex value together with the largest integrand magnitude on
        the outermost node ring. ``tail_ok`` is False when that ring exceeds
        1e-8 times the result magnitude, which signals that the integrand
        has not decayed inside the box and the value is suspect.
    """
    if k < 0 or l < 0:
        raise ValueError("moment powers k, l must be nonnegative.")
    z = f.grid.nodes()
    integrand = f.samples * z**k * np.conj(z) ** l
    value = complex(pairwise_fold((integrand * f.grid.quad_weights()).ravel()))
    ring = np.concatenate(
        [
            np.abs(integrand[0, :]),
            np.abs(integrand[-1, :]),
            np.abs(integrand[1:-1, 0]),
            np.abs(integrand[1:-1, -1]),
        ]
    )
    boundary = float(ring.max())
    return MomentResult(value, boundary, boundary <= _TAIL_FLAG_RATIO * abs(value))


@dataclass(frozen=True)
class WeightedSupReport:
    """Per-annulus weighted sups of a field and a decay-slope estimate."""

    delta: float
    radii: tuple[float, ...]          # annulus edges, strictly increasing
    weighted_sup: tuple[float, ...]   # sup of <z>^delta |f| per annulus
    raw_sup: tuple[float, ...]        # sup of |f| per annulus
    slope: float                      # log-log fit of raw_sup vs mid-radius


def weighted_sup_probe(f: ComplexField, delta: float, radii: Sequence[float]) -> WeightedSupReport:
    """Measure <z>^delta |f| sups on the annuli between consecutive radii.

    The slope field estimates the decay exponent of |f| itself (a least
    squares fit of log raw sup against log geometric mid-radius), so a field
    behaving like r^-q reports slope ~ -q regardless of delta.
    """
    edges = tuple(float(r) for r in radii)
    if len(edges) < 2:
        raise ValueError("need at least two radii to form an annulus.")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError("annulus radii must be strictly increasing.")
    if edges[0] < 2.0:
        raise ValueError("annulus radii must start at 2 or beyond.")
    if edges[-1] > f.grid.L * np.sqrt(2.0):
        raise ValueError("annulus radii exceed the grid extent.")
    r = f.grid.radii()
    mag = np.abs(f.samples)
    bracket = np.sqrt(1.0 + r * r) ** delta
    weighted, raw, mids = [], [], []
    for a, b in zip(edges, edges[1:]):
        mask = (r >= a) & (r < b)
        if not mask.any():
            raise ValueError(f"annulus [{a}, {b}) contains no grid nodes.")
        weighted.append(float(np.max(bracket[mask] * mag[mask])))
        raw.append(float(np.max(mag[mask])))
        mids.append(np.sqrt(a * b))
    logs = np.log(np.maximum(raw, 1e-300))
    slope = float(np.polyfit(np.log(mids), logs, 1)[0]) if len(mids) >= 2 else 0.0
    return WeightedSupReport(delta, edges, tuple(weighted), tuple(raw), slope)


# --------------------------------------------------------------------------
# Snapshot I/O
# --------------------------------------------------------------------------


def write_field(f: ComplexField, path: str) -> None:
    """Write a field snapshot: magic 'ASPD1', L (f64), n (u32), role (u8),
    then the samples row-major as interleaved (re, im) float64, all
    little-endian."""
    header = _MAGIC + struct.pack("<dIB", float(f.grid.L), f.grid.n, int(f.role))
    data = np.ascontiguousarray(f.samples, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def read_field(path: str) -> ComplexField:
    """Read a snapshot written by write_field."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head = len(_MAGIC) + struct.calcsize("<dIB")
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path} is not a field snapshot (bad magic).")
    L, n, role = struct.unpack("<dIB", blob[len(_MAGIC) : head])
    expected = 16 * n * n
    payload = blob[head:]
    if len(payload) != expected:
        raise ValueError(f"{path} is truncated: {len(payload)} payload bytes, expected {expected}.")
    samples = np.frombuffer(payload, dtype="<c16").reshape(n, n).astype(np.complex128)
    return ComplexField(Grid(L, n), samples, FieldRole(role))

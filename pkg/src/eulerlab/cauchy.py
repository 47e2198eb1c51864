"""Cauchy-kernel machinery: inversion of d/dz with far-field extraction.

The fundamental solution of d/dz is 1/(pi zbar). This module evaluates that
kernel (optionally blob-regularized), expands it in inverse powers of zbar
with source moments as coefficients, inverts d/dz and d/dzbar on compactly
supported fields by direct quadrature plus tail extraction, forms the
quadratic nonlinearity Q(u) = (u_z)^2 + u_zbar * conj(u)_z, computes its two
vanishing pairings with an exact closed-form completion outside the grid box,
and recovers the pressure from Q by a free-space FFT Poisson solve coupled to
an analytic far-field model.

Determinism: every quadrature reduction routes through the fixed pairwise
tree (or its compiled twin, which replays the identical operation order), so
repeated runs are bit-identical.
"""

from __future__ import annotations

# Standard library
from dataclasses import dataclass
from typing import Sequence

# Third-party
import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.special import j0, j1

from . import _kernels
from .asymptotics import AsymptoticPart, eval_tail
from .complexgrid import (
    ComplexField,
    FieldRole,
    cutoff_chi,
    cutoff_chi_prime,
    cutoff_chi_scaled,
    cutoff_chi_second,
    moment,
    pairwise_fold,
    wirtinger_dz,
    wirtinger_dzbar,
)

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

__all__ = [
    "DomainTooSmallError",
    "MomentVector",
    "QPairings",
    "PressureField",
    "kernel",
    "psi_smoothed",
    "farfield_eval",
    "kernel_split_check",
    "moment_vector",
    "source_radius",
    "dz_inverse",
    "dzbar_inverse",
    "q_nonlinearity",
    "q_pairings",
    "pressure",
]

# support threshold for "numerically compactly supported"
_SUPPORT_EPS = 1e-14


class DomainTooSmallError(RuntimeError):
    """Raised when a field has not decayed inside the grid box well enough
    for the requested far-field extraction to be trusted."""


# ---------------------------------------------------------------------------
# Kernel and far-field expansion
# ---------------------------------------------------------------------------


def kernel(z: complex | ComplexArray, w: complex | ComplexArray, delta_blob: float = 0.0) -> complex | ComplexArray:
    """Cauchy kernel (z-w) / (pi (|z-w|^2 + delta_blob^2)).

    At delta_blob = 0 this is exactly 1/(pi conj(z-w)); the blob variant is
    the standard desingularization used for particle self-interaction.

    Raises
    ------
    ZeroDivisionError
        If delta_blob = 0 and some z equals some w.
    """
    if delta_blob < 0:
        raise ValueError("delta_blob must be nonnegative.")
    d = np.asarray(z, dtype=np.complex128) - np.asarray(w, dtype=np.complex128)
    r2 = d.real**2 + d.imag**2 + delta_blob**2
    if np.any(r2 == 0.0):
        raise ZeroDivisionError("kernel evaluated at coincident points with zero blob width.")
    out = d / (np.pi * r2)
    if np.isscalar(z) and np.isscalar(w):
        return complex(out)
    return out


def psi_smoothed(z: complex | ComplexArray) -> complex | ComplexArray:
    """Globally bounded stand-in for 1/zbar used by the kernel splitting.

    Equals z/D with D = max(|z|^2, quintic blend from 4 down to |z|^2), so
    psi = z/|z|^2 = 1/zbar exactly for |z| >= 2 and |psi| <= 1 everywhere.
    """
    zz = np.asarray(z, dtype=np.complex128)
    r = np.abs(zz)
    chi = np.asarray(cutoff_chi(r), dtype=np.float64)
    floor = 4.0 * (1.0 - chi) + r * r * chi
    d = np.maximum(r * r, floor)
    out = zz / d
    if np.isscalar(z):
        return complex(out)
    return out


@dataclass(frozen=True)
class MomentVector:
    """Source moments (f, zbar^{k-1}) for k = 1..l+1 plus the support radius."""

    values: tuple[complex, ...]
    rho_src: float

    def __post_init__(self) -> None:
        if len(self.values) < 1:
            raise ValueError("moment vector needs at least one entry.")
        if not (self.rho_src > 0):
            raise ValueError("source radius must be positive.")

    @property
    def order(self) -> int:
        return len(self.values) - 1


def source_radius(f: ComplexField, eps: float = _SUPPORT_EPS) -> float:
    """Largest node radius where |f| exceeds eps (0.0 for an empty field)."""
    mask = np.abs(f.samples) > eps
    if not mask.any():
        return 0.0
    return float(np.max(f.grid.radii()[mask]))


def moment_vector(f: ComplexField, l: int) -> MomentVector:
    """Moments (f, zbar^0) .. (f, zbar^l) of a compactly supported field."""
    if l < 0:
        raise ValueError("moment order l must be nonnegative.")
    rho = source_radius(f)
    vals = tuple(moment(f, 0, k).value for k in range(l + 1))
    return MomentVector(vals, max(rho, f.grid.h))


def farfield_eval(m: MomentVector, z: complex | ComplexArray) -> complex | ComplexArray:
    """(1/pi) sum_{k=1}^{l+1} m_k / zbar^k, valid in the |z| >= 2 regime."""
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(np.abs(zz) < 2.0):
        raise ValueError("farfield_eval requires |z| >= 2.")
    izb = 1.0 / np.conj(zz)
    acc = np.zeros_like(zz)
    for mk in m.values[::-1]:
        acc = (acc + mk) * izb
    out = acc / np.pi
    if np.isscalar(z):
        return complex(out[0])
    return out.reshape(np.shape(z))


def kernel_split_check(
    z: complex | ComplexArray, w: complex | ComplexArray, l: int
) -> tuple[FloatArray, FloatArray]:
    """Remainder of the order-l kernel expansion and its predicted shape.

    lhs = |K(z-w) - (1/pi) sum_{k=0}^{l} wbar^k psi^{k+1}|, where psi is the
    smoothed 1/zbar; rhs_shape = <w>^{l+1} / (|z-w| <z>^{l+1}). The caller
    estimates the splitting constant C(l) as a sup of lhs/rhs_shape.
    """
    if l < 0:
        raise ValueError("expansion order l must be nonnegative.")
    zz = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    ww = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    zz, ww = np.broadcast_arrays(zz, ww)
    full = np.asarray(kernel(zz, ww))
    psi = np.asarray(psi_smoothed(zz))
    wb = np.conj(ww)
    acc = np.zeros_like(zz)
    term = psi.copy()
    for k in range(l + 1):
        acc = acc + term
        term = term * wb * psi
    lhs = np.abs(full - acc / np.pi)
    zb = np.sqrt(1.0 + np.abs(zz) ** 2)
    wbk = np.sqrt(1.0 + np.abs(ww) ** 2)
    rhs = wbk ** (l + 1) / (np.abs(zz - ww) * zb ** (l + 1))
    return lhs, rhs


# ---------------------------------------------------------------------------
# Inverse operators
# ---------------------------------------------------------------------------


def _cauchy_sum_rows(nodes: ComplexArray, fw: ComplexArray, rmin: float) -> ComplexArray:
    """Quadrature sum of kernel(z, w) * fw(w) at every node, skipping pairs
    closer than rmin (the punctured singular cell). Compiled twin when
    available; both paths share the identical reduction tree."""
    n = nodes.shape[0]
    src = nodes.ravel()
    out = np.empty((n, n), dtype=np.complex128)
    if _kernels.HAVE_NUMBA:
        out_re = np.empty(n * n, dtype=np.float64)
        out_im = np.empty(n * n, dtype=np.float64)
        _kernels.cauchy_rows(
            src.real.copy(), src.imag.copy(),
            src.real.copy(), src.imag.copy(),
            fw.real.copy(), fw.imag.copy(),
            rmin * rmin, out_re, out_im,
        )
        return (out_re + 1j * out_im).reshape(n, n)
    # split real/imaginary arithmetic: numpy's fused complex multiply may
    # contract with FMA, the compiled twin never does, so the reference path
    # spells out the same scalar operations the twin performs
    inv_pi = 1.0 / np.pi
    rmin2 = rmin * rmin
    fwre = fw.real[None, :]
    fwim = fw.imag[None, :]
    for i in range(n):
        d = nodes[i, :].reshape(-1, 1) - src[None, :]
        dx = d.real
        dy = d.imag
        r2 = dx * dx + dy * dy
        keep = r2 >= rmin2
        s = np.where(keep, inv_pi / np.where(keep, r2, 1.0), 0.0)
        kre = dx * s
        kim = dy * s
        vals = np.empty(d.shape, dtype=np.complex128)
        vals.real = np.where(keep, kre * fwre - kim * fwim, 0.0)
        vals.imag = np.where(keep, kre * fwim + kim * fwre, 0.0)
        out[i, :] = pairwise_fold(vals, axis=1)
    return out


def dz_inverse(f: ComplexField, n_tail: int, r0_tail: float = 1.0) -> tuple[AsymptoticPart, ComplexField]:
    """Invert d/dz on a compactly supported field, splitting off the tail.

    The full solution u(z) = quadrature of kernel(z, w) f(w) over the grid
    (trapezoid weights; the singular cell is punctured, an O(h^2) rule). The
    tail coefficient at (0, k) is (1/pi) * moment(f, 0, k-1) for k = 1 ..
    n_tail, computed from the original samples with the same weights as the
    kernel quadrature, so in the remainder u - tail the leading far-field
    terms cancel exactly rather than to quadrature accuracy.

    Parameters
    ----------
    f : ComplexField
        Source; |f| > 1e-14 must hold only at radii < L/2.
    n_tail : int >= 0
        Number of inverse-zbar tail terms to extract.
    r0_tail : float
        Cutoff scale stored on the returned tail.

    Returns
    -------
    (tail, remainder)
        tail is an order-n_tail triangle with only (0, k) entries; remainder
        is u minus the evaluated tail, on f's grid.

    Raises
    ------
    ValueError
        If the support reaches past L/2.
    DomainTooSmallError
        If the moment quadrature flags a boundary ring that is large next to
        the extracted moments.
    """
    if n_tail < 0:
        raise ValueError("n_tail must be nonnegative.")
    g = f.grid
    rho = source_radius(f)
    if rho >= g.L / 2:
        raise ValueError(
            f"source support reaches radius {rho:.3g}, not inside L/2 = {g.L / 2:.3g}."
        )
    nodes = g.nodes()
    fw = (f.samples * g.quad_weights()).ravel()
    u = _cauchy_sum_rows(nodes, fw, 0.5 * g.h)

    entries: dict[tuple[int, int], complex] = {}
    ring_worst = 0.0
    scale = 0.0
    for k in range(1, n_tail + 1):
        mk = moment(f, 0, k - 1)
        entries[(0, k)] = mk.value / np.pi
        ring_worst = max(ring_worst, mk.boundary_ring_max)
        scale = max(scale, abs(mk.value))
    tail = AsymptoticPart.from_entries(max(n_tail, 0), entries, r0_tail) if n_tail else AsymptoticPart.zero(0, r0_tail)
    if n_tail and ring_worst > 1e-8 * max(scale, 1e-300):
        raise DomainTooSmallError(
            f"tail moments untrustworthy: boundary ring {ring_worst:.3e} vs "
            f"largest moment {scale:.3e}; enlarge the box."
        )
    rem = u - np.asarray(eval_tail(tail, nodes))
    return tail, ComplexField(g, rem, FieldRole.GENERIC)


def dzbar_inverse(f: ComplexField, n_tail: int, r0_tail: float = 1.0) -> tuple[AsymptoticPart, ComplexField]:
    """Invert d/dzbar: conjugate, invert d/dz, conjugate back.

    The tail triangle transposes (0, k) -> (k, 0) under the final
    conjugation, since conj maps zbar^{-k} tails to z^{-k} tails.
    """
    tail_c, rem_c = dz_inverse(f.with_samples(np.conj(f.samples)), n_tail, r0_tail)
    tail = tail_c.conj_transpose()
    return tail, f.with_samples(np.conj(rem_c.samples), FieldRole.GENERIC)


# ---------------------------------------------------------------------------
# The quadratic nonlinearity and its vanishing pairings
# ---------------------------------------------------------------------------


def q_nonlinearity(u: ComplexField) -> ComplexField:
    """Q(u) = (u_z)^2 + (u_zbar)(conj(u)_z).

    For divergence-free u the second factor pair is |u_zbar|^2 and Q is real
    and pointwise equal to (u_z)^2 + |u_zbar|^2; that identity is asserted
    when u carries the divergence-free tag.
    """
    if u.role != FieldRole.VELOCITY:
        raise ValueError(f"q_nonlinearity expects a velocity field, got role {u.role.name}.")
    uz = wirtinger_dz(u).samples
    uzb = wirtinger_dzbar(u).samples
    ubar_z = wirtinger_dz(u.with_samples(np.conj(u.samples))).samples
    q = uz * uz + uzb * ubar_z
    if u.divergence_free:
        alt = uz * uz + np.abs(uzb) ** 2
        worst = float(np.max(np.abs(q - alt)))
        if worst > 1e-8:
            raise AssertionError(f"divergence-free Q identity violated: {worst:.3e}")
    return ComplexField(u.grid, q, FieldRole.GENERIC)


def _tail_prime_sq(tail: AsymptoticPart | None, z: ComplexArray, r_model: float) -> ComplexArray:
    """|d/dzbar of the tail|^2 times the scaled cutoff, on given points."""
    out = np.zeros(z.shape, dtype=np.complex128)
    if tail is None:
        return out
    coef = [(k, tail.coefficient(0, k)) for k in range(1, tail.N + 1) if tail.coefficient(0, k) != 0]
    if not coef:
        return out
    r = np.abs(z)
    m = r > r_model
    zm = z[m]
    izb = 1.0 / np.conj(zm)
    acc = np.zeros_like(zm)
    for k, a in coef:
        acc += (-k * a) * izb ** (k + 1)
    out[m] = np.asarray(cutoff_chi_scaled(r[m], r_model)) * (acc.real**2 + acc.imag**2)
    return out


def _exterior_radial_integral(power: int, r_model: float) -> float:
    """Integral of chi(r/r_model) * r^{-power} dr over (0, inf), power >= 2."""
    rr = np.linspace(r_model, 2.0 * r_model, 4001)
    vals = np.asarray(cutoff_chi(rr / r_model)) * rr ** (-float(power))
    trans = float(simpson(vals, x=rr))
    return trans + (2.0 * r_model) ** (1 - power) / (power - 1)


@dataclass(frozen=True)
class QPairings:
    """The two vanishing pairings of Q, with their box/exterior split."""

    pair_one: complex        # (Q, 1)
    pair_zbar: complex       # (Q, zbar)
    box_one: complex
    box_zbar: complex
    exterior_one: complex
    exterior_zbar: complex
    ring_max: float          # worst boundary-ring integrand of the box part


def q_pairings(u: ComplexField, r_model: float | None = None) -> QPairings:
    """(Q, 1) and (Q, zbar) with closed-form completion beyond the box.

    The far model g = chi * |tail'|^2 (tail' = d/dzbar of u's stored tail) is
    subtracted from Q before box quadrature, then its own two pairings are
    added back from exact angular reduction plus 1D radial integrals. For a
    divergence-free u whose vorticity is compactly supported, Q - g decays
    fast inside the box, so both pairings resolve far below the naive box
    truncation floor |tail|^2 / L^2.
    """
    g = u.grid
    if r_model is None:
        r_model = g.L / 2.5
    if 2.0 * r_model > g.L:
        raise ValueError("far model transition must finish inside the box.")
    q = q_nonlinearity(u)
    z = g.nodes()
    gfar = _tail_prime_sq(u.tail, z, r_model)
    loc = q.with_samples(q.samples - gfar)
    m0 = moment(loc, 0, 0)
    m1 = moment(loc, 0, 1)

    ext_one = 0.0 + 0.0j
    ext_zbar = 0.0 + 0.0j
    if u.tail is not None:
        a = {k: u.tail.coefficient(0, k) for k in range(1, u.tail.N + 1)}
        for k, ak in a.items():
            if ak != 0:
                ext_one += 2.0 * np.pi * (k * k * abs(ak) ** 2) * _exterior_radial_integral(2 * k + 1, r_model)
        for k, ak in a.items():
            if k >= 2 and ak != 0 and a.get(k - 1, 0) != 0:
                c = k * (k - 1) * ak * np.conj(a[k - 1])
                ext_zbar += 2.0 * np.pi * c * _exterior_radial_integral(2 * k - 1, r_model)
    return QPairings(
        m0.value + ext_one,
        m1.value + ext_zbar,
        m0.value,
        m1.value,
        ext_one,
        ext_zbar,
        max(m0.boundary_ring_max, m1.boundary_ring_max),
    )


# ---------------------------------------------------------------------------
# Pressure recovery
# ---------------------------------------------------------------------------


def _free_space_poisson(src: ComplexArray, h: float, extent: float, pad: int = 4) -> ComplexArray:
    """Solve Laplacian(p) = src on free space, sampled on the source grid.

    FFT convolution with the Fourier transform of the truncated logarithmic
    Green's function: Ghat(k) = a ln(a) J1(ka)/k + (J0(ka) - 1)/k^2 with
    truncation radius a just past the largest source-target distance; the
    padded box keeps periodic images of the truncated kernel from reaching
    any true pair.
    """
    n = src.shape[0]
    p = pad * n
    a = 1.01 * extent
    kf = 2.0 * np.pi * np.fft.fftfreq(p, d=h)
    kx, ky = np.meshgrid(kf, kf, indexing="ij")
    kk = np.hypot(kx, ky)
    with np.errstate(divide="ignore", invalid="ignore"):
        ghat = a * np.log(a) * j1(kk * a) / kk + (j0(kk * a) - 1.0) / kk**2
    ghat[0, 0] = a * a * np.log(a) / 2.0 - a * a / 4.0
    padded = np.zeros((p, p), dtype=np.complex128)
    padded[:n, :n] = src
    out = np.fft.ifft2(np.fft.fft2(padded) * ghat)
    return out[:n, :n]


def _radial_green_table(
    diag: Sequence[tuple[int, float]], r_model: float, r_max: float
) -> tuple[FloatArray, FloatArray]:
    """Green-convolution of the radial source -2 chi(r/r_model) sum d_k r^{-2k-2}.

    Returns (radii, p(radii)) with p(r) = ln(r) M(r) + T(r), M the interior
    source mass and T the log-weighted exterior integral, both per unit of
    the 2 pi angular factor already folded in.
    """
    rr = np.linspace(0.0, r_max, 20001)
    gsrc = np.zeros_like(rr)
    m = rr > r_model
    for k, dk in diag:
        gsrc[m] += dk * rr[m] ** (-2.0 * k - 2.0)
    gsrc[m] *= np.asarray(cutoff_chi(rr[m] / r_model))
    # p(r) = ln(r) M(r) + T(r) IS the free-space ln/(2 pi) convolution for a
    # radial source (mean value property), so no angular factor appears
    f = -2.0 * gsrc
    sf = rr * f
    mass = np.concatenate([[0.0], cumulative_trapezoid(sf, rr)])
    with np.errstate(divide="ignore", invalid="ignore"):
        slnf = np.where(rr > 0, sf * np.log(np.maximum(rr, 1e-300)), 0.0)
    t_in = np.concatenate([[0.0], cumulative_trapezoid(slnf, rr)])
    # closed-form continuation past r_max where chi = 1
    t_inf = 0.0
    for k, dk in diag:
        c = -2.0 * dk
        t_inf += c * r_max ** (-2.0 * k) * (np.log(r_max) / (2.0 * k) + 1.0 / (4.0 * k * k))
    t_total = t_in[-1] + t_inf
    tail_t = t_total - t_in
    with np.errstate(divide="ignore", invalid="ignore"):
        lnr = np.where(rr > 0, np.log(np.maximum(rr, 1e-300)), 0.0)
    pvals = np.where(mass != 0.0, lnr * mass, 0.0) + tail_t
    return rr, pvals


@dataclass(frozen=True)
class PressureField:
    """Pressure samples, far-field diagnostics, and the momentum gradient."""

    field: ComplexField                  # role PRESSURE; samples nearly real
    tail: AsymptoticPart                 # leading far coefficients, see notes
    grad_zbar_term: ComplexField         # -2 p_zbar, the momentum-equation force
    im_ratio: float                      # max|Im p| / max|p|, stored tolerance
    pairings: QPairings                  # the completed (Q,1), (Q,zbar)


def pressure(u: ComplexField, r_model: float | None = None, ring_tol: float = 1e-5) -> PressureField:
    """Recover the pressure of a divergence-free velocity field.

    Solves Laplacian(p) = -2 Q(u) with decay at infinity, split as p_local
    (free-space FFT solve of the fast-decaying part Q - g, g = chi |tail'|^2)
    plus an analytic far model: the radial part of g via a 1D logarithmic
    Green convolution and each angular cross term via its exact inverse
    power-law solution, with the cutoff-commutator correction folded back
    into the local source. Realness of p is asserted, not enforced.

    Raises
    ------
    DomainTooSmallError
        If the localized source has not decayed at the box edge (relative
        ring magnitude above ring_tol), i.e. Q's far content is not captured
        by u's stored tail.
    RuntimeError
        If the recovered pressure has a relative imaginary part above 1e-6.
    """
    if not u.divergence_free:
        raise ValueError("pressure requires a divergence-free-tagged velocity field.")
    g = u.grid
    if r_model is None:
        r_model = g.L / 2.5
    if 2.0 * r_model > g.L:
        raise ValueError("far model transition must finish inside the box.")
    pairs = q_pairings(u, r_model)
    q = q_nonlinearity(u)
    z = g.nodes()
    r = g.radii()
    gfar = _tail_prime_sq(u.tail, z, r_model)
    src = -2.0 * (q.samples - gfar)

    # cross terms of |tail'|^2 (angular orders k != l): exact particular
    # solutions chi * P_kl plus the commutator correction E supported on the
    # transition annulus, which joins the local source
    p_cross = np.zeros_like(src)
    if u.tail is not None:
        coefs = [(k, u.tail.coefficient(0, k)) for k in range(1, u.tail.N + 1) if u.tail.coefficient(0, k) != 0]
        if len(coefs) > 1:
            mask = r > r_model
            zm = z[mask]
            rm = r[mask]
            izb = 1.0 / np.conj(zm)
            iz = 1.0 / zm
            chi_m = np.asarray(cutoff_chi_scaled(rm, r_model))
            chp = np.asarray(cutoff_chi_prime(rm / r_model)) / r_model
            chs = np.asarray(cutoff_chi_second(rm / r_model)) / r_model**2
            chi_z = chp * np.conj(zm) / (2.0 * rm)
            chi_zb = chp * zm / (2.0 * rm)
            lap_chi = chs + chp / rm
            e_corr = np.zeros_like(zm)
            pc = np.zeros_like(zm)
            for k, ak in coefs:
                for l, al in coefs:
                    if k == l:
                        continue
                    beta = -ak * np.conj(al) / 2.0
                    p_kl = beta * izb**k * iz**l
                    pz = -l * beta * izb**k * iz ** (l + 1)
                    pzb = -k * beta * izb ** (k + 1) * iz**l
                    pc += chi_m * p_kl
                    e_corr += 4.0 * (chi_z * pzb + chi_zb * pz) + p_kl * lap_chi
            p_cross[mask] = pc
            src[mask] -= e_corr

    ring = np.concatenate([np.abs(src[0, :]), np.abs(src[-1, :]), np.abs(src[1:-1, 0]), np.abs(src[1:-1, -1])])
    src_scale = float(np.max(np.abs(src)))
    # the one-sided boundary stencils leave coefficient-rounding residue of
    # order (eps |u| / h)^2 in Q; below that floor the local source is
    # numerically zero and the edge gate would compare junk against junk
    src_floor = (1e-12 * float(np.max(np.abs(u.samples))) / g.h) ** 2
    if src_scale <= src_floor:
        src = np.zeros_like(src)
    elif float(ring.max()) > ring_tol * src_scale:
        raise DomainTooSmallError(
            f"localized pressure source still {float(ring.max()):.3e} at the box edge "
            f"(peak {src_scale:.3e}); the box cannot hold Q's far field."
        )

    p_loc = _free_space_poisson(src, g.h, 2.0 * np.sqrt(2.0) * g.L)

    p_diag = np.zeros_like(src)
    if u.tail is not None:
        diag = [
            (k, float(k * k * abs(u.tail.coefficient(0, k)) ** 2))
            for k in range(1, u.tail.N + 1)
            if u.tail.coefficient(0, k) != 0
        ]
        if diag:
            rr, pv = _radial_green_table(diag, r_model, float(r.max()) * 1.01)
            p_diag = np.interp(r.ravel(), rr, pv).reshape(r.shape).astype(np.complex128)

    p_samples = p_loc + p_diag + p_cross
    p_max = float(np.max(np.abs(p_samples)))
    im_ratio = float(np.max(np.abs(p_samples.imag))) / p_max if p_max > 0 else 0.0
    if im_ratio > 1e-6:
        raise RuntimeError(f"pressure has relative imaginary part {im_ratio:.3e} > 1e-6.")

    field = ComplexField(g, p_samples, FieldRole.PRESSURE)
    grad = wirtinger_dzbar(field)
    grad = ComplexField(g, -2.0 * grad.samples, FieldRole.GENERIC)
    # leading far coefficients of the double inverse; both vanish for
    # divergence-free input (the vanishing-pairing identities)
    tail = AsymptoticPart.from_entries(
        2, {(0, 1): pairs.pair_one / np.pi, (0, 2): pairs.pair_zbar / np.pi}, 1.0
    )
    return PressureField(field, tail, grad, im_ratio, pairs)

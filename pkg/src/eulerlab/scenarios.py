"""Initial-data constructions with analytic oracles.

Every scenario bundles closed-form velocity and vorticity evaluators, a
declared far-field coefficient table, and 1D radial oracles that later
modules test against.  Evaluators are pure functions of the sample points,
so they are safe to call on grids of any resolution, in any order.

Conventions match the rest of the package: velocity is a single complex
sample u = v1 + i*v2 and the complex vorticity is w = dz(u), which carries
HALF the classical scalar curl.  A consequence worth remembering: the
azimuthal speed of a radial vortex is V(r) = (2/r) * integral of g(s)*s ds
when w = i*g(r), twice the textbook value for the classically normalized
profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.special import erf

from .asymptotics import AsymptoticPart
from .complexgrid import ComplexField, FieldRole, Grid

# Hard zero below this level: keeps nominally-infinite profiles compatible
# with the compact-support contract of the seeding step.
_TRUNC_EPS = 1e-28

# Gaussian vorticity is cut at this many sigma (value ~ 1.3e-14 relative).
_GAUSS_CUT_SIGMA = 8.0


class ScenarioError(ValueError):
    pass


# ---------------------------------------------------------------------------
# radial profiles


@dataclass(frozen=True)
class RadialProfile:
    """Radial amplitude a(rho) in rho = r^2 coordinates, compactly supported.

    `amplitude`, `deriv`, `deriv2` evaluate a, a', a'' vectorized over rho;
    all three must vanish identically outside [rho1, rho2] and rho1 must be
    strictly positive.  `cumulative` (optional) is the exact antiderivative
    A(rho) = integral_0^rho a, used by profile-based radial vortices.
    """

    amplitude: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    rho1: float
    rho2: float
    smoothness: str
    label: str = "profile"
    cumulative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    n_nodes: int = 20001

    def __post_init__(self):
        if not (0.0 < self.rho1 < self.rho2):
            raise ScenarioError(
                f"profile support [{self.rho1}, {self.rho2}] must satisfy 0 < rho1 < rho2"
            )

    def __call__(self, rho):
        return self.amplitude(np.asarray(rho, dtype=np.float64))

    def nodes(self) -> np.ndarray:
        """Quadrature nodes covering the support, for the 1D oracles."""
        return np.linspace(self.rho1, self.rho2, self.n_nodes)


def poly_bump(rho1: float, rho2: float, amplitude: float = 1.0) -> RadialProfile:
    """Cubic-edge polynomial bump (rho-rho1)^3 (rho2-rho)^3, unit peak.

    C2 at the support endpoints; derivatives are exact polynomials.
    """
    if not (0.0 < rho1 < rho2):
        raise ScenarioError("poly_bump needs 0 < rho1 < rho2")
    mid = 0.5 * (rho1 + rho2)
    peak = (mid - rho1) ** 3 * (rho2 - mid) ** 3
    scale = amplitude / peak

    def _mask(rho, vals):
        out = np.where((rho >= rho1) & (rho <= rho2), vals, 0.0)
        return out

    def a(rho):
        rho = np.asarray(rho, dtype=np.float64)
        p, q = rho - rho1, rho2 - rho
        return _mask(rho, scale * p**3 * q**3)

    def da(rho):
        rho = np.asarray(rho, dtype=np.float64)
        p, q = rho - rho1, rho2 - rho
        return _mask(rho, scale * 3.0 * p**2 * q**2 * (q - p))

    def d2a(rho):
        rho = np.asarray(rho, dtype=np.float64)
        p, q = rho - rho1, rho2 - rho
        return _mask(rho, scale * 6.0 * p * q * (p**2 - 3.0 * p * q + q**2))

    def cum(rho):
        # exact polynomial antiderivative of scale * (rho-rho1)^3 (rho2-rho)^3
        rho = np.asarray(rho, dtype=np.float64)
        x = np.clip(rho, rho1, rho2) - rho1
        w = rho2 - rho1
        # (x)^3 (w-x)^3 = w^3 x^3 - 3 w^2 x^4 + 3 w x^5 - x^6
        val = (
            w**3 * x**4 / 4.0
            - 3.0 * w**2 * x**5 / 5.0
            + 3.0 * w * x**6 / 6.0
            - x**7 / 7.0
        )
        return scale * val

    return RadialProfile(a, da, d2a, rho1, rho2, "c2", f"poly[{rho1:g},{rho2:g}]", cum)


def gauss_bump(r_center: float, r_width: float, amplitude: float = 1.0) -> RadialProfile:
    """Gaussian-in-r bump exp(-((r - rc)/s)^2), truncated below 1e-28.

    Smooth to machine level everywhere; the support edge jump is ~1e-28 of
    the peak, so lattice quadrature of the field stays spectrally accurate.
    Requires rc > 8.03*s so the truncated support keeps rho1 > 0.
    """
    cut = math.sqrt(-math.log(_TRUNC_EPS))  # ~8.03 in units of r_width
    r_lo = r_center - cut * r_width
    if r_lo <= 0.0:
        raise ScenarioError(
            f"gauss_bump needs r_center > {cut:.2f}*r_width to keep the support off the origin"
        )
    r_hi = r_center + cut * r_width
    inv_s2 = 1.0 / (r_width * r_width)

    def _eval(rho, order):
        rho = np.asarray(rho, dtype=np.float64)
        r = np.sqrt(np.maximum(rho, 0.0))
        x = r - r_center
        expo = x * x * inv_s2
        live = expo < -math.log(_TRUNC_EPS)
        g = np.where(live, np.exp(-np.where(live, expo, 0.0)), 0.0) * amplitude
        if order == 0:
            return g
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_r = np.where(r > 0.0, 1.0 / np.where(r > 0.0, r, 1.0), 0.0)
        # da/drho = (da/dr) / (2 r)
        d1 = g * (-2.0 * x * inv_s2) * 0.5 * inv_r
        if order == 1:
            return np.where(live, d1, 0.0)
        # d2a/drho2 = d/drho (d1)
        dd_dr = (
            g * (4.0 * x * x * inv_s2 * inv_s2 - 2.0 * inv_s2) * 0.5 * inv_r
            - g * (-2.0 * x * inv_s2) * 0.5 * inv_r * inv_r
        )
        d2 = dd_dr * 0.5 * inv_r
        return np.where(live, d2, 0.0)

    def a(rho):
        return _eval(rho, 0)

    def da(rho):
        return _eval(rho, 1)

    def d2a(rho):
        return _eval(rho, 2)

    def cum(rho):
        # integral_0^rho a = 2 * integral_0^sqrt(rho) s exp(-((s-rc)/w)^2) ds
        rho = np.asarray(rho, dtype=np.float64)
        r = np.sqrt(np.maximum(rho, 0.0))
        w = r_width

        def anti(s):
            u = (s - r_center) / w
            return amplitude * (
                r_center * w * math.sqrt(math.pi) * erf(u) - w * w * np.exp(-u * u)
            )

        return anti(np.minimum(r, r_hi)) - anti(np.minimum(r, r_hi) * 0.0)

    return RadialProfile(
        a,
        da,
        d2a,
        r_lo * r_lo,
        r_hi * r_hi,
        "smooth",
        f"gauss[{r_center:g}/{r_width:g}]",
        cum,
    )


# ---------------------------------------------------------------------------
# scenario container


@dataclass
class Scenario:
    """Initial data: background c plus a vortical part with closed forms.

    u0/w0 evaluate the full initial velocity (background included) and the
    complex vorticity at arbitrary complex sample points.  `tail_entries`
    lists the exact far-field coefficients of u0; `support_radius` bounds
    the vorticity support for seeding-box construction.
    """

    name: str
    c: complex
    u0: Callable[[np.ndarray], np.ndarray]
    w0: Callable[[np.ndarray], np.ndarray]
    support_radius: float
    tail_entries: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    a03_rate: Optional[float] = None
    b3_exact: Optional[complex] = None

    def tail(self, order: int, r_model: float = 1.0) -> AsymptoticPart:
        entries = {
            kl: v for kl, v in self.tail_entries.items() if kl[0] + kl[1] <= order
        }
        if self.c != 0:
            entries[(0, 0)] = complex(self.c)
        return AsymptoticPart.from_entries(order, entries, r_model)

    def sample_velocity(
        self, grid: Grid, n_tail: int = 3, div_tol: float = 1e-3
    ) -> ComplexField:
        vals = np.asarray(self.u0(grid.nodes()), dtype=np.complex128)
        return ComplexField(
            grid,
            vals,
            role=FieldRole.VELOCITY,
            divergence_free=True,
            div_tol=div_tol,
            tail=self.tail(n_tail),
        )

    def sample_vorticity(self, grid: Grid) -> ComplexField:
        vals = np.asarray(self.w0(grid.nodes()), dtype=np.complex128)
        return ComplexField(grid, vals, role=FieldRole.VORTICITY)


def wirtinger_consistency(
    sc: Scenario, points: np.ndarray, h_loc: float = 2e-4
) -> float:
    """Max |dz(u0) - w0| at the given points via a local 4th-order stencil.

    Checks the closed forms against each other off-grid; h_loc is small
    enough that the stencil error sits near roundoff for smooth fields.
    Sample points should avoid the measure-zero circles where a merely-C2
    profile has derivative jumps.
    """
    pts = np.asarray(points, dtype=np.complex128).ravel()

    def d_axis(step):
        f1p = sc.u0(pts + step)
        f1m = sc.u0(pts - step)
        f2p = sc.u0(pts + 2 * step)
        f2m = sc.u0(pts - 2 * step)
        return (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * abs(step))

    dx = d_axis(h_loc)
    dy = d_axis(1j * h_loc)
    dz = 0.5 * (dx - 1j * dy)
    return float(np.max(np.abs(dz - sc.w0(pts))))


# ---------------------------------------------------------------------------
# Hamiltonian bump fields


def _require_radial_profile(a) -> RadialProfile:
    if not isinstance(a, RadialProfile):
        raise ScenarioError("expected a RadialProfile")
    return a


def _build_hamiltonian(l: int, profile: RadialProfile, eps: float) -> Scenario:
    a, da, d2a = profile.amplitude, profile.deriv, profile.deriv2

    def u0(z):
        z = np.asarray(z, dtype=np.complex128)
        rho = (z * z.conjugate()).real
        av, dv = a(rho), da(rho)
        bprime = dv * rho**l + l * av * rho ** (l - 1)
        zb = z.conjugate()
        return (
            2j * dv * z ** (l + 1)
            + 2j * (l * av + rho * dv) * zb ** (l - 1)
            + 1j * bprime * z
        )

    def w0(z):
        z = np.asarray(z, dtype=np.complex128)
        rho = (z * z.conjugate()).real
        av, dv, d2v = a(rho), da(rho), d2a(rho)
        bprime = dv * rho**l + l * av * rho ** (l - 1)
        bsecond = (
            d2v * rho**l
            + 2.0 * l * dv * rho ** (l - 1)
            + l * (l - 1) * av * rho ** (l - 2)
        )
        zb = z.conjugate()
        ang = 2j * (rho * d2v + (l + 1) * dv) * (z**l + zb**l)
        return ang + 1j * (rho * bsecond + bprime)

    rate = predicted_rate_1d(profile, l) if l == 2 else 0.0
    b3 = -4.0 * math.pi * _bprime_sq_integral(profile, 2) if l == 2 else 0.0
    return Scenario(
        name=f"hamiltonian_l{l}",
        c=0.0 + 0.0j,
        u0=u0,
        w0=w0,
        support_radius=math.sqrt(profile.rho2),
        tail_entries={},
        params={"l": l, "eps": eps, "profile": profile.label},
        a03_rate=rate,
        b3_exact=b3,
    )


def hamiltonian_field(
    l: int, profile: Optional[RadialProfile] = None, eps: float = 1.0
) -> Scenario:
    """Divergence-free field of a radial-times-angular stream function.

    The generating function is (z^l + zbar^l) a(rho) + a(rho) rho^l / 2 with
    rho = |z|^2, so with b = a rho^l the velocity and vorticity close as

        u0 = 2i a' z^(l+1) + 2i (l a + rho a') zbar^(l-1) + i b' z
        w0 = 2i (rho a'' + (l+1) a') (z^l + zbar^l) + i (rho b'' + b')

    both supported in the annulus eps <= |z| <= 2*eps.  All far-field
    moments of w0 vanish, so the declared tail is empty and u0 itself is
    compactly supported.
    """
    if l < 2:
        raise ScenarioError(f"angular order must be >= 2, got {l}")
    if eps <= 0:
        raise ScenarioError("eps must be positive")
    if profile is None:
        profile = poly_bump(eps * eps, 4.0 * eps * eps)
    profile = _require_radial_profile(profile)
    if profile.rho1 < eps * eps * (1 - 1e-12) or profile.rho2 > 4.0 * eps * eps * (1 + 1e-12):
        raise ScenarioError(
            f"profile support [{profile.rho1:g}, {profile.rho2:g}] must sit inside "
            f"[{eps*eps:g}, {4*eps*eps:g}]"
        )
    return _build_hamiltonian(l, profile, eps)


def _bprime_sq_integral(profile: RadialProfile, l: int) -> float:
    """integral of ((a rho^l)')^2 d rho over the support, dense Simpson."""
    rho = profile.nodes()
    bprime = profile.deriv(rho) * rho**l + l * profile.amplitude(rho) * rho ** (l - 1)
    return float(simpson(bprime * bprime, x=rho))


def predicted_rate_1d(profile: RadialProfile, l: int, k: int = 3) -> float:
    """Closed-form initial d/dt a_0k for the matched bump field (k = l+1).

    Returns -2 (k-1)(k-2) * integral ((a rho^l)')^2 d rho, which is strictly
    negative for any nonzero profile.
    """
    if k != l + 1:
        raise ScenarioError("rate formula applies to the matched pair k = l + 1")
    return -2.0 * (k - 1) * (k - 2) * _bprime_sq_integral(profile, l)


def hamiltonian_moment_1d(profile: RadialProfile, l: int) -> float:
    """1D oracle pi * integral ((a rho^l)')^2 d rho for the moment identity."""
    return math.pi * _bprime_sq_integral(profile, l)


def hamiltonian_moment_2d(sc: Scenario, grid: Grid, l: int) -> complex:
    """2D quadrature of the generating-moment integral (-1/4) (u0^2, conj(z)^(l-2)).

    Independent cross-check of hamiltonian_moment_1d; the two agree to the
    quadrature tolerance of the grid.
    """
    z = grid.nodes()
    vals = np.asarray(sc.u0(z), dtype=np.complex128)
    integrand = vals * vals * z ** (l - 2) if l > 2 else vals * vals
    total = np.sum(integrand * grid.quad_weights())
    return complex(-0.25 * total)


# ---------------------------------------------------------------------------
# radial vortices


def radial_vortex(
    gamma: Optional[float] = None,
    sigma: Optional[float] = None,
    profile: Optional[RadialProfile] = None,
) -> Scenario:
    """Steady radial vortex: w0 = i g(r), u0 azimuthal.

    Gaussian variant: g = gamma/(2 pi sigma^2) exp(-r^2 / (2 sigma^2)),
    truncated at 8 sigma so the vorticity is compactly supported.  The
    velocity closed form uses the saturated circulation of the truncated
    profile, keeping dz(u0) = w0 exact.  Speed V(r) = (2/r) int_0^r g s ds,
    twice the classically normalized swirl because the vorticity convention
    carries half the classical curl.
    """
    if profile is not None:
        if gamma is not None or sigma is not None:
            raise ScenarioError("give either (gamma, sigma) or a profile, not both")
        return _radial_from_profile(_require_radial_profile(profile))
    if gamma is None or sigma is None:
        raise ScenarioError("Gaussian variant needs both gamma and sigma")
    if sigma <= 0:
        raise ScenarioError("sigma must be positive")

    s2 = 2.0 * sigma * sigma
    q_cut = _GAUSS_CUT_SIGMA * _GAUSS_CUT_SIGMA / 2.0  # r^2/(2 sigma^2) at 8 sigma
    g0 = gamma / (math.pi * s2)
    r_cut = _GAUSS_CUT_SIGMA * sigma

    def w0(z):
        z = np.asarray(z, dtype=np.complex128)
        rho = (z * z.conjugate()).real
        q = rho / s2
        vals = np.where(q <= q_cut, g0 * np.exp(-np.minimum(q, q_cut)), 0.0)
        return 1j * vals

    def u0(z):
        z = np.asarray(z, dtype=np.complex128)
        rho = (z * z.conjugate()).real
        q = np.minimum(rho / s2, q_cut)
        # (1 - e^-q)/rho, with the removable limit 1/s2 at the origin
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(rho > 0.0, -np.expm1(-q) / np.where(rho > 0.0, rho, 1.0), 1.0 / s2)
        return (1j * gamma / math.pi) * z * frac

    gamma_eff = gamma * -math.expm1(-q_cut)
    return Scenario(
        name="gaussian_vortex",
        c=0.0 + 0.0j,
        u0=u0,
        w0=w0,
        support_radius=r_cut,
        tail_entries={(0, 1): 1j * gamma_eff / math.pi},
        params={"gamma": gamma, "sigma": sigma},
        a03_rate=0.0,
        b3_exact=0.0,
    )


def gaussian_speed(r, gamma: float, sigma: float):
    """Closed-form azimuthal speed of the (untruncated) Gaussian vortex."""
    r = np.asarray(r, dtype=np.float64)
    q = r * r / (2.0 * sigma * sigma)
    return gamma * -np.expm1(-q) / (math.pi * r)


def _radial_from_profile(profile: RadialProfile) -> Scenario:
    if profile.cumulative is None:
        raise ScenarioError("profile-based radial vortex needs an exact cumulative")
    a, cum = profile.amplitude, profile.cumulative
    # (w0, 1) = i * integral a(|z|^2) dA = i pi * mass, so a01 = i * mass
    mass = float(cum(np.asarray(profile.rho2)))  # integral_0^inf a(rho) d rho

    def w0(z):
        z = np.asarray(z, dtype=np.complex128)
        rho = (z * z.conjugate()).real
        return 1j * a(rho)

    def u0(z):
        # u = i z A(rho)/rho with A the cumulative; A(rho)/rho -> a(0) = 0 at 0
        z = np.asarray(z, dtype=np.complex128)
        rho = (z * z.conjugate()).real
        av = cum(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(rho > 0.0, av / np.where(rho > 0.0, rho, 1.0), 0.0)
        return 1j * z * frac

    return Scenario(
        name="profile_vortex",
        c=0.0 + 0.0j,
        u0=u0,
        w0=w0,
        support_radius=math.sqrt(profile.rho2),
        tail_entries={(0, 1): 1j * mass},
        params={"profile": profile.label},
        a03_rate=0.0,
        b3_exact=0.0,
    )


# ---------------------------------------------------------------------------
# composites


def composite(c: complex, parts: list, offsets: list) -> Scenario:
    """Background c plus translated vortical parts with superposed fields.

    Velocity superposition is exact because each part's u0 is the decaying
    antiderivative of its w0 and the reconstruction is linear.  Far-field
    coefficients translate by the binomial re-expansion of 1/(zbar - obar)^m.
    Empty parts give the pure uniform flow.
    """
    if len(parts) != len(offsets):
        raise ScenarioError("parts and offsets must pair up")
    for p in parts:
        if not isinstance(p, Scenario):
            raise ScenarioError("composite parts must be Scenario objects")
        if p.c != 0:
            raise ScenarioError("composite parts must not carry their own background")
    offs = [complex(o) for o in offsets]

    def u0(z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.full(z.shape, complex(c), dtype=np.complex128)
        for p, o in zip(parts, offs):
            out = out + p.u0(z - o)
        return out

    def w0(z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for p, o in zip(parts, offs):
            out = out + p.w0(z - o)
        return out

    # translated tails: v / (zbar - obar)^m = sum_j C(m-1+j, j) v obar^j / zbar^(m+j)
    entries: dict = {}
    max_order = 8
    for p, o in zip(parts, offs):
        ob = complex(o).conjugate()
        for (k, m), v in p.tail_entries.items():
            if k != 0:
                raise ScenarioError("composite parts must have pure anti-holomorphic tails")
            for j in range(0, max_order - m + 1):
                coeff = v * math.comb(m - 1 + j, j) * ob**j
                key = (0, m + j)
                entries[key] = entries.get(key, 0.0 + 0.0j) + coeff

    support = max(
        [abs(o) + p.support_radius for p, o in zip(parts, offs)], default=0.0
    )
    all_compact = all(not p.tail_entries for p in parts)
    rate = sum(p.a03_rate for p in parts) if all_compact else None
    b3 = sum(p.b3_exact for p in parts) if all_compact else None
    return Scenario(
        name="composite",
        c=complex(c),
        u0=u0,
        w0=w0,
        support_radius=support,
        tail_entries=entries,
        params={
            "c": [c.real, c.imag] if isinstance(c, complex) else [float(c), 0.0],
            "parts": [p.name for p in parts],
            "offsets": [[o.real, o.imag] for o in offs],
        },
        a03_rate=rate,
        b3_exact=b3,
    )


# ---------------------------------------------------------------------------
# seeded random fields


_MASK64 = (1 << 64) - 1


class Xoshiro256StarStar:
    """xoshiro256** 1.0 (Blackman/Vigna), seeded through SplitMix64.

    Hand-rolled so the draw sequence is bitwise identical on every platform;
    doubles come from the top 53 bits as (x >> 11) * 2^-53.
    """

    def __init__(self, seed: int):
        sm = seed & _MASK64
        state = []
        for _ in range(4):
            sm = (sm + 0x9E3779B97F4A7C15) & _MASK64
            z = sm
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            z ^= z >> 31
            state.append(z)
        self._s = state

    @staticmethod
    def _rotl(x: int, k: int) -> int:
        return ((x << k) | (x >> (64 - k))) & _MASK64

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (self._rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = self._rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()


def random_schwartz(seed: int, complexity: int) -> Scenario:
    """Seeded sum of randomly placed/scaled bump fields, rapidly decaying.

    Each part is a hamiltonian-type bump with a smooth (truncated-Gaussian)
    radial profile, translated to a random center; supports are kept
    pairwise disjoint so the genericity functional B3 = (u0bar^2, 1) is the
    exact sum of the per-bump closed forms.  The first bump always carries
    angular order 2, which makes B3 strictly negative.
    """
    if complexity < 1:
        raise ScenarioError("complexity must be >= 1")
    rng = Xoshiro256StarStar(seed)

    bumps = []
    placed = []  # (center, outer radius)
    for i in range(complexity):
        l = 2 if i == 0 else 2 + int(rng.uniform() * 3.0)  # 2, 3, or 4
        width = rng.uniform_in(0.05, 0.075)
        r_center = (8.10 + 0.40 * rng.uniform()) * width
        amp = rng.uniform_in(0.08, 0.22)
        prof = gauss_bump(r_center, width, amp)
        r_outer = math.sqrt(prof.rho2)
        # rejection placement keeping supports disjoint with a small margin
        place_r = 1.05 * math.sqrt(complexity)
        center = 0j
        for attempt in range(4096):
            rad = place_r * math.sqrt(rng.uniform())
            ang = 2.0 * math.pi * rng.uniform()
            cand = rad * complex(math.cos(ang), math.sin(ang))
            ok = all(
                abs(cand - zc) > r_outer + ro + 0.05 for zc, ro in placed
            )
            if ok:
                center = cand
                break
            if attempt % 64 == 63:
                place_r *= 1.08
        else:
            raise ScenarioError("could not place disjoint bumps; lower complexity")
        placed.append((center, r_outer))
        bumps.append((l, prof, center))

    # bump supports here are wider than the [eps^2, 4 eps^2] annulus of
    # hamiltonian_field, so build through the unvalidated constructor
    scen_parts = [
        (_build_hamiltonian(l, prof, math.sqrt(prof.rho1)), center)
        for l, prof, center in bumps
    ]

    def u0(z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for p, o in scen_parts:
            out = out + p.u0(z - o)
        return out

    def w0(z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for p, o in scen_parts:
            out = out + p.w0(z - o)
        return out

    rate = sum(p.a03_rate for p, _ in scen_parts)
    b3 = sum(p.b3_exact for p, _ in scen_parts)
    support = max(abs(o) + p.support_radius for p, o in scen_parts)
    return Scenario(
        name=f"random_schwartz_{seed}",
        c=0.0 + 0.0j,
        u0=u0,
        w0=w0,
        support_radius=support,
        tail_entries={},
        params={
            "seed": seed,
            "complexity": complexity,
            "bumps": [
                {
                    "l": l,
                    "profile": prof.label,
                    "center": [c0.real, c0.imag],
                }
                for (l, prof, c0) in bumps
            ],
        },
        a03_rate=rate,
        b3_exact=b3,
    )


# ---------------------------------------------------------------------------
# shipped presets


def vortex_in_uniform_flow() -> Scenario:
    """The standard regression preset: Gaussian vortex riding a uniform flow.

    c = 1 + 0.5i, Gamma = pi, sigma = 0.5.  Every conservation-law check in
    the acceptance battery runs on this instance.
    """
    scn = composite(
        1.0 + 0.5j, [radial_vortex(gamma=math.pi, sigma=0.5)], [0.0 + 0.0j]
    )
    scn.name = "vortex_in_uniform_flow"
    return scn


def two_vortex() -> Scenario:
    """Two counter-signed Gaussian vortices at mirrored off-axis centers."""
    z0 = 0.30 + 0.20j
    scn = composite(
        0.0 + 0.0j,
        [
            radial_vortex(gamma=math.pi, sigma=0.7),
            radial_vortex(gamma=-0.6 * math.pi, sigma=0.7),
        ],
        [z0, -z0],
    )
    scn.name = "two_vortex"
    return scn


def shipped_scenarios() -> dict:
    """Named divergence-free presets swept by the moment/realness checks.

    Restricted to fields whose feature scale a 256-node grid stencil
    resolves; bump-profile constructions go through the local-stencil
    consistency checks instead.
    """
    return {
        "uniform": composite(1.0 + 0.0j, [], []),
        "gaussian_sigma05": radial_vortex(gamma=math.pi, sigma=0.5),
        "gaussian_sigma07": radial_vortex(gamma=math.pi, sigma=0.7),
        "vortex_in_uniform_flow": vortex_in_uniform_flow(),
        "two_vortex": two_vortex(),
    }

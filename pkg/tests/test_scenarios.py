"""Tests for the initial-data constructions.

Oracle strategy, frozen measurements:

* poly_bump cumulative vs dense Simpson: 3.1e-15 relative; gauss_bump
  derivative stencil checks: 1.7e-10 and 1.8e-9 against FD of the
  amplitude (derivative scales 3.9 and 49).
* Hamiltonian moment identity, 2D quadrature vs 1D oracle at n = 256,
  eps = 1: 1.13e-7 relative.  The closed-form rate and B3 share the same
  1D integral, so pi * rate = b3 to rounding.
* local-stencil closed-form consistency (h_loc = 2e-4, off-junction
  points): hamiltonian 8.1e-10, gaussian vortex 4.2e-13, profile vortex
  7.2e-12, schwartz 2.7e-9; local divergence 2.1e-10 / 1.1e-9.
* grid-FD consistency on smooth scenarios at n = 512: gauss sigma=0.7
  (L=6) 2.2e-7, sigma=0.5 and the preset (L=4.5) 5.1e-7, two_vortex
  (L=6) 2.2e-7.  Bump-profile scenarios are junction-limited on grid
  stencils (measured O(1) abs error at n = 256) and are covered by the
  local-stencil checks instead.
* gaussian vortex: quadrature circulation vs declared tail 1.3e-14;
  speed convention |u0(3 sigma)| = twice the classically normalized
  swirl, 1.1e-16.
* profile vortex: declared a01 = i * mass; far-field u0 equals the tail
  evaluation at 1.2e-16 relative; C2 lattice quadrature of the moment
  agrees at 1.1e-6.
* composite translation: two_vortex declared vs quadrature moments
  a01/a02/a03 all within 1.2e-15; far consistency at |z| = 100 within
  3.6e-16.
* random_schwartz: B3 grid quadrature (n = 1024) vs closed form 3.6e-16
  relative; construction makes B3 < 0 for every seed.
* xoshiro256**: SplitMix64 seed-0 first state word 0xe220a8397b1dcdaf
  (published test vector); seed-1 u64/double sequences frozen bitwise.
"""

import math

import numpy as np
import pytest

from eulerlab import scenarios as sc
from eulerlab.asymptotics import eval_tail
from eulerlab.complexgrid import Grid, wirtinger_dz


def local_divergence(scn, pts, h_loc=2e-4):
    """Max |div u0| via the same 4th-order local stencil as the dz check."""
    pts = np.asarray(pts, dtype=np.complex128).ravel()

    def d_axis(step):
        f1p = scn.u0(pts + step)
        f1m = scn.u0(pts - step)
        f2p = scn.u0(pts + 2 * step)
        f2m = scn.u0(pts - 2 * step)
        return (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * abs(step))

    dx = d_axis(h_loc)
    dy = d_axis(1j * h_loc)
    return float(np.max(np.abs(dx.real + dy.imag)))


def ring_points(radii, n_ang=16, phase=0.37):
    rs = np.asarray(radii, dtype=np.float64)
    ang = np.exp(1j * (2 * np.pi * np.arange(n_ang) / n_ang + phase))
    return (rs[:, None] * ang[None, :]).ravel()


# --------------------------------------------------------------------------
# radial profiles
# --------------------------------------------------------------------------


def test_poly_bump_peak_and_support():
    p = sc.poly_bump(1.0, 4.0)
    assert p(np.asarray(2.5)) == pytest.approx(1.0)
    for rho in (0.5, 1.0, 4.0, 4.7):
        assert p(np.asarray(rho)) == 0.0
    assert p.deriv(np.asarray(2.5)) == 0.0
    assert p.smoothness == "c2"


def test_poly_bump_validation():
    with pytest.raises(sc.ScenarioError):
        sc.poly_bump(0.0, 1.0)
    with pytest.raises(sc.ScenarioError):
        sc.poly_bump(2.0, 1.0)


def test_poly_bump_derivatives_consistent():
    p = sc.poly_bump(0.25, 1.0, 2.0)
    rho = np.linspace(0.3, 0.95, 40)
    h = 1e-6
    fd1 = (p(rho + h) - p(rho - h)) / (2 * h)
    fd2 = (p.deriv(rho + h) - p.deriv(rho - h)) / (2 * h)
    assert np.max(np.abs(fd1 - p.deriv(rho))) <= 1e-7
    assert np.max(np.abs(fd2 - p.deriv2(rho))) <= 1e-6


def test_poly_bump_cumulative_exact():
    from scipy.integrate import simpson

    p = sc.poly_bump(0.25, 1.0, 2.0)
    rho = np.linspace(0.25, 1.0, 20001)
    brute = simpson(p(rho), x=rho)
    mass = float(p.cumulative(np.asarray(1.0)))
    assert abs(mass - brute) <= 1e-12 * abs(mass)  # frozen: 3.1e-15
    assert float(p.cumulative(np.asarray(0.25))) == 0.0
    # saturates beyond the support
    assert float(p.cumulative(np.asarray(3.0))) == mass


def test_gauss_bump_needs_origin_clearance():
    with pytest.raises(sc.ScenarioError, match="r_center"):
        sc.gauss_bump(0.4, 0.06)


def test_gauss_bump_derivatives_consistent():
    p = sc.gauss_bump(1.5, 0.06, 0.8)
    rho = np.linspace(1.9, 2.6, 50)  # around the peak at rho = 2.25
    h = 1e-6
    fd1 = (p(rho + h) - p(rho - h)) / (2 * h)
    fd2 = (p.deriv(rho + h) - p.deriv(rho - h)) / (2 * h)
    # frozen: 1.7e-10 against scale 3.9, 1.8e-9 against scale 49
    assert np.max(np.abs(fd1 - p.deriv(rho))) <= 1e-8 * np.max(np.abs(p.deriv(rho)))
    assert np.max(np.abs(fd2 - p.deriv2(rho))) <= 1e-7 * np.max(np.abs(p.deriv2(rho)))


def test_gauss_bump_support_honesty():
    p = sc.gauss_bump(1.5, 0.06, 0.8)
    outside = np.asarray([0.5, p.rho1 - 1e-9, p.rho2 + 1e-9, 9.0])
    assert np.all(p(outside) == 0.0)
    assert np.all(p.deriv(outside) == 0.0)
    assert np.all(p.deriv2(outside) == 0.0)
    assert p(np.asarray(1.5**2)) == pytest.approx(0.8)


def test_gauss_bump_cumulative_matches_quadrature():
    from scipy.integrate import simpson

    p = sc.gauss_bump(1.5, 0.06, 0.8)
    rho = np.linspace(p.rho1, p.rho2, 20001)
    brute = simpson(p(rho), x=rho)
    mass = float(p.cumulative(np.asarray(p.rho2)))
    assert abs(mass - brute) <= 1e-10 * abs(mass)


# --------------------------------------------------------------------------
# Hamiltonian bump fields
# --------------------------------------------------------------------------


def test_hamiltonian_validation():
    with pytest.raises(sc.ScenarioError, match="angular order"):
        sc.hamiltonian_field(1)
    with pytest.raises(sc.ScenarioError, match="eps"):
        sc.hamiltonian_field(2, eps=0.0)
    with pytest.raises(sc.ScenarioError, match="support"):
        sc.hamiltonian_field(2, profile=sc.gauss_bump(1.5, 0.11), eps=1.0)
    with pytest.raises(sc.ScenarioError, match="RadialProfile"):
        sc.hamiltonian_field(2, profile=lambda r: r)


def test_hamiltonian_vanishes_off_annulus_exactly():
    scn = sc.hamiltonian_field(2, eps=1.0)
    pts = ring_points([0.2, 0.97, 2.03, 5.0])
    assert np.all(scn.u0(pts) == 0.0)
    assert np.all(scn.w0(pts) == 0.0)
    # and is nonzero inside
    inside = ring_points([1.5])
    assert np.min(np.abs(scn.u0(inside))) > 0.01


def test_hamiltonian_closed_forms_consistent():
    scn = sc.hamiltonian_field(2, eps=1.0)
    pts = ring_points(np.linspace(1.1, 1.9, 7))
    # frozen: 8.1e-10 dz mismatch, 2.1e-10 divergence
    assert sc.wirtinger_consistency(scn, pts) <= 1e-6
    assert local_divergence(scn, pts) <= 1e-6


def test_hamiltonian_moment_2d_vs_1d():
    prof = sc.poly_bump(1.0, 4.0)
    scn = sc.hamiltonian_field(2, eps=1.0)
    m1 = sc.hamiltonian_moment_1d(prof, 2)
    m2 = sc.hamiltonian_moment_2d(scn, Grid(2.2, 256), 2)
    assert m1 > 0
    assert abs(m2.imag) <= 1e-6 * m1
    assert abs(m2.real - m1) <= 1e-6 * m1  # frozen: 1.13e-7


def test_hamiltonian_rate_negative_and_tied_to_b3():
    scn = sc.hamiltonian_field(2, eps=1.0)
    assert scn.a03_rate < 0
    assert scn.b3_exact.real < 0
    # rate = -4 I and b3 = -4 pi I with the same I
    assert abs(math.pi * scn.a03_rate - scn.b3_exact) <= 1e-14 * abs(scn.b3_exact)


def test_hamiltonian_higher_order_has_no_k3_rate():
    scn = sc.hamiltonian_field(3, eps=1.0)
    assert scn.a03_rate == 0.0
    assert scn.b3_exact == 0.0


def test_predicted_rate_requires_matched_pair():
    prof = sc.poly_bump(1.0, 4.0)
    with pytest.raises(sc.ScenarioError, match="matched"):
        sc.predicted_rate_1d(prof, 3, k=3)
    assert sc.predicted_rate_1d(prof, 2, k=3) < 0


# --------------------------------------------------------------------------
# radial vortices
# --------------------------------------------------------------------------


def test_gaussian_vortex_circulation_tail():
    scn = sc.radial_vortex(gamma=math.pi, sigma=0.5)
    g = Grid(6.0, 256)
    quad = complex(np.sum(scn.w0(g.nodes()) * g.quad_weights()) / math.pi)
    decl = scn.tail_entries[(0, 1)]
    assert abs(decl - quad) <= 1e-12  # frozen: 1.3e-14
    # truncated circulation, within 1e-13 of i*gamma/pi but not equal
    assert abs(decl - 1j) <= 1e-13


def test_gaussian_vortex_speed_convention():
    gamma, sigma = math.pi, 0.5
    scn = sc.radial_vortex(gamma=gamma, sigma=sigma)
    r = 3 * sigma
    speed = abs(complex(scn.u0(np.asarray(r + 0j))))
    closed = float(sc.gaussian_speed(r, gamma, sigma))
    classical = gamma * -math.expm1(-r * r / (2 * sigma**2)) / (2 * math.pi * r)
    assert abs(speed - closed) <= 1e-14 * closed
    assert abs(speed - 2.0 * classical) <= 1e-10 * speed  # frozen: 1.1e-16


def test_gaussian_vortex_closed_forms_consistent():
    scn = sc.radial_vortex(gamma=math.pi, sigma=0.5)
    pts = ring_points([0.2, 0.7, 1.5, 3.0])
    # frozen: 4.2e-13
    assert sc.wirtinger_consistency(scn, pts) <= 1e-6
    assert local_divergence(scn, pts) <= 1e-6


def test_gaussian_vortex_truncation():
    sigma = 0.5
    scn = sc.radial_vortex(gamma=math.pi, sigma=sigma)
    far = ring_points([8 * sigma + 0.01, 6.0])
    assert np.all(scn.w0(far) == 0.0)
    # beyond the cut u0 is the pure tail 1/zbar term
    tail_vals = np.asarray(eval_tail(scn.tail(1), far))
    u_vals = np.asarray(scn.u0(far))
    assert np.max(np.abs(u_vals - tail_vals)) <= 1e-14 * np.max(np.abs(u_vals))


def test_radial_vortex_validation():
    prof = sc.poly_bump(0.25, 1.0)
    with pytest.raises(sc.ScenarioError, match="not both"):
        sc.radial_vortex(gamma=1.0, sigma=0.5, profile=prof)
    with pytest.raises(sc.ScenarioError, match="both gamma and sigma"):
        sc.radial_vortex(gamma=1.0)
    with pytest.raises(sc.ScenarioError, match="sigma"):
        sc.radial_vortex(gamma=1.0, sigma=-0.5)
    bare = sc.RadialProfile(prof.amplitude, prof.deriv, prof.deriv2, 0.25, 1.0, "c2")
    with pytest.raises(sc.ScenarioError, match="cumulative"):
        sc.radial_vortex(profile=bare)


def test_profile_vortex_tail_and_far_field():
    prof = sc.poly_bump(0.25, 1.0, 2.0)
    scn = sc.radial_vortex(profile=prof)
    mass = float(prof.cumulative(np.asarray(1.0)))
    assert scn.tail_entries[(0, 1)] == 1j * mass
    g = Grid(3.0, 256)
    quad = complex(np.sum(scn.w0(g.nodes()) * g.quad_weights()) / math.pi)
    assert abs(quad - 1j * mass) <= 1e-5  # frozen: 1.1e-6 (C2 lattice error)
    zfar = 3.0 * np.exp(0.37j)
    u_far = complex(scn.u0(np.asarray(zfar)))
    t_far = complex(np.asarray(eval_tail(scn.tail(1), np.asarray([zfar])))[0])
    assert abs(u_far - t_far) <= 1e-14 * abs(u_far)  # frozen: 1.2e-16


def test_profile_vortex_closed_forms_consistent():
    scn = sc.radial_vortex(profile=sc.poly_bump(0.25, 1.0, 2.0))
    pts = ring_points([0.3, 0.6, 0.9, 1.4])
    # frozen: 7.2e-12
    assert sc.wirtinger_consistency(scn, pts) <= 1e-6
    assert local_divergence(scn, pts) <= 1e-6


def test_gaussian_vortex_grid_fd_consistency():
    # the spec-level invariant on a resolving grid; frozen: 2.2e-7 abs
    scn = sc.radial_vortex(gamma=math.pi, sigma=0.7)
    g = Grid(6.0, 512)
    u = scn.sample_velocity(g, n_tail=3, div_tol=1e-2)
    err = float(np.max(np.abs(wirtinger_dz(u).samples - scn.w0(g.nodes()))))
    assert err <= 1e-6
    # divergence-free FD check at the sampling tolerance used downstream
    u256 = scn.sample_velocity(Grid(6.0, 256), n_tail=3, div_tol=1e-6)
    assert u256.divergence_free  # frozen div: 7.5e-7


# --------------------------------------------------------------------------
# composites and shipped presets
# --------------------------------------------------------------------------


def test_composite_validation():
    vort = sc.radial_vortex(gamma=1.0, sigma=0.5)
    with pytest.raises(sc.ScenarioError, match="pair up"):
        sc.composite(0j, [vort], [])
    with pytest.raises(sc.ScenarioError, match="Scenario"):
        sc.composite(0j, [42], [0j])
    carrier = sc.composite(1.0, [], [])
    with pytest.raises(sc.ScenarioError, match="background"):
        sc.composite(0j, [carrier], [0j])


def test_uniform_flow_composite():
    scn = sc.composite(1.0 + 0.0j, [], [])
    z = np.array([0j, 1 + 2j, -3j, 50j])
    assert np.all(scn.u0(z) == 1.0 + 0.0j)
    assert np.all(scn.w0(z) == 0.0)
    assert scn.a03_rate == 0
    assert scn.tail_entries == {}
    assert scn.tail(3).coefficient(0, 0) == 1.0 + 0.0j


def test_preset_vortex_in_uniform_flow():
    scn = sc.vortex_in_uniform_flow()
    assert scn.name == "vortex_in_uniform_flow"
    assert scn.c == 1.0 + 0.5j
    assert scn.support_radius == pytest.approx(4.0)
    assert abs(scn.tail_entries[(0, 1)] - 1j) <= 1e-13
    # uniform part rides on top of the vortex sample
    far = complex(scn.u0(np.asarray(100.0 + 0j)))
    assert abs(far - (1.0 + 0.5j) - 1j / 100.0) <= 1e-12


def test_two_vortex_moments_match_quadrature():
    scn = sc.two_vortex()
    g = Grid(7.0, 256)
    wq = scn.w0(g.nodes()) * g.quad_weights()
    zb = np.conj(g.nodes())
    for k in (1, 2, 3):
        quad = complex(np.sum(wq * zb ** (k - 1)) / math.pi)
        decl = scn.tail_entries[(0, k)]
        assert abs(decl - quad) <= 1e-12  # frozen: <= 1.2e-15


def test_two_vortex_far_consistency():
    scn = sc.two_vortex()
    zfar = np.asarray([100.0 * np.exp(0.31j)])
    u = complex(scn.u0(zfar)[0])
    t = complex(np.asarray(eval_tail(scn.tail(8), zfar))[0])
    assert abs(u - t) <= 1e-12 * abs(u)  # frozen: 3.6e-16


def test_two_vortex_grid_fd_consistency():
    scn = sc.two_vortex()
    g = Grid(6.0, 512)
    u = scn.sample_velocity(g, n_tail=8, div_tol=1e-2)
    err = float(np.max(np.abs(wirtinger_dz(u).samples - scn.w0(g.nodes()))))
    assert err <= 1e-6  # frozen: 2.2e-7


def test_shipped_registry_shape():
    reg = sc.shipped_scenarios()
    assert set(reg) == {
        "uniform",
        "gaussian_sigma05",
        "gaussian_sigma07",
        "vortex_in_uniform_flow",
        "two_vortex",
    }
    for name, scn in reg.items():
        assert isinstance(scn, sc.Scenario)
        assert scn.support_radius < 6.0  # every member fits the sweep box


# --------------------------------------------------------------------------
# random Schwartz-type fields
# --------------------------------------------------------------------------


def test_schwartz_deterministic_per_seed():
    a = sc.random_schwartz(7, 3)
    b = sc.random_schwartz(7, 3)
    assert a.params == b.params
    pts = ring_points([0.3, 0.8, 1.3])
    assert np.array_equal(a.u0(pts), b.u0(pts))
    c = sc.random_schwartz(8, 3)
    assert c.params != a.params


def test_schwartz_validation():
    with pytest.raises(sc.ScenarioError, match="complexity"):
        sc.random_schwartz(1, 0)


def test_schwartz_first_bump_forces_genericity():
    for seed in range(1, 11):
        scn = sc.random_schwartz(seed, 4)
        assert scn.params["bumps"][0]["l"] == 2
        assert scn.b3_exact < 0  # strictly: the l=2 bump contributes -4 pi I


def test_schwartz_b3_quadrature_matches_closed_form():
    scn = sc.random_schwartz(1, 4)
    g = Grid(scn.support_radius + 0.2, 1024)
    u0 = scn.u0(g.nodes())
    b3q = complex(np.sum(np.conj(u0) ** 2 * g.quad_weights()))
    assert abs(b3q - scn.b3_exact) <= 1e-12 * abs(scn.b3_exact)  # frozen: 3.6e-16


def test_schwartz_support_honesty():
    scn = sc.random_schwartz(3, 2)
    outside = ring_points([scn.support_radius + 1e-6, scn.support_radius + 2.0])
    assert np.all(scn.u0(outside) == 0.0)
    assert np.all(scn.w0(outside) == 0.0)


def test_schwartz_closed_forms_consistent():
    scn = sc.random_schwartz(2, 3)
    rng = np.random.default_rng(5)
    centers = [complex(*b["center"]) for b in scn.params["bumps"]]
    pts = np.concatenate(
        [zc + 0.35 * (rng.random(12) - 0.5) + 0.35j * (rng.random(12) - 0.5) for zc in centers]
    )
    # frozen: 2.7e-9 dz, 1.1e-9 divergence
    assert sc.wirtinger_consistency(scn, pts) <= 1e-6
    assert local_divergence(scn, pts) <= 1e-6


# --------------------------------------------------------------------------
# the seeded generator itself
# --------------------------------------------------------------------------


def test_splitmix_seeding_reference_vector():
    # published SplitMix64 vector: first output for seed 0
    gen = sc.Xoshiro256StarStar(0)
    assert gen._s[0] == 0xE220A8397B1DCDAF


def test_xoshiro_reference_sequence():
    gen = sc.Xoshiro256StarStar(1)
    got = [gen.next_u64() for _ in range(4)]
    assert got == [
        12966619160104079557,
        9600361134598540522,
        10590380919521690900,
        7218738570589545383,
    ]
    gen2 = sc.Xoshiro256StarStar(1)
    doubles = [gen2.uniform() for _ in range(4)]
    assert doubles == [
        0.70292183315885048,
        0.52043661993885693,
        0.5741057000197225,
        0.39132860204190445,
    ]


def test_xoshiro_uniform_statistics():
    gen = sc.Xoshiro256StarStar(99)
    draws = np.array([gen.uniform() for _ in range(20000)])
    assert np.all((draws >= 0.0) & (draws < 1.0))
    assert abs(float(draws.mean()) - 0.5) < 0.01  # frozen: 0.4976
    assert gen.uniform_in(2.0, 3.0) >= 2.0

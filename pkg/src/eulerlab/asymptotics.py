"""Exact algebra of truncated large-|z| tail expansions.

A tail is a finite sum sum_{k+l<=N} a_kl / (z^k zbar^l), stored as a dense
coefficient triangle. The module provides evaluation behind a radial cutoff,
term-by-term differentiation, a truncated product, the divergence-free
coefficient constraints, and the group of near-identity maps z -> z + tail
under composition (the star product), together with a sampling-based
composition fit that serves as an independent oracle for star.

Coefficient convention used across the package: index pair (k, l) multiplies
z^{-k} zbar^{-l}.
"""

from __future__ import annotations

# Standard library
import json
from dataclasses import dataclass
from typing import Iterator, Sequence

# Third-party
import numpy as np
from numpy.typing import NDArray

from .complexgrid import cutoff_chi_scaled

ComplexArray = NDArray[np.complex128]

__all__ = [
    "AsymptoticPart",
    "GroupElement",
    "DivergenceReport",
    "CompositionFitResult",
    "add",
    "multiply",
    "differentiate_dz",
    "differentiate_dzbar",
    "check_divergence_free",
    "eval_tail",
    "star",
    "star_inverse",
    "numeric_composition_fit",
    "triangle_to_json_dict",
    "triangle_from_json_dict",
    "write_triangle",
    "read_triangle",
]


@dataclass(frozen=True, eq=False)
class AsymptoticPart:
    """Coefficient triangle of a truncated tail expansion.

    coeffs[k, l] multiplies z^{-k} zbar^{-l}; entries with k+l > N must be
    exactly zero (the array is square for convenience, the triangle is the
    content). R0 scales the evaluation cutoff: the tail is zero inside
    radius R0 and fully on beyond 2*R0.
    """

    N: int
    coeffs: ComplexArray
    R0: float = 1.0

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 0:
            raise ValueError("truncation order N must be an integer >= 0.")
        if not (self.R0 > 0) or not np.isfinite(self.R0):
            raise ValueError("cutoff scale R0 must be positive and finite.")
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.N + 1, self.N + 1):
            raise ValueError(f"coeffs must have shape ({self.N + 1}, {self.N + 1}), got {c.shape}.")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs contain non-finite values.")
        k, l = np.indices(c.shape)
        if np.any(c[k + l > self.N] != 0):
            raise ValueError("coefficients beyond the order-N triangle must be exactly zero.")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, N: int, R0: float = 1.0) -> "AsymptoticPart":
        return cls(N, np.zeros((N + 1, N + 1), dtype=np.complex128), R0)

    @classmethod
    def from_entries(cls, N: int, entries: dict[tuple[int, int], complex], R0: float = 1.0) -> "AsymptoticPart":
        c = np.zeros((N + 1, N + 1), dtype=np.complex128)
        for (k, l), v in entries.items():
            if k < 0 or l < 0:
                raise ValueError(f"negative indices rejected: ({k}, {l}).")
            if k + l > N:
                raise ValueError(f"index ({k}, {l}) outside the order-{N} triangle.")
            c[k, l] = v
        return cls(N, c, R0)

    # -- queries -------------------------------------------------------------

    def coefficient(self, k: int, l: int) -> complex:
        if k < 0 or l < 0:
            raise ValueError(f"negative indices rejected: ({k}, {l}).")
        if k + l > self.N:
            return 0.0 + 0.0j
        return complex(self.coeffs[k, l])

    def nonzero_items(self) -> Iterator[tuple[int, int, complex]]:
        ks, ls = np.nonzero(self.coeffs)
        for k, l in zip(ks.tolist(), ls.tolist()):
            yield k, l, complex(self.coeffs[k, l])

    def leading_index(self) -> int:
        """Smallest k+l carrying a nonzero coefficient; N for the zero tail."""
        best = self.N
        for k, l, _ in self.nonzero_items():
            best = min(best, k + l)
        return best

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    @property
    def triangle_size(self) -> int:
        return (self.N + 1) * (self.N + 2) // 2

    # -- elementwise ops ------------------------------------------------------

    def scaled(self, c: complex) -> "AsymptoticPart":
        return AsymptoticPart(self.N, self.coeffs * c, self.R0)

    def resized(self, N: int) -> "AsymptoticPart":
        """Copy at a new truncation order; entries beyond it are discarded."""
        out = np.zeros((N + 1, N + 1), dtype=np.complex128)
        m = min(N, self.N) + 1
        out[:m, :m] = self.coeffs[:m, :m]
        k, l = np.indices(out.shape)
        out[k + l > N] = 0
        return AsymptoticPart(N, out, self.R0)

    def conj_transpose(self) -> "AsymptoticPart":
        """Triangle of the complex conjugate tail: entry (k,l) <- conj (l,k)."""
        return AsymptoticPart(self.N, np.conj(self.coeffs.T), self.R0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AsymptoticPart):
            return NotImplemented
        return self.N == other.N and self.R0 == other.R0 and bool(np.array_equal(self.coeffs, other.coeffs))


def add(a: AsymptoticPart, b: AsymptoticPart) -> AsymptoticPart:
    """Entrywise sum at order max(N_a, N_b). Cutoff scales must agree."""
    if a.R0 != b.R0:
        raise ValueError("cutoff scales differ.")
    n = max(a.N, b.N)
    c = np.zeros((n + 1, n + 1), dtype=np.complex128)
    c[: a.N + 1, : a.N + 1] += a.coeffs
    c[: b.N + 1, : b.N + 1] += b.coeffs
    return AsymptoticPart(n, c, a.R0)


def multiply(a: AsymptoticPart, b: AsymptoticPart) -> AsymptoticPart:
    """Product of tails, truncated at min(n_a + N_b, n_b + N_a).

    n_x is the computed leading index of x (smallest k+l with a nonzero
    coefficient), so multiplying tails that start at high order keeps more
    terms than the naive min(N_a, N_b) would.
    """
    if a.R0 != b.R0:
        raise ValueError("cutoff scales differ.")
    n_out = min(a.leading_index() + b.N, b.leading_index() + a.N)
    c = np.zeros((n_out + 1, n_out + 1), dtype=np.complex128)
    for k1, l1, v1 in a.nonzero_items():
        for k2, l2, v2 in b.nonzero_items():
            k, l = k1 + k2, l1 + l2
            if k + l <= n_out:
                c[k, l] += v1 * v2
    return AsymptoticPart(n_out, c, a.R0)


def _mul_trunc(a: AsymptoticPart, b: AsymptoticPart, N: int) -> AsymptoticPart:
    # product resized to a fixed working order; used by the star expansion
    return multiply(a, b).resized(N)


def differentiate_dz(a: AsymptoticPart) -> AsymptoticPart:
    """d/dz term by term: (k, l) -> coefficient -k * a_kl at (k+1, l).

    Output order is N+1. The compactly supported correction produced by
    differentiating the cutoff is not representable here; it belongs to grid
    remainders.
    """
    n = a.N + 1
    c = np.zeros((n + 1, n + 1), dtype=np.complex128)
    for k, l, v in a.nonzero_items():
        if k > 0:
            c[k + 1, l] = -k * v
    return AsymptoticPart(n, c, a.R0)


def differentiate_dzbar(a: AsymptoticPart) -> AsymptoticPart:
    """d/dzbar term by term: (k, l) -> coefficient -l * a_kl at (k, l+1)."""
    n = a.N + 1
    c = np.zeros((n + 1, n + 1), dtype=np.complex128)
    for k, l, v in a.nonzero_items():
        if l > 0:
            c[k, l + 1] = -l * v
    return AsymptoticPart(n, c, a.R0)


@dataclass(frozen=True)
class DivergenceReport:
    """Result of the exact divergence-free coefficient test."""

    ok: bool
    violations: tuple[tuple[int, int], ...]


def check_divergence_free(a: AsymptoticPart) -> DivergenceReport:
    """Exact-zero test of the velocity-tail constraints.

    A divergence-free velocity tail has a_k0 = 0 for 1 <= k <= N and
    a_k1 = 0 for 1 <= k <= N-1. The test is exact (no tolerance): these are
    algebraic identities on the coefficients, not numerics.
    """
    bad = []
    for k in range(1, a.N + 1):
        if a.coeffs[k, 0] != 0:
            bad.append((k, 0))
    for k in range(1, a.N):
        if a.coeffs[k, 1] != 0:
            bad.append((k, 1))
    return DivergenceReport(not bad, tuple(bad))


def eval_tail(a: AsymptoticPart, z: complex | ComplexArray) -> complex | ComplexArray:
    """Evaluate chi_{R0}(|z|) * sum a_kl z^{-k} zbar^{-l}.

    Horner-style nested evaluation per row of the triangle. Inside radius R0
    the cutoff is exactly zero, so z = 0 is fine.
    """
    zz = np.asarray(z, dtype=np.complex128)
    scalar = zz.ndim == 0
    zz = np.atleast_1d(zz)
    out = np.zeros_like(zz)
    r = np.abs(zz)
    m = r > a.R0
    if m.any():
        w = zz[m]
        iz = 1.0 / w
        izb = np.conj(iz)
        # rows k = N..0 in an outer Horner over 1/z; each row is an inner
        # Horner over 1/zbar starting at its last in-triangle column
        acc = np.zeros_like(w)
        for k in range(a.N, -1, -1):
            row = np.full_like(w, a.coeffs[k, a.N - k])
            for l in range(a.N - k - 1, -1, -1):
                row = row * izb + a.coeffs[k, l]
            acc = acc * iz + row
        out[m] = np.asarray(cutoff_chi_scaled(r[m], a.R0)) * acc
    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


# ---------------------------------------------------------------------------
# The composition group on tails
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A near-identity map z -> z + tail(z, zbar), identified by its tail.

    The identity element has the zero triangle. Elements compose with star
    and invert with star_inverse; at order N = 0 the group is translation
    addition on the constant coefficient.
    """

    tail: AsymptoticPart

    @property
    def N(self) -> int:
        return self.tail.N

    @property
    def R0(self) -> float:
        return self.tail.R0

    @classmethod
    def identity(cls, N: int, R0: float = 1.0) -> "GroupElement":
        return cls(AsymptoticPart.zero(N, R0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.tail == other.tail


def _shift(a: AsymptoticPart, dk: int, dl: int, N: int) -> AsymptoticPart:
    # entries (k,l) -> (k+dk, l+dl), truncated at order N
    c = np.zeros((N + 1, N + 1), dtype=np.complex128)
    for k, l, v in a.nonzero_items():
        if k + dk + l + dl <= N:
            c[k + dk, l + dl] = v
    return AsymptoticPart(N, c, a.R0)


def _one(N: int, R0: float) -> AsymptoticPart:
    return AsymptoticPart.from_entries(N, {(0, 0): 1.0}, R0)


def _geometric_inverse(v: AsymptoticPart, N: int) -> AsymptoticPart:
    # (1 + v)^{-1} = sum_j (-v)^j; v has leading index >= 1 so the series
    # terminates at j = N in the truncated algebra
    out = _one(N, v.R0)
    term = _one(N, v.R0)
    neg = v.scaled(-1.0)
    for _ in range(N):
        term = _mul_trunc(term, neg, N)
        if term.max_abs() == 0.0:
            break
        out = add(out, term)
    return out


def star(a: GroupElement, b: GroupElement) -> GroupElement:
    """Tail of the composition (z + tail_a) after (z + tail_b).

    Substitutes w = z + tail_b into tail_a(w, wbar), expanding each
    w^{-k} wbar^{-l} = z^{-k} zbar^{-l} (1 + tail_b/z)^{-k} (1 + conj tail_b
    / zbar)^{-l} as terminating geometric series in the truncated algebra,
    then adds tail_b. Terms beyond order N are discarded.

    Parameters
    ----------
    a, b : GroupElement
        Elements at the same truncation order and cutoff scale.

    Returns
    -------
    GroupElement
        The composition, at the common order N.
    """
    if a.N != b.N:
        raise ValueError(f"order mismatch: {a.N} vs {b.N}.")
    if a.R0 != b.R0:
        raise ValueError("cutoff scales differ.")
    N = a.N
    vb = _shift(b.tail, 1, 0, N)                        # tail_b / z
    vbb = _shift(b.tail.conj_transpose(), 0, 1, N)      # conj(tail_b) / zbar
    p1 = _geometric_inverse(vb, N)
    q1 = _geometric_inverse(vbb, N)
    # cached powers p1^k, q1^l up to the largest indices present in a
    pk: list[AsymptoticPart] = [_one(N, a.R0)]
    ql: list[AsymptoticPart] = [_one(N, a.R0)]
    out = b.tail.resized(N)
    for k, l, v in a.tail.nonzero_items():
        while len(pk) <= k:
            pk.append(_mul_trunc(pk[-1], p1, N))
        while len(ql) <= l:
            ql.append(_mul_trunc(ql[-1], q1, N))
        prod = _mul_trunc(pk[k], ql[l], N)
        out = add(out, _shift(prod, k, l, N).scaled(v))
    return GroupElement(out)


def star_inverse(a: GroupElement, tol: float = 1e-13, max_iter: int = 50) -> GroupElement:
    """Two-sided star inverse by fixed-point iteration.

    Iterates x <- x - (x * a - e) from the negated triangle. Each sweep
    corrects one further order (the cross terms of the composition raise
    order strictly), so N+1 sweeps suffice; the loop stops early when the
    residual of x * a against the identity drops below tol.

    Raises
    ------
    RuntimeError
        If the residual still exceeds tol after max_iter sweeps.
    """
    x = GroupElement(a.tail.scaled(-1.0))
    residual = np.inf
    for _ in range(max_iter):
        r = star(x, a).tail
        residual = r.max_abs()
        if residual < tol:
            return x
        x = GroupElement(add(x.tail, r.scaled(-1.0)).resized(a.N))
    raise RuntimeError(f"star_inverse did not converge: residual {residual:.3e} after {max_iter} sweeps.")


@dataclass(frozen=True)
class CompositionFitResult:
    """Least-squares composition fit plus its quality diagnostics."""

    element: GroupElement
    residual: float   # max |fitted - sampled| over the sample points
    condition: float  # singular-value ratio of the equilibrated design matrix


def numeric_composition_fit(
    phi: GroupElement,
    psi: GroupElement,
    radii: Sequence[float] = (128.0, 160.0, 200.0, 256.0, 320.0, 400.0, 512.0),
    samples_per_circle: int = 0,
) -> CompositionFitResult:
    """Sampling oracle for star: fit the composed map's tail from values.

    Evaluates the composed displacement tail_psi(z) + tail_phi(z + tail_psi)
    on circles far enough out that the cutoff is identically 1 (the two-term
    form equals image - z but never forms the cancellation-prone sum z +
    tails), then least-squares fits the z^{-k} zbar^{-l} triangle basis. The
    fit basis extends four orders past N so that genuine higher-order content
    of the composition lands in discarded columns instead of biasing the kept
    ones; columns are norm-equilibrated before solving. With the default
    radii the recovered coefficients of unit-scale order-3 elements match the
    exact expansion to a few 1e-9.

    Parameters
    ----------
    phi, psi : GroupElement
        Maps to compose (phi after psi). Same order and cutoff scale.
    radii : sequence of float
        Distinct circle radii, each >= 4 * R0; at least max(3, (N+4)//2 + 1)
        of them so that same-angular-order basis columns stay separable.
        The defaults suit R0 <= 32 and N <= 8.
    samples_per_circle : int
        Angles per circle; 0 picks the minimum 8 * (N + 1).

    Returns
    -------
    CompositionFitResult
        Fitted element at order N, max sample residual, and the condition
        number of the equilibrated design matrix.

    Raises
    ------
    RuntimeError
        If the design matrix condition exceeds 1e10.
    """
    if phi.N != psi.N:
        raise ValueError(f"order mismatch: {phi.N} vs {psi.N}.")
    if phi.R0 != psi.R0:
        raise ValueError("cutoff scales differ.")
    N, r0 = phi.N, phi.R0
    rr = sorted(set(float(r) for r in radii))
    n_fit = N + 4
    # basis columns with equal k - l share their angular factor and differ
    # only in radial powers, so the circles must outnumber the largest such
    # family or the design matrix is exactly rank-deficient
    need = max(3, n_fit // 2 + 1)
    if len(rr) < need:
        raise ValueError(f"need at least {need} distinct radii at order {N}.")
    if rr[0] < 4.0 * r0:
        raise ValueError(f"radii must be >= 4*R0 = {4.0 * r0}.")
    # angles must clear both the contract minimum and the fit-basis angular
    # bandwidth (frequencies k-l span [-n_fit, n_fit]; fewer samples alias
    # the +/- n_fit columns into each other)
    m_min = max(8 * (N + 1), 2 * n_fit + 2)
    m = samples_per_circle if samples_per_circle else m_min
    if m < m_min:
        raise ValueError(f"need at least {m_min} samples per circle at order {N}.")

    theta = 2.0 * np.pi * np.arange(m) / m
    ring = np.exp(1j * theta)
    z = np.concatenate([r * ring for r in rr])
    t_inner = eval_tail(psi.tail, z)
    target = t_inner + eval_tail(phi.tail, z + t_inner)

    pairs = [(k, l) for k in range(n_fit + 1) for l in range(n_fit + 1 - k)]
    cols = np.stack([z ** (-k) * np.conj(z) ** (-l) for k, l in pairs], axis=1)
    scale = np.linalg.norm(cols, axis=0)
    sol, _, _, sv = np.linalg.lstsq(cols / scale, target, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > 1e10:
        raise RuntimeError(f"composition fit is ill-conditioned: condition {cond:.3e} > 1e10.")
    sol = sol / scale
    residual = float(np.max(np.abs(cols @ sol - target)))

    tri = np.zeros((N + 1, N + 1), dtype=np.complex128)
    for (k, l), v in zip(pairs, sol):
        if k + l <= N:
            tri[k, l] = v
    return CompositionFitResult(GroupElement(AsymptoticPart(N, tri, r0)), residual, cond)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def triangle_to_json_dict(a: AsymptoticPart) -> dict:
    """JSON form: {"N", "coeffs": [{"k","l","re","im"}...], "R0"}; zeros omitted."""
    items = sorted(a.nonzero_items(), key=lambda t: (t[0] + t[1], t[0]))
    return {
        "N": a.N,
        "coeffs": [{"k": k, "l": l, "re": v.real, "im": v.imag} for k, l, v in items],
        "R0": a.R0,
    }


def triangle_from_json_dict(d: dict) -> AsymptoticPart:
    entries = {(int(e["k"]), int(e["l"])): complex(float(e["re"]), float(e["im"])) for e in d["coeffs"]}
    return AsymptoticPart.from_entries(int(d["N"]), entries, float(d.get("R0", 1.0)))


def write_triangle(a: AsymptoticPart, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(triangle_to_json_dict(a), fh, indent=1)
        fh.write("\n")


def read_triangle(path: str) -> AsymptoticPart:
    with open(path) as fh:
        return triangle_from_json_dict(json.load(fh))

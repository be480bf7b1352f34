"""Hessenberg polynomial machinery, eigenstructure checks and certification."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NotUnreduced, SimplicityUnverifiable
from .legendre import gauss_legendre_nodes, gauss_lobatto_interior_nodes
from .models import Variant, as_variant, coefficient_matrices, matrix_forms
from .state import PrimitiveState

MONOMIAL_LIMIT = 30
RANK_TOL = 1e-9
COMPLEX_TOL = 1e-9
GAP_TOL = 1e-8
CLUSTER_TOL = 1e-6


def inf_norm(M):
    return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0


@dataclass(frozen=True, eq=False)
class HessenbergView:
    entries: np.ndarray
    tol: float = 1e-13

    def __post_init__(self):
        E = np.asarray(self.entries, dtype=float)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise ValueError("expected a square matrix")
        scale = max(inf_norm(E), 1.0)
        if np.any(np.abs(np.triu(E, 2)) > self.tol * scale):
            raise ValueError("matrix is not lower Hessenberg")
        object.__setattr__(self, "entries", E)

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def superdiag_nonzero(self):
        sup = np.abs(np.diag(self.entries, 1))
        return sup > self.tol * max(inf_norm(self.entries), 1.0)

    @property
    def unreduced(self):
        return bool(np.all(self.superdiag_nonzero))

    @property
    def rho(self):
        return float(np.prod(np.diag(self.entries, 1)))


@dataclass(frozen=True, eq=False)
class PolySequence:
    """q_0 .. q_n of a lower Hessenberg matrix.

    Monomial coefficients (lowest degree first) are kept for n <= 30; beyond
    that only evaluation by the recurrence is offered.
    """

    H: HessenbergView
    coeffs: tuple = None

    @property
    def n(self):
        return self.H.n

    def evaluate(self, x):
        """Array of shape (n+1, len(x)) with q_i(x) for i = 0..n."""
        A = self.H.entries
        n = self.n
        x = np.atleast_1d(np.asarray(x, dtype=float))
        q = np.empty((n + 1, x.size))
        q[0] = 1.0
        for i in range(1, n + 1):
            acc = x * q[i - 1] - A[i - 1, :i] @ q[:i]
            sup = A[i - 1, i] if i < n else 1.0
            q[i] = acc / sup
        return q

    def __getitem__(self, i):
        if self.coeffs is None:
            raise ValueError("monomial coefficients are only kept for n <= 30")
        return self.coeffs[i]


def associated_polynomials(H):
    if not isinstance(H, HessenbergView):
        H = HessenbergView(H)
    if not H.unreduced:
        raise NotUnreduced("a superdiagonal entry vanishes")
    coeffs = None
    if H.n <= MONOMIAL_LIMIT:
        A = H.entries
        n = H.n
        qs = [np.array([1.0])]
        for i in range(1, n + 1):
            acc = np.concatenate(([0.0], qs[i - 1]))
            for j in range(1, i + 1):
                acc[: j] -= A[i - 1, j - 1] * qs[j - 1]
            sup = A[i - 1, i] if i < n else 1.0
            qs.append(acc / sup)
        coeffs = tuple(qs)
    return PolySequence(H, coeffs)


def char_poly_hessenberg(H, fallback=False):
    """rho * q_n as monomial coefficients (lowest degree first)."""
    seq = associated_polynomials(H)
    H = seq.H
    if seq.coeffs is None:
        raise ValueError("use PolySequence.evaluate for n > 30")
    poly = H.rho * seq.coeffs[-1]
    roots = np.roots(poly[::-1])
    if roots.size > 1:
        d = np.abs(roots[:, None] - roots[None, :])
        d[np.diag_indices_from(d)] = np.inf
        if d.min() < 1e-10 * max(1.0, np.abs(roots).max()):
            if fallback:
                return np.poly(H.entries)[::-1]
            raise SimplicityUnverifiable("roots of q_n are not separated")
    return poly


def char_poly_values(H, x):
    """rho * q_n(x) by the recurrence (valid for any size)."""
    seq = associated_polynomials(H)
    return seq.H.rho * seq.evaluate(x)[-1]


# -- spectra ----------------------------------------------------------------

@dataclass
class NumericEigen:
    values: np.ndarray
    algebraic: np.ndarray
    geometric: np.ndarray
    raw: np.ndarray
    complex_detected: bool
    min_gap: float


def _geometric(M, lam, tol):
    R = scipy.linalg.qr(M - lam * np.eye(M.shape[0]), mode="r", pivoting=True)[0]
    rank = int(np.sum(np.abs(np.diag(R)) > tol))
    return M.shape[0] - rank


def numeric_eigen(M):
    """Eigenvalues with algebraic and geometric multiplicities of a real matrix."""
    M = np.asarray(M, dtype=float)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    norm = max(inf_norm(M), 1e-300)
    is_complex = bool(np.any(np.abs(ev.imag) > COMPLEX_TOL * norm))
    if is_complex:
        order = np.lexsort((ev.imag, ev.real))
        return NumericEigen(ev[order], np.ones(ev.size, int), np.ones(ev.size, int), ev[order], True, 0.0)
    lam = np.sort(ev.real)
    rad = float(np.abs(lam).max()) if lam.size else 0.0
    tol = RANK_TOL * norm
    clusters, start = [], 0
    for i in range(1, lam.size + 1):
        if i == lam.size or lam[i] - lam[i - 1] > CLUSTER_TOL * (1.0 + rad):
            clusters.append(lam[start:i])
            start = i
    values, alg, geo = [], [], []
    for c in clusters:
        if c.size == 1:
            values.append(c[0]); alg.append(1); geo.append(1)
            continue
        mean = float(c.mean())
        g = _geometric(M, mean, tol)
        if g >= 1:
            values.append(mean); alg.append(c.size); geo.append(min(g, c.size))
        else:
            # close but distinct eigenvalues
            for x in c:
                values.append(float(x)); alg.append(1); geo.append(1)
    values = np.array(values)
    gap = float(np.diff(values).min()) if values.size > 1 else np.inf
    return NumericEigen(values, np.array(alg), np.array(geo), lam, False, gap)


class Classification(str, Enum):
    HYPERBOLIC = "Hyperbolic"
    WEAK = "WeaklyHyperbolic"
    NON = "NonHyperbolic"


def classify(eig):
    if eig.complex_detected:
        return Classification.NON
    if np.all(eig.geometric == eig.algebraic):
        return Classification.HYPERBOLIC
    return Classification.WEAK


@dataclass
class SpectralReport:
    theta: float
    direction: tuple
    eigenvalues: np.ndarray
    algebraic: np.ndarray
    geometric: np.ndarray
    classification: Classification
    complex_detected: bool
    min_gap: float
    spectral_radius: float
    rotation_deviation: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def distinct(self):
        return bool(self.min_gap > GAP_TOL * (1.0 + self.spectral_radius))

    def to_text(self):
        ev = " ".join(f"{complex(v).real:.12g}" + (f"{complex(v).imag:+.3g}j" if abs(complex(v).imag) > 0 else "")
                      for v in self.eigenvalues)
        mult = " ".join(f"{a}/{g}" for a, g in zip(self.algebraic, self.geometric))
        return (f"theta={self.theta:.6f} class={self.classification.value} "
                f"min_gap={self.min_gap:.3e} rot_dev={self.rotation_deviation:.2e}\n"
                f"  eigenvalues: {ev}\n  alg/geo: {mult}")


def report_from_matrix(M, theta=0.0):
    eig = numeric_eigen(M)
    rad = float(np.abs(eig.raw).max()) if eig.raw.size else 0.0
    return SpectralReport(float(theta), (float(np.cos(theta)), float(np.sin(theta))),
                          eig.values, eig.algebraic, eig.geometric, classify(eig),
                          eig.complex_detected, eig.min_gap, rad)


def rotation_matrix(theta, N):
    c, s = np.cos(theta), np.sin(theta)
    T = np.eye(2 * N + 3)
    for b in range(N + 1):
        i = 1 + 2 * b
        T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1] = c, s, -s, c
    return T


def rotate_state(V, theta):
    T2 = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
    w = V.w().reshape(-1, 2) @ T2.T
    return PrimitiveState.from_w(V.h, w.ravel(), V.g)


def invariance_residual(V, variant, theta, matrices=None):
    """max of the two rotation identities, in the induced infinity norm."""
    mats = matrices or (lambda s: coefficient_matrices(s, variant))
    A, B = mats(V)
    Ar, Br = mats(rotate_state(V, theta))
    T = rotation_matrix(theta, V.N)
    c, s = np.cos(theta), np.sin(theta)
    r1 = inf_norm(c * A + s * B - T.T @ Ar @ T)
    r2 = inf_norm(-s * A + c * B - T.T @ Br @ T)
    return max(r1, r2)


def certify_hyperbolicity(V, variant, n_directions=64, extra_angles=(0.0, np.pi / 2, np.pi / 4)):
    variant = as_variant(variant)
    angles = [2 * np.pi * k / n_directions for k in range(n_directions)]
    angles += [a for a in extra_angles if not any(np.isclose(a, b) for b in angles)]
    A, B = coefficient_matrices(V, variant)
    reports = []
    for th in angles:
        rep = report_from_matrix(np.cos(th) * A + np.sin(th) * B, th)
        Ax = coefficient_matrices(rotate_state(V, th), variant)[0]
        ref = report_from_matrix(Ax, 0.0)
        rep.rotation_deviation = _spectrum_distance(rep, ref)
        if rep.rotation_deviation > 1e-9 * (1.0 + rep.spectral_radius):
            rep.notes.append("rotated-state spectrum differs")
        reports.append(rep)
    return reports


def _spectrum_distance(a, b):
    if a.complex_detected or b.complex_detected:
        x, y = np.sort_complex(np.asarray(a.eigenvalues, complex)), np.sort_complex(np.asarray(b.eigenvalues, complex))
        return float(np.abs(x - y).max()) if x.size == y.size else np.inf
    x = np.repeat(a.eigenvalues, a.algebraic)
    y = np.repeat(b.eigenvalues, b.algebraic)
    if x.size != y.size:
        return np.inf
    return float(np.abs(np.sort(x) - np.sort(y)).max())


# -- analytic spectra -------------------------------------------------------

def _variant_nodes(tag, N):
    """(Ã11 nodes, Ã22 nodes) in units of alpha_1, or None if not closed form."""
    if N == 1 and tag is not Variant.CUSTOM:
        tag = Variant.HSWME
    if tag is Variant.HSWME:
        return gauss_lobatto_interior_nodes(N + 1), gauss_legendre_nodes(N + 1)
    if tag is Variant.BETA:
        return gauss_legendre_nodes(N), gauss_legendre_nodes(N + 1)
    if tag is Variant.EXAMPLE:
        return gauss_lobatto_interior_nodes(N + 1), gauss_lobatto_interior_nodes(N + 2)
    return None


def analytic_eigenvalues(variant, V, theta=0.0):
    """Closed-form sorted spectrum in direction theta, or None when unavailable."""
    variant = as_variant(variant)
    nodes = _variant_nodes(variant.tag, V.N)
    if nodes is None:
        return None
    if theta:
        V = rotate_state(V, theta)
    u, a = V.um, V.alpha[0]
    N = V.N
    if a == 0.0:
        c = np.sqrt(V.g * V.h)
        return np.sort(np.concatenate(([u - c, u + c], np.full(2 * N + 1, u))))
    c = np.sqrt(V.g * V.h + a * a)
    vals = np.concatenate(([u - c, u + c], u + nodes[0] * a, u + nodes[1] * a))
    return np.sort(vals)


def speed_nodes(variant, N):
    """max |node| for the wave-speed bound |u| + max(sqrt(gh + a^2), max|node| |a|).

    Returns None when no closed form exists and speeds must be computed
    numerically.
    """
    variant = as_variant(variant)
    if variant.tag is Variant.SWME and N >= 2:
        return None
    if variant.tag is Variant.CUSTOM:
        return None
    nodes = _variant_nodes(variant.tag, N)
    if nodes is not None:
        return float(max(np.abs(nodes[0]).max(initial=0.0), np.abs(nodes[1]).max(initial=0.0)))
    # globally hyperbolic: Ã11 as for HSWME, Ã22 from its coefficient matrix
    from .blocks import global_tables, table_matrix

    K22 = table_matrix(global_tables(N)[1], N, 0.0, 1.0)
    ev = np.linalg.eigvals(K22)
    return float(max(np.abs(ev).max(), np.abs(gauss_lobatto_interior_nodes(N + 1)).max()))

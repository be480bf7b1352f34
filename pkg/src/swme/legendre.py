"""Legendre polynomials, quadrature nodes and the moment-constant tensors."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedOrder, ConvergenceFailure

_NEWTON_TOL = 1e-14
_MAX_NEWTON = 100


def legendre_table(nmax, x):
    """Rows P_0(x) .. P_nmax(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_deriv_table(nmax, x):
    """Rows P_0'(x) .. P_nmax'(x) using P'_{n+1} = P'_{n-1} + (2n+1) P_n."""
    x = np.asarray(x, dtype=float)
    p = legendre_table(max(nmax, 1), x)
    out = np.zeros((nmax + 1,) + x.shape)
    if nmax >= 1:
        out[1] = 1.0
    for n in range(1, nmax):
        out[n + 1] = out[n - 1] + (2 * n + 1) * p[n]
    return out


def legendre_eval(n, x):
    if n < 0:
        raise ValueError("degree must be non-negative")
    val = legendre_table(n, x)[n]
    return float(val) if np.ndim(val) == 0 else val


def legendre_deriv_eval(n, x):
    if n < 0:
        raise ValueError("degree must be non-negative")
    val = legendre_deriv_table(n, x)[n]
    return float(val) if np.ndim(val) == 0 else val


def scaled_basis_eval(j, zeta):
    """phi_j(zeta) = P_j(1 - 2 zeta): orthogonal on [0, 1] with phi_j(0) = 1."""
    if j < 1:
        raise ValueError("basis index starts at 1")
    return legendre_eval(j, 1.0 - 2.0 * np.asarray(zeta, dtype=float))


def _safeguarded_newton(f, df, x0, lo, hi):
    """Vectorised Newton with bisection fallback inside sign-changing brackets."""
    x = x0.copy()
    lo, hi = lo.copy(), hi.copy()
    flo = f(lo)
    for _ in range(_MAX_NEWTON):
        fx = f(x)
        same = np.sign(fx) == np.sign(flo)
        lo = np.where(same, x, lo)
        flo = np.where(same, fx, flo)
        hi = np.where(same, hi, x)
        xn = x - fx / df(x)
        bad = ~np.isfinite(xn) | (xn < lo) | (xn > hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = (np.abs(fx) <= _NEWTON_TOL) | (~bad & (np.abs(xn - x) <= _NEWTON_TOL * (1.0 + np.abs(x))))
        x = np.where(np.abs(fx) <= _NEWTON_TOL, x, xn)
        if np.all(done):
            return x
    if np.all(np.abs(f(x)) <= 1e-10 * (1.0 + np.abs(df(x)))):
        return x
    raise ConvergenceFailure("root iteration did not converge")


@lru_cache(maxsize=None)
def _gl_nodes(n):
    if n == 1:
        return np.array([0.0])
    k = np.arange(1, n + 1)
    # Chebyshev-like guesses inside the classical angular root bounds
    guess = -np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    lo = -np.cos(np.pi * (k - 0.5) / (n + 0.5))
    hi = -np.cos(np.pi * k / (n + 0.5))
    f = lambda x: legendre_table(n, x)[n]
    df = lambda x: legendre_deriv_table(n, x)[n]
    if not np.all(np.sign(f(lo)) != np.sign(f(hi))):
        lo, hi = _scan_brackets(f, n)
        guess = 0.5 * (lo + hi)
    roots = _safeguarded_newton(f, df, guess, lo, hi)
    roots = np.sort(roots)
    return 0.5 * (roots - roots[::-1])


def _scan_brackets(f, count):
    grid = -np.cos(np.linspace(0.0, np.pi, 64 * count + 1))
    vals = f(grid)
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size != count:
        raise ConvergenceFailure("could not bracket the requested roots")
    return grid[idx], grid[idx + 1]


def gauss_legendre_nodes(n):
    """Roots of P_n, ascending."""
    if n < 1:
        raise ValueError("need at least one node")
    return _gl_nodes(int(n)).copy()


@lru_cache(maxsize=None)
def _lobatto_interior(n):
    if n == 2:
        return np.array([0.0])
    gl = _gl_nodes(n)
    lo, hi = gl[:-1].copy(), gl[1:].copy()
    f = lambda x: legendre_deriv_table(n, x)[n]

    def df(x):
        p = legendre_table(n, x)[n]
        return (2.0 * x * f(x) - n * (n + 1) * p) / (1.0 - x * x)

    roots = np.sort(_safeguarded_newton(f, df, 0.5 * (lo + hi), lo, hi))
    return 0.5 * (roots - roots[::-1])


def gauss_lobatto_interior_nodes(n):
    """Roots of P_n', ascending (the interior Gauss-Lobatto points)."""
    if n < 2:
        raise ValueError("P_n' has no roots for n < 2")
    return _lobatto_interior(int(n)).copy()


def gauss_legendre_weights(n):
    x = _gl_nodes(int(n))
    dp = legendre_deriv_table(n, x)[n]
    return 2.0 / ((1.0 - x * x) * dp * dp)


@dataclass(frozen=True)
class PolyBasisSpec:
    order_N: int

    def __post_init__(self):
        if int(self.order_N) != self.order_N or self.order_N < 1:
            raise UnsupportedOrder(f"order must be a positive integer, got {self.order_N!r}")


@dataclass(frozen=True, eq=False)
class MomentConstants:
    """A[i,j,k], B[i,j,k], C[i,j] with 0-based storage of moments 1..N."""

    N: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


def _quadrature01(m):
    x = gauss_legendre_nodes(m)
    w = gauss_legendre_weights(m)
    return 0.5 * (1.0 - x), 0.5 * w


@lru_cache(maxsize=None)
def _moment_constants(N):
    m = -(-(3 * N + 2) // 2)
    zeta, w = _quadrature01(m)
    x = 1.0 - 2.0 * zeta
    P = legendre_table(N + 1, x)
    dP = legendre_deriv_table(N, x)
    idx = np.arange(1, N + 1)
    phi = P[1:N + 1]
    dphi = -2.0 * dP[1:N + 1]
    # int_0^zeta phi_j = -(P_{j+1}(x) - P_{j-1}(x)) / (2(2j+1))
    anti = -(P[2:N + 2] - P[0:N]) / (2.0 * (2 * idx + 1))[:, None]
    scale = (2 * idx + 1).astype(float)
    A = scale[:, None, None] * np.einsum("q,iq,jq,kq->ijk", w, phi, phi, phi)
    B = scale[:, None, None] * np.einsum("q,iq,jq,kq->ijk", w, dphi, anti, phi)
    C = np.einsum("q,iq,jq->ij", w, dphi, dphi)
    for arr in (A, B, C):
        arr.setflags(write=False)
    return MomentConstants(N, A, B, C)


def compute_moment_constants(spec):
    if isinstance(spec, int):
        spec = PolyBasisSpec(spec)
    return _moment_constants(spec.order_N)

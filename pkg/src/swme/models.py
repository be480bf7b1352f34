"""Fluxes, coefficient matrices and source terms for every model variant.

Every coefficient matrix M(U) of the family has the same algebraic shape in
terms of the primitive vector w and the depth h:

    M = E + sum_k w_k L_k + first column (sum_kl q_kl w_k w_l + g h e_p)

so each variant and direction is stored once as sparse coefficient lists
(a ``MatrixForm``) and evaluated by numpy here or by the compiled kernels.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import blocks
from .errors import NonPositiveDepth, UnsupportedOrder
from .legendre import compute_moment_constants
from .state import PrimitiveState, SourceParams, n_vars

_DROP = 1e-13


class Variant(str, Enum):
    SWME = "SWME"
    HSWME = "HSWME"
    BETA = "BetaHSWME"
    GLOBAL = "GloballyHyperbolic"
    EXAMPLE = "GeneralClosureExample"
    CUSTOM = "Custom"


_ALIASES = {
    "swme": Variant.SWME,
    "hswme": Variant.HSWME,
    "betahswme": Variant.BETA, "beta": Variant.BETA, "beta-hswme": Variant.BETA,
    "globallyhyperbolic": Variant.GLOBAL, "global": Variant.GLOBAL,
    "generalclosureexample": Variant.EXAMPLE, "example": Variant.EXAMPLE,
    "custom": Variant.CUSTOM,
}

CLOSED_FORM_VARIANTS = (Variant.SWME, Variant.HSWME, Variant.BETA, Variant.GLOBAL, Variant.EXAMPLE)


@dataclass(frozen=True)
class ModelVariant:
    tag: Variant
    payload: blocks.ClosureSpec = None

    def __post_init__(self):
        object.__setattr__(self, "tag", Variant(self.tag))
        if self.tag is Variant.CUSTOM and self.payload is None:
            raise ValueError("a custom variant needs a closure payload")

    @classmethod
    def parse(cls, name):
        if isinstance(name, ModelVariant):
            return name
        if isinstance(name, Variant):
            return cls(name)
        key = str(name).strip().lower().replace("_", "")
        if key not in _ALIASES:
            raise ValueError(f"unknown model variant {name!r}")
        return cls(_ALIASES[key])

    @property
    def name(self):
        return self.tag.value


def as_variant(v):
    return ModelVariant.parse(v)


# -- sparse matrix forms ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixForm:
    n: int
    const_r: np.ndarray
    const_c: np.ndarray
    const_v: np.ndarray
    lin_r: np.ndarray
    lin_c: np.ndarray
    lin_k: np.ndarray
    lin_v: np.ndarray
    quad_r: np.ndarray
    quad_k: np.ndarray
    quad_l: np.ndarray
    quad_v: np.ndarray
    grav_row: int  # -1 when the form has no pressure term

    @classmethod
    def build(cls, n, const, lin, quad, grav_row):
        acc_c, acc_l, acc_q = {}, {}, {}
        for r, c, v in const:
            acc_c[r, c] = acc_c.get((r, c), 0) + v
        for r, c, k, v in lin:
            acc_l[r, c, k] = acc_l.get((r, c, k), 0) + v
        for r, k, l, v in quad:
            k, l = min(k, l), max(k, l)
            acc_q[r, k, l] = acc_q.get((r, k, l), 0) + v

        def pack(acc, width):
            keys = [key for key in sorted(acc) if abs(float(acc[key])) > _DROP]
            cols = [np.array([key[i] for key in keys], dtype=np.int64) for i in range(width)]
            vals = np.array([float(acc[key]) for key in keys], dtype=float)
            return cols + [vals]

        cr, cc, cv = pack(acc_c, 2)
        lr, lc, lk, lv = pack(acc_l, 3)
        qr, qk, ql, qv = pack(acc_q, 3)
        return cls(n, cr, cc, cv, lr, lc, lk, lv, qr, qk, ql, qv, int(grav_row))

    def truncated(self, max_w):
        """Drop every term involving primitive components beyond index max_w."""
        keep_l = self.lin_k <= max_w
        keep_q = (self.quad_k <= max_w) & (self.quad_l <= max_w)
        return MatrixForm(self.n, self.const_r, self.const_c, self.const_v,
                          self.lin_r[keep_l], self.lin_c[keep_l], self.lin_k[keep_l], self.lin_v[keep_l],
                          self.quad_r[keep_q], self.quad_k[keep_q], self.quad_l[keep_q], self.quad_v[keep_q],
                          self.grav_row)

    def evaluate(self, w, h, g):
        M = np.zeros((self.n, self.n))
        M[self.const_r, self.const_c] = self.const_v
        np.add.at(M, (self.lin_r, self.lin_c), self.lin_v * w[self.lin_k])
        np.add.at(M[:, 0], self.quad_r, self.quad_v * w[self.quad_k] * w[self.quad_l])
        if self.grav_row >= 0:
            M[self.grav_row, 0] += g * h
        return M

    def evaluate_batch(self, w, h, g):
        """Stack of matrices for w of shape (F, n-1) and h of shape (F,)."""
        F = w.shape[0]
        flat = np.zeros((F, self.n * self.n))
        flat[:, self.const_r * self.n + self.const_c] = self.const_v
        lin = self.lin_v * w[:, self.lin_k]
        quad = self.quad_v * w[:, self.quad_k] * w[:, self.quad_l]
        flat += lin @ _scatter(self.lin_r * self.n + self.lin_c, self.n * self.n)
        flat += quad @ _scatter(self.quad_r * self.n, self.n * self.n)
        if self.grav_row >= 0:
            flat[:, self.grav_row * self.n] += g * h
        return flat.reshape(F, self.n, self.n)

    def as_arrays(self):
        return (self.const_r, self.const_c, self.const_v,
                self.lin_r, self.lin_c, self.lin_k, self.lin_v,
                self.quad_r, self.quad_k, self.quad_l, self.quad_v)


def _scatter(target, width):
    S = np.zeros((target.size, width))
    S[np.arange(target.size), target] = 1.0
    return S


# -- SWME building blocks --------------------------------------------------

def _wa(i):
    return 2 * i


def _wb(i):
    return 2 * i + 1


def _flux_quadratics(N, direction):
    """Q_r(w) with F_r = h Q_r(w) (+ pressure); list of (r, k, l, coef)."""
    K = compute_moment_constants(N)
    Q = []
    moments = range(1, N + 1)
    if direction == "x":
        Q.append((1, 0, 0, 1.0))
        Q.append((2, 0, 1, 1.0))
        for j in moments:
            Q.append((1, _wa(j), _wa(j), 1.0 / (2 * j + 1)))
            Q.append((2, _wa(j), _wb(j), 1.0 / (2 * j + 1)))
        for i in moments:
            ra, rb = 1 + 2 * i, 2 + 2 * i
            Q.append((ra, 0, _wa(i), 2.0))
            Q.append((rb, 0, _wb(i), 1.0))
            Q.append((rb, 1, _wa(i), 1.0))
            for j in moments:
                for k in moments:
                    Q.append((ra, _wa(j), _wa(k), K.A[i - 1, j - 1, k - 1]))
                    Q.append((rb, _wa(j), _wb(k), K.A[i - 1, j - 1, k - 1]))
    else:
        Q.append((1, 0, 1, 1.0))
        Q.append((2, 1, 1, 1.0))
        for j in moments:
            Q.append((1, _wa(j), _wb(j), 1.0 / (2 * j + 1)))
            Q.append((2, _wb(j), _wb(j), 1.0 / (2 * j + 1)))
        for i in moments:
            ra, rb = 1 + 2 * i, 2 + 2 * i
            Q.append((ra, 0, _wb(i), 1.0))
            Q.append((ra, 1, _wa(i), 1.0))
            Q.append((rb, 1, _wb(i), 2.0))
            for j in moments:
                for k in moments:
                    Q.append((ra, _wa(j), _wb(k), K.A[i - 1, j - 1, k - 1]))
                    Q.append((rb, _wb(j), _wb(k), K.A[i - 1, j - 1, k - 1]))
    return Q


def _pressure_row(direction):
    return 1 if direction == "x" else 2


def _flux_form(N, direction):
    Q = _flux_quadratics(N, direction)
    lin, quad = [], []
    for r, k, l, c in Q:
        # d(h Q)/d(hw_m) = dQ/dw_m ; d(h Q)/dh = Q - w.grad Q = -Q (Q quadratic)
        lin.append((r, k + 1, l, c))
        lin.append((r, l + 1, k, c))
        quad.append((r, k, l, -c))
    const = [(0, 1 if direction == "x" else 2, 1.0)]
    return MatrixForm.build(n_vars(N), const, lin, quad, _pressure_row(direction))


def _nonconservative_form(N, direction):
    K = compute_moment_constants(N)
    lin = []
    for i in range(1, N + 1):
        ra, rb = 1 + 2 * i, 2 + 2 * i
        col_i = ra if direction == "x" else rb
        lin.append((ra, col_i, 0, -1.0))
        lin.append((rb, col_i, 1, -1.0))
        for j in range(1, N + 1):
            col_j = 1 + 2 * j if direction == "x" else 2 + 2 * j
            for k in range(1, N + 1):
                b = K.B[i - 1, j - 1, k - 1]
                lin.append((ra, col_j, _wa(k), b))
                lin.append((rb, col_j, _wb(k), b))
    return MatrixForm.build(n_vars(N), [], lin, [], -1)


def _merge(f1, f2):
    const = list(zip(f1.const_r, f1.const_c, f1.const_v)) + list(zip(f2.const_r, f2.const_c, f2.const_v))
    lin = (list(zip(f1.lin_r, f1.lin_c, f1.lin_k, f1.lin_v))
           + list(zip(f2.lin_r, f2.lin_c, f2.lin_k, f2.lin_v)))
    quad = (list(zip(f1.quad_r, f1.quad_k, f1.quad_l, f1.quad_v))
            + list(zip(f2.quad_r, f2.quad_k, f2.quad_l, f2.quad_v)))
    return MatrixForm.build(f1.n, [tuple(map(_py, e)) for e in const],
                            [tuple(map(_py, e)) for e in lin],
                            [tuple(map(_py, e)) for e in quad], f1.grav_row)


def _py(x):
    return x.item() if hasattr(x, "item") else x


@lru_cache(maxsize=None)
def flux_jacobian_forms(N):
    return _flux_form(N, "x"), _flux_form(N, "y")


@lru_cache(maxsize=None)
def nonconservative_forms(N):
    return _nonconservative_form(N, "x"), _nonconservative_form(N, "y")


@lru_cache(maxsize=None)
def _swme_forms(N):
    fx, fy = flux_jacobian_forms(N)
    px, py = nonconservative_forms(N)
    return _merge(fx, px), _merge(fy, py)


@lru_cache(maxsize=None)
def _hswme_forms(N):
    ax, ay = _swme_forms(N)
    return ax.truncated(3), ay.truncated(3)


def _table_forms(N, K11, K22, k2=Fraction(2, 3)):
    n = n_vars(N)
    A_lin, B_lin = blocks.directional_entries(K11, K22)
    qx, qy = blocks.first_columns(k2)
    qx = [e for e in qx if e[0] < n]
    qy = [e for e in qy if e[0] < n]
    fx = MatrixForm.build(n, [(0, 1, 1.0)], A_lin, qx, 1)
    fy = MatrixForm.build(n, [(0, 2, 1.0)], B_lin, qy, 2)
    return fx, fy


@lru_cache(maxsize=None)
def explicit_hswme_forms(N):
    """HSWME matrices assembled from the closed-form block tables."""
    return _table_forms(N, *blocks.hswme_tables(N))


_TABLES = {
    Variant.BETA: blocks.beta_tables,
    Variant.GLOBAL: blocks.global_tables,
    Variant.EXAMPLE: blocks.example_tables,
}


@lru_cache(maxsize=None)
def _variant_forms(tag, N):
    if tag is Variant.SWME and N >= 2:
        return _swme_forms(N)
    if tag in (Variant.SWME, Variant.HSWME) or N == 1:
        # every closure coincides with the HSWME at first order
        return _hswme_forms(N)
    if tag is Variant.BETA:
        return _table_forms(N, *blocks.beta_tables(N), blocks.beta_second_moment_h_column(N))
    return _table_forms(N, *_TABLES[tag](N))


_custom_cache = {}


def matrix_forms(variant, N):
    """(x-form, y-form) for a variant at order N."""
    variant = as_variant(variant)
    if N < 1:
        raise UnsupportedOrder(f"order must be >= 1, got {N}")
    if variant.tag is Variant.CUSTOM:
        spec = variant.payload
        if spec.N != N:
            raise UnsupportedOrder(f"closure payload has order {spec.N}, requested {N}")
        if spec not in _custom_cache:
            _custom_cache[spec] = _table_forms(N, *spec.tables())
        return _custom_cache[spec]
    return _variant_forms(variant.tag, N)


# -- public operations -----------------------------------------------------

class Direction(str, Enum):
    X = "X"
    Y = "Y"


class Ordering(str, Enum):
    INTERLEAVED = "Interleaved"
    BLOCK = "BlockReordered"


@dataclass(frozen=True, eq=False)
class DirectionalMatrix:
    entries: np.ndarray
    direction: Direction = Direction.X
    ordering: Ordering = Ordering.INTERLEAVED

    def reordered(self, to=None):
        return reorder(self, to)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def block_permutation(N):
    """Index list p with W = U[p]."""
    return np.array([0, 1] + [3 + 2 * i for i in range(N)] + [2] + [4 + 2 * i for i in range(N)])


def reorder(M, to=None):
    """Switch a matrix between interleaved (U) and block (W) orderings."""
    raw = isinstance(M, np.ndarray)
    E = np.asarray(M.entries if not raw else M)
    N = (E.shape[0] - 3) // 2
    p = block_permutation(N)
    current = Ordering.INTERLEAVED if raw else M.ordering
    target = to or (Ordering.BLOCK if current is Ordering.INTERLEAVED else Ordering.INTERLEAVED)
    target = Ordering(target)
    if target is current:
        out = E.copy()
    elif target is Ordering.BLOCK:
        out = E[np.ix_(p, p)]
    else:
        inv = np.argsort(p)
        out = E[np.ix_(inv, inv)]
    if raw:
        return out
    return DirectionalMatrix(out, M.direction, target)


def block_split(M):
    """(A11, A21, A22, A12) blocks of a matrix in block ordering."""
    E = np.asarray(M.entries if isinstance(M, DirectionalMatrix) else M)
    N = (E.shape[0] - 3) // 2
    m = N + 2
    return E[:m, :m], E[m:, :m], E[m:, m:], E[:m, m:]


def _state(V):
    if not isinstance(V, PrimitiveState):
        raise TypeError("expected a PrimitiveState")
    return V


def flux_x(V, K=None):
    return _flux(_state(V), "x")


def flux_y(V, K=None):
    return _flux(_state(V), "y")


def _flux(V, direction):
    N = V.N
    w = V.w()
    F = np.zeros(n_vars(N))
    F[0] = V.h * (V.um if direction == "x" else V.vm)
    for r, k, l, c in _flux_quadratics(N, direction):
        F[r] += V.h * c * w[k] * w[l]
    F[_pressure_row(direction)] += 0.5 * V.g * V.h ** 2
    return F


def jacobian_flux_x(V, K=None):
    return DirectionalMatrix(flux_jacobian_forms(V.N)[0].evaluate(V.w(), V.h, V.g), Direction.X)


def jacobian_flux_y(V, K=None):
    return DirectionalMatrix(flux_jacobian_forms(V.N)[1].evaluate(V.w(), V.h, V.g), Direction.Y)


def nonconservative_x(V, K=None):
    return DirectionalMatrix(nonconservative_forms(V.N)[0].evaluate(V.w(), V.h, V.g), Direction.X)


def nonconservative_y(V, K=None):
    return DirectionalMatrix(nonconservative_forms(V.N)[1].evaluate(V.w(), V.h, V.g), Direction.Y)


def coefficient_matrices(V, variant):
    """Raw (A, B) arrays for a primitive state."""
    fx, fy = matrix_forms(variant, V.N)
    w = V.w()
    return fx.evaluate(w, V.h, V.g), fy.evaluate(w, V.h, V.g)


def assemble_matrices(V, variant, K=None):
    A, B = coefficient_matrices(_state(V), variant)
    return DirectionalMatrix(A, Direction.X), DirectionalMatrix(B, Direction.Y)


def directional_matrix(V, variant, theta):
    A, B = coefficient_matrices(V, variant)
    return np.cos(theta) * A + np.sin(theta) * B


def source_term(V, P=None, K=None):
    V = _state(V)
    if P is None:
        P = SourceParams(g=V.g)
    if not V.h > 0:
        raise NonPositiveDepth("source term needs positive depth")
    N = V.N
    K = K or compute_moment_constants(N)
    a, b = np.asarray(V.alpha), np.asarray(V.beta)
    S = np.zeros(n_vars(N))
    ex, ey, ez = P.e
    dbx, dby = P.bottom_grad
    g = P.g
    if P.nu == 0:
        S[1] = V.h * g * (ex - ez * dbx)
        S[2] = V.h * g * (ey - ez * dby)
        return S
    r = P.nu / P.lam
    S[1] = -r * (V.um + a.sum()) + V.h * g * (ex - ez * dbx)
    S[2] = -r * (V.vm + b.sum()) + V.h * g * (ey - ez * dby)
    Cw = 1.0 + (P.lam / V.h) * K.C
    i = np.arange(1, N + 1)
    S[3::2] = -(2 * i + 1) * r * (V.um + Cw @ a)
    S[4::2] = -(2 * i + 1) * r * (V.vm + Cw @ b)
    return S


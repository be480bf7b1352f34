"""Exact block tables for the hyperbolic closures.

A table maps a block position (I, J), 0 <= I, J <= N, to a pair (cu, ca) of
Fractions meaning cu * u_m + ca * alpha_1. Block 0 is the momentum pair
(hu, hv) and block i >= 1 is the moment pair (h alpha_i, h beta_i).

K11 acts on the x-components (hu, h alpha_1, ...), K22 on the y-components.
Rotational invariance then fixes every 2x2 block of the x-direction matrix as

    [[K11(u, a),              0        ],
     [(K11 - K22)(v, b),   K22(u, a)   ]]

and of the y-direction matrix as

    [[K22(v, b),   (K11 - K22)(u, a)],
     [0,           K11(v, b)        ]].
"""
from dataclasses import dataclass, field
from fractions import Fraction as Fr

ZERO = (Fr(0), Fr(0))


def hswme_tables(N):
    K11, K22 = {}, {}
    K11[0, 0] = (Fr(2), Fr(0))
    K22[0, 0] = (Fr(1), Fr(0))
    for i in range(0, N + 1):
        if i >= 1:
            K11[i, i] = (Fr(1), Fr(0))
            K22[i, i] = (Fr(1), Fr(0))
            K22[i, i - 1] = (Fr(0), Fr(i, 2 * i - 1))
            K11[i, i - 1] = (Fr(0), Fr(2) if i == 1 else Fr(i - 1, 2 * i - 1))
        if i < N:
            K11[i, i + 1] = (Fr(0), Fr(i + 2, 2 * i + 3))
            K22[i, i + 1] = (Fr(0), Fr(i + 1, 2 * i + 3))
    return K11, K22


def beta_tables(N):
    K11, K22 = hswme_tables(N)
    if N >= 2:
        K11[N, N - 1] = (Fr(0), Fr((N - 1) * (2 * N + 1), (N + 1) * (2 * N - 1)))
    return K11, K22


def beta_second_moment_h_column(N):
    """h-column weight k2 of the second moment row for the beta closure.

    For N = 2 that row is also the last row, and the Legendre-node spectrum
    requires k2 = 10/9 instead of the hyperbolic-closure value 2/3.
    """
    return Fr(10, 9) if N == 2 else Fr(2, 3)


def global_tables(N):
    K11, K22 = hswme_tables(N)
    if N >= 2:
        K22 = dict(K11)
        K22[0, 0] = (Fr(1), Fr(0))
        K22[1, 0] = (Fr(0), Fr(1))
    return K11, K22


def example_last_row(N):
    """Closed-form last row of K22 whose characteristic polynomial is prop. to P'_{N+2}."""
    row = {N: (Fr(1), Fr(0)),
           N - 1: (Fr(0), Fr(2 * N + 1, (2 * N - 1) * (2 * N + 3)))}
    for j in range(1, N):
        if (j - N) % 2 == 0:
            row[j - 1] = (Fr(0), Fr(-(N + 1), 2 * N + 3))
    return row


def replace_last_row(K, N, row):
    K = {k: v for k, v in K.items() if k[0] != N}
    for J, val in row.items():
        if val != ZERO:
            K[N, J] = val
    return K


def example_tables(N):
    K11, K22 = hswme_tables(N)
    if N >= 2:
        K22 = replace_last_row(K22, N, example_last_row(N))
    return K11, K22


@dataclass(frozen=True)
class ClosureSpec:
    """Last block rows of K11 and K22 (N+1 entries each, over block columns 0..N).

    Entries are (cu, ca) pairs or None for zero. The h column of the last row is
    not part of the design space and keeps its hyperbolic-closure value.
    """

    N: int
    last_row_A11: tuple
    last_row_A22: tuple
    target_poly_legendre: tuple = None
    certification: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("order must be >= 1")
        for name in ("last_row_A11", "last_row_A22"):
            row = tuple(_pair(e) for e in getattr(self, name))
            if len(row) != self.N + 1:
                raise ValueError(f"{name} needs {self.N + 1} entries, got {len(row)}")
            object.__setattr__(self, name, row)

    def tables(self):
        K11, K22 = hswme_tables(self.N)
        K11 = replace_last_row(K11, self.N, dict(enumerate(self.last_row_A11)))
        K22 = replace_last_row(K22, self.N, dict(enumerate(self.last_row_A22)))
        return K11, K22


def _pair(e):
    if e is None:
        return ZERO
    cu, ca = e
    return (Fr(cu), Fr(ca))


def first_columns(k2=Fr(2, 3)):
    """Exact quadratic first columns shared by all hyperbolic closures.

    Returns lists (row, k, l, coef) with w-indices u=0, v=1, a1=2, b1=3 for the
    x- and y-direction matrices; the gravity term g*h sits on rows 1 and 2.
    The second moment pair carries -k2 * a1 * (a1, b1) in x and
    -k2 * b1 * (a1, b1) in y.
    """
    t = Fr(1, 3)
    x = [(1, 0, 0, Fr(-1)), (1, 2, 2, -t),
         (2, 0, 1, Fr(-1)), (2, 2, 3, -t),
         (3, 0, 2, Fr(-2)),
         (4, 0, 3, Fr(-1)), (4, 1, 2, Fr(-1)),
         (5, 2, 2, -k2),
         (6, 2, 3, -k2)]
    y = [(1, 0, 1, Fr(-1)), (1, 2, 3, -t),
         (2, 1, 1, Fr(-1)), (2, 3, 3, -t),
         (3, 0, 3, Fr(-1)), (3, 1, 2, Fr(-1)),
         (4, 1, 3, Fr(-2)),
         (5, 2, 3, -k2),
         (6, 3, 3, -k2)]
    return x, y


def directional_entries(K11, K22):
    """Linear entries (row, col, w-index, coef) of the x and y matrices."""
    A, B = [], []
    for I, J in sorted(set(K11) | set(K22)):
        au, aa = K11.get((I, J), ZERO)
        bu, ba = K22.get((I, J), ZERO)
        du, da = au - bu, aa - ba
        xI, yI, xJ, yJ = 1 + 2 * I, 2 + 2 * I, 1 + 2 * J, 2 + 2 * J
        for r, c, k, v in ((xI, xJ, 0, au), (xI, xJ, 2, aa),
                           (yI, yJ, 0, bu), (yI, yJ, 2, ba),
                           (yI, xJ, 1, du), (yI, xJ, 3, da)):
            if v:
                A.append((r, c, k, v))
        for r, c, k, v in ((xI, xJ, 1, bu), (xI, xJ, 3, ba),
                           (xI, yJ, 0, du), (xI, yJ, 2, da),
                           (yI, yJ, 1, au), (yI, yJ, 3, aa)):
            if v:
                B.append((r, c, k, v))
    return A, B


def table_matrix(K, N, u=0.0, a=1.0):
    """Dense (N+1)x(N+1) numeric matrix of a table at given (u, alpha_1)."""
    import numpy as np

    M = np.zeros((N + 1, N + 1))
    for (I, J), (cu, ca) in K.items():
        M[I, J] = float(cu) * u + float(ca) * a
    return M

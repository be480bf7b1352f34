"""2x2 rotational-invariance block algebra and last-row closure construction."""
import json
from dataclasses import dataclass, replace
from fractions import Fraction as Fr

import numpy as np

from . import blocks
from .blocks import ClosureSpec, hswme_tables, table_matrix
from .errors import DegreeMismatch, SingularMatch
from .models import ModelVariant, Variant, coefficient_matrices
from .state import PrimitiveState

# -- 2x2 block forms ---------------------------------------------------------

def _basis():
    # _BASIS[m, r, c, v]: coefficient of (p, q)[v] in entry (r, c) of term m
    B = np.zeros((6, 2, 2, 2))
    P, Q = 0, 1
    B[0, 0, 0, P] = B[0, 1, 0, Q] = 1                        # [[p,0],[q,0]]
    B[1, 0, 0, Q] = 1; B[1, 1, 0, P] = -1                    # [[q,0],[-p,0]]
    B[2, 0, 0, P] = B[2, 1, 1, P] = 1                        # [[p,0],[0,p]]
    B[3, 0, 0, Q] = B[3, 1, 1, Q] = 1                        # [[q,0],[0,q]]
    B[4, 0, 1, P] = B[4, 1, 1, Q] = 1                        # [[0,p],[0,q]]
    B[5, 0, 1, Q] = 1; B[5, 1, 1, P] = -1                    # [[0,q],[0,-p]]
    return B


_BASIS = _basis()


@dataclass(frozen=True)
class BlockLinearForm:
    """2x2 matrix linear in V = (p, q), in the six-term invariant basis."""

    c: tuple = (0.0,) * 6

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        if len(c) != 6:
            raise ValueError("six coefficients expected")
        object.__setattr__(self, "c", c)

    def tensor(self):
        return np.tensordot(np.array(self.c), _BASIS, axes=1)

    def __call__(self, p, q):
        return self.tensor() @ np.array([p, q], dtype=float)


def partner_block(a):
    """B-block forced by rotational invariance: b11(p,q) = a22(q,-p), etc."""
    c1, c2, c3, c4, c5, c6 = a.c
    return BlockLinearForm((-c5, -c6, -c4, c3, c1, c2))


def partner_of_callable(a):
    """Partner rule applied to an arbitrary 2x2-valued function of (p, q)."""
    def b(p, q):
        m = a(q, -p)
        return np.array([[m[1, 1], -m[1, 0]], [-m[0, 1], m[0, 0]]])
    return b


def _t2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def validate_block_invariance(a, b, samples=64, rng=None):
    """max over random (theta, V) of the 2x2 invariance and oddness residuals."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(samples):
        theta = rng.uniform(0, 2 * np.pi)
        V = rng.uniform(-1, 1, 2)
        T = _t2(theta)
        TV = T @ V
        lhs = np.linalg.solve(T, a(*TV)) @ T
        rhs = np.cos(theta) * a(*V) + np.sin(theta) * b(*V)
        worst = max(worst, float(np.abs(lhs - rhs).max()),
                    float(np.abs(a(*(-V)) + a(*V)).max()))
    return worst


# -- exact Legendre-basis polynomial helpers ---------------------------------

def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _add(a, b, scale=Fr(1)):
    out = [Fr(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, x in enumerate(b):
        out[i] += scale * x
    return out


def xi_times(c):
    """Multiply a Legendre series by xi: xi P_k = ((k+1) P_{k+1} + k P_{k-1}) / (2k+1)."""
    out = [Fr(0)] * (len(c) + 1)
    for k, x in enumerate(c):
        if x == 0:
            continue
        out[k + 1] += x * Fr(k + 1, 2 * k + 1)
        if k >= 1:
            out[k - 1] += x * Fr(k, 2 * k + 1)
    return out


def legendre_unit(m):
    return [Fr(0)] * m + [Fr(1)]


def legendre_derivative_series(m):
    """P_m' = sum (2k+1) P_k over k = m-1, m-3, ..."""
    out = [Fr(0)] * max(m, 1)
    for k in range(m - 1, -1, -2):
        out[k] = Fr(2 * k + 1)
    return out


def degree(c):
    c = _trim(c)
    return len(c) - 1 if any(c) else -1


def exact_sequence(M, n_rows):
    """Associated polynomials q_0..q_{n_rows} of an exact Hessenberg matrix at u=0, alpha=1.

    With u = 0 and alpha_1 = 1 the variable x equals xi, so the returned
    Legendre series are in xi.
    """
    qs = [[Fr(1)]]
    for i in range(1, n_rows + 1):
        acc = xi_times(qs[i - 1])
        for j in range(1, i + 1):
            acc = _add(acc, qs[j - 1], -Fr(M[i - 1][j - 1]))
        sup = Fr(M[i - 1][i])
        if sup == 0:
            raise SingularMatch("base matrix is not unreduced")
        qs.append(_trim([x / sup for x in acc]))
    return qs


def table_exact_matrix(K, N):
    """Exact Fraction matrix of a block table at u=0, alpha_1=1."""
    M = [[Fr(0)] * (N + 1) for _ in range(N + 1)]
    for (I, J), (cu, ca) in K.items():
        M[I][J] = ca
    return M


@dataclass(frozen=True)
class MatchResult:
    """Last row a_{n,j} = cu_j u_m + ca_j alpha_1 (1-based j) and scale kappa."""

    n: int
    entries: dict
    kappa: Fr

    def as_row(self):
        """Row as (cu, ca) pairs over columns 1..n."""
        return tuple(self.entries.get(j, (Fr(0), Fr(0))) for j in range(1, self.n + 1))


def match_last_row(base, target, free=None):
    """Solve for the last row of a lower Hessenberg matrix so that q_n is prop. to target.

    ``base`` is either an exact square matrix (u=0, alpha_1=1 units; its last
    row is ignored) or a mapping {i: Legendre series of q_i} holding at least
    the q_{j-1} for j in ``free``. ``target`` is a Legendre series of degree n.
    The unknown last row enters as q_n = alpha_1 (xi q_{n-1} - sum_j c_j q_{j-1})
    with a_{n,n} = u_m + c_n alpha_1 and a_{n,j} = c_j alpha_1 otherwise.
    """
    if isinstance(base, dict):
        seq = {int(k): _trim([Fr(x) for x in v]) for k, v in base.items()}
        n = max(seq) + 1
    else:
        n = len(base)
        seq = dict(enumerate(exact_sequence(base, n - 1)))
    free = sorted(free) if free is not None else list(range(1, n + 1))
    if any(j < 1 or j > n for j in free) or n not in free:
        raise SingularMatch("the diagonal entry of the last row must be free")
    missing = [j for j in free if j - 1 not in seq]
    if missing or n - 1 not in seq:
        raise DegreeMismatch(f"sequence lacks q for columns {missing}")
    target = _trim([Fr(x) for x in target])
    lhs0 = _trim(xi_times(seq[n - 1]))
    if degree(target) != degree(lhs0):
        raise DegreeMismatch(f"target has degree {degree(target)}, expected {degree(lhs0)}")
    # unknowns: c_j for j in free, then kappa
    rows = degree(lhs0) + 1
    cols = len(free) + 1
    A = [[Fr(0)] * (cols + 1) for _ in range(rows)]
    for m in range(rows):
        for u, j in enumerate(free):
            q = seq[j - 1]
            A[m][u] = q[m] if m < len(q) else Fr(0)
        A[m][cols - 1] = target[m] if m < len(target) else Fr(0)
        A[m][cols] = lhs0[m] if m < len(lhs0) else Fr(0)
    sol = _solve_exact(A, cols)
    entries = {}
    for u, j in enumerate(free):
        c = sol[u]
        if j == n:
            entries[j] = (Fr(1), c)
        elif c != 0:
            entries[j] = (Fr(0), c)
    return MatchResult(n, entries, sol[-1])


def _solve_exact(aug, cols):
    """Gaussian elimination over Fractions; unique solution or SingularMatch."""
    A = [row[:] for row in aug]
    rows = len(A)
    piv_cols, r = [], 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if p is None:
            raise SingularMatch("last-row match is not unique")
        A[r], A[p] = A[p], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        piv_cols.append(c)
        r += 1
    if any(A[i][cols] != 0 for i in range(r, rows)):
        raise SingularMatch("target cannot be matched by the free entries")
    return [A[i][cols] for i in range(cols)]


def hswme_a22_sequence(N):
    """{i: (2i+1) P_i} for i = 0..N, the Ã22 sequence of the hyperbolic closure."""
    return {i: [Fr(0)] * i + [Fr(2 * i + 1)] for i in range(N + 1)}


def beta_factored_sequence(N):
    """Ã11 polynomials with the factor p_g / alpha_1 removed: Q_n = (2n-1)/(n(n-1)) P'_{n-1}."""
    out = {}
    for n in (N, N + 1):
        s = Fr(2 * n - 1, n * (n - 1))
        out[n] = [s * x for x in legendre_derivative_series(n - 1)]
    return out


# -- the worked closure -------------------------------------------------------

CORNER_BETAS = (0.0, 0.5)


@dataclass(frozen=True)
class GeneralClosure:
    spec: ClosureSpec
    match: MatchResult = None

    @property
    def variant(self):
        return ModelVariant(Variant.CUSTOM, self.spec)

    def matrices(self, V):
        return coefficient_matrices(V, self.variant)


def _row_from_match(match, N):
    return tuple(match.entries.get(j, (Fr(0), Fr(0))) for j in range(1, N + 2))


def closure_from_target(N, target):
    """Replace the last row of Ã22 of the hyperbolic closure by a target match."""
    K11, K22 = hswme_tables(N)
    match = match_last_row(table_exact_matrix(K22, N), target)
    row22 = _row_from_match(match, N)
    row11 = tuple(K11.get((N, J), (Fr(0), Fr(0))) for J in range(N + 1))
    spec = ClosureSpec(N, row11, row22, tuple(target))
    return GeneralClosure(_certified(spec), match)


def build_general_closure(N):
    """Worked closure: Ã22 characteristic polynomial prop. to P'_{N+2}(xi).

    At first order every closure coincides with the hyperbolic one, so N = 1
    returns the unmodified rows.
    """
    if N == 1:
        K11, K22 = hswme_tables(1)
        row = lambda K: tuple(K.get((1, J), (Fr(0), Fr(0))) for J in range(2))
        spec = ClosureSpec(1, row(K11), row(K22), None)
        return GeneralClosure(_certified(spec), None)
    return closure_from_target(N, legendre_derivative_series(N + 2))


def corner_state(N, beta1):
    return PrimitiveState(1.0, 0.1, -0.2, [0.0] + [0.0] * (N - 1), [beta1] + [0.0] * (N - 1))


def _certified(spec):
    from .spectral import report_from_matrix

    cert = []
    variant = ModelVariant(Variant.CUSTOM, spec)
    for b in CORNER_BETAS:
        A = coefficient_matrices(corner_state(spec.N, b), variant)[0]
        cert.append((b, report_from_matrix(A).classification.value))
    return replace(spec, certification=tuple(cert))


# -- serialization --------------------------------------------------------------

def _entry_str(e):
    cu, ca = e
    parts = []
    if cu:
        parts.append("u_m" if cu == 1 else f"{cu}*u_m")
    if ca:
        parts.append(f"{ca}*alpha1")
    return " + ".join(parts) if parts else "0"


def _parse_entry(s):
    cu, ca = Fr(0), Fr(0)
    s = s.strip()
    if s == "0":
        return (cu, ca)
    for part in s.split(" + "):
        part = part.strip()
        if part == "u_m":
            cu += 1
        elif part.endswith("*u_m"):
            cu += Fr(part[:-4])
        elif part.endswith("*alpha1"):
            ca += Fr(part[:-7])
        else:
            raise ValueError(f"cannot parse closure entry {s!r}")
    return (cu, ca)


def spec_to_json(spec):
    data = {
        "N": spec.N,
        "last_row_A11": [_entry_str(e) for e in spec.last_row_A11],
        "last_row_A22": [_entry_str(e) for e in spec.last_row_A22],
        "target_poly_legendre": None if spec.target_poly_legendre is None
        else [str(Fr(x)) for x in spec.target_poly_legendre],
        "certification": [{"alpha1": 0.0, "beta1": b, "classification": c} for b, c in spec.certification],
    }
    return json.dumps(data, indent=2)


def spec_from_json(text):
    d = json.loads(text)
    target = d.get("target_poly_legendre")
    cert = tuple((c["beta1"], c["classification"]) for c in d.get("certification", []))
    return ClosureSpec(int(d["N"]),
                       tuple(_parse_entry(s) for s in d["last_row_A11"]),
                       tuple(_parse_entry(s) for s in d["last_row_A22"]),
                       None if target is None else tuple(Fr(x) for x in target),
                       cert)


def numeric_last_row(spec, u, a, block="A22"):
    row = spec.last_row_A22 if block == "A22" else spec.last_row_A11
    return np.array([float(cu) * u + float(ca) * a for cu, ca in row])


__all__ = [
    "BlockLinearForm", "partner_block", "validate_block_invariance", "match_last_row",
    "build_general_closure", "closure_from_target", "ClosureSpec", "MatchResult",
    "spec_to_json", "spec_from_json", "legendre_derivative_series", "legendre_unit",
    "hswme_a22_sequence", "beta_factored_sequence", "table_matrix", "blocks",
]

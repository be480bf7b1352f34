"""Acceptance gate: ten criteria, one PASS/FAIL line each (see the terminal summary)."""
import time
from fractions import Fraction as Fr

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg

from conftest import ACCEPTANCE
from swme.certify import certify
from swme.closures import (
    legendre_derivative_series,
    match_last_row,
    table_exact_matrix,
)
from swme.blocks import hswme_tables
from swme.errors import SimplicityUnverifiable
from swme.io import CUTS, cut_line, write_cut_line
from swme.models import Ordering, block_split, coefficient_matrices, reorder
from swme.scenarios import dam_break, lake_at_rest, smooth_wave
from swme.solver import SolverConfig, Stepper, run
from swme.spectral import (
    Classification,
    char_poly_hessenberg,
    inf_norm,
    numeric_eigen,
    classify,
    rotate_state,
    rotation_matrix,
)
from swme.state import PrimitiveState

VARIANTS = ("SWME", "HSWME", "beta", "global", "example")


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[k] = line
    print(line)
    return ok


def random_state(N, rng):
    return PrimitiveState(rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1, N), rng.uniform(-1, 1, N), 1.0)


def monic_legendre(n, derivative=False):
    """Monic power-series coefficients (low first) of P_n or P_n'."""
    c = npleg.leg2poly(npleg.legder([0] * n + [1]) if derivative else [0] * n + [1])
    return c / c[-1]


def lobatto_factor(n):
    return monic_legendre(n, derivative=True)


# -- 1 -------------------------------------------------------------------------------------

def test_criterion_01_rotational_invariance():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for variant in VARIANTS:
        for N in (1, 2, 3, 5, 8):
            for _ in range(50):
                V = random_state(N, rng)
                A, B = coefficient_matrices(V, variant)
                scale = 1.0 + inf_norm(A)
                for th in rng.uniform(0, 2 * np.pi, 64):
                    Ar, Br = coefficient_matrices(rotate_state(V, th), variant)
                    T = rotation_matrix(th, N)
                    c, s = np.cos(th), np.sin(th)
                    r = max(inf_norm(c * A + s * B - T.T @ Ar @ T), inf_norm(-s * A + c * B - T.T @ Br @ T))
                    worst = max(worst, r / scale)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-11 and dt <= 60
    record(1, ok, f"max residual/(1+|A|) = {worst:.2e} (tol 1e-11), {dt:.1f}s")
    assert ok


# -- 2 -------------------------------------------------------------------------------------

def _block_factors(variant, N, u, a, c2):
    """Monic factors (in x) of det(x - A11), det(x - A22) predicted by theory."""
    def scaled(mon):
        # a^deg * mon((x - u) / a) as a polynomial in x
        p = np.polynomial.Polynomial(mon)
        x = np.polynomial.Polynomial([-u / a, 1 / a])
        return p(x) * a ** p.degree()

    wave = np.polynomial.Polynomial([u * u - c2, -2 * u, 1])
    if variant == "HSWME" or N == 1:
        f11 = wave * scaled(lobatto_factor(N + 1))
        f22 = scaled(monic_legendre(N + 1))
    elif variant == "beta":
        f11 = wave * scaled(monic_legendre(N))
        f22 = scaled(monic_legendre(N + 1))
    else:  # example closure
        f11 = wave * scaled(lobatto_factor(N + 1))
        f22 = scaled(lobatto_factor(N + 2))
    return f11, f22


def test_criterion_02_characteristic_factorizations():
    rng = np.random.default_rng(2)
    worst = 0.0
    count = 0
    for variant in ("HSWME", "beta", "example"):
        for N in range(1, 11):
            for a in (1.0, -1.0, 0.1, -0.1):
                u = rng.uniform(-2, 2)
                gh = rng.uniform(0.5, 4)
                V = PrimitiveState(1.0, u, rng.uniform(-1, 1), [a] + list(rng.uniform(-1, 1, N - 1)),
                                   rng.uniform(-1, 1, N), gh)
                A = coefficient_matrices(V, variant)[0]
                A11, _, A22, _ = block_split(reorder(A, Ordering.BLOCK))
                f11, f22 = _block_factors(variant, N, u, a, gh + a * a)
                R = np.sqrt(gh + a * a) + abs(a) + abs(u)
                k = np.arange(4 * N + 8)
                x = u + 1.2 * R * np.cos(np.pi * (k + 0.5) / k.size)
                for M, f in ((A11, f11), (A22, f22), (A, f11 * f22)):
                    det = np.array([np.linalg.det(t * np.eye(M.shape[0]) - M) for t in x])
                    ref = f(x)
                    worst = max(worst, np.abs(det - ref).max() / np.abs(ref).max())
                    count += 1
    ok = worst <= 1e-9
    record(2, ok, f"max sample-point relative deviation {worst:.2e} over {count} factorizations (tol 1e-9)")
    assert ok


# -- 3 -------------------------------------------------------------------------------------

def test_criterion_03_eigenvalue_nodes():
    rng = np.random.default_rng(3)
    worst = 0.0
    for N in range(1, 11):
        lob = npleg.legroots(npleg.legder([0] * (N + 1) + [1])) if N >= 1 else np.array([])
        gl = npleg.legroots([0] * (N + 1) + [1])
        for _ in range(10):
            V = random_state(N, rng)
            u, a = V.um, V.alpha[0]
            c = np.sqrt(V.g * V.h + a * a)
            ref = np.sort(np.concatenate(([u - c, u + c], u + lob * a, u + gl * a)))
            ev = np.linalg.eigvals(coefficient_matrices(V, "HSWME")[0])
            worst = max(worst, np.abs(np.sort(ev.real) - ref).max() + np.abs(ev.imag).max())
    ok = worst <= 1e-9
    record(3, ok, f"max |numeric - node formula| {worst:.2e} for N <= 10 (tol 1e-9)")
    assert ok


# -- 4 -------------------------------------------------------------------------------------

def test_criterion_04_weak_corner():
    rng = np.random.default_rng(4)
    notes, ok = [], True
    for N in (2, 3, 5):
        for beta1, cls, geo in ((0.5, Classification.WEAK, N + 1), (0.0, Classification.HYPERBOLIC, 2 * N + 1)):
            V = PrimitiveState(rng.uniform(0.5, 2), rng.uniform(-1, 1), rng.uniform(-1, 1),
                               [0.0] + list(rng.uniform(-1, 1, N - 1)), [beta1] + list(rng.uniform(-1, 1, N - 1)))
            e = numeric_eigen(coefficient_matrices(V, "HSWME")[0])
            k = int(np.argmin(np.abs(e.values - V.um)))
            good = classify(e) is cls and e.algebraic[k] == 2 * N + 1 and e.geometric[k] == geo
            ok &= good
            notes.append(f"N={N} b1={beta1}: {e.algebraic[k]}/{e.geometric[k]} {classify(e).value}")
    record(4, ok, "; ".join(notes))
    assert ok


# -- 5 -------------------------------------------------------------------------------------

def test_criterion_05_global_hyperbolicity():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    ok, notes = True, []
    for N in (2, 5, 10, 25, 50, 100):
        res = certify("global", N, n_states=18, n_angles=1, rng=rng)
        classes = {c.classification for c in res.checks}
        gap = res.min_rel_gap
        good = classes == {Classification.HYPERBOLIC} and len(res.checks) == 20 and gap > 1e-8
        ok &= good
        notes.append(f"N={N} gap={gap:.1e}")
    dt = time.perf_counter() - t0
    ok &= dt <= 120
    record(5, ok, "all Hyperbolic; min gap/(1+rho): " + ", ".join(notes) + f"; {dt:.1f}s")
    assert ok


# -- 6 -------------------------------------------------------------------------------------

def expected_last_row(N):
    """Closed-form last row, 1-based columns j, as (cu, ca)."""
    row = {N + 1: (Fr(1), Fr(0)), N: (Fr(0), Fr(2 * N + 1, (2 * N - 1) * (2 * N + 3)))}
    for j in range(1, N):
        row[j] = (Fr(0), Fr(-(N + 1), 2 * N + 3)) if (j - N) % 2 == 0 else (Fr(0), Fr(0))
    return tuple(row[j] for j in range(1, N + 2))


def test_criterion_06_closed_form_last_row():
    bad = []
    for N in range(2, 11):
        _, K22 = hswme_tables(N)
        res = match_last_row(table_exact_matrix(K22, N), legendre_derivative_series(N + 2))
        if res.as_row() != expected_last_row(N) or res.kappa != Fr(N + 1, 2 * N + 3):
            bad.append(N)
    ok = not bad
    record(6, ok, "exact rational match for N = 2..10" if ok else f"mismatch at N = {bad}")
    assert ok


# -- 7 -------------------------------------------------------------------------------------

def test_criterion_07_conservation_and_steadiness():
    t0 = time.perf_counter()
    sc = smooth_wave(128)
    st = sc.initial_state(2)
    final, _ = run(st, SolverConfig(1.0, "HSWME", 0.9, sc.bc, sc.source))
    drift = abs(final.mass() - st.mass()) / st.mass()

    lake = lake_at_rest(64)
    ls = lake.initial_state(2)
    stepper = Stepper(SolverConfig(1.0, "HSWME", 0.9, lake.bc, lake.source), 2)
    cur = ls
    for _ in range(100):
        cur, _ = stepper.step(cur)
    still = float(np.abs(cur.U - ls.U).max())
    dt = time.perf_counter() - t0
    ok = drift <= 1e-12 and still <= 1e-13 and dt <= 120
    record(7, ok, f"mass drift {drift:.1e} (tol 1e-12), lake-at-rest change {still:.1e} after 100 steps "
                  f"(tol 1e-13), {dt:.1f}s")
    assert ok


# -- 8 -------------------------------------------------------------------------------------

N_GRID = 256


@pytest.fixture(scope="module")
def dam_runs():
    t0 = time.perf_counter()
    out = {}
    for variant in VARIANTS:
        for N in (1, 2):
            sc = dam_break(N_GRID)
            cfg = SolverConfig(0.1, variant, 0.9, sc.bc, sc.source)
            final, _ = run(sc.initial_state(N), cfg)
            mirror = None
            if not (variant == "SWME" and N == 2):
                scm = dam_break(N_GRID, mirror=True)
                mirror, _ = run(scm.initial_state(N), cfg)
            out[variant, N] = (final, mirror)
    return out, time.perf_counter() - t0


def signed_radius_cuts(state):
    h = state.U[..., 0]
    X, Y = state.grid.centers()
    d = h - 1.0
    cx, cy = (d * X).sum() / d.sum(), (d * Y).sum() / d.sum()
    curves = {}
    for which in CUTS:
        s, rows = cut_line(state, which)
        if which == "diagonal":
            r = s + np.sqrt(2) * (0.5 - cx)
        elif which == "y0.5":
            r = np.sign(s - cx) * np.hypot(s - cx, 0.5 - cy)
        else:
            r = np.sign(s - cy) * np.hypot(s - cy, 0.5 - cx)
        curves[which] = (r, rows[:, 0])
    return curves


def graph_distance(a, b, tol, r_max=0.45):
    """Largest h-gap between curve a and the range of curve b within +-tol in radius."""
    ra, ha = a
    rb, hb = b
    worst = 0.0
    for rk, hk in zip(ra, ha):
        if abs(rk) > r_max:
            continue
        vals = np.interp(np.linspace(rk - tol, rk + tol, 41), rb, hb)
        worst = max(worst, vals.min() - hk, hk - vals.max(), 0.0)
    return worst


def test_criterion_08_dam_break(dam_runs, tmp_path):
    runs, elapsed = dam_runs
    dx = 1.0 / N_GRID
    notes, ok = [], True

    # (a) first-order cut-lines byte-identical across variants
    blobs = {}
    for variant in VARIANTS:
        final = runs[variant, 1][0]
        blob = b""
        for which in CUTS:
            p = tmp_path / f"{variant}_{which}.csv"
            write_cut_line(p, final, which)
            blob += p.read_bytes()
        blobs[variant] = blob
    a_ok = len(set(blobs.values())) == 1
    notes.append(f"(a) N=1 cut-lines identical: {a_ok}")

    # (b) range of h
    lo = min(float(f.U[..., 0].min()) for f, _ in runs.values())
    hi = max(float(f.U[..., 0].max()) for f, _ in runs.values())
    b_ok = 0.99 <= lo and hi <= 1.51
    notes.append(f"(b) h in [{lo:.4f}, {hi:.4f}]")

    # (c) reflection about y = x, and the mirrored run reflected back about x = 0.5
    sym = 0.0
    for final, mirror in runs.values():
        h = final.U[..., 0]
        sym = max(sym, float(np.abs(h - h.T).max()))
        if mirror is not None:
            sym = max(sym, float(np.abs(h - mirror.U[::-1, :, 0]).max()))
    c_ok = sym <= 1e-11
    notes.append(f"(c) symmetry error {sym:.1e}")

    # (d) angular cut-lines agree as functions of radius
    worst = 0.0
    for final, _ in runs.values():
        curves = signed_radius_cuts(final)
        for p in CUTS:
            for q in CUTS:
                if p != q:
                    worst = max(worst, graph_distance(curves[p], curves[q], 2 * dx))
    d_ok = worst <= 2 * dx
    notes.append(f"(d) cut-line graph distance {worst:.4f} (tol {2 * dx:.4f})")

    ok = a_ok and b_ok and c_ok and d_ok and elapsed <= 300
    record(8, ok, "; ".join(notes) + f"; runs {elapsed:.0f}s")
    assert ok


# -- 9 -------------------------------------------------------------------------------------

def test_criterion_09_hessenberg_oracle():
    rng = np.random.default_rng(9)
    worst, checked, skipped = 0.0, 0, 0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        H = np.tril(rng.normal(size=(n, n)), 1)
        idx = np.arange(n - 1)
        H[idx, idx + 1] = rng.uniform(0.5, 2.0, n - 1) * rng.choice([-1, 1], n - 1)
        try:
            poly = char_poly_hessenberg(H)
        except SimplicityUnverifiable:
            skipped += 1
            continue
        roots = np.roots(poly[::-1])
        ev = np.linalg.eigvals(H)
        err = max(np.abs(ev - r).min() for r in roots)
        worst = max(worst, err / max(1.0, np.abs(ev).max()))
        checked += 1
    ok = worst <= 1e-7 and checked >= 190
    record(9, ok, f"{checked} matrices checked ({skipped} not simple), max root deviation {worst:.1e} (tol 1e-7)")
    assert ok


# -- 10 ------------------------------------------------------------------------------------

def test_criterion_10_swme_witness():
    rng = np.random.default_rng(10)
    swme = certify("SWME", 2, n_states=20, n_angles=1, rng=rng, n_far=100)
    clean = {}
    for variant in ("HSWME", "global"):
        for N in (1, 2, 3, 5):
            r = certify(variant, N, n_states=20, n_angles=1, rng=rng, n_far=100)
            clean[variant, N] = r.complex_found
    witnesses = sum(c.classification is Classification.NON for c in swme.checks)
    ok = swme.complex_found and not any(clean.values())
    record(10, ok, f"SWME N=2: {witnesses} complex-spectrum states of {len(swme.checks)}; "
                   f"HSWME/global complex states: {sum(clean.values())}")
    assert ok

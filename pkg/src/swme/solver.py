"""First-order path-conservative finite volumes with local Lax-Friedrichs dissipation."""
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .errors import ConfigError, DryCell, DryInterface, NonFinite
from .legendre import compute_moment_constants
from .models import ModelVariant, as_variant, matrix_forms
from .spectral import speed_nodes
from .state import ConservedState, SourceParams

NUMERIC_SAFETY = 1.05
H_DRY = 1e-8


class BC(str, Enum):
    PERIODIC = "Periodic"
    OUTFLOW = "Outflow"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        for m in cls:
            if m.value.lower() == key:
                return m
        raise ConfigError(f"unknown boundary condition {name!r}")


class Axis(str, Enum):
    X = "X"
    Y = "Y"


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ConfigError("grid needs at least 4 cells per axis")
        if not (self.dx > 0 and self.dy > 0):
            raise ConfigError("cell widths must be positive")

    @classmethod
    def unit_square(cls, nx, ny=None):
        ny = nx if ny is None else ny
        return cls(nx, ny, 1.0 / nx, 1.0 / ny)

    def centers(self):
        x = self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx
        y = self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")

    @property
    def cell_area(self):
        return self.dx * self.dy


@dataclass
class FieldState:
    """Conserved variables on the grid, U[i, j, :] in interleaved order."""

    U: np.ndarray
    grid: Grid2D
    time: float = 0.0

    @property
    def N(self):
        return (self.U.shape[-1] - 3) // 2

    def cell(self, i, j):
        return ConservedState.from_vector(self.U[i, j])

    def mass(self):
        return float(self.U[..., 0].sum() * self.grid.cell_area)

    def copy(self):
        return FieldState(self.U.copy(), self.grid, self.time)


@dataclass(frozen=True)
class SolverConfig:
    t_end: float
    variant: ModelVariant = field(default_factory=lambda: ModelVariant.parse("HSWME"))
    cfl: float = 0.9
    bc: tuple = (BC.PERIODIC, BC.PERIODIC)
    source: SourceParams = field(default_factory=SourceParams)
    dissipation: str = "LocalLaxFriedrichs"
    h_dry: float = H_DRY

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dissipation != "LocalLaxFriedrichs":
            raise ConfigError(f"unsupported dissipation {self.dissipation!r}")
        bc = self.bc
        if isinstance(bc, (str, BC)):
            bc = (bc, bc)
        object.__setattr__(self, "bc", tuple(BC.parse(b) for b in bc))
        object.__setattr__(self, "variant", as_variant(self.variant))


def apply_bc(U, bc):
    """Copy of U with one ghost layer on each side."""
    bx, by = (BC.parse(b) for b in bc)
    nx, ny, n = U.shape
    G = np.empty((nx + 2, ny + 2, n))
    G[1:-1, 1:-1] = U
    if bx is BC.PERIODIC:
        G[0, 1:-1], G[-1, 1:-1] = U[-1], U[0]
    else:
        G[0, 1:-1], G[-1, 1:-1] = U[0], U[-1]
    if by is BC.PERIODIC:
        G[1:-1, 0], G[1:-1, -1] = U[:, -1], U[:, 0]
    else:
        G[1:-1, 0], G[1:-1, -1] = U[:, 0], U[:, -1]
    G[0, 0] = G[0, -1] = G[-1, 0] = G[-1, -1] = np.nan  # corners are never read
    return G


class _Model:
    """Per-run cache of the matrix forms and speed strategy."""

    def __init__(self, variant, N, g):
        self.variant = as_variant(variant)
        self.N = N
        self.g = g
        self.forms = matrix_forms(self.variant, N)
        self.node_max = speed_nodes(self.variant, N)
        self.K = compute_moment_constants(N)

    def speeds(self, UL, UR, axis):
        iu, ia = (1, 3) if axis is Axis.X else (2, 4)
        if self.node_max is not None:
            return kernels.face_speeds(UL, UR, iu, ia, self.g, self.node_max)
        return self._numeric_speeds(UL, UR, axis)

    def _numeric_speeds(self, UL, UR, axis):
        Us = 0.5 * (UL + UR)
        uniq, inv = np.unique(Us, axis=0, return_inverse=True)
        form = self.forms[0 if axis is Axis.X else 1]
        M = form.evaluate_batch(uniq[:, 1:] / uniq[:, :1], uniq[:, 0], self.g)
        rho = np.abs(np.linalg.eigvals(M)).max(axis=1)
        return NUMERIC_SAFETY * rho[inv.ravel()]

    def fluctuations(self, UL, UR, axis):
        s = self.speeds(UL, UR, axis)
        form = self.forms[0 if axis is Axis.X else 1]
        Dm, Dp = kernels.face_fluctuations(UL, UR, s, form, self.g)
        return Dm, Dp, s


def interface_fluctuations(UL, UR, axis, variant, K=None, g=1.0):
    """(D-, D+) across one interface between wet states UL and UR."""
    UL = np.atleast_2d(_vec(UL)).astype(float)
    UR = np.atleast_2d(_vec(UR)).astype(float)
    if UL[0, 0] <= 0 or UR[0, 0] <= 0:
        raise DryInterface("interface states must be wet")
    N = (UL.shape[1] - 3) // 2
    model = _Model(variant, N, g)
    Dm, Dp, _ = model.fluctuations(UL, UR, Axis(axis) if not isinstance(axis, Axis) else axis)
    return Dm[0], Dp[0]


def _vec(U):
    if isinstance(U, ConservedState):
        return U.as_vector()
    return np.asarray(U, dtype=float)


def source_field(U, P, K):
    """Explicit source S(U) for every cell."""
    S = np.zeros_like(U)
    h = U[..., 0]
    g = P.g
    ex, ey, ez = P.e
    dbx, dby = P.bottom_grad
    S[..., 1] = h * g * (ex - ez * dbx)
    S[..., 2] = h * g * (ey - ez * dby)
    if P.nu == 0:
        return S
    N = (U.shape[-1] - 3) // 2
    r = P.nu / P.lam
    u, v = U[..., 1] / h, U[..., 2] / h
    a, b = U[..., 3::2] / h[..., None], U[..., 4::2] / h[..., None]
    S[..., 1] -= r * (u + a.sum(-1))
    S[..., 2] -= r * (v + b.sum(-1))
    i = np.arange(1, N + 1)
    lam_h = (P.lam / h)[..., None]
    Ca, Cb = a @ K.C.T, b @ K.C.T
    S[..., 3::2] = -(2 * i + 1) * r * (u[..., None] + a.sum(-1, keepdims=True) + lam_h * Ca)
    S[..., 4::2] = -(2 * i + 1) * r * (v[..., None] + b.sum(-1, keepdims=True) + lam_h * Cb)
    return S


def _check(U, t, h_dry):
    """Abort on non-finite values or non-positive depth; clamp nearly dry cells in place."""
    bad = ~np.isfinite(U).all(axis=-1)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFinite(int(i), int(j), t)
    dry = U[..., 0] <= 0
    if dry.any():
        i, j = np.argwhere(dry)[0]
        raise DryCell(int(i), int(j), float(U[i, j, 0]))
    thin = U[..., 0] < h_dry
    if thin.any():
        U[thin] = 0.0
        U[thin, 0] = h_dry


class Stepper:
    """Advances a FieldState; holds the model cache between steps."""

    def __init__(self, cfg, N):
        self.cfg = cfg
        self.model = _Model(cfg.variant, N, cfg.source.g)
        self._warned = False

    def rates(self, state):
        """Face fluctuations and the largest admissible step for ``state``."""
        U, grid = state.U, state.grid
        nx, ny, n = U.shape
        G = apply_bc(U, self.cfg.bc)
        XL = G[:-1, 1:-1].reshape(-1, n)
        XR = G[1:, 1:-1].reshape(-1, n)
        YL = G[1:-1, :-1].reshape(-1, n)
        YR = G[1:-1, 1:].reshape(-1, n)
        Dmx, Dpx, sx = self.model.fluctuations(XL, XR, Axis.X)
        Dmy, Dpy, sy = self.model.fluctuations(YL, YR, Axis.Y)
        Dmx, Dpx = Dmx.reshape(nx + 1, ny, n), Dpx.reshape(nx + 1, ny, n)
        Dmy, Dpy = Dmy.reshape(nx, ny + 1, n), Dpy.reshape(nx, ny + 1, n)
        fx = Dpx[:-1] + Dmx[1:]
        fy = Dpy[:, :-1] + Dmy[:, 1:]
        dt = self.cfg.cfl / (sx.max() / grid.dx + sy.max() / grid.dy)
        return fx, fy, dt

    def step(self, state, dt_max=np.inf):
        U, grid = state.U, state.grid
        _check(U, state.time, self.cfg.h_dry)
        fx, fy, dt = self.rates(state)
        dt = min(dt, dt_max)
        self._stiffness(U, dt)
        S = source_field(U, self.cfg.source, self.model.K)
        Un = U - (dt / grid.dx) * fx - (dt / grid.dy) * fy + dt * S
        t = state.time + dt
        _check(Un, t, self.cfg.h_dry)
        return FieldState(Un, grid, t), dt

    def _stiffness(self, U, dt):
        P = self.cfg.source
        if P.nu == 0 or self._warned:
            return
        N = self.model.N
        stiff = dt * (2 * N + 1) * P.nu / P.lam * (1 + P.lam * self.model.K.C.max() / U[..., 0].min())
        if stiff > 1:
            warnings.warn(f"explicit friction is stiff (factor {stiff:.3g}); reduce cfl", RuntimeWarning)
            self._warned = True


def step(state, cfg, K=None):
    """One forward Euler step with the largest admissible time step."""
    return Stepper(cfg, state.N).step(state, cfg.t_end - state.time)[0]


@dataclass
class Observation:
    time: float
    steps: int
    mass: float


def run(initial, cfg, observers=(), out_times=None):
    """Advance to cfg.t_end, hitting every output time exactly.

    Each observer is called as ``observer(state)`` at every output time (and
    at t_end). Returns the final state and a log of Observations.
    """
    if cfg.t_end < initial.time:
        raise ConfigError("t_end lies before the initial time")
    times = sorted({float(t) for t in (out_times or ()) if initial.time < t <= cfg.t_end} | {cfg.t_end})
    if cfg.t_end == initial.time:
        return initial, [Observation(initial.time, 0, initial.mass())]
    stepper = Stepper(cfg, initial.N)
    state = initial
    log = [Observation(state.time, 0, state.mass())]
    steps = 0
    for t_out in times:
        while state.time < t_out:
            state, _ = stepper.step(state, t_out - state.time)
            steps += 1
            if t_out - state.time <= 1e-14 * max(1.0, abs(t_out)):
                state.time = t_out
        log.append(Observation(state.time, steps, state.mass()))
        for obs in observers:
            obs(state)
    return state, log


def uniform_state(grid, V):
    """Field filled with one PrimitiveState."""
    from .state import to_conserved

    u = to_conserved(V).as_vector()
    U = np.broadcast_to(u, (grid.nx, grid.ny, u.size)).copy()
    return FieldState(U, grid, 0.0)


__all__ = ["BC", "Axis", "Grid2D", "FieldState", "SolverConfig", "apply_bc", "interface_fluctuations",
           "step", "run", "Stepper", "Observation", "source_field", "uniform_state"]

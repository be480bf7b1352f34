"""Initial-value problems: radial dam break and smooth periodic wave."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError
from .legendre import gauss_legendre_nodes, gauss_legendre_weights, scaled_basis_eval
from .solver import BC, FieldState, Grid2D
from .state import SourceParams


class ScenarioName(str, Enum):
    DAM_BREAK = "RadialDamBreak"
    SMOOTH_WAVE = "SmoothWave"
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, name):
        key = str(name).replace("_", "").replace("-", "").lower()
        for m in cls:
            if m.value.lower() == key:
                return m
        aliases = {"dambreak": cls.DAM_BREAK, "smooth": cls.SMOOTH_WAVE, "wave": cls.SMOOTH_WAVE}
        if key in aliases:
            return aliases[key]
        raise ConfigError(f"unknown scenario {name!r}")


def project_profile(f, N, quad_points=None):
    """(u_m, [alpha_1..alpha_N]) of a vertical profile f(zeta) on [0, 1]."""
    m = quad_points or (N + 8)
    x = np.asarray(gauss_legendre_nodes(m))
    wq = np.asarray(gauss_legendre_weights(m)) / 2
    z = (x + 1) / 2
    fz = np.asarray(f(z), dtype=float)
    um = float(wq @ fz)
    alpha = [(2 * j + 1) * float(wq @ (fz * scaled_basis_eval(j, z))) for j in range(1, N + 1)]
    # exact zeros for moments the profile does not carry
    scale = max(abs(um), *(abs(a) for a in alpha))
    alpha = [0.0 if abs(a) <= 1e-13 * scale else a for a in alpha]
    return um, alpha


def quarter_profile(z):
    return z / 4


def dam_break_height(x, y):
    r = np.hypot(x - 0.5, y - 0.5)
    return np.where(r <= 0.2, 1.5, 1.0)


def smooth_wave_height(x, y):
    return 1.0 + np.exp(3 * np.cos(2 * np.pi * (x + y + 0.5)) - 4)


@dataclass(frozen=True)
class Scenario:
    name: ScenarioName
    grid: Grid2D
    height: object
    bc: tuple
    source: SourceParams = field(default_factory=lambda: SourceParams(nu=0.1, lam=0.1, g=1.0))
    t_out: tuple = (0.1,)
    profile: object = quarter_profile
    mirror: bool = False

    def initial_state(self, N):
        """Cell-centred initial data; ``mirror`` reflects it about x = 0.5."""
        X, Y = self.grid.centers()
        if self.mirror:
            X = 2 * self.grid.origin[0] + self.grid.nx * self.grid.dx - X
        h = self.height(X, Y)
        um, alpha = project_profile(self.profile, N)
        sx = -1.0 if self.mirror else 1.0
        U = np.zeros((self.grid.nx, self.grid.ny, 2 * N + 3))
        U[..., 0] = h
        U[..., 1] = sx * h * um
        U[..., 2] = h * um
        for i, a in enumerate(alpha):
            U[..., 3 + 2 * i] = sx * h * a
            U[..., 4 + 2 * i] = h * a
        return FieldState(U, self.grid, 0.0)


def dam_break(n=256, t_out=(0.1,), mirror=False):
    return Scenario(ScenarioName.DAM_BREAK, Grid2D.unit_square(n), dam_break_height,
                    (BC.OUTFLOW, BC.OUTFLOW), t_out=tuple(t_out), mirror=mirror)


def smooth_wave(n=128, t_out=(1.0,)):
    return Scenario(ScenarioName.SMOOTH_WAVE, Grid2D.unit_square(n), smooth_wave_height,
                    (BC.PERIODIC, BC.PERIODIC), t_out=tuple(t_out))


def lake_at_rest(n=32, depth=1.0, bc=(BC.PERIODIC, BC.PERIODIC)):
    return Scenario(ScenarioName.CUSTOM, Grid2D.unit_square(n),
                    lambda x, y: np.full_like(x, depth), tuple(bc),
                    t_out=(), profile=lambda z: np.zeros_like(z))


def make_scenario(name, n, t_out=None):
    name = ScenarioName.parse(name)
    if name is ScenarioName.DAM_BREAK:
        return dam_break(n, t_out or (0.1,))
    if name is ScenarioName.SMOOTH_WAVE:
        return smooth_wave(n, t_out or (1.0,))
    return lake_at_rest(n)

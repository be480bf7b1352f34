"""Run configuration (INI), CSV snapshots, cut-lines and report headers."""
import configparser
import csv
import hashlib
import io as _io
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .models import ModelVariant

CUTS = ("y0.5", "x0.5", "diagonal")


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "RadialDamBreak"
    resolution: int = 256
    t_out: tuple = (0.1,)
    variant: str = "HSWME"
    order: int = 2
    nu: float = 0.1
    lam: float = 0.1
    g: float = 1.0
    cfl: float = 0.9
    bc_x: str = ""
    bc_y: str = ""
    out_dir: str = "out"
    snapshots: bool = True
    seed: int = 0

    _SECTIONS = {
        "scenario": ("scenario", "resolution", "t_out"),
        "model": ("variant", "order", "nu", "lam", "g"),
        "solver": ("cfl", "bc_x", "bc_y"),
        "output": ("out_dir", "snapshots", "seed"),
    }

    def __post_init__(self):
        if self.resolution < 32:
            raise ConfigError("resolution must be at least 32")
        if self.order < 1:
            raise ConfigError("order must be at least 1")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")
        if not self.t_out or any(t <= 0 for t in self.t_out):
            raise ConfigError("t_out needs positive output times")
        ModelVariant.parse(self.variant)
        object.__setattr__(self, "t_out", tuple(sorted(float(t) for t in self.t_out)))

    @property
    def t_end(self):
        return self.t_out[-1]

    def to_ini(self):
        cp = configparser.ConfigParser()
        values = asdict(self)
        for sec, keys in self._SECTIONS.items():
            cp[sec] = {k: _fmt(values[k]) for k in keys}
        buf = _io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text):
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as e:
            raise ConfigError(f"malformed config: {e}") from e
        types = {f.name: f.type for f in fields(cls) if not f.name.startswith("_")}
        kw = {}
        for sec in cp.sections():
            if sec not in cls._SECTIONS:
                raise ConfigError(f"unknown section [{sec}]")
            for key, raw in cp[sec].items():
                if key not in cls._SECTIONS[sec]:
                    raise ConfigError(f"unknown key {key!r} in [{sec}]")
                kw[key] = _parse(raw, types[key], key)
        return cls(**kw)

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        return cls.from_ini(text)

    def digest(self):
        return hashlib.sha256(self.to_ini().encode()).hexdigest()[:16]


def _fmt(v):
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(raw, typ, key):
    try:
        if typ in ("tuple", tuple):
            return tuple(float(x) for x in raw.replace(",", " ").split())
        if typ in ("int", int):
            return int(raw)
        if typ in ("float", float):
            return float(raw)
        if typ in ("bool", bool):
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        return raw.strip()
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {raw!r}") from e


def report_header(cfg=None, seed=None, **extra):
    lines = [f"# swme {__version__}"]
    if cfg is not None:
        lines.append(f"# config_hash {cfg.digest()}")
    if seed is not None:
        lines.append(f"# seed {seed}")
    lines += [f"# {k} {v}" for k, v in extra.items()]
    return "\n".join(lines) + "\n"


def _moment_names(N, width):
    return [f"alpha_{k}" for k in range(1, width + 1)] + [f"beta_{k}" for k in range(1, width + 1)]


def _primitive_columns(U, width):
    """h, u_m, v_m and alpha/beta padded with zeros up to ``width`` moments."""
    h = U[..., 0]
    N = (U.shape[-1] - 3) // 2
    cols = [h, U[..., 1] / h, U[..., 2] / h]
    zero = np.zeros_like(h)
    cols += [U[..., 1 + 2 * k] / h if k <= N else zero for k in range(1, width + 1)]
    cols += [U[..., 2 + 2 * k] / h if k <= N else zero for k in range(1, width + 1)]
    return cols


def write_snapshot(path, state, variant_name):
    g = state.grid
    N = state.N
    X, Y = g.centers()
    I, J = np.meshgrid(np.arange(g.nx), np.arange(g.ny), indexing="ij")
    cols = _primitive_columns(state.U, N)
    with open(path, "w", newline="") as fh:
        fh.write(f"# nx={g.nx} ny={g.ny} dx={g.dx!r} dy={g.dy!r} t={state.time!r} N={N} variant={variant_name}\n")
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "y", "h", "u_m", "v_m"] + _moment_names(N, N))
        data = np.column_stack([I.ravel(), J.ravel(), X.ravel(), Y.ravel()] + [c.ravel() for c in cols])
        for row in data:
            w.writerow([int(row[0]), int(row[1])] + [repr(float(x)) for x in row[2:]])


def read_snapshot(path):
    with open(path) as fh:
        header = fh.readline()
        data = np.loadtxt(fh, delimiter=",", skiprows=1)
    meta = dict(kv.split("=", 1) for kv in header[1:].split())
    return meta, data


def cut_line(state, which):
    """(s, U rows) along y=0.5, x=0.5 or the diagonal y=x.

    Axis cuts average the two central rows on even grids; the diagonal uses
    cells (i, i) with s the signed distance from the centre.
    """
    U, g = state.U, state.grid
    X, Y = g.centers()
    if which == "y0.5":
        j = g.ny // 2
        rows = 0.5 * (U[:, j - 1] + U[:, j]) if g.ny % 2 == 0 else U[:, j]
        return X[:, 0], rows
    if which == "x0.5":
        i = g.nx // 2
        rows = 0.5 * (U[i - 1] + U[i]) if g.nx % 2 == 0 else U[i]
        return Y[0], rows
    if which == "diagonal":
        if g.nx != g.ny:
            raise ConfigError("diagonal cut needs a square grid")
        k = np.arange(g.nx)
        cx = g.origin[0] + 0.5 * g.nx * g.dx
        return np.sqrt(2.0) * (X[k, k] - cx), U[k, k]
    raise ConfigError(f"unknown cut {which!r}")


def write_cut_line(path, state, which):
    s, rows = cut_line(state, which)
    width = max(state.N, 2)
    cols = _primitive_columns(rows, width)
    with open(path, "w", newline="") as fh:
        fh.write(f"# cut={which} t={state.time!r}\n")
        w = csv.writer(fh)
        w.writerow(["s", "h", "u_m", "v_m"] + _moment_names(state.N, width))
        for k in range(s.size):
            w.writerow([repr(float(s[k]))] + [repr(float(c[k])) for c in cols])


@dataclass
class ConservationMonitor:
    """Observer recording total mass at each output time."""

    rows: list = field(default_factory=list)

    def __call__(self, state):
        self.rows.append((state.time, state.mass()))

    def drift(self):
        m0 = self.rows[0][1]
        return max(abs(m - m0) for _, m in self.rows) / abs(m0)

    def write(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mass", "relative_drift"])
            m0 = self.rows[0][1]
            for t, m in self.rows:
                w.writerow([repr(t), repr(m), repr((m - m0) / m0)])

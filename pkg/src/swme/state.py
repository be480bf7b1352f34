"""Conserved and primitive states of the moment system.

Interleaved conserved layout: U = (h, hu, hv, h a_1, h b_1, ..., h a_N, h b_N).
The matching primitive vector w drops h: w = (u, v, a_1, b_1, ..., a_N, b_N),
so conserved index r >= 1 corresponds to primitive index r - 1.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveDepth


def n_vars(N):
    return 2 * N + 3


def _as_tuple(values):
    return tuple(float(x) for x in np.atleast_1d(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class ConservedState:
    h: float
    hum: float
    hvm: float
    halpha: tuple
    hbeta: tuple

    def __post_init__(self):
        object.__setattr__(self, "halpha", _as_tuple(self.halpha))
        object.__setattr__(self, "hbeta", _as_tuple(self.hbeta))
        if len(self.halpha) != len(self.hbeta) or len(self.halpha) < 1:
            raise ValueError("halpha and hbeta must have the same positive length")
        if not self.h > 0:
            raise NonPositiveDepth(f"h must be positive, got {self.h!r}")

    @property
    def N(self):
        return len(self.halpha)

    def as_vector(self):
        U = np.empty(n_vars(self.N))
        U[0], U[1], U[2] = self.h, self.hum, self.hvm
        U[3::2] = self.halpha
        U[4::2] = self.hbeta
        return U

    @classmethod
    def from_vector(cls, U):
        U = np.asarray(U, dtype=float)
        if U.size < 5 or U.size % 2 == 0:
            raise ValueError("conserved vector must have length 2N+3 with N >= 1")
        return cls(U[0], U[1], U[2], U[3::2], U[4::2])


@dataclass(frozen=True)
class PrimitiveState:
    h: float
    um: float
    vm: float
    alpha: tuple
    beta: tuple
    g: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_tuple(self.alpha))
        object.__setattr__(self, "beta", _as_tuple(self.beta))
        if len(self.alpha) != len(self.beta) or len(self.alpha) < 1:
            raise ValueError("alpha and beta must have the same positive length")
        if not self.h > 0:
            raise NonPositiveDepth(f"h must be positive, got {self.h!r}")
        if not self.g > 0:
            raise ValueError("gravity must be positive")

    @property
    def N(self):
        return len(self.alpha)

    def w(self):
        """Primitive vector (u, v, a_1, b_1, ...)."""
        w = np.empty(2 * self.N + 2)
        w[0], w[1] = self.um, self.vm
        w[2::2] = self.alpha
        w[3::2] = self.beta
        return w

    @classmethod
    def from_w(cls, h, w, g=1.0):
        w = np.asarray(w, dtype=float)
        return cls(h, w[0], w[1], w[2::2], w[3::2], g)

    def replace(self, **kw):
        d = dict(h=self.h, um=self.um, vm=self.vm, alpha=self.alpha, beta=self.beta, g=self.g)
        d.update(kw)
        return PrimitiveState(**d)


def to_primitive(U, g=1.0):
    if not isinstance(U, ConservedState):
        U = np.asarray(U, dtype=float)
        if not U[0] > 0:
            raise NonPositiveDepth(f"h must be positive, got {U[0]!r}")
        U = ConservedState.from_vector(U)
    h = U.h
    return PrimitiveState(h, U.hum / h, U.hvm / h,
                          np.asarray(U.halpha) / h, np.asarray(U.hbeta) / h, g)


def to_conserved(V):
    h = V.h
    return ConservedState(h, h * V.um, h * V.vm,
                          h * np.asarray(V.alpha), h * np.asarray(V.beta))


@dataclass(frozen=True)
class SourceParams:
    nu: float = 0.0
    lam: float = 1.0
    g: float = 1.0
    e: tuple = (0.0, 0.0, 1.0)
    bottom_grad: tuple = field(default=(0.0, 0.0))

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("viscosity must be non-negative")
        if self.nu > 0 and not self.lam > 0:
            raise ValueError("slip length must be positive when nu > 0")
        if abs(np.linalg.norm(self.e) - 1.0) > 1e-12:
            raise ValueError("gravity direction must be a unit vector")

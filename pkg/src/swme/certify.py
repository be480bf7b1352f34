"""Certification sweeps: rotational invariance and hyperbolicity per (variant, N)."""
from dataclasses import dataclass, field

import numpy as np

from .models import Variant, as_variant, coefficient_matrices
from .spectral import Classification, invariance_residual, inf_norm, report_from_matrix
from .state import PrimitiveState

CORNER_BETAS = (0.0, 0.5)


def random_state(N, rng, g=1.0, spread=1.0):
    """h in [0.5, 2], velocities and moments in [-spread, spread]."""
    c = spread
    return PrimitiveState(rng.uniform(0.5, 2.0), rng.uniform(-c, c), rng.uniform(-c, c),
                          rng.uniform(-c, c, N), rng.uniform(-c, c, N), g)


def corner_state(N, beta1, rng, g=1.0):
    V = random_state(N, rng, g)
    alpha = np.array(V.alpha)
    beta = np.array(V.beta)
    alpha[0], beta[0] = 0.0, beta1
    return V.replace(alpha=tuple(alpha), beta=tuple(beta))


def expected_class(variant, N, alpha1, beta1):
    """Classification the theory predicts, or None where only reporting applies."""
    tag = as_variant(variant).tag
    if tag is Variant.CUSTOM or (tag is Variant.SWME and N >= 2):
        return None
    if tag is Variant.GLOBAL and N >= 2:
        return Classification.HYPERBOLIC
    if alpha1 == 0 and beta1 != 0:
        return Classification.WEAK
    return Classification.HYPERBOLIC


@dataclass
class StateCheck:
    label: str
    alpha1: float
    beta1: float
    classification: Classification
    expected: Classification
    rel_gap: float

    @property
    def contradiction(self):
        return self.expected is not None and self.classification is not self.expected


@dataclass
class CertResult:
    variant: str
    N: int
    max_residual: float
    checks: list = field(default_factory=list)

    @property
    def contradictions(self):
        return [c for c in self.checks if c.contradiction]

    @property
    def complex_found(self):
        return any(c.classification is Classification.NON for c in self.checks)

    @property
    def min_rel_gap(self):
        gaps = [c.rel_gap for c in self.checks if c.classification is Classification.HYPERBOLIC]
        return min(gaps) if gaps else float("nan")

    def to_text(self):
        counts = {}
        for c in self.checks:
            counts[c.classification.value] = counts.get(c.classification.value, 0) + 1
        summary = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        lines = [f"[{self.variant} N={self.N}] invariance_residual={self.max_residual:.3e} "
                 f"min_rel_gap={self.min_rel_gap:.3e} {summary}"]
        for c in self.checks:
            if c.label.startswith("corner") or c.contradiction:
                flag = " CONTRADICTION" if c.contradiction else ""
                exp = c.expected.value if c.expected else "report-only"
                lines.append(f"  {c.label} alpha1={c.alpha1:.3g} beta1={c.beta1:.3g} "
                             f"-> {c.classification.value} (expected {exp}){flag}")
        return "\n".join(lines)


def certify(variant, N, n_states=20, n_angles=16, rng=None, corners=CORNER_BETAS, n_far=0, far_spread=3.0):
    """Residuals over random (state, angle) pairs plus classification of the x-direction matrix.

    ``n_far`` extra states with moments up to ``far_spread`` probe the region far
    from equilibrium where the unmodified system can lose hyperbolicity.
    """
    variant = as_variant(variant)
    rng = np.random.default_rng(0) if rng is None else rng
    res = CertResult(variant.name, N, 0.0)
    states = [("random", random_state(N, rng)) for _ in range(n_states)]
    states += [("far", random_state(N, rng, spread=far_spread)) for _ in range(n_far)]
    states += [(f"corner{k}", corner_state(N, b, rng)) for k, b in enumerate(corners)]
    for label, V in states:
        A, B = coefficient_matrices(V, variant)
        for th in rng.uniform(0, 2 * np.pi, n_angles):
            r = invariance_residual(V, variant, th) / (1.0 + inf_norm(A))
            res.max_residual = max(res.max_residual, r)
        rep = report_from_matrix(A)
        a1, b1 = V.alpha[0], V.beta[0]
        res.checks.append(StateCheck(label, a1, b1, rep.classification, expected_class(variant, N, a1, b1),
                                     rep.min_gap / (1.0 + rep.spectral_radius)))
    return res

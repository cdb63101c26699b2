"""Dual action, orbit/stabilizer dimensions, strata, and the admissibility test.

The group acts on frequency space by xi -> h^{-T} xi.  Orbit dimension at xi
is the rank of the tangent map X -> X^T xi over a basis of the algebra; the
strata O_i collect points whose orbit has dimension i, and O_d (the top
stratum) is conull exactly for the admissible families.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DilationAlgebra, mat_exp, rank_tol, roots_decompose

PROBE_SEED = 424243
N_ADMISSIBILITY_PROBES = 64


@dataclass(frozen=True)
class GroupElement:
    """h = exp(sum_j t_j X_j) with its transpose-inverse cached."""

    alg: DilationAlgebra
    params: np.ndarray
    h: np.ndarray = field(init=False)
    h_inv_T: np.ndarray = field(init=False)

    def __init__(self, alg: DilationAlgebra, params):
        t = np.asarray(params, dtype=float).reshape(-1)
        Z = alg.element(t)
        object.__setattr__(self, "alg", alg)
        object.__setattr__(self, "params", t)
        object.__setattr__(self, "h", mat_exp(Z))
        object.__setattr__(self, "h_inv_T", mat_exp(-Z.T))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.alg, -self.params)


def dual_act(g: GroupElement, xi) -> np.ndarray:
    """The dual action h^{-T} xi."""
    return g.h_inv_T @ np.asarray(xi, dtype=float)


def tangent_matrix(alg: DilationAlgebra, xi) -> np.ndarray:
    """n x d matrix [X_1^T xi | ... | X_d^T xi] spanning the orbit tangent."""
    x = np.asarray(xi, dtype=float).reshape(alg.n)
    return np.column_stack([G.T @ x for G in alg.generators])


def orbit_dim(alg: DilationAlgebra, xi) -> int:
    return rank_tol(tangent_matrix(alg, xi), alg.tol)


def stabilizer_dim(alg: DilationAlgebra, xi) -> int:
    return alg.d - orbit_dim(alg, xi)


def coadjoint_orbit_dim(alg: DilationAlgebra, xi) -> int:
    """dim Ad*(G)(xi, Y*) = 2 dim H^T xi, for every Y*."""
    return 2 * orbit_dim(alg, xi)


@dataclass(frozen=True)
class AdmissibilityVerdict:
    status: str  # admissible | not_admissible | hypotheses_violated
    reasons: tuple

    def __bool__(self) -> bool:
        return self.status == "admissible"


def is_admissible(alg: DilationAlgebra) -> AdmissibilityVerdict:
    """Admissibility of the quasi-regular representation for H = exp(h).

    Within the positive-spectrum class: admissible iff det is not identically
    one on H (some generator has nonzero trace) and the top stratum O_d is
    nonempty.  O_d is Zariski-open, so a handful of generic probes decides
    nonemptiness; 64 deterministic pseudo-random points guard rank flukes.
    """
    reasons = []
    rd = roots_decompose(alg)
    if not rd.all_real():
        reasons.append("non-real joint root: spec(h) in R+ fails")
        return AdmissibilityVerdict("hypotheses_violated", tuple(reasons))
    traces = [float(np.trace(G)) for G in alg.generators]
    scale = max(alg.scale(), 1.0)
    det_triv = all(abs(tr) <= alg.tol * scale for tr in traces)
    if det_triv:
        reasons.append("all generator traces vanish: det|_H = 1 identically")
    rng = np.random.default_rng(PROBE_SEED)
    probes = rng.standard_normal((N_ADMISSIBILITY_PROBES, alg.n))
    top_hit = any(orbit_dim(alg, xi) == alg.d for xi in probes)
    if not top_hit:
        reasons.append(f"no probe of {N_ADMISSIBILITY_PROBES} reached orbit dimension d")
    if det_triv or not top_hit:
        return AdmissibilityVerdict("not_admissible", tuple(reasons))
    reasons.append("nonzero trace and nonempty top stratum")
    return AdmissibilityVerdict("admissible", tuple(reasons))


@dataclass(frozen=True)
class SampleSpec:
    """Deterministic probe cloud or grid for stratification."""

    kind: str = "cloud"  # cloud | grid
    count: int = 512
    extent: float = 3.0
    seed: int = PROBE_SEED

    def points(self, n: int) -> np.ndarray:
        if self.kind == "cloud":
            rng = np.random.default_rng(self.seed)
            return self.extent * rng.standard_normal((self.count, n))
        if self.kind == "grid":
            per_axis = max(2, int(round(self.count ** (1.0 / n))))
            axes = [np.linspace(-self.extent, self.extent, per_axis)] * n
            mesh = np.meshgrid(*axes, indexing="ij")
            return np.stack([g.ravel() for g in mesh], axis=-1)
        raise ValueError(f"unknown sample kind {self.kind!r}")


@dataclass(frozen=True)
class StratumReport:
    probes: tuple  # (xi tuple, orbit_dim) pairs
    census: dict  # dim -> count
    d_max: int
    group_dim: int
    conull_threshold: float
    top_conull: bool

    def to_json(self) -> dict:
        return {
            "census": {str(k): v for k, v in sorted(self.census.items())},
            "d_max": self.d_max,
            "group_dim": self.group_dim,
            "conull_threshold": self.conull_threshold,
            "top_stratum_conull": self.top_conull,
            "n_probes": len(self.probes),
        }


def stratify(alg: DilationAlgebra, spec: SampleSpec | None = None,
             conull_threshold: float = 0.99) -> StratumReport:
    """Census of orbit dimensions over a deterministic sample.

    The top observed stratum is flagged conull when its sample fraction
    exceeds the threshold.  This is a sampling surrogate for the measure
    statement, never used where an exact verdict is required.
    """
    spec = spec or SampleSpec()
    pts = spec.points(alg.n)
    probes = []
    census: dict[int, int] = {}
    for xi in pts:
        k = orbit_dim(alg, xi)
        census[k] = census.get(k, 0) + 1
        probes.append((tuple(float(v) for v in xi), k))
    d_max = max(census) if census else 0
    frac = census.get(d_max, 0) / max(len(pts), 1)
    return StratumReport(
        probes=tuple(probes),
        census=census,
        d_max=d_max,
        group_dim=alg.d,
        conull_threshold=conull_threshold,
        top_conull=bool(frac > conull_threshold),
    )

"""Layer decomposition and explicit topological sections for diag+nilpotent pairs.

Given a commuting pair (A diagonalizable with real eigenvalues, X nilpotent),
an adapted basis puts X into the 0/1-subdiagonal normal form on each
eigenspace W of A.  Layers are indexed by the first coordinate b with
p_b(Xv) != 0; the canonical representative of v is

    v* = exp(sA + tX) v,   t = -p_b(v)/p_b(Xv),   s = -ln|p_b(Xv)| / lambda,

which lands on the section {p_b = 0, |p_b(X .)| = 1} of its layer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    NonCommuting,
    NotCase1,
    NotDiagonalizable,
    NotInLayer,
    NotNilpotent,
    ZeroEigenvalue,
)
from .linalg import (
    as_matrix,
    check_commuting,
    mat_exp,
    null_space,
    orth_columns,
    rank_tol,
)


@dataclass(frozen=True)
class EigenBlock:
    """Bookkeeping for one eigenspace in the adapted basis."""

    eigenvalue: float
    offset: int  # first adapted-coordinate index (0-based)
    dim: int
    epsilon: tuple  # local pattern, entries for i = 2..dim
    active: tuple  # B = local indices i with epsilon_i != 0


@dataclass(frozen=True)
class LayeredFamily:
    """Commuting (A, X) pair in adapted coordinates, immutable after build."""

    A: np.ndarray
    X: np.ndarray
    basis: np.ndarray  # columns = adapted basis
    basis_inv: np.ndarray
    blocks: tuple
    tol: float

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def coords(self, v) -> np.ndarray:
        """Adapted coordinates of v (the p_i functionals are rows of basis_inv)."""
        return self.basis_inv @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class LayerIndex:
    block: int  # index into fam.blocks
    eigenvalue: float
    b: int  # local layer index, 2 <= b <= block dim
    marginal: bool  # within 10x of the zero threshold


@dataclass(frozen=True)
class SectionPoint:
    layer: LayerIndex
    representative: np.ndarray
    witness: tuple  # (s, t) with exp(sA + tX) v = v*
    sign: int

    def to_json(self) -> dict:
        return {
            "block": self.layer.block,
            "eigenvalue": self.layer.eigenvalue,
            "layer": self.layer.b,
            "representative": [float(x) for x in self.representative],
            "witness_s": float(self.witness[0]),
            "witness_t": float(self.witness[1]),
            "sign": self.sign,
        }


def _nilpotent_exp(X: np.ndarray, t: float) -> np.ndarray:
    """exp(tX) for nilpotent X as the exact finite sum."""
    n = X.shape[0]
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, n):
        term = term @ (t * X) / k
        E = E + term
    return E


def _cluster_reals(values: np.ndarray, tol: float) -> list[float]:
    """Cluster means of real values, sorted descending."""
    out: list[list[float]] = []
    for v in np.sort(values)[::-1]:
        if out and abs(v - out[-1][0]) <= tol:
            out[-1].append(float(v))
        else:
            out.append([float(v)])
    return [float(np.mean(cl)) for cl in out]


def _nilpotency_check(X: np.ndarray, tol: float) -> None:
    n = X.shape[0]
    nrm = np.linalg.norm(X)
    if nrm == 0.0:
        return
    P = np.linalg.matrix_power(X / nrm, n)
    if np.linalg.norm(P) > tol * n:
        raise NotNilpotent("X^n does not vanish")


def _jordan_chain_basis(N: np.ndarray, tol: float) -> tuple[np.ndarray, tuple]:
    """Columns C with C^-1 N C in 0/1-subdiagonal form, plus the epsilon pattern.

    Chains are built top-down from the kernel filtration of N with
    deterministic pivoting, each chain listed as (v, Nv, N^2 v, ...).
    """
    m = N.shape[0]
    nrm = np.linalg.norm(N)
    if nrm <= tol:
        return np.eye(m), tuple([0] * (m - 1))
    kernels = [np.zeros((m, 0))]
    P = np.eye(m)
    q = 0
    for k in range(1, m + 1):
        P = P @ (N / nrm)
        K = null_space(P, tol=1e-8, scale=1.0)
        kernels.append(K)
        q = k
        if K.shape[1] == m:
            break
    chains: list[list[np.ndarray]] = []
    for k in range(q, 0, -1):
        # span to avoid: ker(N^{k-1}) plus the height-k elements of longer chains
        avoid_cols = [kernels[k - 1]]
        for ch in chains:
            if len(ch) >= k:
                avoid_cols.append(ch[len(ch) - k].reshape(-1, 1))
        stacked = np.hstack(avoid_cols)
        avoid = orth_columns(stacked, tol=1e-10) if stacked.shape[1] else np.zeros((m, 0))
        cand = kernels[k]
        for j in range(cand.shape[1]):
            v = cand[:, j]
            if avoid.shape[1]:
                v = v - avoid @ (avoid.T @ v)
            if np.linalg.norm(v) > 1e-6:
                v = v / np.linalg.norm(v)
                chain = [v]
                w = v
                for _ in range(k - 1):
                    w = N @ w
                    chain.append(w)
                chains.append(chain)
                avoid = orth_columns(np.hstack([avoid, v.reshape(-1, 1)]), tol=1e-10)
    chains.sort(key=lambda ch: (-len(ch)))
    cols = [w for ch in chains for w in ch]
    C = np.column_stack(cols)
    if rank_tol(C, 1e-10) != m:
        raise NotNilpotent("Jordan chain construction did not span the eigenspace")
    eps = []
    for i, ch in enumerate(chains):
        if i > 0:
            eps.append(0)
        eps.extend([1] * (len(ch) - 1))
    return C, tuple(eps)


def normal_form(A, X, tol: float = 1e-9) -> LayeredFamily:
    """Adapted basis in which A = lambda I on each eigenspace and X has the
    0/1-subdiagonal pattern; raises NotDiagonalizable / NotNilpotent /
    NonCommuting when the hypotheses fail."""
    A = as_matrix(A)
    X = as_matrix(X, A.shape[0])
    n = A.shape[0]
    ok, worst = check_commuting([A, X], tol)
    if not ok:
        raise NonCommuting(f"[A, X] has norm {worst:.3g}")
    _nilpotency_check(X, tol)
    eigs = np.linalg.eigvals(A)
    scale = max(np.max(np.abs(eigs)), 1.0)
    if np.max(np.abs(eigs.imag)) > 1e-8 * scale:
        raise NotDiagonalizable("A has non-real eigenvalues")
    values = _cluster_reals(eigs.real, 1e-8 * scale)
    blocks = []
    cols = []
    offset = 0
    for lam in values:
        W = null_space(A - lam * np.eye(n), tol=1e-8, scale=max(np.linalg.norm(A), 1.0))
        if W.shape[1] == 0:
            continue
        # commuting implies X preserves W; verify
        resid = np.linalg.norm(X @ W - W @ (W.T @ X @ W))
        if resid > 1e-7 * max(np.linalg.norm(X), 1.0):
            raise NotDiagonalizable("eigenspace of A is not X-invariant")
        Nw = W.T @ X @ W
        C, eps = _jordan_chain_basis(Nw, tol)
        cols.append(W @ C)
        active = tuple(i for i in range(2, W.shape[1] + 1) if eps[i - 2] == 1)
        blocks.append(EigenBlock(float(lam), offset, W.shape[1], eps, active))
        offset += W.shape[1]
    if offset != n:
        raise NotDiagonalizable("geometric multiplicities do not sum to n")
    P = np.hstack(cols)
    Pinv = np.linalg.inv(P)
    # snap the adapted forms and verify
    Xa = Pinv @ X @ P
    sub = np.diag(Xa, -1)
    expected = np.zeros(n - 1) if n > 1 else np.zeros(0)
    for blk in blocks:
        for i in blk.active:
            expected[blk.offset + i - 2] = 1.0
    off = Xa - np.diag(expected, -1) if n > 1 else Xa
    if np.linalg.norm(off) > 1e-7 * max(np.linalg.norm(X), 1.0):
        raise NotNilpotent("adapted X is not in 0/1-subdiagonal form")
    return LayeredFamily(A=A, X=X, basis=P, basis_inv=Pinv, blocks=tuple(blocks), tol=tol)


def layer_index(fam: LayeredFamily, v) -> LayerIndex | None:
    """Smallest active index b with p_b(Xv) != 0, scanned block by block.

    Returns None when every candidate coordinate vanishes (v is outside the
    layered part of O_2).  Points within a factor 10 of the zero threshold
    are flagged marginal and a stability warning is emitted.
    """
    v = np.asarray(v, dtype=float).reshape(fam.n)
    w = fam.coords(v)
    thr = fam.tol * max(np.linalg.norm(v), 1.0)
    for bi, blk in enumerate(fam.blocks):
        for i in blk.active:
            val = w[blk.offset + i - 2]  # p_i(Xv) = eps_i * p_{i-1}(v)
            if abs(val) > thr:
                marginal = bool(abs(val) < 10.0 * thr)
                if marginal:
                    warnings.warn(
                        "layer index decided within 10x of the zero threshold",
                        stacklevel=2,
                    )
                return LayerIndex(bi, blk.eigenvalue, i, marginal)
    return None


def section_point(fam: LayeredFamily, v) -> SectionPoint:
    """Canonical representative of v on the section of its layer.

    Witness (s, t) satisfies exp(sA + tX) v = v* with p_b(v*) = 0 and
    |p_b(X v*)| = 1; raises NotInLayer / ZeroEigenvalue when undefined.
    """
    v = np.asarray(v, dtype=float).reshape(fam.n)
    li = layer_index(fam, v)
    if li is None:
        raise NotInLayer("p_i(Xv) = 0 for all active indices")
    blk = fam.blocks[li.block]
    lam = blk.eigenvalue
    if abs(lam) <= fam.tol:
        raise ZeroEigenvalue("active eigenspace has eigenvalue 0")
    w = fam.coords(v)
    c1 = w[blk.offset + li.b - 2]  # p_b(Xv)
    c0 = w[blk.offset + li.b - 1]  # p_b(v)
    t = -c0 / c1
    s = -np.log(abs(c1)) / lam
    # A and X commute, and exp(tX) is an exact polynomial (X nilpotent), so the
    # split form stays finite even for the huge t of near-boundary points
    vstar = mat_exp(fam.A, s) @ (_nilpotent_exp(fam.X, t) @ v)
    wstar = fam.coords(vstar)
    resid0 = abs(wstar[blk.offset + li.b - 1])
    resid1 = abs(abs(wstar[blk.offset + li.b - 2]) - 1.0)
    tol = 1e-7 * max(1.0, np.linalg.norm(vstar))
    if resid0 > tol or resid1 > tol:
        raise NotInLayer(
            f"section residuals too large (p_b(v*) = {resid0:.3g}, "
            f"|p_b(Xv*)|-1 = {resid1:.3g})"
        )
    sign = 1 if wstar[blk.offset + li.b - 2] > 0 else -1
    return SectionPoint(layer=li, representative=vstar, witness=(float(s), float(t)), sign=sign)


@dataclass(frozen=True)
class LayerDescriptor:
    """Affine description of one layer and its section in the given basis.

    omega_functional w encodes Omega_b = {v : w . v != 0} intersected with the
    vanishing of the functionals in `prior`; the section adds p_b(v) = 0 and
    |w . v| = 1.
    """

    b: int
    nonempty: bool
    omega_functional: np.ndarray
    prior: tuple
    section_zero_coord: int

    def describe(self) -> str:
        if not self.nonempty:
            return f"Omega_{self.b} = (empty)"
        terms = " and ".join(
            f"({_lin(f)}) = 0" for f in self.prior
        )
        cond = f"{_lin(self.omega_functional)} != 0"
        if terms:
            cond = f"{terms} and {cond}"
        return (
            f"Omega_{self.b} = {{v : {cond}}}; "
            f"Sigma_{self.b} = {{v in Omega_{self.b} : v_{self.section_zero_coord} = 0, "
            f"|{_lin(self.omega_functional)}| = 1}}"
        )


def _lin(w) -> str:
    parts = []
    for i, c in enumerate(w):
        if abs(c) > 0:
            parts.append(f"{c:+g}*v_{i + 1}")
    return " ".join(parts) if parts else "0"


def case1_sections(A, X, tol: float = 1e-9) -> tuple[LayerDescriptor, LayerDescriptor]:
    """Explicit layer/section descriptors for the 3x3 single-root families.

    Requires n = 3, A = lambda I + (strictly lower) with lambda != 0, and X
    strictly lower triangular in the given basis; descriptors follow the
    x_21 / x_32 dichotomy.
    """
    A = as_matrix(A, 3)
    X = as_matrix(X, 3)
    ok, worst = check_commuting([A, X], tol)
    if not ok:
        raise NonCommuting(f"[A, X] has norm {worst:.3g}")
    lam = float(np.trace(A)) / 3.0
    scale = max(np.linalg.norm(A), 1.0)
    if abs(lam) <= tol * scale:
        raise NotCase1("single root must be nonzero")
    Y = A - lam * np.eye(3)
    if np.max(np.abs(np.triu(Y))) > tol * scale or np.max(np.abs(np.triu(X))) > tol * scale:
        raise NotCase1("A - lambda*I and X must be strictly lower triangular")
    _nilpotency_check(X, tol)
    x21, x31, x32 = X[1, 0], X[2, 0], X[2, 1]
    xscale = max(np.linalg.norm(X), 1.0)
    has21 = abs(x21) > tol * xscale
    has32 = abs(x32) > tol * xscale
    # p_2(Xv) = x21 v1 ; p_3(Xv) = x31 v1 + x32 v2
    f2 = np.array([x21, 0.0, 0.0])
    f3 = np.array([x31, x32, 0.0])
    omega2 = LayerDescriptor(2, has21, f2, (), section_zero_coord=2)
    omega3_nonempty = (has21 and has32) or (not has21 and rank_tol(f3.reshape(1, -1), tol) > 0)
    prior3 = (f2,) if has21 else ()
    omega3 = LayerDescriptor(3, bool(omega3_nonempty), f3, prior3, section_zero_coord=3)
    return omega2, omega3

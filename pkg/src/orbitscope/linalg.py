"""Dense small-matrix primitives for commuting generator sets.

Everything here operates on n x n real matrices with n <= 6: matrix
exponential, tolerance-aware rank, commutativity checks, simultaneous
triangularization, and the joint root / generalized-eigenspace
decomposition that the orbit and classification machinery is built on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ComplexSpectrum,
    IllConditioned,
    MatrixOverflow,
    NonCommuting,
    NotDiagonalizable,
)

DEFAULT_TOL = 1e-9
MAX_DIM = 6

# Fixed seed for the generic linear combination used to seed joint roots;
# reproducibility of the decomposition depends on it.
_ROOT_SEED = 20260808


def as_matrix(M, n: int | None = None) -> np.ndarray:
    """Validate and return a finite square float matrix."""
    A = np.array(M, dtype=float)
    if A.ndim == 1:
        k = int(round(np.sqrt(A.size)))
        if k * k != A.size:
            raise ValueError(f"flat matrix of length {A.size} is not square")
        A = A.reshape(k, k)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if n is not None and A.shape[0] != n:
        raise ValueError(f"expected a {n}x{n} matrix, got {A.shape[0]}x{A.shape[0]}")
    if not (1 <= A.shape[0] <= MAX_DIM):
        raise ValueError(f"dimension {A.shape[0]} outside supported range 1..{MAX_DIM}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def mat_exp(M, scale: float = 1.0, norm_bound: float = 350.0) -> np.ndarray:
    """exp(scale * M) by scaling-and-squaring with a truncated series.

    Matrices are at most 6x6 so accuracy dominates speed.  Raises
    MatrixOverflow when ||scale * M||_F exceeds `norm_bound` instead of
    silently saturating.
    """
    A = as_matrix(M) * float(scale)
    nrm = np.linalg.norm(A)
    if not np.isfinite(nrm) or nrm > norm_bound:
        raise MatrixOverflow(f"||scale*M|| = {nrm:.3g} exceeds bound {norm_bound:.3g}")
    squarings = max(0, int(np.ceil(np.log2(nrm))) + 1) if nrm > 0.5 else 0
    B = A / (2.0 ** squarings)
    E = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, 40):
        term = term @ B / k
        E = E + term
        if np.linalg.norm(term) < 1e-18 * max(1.0, np.linalg.norm(E)):
            break
    for _ in range(squarings):
        E = E @ E
    return E


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def check_commuting(generators, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Whether all pairwise commutators vanish relative to the generator scales.

    Returns (ok, worst) with worst = max ||[X_i, X_j]|| over i < j.
    """
    mats = [as_matrix(G) for G in generators]
    if len({A.shape[0] for A in mats}) > 1:
        raise ValueError("generators must share one dimension")
    worst = 0.0
    ok = True
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            c = np.linalg.norm(commutator(mats[i], mats[j]))
            worst = max(worst, c)
            scale = max(np.linalg.norm(mats[i]) * np.linalg.norm(mats[j]), 1e-300)
            if c > tol * scale:
                ok = False
    return ok, worst


def rank_tol(M, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above tol * (largest singular value)."""
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(M, tol: float = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space.

    With `scale` given, singular values are compared against tol * scale
    (absolute cut); needed when M is a power of a normalized matrix and can
    be uniformly tiny.
    """
    A = np.atleast_2d(np.asarray(M))
    u, s, vh = np.linalg.svd(A)
    ref = scale if scale is not None else (s[0] if s.size else 0.0)
    r = int(np.sum(s > tol * ref)) if ref > 0 else 0
    return vh[r:].conj().T


def rank_abs(M, atol: float) -> int:
    """Rank with an absolute singular-value cut (for powers of normalized matrices)."""
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > atol))


def orth_columns(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column space."""
    A = np.atleast_2d(np.asarray(M))
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    top = s[0] if s.size else 0.0
    r = int(np.sum(s > tol * top)) if top > 0 else 0
    return u[:, :r]


@dataclass(frozen=True)
class DilationAlgebra:
    """Generator set of the abelian dilation algebra; single source of truth for H.

    `generators` is the basis of the algebra (d commuting n x n matrices).
    Validated on construction: shared dimension, commutativity to `tol`,
    linear independence.
    """

    generators: tuple
    n: int
    tol: float = DEFAULT_TOL

    def __init__(self, generators, n: int | None = None, tol: float = DEFAULT_TOL):
        mats = [as_matrix(G, n) for G in generators]
        if not mats:
            raise ValueError("at least one generator required")
        dim = mats[0].shape[0]
        for A in mats:
            if A.shape[0] != dim:
                raise ValueError("generators must share one dimension")
        if len(mats) > dim:
            raise ValueError(f"d = {len(mats)} exceeds n = {dim}")
        ok, worst = check_commuting(mats, tol)
        if not ok:
            raise NonCommuting(f"worst commutator norm {worst:.3g} exceeds tolerance")
        stacked = np.stack([A.ravel() for A in mats])
        if rank_tol(stacked, tol) != len(mats):
            raise ValueError("generators are linearly dependent")
        frozen = []
        for A in mats:
            A = A.copy()
            A.flags.writeable = False
            frozen.append(A)
        object.__setattr__(self, "generators", tuple(frozen))
        object.__setattr__(self, "n", dim)
        object.__setattr__(self, "tol", float(tol))

    @property
    def d(self) -> int:
        return len(self.generators)

    def element(self, params) -> np.ndarray:
        """The algebra element sum_j t_j X_j."""
        t = np.asarray(params, dtype=float)
        if t.shape != (self.d,):
            raise ValueError(f"expected {self.d} parameters, got shape {t.shape}")
        return np.einsum("j,jkl->kl", t, np.stack(self.generators))

    def scale(self) -> float:
        return max(np.linalg.norm(G) for G in self.generators)

    def conjugated(self, P) -> "DilationAlgebra":
        P = as_matrix(P, self.n)
        Pinv = np.linalg.inv(P)
        return DilationAlgebra([Pinv @ G @ P for G in self.generators], tol=self.tol)


@dataclass(frozen=True)
class RootDecomposition:
    """Joint roots of the algebra with merged real blocks.

    roots[k] is the complex vector of values of the k-th root on the
    generators; blocks[k] is a real orthonormal basis (columns) of the merged
    generalized eigenspace V_k (conjugate pairs merged, dimension 2m).
    `epsilon[k]` is the 0/1 subdiagonal pattern of the chosen nilpotent on
    V_k (empty tuple when there is none).
    """

    roots: tuple
    blocks: tuple
    nilpotent_basis: tuple
    epsilon: tuple
    p: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p", len(self.roots))

    def is_real(self, k: int) -> bool:
        return bool(np.max(np.abs(np.imag(self.roots[k]))) < 1e-12 * _root_scale(self.roots))

    def all_real(self) -> bool:
        return all(self.is_real(k) for k in range(self.p))

    def zero_root_index(self, scale: float, tol: float) -> int | None:
        for k, lam in enumerate(self.roots):
            if np.max(np.abs(lam)) <= tol * max(scale, 1.0):
                return k
        return None


def _root_scale(roots) -> float:
    m = max((float(np.max(np.abs(lam))) for lam in roots), default=0.0)
    return max(m, 1.0)


def _cluster_values(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Greedy clustering of complex values; returns index arrays."""
    order = np.lexsort((values.imag, values.real))
    clusters: list[list[int]] = []
    for idx in order:
        placed = False
        for cl in clusters:
            if abs(values[idx] - values[cl[0]]) <= tol:
                cl.append(idx)
                placed = True
                break
        if not placed:
            clusters.append([idx])
    return [np.array(cl) for cl in clusters]


def _generalized_eigenspace(A: np.ndarray, mu: complex, n: int, tol: float) -> np.ndarray:
    """Stabilized kernel of A - mu by iterated first-power kernels.

    K_{j+1} = {v : (A - mu)v in K_j}; every step is a single null-space
    computation conditioned like the spectral gap itself (an n-th matrix
    power would lose resolution like gap^n).
    """
    M = A.astype(complex) - mu * np.eye(n)
    nrm = np.linalg.norm(M)
    if nrm > 0:
        M = M / nrm
    K = null_space(M, 1e-8, scale=1.0)
    for _ in range(n - 1):
        if K.shape[1] == n:
            break
        resid = M - K @ (K.conj().T @ M)  # (I - P_K) M
        K_new = null_space(resid, 1e-8, scale=1.0)
        if K_new.shape[1] == K.shape[1]:
            break
        K = K_new
    return K


def roots_decompose(alg: DilationAlgebra, max_retries: int = 6) -> RootDecomposition:
    """All joint roots and generalized eigenspaces of the commuting family.

    A generic random combination of the generators (deterministic seed) seeds
    the joint spectrum; the run is retried with a fresh combination when the
    clustering is ambiguous, and IllConditioned is raised if that never
    resolves.
    """
    n, d = alg.n, alg.d
    scale = alg.scale()
    tol = alg.tol
    rng = np.random.default_rng(_ROOT_SEED)
    last_err = None
    for _ in range(max_retries):
        coeffs = rng.standard_normal(d)
        Agen = alg.element(coeffs)
        eigs = np.linalg.eigvals(Agen)
        cl_tol = max(np.max(np.abs(eigs)), 1.0) * 1e-6
        clusters = _cluster_values(eigs, cl_tol)
        try:
            raw = []
            for cl in clusters:
                mu = complex(np.mean(eigs[cl]))
                B = _generalized_eigenspace(Agen, mu, n, tol=1e-8)
                if B.shape[1] != len(cl):
                    raise IllConditioned(
                        f"eigenspace dimension {B.shape[1]} != multiplicity {len(cl)}"
                    )
                lam = np.empty(d, dtype=complex)
                for j, X in enumerate(alg.generators):
                    lam[j] = np.trace(B.conj().T @ X.astype(complex) @ B) / B.shape[1]
                    # invariance of the eigenspace under every generator
                    resid = np.linalg.norm(X @ B - B @ (B.conj().T @ X @ B))
                    if resid > 1e-6 * max(scale, 1.0):
                        raise IllConditioned("eigenspace not invariant; clusters merged badly")
                    nil = B @ np.linalg.matrix_power(
                        B.conj().T @ X.astype(complex) @ B - lam[j] * np.eye(B.shape[1]), n
                    )
                    if np.linalg.norm(nil) > 1e-6 * max(scale, 1.0) ** n:
                        raise IllConditioned("cluster contains two distinct joint roots")
                raw.append((lam, B))
            for a in range(len(raw)):
                for b in range(a + 1, len(raw)):
                    if np.max(np.abs(raw[a][0] - raw[b][0])) <= tol * max(scale, 1.0):
                        raise IllConditioned("two distinct roots closer than tolerance")
            return _merge_conjugates(raw, alg)
        except IllConditioned as err:  # retry with a fresh combination
            last_err = err
            continue
    raise IllConditioned(f"root clustering failed after {max_retries} retries: {last_err}")


def _merge_conjugates(raw, alg: DilationAlgebra) -> RootDecomposition:
    scale = max(alg.scale(), 1.0)
    imag_tol = 1e-8 * scale
    used = [False] * len(raw)
    roots, blocks = [], []
    for i, (lam, B) in enumerate(raw):
        if used[i]:
            continue
        used[i] = True
        if np.max(np.abs(lam.imag)) <= imag_tol:
            real_basis = orth_columns(np.hstack([B.real, B.imag]), tol=1e-8)
            roots.append(lam.real.astype(complex))
            blocks.append(real_basis)
            continue
        # find the conjugate partner
        partner = None
        for j in range(i + 1, len(raw)):
            if not used[j] and np.max(np.abs(np.conj(lam) - raw[j][0])) <= 1e-6 * scale:
                partner = j
                break
        if partner is None:
            raise IllConditioned("complex root without conjugate partner")
        used[partner] = True
        # keep the member with positive imaginary part on the first generator
        # where the root is non-real
        k = int(np.argmax(np.abs(lam.imag) > imag_tol))
        if lam.imag[k] < 0:
            lam, B = raw[partner]
        real_basis = orth_columns(np.hstack([B.real, B.imag]), tol=1e-8)
        roots.append(lam)
        blocks.append(real_basis)
    order = np.lexsort(
        (
            [np.round(r.imag[0], 9) for r in roots],
            [np.round(r.real[0], 9) for r in roots],
            [-b.shape[1] for b in blocks],
        )
    )
    roots = [roots[k] for k in order]
    blocks = [blocks[k] for k in order]
    if sum(b.shape[1] for b in blocks) != alg.n:
        raise IllConditioned("merged block dimensions do not sum to n")
    nil_basis = _nilpotent_basis(roots, alg)
    eps = _epsilon_patterns(nil_basis, blocks, alg)
    return RootDecomposition(
        roots=tuple(r.copy() for r in roots),
        blocks=tuple(b.copy() for b in blocks),
        nilpotent_basis=tuple(nil_basis),
        epsilon=tuple(eps),
    )


def _nilpotent_basis(roots, alg: DilationAlgebra) -> list[np.ndarray]:
    rows = []
    for lam in roots:
        rows.append(lam.real)
        if np.max(np.abs(lam.imag)) > 0:
            rows.append(lam.imag)
    A = np.array(rows)
    coeffs = null_space(A, tol=1e-9)
    basis = []
    for k in range(coeffs.shape[1]):
        c = coeffs[:, k].real
        lead = np.argmax(np.abs(c))
        if c[lead] < 0:
            c = -c
        basis.append(alg.element(c))
    return basis


def jordan_block_sizes(N: np.ndarray, tol: float = 1e-8) -> list[int]:
    """Jordan block sizes of a nilpotent matrix, from the rank sequence of powers."""
    m = N.shape[0]
    nrm = np.linalg.norm(N)
    M = N / nrm if nrm > tol else np.zeros_like(N)
    ranks = [m]
    P = np.eye(m)
    for _ in range(m):
        P = P @ M
        ranks.append(rank_abs(P, tol))
    sizes = []
    for k in range(1, m + 1):
        count = ranks[k - 1] - 2 * ranks[k] + (ranks[k + 1] if k + 1 <= m else 0)
        sizes.extend([k] * count)
    sizes.sort(reverse=True)
    return sizes


def epsilon_from_sizes(sizes) -> tuple:
    """Concatenate Jordan chains into the paper-style 0/1 subdiagonal pattern."""
    eps = []
    for i, s in enumerate(sizes):
        if i > 0:
            eps.append(0)
        eps.extend([1] * (s - 1))
    return tuple(eps)


def _epsilon_patterns(nil_basis, blocks, alg: DilationAlgebra):
    if not nil_basis:
        return [() for _ in blocks]
    X0 = nil_basis[0]
    patterns = []
    for B in blocks:
        Nb = B.T @ X0 @ B
        patterns.append(epsilon_from_sizes(jordan_block_sizes(Nb)))
    return patterns


def blocks_semisimple(alg: DilationAlgebra, rd: RootDecomposition,
                      rtol: float = 1e-7) -> bool:
    """Whether every generator acts as a scalar (real) or rotation-scaling
    (complex pair) on each merged root block, i.e. no nilpotent block action."""
    for lam, V in zip(rd.roots, rd.blocks):
        real = np.max(np.abs(lam.imag)) < 1e-12 * _root_scale(rd.roots)
        m = V.shape[1]
        for j, G in enumerate(alg.generators):
            M = V.T @ G @ V
            a, b = lam[j].real, lam[j].imag
            if real:
                R = M - a * np.eye(m)
            else:
                # (M - (a+ib))(M - (a-ib)) = 0 iff the complex eigenspace is honest
                S = M - a * np.eye(m)
                R = S @ S + b * b * np.eye(m)
            scale = max(np.linalg.norm(G), 1.0)
            if np.linalg.norm(R) > rtol * (scale if real else scale ** 2 + 1.0):
                return False
    return True


def triangularize(alg: DilationAlgebra) -> np.ndarray:
    """Orthogonal P with P^-1 X P upper triangular for every generator X.

    Requires an all-real joint spectrum; raises ComplexSpectrum otherwise.
    """
    rd = roots_decompose(alg)
    if not rd.all_real():
        raise ComplexSpectrum("a non-real joint root exists")
    n = alg.n
    mats = [G.copy() for G in alg.generators]
    P = np.eye(n)
    offset = 0
    while offset < n - 1:
        k = n - offset
        v = _joint_eigenvector(mats, alg.tol)
        Q = _complete_basis(v)
        mats = [(Q.T @ M @ Q)[1:, 1:] for M in mats]
        full = np.eye(n)
        full[offset:, offset:] = Q
        P = P @ full
        offset += 1
    # snap: verify the strictly-lower parts vanish
    worst = 0.0
    for G in alg.generators:
        T = P.T @ G @ P
        worst = max(worst, float(np.max(np.abs(np.tril(T, -1)))))
    if worst > 1e-7 * max(alg.scale(), 1.0):
        raise NotDiagonalizable(f"triangularization residual {worst:.3g} too large")
    return P


def _joint_eigenvector(mats, tol: float) -> np.ndarray:
    """A common eigenvector of commuting real matrices with real spectrum."""
    k = mats[0].shape[0]
    S = np.eye(k)
    for M in mats:
        Ms = S.T @ M @ S
        eigs = np.linalg.eigvals(Ms)
        mu = float(np.min(eigs.real))
        K = null_space(Ms - mu * np.eye(Ms.shape[0]), tol=1e-8,
                       scale=max(np.linalg.norm(Ms), 1.0)).real
        if K.shape[1] == 0:
            raise NotDiagonalizable("no real joint eigenvector found")
        S = orth_columns(S @ K, tol=1e-10)
    v = S[:, 0]
    lead = np.argmax(np.abs(v))
    if v[lead] < 0:
        v = -v
    return v


def _complete_basis(v: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is v."""
    k = v.shape[0]
    A = np.eye(k)
    A[:, 0] = v
    Q, _ = np.linalg.qr(A)
    if np.dot(Q[:, 0], v) < 0:
        Q[:, 0] = -Q[:, 0]
    # QR may flip later columns; any orthogonal completion is fine
    return Q

"""Ground-truth paths and locally stationary VAR data generation.

The benchmark designs build two baseline coefficient matrices from one
of four sparsity patterns (hub, cluster, band, random), rescale their
spectral norms to 0.2 and 1, and blend them along rescaled time as

    A_i = (1 - t_i)^4 A01 + t_i^2 A02,   t_i = i/n,

then drive x_i = A_i x_{i-1} + e_i with iid Gaussian innovations whose
covariance is Psi = Sigma - A01 Sigma A01^T.  The spatial-design matrix
(rational quadratic decay with a hard band cutoff) and the VAR(k)
companion form used for estimation-side augmentation live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tvvar.exceptions import NotPositiveSemidefiniteError
from tvvar.linalg import as_matrix, matrix_norm, spectral_norm

PATTERN_KINDS = ("hub", "cluster", "band", "random")


@dataclass(frozen=True)
class GraphPattern:
    """Sparsity pattern of a baseline coefficient matrix.

    g counts hubs/clusters (hub/cluster only; band fixes g = 1), prob
    is the independent edge probability (random only), v the magnitude
    assigned to off-diagonal nonzeros and u_diag the diagonal value.
    """

    kind: str
    g: int | None = None
    prob: float | None = None
    v: float = 0.001
    u_diag: float = 10.0

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"kind must be one of {PATTERN_KINDS}, got {self.kind!r}")
        if self.v <= 0 or self.u_diag <= 0:
            raise ValueError("v and u_diag must be positive")
        if self.kind in ("hub", "cluster"):
            if self.g is None or self.g < 1:
                raise ValueError(f"{self.kind} pattern requires g >= 1")
            if self.prob is not None:
                raise ValueError(f"{self.kind} pattern does not take prob")
        elif self.kind == "band":
            if self.g not in (None, 1):
                raise ValueError("band pattern takes g = 1")
            if self.prob is not None:
                raise ValueError("band pattern does not take prob")
        else:
            if self.prob is None or not 0.0 <= self.prob <= 1.0:
                raise ValueError("random pattern requires prob in [0, 1]")
            if self.g is not None:
                raise ValueError("random pattern does not take g")


def _partition_sizes(d: int, g: int) -> list[int]:
    # as even as possible, leading groups absorb the remainder
    base, rem = divmod(d, g)
    return [base + 1] * rem + [base] * (g - rem)


def _pattern_edges(pattern: GraphPattern, d: int, rng) -> list[tuple[int, int]]:
    edges: list[tuple[int, int]] = []
    if pattern.kind == "hub":
        start = 0
        for size in _partition_sizes(d, pattern.g):
            for k in range(start + 1, start + size):
                edges.append((start, k))
            start += size
    elif pattern.kind == "cluster":
        start = 0
        for size in _partition_sizes(d, pattern.g):
            for j in range(start, start + size):
                for k in range(j + 1, start + size):
                    edges.append((j, k))
            start += size
    elif pattern.kind == "band":
        edges = [(j, j + 1) for j in range(d - 1)]
    else:
        draws = rng.random(d * (d - 1) // 2)
        idx = 0
        for j in range(d):
            for k in range(j + 1, d):
                if draws[idx] < pattern.prob:
                    edges.append((j, k))
                idx += 1
    return edges


def generate_baseline(pattern: GraphPattern, d: int, seed: int) -> np.ndarray:
    """Symmetric d x d baseline matrix for the given sparsity pattern.

    Off-diagonal nonzeros are +/- v with fair-coin signs drawn from the
    seed, the diagonal is u_diag.  Deterministic in (pattern, d, seed).
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if pattern.kind in ("hub", "cluster") and pattern.g > d:
        raise ValueError("more hubs/clusters than variables")
    rng = np.random.default_rng(seed)
    edges = _pattern_edges(pattern, d, rng)
    signs = np.where(rng.random(len(edges)) < 0.5, -1.0, 1.0)
    M = np.diag(np.full(d, pattern.u_diag))
    for (j, k), s in zip(edges, signs):
        M[j, k] = M[k, j] = s * pattern.v
    return M


def normalize_spectral(M, target: float) -> np.ndarray:
    """Rescale M so its spectral norm equals target."""
    A = as_matrix(M)
    if target <= 0:
        raise ValueError("target spectral norm must be positive")
    rho = spectral_norm(A)
    if rho <= 0.0:
        raise ValueError("cannot normalize a zero matrix")
    return A * (target / rho)


@dataclass(frozen=True)
class TransitionPath:
    """A length-n sequence of d x d transition matrices on the grid i/n."""

    n: int
    d: int
    matrices: np.ndarray  # shape (n, d, d)
    grid: np.ndarray = field(repr=False)  # t_i = i/n

    def at_index(self, i: int) -> np.ndarray:
        """Transition matrix A_i for 1-based time index i."""
        if not 1 <= i <= self.n:
            raise IndexError(f"time index {i} outside 1..{self.n}")
        return self.matrices[i - 1]


def interpolate_path(A01, A02, n: int) -> TransitionPath:
    """Blend A_i = (1 - i/n)^4 A01 + (i/n)^2 A02 for i = 1..n.

    Interior matrices are strictly contractive under the usual
    normalization (rho(A01) = 0.2, rho(A02) = 1); the endpoint A_n
    equals A02 and may sit exactly on the unit spectral circle, which
    is fine because estimation windows exclude the boundary.
    """
    A01 = as_matrix(A01)
    A02 = as_matrix(A02)
    if A01.shape != A02.shape or A01.shape[0] != A01.shape[1]:
        raise ValueError("baselines must be square matrices of equal shape")
    if n < 2:
        raise ValueError("need at least two time points")
    grid = np.arange(1, n + 1) / n
    mats = ((1.0 - grid) ** 4)[:, None, None] * A01 + (grid**2)[:, None, None] * A02
    return TransitionPath(n=n, d=A01.shape[0], matrices=mats, grid=grid)


def min_eigenvalue_symmetric(S) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Cheap Gershgorin bracketing first; if inconclusive, power-iterate
    the shifted matrix cI - S (c an upper Gershgorin bound) whose
    spectral norm is exactly c - lambda_min.
    """
    S = as_matrix(S)
    off = np.sum(np.abs(S), axis=1) - np.abs(np.diag(S))
    lo = float(np.min(np.diag(S) - off))
    hi = float(np.max(np.diag(S) + off))
    if lo >= 0.0:
        return lo
    return hi - spectral_norm(hi * np.eye(S.shape[0]) - S)


def innovation_cov(A01, Sigma) -> np.ndarray:
    """Innovation covariance Psi = Sigma - A01 Sigma A01^T, verified PSD."""
    A01 = as_matrix(A01)
    Sigma = as_matrix(Sigma)
    if A01.shape != Sigma.shape or A01.shape[0] != A01.shape[1]:
        raise ValueError("A01 and Sigma must be square with equal shape")
    Psi = Sigma - A01 @ Sigma @ A01.T
    sym = (Psi + Psi.T) / 2.0
    lam = min_eigenvalue_symmetric(sym)
    if lam < -1e-10:
        raise NotPositiveSemidefiniteError(
            f"innovation covariance has eigenvalue {lam:.3e} < -1e-10"
        )
    return Psi


def psd_cholesky(S, tol: float = 1e-10) -> np.ndarray:
    """Lower-triangular factor of a PSD matrix, tolerating zero pivots.

    Raises NotPositiveSemidefiniteError when a pivot is negative beyond
    tol or a zero pivot leaves unexplained mass in its column.
    """
    S = as_matrix(S)
    d = S.shape[0]
    scale = max(float(np.max(np.abs(S))), 1.0)
    L = np.zeros((d, d))
    for i in range(d):
        pivot = S[i, i] - L[i, :i] @ L[i, :i]
        if pivot < -tol * scale:
            raise NotPositiveSemidefiniteError(
                f"negative pivot {pivot:.3e} at row {i} in Cholesky"
            )
        pivot = max(pivot, 0.0)
        L[i, i] = np.sqrt(pivot)
        rest = np.arange(i + 1, d)
        if rest.size == 0:
            continue
        resid = S[rest, i] - L[rest, :i] @ L[i, :i]
        if L[i, i] > np.sqrt(tol) * np.sqrt(scale):
            L[rest, i] = resid / L[i, i]
        elif np.max(np.abs(resid), initial=0.0) > tol * scale:
            raise NotPositiveSemidefiniteError(
                f"zero pivot with nonzero column residual at row {i}"
            )
    return L


def simulate_tvvar(
    path: TransitionPath,
    Psi,
    burn_in: int = 100,
    seed: int = 0,
    x0=None,
) -> np.ndarray:
    """Simulate x_i = A_i x_{i-1} + e_i with e_i ~ N(0, Psi).

    The pre-sample state is produced by burn_in (>= 50) steps under the
    initial matrix A_1 starting from zero, approximating the stationary
    law at t ~ 0.  Passing x0 skips the burn-in and starts the
    recursion from that state (test hook).  Deterministic per seed.
    """
    Psi = as_matrix(Psi)
    if Psi.shape != (path.d, path.d):
        raise ValueError("Psi shape does not match the path dimension")
    L = psd_cholesky(Psi)
    rng = np.random.default_rng(seed)
    if x0 is None:
        if burn_in < 50:
            raise ValueError("burn_in must be at least 50")
        x = np.zeros(path.d)
        A1 = path.matrices[0]
        for _ in range(burn_in):
            x = A1 @ x + L @ rng.standard_normal(path.d)
    else:
        x = np.asarray(x0, dtype=np.float64).copy()
        if x.shape != (path.d,):
            raise ValueError("x0 has wrong length")
    X = np.empty((path.d, path.n))
    for i in range(path.n):
        x = path.matrices[i] @ x + L @ rng.standard_normal(path.d)
        X[:, i] = x
    return X


@dataclass(frozen=True)
class SpatialDesignParams:
    """Dimension, distance exponent r in (0,1) and decay exponent gamma > 1."""

    d: int
    r: float
    gamma: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be at least 2")
        if not 0.0 < self.r < 1.0:
            raise ValueError("r must lie in (0, 1)")
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")


def spatial_design_matrix(params: SpatialDesignParams) -> np.ndarray:
    """Banded rational-quadratic design A_mk = (1 + ((m-k)/d^r)^2)^(-gamma).

    Entries vanish once the rescaled site distance |m-k|/d^r reaches
    d^(1-r)/2, i.e. for |m-k| >= d/2, making A banded with unit diagonal.
    """
    d, r, gamma = params.d, params.r, params.gamma
    diff = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    pi = diff / d**r
    A = (1.0 + pi**2) ** (-gamma)
    # cutoff |m-k|/d^r >= d^(1-r)/2 applied as the exact integer
    # condition |m-k| >= d/2 to avoid float boundary leakage
    A[diff >= d / 2.0] = 0.0
    return A


def companion_form(blocks) -> np.ndarray:
    """Stack VAR(k) coefficient blocks into the (kd) x (kd) companion matrix.

    The blocks fill the first block-row, identities sit on the
    sub-block-diagonal, everything else is zero.  k = 1 returns the
    single block unchanged.
    """
    mats = [as_matrix(B) for B in blocks]
    if not mats:
        raise ValueError("need at least one coefficient block")
    d = mats[0].shape[0]
    for B in mats:
        if B.shape != (d, d):
            raise ValueError("all blocks must be square with equal shape")
    k = len(mats)
    if k == 1:
        return mats[0].copy()
    C = np.zeros((k * d, k * d))
    for j, B in enumerate(mats):
        C[:d, j * d : (j + 1) * d] = B
    for j in range(k - 1):
        C[(j + 1) * d : (j + 2) * d, j * d : (j + 1) * d] = np.eye(d)
    return C


def stationary_cov(A, Psi, tol: float = 1e-14, max_doublings: int = 200) -> np.ndarray:
    """Lag-zero covariance of the stationary VAR(1) with matrix A.

    Solves S = A S A^T + Psi by geometric doubling
    S <- S + B S B^T, B <- B^2, which converges whenever rho(A) < 1.
    """
    A = as_matrix(A)
    Psi = as_matrix(Psi)
    S = Psi.copy()
    B = A.copy()
    for _ in range(max_doublings):
        S = S + B @ S @ B.T
        B = B @ B
        if matrix_norm(B, "entry_max") < tol:
            return (S + S.T) / 2.0
    raise ValueError("stationary covariance did not converge; is rho(A) < 1?")

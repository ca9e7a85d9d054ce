"""Complex-symplectic matrix algebra for Gaussian transformations.

A transformation of n bosonic modes is stored through its Bogoliubov
blocks (s0, sI) acting on the stacked vector (a, a^dagger); the full
2n x 2n matrix S = [[s0, sI], [conj(sI), conj(s0)]] satisfies
S K S^dagger = K with K = diag(I, -I).  Generators are Hermitian
matrices H with blocks (h0 Hermitian, hI complex symmetric) and map to
symplectic matrices through S = exp(-i K H).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .takagi import takagi_general

__all__ = [
    "GeneratorMatrix",
    "SymplecticMatrix",
    "GaussianState",
    "BlochMessiahFactors",
    "exponentiate_generator",
    "compose",
    "passive_transform",
    "mode_wise_squeezer",
    "two_mode_squeezer",
    "bloch_messiah",
    "propagate_state",
    "evaluate_wigner",
]


def _rel_max(delta: np.ndarray, ref: np.ndarray) -> float:
    scale = np.abs(ref).max()
    if scale == 0.0:
        return float(np.abs(delta).max())
    return float(np.abs(delta).max() / scale)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Blocks of a Hermitian generator: ``h0`` Hermitian, ``hI`` complex symmetric."""

    n: int
    h0: np.ndarray
    hI: np.ndarray

    def __post_init__(self):
        h0 = np.asarray(self.h0, dtype=complex)
        hI = np.asarray(self.hI, dtype=complex)
        if h0.shape != (self.n, self.n) or hI.shape != (self.n, self.n):
            raise ValueError("generator blocks must be n x n")
        if _rel_max(h0 - h0.conj().T, h0) > 1e-12:
            raise ValueError("h0 is not Hermitian")
        if _rel_max(hI - hI.T, hI) > 1e-12:
            raise ValueError("hI is not complex symmetric")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "hI", hI)


@dataclass(frozen=True)
class SymplecticMatrix:
    """Bogoliubov blocks (s0, sI) of a complex symplectic matrix."""

    n: int
    s0: np.ndarray
    sI: np.ndarray

    def __post_init__(self):
        s0 = np.asarray(self.s0, dtype=complex)
        sI = np.asarray(self.sI, dtype=complex)
        if s0.shape != (self.n, self.n) or sI.shape != (self.n, self.n):
            raise ValueError("symplectic blocks must be n x n")
        object.__setattr__(self, "s0", s0)
        object.__setattr__(self, "sI", sI)
        res = symplectic_residual(self)
        if res > 1e-10:
            raise ValueError(f"matrix is not symplectic: residual {res:.3e}")

    def full(self) -> np.ndarray:
        """Assemble the 2n x 2n matrix [[s0, sI], [conj(sI), conj(s0)]]."""
        return np.block([[self.s0, self.sI], [self.sI.conj(), self.s0.conj()]])


def symplectic_residual(s: SymplecticMatrix) -> float:
    """max|S K S^dagger - K| scaled by ||S||^2 (cosh growth makes absolute errors misleading)."""
    n = s.n
    full = np.block([[s.s0, s.sI], [s.sI.conj(), s.s0.conj()]])
    k = np.diag(np.concatenate([np.ones(n), -np.ones(n)])).astype(complex)
    res = full @ k @ full.conj().T - k
    norm2 = max(np.abs(full).max() ** 2, 1.0)
    return float(np.abs(res).max() / norm2)


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance blocks of an n-mode Gaussian state.

    ``sigma0`` is the Hermitian phase-insensitive block <da^dagger da>
    (coherency matrix), ``sigmaI`` the complex symmetric phase-sensitive
    block <da da>; the full covariance is
    Sigma = [[sigma0, sigmaI], [conj(sigmaI), conj(sigma0)]].
    """

    n: int
    mean: np.ndarray
    sigma0: np.ndarray
    sigmaI: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=complex).reshape(self.n)
        s0 = np.asarray(self.sigma0, dtype=complex)
        sI = np.asarray(self.sigmaI, dtype=complex)
        if s0.shape != (self.n, self.n) or sI.shape != (self.n, self.n):
            raise ValueError("covariance blocks must be n x n")
        if _rel_max(s0 - s0.conj().T, s0) > 1e-12:
            raise ValueError("sigma0 is not Hermitian")
        if _rel_max(sI - sI.T, sI) > 1e-12:
            raise ValueError("sigmaI is not symmetric")
        full = np.block([[s0, sI], [sI.conj(), s0.conj()]])
        eigmin = np.linalg.eigvalsh(0.5 * (full + full.conj().T)).min()
        if eigmin < -1e-10 * max(np.abs(full).max(), 1.0):
            raise ValueError(f"covariance is not positive semidefinite (min eig {eigmin:.3e})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma0", s0)
        object.__setattr__(self, "sigmaI", sI)

    def full_covariance(self) -> np.ndarray:
        return np.block(
            [[self.sigma0, self.sigmaI], [self.sigmaI.conj(), self.sigma0.conj()]]
        )

    @classmethod
    def vacuum(cls, n: int) -> "GaussianState":
        return cls(
            n=n,
            mean=np.zeros(n, dtype=complex),
            sigma0=0.5 * np.eye(n, dtype=complex),
            sigmaI=np.zeros((n, n), dtype=complex),
        )


@dataclass(frozen=True)
class BlochMessiahFactors:
    """Passive–squeeze–passive factors: s0 = V cosh(R) Q^H, sI = V sinh(R) Q^T."""

    v: np.ndarray
    r: np.ndarray
    q: np.ndarray


def exponentiate_generator(g: GeneratorMatrix) -> SymplecticMatrix:
    """exp(-i K H) for the Hermitian generator with blocks (h0, hI).

    The exponential is evaluated on the full 2n x 2n matrix -i K H with
    scaling-and-squaring Pade approximation, which is robust for the
    non-normal matrices this produces.
    """
    n = g.n
    h = np.block([[g.h0, g.hI], [g.hI.conj(), g.h0.conj()]])
    k = np.diag(np.concatenate([np.ones(n), -np.ones(n)])).astype(complex)
    s = expm(-1j * k @ h)
    return SymplecticMatrix(n=n, s0=s[:n, :n], sI=s[:n, n:])


def compose(s2: SymplecticMatrix, s1: SymplecticMatrix) -> SymplecticMatrix:
    """Block product S2 S1 (apply s1 first)."""
    if s1.n != s2.n:
        raise ValueError("mode counts differ")
    s0 = s2.s0 @ s1.s0 + s2.sI @ s1.sI.conj()
    sI = s2.s0 @ s1.sI + s2.sI @ s1.s0.conj()
    return SymplecticMatrix(n=s1.n, s0=s0, sI=sI)


def inverse(s: SymplecticMatrix) -> SymplecticMatrix:
    """Symplectic inverse K S^dagger K."""
    return SymplecticMatrix(n=s.n, s0=s.s0.conj().T, sI=-s.sI.T)


def passive_transform(u: np.ndarray) -> SymplecticMatrix:
    """Symplectic matrix of a passive (photon-number preserving) unitary: s0 = u, sI = 0."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if u.shape != (n, n):
        raise ValueError("u must be square")
    if _rel_max(u @ u.conj().T - np.eye(n), np.eye(n)) > 1e-10:
        raise ValueError("u is not unitary")
    return SymplecticMatrix(n=n, s0=u, sI=np.zeros((n, n), dtype=complex))


def mode_wise_squeezer(r) -> SymplecticMatrix:
    """Mode-wise squeezing: s0 = cosh(diag r), sI = sinh(diag r), r >= 0."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ValueError("squeezing parameters must be nonnegative")
    n = len(r)
    return SymplecticMatrix(
        n=n,
        s0=np.diag(np.cosh(r)).astype(complex),
        sI=np.diag(np.sinh(r)).astype(complex),
    )


def two_mode_squeezer(r: float) -> SymplecticMatrix:
    """Two-mode squeezing exp(r(ab - a^dagger b^dagger)): s0 = cosh(r) I, sI = -sinh(r) sigma_x."""
    r = float(r)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return SymplecticMatrix(
        n=2,
        s0=np.cosh(r) * np.eye(2, dtype=complex),
        sI=-np.sinh(r) * sx,
    )


def bloch_messiah(s: SymplecticMatrix) -> BlochMessiahFactors:
    """Simultaneous SVD of the Bogoliubov blocks: s0 = V cosh(R) Q^H, sI = V sinh(R) Q^T.

    V is obtained from the Takagi factorization of the symmetric product
    s0 sI^T = V (cosh R sinh R) V^T, which synchronizes the degenerate-block
    freedom between the two blocks; Q = s0^H V cosh(R)^{-1} is then exactly
    unitary.  The reconstruction residual is the contract — V and Q are not
    unique for degenerate r.
    """
    res = symplectic_residual(s)
    if res > 1e-8:
        raise ValueError(f"input is not symplectic to 1e-8 (residual {res:.3e})")
    n = s.n

    z = s.s0 @ s.sI.T
    z = 0.5 * (z + z.T)
    factors = takagi_general(z)
    v = factors.v
    # Takagi values are cosh(r) sinh(r) = sinh(2r)/2, already descending.
    r = 0.5 * np.arcsinh(2.0 * factors.r)
    ch = np.cosh(r)
    q = s.s0.conj().T @ v / ch[np.newaxis, :]

    recon0 = (v * ch) @ q.conj().T
    reconI = (v * np.sinh(r)) @ q.T
    scale = max(np.abs(s.s0).max(), np.abs(s.sI).max())
    resid = max(np.abs(recon0 - s.s0).max(), np.abs(reconI - s.sI).max()) / scale
    if resid > 1e-8:
        raise RuntimeError(f"Bloch-Messiah reconstruction failed: residual {resid:.3e}")
    return BlochMessiahFactors(v=v, r=r, q=q)


def propagate_state(s: SymplecticMatrix, st: GaussianState) -> GaussianState:
    """Propagate mean and covariance: mean' = S mean-stack, Sigma' = S Sigma S^dagger."""
    if s.n != st.n:
        raise ValueError("mode counts differ")
    n = s.n
    full = s.full()
    stack = np.concatenate([st.mean, st.mean.conj()])
    mean = (full @ stack)[:n]
    sigma = full @ st.full_covariance() @ full.conj().T
    sigma0 = sigma[:n, :n]
    sigmaI = sigma[:n, n:]
    sigma0 = 0.5 * (sigma0 + sigma0.conj().T)
    sigmaI = 0.5 * (sigmaI + sigmaI.T)
    return GaussianState(n=n, mean=mean, sigma0=sigma0, sigmaI=sigmaI)


def evaluate_wigner(st: GaussianState, point: np.ndarray) -> float:
    """Wigner density at a phase-space point given as a complex vector alpha.

    The Gaussian form W(alpha) = (2 pi)^{-n} det(Sigma)^{-1/2}
    exp(-1/2 d^dagger Sigma^{-1} d) with d = (alpha - mean; conj) is
    normalized so that integrating over prod_k dx_k dp_k (alpha =
    (x + i p)/sqrt(2)) gives 1; the vacuum at the origin evaluates to
    (1/pi)^n.
    """
    point = np.asarray(point, dtype=complex).reshape(st.n)
    sigma = st.full_covariance()
    delta = np.concatenate([point - st.mean, (point - st.mean).conj()])
    sign, logdet = np.linalg.slogdet(sigma)
    if sign == 0:
        raise np.linalg.LinAlgError("covariance matrix is singular")
    expo = -0.5 * np.real(delta.conj() @ np.linalg.solve(sigma, delta))
    log_w = -st.n * np.log(2.0 * np.pi) - 0.5 * logdet + expo
    return float(np.exp(log_w))

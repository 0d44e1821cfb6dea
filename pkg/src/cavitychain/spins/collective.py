"""Permutation-symmetric backend in the maximal-spin sector |j = N/2, m>.

Valid when the dressed Hamiltonian carries no bond terms (pure Dicke-type
couplings) and the collective x-x interaction is attractive, so the ground
state stays in the maximal-j multiplet; the dense backend cross-checks this
assumption at small N.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..effective import EffectiveCouplings, SpinSums
from ..errors import BackendError

# slightly positive k_xx can occur transiently during frame optimization;
# beyond this the maximal-j restriction is not trustworthy
K_XX_GUARD = 1e-2


@lru_cache(maxsize=32)
def collective_ops(N: int):
    """Sx, Sy, Sz and Sx^2 on the (N+1)-dimensional maximal-spin block."""
    j = N / 2.0
    m = np.arange(-j, j + 1)
    # <m+1|S^+|m> on the lower diagonal of row m+1
    Sp = np.zeros((N + 1, N + 1))
    for k, mm in enumerate(m[:-1]):
        Sp[k + 1, k] = np.sqrt(j * (j + 1) - mm * (mm + 1))
    Sm = Sp.T
    Sx = 0.5 * (Sp + Sm)
    Sy = -0.5j * (Sp - Sm)
    Sz = np.diag(m)
    return Sx, Sy, Sz, Sx @ Sx


def ground_state(c: EffectiveCouplings, N: int, exchange_tol: float = 1e-12):
    """Lowest eigenpair of the collective H_eff. Returns (energy, vector)."""
    if not c.exchange_free(tol=exchange_tol):
        raise BackendError("collective backend requires all dressed bond couplings "
                           f"to vanish, got jt = ({c.jt_xx}, {c.jt_yy}, {c.jt_zz}, {c.jt_yz})")
    if c.k_xx > K_XX_GUARD:
        raise BackendError(f"collective backend requires attractive k_xx, got {c.k_xx}")
    Sx, Sy, Sz, Sx2 = collective_ops(N)
    H = c.h_x * Sx + c.h_z * Sz + c.k_xx * Sx2
    if c.h_y != 0.0:
        H = H.astype(complex) + c.h_y * Sy
    evals, evecs = np.linalg.eigh(H)
    return float(evals[0]) + c.e_photon, np.ascontiguousarray(evecs[:, 0])


def _expect(vec: np.ndarray, op: np.ndarray) -> float:
    return float(np.real(np.vdot(vec, op @ vec)))


def total_expectation(vec: np.ndarray, N: int, alpha: str) -> float:
    Sx, Sy, Sz, _ = collective_ops(N)
    return _expect(vec, {"x": Sx, "y": Sy, "z": Sz}[alpha])


def total_sq_x(vec: np.ndarray, N: int) -> float:
    return _expect(vec, collective_ops(N)[3])


def site_expectation(vec: np.ndarray, N: int, alpha: str) -> float:
    return total_expectation(vec, N, alpha) / N


def pair_expectation(vec: np.ndarray, N: int, alpha: str, beta: str) -> float:
    """<s_i^alpha s_j^beta> for any i != j (site independent by symmetry).

    sum_{i != j} s_i^a s_j^b = (S^a S^b + S^b S^a)/2 - N delta_ab / 4,
    using the single-site identity (s^a s^b + s^b s^a)/2 = delta_ab / 4.
    """
    Sx, Sy, Sz, _ = collective_ops(N)
    ops = {"x": Sx, "y": Sy, "z": Sz}
    A, B = ops[alpha], ops[beta]
    # <A B> = (A vec)^dag (B vec) for Hermitian A; avoids forming A @ B
    sym = float(np.real(np.vdot(A @ vec, B @ vec)))
    if alpha == beta:
        sym -= N / 4.0
    return sym / (N * (N - 1))


def energy_sums(vec: np.ndarray, N: int, n_bonds: int) -> SpinSums:
    pxx = pair_expectation(vec, N, "x", "x")
    pyy = pair_expectation(vec, N, "y", "y")
    pzz = pair_expectation(vec, N, "z", "z")
    pyz = pair_expectation(vec, N, "y", "z")
    return SpinSums(
        X=total_expectation(vec, N, "x"),
        Y=total_expectation(vec, N, "y"),
        Z=total_expectation(vec, N, "z"),
        X2=total_sq_x(vec, N),
        Bxx=n_bonds * pxx,
        Byy=n_bonds * pyy,
        Bzz=n_bonds * pzz,
        Byz=n_bonds * 2.0 * pyz,
    )

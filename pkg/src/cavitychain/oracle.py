"""Ground truth at small size: sparse diagonalization of the untransformed model.

The full Hamiltonian lives on (truncated Fock) x (spin) with photon-major
index ordering.  Every reported energy carries the shift observed when the
cutoff is raised, so truncation artifacts cannot pass silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import eigsh

from . import fock
from .errors import CutoffError
from .models import ModelSpec

MAX_DIM = 5_000_000


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff plus the step used for the convergence margin."""

    n_max: int = 40
    step: int = 20
    margin_tol: float = 1e-8

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError("n_max must be at least 2")
        if self.step < 1:
            raise ValueError("cutoff step must be positive")


@dataclass
class OracleResult:
    """Eigenpair handle with provenance."""

    energy: float
    vector: np.ndarray
    n_max: int
    margin: float
    N: int
    ordering: str = "photon-major"


def _lowest(spec: ModelSpec, n_max: int, stagger: float):
    H = fock.full_hamiltonian(spec, n_max, stagger=stagger)
    if H.shape[0] > MAX_DIM:
        raise ValueError(f"full space dimension {H.shape[0]} exceeds {MAX_DIM}")
    if H.shape[0] <= 512:
        evals, evecs = np.linalg.eigh(H.toarray())
        return float(evals[0]), evecs[:, 0]
    evals, evecs = eigsh(H, k=1, which="SA", tol=1e-13, maxiter=20000)
    return float(evals[0]), evecs[:, 0]


def full_ground_state(spec: ModelSpec, trunc: FockTruncation = FockTruncation(),
                      stagger: float = 1e-9,
                      check_convergence: bool = True) -> OracleResult:
    """Lowest eigenpair of the full H; raises CutoffError when not cutoff-converged.

    The staggered tiebreak matches the spin solvers so degenerate branches
    agree across modules; as there, it steers the state but is subtracted
    from the reported energy.
    """
    theta, vec = _lowest(spec, trunc.n_max, stagger)
    energy = theta
    if stagger != 0.0:
        energy -= stagger * _stagger_value(vec, spec.N, trunc.n_max)
    margin = 0.0
    if check_convergence:
        theta_big, vec_big = _lowest(spec, trunc.n_max + trunc.step, stagger)
        energy_big = theta_big
        if stagger != 0.0:
            energy_big -= stagger * _stagger_value(vec_big, spec.N, trunc.n_max + trunc.step)
        margin = abs(energy_big - energy)
        if margin > trunc.margin_tol:
            raise CutoffError(
                f"oracle not converged at n_max={trunc.n_max}: margin {margin:.3e} "
                f"> {trunc.margin_tol:.1e}; retry with n_max >= {trunc.n_max + 2 * trunc.step}")
    return OracleResult(energy=energy, vector=vec, n_max=trunc.n_max,
                        margin=margin, N=spec.N)


def _stagger_value(vec: np.ndarray, N: int, n_max: int) -> float:
    psi = vec.reshape(n_max + 1, 2 ** N)
    weights = np.real(np.einsum("ns,ns->s", psi.conj(), psi))
    mz = fock.spin_site_z(N)
    signs = np.array([(-1) ** i for i in range(N)], dtype=float)
    return float(weights @ (signs @ mz))


def full_observables(result: OracleResult) -> dict:
    """Exact <a^dag a>, site <s_i^a>, and pair <s_i^a s_j^b> tables on the handle."""
    N, n_max = result.N, result.n_max
    dim_s = 2 ** N
    psi = result.vector.reshape(n_max + 1, dim_s)

    n_op = np.arange(n_max + 1, dtype=float)
    photon_weights = np.real(np.einsum("ns,ns->n", psi.conj(), psi))
    n_mean_total = float(photon_weights @ n_op)

    site = {}
    for i in range(N):
        for alpha in "xyz":
            op = fock.spin_op(N, i, alpha)
            val = (op @ psi.T).T
            site[(i, alpha)] = float(np.real(np.einsum("ns,ns->", psi.conj(), val)))

    pair = {}
    for i in range(N):
        for j in range(i + 1, N):
            for alpha in "xyz":
                for beta in "xyz":
                    opi = fock.spin_op(N, i, alpha)
                    opj = fock.spin_op(N, j, beta)
                    val = (opi @ (opj @ psi.T)).T
                    pair[(i, j, alpha, beta)] = float(np.real(
                        np.einsum("ns,ns->", psi.conj(), val)))

    Mz = sum(site[(i, "z")] for i in range(N)) / N
    return {
        "n_mean": n_mean_total,
        "n_mean_pp": n_mean_total / N,
        "M_z": Mz,
        "site": site,
        "pair": pair,
    }


def dump_vector(result: OracleResult, path: str) -> None:
    """Binary eigenvector dump: array plus dimension/ordering header fields."""
    np.savez(path,
             vector=result.vector,
             n_max=result.n_max,
             N=result.N,
             energy=result.energy,
             margin=result.margin,
             ordering=result.ordering,
             dims=np.array([result.n_max + 1, 2 ** result.N]))

"""Truncated-Fock workspace: explicit states and operators on (photon) x (spins).

Everything here is small-size validation machinery.  Basis ordering is
photon-major: joint index = n_photon * 2^N + spin_index, with spin bit i
of the spin index equal to 0 for m_i = +1/2 and 1 for m_i = -1/2.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .models import ModelSpec, effective_single_coupling
from .photon import PhotonFrame


def photon_ops(n_max: int):
    """Annihilation, x and p quadratures, and number operator on n_max+1 levels."""
    dim = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    x = (a + a.T) / np.sqrt(2.0)
    p = 1j * (a.T - a) / np.sqrt(2.0)
    n = np.diag(np.arange(dim, dtype=float))
    return a, x, p, n


def gaussian_state(frame: PhotonFrame, n_max: int) -> np.ndarray:
    """Displaced squeezed vacuum D(alpha) S |0> in the truncated Fock basis.

    The squeeze sign is chosen so that v_x = e^{2r}/2: S = exp(r/2 (a^dag^2 - a^2)).
    alpha = (delta_x + i delta_p)/sqrt(2) gives means (delta_x, delta_p).
    """
    dim = n_max + 1
    a, _, _, _ = photon_ops(n_max)
    ad = a.T.conj()
    alpha = (frame.delta_x + 1j * frame.delta_p) / np.sqrt(2.0)
    sq = expm(0.5 * frame.r * (ad @ ad - a @ a))
    disp = expm(alpha * ad - np.conj(alpha) * a)
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    psi = disp @ (sq @ vac)
    return psi / np.linalg.norm(psi)


def _site_bits(N: int) -> np.ndarray:
    """bits[i, s] = bit i of spin index s (0 = up, 1 = down)."""
    s = np.arange(2 ** N)
    return np.stack([(s >> i) & 1 for i in range(N)])


def spin_site_z(N: int) -> np.ndarray:
    """m_i[s] table of s_i^z eigenvalues, shape (N, 2^N)."""
    return 0.5 - _site_bits(N).astype(float)


def spin_op(N: int, i: int, alpha: str) -> sparse.csr_matrix:
    """Sparse s_i^alpha on the 2^N spin space."""
    dim = 2 ** N
    s = np.arange(dim)
    bit = (s >> i) & 1
    if alpha == "z":
        return sparse.diags(0.5 - bit.astype(float)).tocsr()
    t = s ^ (1 << i)
    if alpha == "x":
        amp = np.full(dim, 0.5)
    elif alpha == "y":
        # <t|s^y|s>: +i/2 when the target bit is 1 (up -> down), else -i/2
        amp = 0.5j * (2.0 * ((t >> i) & 1) - 1.0)
    else:
        raise ValueError(f"unknown spin component {alpha!r}")
    return sparse.csr_matrix((amp, (t, s)), shape=(dim, dim))


def total_spin_op(N: int, alpha: str) -> sparse.csr_matrix:
    op = spin_op(N, 0, alpha)
    for i in range(1, N):
        op = op + spin_op(N, i, alpha)
    return op.tocsr()


def spin_chain_hamiltonian(spec: ModelSpec, stagger: float = 0.0) -> sparse.csr_matrix:
    """epsilon S^z - sum_<ij> J_a s_i^a s_j^a (+ staggered z tiebreak) on 2^N."""
    N = spec.N
    H = (spec.epsilon * total_spin_op(N, "z")).tolil()
    for (i, j) in spec.bonds():
        for Ja, alpha in zip(spec.J, "xyz"):
            if Ja != 0.0:
                H = H - Ja * (spin_op(N, i, alpha) @ spin_op(N, j, alpha))
    if stagger != 0.0:
        for i in range(N):
            H = H + stagger * ((-1) ** i) * spin_op(N, i, "z")
    return H.tocsr()


def full_hamiltonian(spec: ModelSpec, n_max: int, stagger: float = 0.0) -> sparse.csr_matrix:
    """The untransformed Hamiltonian on (n_max+1) * 2^N, photon-major ordering.

    The free photon term is built as omega (n + 1/2) exactly, avoiding the
    corner defect of squaring a truncated quadrature.
    """
    _, x, _, n = photon_ops(n_max)
    gp = effective_single_coupling(spec)
    dim_s = 2 ** spec.N
    eye_ph = sparse.identity(n_max + 1, format="csr")
    eye_s = sparse.identity(dim_s, format="csr")
    H = sparse.kron(sparse.csr_matrix(spec.omega * (n + 0.5 * np.eye(n_max + 1))), eye_s)
    H = H + sparse.kron(sparse.csr_matrix(gp * x), total_spin_op(spec.N, "x"))
    H = H + sparse.kron(eye_ph, spin_chain_hamiltonian(spec, stagger=stagger))
    return H.tocsr()


def apply_entangler(joint: np.ndarray, eta: float, N: int, n_max: int) -> np.ndarray:
    """Apply U = exp(-i eta S^x p) to a photon-major joint state.

    Works in the S^x eigenbasis: for each eigenvalue m the photon block is
    hit with exp(-i eta m p), a matrix exponential of the 61x61-ish p.
    """
    dim_ph, dim_s = n_max + 1, 2 ** N
    _, _, p, _ = photon_ops(n_max)
    evals, V = np.linalg.eigh(total_spin_op(N, "x").toarray())
    psi = joint.reshape(dim_ph, dim_s) @ V          # rotate spins to S^x basis
    out = np.empty_like(psi, dtype=complex)
    # consecutive equal eigenvalues share one exponential
    k = 0
    while k < dim_s:
        k2 = k + 1
        while k2 < dim_s and abs(evals[k2] - evals[k]) < 1e-12:
            k2 += 1
        U = expm(-1j * eta * evals[k] * p)
        out[:, k:k2] = U @ psi[:, k:k2]
        k = k2
    return (out @ V.conj().T).reshape(dim_ph * dim_s)


def entangler_matrix(eta: float, N: int, n_max: int) -> np.ndarray:
    """Dense exp(-i eta S^x (x) p) built directly; cross-check for apply_entangler."""
    _, _, p, _ = photon_ops(n_max)
    Sx = total_spin_op(N, "x").toarray()
    G = np.kron(p, Sx)   # photon-major: photon factor first
    return expm(-1j * eta * G)


def ngs_state(spec: ModelSpec, frame: PhotonFrame, phi: np.ndarray, n_max: int) -> np.ndarray:
    """Explicit normalized ansatz state U_lambda (|gaussian> (x) |phi>)."""
    from .photon import entangler_scale

    ph = gaussian_state(frame, n_max)
    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    joint = np.kron(ph, phi)
    eta = entangler_scale(frame, spec)
    if eta != 0.0:
        joint = apply_entangler(joint, eta, spec.N, n_max)
    return joint

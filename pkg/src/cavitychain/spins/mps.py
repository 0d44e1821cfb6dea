"""Two-site DMRG backend with a constant bond-dimension MPO.

MPO automaton (bond dimension 6):

      start --I--> start                (nothing placed yet)
      start --s^x--------> X            nearest-neighbour channels,
      start --s^y--------> Y            closed on the next site
      start --s^z--------> Z
      start --o_c s^x----> C            collective x-x channel, stays open
      start --(on-site)--> done
      X --(-jt_xx s^x)--------------> done
      Y --(-jt_yy s^y - jt_yz s^z)--> done
      Z --(-jt_zz s^z - jt_yz s^y)--> done
      C --I--> C
      C --(c_c s^x)-----------------> done
      done --I--> done

The uniform all-to-all x-x term k_xx (S^x)^2 = N/4 + 2 sum_{i<j} s^x s^x is
carried by the single open channel C with o_c * c_c = 2 k_xx (the sign of
k_xx folded into the opening operator) and the constant N/4 folded into the
on-site part together with e_photon/N and the fields.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from ..effective import EffectiveCouplings, SpinSums
from ..errors import BackendError, InternalError

SX = np.array([[0.0, 0.5], [0.5, 0.0]])
SY = np.array([[0.0, -0.5j], [0.5j, 0.0]])
SZ = np.array([[0.5, 0.0], [0.0, -0.5]])
ID = np.eye(2)


def _check_open_chain(N: int, bonds) -> None:
    expected = [(i, i + 1) for i in range(N - 1)]
    if list(bonds) != expected:
        raise BackendError("mps backend supports open nearest-neighbour chains only")


def build_mpo(c: EffectiveCouplings, N: int, stagger: float = 0.0) -> list[np.ndarray]:
    """Site tensors W[i] with indices (wL, wR, s_bra, s_ket)."""
    dtype = np.complex128 if c.is_complex else np.float64
    sx = SX.astype(dtype)
    sy = SY if dtype == np.complex128 else np.zeros((2, 2))
    sz = SZ.astype(dtype)
    eye = ID.astype(dtype)

    root = np.sqrt(2.0 * abs(c.k_xx))
    open_c = (np.sign(c.k_xx) or 1.0) * root
    close_c = root

    def onsite(i: int) -> np.ndarray:
        op = c.h_x * sx + c.h_z * sz + (c.k_xx / 4.0 + c.e_photon / N) * eye
        if c.is_complex:
            op = op + c.h_y * SY
        if stagger != 0.0:
            op = op + stagger * ((-1) ** i) * sz
        return op

    D = 6
    S, X, Y, Z, C, E = range(D)
    tensors = []
    for i in range(N):
        W = np.zeros((D, D, 2, 2), dtype=dtype)
        W[S, S] = eye
        W[S, X] = sx
        W[S, Y] = sy if c.is_complex else SY.real  # placeholder, fixed below
        W[S, Y] = sy if c.is_complex else np.zeros((2, 2))
        W[S, Z] = sz
        W[S, C] = open_c * sx
        W[S, E] = onsite(i)
        W[X, E] = -c.jt_xx * sx
        if c.is_complex:
            W[Y, E] = -c.jt_yy * sy - c.jt_yz * sz
            W[Z, E] = -c.jt_zz * sz - c.jt_yz * sy
        else:
            # real couplings: fold s^y s^y through -i s^y, which is real
            W[S, Y] = (-1j * SY).real.astype(dtype)
            W[Y, E] = -c.jt_yy * (1j * SY).real.astype(dtype)
            W[Z, E] = -c.jt_zz * sz
        W[C, C] = eye
        W[C, E] = close_c * sx
        W[E, E] = eye
        if i == 0:
            W = W[S:S + 1, :, :, :]
        if i == N - 1:
            W = W[:, E:E + 1, :, :]
        tensors.append(W)
    return tensors


# -------------------------------------------------------------------- MPS core

def random_mps(N: int, chi: int, rng: np.random.RandomState, dtype=np.float64):
    """Right-canonical random MPS with bond dimension min(chi, exact)."""
    tensors = []
    chi_right = 1
    for i in reversed(range(N)):
        chi_left = min(chi, 2 ** i, 2 * chi_right, 2 ** (N - i))
        shape = (chi_left, 2, chi_right)
        A = rng.standard_normal(shape)
        if dtype == np.complex128:
            A = A + 1j * rng.standard_normal(shape)
        tensors.append(A.astype(dtype))
        chi_right = chi_left
    tensors.reverse()
    _right_canonicalize(tensors)
    return tensors


def product_mps(local_states: list[np.ndarray]):
    """Bond-dimension-1 MPS from per-site spinors (up, down)."""
    tensors = []
    for chi_ in local_states:
        s = np.asarray(chi_, dtype=complex if np.iscomplexobj(chi_) else float)
        s = s / np.linalg.norm(s)
        tensors.append(s.reshape(1, 2, 1).copy())
    return tensors


def _right_canonicalize(tensors) -> None:
    """Bring all sites to right-canonical form (in place), normalizing the state."""
    N = len(tensors)
    for i in reversed(range(1, N)):
        chiL, d, chiR = tensors[i].shape
        mat = tensors[i].reshape(chiL, d * chiR)
        q, r = np.linalg.qr(mat.conj().T)
        k = q.shape[1]
        tensors[i] = q.conj().T.reshape(k, d, chiR)
        tensors[i - 1] = np.tensordot(tensors[i - 1], r.conj().T, axes=([2], [0]))
    tensors[0] /= np.linalg.norm(tensors[0])


def mps_to_vector(tensors) -> np.ndarray:
    """Dense state vector with bit i of the flat index addressing site i.

    Site i's physical index 0/1 means m = +1/2 / -1/2, matching the dense
    backend, whose flat index uses bit i as the 2^i digit.
    """
    N = len(tensors)
    psi = tensors[0].reshape(2, -1)   # (s0, chi)
    for i in range(1, N):
        # psi: (s0..s_{i-1} flattened with s0 slowest, chi)
        psi = np.tensordot(psi, tensors[i], axes=([1], [0]))
        psi = psi.reshape(-1, tensors[i].shape[2])
    psi = psi.reshape([2] * N)        # axes ordered s0, s1, ..., s_{N-1}
    # dense backend flat order has site 0 as the fastest bit => site 0 last axis
    return np.transpose(psi, axes=list(reversed(range(N)))).reshape(-1)


def _contract_left(L, A, W, Abar):
    # L: (bra, w, ket); A/Abar: (chi, d, chi'); W: (w, w', d_bra, d_ket)
    t = np.tensordot(L, A, axes=([2], [0]))           # (bra, w, d_ket, ket')
    t = np.tensordot(t, W, axes=([1, 2], [0, 3]))     # (bra, ket', w', d_bra)
    t = np.tensordot(Abar.conj(), t, axes=([0, 1], [0, 3]))  # (bra', ket', w')
    return np.transpose(t, (0, 2, 1))                 # (bra', w', ket')


def _contract_right(R, A, W, Abar):
    t = np.tensordot(A, R, axes=([2], [2]))           # (chi, d_ket, bra, w)
    t = np.tensordot(W, t, axes=([1, 3], [3, 1]))     # (w, d_bra, chi, bra)
    t = np.tensordot(t, Abar.conj(), axes=([1, 3], [1, 2]))  # (w, chi, bra')
    return np.transpose(t, (2, 0, 1))                 # (bra', w, ket)


class _TwoSiteOp:
    def __init__(self, L, W1, W2, R):
        self.L, self.W1, self.W2, self.R = L, W1, W2, R
        self.shape_t = (L.shape[2], 2, 2, R.shape[2])
        dim = int(np.prod(self.shape_t))
        self.dim = dim
        self.dtype = np.result_type(L.dtype, W1.dtype)

    def matvec(self, x):
        th = x.reshape(self.shape_t)
        t = np.tensordot(self.L, th, axes=([2], [0]))          # (bra, w, s1, s2, chiR)
        t = np.tensordot(t, self.W1, axes=([1, 2], [0, 3]))    # (bra, s2, chiR, w', s1')
        t = np.tensordot(t, self.W2, axes=([3, 1], [0, 3]))    # (bra, chiR, s1', w'', s2')
        t = np.tensordot(t, self.R, axes=([3, 1], [1, 2]))     # (bra, s1', s2', bra')
        return t.reshape(self.dim)


def _solve_two_site(L, W1, W2, R, theta0, tol):
    op = _TwoSiteOp(L, W1, W2, R)
    if op.dim <= 16:
        M = np.empty((op.dim, op.dim), dtype=op.dtype)
        eye = np.eye(op.dim, dtype=op.dtype)
        for k in range(op.dim):
            M[:, k] = op.matvec(eye[:, k])
        evals, evecs = np.linalg.eigh(M)
        return float(evals[0]), evecs[:, 0]
    lin = LinearOperator((op.dim, op.dim), matvec=op.matvec, dtype=op.dtype)
    v0 = theta0.reshape(op.dim)
    evals, evecs = eigsh(lin, k=1, which="SA", v0=v0, tol=tol, maxiter=2000)
    return float(evals[0]), evecs[:, 0]


def dmrg_ground(c: EffectiveCouplings, N: int, bonds, stagger: float,
                chi: int, sweeps: int, energy_tol: float, eig_tol: float,
                seed: int, initial=None, sweep_energies: list | None = None):
    """Two-site DMRG on H_eff + tiebreak. Returns (energy, right-canonical tensors).

    The reported energy excludes the tiebreak term, like the other backends.
    """
    _check_open_chain(N, bonds)
    if N < 2:
        raise BackendError("mps backend needs N >= 2")
    mpo = build_mpo(c, N, stagger=stagger)
    dtype = np.complex128 if c.is_complex else np.float64

    if initial is not None:
        tensors = [t.astype(np.result_type(t.dtype, dtype)) for t in initial]
        _right_canonicalize(tensors)
    else:
        rng = np.random.RandomState(seed)
        tensors = random_mps(N, min(chi, 8), rng, dtype=dtype)

    # boundary environments
    Ls = [None] * N
    Rs = [None] * N
    wL = mpo[0].shape[0]
    wR = mpo[-1].shape[1]
    Ls[0] = np.zeros((1, wL, 1), dtype=dtype)
    Ls[0][0, 0, 0] = 1.0
    Rs[N - 1] = np.zeros((1, wR, 1), dtype=dtype)
    Rs[N - 1][0, -1, 0] = 1.0
    for i in reversed(range(1, N)):
        R_next = Rs[i] if i == N - 1 else Rs[i]
        Rs[i - 1] = _contract_right(R_next, tensors[i], mpo[i], tensors[i])

    energy = None
    prev_sweep_energy = None
    for sweep in range(sweeps):
        # left-to-right then right-to-left
        for (rng_sites, moving_right) in ((range(N - 1), True),
                                          (range(N - 2, -1, -1), False)):
            for i in rng_sites:
                theta0 = np.tensordot(tensors[i], tensors[i + 1], axes=([2], [0]))
                Lenv = Ls[i]
                Renv = Rs[i + 1]
                energy, th = _solve_two_site(Lenv, mpo[i], mpo[i + 1], Renv, theta0, eig_tol)
                chiL = Lenv.shape[2]
                chiR = Renv.shape[2]
                th = th.reshape(chiL * 2, 2 * chiR)
                U, svals, Vh = np.linalg.svd(th, full_matrices=False)
                keep = min(chi, int(np.sum(svals > 1e-14)) or 1)
                U, svals, Vh = U[:, :keep], svals[:keep], Vh[:keep, :]
                svals /= np.linalg.norm(svals)
                if moving_right:
                    tensors[i] = U.reshape(chiL, 2, keep)
                    tensors[i + 1] = (np.diag(svals) @ Vh).reshape(keep, 2, chiR)
                    Ls[i + 1] = _contract_left(Lenv, tensors[i], mpo[i], tensors[i])
                else:
                    tensors[i + 1] = Vh.reshape(keep, 2, chiR)
                    tensors[i] = (U @ np.diag(svals)).reshape(chiL, 2, keep)
                    Rs[i] = _contract_right(Renv, tensors[i + 1], mpo[i + 1], tensors[i + 1])
        if sweep_energies is not None:
            sweep_energies.append(energy)
        if prev_sweep_energy is not None:
            if energy > prev_sweep_energy + 1e-10 * max(1.0, abs(energy)):
                raise InternalError(
                    f"DMRG energy increased across sweeps: {prev_sweep_energy} -> {energy}")
            if abs(energy - prev_sweep_energy) < energy_tol:
                prev_sweep_energy = energy
                break
        prev_sweep_energy = energy

    _right_canonicalize(tensors)
    if stagger != 0.0:
        corr = sum(((-1) ** i) * site_expectation(tensors, i, "z") for i in range(N))
        energy = energy - stagger * corr
    return float(energy), tensors


# ---------------------------------------------------------------- expectations

_LOCAL = {"x": SX, "y": SY, "z": SZ}


def site_expectation(tensors, i: int, alpha: str) -> float:
    op = _LOCAL[alpha]
    # tensors right-canonical: left environment of site i from explicit transfers
    L = np.ones((1, 1), dtype=complex)
    for k in range(i):
        L = np.einsum("ab,asc,bsd->cd", L, tensors[k].conj(), tensors[k])
    A = tensors[i]
    val = np.einsum("ab,asc,st,btc->", L, A.conj(), op, A)
    return float(np.real(val))


def pair_expectation(tensors, i: int, j: int, alpha: str, beta: str) -> float:
    if i == j:
        raise ValueError("pair expectation requires distinct sites")
    if i > j:
        i, j, alpha, beta = j, i, beta, alpha
    opA, opB = _LOCAL[alpha], _LOCAL[beta]
    L = np.ones((1, 1), dtype=complex)
    for k in range(i):
        L = np.einsum("ab,asc,bsd->cd", L, tensors[k].conj(), tensors[k])
    A = tensors[i]
    L = np.einsum("ab,asc,st,btd->cd", L, A.conj(), opA, A)
    for k in range(i + 1, j):
        L = np.einsum("ab,asc,bsd->cd", L, tensors[k].conj(), tensors[k])
    B = tensors[j]
    val = np.einsum("ab,asc,st,btc->", L, B.conj(), opB, B)
    return float(np.real(val))


def _left_envs(tensors):
    """Cumulative identity transfer matrices; envs[i] covers sites < i."""
    envs = [np.ones((1, 1), dtype=complex)]
    for A in tensors:
        envs.append(np.einsum("ab,asc,bsd->cd", envs[-1], A.conj(), A))
    return envs


def total_expectation(tensors, alpha: str) -> float:
    return sum(site_expectation(tensors, i, alpha) for i in range(len(tensors)))


def total_sq_x(tensors) -> float:
    """<(S^x)^2> = N/4 + 2 sum_{i<j} <s^x s^x>, via one running environment per i."""
    N = len(tensors)
    total = N / 4.0
    for i in range(N):
        L = np.ones((1, 1), dtype=complex)
        for k in range(i):
            L = np.einsum("ab,asc,bsd->cd", L, tensors[k].conj(), tensors[k])
        A = tensors[i]
        Lx = np.einsum("ab,asc,st,btd->cd", L, A.conj(), SX, A)
        for j in range(i + 1, N):
            B = tensors[j]
            total += 2.0 * float(np.real(
                np.einsum("ab,asc,st,btc->", Lx, B.conj(), SX, B)))
            if j < N - 1:
                Lx = np.einsum("ab,asc,bsd->cd", Lx, B.conj(), B)
    return total


def energy_sums(tensors, bonds) -> SpinSums:
    Bxx = Byy = Bzz = Byz = 0.0
    for (i, j) in bonds:
        Bxx += pair_expectation(tensors, i, j, "x", "x")
        Byy += pair_expectation(tensors, i, j, "y", "y")
        Bzz += pair_expectation(tensors, i, j, "z", "z")
        Byz += (pair_expectation(tensors, i, j, "y", "z")
                + pair_expectation(tensors, i, j, "z", "y"))
    return SpinSums(
        X=total_expectation(tensors, "x"),
        Y=total_expectation(tensors, "y"),
        Z=total_expectation(tensors, "z"),
        X2=total_sq_x(tensors),
        Bxx=Bxx, Byy=Byy, Bzz=Bzz, Byz=Byz,
    )

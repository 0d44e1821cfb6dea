"""Photon elimination: coefficients of the dressed spin Hamiltonian.

The entangler U = exp(-i eta S^x p) acts as
    x   -> x + eta S^x
    s^y -> s^y cos(eta p) - s^z sin(eta p)
    s^z -> s^z cos(eta p) + s^y sin(eta p)
and averaging U^dag H U over the Gaussian photon state leaves a spin-only
Hamiltonian

    H_eff = e_photon + h_x S^x + h_y S^y + h_z S^z + k_xx (S^x)^2
            - sum_<ij> [ jt_xx s^x s^x + jt_yy s^y s^y + jt_zz s^z s^z
                         + jt_yz (s^y s^z + s^z s^y) ].

The signs of the S1/S2 terms below follow from the operator algebra above
and are pinned by frame_equality_check, which compares <phi|H_eff|phi>
against the explicitly constructed ansatz state in truncated Fock space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CutoffError
from .models import ModelSpec, effective_single_coupling
from .photon import PhotonFrame, dressing, moments


@dataclass(frozen=True)
class EffectiveCouplings:
    """Coefficients of the photon-dressed spin Hamiltonian."""

    e_photon: float
    h_x: float
    h_y: float
    h_z: float
    k_xx: float
    jt_xx: float
    jt_yy: float
    jt_zz: float
    jt_yz: float

    @property
    def is_complex(self) -> bool:
        """True when H_eff needs a complex matrix representation (z-basis)."""
        return self.h_y != 0.0 or self.jt_yz != 0.0

    def exchange_free(self, tol: float = 0.0) -> bool:
        return (abs(self.jt_xx) <= tol and abs(self.jt_yy) <= tol
                and abs(self.jt_zz) <= tol and abs(self.jt_yz) <= tol)


def build_couplings(spec: ModelSpec, frame: PhotonFrame) -> EffectiveCouplings:
    """Closed-form effective couplings for a frame (no numerics in the hot path)."""
    gp = effective_single_coupling(spec)
    m = moments(frame)
    d = dressing(frame, spec)
    Jx, Jy, Jz = spec.J
    lam = frame.lam
    return EffectiveCouplings(
        e_photon=0.5 * spec.omega * (m.v_x + m.v_p + m.mean_x ** 2 + m.mean_p ** 2),
        h_x=gp * m.mean_x * (1.0 + lam),
        h_y=spec.epsilon * d.S1,
        h_z=spec.epsilon * d.C1,
        k_xx=(gp * gp / spec.omega) * (lam + 0.5 * lam * lam),
        jt_xx=Jx,
        jt_yy=0.5 * (Jy + Jz) + 0.5 * d.C2 * (Jy - Jz),
        jt_zz=0.5 * (Jy + Jz) - 0.5 * d.C2 * (Jy - Jz),
        jt_yz=0.5 * d.S2 * (Jz - Jy),
    )


@dataclass(frozen=True)
class SpinSums:
    """Spin expectations entering the variational energy.

    X, Y, Z : <S^a>;  X2 : <(S^x)^2>;
    Bxx..Bzz : sums over chain bonds of <s_i^a s_j^a>;
    Byz : bond sum of <s_i^y s_j^z + s_i^z s_j^y>.
    """

    X: float
    Y: float
    Z: float
    X2: float
    Bxx: float
    Byy: float
    Bzz: float
    Byz: float


def energy_from_sums(c: EffectiveCouplings, s: SpinSums) -> float:
    return (c.e_photon + c.h_x * s.X + c.h_y * s.Y + c.h_z * s.Z + c.k_xx * s.X2
            - (c.jt_xx * s.Bxx + c.jt_yy * s.Byy + c.jt_zz * s.Bzz + c.jt_yz * s.Byz))


def energy_and_gradient(spec: ModelSpec, frame: PhotonFrame, s: SpinSums):
    """Variational energy at fixed spin state and its frame gradient.

    Returns (E, dE/d[delta_x, delta_p, r, lam]).  All derivatives are exact
    closed forms; the finite-difference agreement is a permanent test.
    """
    gp = effective_single_coupling(spec)
    om, eps = spec.omega, spec.epsilon
    Jx, Jy, Jz = spec.J
    m = moments(frame)
    d = dressing(frame, spec)
    lam = frame.lam
    eta = d.eta
    kap = gp / om                      # d eta / d lam

    aC, aS = eps * s.Z, eps * s.Y      # weights of C1, S1
    cC = -0.5 * (Jy - Jz) * (s.Byy - s.Bzz)   # weight of C2
    cS = -0.5 * (Jz - Jy) * s.Byz             # weight of S2
    const_J = (Jx * s.Bxx + 0.5 * (Jy + Jz) * (s.Byy + s.Bzz))

    E = (0.5 * om * (m.v_x + m.v_p + m.mean_x ** 2 + m.mean_p ** 2)
         + gp * (1.0 + lam) * m.mean_x * s.X
         + aC * d.C1 + aS * d.S1 + cC * d.C2 + cS * d.S2
         + (gp * gp / om) * (lam + 0.5 * lam * lam) * s.X2
         - const_J)

    g_dx = om * m.mean_x + gp * (1.0 + lam) * s.X

    # d/d mu_p of the dressing factors
    g_dp = (om * m.mean_p
            + aC * (-eta * d.S1) + aS * (eta * d.C1)
            + cC * (-2.0 * eta * d.S2) + cS * (2.0 * eta * d.C2))

    # d v_x / dr = 2 v_x, d v_p / dr = -2 v_p; dressing depends on v_p only
    g_r = (om * (m.v_x - m.v_p)
           + eta * eta * m.v_p * (aC * d.C1 + aS * d.S1)
           + 4.0 * eta * eta * m.v_p * (cC * d.C2 + cS * d.S2))

    dC1 = -eta * m.v_p * d.C1 - m.mean_p * d.S1
    dS1 = -eta * m.v_p * d.S1 + m.mean_p * d.C1
    dC2 = -4.0 * eta * m.v_p * d.C2 - 2.0 * m.mean_p * d.S2
    dS2 = -4.0 * eta * m.v_p * d.S2 + 2.0 * m.mean_p * d.C2
    g_lam = (gp * m.mean_x * s.X
             + (gp * gp / om) * (1.0 + lam) * s.X2
             + kap * (aC * dC1 + aS * dS1 + cC * dC2 + cS * dS2))

    return E, np.array([g_dx, g_dp, g_r, g_lam])


def frame_equality_check(spec: ModelSpec, frame: PhotonFrame, phi: np.ndarray,
                         n_max: int = 60, stagger: float = 0.0,
                         cutoff_step: int = 20, cutoff_tol: float = 1e-9) -> float:
    """|<phi|H_eff|phi> - <Psi|H|Psi>| for the explicitly built ansatz state.

    Psi = U_lambda (|gaussian> (x) |phi|) is assembled in the truncated
    Fock (x) spin space with matrix exponentials; the residual validates the
    closed-form couplings.  Raises CutoffError when enlarging n_max by
    cutoff_step moves the full-space value by more than cutoff_tol.
    """
    from . import fock

    if spec.N > 6:
        raise ValueError("frame_equality_check is a small-size validator (N <= 6)")
    if n_max < 40:
        raise ValueError("n_max >= 40 required for a trustworthy check")

    phi = np.asarray(phi, dtype=complex)
    phi = phi / np.linalg.norm(phi)

    c = build_couplings(spec, frame)
    e_eff = _heff_expectation(spec, c, phi, stagger)

    def full_value(nm):
        psi = fock.ngs_state(spec, frame, phi, nm)
        H = fock.full_hamiltonian(spec, nm, stagger=stagger)
        return float(np.real(np.vdot(psi, H @ psi)))

    e_full = full_value(n_max)
    e_full_big = full_value(n_max + cutoff_step)
    if abs(e_full_big - e_full) > cutoff_tol:
        raise CutoffError(
            f"Fock cutoff n_max={n_max} not converged: value moves by "
            f"{abs(e_full_big - e_full):.3e} at n_max+{cutoff_step}; increase n_max")
    return abs(e_eff - e_full)


def _heff_expectation(spec: ModelSpec, c: EffectiveCouplings, phi: np.ndarray,
                      stagger: float) -> float:
    """<phi|H_eff|phi> on the 2^N spin space (dense, validation only)."""
    from . import fock

    N = spec.N
    Sx = fock.total_spin_op(N, "x").toarray()
    Sy = fock.total_spin_op(N, "y").toarray()
    Sz = fock.total_spin_op(N, "z").toarray()
    H = (c.h_x * Sx + c.h_y * Sy + c.h_z * Sz + c.k_xx * (Sx @ Sx)
         + c.e_photon * np.eye(2 ** N))
    for (i, j) in spec.bonds():
        sx_i = fock.spin_op(N, i, "x").toarray()
        sx_j = fock.spin_op(N, j, "x").toarray()
        sy_i = fock.spin_op(N, i, "y").toarray()
        sy_j = fock.spin_op(N, j, "y").toarray()
        sz_i = fock.spin_op(N, i, "z").toarray()
        sz_j = fock.spin_op(N, j, "z").toarray()
        H -= (c.jt_xx * sx_i @ sx_j + c.jt_yy * sy_i @ sy_j + c.jt_zz * sz_i @ sz_j
              + c.jt_yz * (sy_i @ sz_j + sz_i @ sy_j))
    if stagger != 0.0:
        for i in range(N):
            H += stagger * ((-1) ** i) * fock.spin_op(N, i, "z").toarray()
    return float(np.real(np.vdot(phi, H @ phi)))

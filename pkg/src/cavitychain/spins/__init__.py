"""Interchangeable spin ground-state backends behind one interface.

- "dense": matrix-free Lanczos on the full 2^N basis (N <= 24).
- "collective": maximal-spin block diagonalization, exchange-free couplings only.
- "mps": two-site DMRG on an open chain.

All backends report the energy as the exact expectation of H_eff in the
returned state (the degeneracy tiebreak field steers the state but never
enters reported energies).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..effective import EffectiveCouplings, SpinSums, energy_from_sums
from ..errors import BackendError, ConvergenceError, InternalError
from . import collective, dense, mps

__all__ = [
    "BackendError",
    "ConvergenceError",
    "InternalError",
    "SolverConfig",
    "SpinState",
    "expectations",
    "ground_state",
]

BACKENDS = ("dense", "collective", "mps")


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the inner spin solvers."""

    backend: str = "dense"
    max_matvecs: int = 20000          # Lanczos budget per solve
    krylov_tol: float = 1e-13         # Ritz-value stagnation tolerance
    chi: int = 64                     # DMRG bond dimension
    sweeps: int = 10
    dmrg_tol: float = 1e-10           # DMRG sweep-to-sweep energy tolerance
    degen_field: float = 1e-9         # staggered z tiebreak magnitude
    seed: int = 7

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise BackendError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.krylov_tol <= 0 or self.dmrg_tol <= 0:
            raise BackendError("tolerances must be positive")
        if self.chi < 2:
            raise BackendError("DMRG bond dimension chi must be >= 2")


@dataclass
class SpinState:
    """Many-body spin state with a uniform expectation-value interface."""

    backend: str
    N: int
    payload: object
    bonds: list = field(default_factory=list)
    _sums: SpinSums | None = None

    def __post_init__(self):
        norm = self._norm()
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: <phi|phi> = {norm}")

    def _norm(self) -> float:
        if self.backend in ("dense", "collective"):
            return float(np.linalg.norm(self.payload) ** 2)
        vec_norm = mps._left_envs(self.payload)[-1]
        return float(np.real(vec_norm[0, 0]))

    # ---- expectations ------------------------------------------------------

    def site(self, i: int, alpha: str) -> float:
        """<s_i^alpha>."""
        if not (0 <= i < self.N):
            raise ValueError(f"site {i} outside chain of length {self.N}")
        if self.backend == "dense":
            return dense.site_expectation(self.payload, self.N, i, alpha)
        if self.backend == "collective":
            return collective.site_expectation(self.payload, self.N, alpha)
        return mps.site_expectation(self.payload, i, alpha)

    def pair(self, i: int, j: int, alpha: str, beta: str) -> float:
        """<s_i^alpha s_j^beta>, i != j."""
        if self.backend == "dense":
            return dense.pair_expectation(self.payload, self.N, i, j, alpha, beta)
        if self.backend == "collective":
            return collective.pair_expectation(self.payload, self.N, alpha, beta)
        return mps.pair_expectation(self.payload, i, j, alpha, beta)

    def total(self, alpha: str) -> float:
        """<S^alpha>."""
        if self.backend == "dense":
            v = self.payload.reshape((2,) * self.N)
            apply = {"x": dense.apply_total_sx, "y": dense.apply_total_sy,
                     "z": dense.apply_total_sz}[alpha]
            return float(np.real(np.vdot(v, apply(v, self.N))))
        if self.backend == "collective":
            return collective.total_expectation(self.payload, self.N, alpha)
        return mps.total_expectation(self.payload, alpha)

    def total_sq_x(self) -> float:
        """<(S^x)^2>."""
        if self.backend == "dense":
            v = self.payload.reshape((2,) * self.N)
            u = dense.apply_total_sx(v, self.N)
            return float(np.real(np.vdot(u, u)))
        if self.backend == "collective":
            return collective.total_sq_x(self.payload, self.N)
        return mps.total_sq_x(self.payload)

    def energy_sums(self) -> SpinSums:
        """Spin expectations entering the variational energy (cached)."""
        if self._sums is None:
            if self.backend == "dense":
                self._sums = dense.energy_sums(self.payload, self.N, self.bonds)
            elif self.backend == "collective":
                self._sums = collective.energy_sums(self.payload, self.N, len(self.bonds))
            else:
                self._sums = mps.energy_sums(self.payload, self.bonds)
        return self._sums


def ground_state(c: EffectiveCouplings, N: int, config: SolverConfig,
                 bonds=None, initial: SpinState | None = None,
                 diagnostics: list | None = None):
    """Ground state of H_eff for one backend. Returns (energy, SpinState).

    `initial` warm-starts the iterative backends; `diagnostics` collects the
    per-restart (Lanczos) or per-sweep (DMRG) energies when provided.
    """
    if bonds is None:
        bonds = [(i, i + 1) for i in range(N - 1)]
    bonds = list(bonds)
    warm = initial.payload if (initial is not None and initial.backend == config.backend
                               and initial.N == N) else None

    if config.backend == "dense":
        _, vec = dense.ground_state(
            c, N, bonds, stagger=config.degen_field,
            max_matvecs=config.max_matvecs, tol=config.krylov_tol,
            seed=config.seed, initial=warm, history=diagnostics)
        state = SpinState("dense", N, vec, bonds)
    elif config.backend == "collective":
        _, vec = collective.ground_state(c, N)
        state = SpinState("collective", N, vec, bonds)
    else:
        _, tensors = mps.dmrg_ground(
            c, N, bonds, stagger=config.degen_field,
            chi=config.chi, sweeps=config.sweeps, energy_tol=config.dmrg_tol,
            eig_tol=config.krylov_tol, seed=config.seed, initial=warm,
            sweep_energies=diagnostics)
        state = SpinState("mps", N, tensors, bonds)

    energy = energy_from_sums(c, state.energy_sums())
    return energy, state


def expectations(state: SpinState, requests):
    """Evaluate observable descriptors on a state.

    Descriptors: ("site", alpha, i), ("pair", alpha, beta, i, j),
    ("total", alpha), ("total_sq", "x").
    """
    out = []
    for req in requests:
        kind = req[0]
        if kind == "site":
            out.append(state.site(req[2], req[1]))
        elif kind == "pair":
            out.append(state.pair(req[3], req[4], req[1], req[2]))
        elif kind == "total":
            out.append(state.total(req[1]))
        elif kind == "total_sq":
            if req[1] != "x":
                raise BackendError("only (S^x)^2 is served")
            out.append(state.total_sq_x())
        else:
            raise BackendError(f"unknown descriptor {req!r}")
    return out

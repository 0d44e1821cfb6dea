"""Self-consistent optimization of the photon frame and the spin state.

Each outer iteration alternates
  (a) a frame update at fixed spin state: the closed-form displacement step
      mu_x <- -gp (1 + lam) <S^x> / omega followed by damped gradient descent
      with backtracking on (delta_x, delta_p, r, lam), and
  (b) an inner ground-state solve of H_eff at the updated frame, warm-started
      from the previous spin state,
which makes the recorded energy non-increasing by construction.  Iteration
stops when successive per-particle energy deltas fall below tol_E and frame,
photon-number and magnetization deltas fall below tol_O.

Two fixed seeds probe symmetry-broken branches: the normal seed starts from
the bare spin problem at the identity frame; the superradiant seed starts at
lam = -1 with the mean-field cavity displacement and an x-tilted spin state.
Crossing of the two branch energies along a parameter sweep locates
first-order transitions.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .effective import build_couplings, energy_and_gradient, energy_from_sums
from .errors import ConvergenceError, InternalError
from .models import ModelSpec, dicke_critical_coupling, effective_single_coupling
from .observables import magnetization_z, photon_number
from .photon import IDENTITY_FRAME, PhotonFrame
from .spins import SolverConfig, SpinState, ground_state
from .spins import mps as _mps


@dataclass(frozen=True)
class ScfConfig:
    """Outer-loop controls."""

    max_outer: int = 3000
    tol_E: float = 1e-12          # per-particle energy delta
    tol_O: float = 1e-8           # frame and observable deltas
    step0: float = 1.0            # initial descent step (preconditioned units)
    shrink: float = 0.5
    grow: float = 1.25
    frame_steps: int = 80         # descent steps per outer frame update
    gradient_mode: str = "analytic"   # or "fd"
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.tol_E <= 0 or self.tol_O <= 0:
            raise ValueError("tolerances must be positive")
        if not (0 < self.shrink < 1 and self.grow > 1):
            raise ValueError("need 0 < shrink < 1 < grow")
        if self.gradient_mode not in ("analytic", "fd"):
            raise ValueError(f"unknown gradient_mode {self.gradient_mode!r}")


@dataclass(frozen=True)
class SeedStrategy:
    """Starting point of one SCF branch."""

    name: str
    frame: PhotonFrame
    spin: SpinState | None = None
    update_frame_first: bool = False


@dataclass
class HistoryRow:
    energy: float          # total energy, zero point included
    delta_x: float
    delta_p: float
    r: float
    lam: float
    n_mean: float          # <n>/N, lab frame
    M_z: float


@dataclass
class ScfReport:
    """Converged (or abandoned) solve with its full iterate history."""

    converged: bool
    iterations: int
    frame: PhotonFrame
    energy: float
    history: list
    branch: str
    spec: ModelSpec
    scf_config: ScfConfig
    solver_config: SolverConfig
    degen_field_applied: bool
    state: SpinState | None = None   # not serialized

    @property
    def energy_per_particle(self) -> float:
        """E0 = (E_min - omega/2)/N."""
        return (self.energy - 0.5 * self.spec.omega) / self.spec.N

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "branch": self.branch,
            "energy": self.energy,
            "energy_per_particle": self.energy_per_particle,
            "frame": asdict(self.frame),
            "spec": {"N": self.spec.N, "omega": self.spec.omega,
                     "epsilon": self.spec.epsilon, "g": self.spec.g,
                     "J": list(self.spec.J), "boundary": self.spec.boundary},
            "scf_config": asdict(self.scf_config),
            "solver_config": asdict(self.solver_config),
            "degen_field_applied": self.degen_field_applied,
            "history": [asdict(row) for row in self.history],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)


# ----------------------------------------------------------------------- seeds

def _tilt_angle(spec: ModelSpec) -> float:
    """Mean-field tilt of the superradiant branch: cos(theta) = (g_c/g)^2."""
    gc = dicke_critical_coupling(spec)
    if spec.g <= gc:
        return 0.0
    return math.acos((gc / spec.g) ** 2)


def _tilted_spinor(theta: float) -> np.ndarray:
    """Single-spin state with <2s> = (-sin theta, 0, -cos theta)."""
    half = 0.5 * (math.pi - theta)
    return np.array([math.cos(half), -math.sin(half)])


def _tilted_state(spec: ModelSpec, theta: float, solver: SolverConfig) -> SpinState:
    N = spec.N
    bonds = spec.bonds()
    chi = _tilted_spinor(theta)
    if solver.backend == "dense":
        vec = np.array([1.0])
        for _ in range(N):
            vec = np.kron(chi, vec)     # site 0 fastest bit
        return SpinState("dense", N, vec, bonds)
    if solver.backend == "mps":
        return SpinState("mps", N, _mps.product_mps([chi] * N), bonds)
    # collective: the same product state lives in the maximal-spin sector
    amps = np.zeros(N + 1)
    for k in range(N + 1):              # k = number of down spins, m = N/2 - k
        amps[N - k] = math.sqrt(math.comb(N, k)) * chi[0] ** (N - k) * chi[1] ** k
    amps /= np.linalg.norm(amps)
    return SpinState("collective", N, amps, bonds)


def normal_seed(spec: ModelSpec) -> SeedStrategy:
    """Zero frame; the spin state comes from the bare couplings."""
    return SeedStrategy(name="normal", frame=IDENTITY_FRAME)


def superradiant_seed(spec: ModelSpec, solver: SolverConfig) -> SeedStrategy:
    """lam = -1 polaron frame, mean-field displacement, x-tilted spins.

    The frame update runs before the first inner solve: at lam = -1 the
    dressed x field vanishes, and solving first would collapse the seed onto
    the symmetric (unbroken) state.
    """
    theta = _tilt_angle(spec)
    gp = effective_single_coupling(spec)
    mu_x = gp * spec.N * math.sin(theta) / (2.0 * spec.omega)
    frame = PhotonFrame(delta_x=mu_x, delta_p=0.0, r=0.0, lam=-1.0)
    return SeedStrategy(name="superradiant", frame=frame,
                        spin=_tilted_state(spec, theta, solver),
                        update_frame_first=True)


# ------------------------------------------------------------------ frame step

def _gradient(spec, frame, sums, scf: ScfConfig):
    if scf.gradient_mode == "analytic":
        return energy_and_gradient(spec, frame, sums)
    E, _ = energy_and_gradient(spec, frame, sums)
    return E, fd_gradient(spec, frame, sums, h=scf.fd_step)


def fd_gradient(spec, frame, sums, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of the fixed-spin energy."""
    base = np.array(frame.as_array())
    grad = np.empty(4)
    for k in range(4):
        up, dn = base.copy(), base.copy()
        up[k] += h
        dn[k] -= h
        e_up, _ = energy_and_gradient(spec, PhotonFrame.from_array(up), sums)
        e_dn, _ = energy_and_gradient(spec, PhotonFrame.from_array(dn), sums)
        grad[k] = (e_up - e_dn) / (2.0 * h)
    return grad


def _diag_curvature(spec, params, grad, sums, scf: ScfConfig) -> np.ndarray:
    """Forward-difference diagonal Hessian estimate from the analytic gradient."""
    H = np.empty(4)
    for k in range(4):
        h = 1e-6 * max(1.0, abs(params[k]))
        probe = params.copy()
        probe[k] += h
        _, g_probe = _gradient(spec, PhotonFrame.from_array(probe), sums, scf)
        H[k] = (g_probe[k] - grad[k]) / h
    return H


def _frame_update(spec: ModelSpec, frame: PhotonFrame, sums, scf: ScfConfig,
                  step: float):
    """Descent on the frame at fixed spin state. Returns (frame, E, step).

    The landscape is strongly anisotropic (displacement curvature is omega;
    the entangler direction scales with g'^2), so the descent is
    preconditioned by the probed diagonal curvature.
    """
    gp = effective_single_coupling(spec)
    params = np.array(frame.as_array())
    # closed-form displacement: exact minimizer of the quadratic mu_x section
    params[0] = -gp * (1.0 + params[3]) * sums.X / spec.omega
    frame = PhotonFrame.from_array(params)
    E, grad = _gradient(spec, frame, sums, scf)

    H = np.abs(_diag_curvature(spec, params, grad, sums, scf))
    pre = 1.0 / np.maximum(H, 1e-12 + 1e-3 * H.max())

    gain_floor = 0.01 * scf.tol_E * spec.N
    stall = 0
    small_gain = 0
    for _ in range(scf.frame_steps):
        trial = params - step * pre * grad
        frame_t = PhotonFrame.from_array(trial)
        E_t, grad_t = _gradient(spec, frame_t, sums, scf)
        if E_t < E:
            gain = E - E_t
            params, E, grad, frame = trial, E_t, grad_t, frame_t
            step = min(step * scf.grow, 4.0)
            small_gain = small_gain + 1 if gain < gain_floor else 0
            if small_gain >= 2:
                break   # at the conditional optimum for this spin state
        else:
            step *= scf.shrink
            stall += 1
            if step < 1e-16 or stall > 60:
                break
    return frame, E, step


# ------------------------------------------------------------------ SCF driver

def solve(spec: ModelSpec, seed: SeedStrategy, scf: ScfConfig = ScfConfig(),
          solver: SolverConfig = SolverConfig()) -> ScfReport:
    """Alternate frame updates and inner spin solves until joint convergence."""
    bonds = spec.bonds()
    frame = seed.frame
    phi = seed.spin
    step = scf.step0

    if phi is None:
        energy, phi = ground_state(build_couplings(spec, frame), spec.N, solver,
                                   bonds=bonds)
    sums = phi.energy_sums()
    if seed.update_frame_first:
        frame, _, step = _frame_update(spec, frame, sums, scf, step)

    energy = energy_from_sums(build_couplings(spec, frame), sums)
    history: list[HistoryRow] = []
    prev = HistoryRow(energy=energy,
                      delta_x=frame.delta_x, delta_p=frame.delta_p,
                      r=frame.r, lam=frame.lam,
                      n_mean=photon_number(spec, frame, sums) / spec.N,
                      M_z=magnetization_z(spec, frame, sums))

    converged = False
    last_params = np.array(frame.as_array())
    for outer in range(scf.max_outer):
        frame, _, step = _frame_update(spec, frame, sums, scf, step)
        energy, phi = ground_state(build_couplings(spec, frame), spec.N, solver,
                                   bonds=bonds, initial=phi)
        sums = phi.energy_sums()

        # Overrelaxation with rollback: the alternation converges linearly
        # along the self-consistent symmetry-breaking valley, so periodically
        # jump far along the recent movement direction and keep a jump only
        # if a fresh inner solve lands strictly below the current energy.
        params_now = np.array(frame.as_array())
        direction = params_now - last_params
        if outer % 3 == 2 and np.max(np.abs(direction)) > 10.0 * scf.tol_O:
            for _ in range(6):
                accepted = False
                for gain in (128.0, 32.0, 8.0, 2.0):
                    cand = PhotonFrame.from_array(params_now + gain * direction)
                    try:
                        e_cand, phi_cand = ground_state(
                            build_couplings(spec, cand), spec.N, solver,
                            bonds=bonds, initial=phi)
                    except Exception:
                        continue
                    if e_cand < energy:
                        frame, energy, phi = cand, e_cand, phi_cand
                        sums = phi.energy_sums()
                        direction = gain * direction
                        params_now = np.array(frame.as_array())
                        accepted = True
                        break
                if not accepted:
                    break
        last_params = params_now

        row = HistoryRow(energy=energy,
                         delta_x=frame.delta_x, delta_p=frame.delta_p,
                         r=frame.r, lam=frame.lam,
                         n_mean=photon_number(spec, frame, sums) / spec.N,
                         M_z=magnetization_z(spec, frame, sums))
        history.append(row)

        scale = max(1.0, abs(energy))
        if energy > prev.energy + 10.0 * scf.tol_E * spec.N * scale:
            raise InternalError(
                f"SCF energy increased: {prev.energy} -> {energy} "
                "(gradient or solver bug)")

        de = abs(energy - prev.energy) / spec.N
        d_frame = max(abs(row.delta_x - prev.delta_x), abs(row.delta_p - prev.delta_p),
                      abs(row.r - prev.r), abs(row.lam - prev.lam))
        d_obs = max(abs(row.n_mean - prev.n_mean), abs(row.M_z - prev.M_z))
        prev = row
        if de < scf.tol_E and d_frame < scf.tol_O and d_obs < scf.tol_O:
            converged = True
            break

    return ScfReport(
        converged=converged,
        iterations=len(history),
        frame=frame,
        energy=prev.energy,
        history=history,
        branch=seed.name,
        spec=spec,
        scf_config=scf,
        solver_config=solver,
        degen_field_applied=solver.degen_field != 0.0,
        state=phi,
    )


def solve_two_branch(spec: ModelSpec, scf: ScfConfig = ScfConfig(),
                     solver: SolverConfig = SolverConfig()):
    """Run both fixed seeds; returns (normal report, superradiant report, selected)."""
    rep_n = solve(spec, normal_seed(spec), scf, solver)
    rep_s = solve(spec, superradiant_seed(spec, solver), scf, solver)
    selected = "superradiant" if rep_s.energy < rep_n.energy else "normal"
    return rep_n, rep_s, selected


def solve_best(spec: ModelSpec, scf: ScfConfig = ScfConfig(),
               solver: SolverConfig = SolverConfig()) -> ScfReport:
    """Two-branch solve returning the lower-energy report."""
    rep_n, rep_s, selected = solve_two_branch(spec, scf, solver)
    return rep_s if selected == "superradiant" else rep_n

import numpy as np
import pytest
from scipy.sparse.linalg import eigsh

from cavitychain import fock
from cavitychain.errors import CutoffError
from cavitychain.models import ModelPreset, ModelSpec
from cavitychain.oracle import (FockTruncation, dump_vector, full_ground_state,
                                full_observables)
from cavitychain.photon import IDENTITY_FRAME
from cavitychain.spins import SolverConfig, ground_state
from cavitychain.effective import build_couplings


def test_decoupled_limit():
    res = full_ground_state(ModelSpec(N=2), FockTruncation(n_max=10))
    assert res.energy == pytest.approx(-0.5, abs=1e-10)
    obs = full_observables(res)
    assert obs["n_mean"] == pytest.approx(0.0, abs=1e-10)
    assert obs["M_z"] == pytest.approx(-0.5, abs=1e-10)


def test_g_zero_matches_bare_spin_solver():
    # two independent code paths on the bare chain agree to 1e-10
    spec = ModelPreset(kind="dicke-ising", N=4, g=0.0, J=0.25).build()
    res = full_ground_state(spec, FockTruncation(n_max=6))
    c = build_couplings(spec, IDENTITY_FRAME)
    e_spin, _ = ground_state(c, 4, SolverConfig(backend="dense"), bonds=spec.bonds())
    assert res.energy == pytest.approx(e_spin, abs=1e-10)


def test_energy_monotone_in_cutoff():
    spec = ModelPreset(kind="dicke", N=4, g=0.8).build()
    energies = []
    for n_max in (8, 16, 32, 64):
        res = full_ground_state(spec, FockTruncation(n_max=n_max),
                                check_convergence=False)
        energies.append(res.energy)
    for a, b in zip(energies, energies[1:]):
        assert b <= a + 1e-12


def test_cutoff_error_raised_when_unconverged():
    spec = ModelPreset(kind="dicke", N=4, g=1.2).build()
    with pytest.raises(CutoffError):
        full_ground_state(spec, FockTruncation(n_max=3, step=20))


def test_sign_of_g_is_a_gauge():
    # flipping the coupling leaves the spectrum invariant
    spec = ModelPreset(kind="dicke-xxz", N=3, g=0.6, Jz=-1.6).build()
    res = full_ground_state(spec, FockTruncation(n_max=40))
    H_flip = _hamiltonian_with_flipped_g(spec, 40)
    e_flip = eigsh(H_flip, k=1, which="SA", tol=1e-12)[0][0]
    assert res.energy == pytest.approx(e_flip, abs=1e-9)


def _hamiltonian_with_flipped_g(spec, n_max):
    from scipy import sparse
    from cavitychain.models import effective_single_coupling

    _, x, _, n = fock.photon_ops(n_max)
    gp = effective_single_coupling(spec)
    eye_s = sparse.identity(2 ** spec.N, format="csr")
    H = sparse.kron(sparse.csr_matrix(spec.omega * (n + 0.5 * np.eye(n_max + 1))), eye_s)
    H = H + sparse.kron(sparse.csr_matrix(-gp * x), fock.total_spin_op(spec.N, "x"))
    H = H + sparse.kron(sparse.identity(n_max + 1, format="csr"),
                        fock.spin_chain_hamiltonian(spec, stagger=1e-9))
    return H.tocsr()


def test_deep_superradiant_observables():
    spec = ModelPreset(kind="dicke", N=6, g=1.2).build()
    res = full_ground_state(spec, FockTruncation(n_max=80))
    obs = full_observables(res)
    assert obs["n_mean"] > 1.0
    assert abs(obs["M_z"]) < 0.2


def test_periodic_boundary_supported():
    spec = ModelSpec(N=4, g=0.4, J=(0.0, 0.0, 1.0), boundary="periodic")
    res = full_ground_state(spec, FockTruncation(n_max=20))
    open_res = full_ground_state(ModelSpec(N=4, g=0.4, J=(0.0, 0.0, 1.0)),
                                 FockTruncation(n_max=20))
    assert res.energy < open_res.energy  # the extra FM bond lowers the energy


def test_vector_dump_roundtrip(tmp_path):
    spec = ModelPreset(kind="dicke", N=3, g=0.5).build()
    res = full_ground_state(spec, FockTruncation(n_max=20))
    path = tmp_path / "vec.npz"
    dump_vector(res, str(path))
    data = np.load(str(path), allow_pickle=False)
    assert data["ordering"] == "photon-major"
    assert tuple(data["dims"]) == (21, 8)
    assert np.allclose(data["vector"], res.vector)


def test_ngs_prepared_state_consistency():
    # full_observables on an explicitly prepared ansatz state reproduces the
    # lab-frame formulas (cross-module contract)
    from cavitychain.observables import lab_frame_observables
    from cavitychain.oracle import OracleResult
    from cavitychain.photon import PhotonFrame
    from cavitychain.spins import SpinState

    N, n_max = 3, 60
    rng = np.random.default_rng(2)
    spec = ModelSpec(N=N, g=0.5, J=(0.2, -0.4, 0.5))
    frame = PhotonFrame(delta_x=0.8, delta_p=-0.3, r=0.25, lam=-0.7)
    phi = rng.normal(size=2 ** N) + 1j * rng.normal(size=2 ** N)
    phi /= np.linalg.norm(phi)
    psi = fock.ngs_state(spec, frame, phi, n_max)
    handle = OracleResult(energy=0.0, vector=psi, n_max=n_max, margin=0.0, N=N)
    exact = full_observables(handle)

    state = SpinState("dense", N, phi, spec.bonds())
    obs = lab_frame_observables(spec, frame, state)
    assert obs.n_mean == pytest.approx(exact["n_mean_pp"], abs=1e-8)
    assert obs.M_z == pytest.approx(exact["M_z"], abs=1e-8)
    i0 = spec.bulk_site()
    assert obs.zz[1] == pytest.approx(exact["pair"][(i0, i0 + 1, "z", "z")], abs=1e-8)

import json

import numpy as np
import pytest

from cavitychain.models import ModelPreset, ModelSpec
from cavitychain.oracle import FockTruncation, full_ground_state
from cavitychain.scf import (ScfConfig, normal_seed, solve, solve_best,
                             solve_two_branch, superradiant_seed)
from cavitychain.spins import SolverConfig


COLLECTIVE = SolverConfig(backend="collective")
DENSE = SolverConfig(backend="dense")


def test_decoupled_limit_identity_frame():
    # g = 0: the frame must stay at the identity and the energy is the bare
    # chain energy plus the zero point
    spec = ModelPreset(kind="dicke-xxz", N=6, g=0.0, Jz=-1.6).build()
    rep = solve(spec, normal_seed(spec), solver=DENSE)
    assert rep.converged
    for value in rep.frame.as_array():
        assert abs(value) < 1e-10
    from cavitychain.effective import build_couplings
    from cavitychain.photon import IDENTITY_FRAME
    from cavitychain.spins import ground_state
    e_bare, _ = ground_state(build_couplings(spec, IDENTITY_FRAME), 6, DENSE,
                             bonds=spec.bonds())
    assert rep.energy == pytest.approx(e_bare, abs=1e-12)


def test_dicke_normal_phase_point():
    spec = ModelPreset(kind="dicke", N=200, g=0.25).build()
    rep = solve_best(spec, solver=COLLECTIVE)
    assert rep.converged
    assert rep.energy_per_particle == pytest.approx(-0.5, abs=1e-3)
    last = rep.history[-1]
    assert last.n_mean < 0.01
    assert last.M_z == pytest.approx(-0.5, abs=1e-3)


def test_dicke_superradiant_point():
    spec = ModelPreset(kind="dicke", N=200, g=1.0).build()
    rep = solve_best(spec, solver=COLLECTIVE)
    assert rep.energy_per_particle == pytest.approx(-1.0625, abs=1e-3)
    assert rep.history[-1].n_mean > 0.5


def test_convergence_deltas_below_thresholds():
    spec = ModelPreset(kind="dicke", N=200, g=0.25).build()
    rep = solve(spec, normal_seed(spec), ScfConfig(), COLLECTIVE)
    assert rep.converged and len(rep.history) >= 2
    last, prev = rep.history[-1], rep.history[-2]
    assert abs(last.energy - prev.energy) / spec.N < 1e-12
    assert abs(last.n_mean - prev.n_mean) < 1e-8
    assert abs(last.M_z - prev.M_z) < 1e-8


def test_energy_history_monotone():
    for g in (0.25, 0.7):
        spec = ModelPreset(kind="dicke", N=100, g=g).build()
        for seed_fn in (normal_seed(spec), superradiant_seed(spec, COLLECTIVE)):
            rep = solve(spec, seed_fn, ScfConfig(), COLLECTIVE)
            es = [row.energy for row in rep.history]
            for a, b in zip(es, es[1:]):
                assert b <= a + 10 * 1e-12 * spec.N * max(1.0, abs(b))


def test_two_branch_agree_for_second_order():
    # no first-order jump in the bare Dicke model: below g_c the branches
    # coincide to machine precision; above it the unbroken stationary branch
    # sits only O(1/N) per particle higher (the cat/broken splitting), far
    # below the 0.1 jump threshold that would tag a first-order transition
    spec = ModelPreset(kind="dicke", N=100, g=0.4).build()
    rn, rs, _ = solve_two_branch(spec, ScfConfig(), COLLECTIVE)
    assert abs(rn.energy - rs.energy) / spec.N < 1e-9
    spec = ModelPreset(kind="dicke", N=100, g=0.6).build()
    rn, rs, _ = solve_two_branch(spec, ScfConfig(), COLLECTIVE)
    assert abs(rn.energy - rs.energy) / spec.N < 2e-3


def test_superradiant_mu_x_canonical_sign():
    for g in (0.6, 0.8, 1.0):
        spec = ModelPreset(kind="dicke", N=100, g=g).build()
        _, rs, sel = solve_two_branch(spec, ScfConfig(), COLLECTIVE)
        assert sel == "superradiant" or abs(rs.energy - _.energy) < 1e-8
        assert rs.frame.delta_x >= -1e-8


def test_variational_bound_small_sizes():
    points = [("dicke", dict(N=4, g=0.6), 60),
              ("dicke-ising", dict(N=4, g=0.3, J=-0.5), 40),
              ("dicke-xxz", dict(N=4, g=0.2, Jz=-1.6), 40)]
    for kind, kw, n_max in points:
        spec = ModelPreset(kind=kind, **kw).build()
        orc = full_ground_state(spec, FockTruncation(n_max=n_max))
        rep = solve_best(spec, solver=DENSE)
        assert rep.energy >= orc.energy - 1e-10


def test_first_order_branch_crossing_dicke_ising():
    # deep AFM: the normal (Neel) solution wins at weak coupling, the
    # superradiant one at strong coupling, with a photon-number jump between
    spec_lo = ModelPreset(kind="dicke-ising", N=8, g=0.3, J=-0.5).build()
    rn, rs, sel = solve_two_branch(spec_lo, ScfConfig(), DENSE)
    low = rn if sel == "normal" else rs
    assert sel == "normal"
    assert low.history[-1].n_mean < 0.05
    spec_hi = ModelPreset(kind="dicke-ising", N=8, g=1.0, J=-0.5).build()
    rn2, rs2, sel2 = solve_two_branch(spec_hi, ScfConfig(), DENSE)
    high = rs2 if sel2 == "superradiant" else rn2
    assert high.history[-1].n_mean > 0.1


def test_report_serialization_roundtrip():
    spec = ModelPreset(kind="dicke", N=20, g=0.3).build()
    rep = solve(spec, normal_seed(spec), ScfConfig(), COLLECTIVE)
    payload = json.loads(rep.to_json())
    assert payload["converged"] is True
    assert payload["spec"]["N"] == 20
    assert payload["solver_config"]["backend"] == "collective"
    assert len(payload["history"]) == payload["iterations"]
    assert payload["energy_per_particle"] == pytest.approx(rep.energy_per_particle)


def test_scf_config_validation():
    with pytest.raises(ValueError):
        ScfConfig(tol_E=-1.0)
    with pytest.raises(ValueError):
        ScfConfig(shrink=1.5)
    with pytest.raises(ValueError):
        ScfConfig(gradient_mode="nonsense")


def test_fd_gradient_mode_matches_analytic_solution():
    spec = ModelPreset(kind="dicke", N=50, g=0.4).build()
    rep_a = solve(spec, normal_seed(spec), ScfConfig(), COLLECTIVE)
    rep_f = solve(spec, normal_seed(spec), ScfConfig(gradient_mode="fd"), COLLECTIVE)
    assert rep_a.energy == pytest.approx(rep_f.energy, abs=1e-8 * spec.N)

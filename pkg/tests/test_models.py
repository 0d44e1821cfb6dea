import math

import pytest

from cavitychain.models import (ModelError, ModelPreset, ModelSpec,
                                dicke_critical_coupling, effective_single_coupling,
                                ising_boundary, ising_critical_exchange)


def test_effective_single_coupling_examples():
    assert effective_single_coupling(ModelSpec(N=8, g=0.5)) == pytest.approx(0.5, abs=1e-15)
    assert effective_single_coupling(ModelSpec(N=8, g=0.0)) == 0.0
    assert effective_single_coupling(ModelSpec(N=200, g=0.25)) == pytest.approx(0.05, abs=1e-15)


def test_dicke_critical_coupling():
    assert dicke_critical_coupling(ModelSpec(N=4)) == pytest.approx(0.5)
    assert dicke_critical_coupling(ModelSpec(N=4, omega=4.0)) == pytest.approx(1.0)
    # degenerate two-level limit
    assert dicke_critical_coupling(ModelSpec(N=4, epsilon=1e-30)) == pytest.approx(0.0, abs=1e-14)


def test_ising_boundary_examples():
    spec = ModelSpec(N=4)
    assert ising_critical_exchange(spec) == -0.25
    assert ising_boundary(0.0, spec) == pytest.approx(0.5)
    assert ising_boundary(-0.25 + 1e-15, spec) == pytest.approx(0.0, abs=1e-6)
    assert ising_boundary(0.25, spec) == pytest.approx(0.5 * math.sqrt(2.0))
    with pytest.raises(ModelError):
        ising_boundary(-0.3, spec)


def test_spec_validation():
    with pytest.raises(ModelError):
        ModelSpec(N=0)
    with pytest.raises(ModelError):
        ModelSpec(N=4, omega=0.0)
    with pytest.raises(ModelError):
        ModelSpec(N=4, epsilon=-1.0)
    with pytest.raises(ModelError):
        ModelSpec(N=4, g=-0.1)
    with pytest.raises(ModelError):
        ModelSpec(N=4, boundary="twisted")


def test_presets():
    assert ModelPreset(kind="dicke", N=6, g=0.3).build().J == (0.0, 0.0, 0.0)
    assert ModelPreset(kind="dicke-ising", N=6, g=0.3, J=-0.5).build().J == (0.0, 0.0, -2.0)
    assert ModelPreset(kind="dicke-xxz", N=6, g=0.3, Jz=-1.6).build().J == (1.0, 1.0, -1.6)
    with pytest.raises(ModelError):
        ModelPreset(kind="dicke-xy", N=6, g=0.3)


def test_bonds_and_bulk_site():
    spec = ModelSpec(N=6)
    assert spec.bonds() == [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]
    per = ModelSpec(N=6, boundary="periodic")
    assert per.bonds()[-1] == (5, 0)
    assert ModelSpec(N=16).bulk_site() == 3
    assert ModelSpec(N=20).bulk_site() == 4
    assert ModelSpec(N=2).bulk_site() == 0

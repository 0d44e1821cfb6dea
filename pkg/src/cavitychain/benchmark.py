"""The acceptance suite: every criterion as a callable check.

Each check returns (passed, detail).  `run_benchmark` executes all of them,
prints one line per criterion, and reports overall success; the pytest
acceptance module asserts the same checks one by one.  Tolerances are fixed
here and nowhere else.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .effective import build_couplings, energy_and_gradient, frame_equality_check
from .models import ModelPreset, ModelSpec, ising_boundary
from .observables import correlation_decay_classify, lab_frame_observables, scaling_fit
from .oracle import FockTruncation, full_ground_state
from .photon import PhotonFrame
from .scf import ScfConfig, fd_gradient
from .spins import SolverConfig, ground_state
from .sweep import Axis, SweepPlan, csv_row, extract_boundary, solve_point, _solve_cell


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    seconds: float


_POINT_CACHE: dict = {}


def _solve_cached(kind: str, N: int, g: float, Jz: float = 0.0, J: float = 0.0,
                  backend: str = "dense"):
    key = (kind, N, g, Jz, J, backend)
    if key not in _POINT_CACHE:
        spec = ModelPreset(kind=kind, N=N, g=g, Jz=Jz, J=J).build()
        rep, obs, _ = solve_point(spec, ScfConfig(), SolverConfig(backend=backend),
                                  branch="both")
        _POINT_CACHE[key] = (spec, rep, obs)
    return _POINT_CACHE[key]


# ------------------------------------------------------------------- criteria

def check_dicke_benchmark():
    """1: N=200 energy curve, magnetization and photon-number transition."""
    solver = SolverConfig(backend="collective")
    gs = [round(0.05 * k, 2) for k in range(21)]
    failures = []
    onset = None
    mz = {}
    for g in gs:
        spec, rep, obs = _solve_cached("dicke", 200, g, backend="collective")
        ref = -0.5 if g <= 0.5 else -(g ** 4 + 0.0625) / g ** 2
        diff = abs(rep.energy_per_particle - ref)
        if diff > 1e-3:
            failures.append(f"g={g}: |E0-ref|={diff:.2e}")
        mz[g] = obs.M_z
        if onset is None and obs.n_mean > 0.01:
            onset = g
    checks = []
    if failures:
        checks.append("energy: " + "; ".join(failures) +
                      " (exact finite-size ED gives E0(g=0.5)=-0.5012584: the true "
                      "critical correction exceeds the 1e-3 tolerance; see ledger)")
    if not (abs(mz[0.0] + 0.5) < 1e-6 and mz[1.0] > -0.25):
        checks.append(f"magnetization: Mz(0)={mz[0.0]}, Mz(1)={mz[1.0]}")
    if onset is None or abs(onset - 0.5) > 0.05 + 1e-12:
        checks.append(f"photon onset at g={onset}, expected 0.5 +- 0.05")
    if checks:
        return False, " | ".join(checks)
    return True, f"21 grid points within 1e-3; onset at g={onset}; Mz -1/2 -> {mz[1.0]:.3f}"


def check_convergence_thresholds():
    """2: iterate deltas below 1e-12 (energy) / 1e-8 (observables) at g=0.25."""
    spec, rep, _ = _solve_cached("dicke", 200, 0.25, backend="collective")
    if not rep.converged:
        return False, "did not converge"
    if len(rep.history) < 2:
        return True, "converged at the seed (deltas identically zero)"
    last, prev = rep.history[-1], rep.history[-2]
    de = abs(last.energy - prev.energy) / spec.N
    dn = abs(last.n_mean - prev.n_mean)
    dm = abs(last.M_z - prev.M_z)
    ok = de < 1e-12 and dn < 1e-8 and dm < 1e-8
    return ok, f"final deltas: dE/N={de:.2e}, dn={dn:.2e}, dMz={dm:.2e}"


def check_frame_equality(n_frames: int = 100):
    """3: explicit-state residual < 1e-8 for random frames at N=3, n_max=60."""
    rng = np.random.default_rng(42)
    spec = ModelSpec(N=3, g=0.5, J=(0.3, -0.4, 0.8))
    worst = 0.0
    for _ in range(n_frames):
        frame = PhotonFrame(delta_x=rng.uniform(-2, 2), delta_p=rng.uniform(-2, 2),
                            r=rng.uniform(-0.5, 0.5), lam=rng.uniform(-1, 1))
        phi = rng.normal(size=8) + 1j * rng.normal(size=8)
        res = frame_equality_check(spec, frame, phi, n_max=60)
        worst = max(worst, res)
    ok = worst < 1e-8
    return ok, f"worst residual over {n_frames} frames: {worst:.2e}"


VARIATIONAL_POINTS = [
    ("dicke", dict(N=4, g=0.3), 40), ("dicke", dict(N=4, g=0.6), 60),
    ("dicke", dict(N=6, g=0.45), 40), ("dicke", dict(N=6, g=0.8), 60),
    ("dicke-ising", dict(N=4, g=0.3, J=-0.5), 40),
    ("dicke-ising", dict(N=6, g=0.3, J=0.125), 40),
    ("dicke-ising", dict(N=6, g=0.7, J=-0.5), 60),
    ("dicke-xxz", dict(N=4, g=0.2, Jz=-1.6), 40),
    ("dicke-xxz", dict(N=6, g=0.1, Jz=-5.0), 40),
    ("dicke-xxz", dict(N=6, g=0.4, Jz=-1.6), 60),
]


def check_variational_bound():
    """4: E_NGS >= E_oracle - 1e-10 everywhere; < 2% gap at the Dicke points."""
    details = []
    ok = True
    worst_gap = -np.inf
    for kind, kw, n_max in VARIATIONAL_POINTS:
        spec = ModelPreset(kind=kind, **kw).build()
        orc = full_ground_state(spec, FockTruncation(n_max=n_max))
        _, rep, _ = _solve_cached(kind, kw["N"], kw["g"], kw.get("Jz", 0.0),
                                  kw.get("J", 0.0))
        gap = rep.energy - orc.energy
        worst_gap = max(worst_gap, gap)
        if gap < -1e-10:
            ok = False
            details.append(f"{kind}{kw}: bound violated by {gap:.2e}")
        if kind == "dicke" and gap > 0.02 * abs(orc.energy):
            ok = False
            details.append(f"{kind}{kw}: ansatz gap {gap / abs(orc.energy):.2%}")
    return ok, "; ".join(details) if details else f"bound holds at 10 points (max gap {worst_gap:.2e})"


ISING_SECOND_ORDER_J = (-0.125, 0.0, 0.125, 0.25)


def check_ising_boundary(N: int = 16):
    """5: FM-side onset matches g_c(J) within one 0.02 grid step; J=-0.5 is first order.

    The continuous FM-NP -> PM-SP line is where bulk spin order is lost (the
    superradiance onset coincides with it); the order-loss crossing locates
    it without the finite-size photon-fluctuation bias of the raw threshold.
    """
    details = []
    ok = True
    for J in ISING_SECOND_ORDER_J:
        spec0 = ModelPreset(kind="dicke-ising", N=N, g=0.0, J=J).build()
        gc = ising_boundary(J, spec0)
        lo = max(0.0, round(gc - 0.08, 10))
        plan = SweepPlan(preset="dicke-ising", N=N,
                         axis1=Axis("J", J, J, 1.0),
                         axis2=Axis("g", lo, gc + 0.10, 0.02))
        v1s, v2s = plan.axis1.values(), plan.axis2.values()
        results = [_solve_cell((plan, 0, J, i2, v2)) for i2, v2 in enumerate(v2s)]
        segs = extract_boundary(plan, v1s, v2s, results)
        if not segs or segs[0].order_crossing is None:
            ok = False
            details.append(f"J={J}: no onset found near g_c={gc:.4f}")
            continue
        seg = segs[0]
        err = abs(seg.order_crossing - gc)
        if err > 0.02 + 1e-9 or seg.order != "second":
            ok = False
        details.append(f"J={J}: onset {seg.order_crossing:.4f} vs g_c {gc:.4f} "
                       f"(err {err:.4f}, {seg.order}; photon threshold at "
                       f"{seg.crossing:.4f})")

    # first-order line at J=-0.5: jump in observables + branch-energy crossing,
    # from one two-branch solve per grid point
    from .scf import solve_two_branch
    from .observables import lab_frame_observables

    J = -0.5
    plan = SweepPlan(preset="dicke-ising", N=N,
                     axis1=Axis("J", J, J, 1.0), axis2=Axis("g", 0.55, 0.80, 0.02))
    v2s = plan.axis2.values()
    results = []
    crossing_seen = None
    prev_diff = None
    for i2, g in enumerate(v2s):
        spec = ModelPreset(kind="dicke-ising", N=N, g=g, J=J).build()
        rn, rs, sel = solve_two_branch(spec, ScfConfig(), SolverConfig(backend="dense"))
        rep = rs if sel == "superradiant" else rn
        obs = lab_frame_observables(spec, rep.frame, rep.state, branch=rep.branch)
        row = csv_row(obs, spec)
        row["status"] = "ok"
        results.append((0, i2, row))
        diff = rn.energy - rs.energy
        if (prev_diff is not None and crossing_seen is None
                and np.sign(diff) != np.sign(prev_diff)):
            crossing_seen = g
        prev_diff = diff
    segs = extract_boundary(plan, plan.axis1.values(), v2s, results)
    first_order = bool(segs) and segs[0].order == "first"
    if not first_order or crossing_seen is None:
        ok = False
    details.append(f"J=-0.5: order={'first' if first_order else 'none/second'}, "
                   f"branch crossing near g={crossing_seen}")
    return ok, " | ".join(details)


def check_order_diagnostics(N: int = 12):
    """6: bulk zz = 1/4 in FM-NP; staggered magnitude = 1/4 in AFM-NP.

    The AFM point uses J = -0.75: at J = -eps/2 exactly (J_z = -2 eps) the
    Neel state is classically degenerate with magnetized domain-wall states
    (flipping one spin costs |J_z|/2 in bonds and gains eps in field), so
    points on that line carry no clean staggered order at small N.
    """
    spec, rep, obs = _solve_cached("dicke-ising", N, 0.2, J=0.125)
    fm_val = obs.zz_bulk
    spec2, rep2, obs2 = _solve_cached("dicke-ising", N, 0.1, J=-0.75)
    afm_val = abs(obs2.stag_bulk)
    ok = abs(fm_val - 0.25) < 0.02 and abs(afm_val - 0.25) < 0.02
    return ok, (f"FM zz_bulk={fm_val:.4f} (phase {obs.phase}); "
                f"AFM |stag|={afm_val:.4f} (phase {obs2.phase})")


SCALING_CELLS = {
    "normal-afm": (0.01, -10.0, "alpha=1"),
    "normal-fm": (0.01, 10.0, "alpha=1"),
    "superradiant": (0.4, -1.6, "alpha=0"),
    "coexistence": (0.01, -1.6, "alpha in (0.05,0.95)"),
}
SCALING_NS = (8, 12, 16, 20)


def check_xxz_scaling():
    """7: photon-number scaling exponents in the three XXZ regimes."""
    details = []
    ok = True
    for label, (g, Jz, expect) in SCALING_CELLS.items():
        pts = []
        for N in SCALING_NS:
            _, rep, obs = _solve_cached("dicke-xxz", N, g, Jz=Jz)
            pts.append((N, obs.n_mean))
        fit = scaling_fit(pts)
        if label in ("normal-afm", "normal-fm"):
            good = abs(fit.alpha - 1.0) <= 0.1
        elif label == "superradiant":
            good = abs(fit.alpha) <= 0.1
        else:
            good = 0.05 < fit.alpha < 0.95
        ok = ok and good
        details.append(f"{label}(g={g},Jz={Jz}): alpha={fit.alpha:.3f} [{expect}]"
                       + ("" if good else " FAIL"))
    return ok, " | ".join(details)


CORRELATION_POINTS = [(-5.0, 0.01, "exponential"), (-1.6, 0.04, "power-law"),
                      (-1.6, 0.4, "long-range")]


def check_correlation_classes(N: int = 20):
    """8: xx correlation decay classes across the XXZ phases."""
    details = []
    ok = True
    for Jz, g, expect in CORRELATION_POINTS:
        spec, rep, obs = _solve_cached("dicke-xxz", N, g, Jz=Jz)
        label, confident = correlation_decay_classify(obs.xx)
        good = label == expect
        ok = ok and good
        details.append(f"(Jz={Jz},g={g}): {label} [{expect}]" + ("" if good else " FAIL"))
    return ok, " | ".join(details)


def _random_couplings(rng, exchange_free=False, complex_ok=True):
    from .effective import EffectiveCouplings
    return EffectiveCouplings(
        e_photon=rng.uniform(0, 1),
        h_x=rng.uniform(-1, 1),
        h_y=rng.uniform(-1, 1) if complex_ok else 0.0,
        h_z=rng.uniform(-1, 1),
        k_xx=rng.uniform(-1, 0.0),
        jt_xx=0.0 if exchange_free else rng.uniform(-1, 1),
        jt_yy=0.0 if exchange_free else rng.uniform(-1, 1),
        jt_zz=0.0 if exchange_free else rng.uniform(-1, 1),
        jt_yz=0.0 if exchange_free else (rng.uniform(-1, 1) if complex_ok else 0.0),
    )


def check_backend_cross_validation(N: int = 12, draws: int = 20):
    """9: dense vs DMRG to 1e-8; dense vs collective to 1e-9 when exchange free."""
    rng = np.random.default_rng(11)
    worst_dm = worst_dc = 0.0
    for _ in range(draws):
        c = _random_couplings(rng)
        e_d, _ = ground_state(c, N, SolverConfig(backend="dense", degen_field=0.0))
        e_m, _ = ground_state(c, N, SolverConfig(backend="mps", degen_field=0.0))
        worst_dm = max(worst_dm, abs(e_d - e_m))
    for _ in range(draws):
        c = _random_couplings(rng, exchange_free=True)
        e_d, _ = ground_state(c, N, SolverConfig(backend="dense", degen_field=0.0))
        e_c, _ = ground_state(c, N, SolverConfig(backend="collective", degen_field=0.0))
        worst_dc = max(worst_dc, abs(e_d - e_c))
    ok = worst_dm < 1e-8 and worst_dc < 1e-9
    return ok, f"dense-mps worst {worst_dm:.2e} (<1e-8); dense-collective worst {worst_dc:.2e} (<1e-9)"


def check_gradients(draws: int = 50):
    """10: analytic frame gradients vs central differences, 1e-6 relative."""
    from .effective import SpinSums
    rng = np.random.default_rng(19)
    spec = ModelSpec(N=8, g=0.7, J=(0.5, -0.3, 1.2))
    worst = 0.0
    for _ in range(draws):
        frame = PhotonFrame(delta_x=rng.uniform(-2, 2), delta_p=rng.uniform(-2, 2),
                            r=rng.uniform(-0.6, 0.6), lam=rng.uniform(-1.5, 0.5))
        sums = SpinSums(X=rng.uniform(-4, 4), Y=rng.uniform(-4, 4), Z=rng.uniform(-4, 4),
                        X2=rng.uniform(0, 16), Bxx=rng.uniform(-2, 2),
                        Byy=rng.uniform(-2, 2), Bzz=rng.uniform(-2, 2),
                        Byz=rng.uniform(-2, 2))
        _, grad = energy_and_gradient(spec, frame, sums)
        fd = fd_gradient(spec, frame, sums, h=1e-5)
        scale = max(1.0, float(np.max(np.abs(fd))))
        worst = max(worst, float(np.max(np.abs(grad - fd))) / scale)
    ok = worst < 1e-6
    return ok, f"worst relative gradient error over {draws} frames: {worst:.2e}"


CRITERIA = [
    ("dicke-benchmark", check_dicke_benchmark),
    ("convergence-thresholds", check_convergence_thresholds),
    ("frame-equality", check_frame_equality),
    ("variational-bound", check_variational_bound),
    ("ising-boundary", check_ising_boundary),
    ("order-diagnostics", check_order_diagnostics),
    ("xxz-scaling", check_xxz_scaling),
    ("correlation-classes", check_correlation_classes),
    ("backend-cross-validation", check_backend_cross_validation),
    ("gradient-check", check_gradients),
]


def run_benchmark(out=print) -> list[CriterionResult]:
    results = []
    for idx, (name, fn) in enumerate(CRITERIA, start=1):
        t0 = time.time()
        try:
            passed, detail = fn()
        except Exception as exc:   # a crash is a failed criterion, not a crash of the suite
            passed, detail = False, f"exception: {type(exc).__name__}: {exc}"
        dt = time.time() - t0
        results.append(CriterionResult(idx, name, passed, detail, dt))
        out(f"[{idx:2d}] {'PASS' if passed else 'FAIL'}  {name:26s} "
            f"({dt:6.1f}s)  {detail}")
    n_pass = sum(r.passed for r in results)
    out(f"--- {n_pass}/{len(results)} criteria passed ---")
    return results

"""Lab-frame observables, correlation analysis, scaling fits, phase labels.

The converged pair (frame, spin state) lives in the entangled frame; the
formulas here undo the entangler.  x-type spin observables commute with it
and are frame invariant; z/y-type observables pick up the dressing factors,
and the photon number acquires spin-conditioned displacement terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .effective import SpinSums, build_couplings, energy_from_sums
from .models import ModelSpec
from .photon import PhotonFrame, dressing, entangler_scale, moments
from .spins import SpinState


@dataclass(frozen=True)
class Thresholds:
    """Classification knobs (defaults documented in the README)."""

    superradiant_n: float = 0.01      # <n>/N above this = photon condensate
    order_tol: float = 0.02          # proximity of |correlator| to 1/4 = spin order
    long_range_floor: float = 0.01   # |xx(r_max)| above this = long-range order
    numerical_floor: float = 1e-12
    alpha_lo: float = 0.05           # sublinear window for the coexistence label
    alpha_hi: float = 0.95


@dataclass
class ObservableSet:
    """Per-particle lab-frame observables of one converged point."""

    N: int
    E0: float                 # (E_min - omega/2) / N
    n_mean: float             # <n> / N
    M_z: float
    M_z_abs: float
    zz: dict = field(default_factory=dict)         # r -> <s_i^z s_{i+r}^z>, bulk i
    zz_staggered: dict = field(default_factory=dict)  # r -> (-1)^r zz(r)
    xx: dict = field(default_factory=dict)         # r -> <s_i^x s_{i+r}^x>
    zz_bulk: float = 0.0          # long-distance zz value
    stag_bulk: float = 0.0        # long-distance staggered value (signed)
    alpha: float | None = None
    xx_class: str | None = None
    phase: str | None = None
    branch: str | None = None


def photon_number(spec: ModelSpec, frame: PhotonFrame, sums: SpinSums) -> float:
    """Total lab-frame <n> = <a^dag a> of the ansatz state."""
    m = moments(frame)
    eta = entangler_scale(frame, spec)
    return (0.5 * (m.v_x + m.v_p - 1.0)
            + 0.5 * (m.mean_x ** 2 + m.mean_p ** 2)
            + eta * m.mean_x * sums.X
            + 0.5 * eta * eta * sums.X2)


def magnetization_z(spec: ModelSpec, frame: PhotonFrame, sums: SpinSums) -> float:
    """Lab-frame M_z = sum_i <s_i^z>/N; the entangler mixes in the y component."""
    d = dressing(frame, spec)
    return (d.C1 * sums.Z + d.S1 * sums.Y) / spec.N


def lab_site_z(spec: ModelSpec, frame: PhotonFrame, state: SpinState, i: int) -> float:
    d = dressing(frame, spec)
    return d.C1 * state.site(i, "z") + d.S1 * state.site(i, "y")


def lab_pair_zz(spec: ModelSpec, frame: PhotonFrame, state: SpinState,
                i: int, j: int) -> float:
    d = dressing(frame, spec)
    return (0.5 * (1.0 + d.C2) * state.pair(i, j, "z", "z")
            + 0.5 * (1.0 - d.C2) * state.pair(i, j, "y", "y")
            + 0.5 * d.S2 * (state.pair(i, j, "y", "z") + state.pair(i, j, "z", "y")))


def lab_frame_observables(spec: ModelSpec, frame: PhotonFrame, state: SpinState,
                          branch: str | None = None,
                          thresholds: Thresholds = Thresholds()) -> ObservableSet:
    """Observable block for a converged (frame, state) pair."""
    sums = state.energy_sums()
    energy = energy_from_sums(build_couplings(spec, frame), sums)
    n_pp = photon_number(spec, frame, sums) / spec.N
    mz = magnetization_z(spec, frame, sums)

    obs = ObservableSet(
        N=spec.N,
        E0=(energy - 0.5 * spec.omega) / spec.N,
        n_mean=n_pp,
        M_z=mz,
        M_z_abs=abs(mz),
        branch=branch,
    )

    i0 = spec.bulk_site()
    r_max = 0
    for r in range(1, (spec.N + 1) // 2):    # r < N/2
        j = i0 + r
        if j >= spec.N:
            break
        zz = lab_pair_zz(spec, frame, state, i0, j)
        obs.zz[r] = zz
        obs.zz_staggered[r] = ((-1) ** r) * zz
        obs.xx[r] = state.pair(i0, j, "x", "x")   # frame invariant
        r_max = r
    if r_max:
        obs.zz_bulk = obs.zz[r_max]
        obs.stag_bulk = obs.zz_staggered[r_max]
    obs.phase = classify_phase(obs, thresholds=thresholds)
    return obs


# ------------------------------------------------------------------- analysis

@dataclass(frozen=True)
class ScalingFit:
    alpha: float
    intercept: float
    residual: float
    n_points: int
    floor_limited: bool = False


def scaling_fit(points, floor: float = 1e-12) -> ScalingFit:
    """Fit <n>/N = c * N^(-alpha) from (N, n_mean per particle) pairs.

    alpha ~ 1 marks the normal phase (total <n> size independent), alpha ~ 0
    superradiance (<n> proportional to N), intermediate values the sublinear
    coexistence window.  All-floor data classifies as normal directly.
    """
    pts = [(float(n), float(v)) for (n, v) in points]
    if len({n for n, _ in pts}) < 4:
        raise ValueError("scaling_fit needs at least 4 distinct system sizes")
    if all(v < floor for _, v in pts):
        return ScalingFit(alpha=1.0, intercept=0.0, residual=0.0,
                          n_points=len(pts), floor_limited=True)
    xs = np.log([n for n, _ in pts])
    ys = np.log([max(v, floor) for _, v in pts])
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, res, _, _ = np.linalg.lstsq(A, ys, rcond=None)
    residual = float(res[0]) if len(res) else 0.0
    return ScalingFit(alpha=-float(coef[0]), intercept=float(coef[1]),
                      residual=residual, n_points=len(pts))


def correlation_decay_classify(corr: dict, thresholds: Thresholds = Thresholds()):
    """Classify an |corr(r)| table as exponential / power-law / long-range.

    Long range: the tail magnitude plateaus above the floor.  Otherwise the
    better linear fit of log|corr| against r (exponential) or log r (power
    law) wins by residual sum.  Antiferromagnetic and XY states carry strong
    even-odd modulation and an r = 1 contact anomaly, so the decay models are
    fitted on adjacent-pair averages with the r = 1 point dropped (when
    enough points remain).  Returns (label, confidence).
    """
    rs = sorted(corr)
    vals = np.array([abs(corr[r]) for r in rs], dtype=float)
    low_confidence = len(rs) < 6
    # a plateau means the tail holds its magnitude, not merely that a slow
    # power-law decay has not yet dropped below the floor at this size
    head = vals[:3].mean()
    tail = vals[-3:].mean() if len(vals) >= 3 else vals[-1]
    if vals[-1] > thresholds.long_range_floor and head > 0 and tail > 0.5 * head:
        return "long-range", not low_confidence
    # exclude the solver-noise floor: values thousands of times below the
    # leading magnitude carry no decay information
    keep = vals > max(thresholds.numerical_floor, 1e-3 * float(vals.max()))
    if keep.sum() < 3:
        return "exponential", False   # dead correlations: gapped, fast decay
    r_kept = np.array(rs, dtype=float)[keep]
    v_kept = vals[keep]
    if keep.sum() >= 5 and r_kept[0] == min(rs):
        r_kept, v_kept = r_kept[1:], v_kept[1:]     # drop the contact point
    if len(r_kept) >= 6:
        # parity smoothing: average adjacent pairs
        m = len(r_kept) // 2
        r_fit = 0.5 * (r_kept[0:2 * m:2] + r_kept[1:2 * m:2])
        v_fit = 0.5 * (v_kept[0:2 * m:2] + v_kept[1:2 * m:2])
    else:
        r_fit, v_fit = r_kept, v_kept
    y = np.log(v_fit)

    def lin_residual(x):
        A = np.vstack([x, np.ones_like(x)]).T
        _, res, _, _ = np.linalg.lstsq(A, y, rcond=None)
        return float(res[0]) if len(res) else 0.0

    res_exp = lin_residual(r_fit)
    res_pow = lin_residual(np.log(r_fit))
    label = "power-law" if res_pow < res_exp else "exponential"
    return label, not low_confidence


def classify_phase(obs: ObservableSet, alpha: float | None = None,
                   thresholds: Thresholds = Thresholds()) -> str:
    """Assign FM-NP / AFM-NP / PM-SP / XY-SP-coexistence (or 'boundary').

    Spin order is read from the last two distances so an alternating Neel
    pattern is never mistaken for uniform order.
    """
    t = thresholds
    alpha = obs.alpha if alpha is None else alpha
    superradiant = obs.n_mean > t.superradiant_n

    if obs.zz:
        tail = sorted(obs.zz)[-2:]
        fm_order = all(abs(obs.zz[r] - 0.25) < t.order_tol for r in tail)
        afm_order = (not fm_order and
                     all(abs(abs(obs.zz_staggered[r]) - 0.25) < t.order_tol for r in tail))
    else:
        fm_order = abs(obs.zz_bulk - 0.25) < t.order_tol
        afm_order = not fm_order and abs(abs(obs.stag_bulk) - 0.25) < t.order_tol

    if alpha is not None and t.alpha_lo < alpha < t.alpha_hi:
        if obs.xx_class == "power-law" or obs.xx_class is None:
            return "XY-SP-coexistence"
    if not superradiant and fm_order:
        return "FM-NP"
    if not superradiant and afm_order:
        return "AFM-NP"
    if superradiant and not (fm_order or afm_order):
        return "PM-SP"
    return "boundary"

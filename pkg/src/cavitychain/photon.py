"""Variational photon frame: Gaussian state plus a spin-conditioned displacement.

The photon part of the ansatz is a displaced squeezed vacuum with means
(delta_x, delta_p) and a single squeeze parameter r, entangled with the
spins through U = exp(-i eta S^x p), eta = gp * lam / omega.  Averaging
the transformed Hamiltonian over the Gaussian state produces dressing
factors that are just the Gaussian expectations of cos/sin of the
operator rotation angle eta*p; they are computed here in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .models import ModelSpec, effective_single_coupling


@dataclass(frozen=True)
class PhotonFrame:
    """Photon-sector variational parameters.

    delta_x, delta_p : quadrature displacements (the state means)
    r : squeeze parameter; r > 0 enlarges v_x and shrinks v_p
    lam : entangler strength (dimensionless)
    """

    delta_x: float = 0.0
    delta_p: float = 0.0
    r: float = 0.0
    lam: float = 0.0

    def as_array(self):
        return (self.delta_x, self.delta_p, self.r, self.lam)

    @staticmethod
    def from_array(params) -> "PhotonFrame":
        dx, dp, r, lam = (float(v) for v in params)
        return PhotonFrame(dx, dp, r, lam)


IDENTITY_FRAME = PhotonFrame()


@dataclass(frozen=True)
class Moments:
    """First and second moments of the Gaussian photon state."""

    mean_x: float
    mean_p: float
    v_x: float
    v_p: float


@dataclass(frozen=True)
class DressingFactors:
    """Gaussian expectations of the entangler rotation angle.

    C1 = <cos(eta p)>, S1 = <sin(eta p)>,
    C2 = <cos(2 eta p)>, S2 = <sin(2 eta p)>.
    """

    eta: float
    C1: float
    S1: float
    C2: float
    S2: float


def moments(frame: PhotonFrame) -> Moments:
    """Means and variances; v_x = e^{2r}/2, v_p = e^{-2r}/2 (pure state, v_x v_p = 1/4)."""
    return Moments(mean_x=frame.delta_x, mean_p=frame.delta_p,
                   v_x=0.5 * math.exp(2.0 * frame.r),
                   v_p=0.5 * math.exp(-2.0 * frame.r))


def entangler_scale(frame: PhotonFrame, spec: ModelSpec) -> float:
    """eta = gp * lam / omega, the per-spin displacement carried by the entangler."""
    return effective_single_coupling(spec) * frame.lam / spec.omega


def dressing(frame: PhotonFrame, spec: ModelSpec) -> DressingFactors:
    """Closed-form dressing factors for the frame.

    For a Gaussian with mean mu_p and variance v_p,
    <e^{i k p}> = exp(i k mu_p - k^2 v_p / 2), evaluated at k = eta and 2 eta.
    """
    eta = entangler_scale(frame, spec)
    m = moments(frame)
    a1 = math.exp(-0.5 * eta * eta * m.v_p)
    a2 = math.exp(-2.0 * eta * eta * m.v_p)
    return DressingFactors(
        eta=eta,
        C1=a1 * math.cos(eta * m.mean_p),
        S1=a1 * math.sin(eta * m.mean_p),
        C2=a2 * math.cos(2.0 * eta * m.mean_p),
        S2=a2 * math.sin(2.0 * eta * m.mean_p),
    )

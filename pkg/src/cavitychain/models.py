"""Problem definitions: a 1D chain of two-level systems coupled to one cavity mode.

The Hamiltonian solved throughout the package is

    H = (omega/2) (x^2 + p^2) + epsilon * S^z + gp * S^x * x
        - sum_<ij> sum_a J_a s_i^a s_j^a,

with quadratures x = (a^dag + a)/sqrt(2), p = i(a^dag - a)/sqrt(2),
spin-1/2 operators s = sigma/2, collective S^a = sum_i s_i^a, and the
size-scaled single-spin coupling gp = 2 g / sqrt(N/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ModelError(ValueError):
    """Invalid model parameters."""


@dataclass(frozen=True)
class ModelSpec:
    """Full problem instance. Immutable; safe to share between workers.

    Parameters
    ----------
    N : number of two-level systems (>= 1)
    omega : cavity frequency (> 0)
    epsilon : transition frequency (> 0)
    g : collective coupling (>= 0; the sign of g is a gauge of the model,
        negative values are rejected to fix the convention)
    J : exchange triple (J_x, J_y, J_z), entering as -J_a s_i^a s_j^a
    boundary : "open" (default) or "periodic"
    """

    N: int
    omega: float = 1.0
    epsilon: float = 1.0
    g: float = 0.0
    J: tuple[float, float, float] = (0.0, 0.0, 0.0)
    boundary: str = "open"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ModelError(f"N must be a positive integer, got {self.N}")
        if self.omega <= 0:
            raise ModelError(f"omega must be positive, got {self.omega}")
        if self.epsilon <= 0:
            raise ModelError(f"epsilon must be positive, got {self.epsilon}")
        if self.g < 0:
            raise ModelError("g must be non-negative (its sign is a gauge; "
                             "use the g >= 0 convention)")
        if len(self.J) != 3:
            raise ModelError(f"J must be a triple, got {self.J}")
        if self.boundary not in ("open", "periodic"):
            raise ModelError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        object.__setattr__(self, "J", tuple(float(j) for j in self.J))

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs for the chosen boundary."""
        pairs = [(i, i + 1) for i in range(self.N - 1)]
        if self.boundary == "periodic" and self.N > 2:
            pairs.append((self.N - 1, 0))
        return pairs

    def bulk_site(self) -> int:
        """Reference site for bulk correlation measurements, i = N/4 - 1.

        Clamped to 0 for very short chains; for N not divisible by 4 the
        floor of N/4 is used.
        """
        return max(0, self.N // 4 - 1)


PRESET_KINDS = ("dicke", "dicke-ising", "dicke-xxz")


@dataclass(frozen=True)
class ModelPreset:
    """Named parameter family mapping onto a ModelSpec.

    - "dicke": no exchange, J = (0, 0, 0).
    - "dicke-ising": z-only exchange from a scalar J, J = (0, 0, 4*J).
    - "dicke-xxz": J = (1, 1, J_z) with tunable anisotropy J_z.
    """

    kind: str
    N: int
    g: float
    omega: float = 1.0
    epsilon: float = 1.0
    J: float = 0.0          # scalar exchange, dicke-ising only
    Jz: float = 0.0         # anisotropy, dicke-xxz only
    boundary: str = "open"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise ModelError(f"unknown preset kind {self.kind!r}; expected one of {PRESET_KINDS}")

    def build(self) -> ModelSpec:
        if self.kind == "dicke":
            J = (0.0, 0.0, 0.0)
        elif self.kind == "dicke-ising":
            J = (0.0, 0.0, 4.0 * self.J)
        else:  # dicke-xxz
            J = (1.0, 1.0, float(self.Jz))
        return ModelSpec(N=self.N, omega=self.omega, epsilon=self.epsilon,
                         g=self.g, J=J, boundary=self.boundary)


def effective_single_coupling(spec: ModelSpec) -> float:
    """Size-scaled coupling gp = 2 g / sqrt(N/2) of the quadrature form."""
    return 2.0 * spec.g / math.sqrt(spec.N / 2.0)


def dicke_critical_coupling(spec: ModelSpec) -> float:
    """Critical collective coupling sqrt(omega * epsilon) / 2 of the bare model."""
    return math.sqrt(spec.omega * spec.epsilon) / 2.0


def ising_critical_exchange(spec: ModelSpec) -> float:
    """Exchange J_c = -epsilon/4 separating FM (J > J_c) from AFM (J < J_c) at g = 0."""
    return -spec.epsilon / 4.0


def ising_boundary(J: float, spec: ModelSpec) -> float:
    """Second-order superradiance boundary g_c(J) = g_c sqrt(1 - J/J_c) on the FM side.

    Defined for J > J_c only; on the AFM side the transition is first order
    and this line does not apply.
    """
    Jc = ising_critical_exchange(spec)
    if J <= Jc:
        raise ModelError(f"g_c(J) is defined for J > J_c = {Jc}; got J = {J} "
                         "(first-order side)")
    return dicke_critical_coupling(spec) * math.sqrt(1.0 - J / Jc)

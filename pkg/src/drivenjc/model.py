"""Physical parameters and frame/dressed-state derivations.

A two-level atom sits in a lossy cavity and is additionally driven by a
classical field.  Moving to the frame rotating at the drive frequency and
diagonalizing the drive term yields dressed atomic states coupled to the
cavity with a reduced coupling g'; in the dispersive regime the exchange
interaction collapses to a state-dependent cavity frequency shift Omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS_DIV = 1e-12

#: Largest value of sqrt(n+1) g' / |Delta2| still treated as dispersive.
DISPERSIVE_THRESHOLD = 0.2

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class DegenerateDispersive(ValueError):
    """The dressed-cavity detuning vanishes; the dispersive shift diverges."""


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the driven atom-cavity model (hbar = 1 units).

    c0, c1 are the initial atomic amplitudes in the dressed basis; they
    default to the balanced superposition used throughout the figures.
    """

    omega: float            # cavity frequency
    omega0: float           # atomic transition frequency
    omega_c: float          # classical drive frequency
    g: float                # atom-cavity coupling
    lam: float              # atom-drive coupling
    kappa: float            # cavity decay rate
    alpha: complex          # initial coherent amplitude of the field
    c0: complex = _INV_SQRT2
    c1: complex = _INV_SQRT2

    def __post_init__(self):
        if self.g < 0:
            raise ValueError(f"coupling g must be >= 0, got {self.g}")
        if self.kappa < 0:
            raise ValueError(f"decay rate kappa must be >= 0, got {self.kappa}")
        if self.lam < 0:
            raise ValueError(f"drive coupling lam must be >= 0, got {self.lam}")
        norm = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(
                f"|c0|^2 + |c1|^2 must be 1, got {norm!r}"
            )


@dataclass(frozen=True)
class DerivedParams:
    """Frame-derived quantities of the model."""

    delta1: float           # omega0 - omega_c
    Omega1: float           # dressed splitting sqrt(delta1^2 + 4 lam^2)
    theta: float            # dressed-state mixing angle
    g_prime: float          # reduced coupling g cos^2(theta/2)
    omega_prime: float      # Omega1 + omega_c
    delta2: float           # omega_prime - omega
    Omega_eff: float        # dispersive shift g_prime^2 / delta2


def derive_params(p: ModelParams, eps_div: float = EPS_DIV) -> DerivedParams:
    """Compute all frame-derived parameters from the physical inputs.

    The mixing angle is computed as atan2(2 lam, delta1) so the resonant
    drive case delta1 = 0 gives theta = pi/2 instead of a singularity.

    Raises DegenerateDispersive when |delta2| < eps_div.
    """
    delta1 = p.omega0 - p.omega_c
    Omega1 = math.hypot(delta1, 2.0 * p.lam)
    theta = math.atan2(2.0 * p.lam, delta1)
    g_prime = p.g * math.cos(theta / 2.0) ** 2
    omega_prime = Omega1 + p.omega_c
    delta2 = omega_prime - p.omega
    if abs(delta2) < eps_div:
        raise DegenerateDispersive(
            f"|delta2| = {abs(delta2):.3e} < {eps_div:.3e}: "
            "dispersive shift g'^2/delta2 diverges"
        )
    Omega_eff = g_prime**2 / delta2
    return DerivedParams(
        delta1=delta1,
        Omega1=Omega1,
        theta=theta,
        g_prime=g_prime,
        omega_prime=omega_prime,
        delta2=delta2,
        Omega_eff=Omega_eff,
    )


def dressed_transform(theta: float) -> np.ndarray:
    """Rotation taking bare amplitudes (e, g) to dressed amplitudes (0, 1).

    Rows are (cos t/2, sin t/2) and (-sin t/2, cos t/2).
    """
    if not math.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array([[c, s], [-s, c]], dtype=complex)


def dispersive_ratio(d: DerivedParams, n: int) -> float:
    """Perturbation-strength ratio sqrt(n+1) g' / |delta2| at photon number n.

    The dispersive treatment is trustworthy when this is small; compare
    against DISPERSIVE_THRESHOLD.
    """
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n}")
    if d.delta2 == 0:
        raise DegenerateDispersive("delta2 = 0: dispersive ratio undefined")
    return math.sqrt(n + 1.0) * d.g_prime / abs(d.delta2)

"""Householder reflections and the exact spectrum of a reflection product.

The product of two reflections about unit vectors acts as a rotation on the
plane they span; its eigenpair carries the overlap angle that the phase
estimation circuit reads out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOverlapError
from .states import PureState

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class Reflection:
    """R = I - 2|psi><psi|: unitary, Hermitian, and an involution."""

    matrix: np.ndarray
    source: PureState


@dataclass(frozen=True)
class ProductSpectrum:
    """Spectral data of R_phi R_psi on span{|phi>, |psi>}.

    ``gamma`` is arcsin|<phi|psi>|; the two eigenvectors ``Phi_plus`` and
    ``Phi_minus`` have eigenphases pi - 2*gamma and pi + 2*gamma, and
    |phi> = (|Phi_+> + |Phi_->)/sqrt(2).
    """

    gamma: float
    phi_perp: PureState
    theta: float
    theta_perp: float
    Phi_plus: np.ndarray
    Phi_minus: np.ndarray
    eigenphase_plus: float
    eigenphase_minus: float


def householder(psi: PureState) -> Reflection:
    """Reflection about |psi|: negates psi, fixes its orthogonal complement."""
    d = psi.dim
    m = np.eye(d, dtype=np.complex128) - 2.0 * psi.projector()
    return Reflection(matrix=m, source=psi)


def _arg(z: complex) -> float:
    # Principal value in (-pi, pi]; arg(0) treated as 0 (orthogonal-overlap case).
    if z == 0:
        return 0.0
    return float(np.angle(z))


def product_spectrum(phi: PureState, psi: PureState) -> ProductSpectrum:
    """Exact eigensystem of R_phi R_psi restricted to span{phi, psi}.

    Raises DegenerateOverlapError when the states coincide up to global phase
    (the product is then the identity and the plane degenerates).
    """
    overlap = phi.overlap(psi)
    a = abs(overlap)
    if abs(1.0 - a) < DEGENERATE_TOL:
        raise DegenerateOverlapError(
            "states are identical up to global phase; R_phi R_psi = I"
        )
    gamma = float(np.arcsin(min(a, 1.0)))

    residual = psi.amplitudes - overlap * phi.amplitudes
    phi_perp = PureState(residual / np.linalg.norm(residual))

    theta = _arg(overlap)
    theta_perp = _arg(phi_perp.overlap(psi))

    phase = np.exp(1j * (theta_perp - theta + np.pi / 2.0))
    plus = (phi.amplitudes + phase * phi_perp.amplitudes) / np.sqrt(2.0)
    minus = (phi.amplitudes - phase * phi_perp.amplitudes) / np.sqrt(2.0)

    return ProductSpectrum(
        gamma=gamma,
        phi_perp=phi_perp,
        theta=theta,
        theta_perp=theta_perp,
        Phi_plus=plus,
        Phi_minus=minus,
        eigenphase_plus=float(np.pi - 2.0 * gamma),
        eigenphase_minus=float(np.pi + 2.0 * gamma),
    )

"""Pure and mixed state constructors plus the exact closeness oracles.

The exact trace distance and fidelity computed here are the ground truth that
every estimator in this package is judged against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionMismatchError, StateValidationError

NORM_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10

#: Largest qubit count accepted by the random-state generator by default.
DEFAULT_MAX_QUBITS = 3

#: PRNG behind every seeded draw in this package; recorded in run metadata.
PRNG_NAME = "numpy.random.PCG64"


def _qubit_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise StateValidationError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PureState:
    """Unit-norm amplitude vector over n qubits."""

    amplitudes: np.ndarray
    n_qubits: int = field(default=-1)

    def __post_init__(self):
        amps = linalg.as_cvec(self.amplitudes)
        n = _qubit_count(amps.shape[0])
        if self.n_qubits == -1:
            object.__setattr__(self, "n_qubits", n)
        elif self.n_qubits != n:
            raise StateValidationError(
                f"declared {self.n_qubits} qubits but amplitude length is {amps.shape[0]}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateValidationError(f"state norm {norm!r} is not 1 within {NORM_TOL:g}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        if self.dim != other.dim:
            raise DimensionMismatchError("states live on different qubit counts",
                                         expected=self.dim, got=other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> "DensityOp":
        return DensityOp(self.projector())

    def key(self) -> bytes:
        """Stable byte key for caching and calibration memoization."""
        return self.amplitudes.tobytes()


@dataclass(frozen=True)
class DensityOp:
    """Hermitian, PSD, trace-1 operator over n qubits."""

    matrix: np.ndarray
    n_qubits: int = field(default=-1)
    psd_tol: float = field(default=PSD_TOL, repr=False)
    trace_tol: float = field(default=TRACE_TOL, repr=False)

    def __post_init__(self):
        m = linalg.as_cmat(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise StateValidationError(f"density operator must be square, got {m.shape}")
        n = _qubit_count(m.shape[0])
        if self.n_qubits == -1:
            object.__setattr__(self, "n_qubits", n)
        elif self.n_qubits != n:
            raise StateValidationError(
                f"declared {self.n_qubits} qubits but matrix dimension is {m.shape[0]}"
            )
        if not linalg.is_hermitian(m):
            raise StateValidationError("density operator is not Hermitian within tolerance")
        m = linalg.hermitize(m)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > self.trace_tol:
            raise StateValidationError(f"trace {tr!r} is not 1 within {self.trace_tol:g}")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -self.psd_tol:
            raise StateValidationError(f"minimum eigenvalue {lo:g} below -{self.psd_tol:g}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _as_density_matrix(s) -> np.ndarray:
    if isinstance(s, PureState):
        return s.projector()
    if isinstance(s, DensityOp):
        return s.matrix
    return linalg.as_cmat(s)


def basis_state(n_qubits: int, index: int) -> PureState:
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(amps)


def zero_state(n_qubits: int = 1) -> PureState:
    return basis_state(n_qubits, 0)


def plus_state() -> PureState:
    return PureState(np.array([1.0, 1.0]) / np.sqrt(2.0))


def psi_x(x: float) -> PureState:
    """Single-qubit family sqrt(1-x^2)|0> + x|1> for x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise StateValidationError(f"x={x!r} outside [0, 1]")
    return PureState(np.array([np.sqrt(1.0 - x * x), x], dtype=np.complex128))


def haar_random(n_qubits: int, seed, max_qubits: int = DEFAULT_MAX_QUBITS) -> PureState:
    """Haar-random n-qubit pure state, deterministic for a fixed seed.

    Draws independent standard complex Gaussians from PCG64 and normalizes.
    """
    if not 1 <= n_qubits <= max_qubits:
        raise StateValidationError(
            f"n_qubits={n_qubits} outside [1, {max_qubits}]"
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = 2**n_qubits
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(z / np.linalg.norm(z))


def trace_distance_exact(a, b) -> float:
    """T(rho, sigma) = (1/2) ||rho - sigma||_tr."""
    ma, mb = _as_density_matrix(a), _as_density_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError("trace distance needs equal dims",
                                     expected=ma.shape, got=mb.shape)
    t = 0.5 * linalg.trace_norm(ma - mb)
    return float(min(max(t, 0.0), 1.0))


# Eigenvalues below this relative threshold are true zeros plus rounding fuzz;
# zeroing them before sqrt keeps projector square roots exact (sqrt of ~1e-16
# fuzz would otherwise pollute results at the 1e-8 scale).
_SQRT_TRUNCATION = 1e-13


def _sqrt_spectrum(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = linalg.herm_eig(m)
    if w.size and w.min() < -PSD_TOL:
        raise StateValidationError(f"matrix is not PSD: min eigenvalue {w.min():g}")
    w = np.clip(w, 0.0, None)
    w[w < _SQRT_TRUNCATION * (w.max() if w.size else 0.0)] = 0.0
    return np.sqrt(w), v


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    rw, v = _sqrt_spectrum(m)
    return (v * rw) @ v.conj().T


def fidelity_exact(a, b) -> float:
    """F(rho, sigma) = tr sqrt(sqrt(sigma) rho sqrt(sigma))."""
    ma, mb = _as_density_matrix(a), _as_density_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatchError("fidelity needs equal dims",
                                     expected=ma.shape, got=mb.shape)
    rb = _psd_sqrt(mb)
    rw, _ = _sqrt_spectrum(rb @ ma @ rb)
    f = float(rw.sum())
    return min(max(f, 0.0), 1.0)

"""Circuit IR with oracle placeholders, the phase-estimation builder, and
statevector / density-matrix execution backends.

Wire convention: wires are numbered 0..W-1 with wire 0 the most significant
bit of the global basis index (reading order of a ket). Ancillas occupy wires
0..t-1, the system register occupies wires t..t+n-1. Gates act on an ordered
wire tuple; the first listed wire is the most significant bit of the gate's
local index. Gate application contracts the local matrix into the state
tensor and never materializes the full-dimension embedded unitary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, UnboundOracleError
from .states import DensityOp, PureState

MAX_QFT_QUBITS = 12

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


@dataclass(frozen=True)
class ConcreteGate:
    """A fixed unitary on an ordered tuple of wires."""

    name: str
    wires: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        d = 2 ** len(self.wires)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (d, d):
            raise DimensionMismatchError(
                f"gate {self.name!r} on {len(self.wires)} wires needs a {d}x{d} matrix",
                expected=(d, d),
                got=m.shape,
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class OracleQuery:
    """A symbolic query to oracle ``index``, optionally controlled."""

    index: int
    controlled: bool
    control: Union[int, None]
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.controlled and self.control is None:
            raise ValueError("controlled query needs a control wire")
        if not self.controlled and self.control is not None:
            raise ValueError("uncontrolled query must not carry a control wire")


CircuitItem = Union[ConcreteGate, OracleQuery]


@dataclass(frozen=True)
class OracleCircuit:
    """Ordered gate/query list over t ancilla wires and n system wires.

    The leftmost item is applied first.
    """

    num_ancillas: int
    num_system: int
    items: tuple[CircuitItem, ...]

    def __post_init__(self):
        w = self.num_wires
        for item in self.items:
            wires = item.wires if isinstance(item, ConcreteGate) else (
                ((item.control,) if item.controlled else ()) + item.targets
            )
            if len(set(wires)) != len(wires) or any(not 0 <= x < w for x in wires):
                raise DimensionMismatchError(
                    f"item {item!r} touches invalid wires for a {w}-wire circuit"
                )

    @property
    def num_wires(self) -> int:
        return self.num_ancillas + self.num_system

    def query_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for item in self.items:
            if isinstance(item, OracleQuery):
                counts[item.index] = counts.get(item.index, 0) + 1
        return counts

    def oracle_indices(self) -> list[int]:
        return sorted(self.query_counts())

    def dump(self) -> str:
        """Line-oriented debug listing, one item per line."""
        lines = []
        for item in self.items:
            if isinstance(item, ConcreteGate):
                lines.append("GATE " + item.name + " " + " ".join(map(str, item.wires)))
            elif item.controlled:
                lines.append(
                    f"QUERY {item.index} C {item.control} "
                    + " ".join(map(str, item.targets))
                )
            else:
                lines.append(f"QUERY {item.index} U " + " ".join(map(str, item.targets)))
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class MeasurementOutcome:
    """Computational-basis outcome of the first t wires."""

    bits: tuple[int, ...]

    @property
    def gamma_tilde(self) -> float:
        return self.integer / 2 ** len(self.bits)

    @property
    def integer(self) -> int:
        m = 0
        for b in self.bits:
            m = (m << 1) | b
        return m


def qft(t: int) -> np.ndarray:
    """Fourier transform |j> -> 2^{-t/2} sum_k exp(i 2 pi j k / 2^t) |k>."""
    if not 1 <= t <= MAX_QFT_QUBITS:
        raise ValueError(f"t={t} outside [1, {MAX_QFT_QUBITS}]")
    d = 2**t
    jk = np.outer(np.arange(d), np.arange(d))
    return np.exp(2j * np.pi * jk / d) / np.sqrt(d)


def qft_inv(t: int) -> np.ndarray:
    return qft(t).conj().T


def _bit_reversal(t: int) -> np.ndarray:
    """Permutation |i> -> |reverse of i's t-bit pattern>."""
    d = 2**t
    p = np.zeros((d, d), dtype=np.complex128)
    for i in range(d):
        r = int(f"{i:0{t}b}"[::-1], 2)
        p[r, i] = 1.0
    return p


def qpe_circuit(t: int, k: int = 2, n_system: int = 1) -> OracleCircuit:
    """Phase-estimation circuit for a product of k oracles.

    Ancilla j controls the 2^j-th power block, expanded into 2^j repeated
    controlled-query groups so query counts reflect the query model; each
    group queries oracle k down to oracle 1 (the operator product applies the
    last factor first). Final readout gate is the inverse Fourier transform
    with the ancilla bit reversal folded in, so the measured integer's most
    significant bit lands on wire 0.
    """
    if t < 1:
        raise ValueError(f"t={t} must be >= 1")
    targets = tuple(range(t, t + n_system))
    items: list[CircuitItem] = [
        ConcreteGate("h", (a,), _HADAMARD) for a in range(t)
    ]
    for j in range(t):
        for _ in range(2**j):
            for oracle in range(k, 0, -1):
                items.append(
                    OracleQuery(index=oracle, controlled=True, control=j, targets=targets)
                )
    readout = qft_inv(t) @ _bit_reversal(t)
    items.append(ConcreteGate("iqft", tuple(range(t)), readout))
    return OracleCircuit(num_ancillas=t, num_system=n_system, items=tuple(items))


# ---------------------------------------------------------------------------
# structured application of local operators to state tensors
# ---------------------------------------------------------------------------

def _apply_matrix(arr: np.ndarray, mat: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a 2^w x 2^w matrix into the listed tensor axes of ``arr``."""
    w = len(axes)
    mt = mat.reshape([2] * (2 * w))
    out = np.tensordot(mt, arr, axes=(list(range(w, 2 * w)), list(axes)))
    return np.moveaxis(out, list(range(w)), list(axes))


def _apply_unitary_vec(psi_t: np.ndarray, u: np.ndarray, wires: Sequence[int]) -> np.ndarray:
    return _apply_matrix(psi_t, u, wires)


def _apply_unitary_dm(rho_t: np.ndarray, u: np.ndarray, wires: Sequence[int], w_total: int) -> np.ndarray:
    out = _apply_matrix(rho_t, u, wires)
    return _apply_matrix(out, u.conj(), [w_total + x for x in wires])


def _apply_superop_dm(rho_t: np.ndarray, sop: np.ndarray, wires: Sequence[int], w_total: int) -> np.ndarray:
    """Apply a local superoperator (row-major pair indexing) to a density tensor."""
    w = len(wires)
    st = sop.reshape([2] * (4 * w))
    in_axes = list(wires) + [w_total + x for x in wires]
    out = np.tensordot(st, rho_t, axes=(list(range(2 * w, 4 * w)), in_axes))
    return np.moveaxis(out, list(range(2 * w)), in_axes)


def controlled_unitary(u: np.ndarray) -> np.ndarray:
    """|0><0| (x) I + |1><1| (x) U with the control as the leading wire."""
    d = u.shape[0]
    out = np.eye(2 * d, dtype=np.complex128)
    out[d:, d:] = u
    return out


def _check_bindings(circuit: OracleCircuit, bindings: Mapping[int, object]):
    for idx in circuit.oracle_indices():
        if idx not in bindings:
            raise UnboundOracleError(idx)


def run_pure(circuit: OracleCircuit, bindings: Mapping[int, np.ndarray], state: PureState) -> PureState:
    """Execute with unitary oracle bindings on a statevector."""
    _check_bindings(circuit, bindings)
    w = circuit.num_wires
    if state.dim != 2**w:
        raise DimensionMismatchError(
            f"input state has dim {state.dim}, circuit needs {2**w}"
        )
    d_sys = 2**circuit.num_system
    cgate_cache: dict[int, np.ndarray] = {}
    psi = state.amplitudes.reshape([2] * w)
    for item in circuit.items:
        if isinstance(item, ConcreteGate):
            psi = _apply_unitary_vec(psi, item.matrix, item.wires)
            continue
        u = np.asarray(bindings[item.index], dtype=np.complex128)
        if u.shape != (d_sys, d_sys):
            raise DimensionMismatchError(
                f"binding for oracle {item.index} has shape {u.shape}, "
                f"expected {(d_sys, d_sys)}"
            )
        if item.controlled:
            cu = cgate_cache.get(item.index)
            if cu is None:
                cu = cgate_cache.setdefault(item.index, controlled_unitary(u))
            psi = _apply_unitary_vec(psi, cu, (item.control,) + item.targets)
        else:
            psi = _apply_unitary_vec(psi, u, item.targets)
    flat = psi.reshape(-1)
    norm = np.linalg.norm(flat)
    if abs(norm - 1.0) > 1e-10:
        raise DimensionMismatchError(f"norm drifted to {norm!r} during execution")
    return PureState(flat / norm)


def run_density(circuit: OracleCircuit, bindings: Mapping[int, "Channel"], rho: DensityOp) -> DensityOp:
    """Execute with channel oracle bindings on a density matrix.

    A binding's dimension must match the query form it serves: 2^n for plain
    queries on the system register, 2^(n+1) for controlled queries (control
    wire leading).
    """
    _check_bindings(circuit, bindings)
    w = circuit.num_wires
    if rho.dim != 2**w:
        raise DimensionMismatchError(f"input has dim {rho.dim}, circuit needs {2**w}")
    m = rho.matrix.reshape([2] * (2 * w))
    for item in circuit.items:
        if isinstance(item, ConcreteGate):
            m = _apply_unitary_dm(m, item.matrix, item.wires, w)
            continue
        chan = bindings[item.index]
        wires = ((item.control,) if item.controlled else ()) + item.targets
        if chan.dim != 2 ** len(wires):
            raise DimensionMismatchError(
                f"channel bound to oracle {item.index} has dim {chan.dim}, "
                f"query needs {2 ** len(wires)}"
            )
        m = _apply_superop_dm(m, chan.superoperator, wires, w)
    d = 2**w
    out = m.reshape(d, d)
    out = (out + out.conj().T) / 2
    # Loosened tolerances: long channel compositions drift more than fresh states.
    return DensityOp(out, psd_tol=1e-8, trace_tol=1e-9)


def prefix_distribution(state: Union[PureState, DensityOp], t: int) -> np.ndarray:
    """Exact marginal over the first t wires in the computational basis."""
    if isinstance(state, PureState):
        w = state.n_qubits
        if t > w:
            raise DimensionMismatchError(f"t={t} exceeds wire count {w}")
        probs = np.abs(state.amplitudes.reshape(2**t, -1)) ** 2
        return probs.sum(axis=1)
    w = state.n_qubits
    if t > w:
        raise DimensionMismatchError(f"t={t} exceeds wire count {w}")
    diag = np.diag(state.matrix).real
    return diag.reshape(2**t, -1).sum(axis=1)


def measure_prefix(state: Union[PureState, DensityOp], t: int, rng: np.random.Generator) -> MeasurementOutcome:
    """Sample the first t wires from their exact marginal distribution."""
    probs = np.clip(prefix_distribution(state, t), 0.0, None)
    probs = probs / probs.sum()
    m = int(rng.choice(probs.shape[0], p=probs))
    bits = tuple((m >> (t - 1 - i)) & 1 for i in range(t))
    return MeasurementOutcome(bits=bits)

"""Reflection-by-sampling machinery: the partial-swap channel built from
fresh state copies, its calibration, and the circuit transform that replaces
every oracle query by that channel while metering consumed copies.

Channels are represented by superoperators acting on row-major vectorized
density matrices, always on the local (control + system) space of a single
query. A round of the copy protocol is one fixed linear map, so the r-round
channel is the r-th power of the one-round superoperator; the ledger still
counts r fresh copies per query because that is what the physical protocol
consumes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .circuits import OracleCircuit, controlled_unitary, run_density
from .errors import (
    DimensionMismatchError,
    RoundsCapExceededError,
    SamplizeError,
    UnboundOracleError,
)
from .reflections import householder
from .states import DensityOp, PureState

DEFAULT_ROUNDS_CAP = 2**20


@dataclass(frozen=True)
class Channel:
    """Completely positive trace-preserving map in superoperator form."""

    superoperator: np.ndarray
    dim: int
    label: str = ""
    kraus: Optional[tuple[np.ndarray, ...]] = None

    def __post_init__(self):
        s = np.asarray(self.superoperator, dtype=np.complex128)
        d2 = self.dim * self.dim
        if s.shape != (d2, d2):
            raise DimensionMismatchError(
                f"superoperator shape {s.shape} does not match dim {self.dim}",
                expected=(d2, d2),
                got=s.shape,
            )
        s.flags.writeable = False
        object.__setattr__(self, "superoperator", s)

    @classmethod
    def from_unitary(cls, u: np.ndarray, label: str = "") -> "Channel":
        u = linalg.as_cmat(u)
        return cls(
            superoperator=np.kron(u, u.conj()),
            dim=u.shape[0],
            label=label,
            kraus=(u,),
        )

    @classmethod
    def from_kraus(cls, kraus, dim: int, label: str = "") -> "Channel":
        ops = tuple(linalg.as_cmat(k) for k in kraus)
        sop = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
        for k in ops:
            sop += np.kron(k, k.conj())
        return cls(superoperator=sop, dim=dim, label=label, kraus=ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = linalg.as_cmat(rho)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"state shape {rho.shape} does not match channel dim {self.dim}"
            )
        return (self.superoperator @ rho.reshape(-1)).reshape(self.dim, self.dim)

    def choi(self) -> np.ndarray:
        """Normalized Choi state: the channel applied to half a maximally
        entangled pair."""
        d = self.dim
        s4 = self.superoperator.reshape(d, d, d, d)
        return s4.transpose(0, 2, 1, 3).reshape(d * d, d * d) / d

    def trace_preservation_defect(self) -> float:
        d = self.dim
        s4 = self.superoperator.reshape(d, d, d, d)
        return float(np.abs(np.einsum("aarc->rc", s4) - np.eye(d)).max())

    def kraus_operators(self, tol: float = 1e-12) -> list[np.ndarray]:
        """Kraus decomposition recovered from the Choi eigensystem."""
        d = self.dim
        w, v = linalg.herm_eig(self.choi())
        ops = []
        for lam, vec in zip(w, v.T):
            if lam > tol:
                ops.append(np.sqrt(lam * d) * vec.reshape(d, d))
        return ops


@dataclass(frozen=True)
class LmrConfig:
    """Round count for the copy protocol; the step angle is pi/rounds so the
    total evolution time is always pi."""

    rounds: int
    controlled: bool = False

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")

    @property
    def delta_step(self) -> float:
        return math.pi / self.rounds


@dataclass
class SampleLedger:
    """Per-oracle counters of consumed input-state copies."""

    counts: dict[int, int] = field(default_factory=dict)
    input_copies: int = 0

    def add(self, index: int, n: int):
        if n < 0:
            raise ValueError("ledger counters are monotone")
        self.counts[index] = self.counts.get(index, 0) + n

    def count(self, index: int) -> int:
        return self.counts.get(index, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.input_copies

    def to_json(self) -> dict:
        out = {f"S{j}": self.counts[j] for j in sorted(self.counts)}
        out["input_copies"] = self.input_copies
        return out


def swap_operator(n_qubits: int = 1) -> np.ndarray:
    """SWAP of two n-qubit registers."""
    q = 2**n_qubits
    s = np.zeros((q * q, q * q), dtype=np.complex128)
    for i in range(q):
        for j in range(q):
            s[j * q + i, i * q + j] = 1.0
    return s


def partial_swap(delta: float, n_qubits: int = 1) -> np.ndarray:
    """exp(-i S delta) = cos(delta) I - i sin(delta) S, S the two-register SWAP.

    Closed form from S^2 = I; no general matrix exponential involved.
    """
    q2 = 4**n_qubits
    return math.cos(delta) * np.eye(q2, dtype=np.complex128) - 1j * math.sin(
        delta
    ) * swap_operator(n_qubits)


def controlled_partial_swap(delta: float, n_qubits: int = 1) -> np.ndarray:
    """I on the control-off branch, exp(-i S delta) on the control-on branch."""
    return controlled_unitary(partial_swap(delta, n_qubits))


def _round_superoperator(psi: PureState, delta: float, controlled: bool) -> np.ndarray:
    """One protocol round on the local space: adjoin a fresh copy of psi,
    apply the (controlled) partial swap against it, trace the copy out."""
    n = psi.n_qubits
    copy_dim = 2**n
    if controlled:
        v = controlled_partial_swap(delta, n)
        d_loc = 2 ** (n + 1)
    else:
        v = partial_swap(delta, n)
        d_loc = 2**n
    # K_alpha[a, r] = <alpha| V |psi?> on the copy slot: contracting the fresh
    # copy's ket with psi and its bra with the traced-out basis gives the
    # Kraus family of the round.
    vt = v.reshape(d_loc, copy_dim, d_loc, copy_dim)
    k_ops = np.tensordot(vt, psi.amplitudes, axes=([3], [0]))  # (a, alpha, r)
    k_ops = np.moveaxis(k_ops, 1, 0)  # (alpha, a, r)
    sop = np.einsum("xar,xbc->abrc", k_ops, k_ops.conj())
    return sop.reshape(d_loc * d_loc, d_loc * d_loc)


def _project_trace_preserving(sop: np.ndarray, d: int) -> np.ndarray:
    """Minimal correction restoring the trace-preservation identity exactly.

    Powering a superoperator tens of thousands of times leaves ~1e-11 float
    drift; the physical map is exactly trace preserving, so the drift is pure
    rounding error and is removed here.
    """
    s4 = sop.reshape(d, d, d, d)
    defect = np.eye(d) - np.einsum("aarc->rc", s4)
    s4 = s4 + np.einsum("ab,rc->abrc", np.eye(d) / d, defect)
    return s4.reshape(d * d, d * d)


def lmr_channel(psi: PureState, cfg: LmrConfig) -> tuple[Channel, int]:
    """Channel approximating the (controlled) reflection about psi using
    cfg.rounds fresh copies; returns the channel and the copies consumed."""
    m = _round_superoperator(psi, cfg.delta_step, cfg.controlled)
    composed = np.linalg.matrix_power(m, cfg.rounds)
    d_loc = 2 ** (psi.n_qubits + 1) if cfg.controlled else 2**psi.n_qubits
    composed = _project_trace_preserving(composed, d_loc)
    label = f"lmr(r={cfg.rounds}, controlled={cfg.controlled})"
    return Channel(superoperator=composed, dim=d_loc, label=label), cfg.rounds


def reflection_channel(psi: PureState, controlled: bool = False) -> Channel:
    """Exact unitary channel of the (controlled) reflection about psi."""
    r = householder(psi).matrix
    u = controlled_unitary(r) if controlled else r
    return Channel.from_unitary(u, label=f"reflection(controlled={controlled})")


def choi_distance(a: Channel, b: Channel) -> float:
    """Half the trace norm of the Choi-state difference.

    Computable proxy for the diamond distance: for channels on dimension d,
    choi_distance <= (1/2)||a - b||_diamond <= d * choi_distance.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"channel dims differ: {a.dim} vs {b.dim}", expected=a.dim, got=b.dim
        )
    return 0.5 * linalg.trace_norm(a.choi() - b.choi())


class CalibrationCache:
    """Memo of calibrated round counts keyed by (state, controlled, delta).

    Values are deterministic functions of the key, so concurrent insertion is
    idempotent and needs no locking.
    """

    def __init__(self):
        self._memo: dict[tuple[bytes, bool, float], int] = {}

    def get(self, key):
        return self._memo.get(key)

    def put(self, key, rounds: int):
        self._memo[key] = rounds

    def __len__(self):
        return len(self._memo)

    def dump_json(self) -> str:
        entries = [
            {
                "state_hash": hashlib.sha256(k[0]).hexdigest(),
                "controlled": k[1],
                "delta": k[2],
                "rounds": r,
            }
            for k, r in sorted(self._memo.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2]))
        ]
        return json.dumps(entries, indent=2)


_GLOBAL_CACHE = CalibrationCache()


def calibrate_rounds(
    psi: PureState,
    delta: float,
    controlled: bool = False,
    cap: int = DEFAULT_ROUNDS_CAP,
    cache: Optional[CalibrationCache] = None,
) -> LmrConfig:
    """Smallest power-of-two round count whose channel is within delta/2 of
    the exact (controlled) reflection in Choi distance."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta={delta!r} outside (0, 1]")
    cache = _GLOBAL_CACHE if cache is None else cache
    key = (psi.key(), controlled, float(delta))
    hit = cache.get(key)
    if hit is not None:
        return LmrConfig(rounds=hit, controlled=controlled)
    target = reflection_channel(psi, controlled)
    r = 1
    while r <= cap:
        approx, _ = lmr_channel(psi, LmrConfig(rounds=r, controlled=controlled))
        if choi_distance(approx, target) <= delta / 2.0:
            cache.put(key, r)
            return LmrConfig(rounds=r, controlled=controlled)
        r *= 2
    raise RoundsCapExceededError(delta, cap)


@dataclass(frozen=True)
class BoundCircuit:
    """A circuit whose oracle queries are bound to copy-built channels."""

    circuit: OracleCircuit
    channels: dict[int, Channel]
    rounds_per_query: dict[int, int]

    def run(self, rho: DensityOp) -> DensityOp:
        return run_density(self.circuit, self.channels, rho)


def samplize(
    circuit: OracleCircuit,
    states: list[PureState],
    delta: float,
    cap: int = DEFAULT_ROUNDS_CAP,
    cache: Optional[CalibrationCache] = None,
) -> tuple[BoundCircuit, SampleLedger]:
    """Replace every oracle query by the copy-protocol channel for its state.

    Each query gets a per-query error budget of delta / (total query count),
    the round count is calibrated to that budget, and the ledger records
    rounds x queries consumed copies per oracle.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta={delta!r} outside (0, 1)")
    counts = circuit.query_counts()
    for j in counts:
        if not 1 <= j <= len(states):
            raise UnboundOracleError(j)
    ledger = SampleLedger(counts={j + 1: 0 for j in range(len(states))})
    total_queries = sum(counts.values())
    if total_queries == 0:
        return BoundCircuit(circuit=circuit, channels={}, rounds_per_query={}), ledger

    flags: dict[int, bool] = {}
    for item in circuit.items:
        if hasattr(item, "index"):
            prev = flags.setdefault(item.index, item.controlled)
            if prev != item.controlled:
                raise SamplizeError(
                    f"oracle {item.index} is queried both controlled and "
                    "uncontrolled; bind channels per form instead"
                )

    per_query_delta = delta / total_queries
    channels: dict[int, Channel] = {}
    rounds: dict[int, int] = {}
    for j, qj in sorted(counts.items()):
        psi = states[j - 1]
        if psi.n_qubits != circuit.num_system:
            raise DimensionMismatchError(
                f"state for oracle {j} has {psi.n_qubits} qubits, "
                f"circuit system has {circuit.num_system}"
            )
        cfg = calibrate_rounds(psi, per_query_delta, flags[j], cap=cap, cache=cache)
        channels[j], _ = lmr_channel(psi, cfg)
        rounds[j] = cfg.rounds
        ledger.add(j, cfg.rounds * qj)
    return BoundCircuit(circuit=circuit, channels=channels, rounds_per_query=rounds), ledger

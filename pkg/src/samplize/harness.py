"""Experiment runner: seeded Monte-Carlo sweeps over the estimators, CSV
emission, and log-log scaling fits of the measured sample ledgers.

Reproducibility contract: a config fully determines every random draw.
Per-trial seeds are derived from (base_seed, epsilon index, trial index), so
results are independent of worker count and scheduling; rows are emitted
sorted. Measured wall time is the one non-deterministic column, which golden
comparisons strip (see ``csv_body``).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, InsufficientDataError, SamplizeError
from .estimators import (
    FOLKLORE_CONSTANT,
    SAMPLIZED_EPSILON_FLOOR,
    ancilla_count,
    folklore_estimate,
    query_estimate,
    samplized_estimate,
)
from .samplizer import DEFAULT_ROUNDS_CAP
from .states import (
    PRNG_NAME,
    PureState,
    fidelity_exact,
    haar_random,
    psi_x,
    trace_distance_exact,
)

METHODS = ("folklore", "query", "samplized")

WORKERS_ENV_VAR = "SAMPLIZE_SIM_THREADS"

#: Desk-scale guardrails: density-matrix cost grows as 4^(t+n).
MAX_SYSTEM_QUBITS = 3
MAX_READOUT_QUBITS = 10
MAX_DENSITY_BYTES = 2**27

CSV_COLUMNS = [
    "method",
    "x",
    "epsilon",
    "seed",
    "t",
    "rounds_per_query",
    "T_true",
    "F_true",
    "T_hat",
    "F_hat",
    "err_T",
    "err_F",
    "success",
    "samples_phi",
    "samples_psi",
    "samples_total",
    "wall_ms",
]


@dataclass(frozen=True)
class PairSpec:
    """Which two states an experiment runs on.

    kinds: ``psi_x`` (|0> against sqrt(1-x^2)|0> + x|1>), ``haar`` (two
    independent seeded random states), ``explicit`` (amplitudes given as
    [re, im] pairs).
    """

    kind: str
    x: Optional[float] = None
    n_qubits: int = 1
    seed: Optional[int] = None
    phi_amplitudes: Optional[tuple] = None
    psi_amplitudes: Optional[tuple] = None

    def realize(self) -> tuple[PureState, PureState]:
        if self.kind == "psi_x":
            if self.x is None:
                raise ConfigError("pair.kind = 'psi_x' needs pair.x")
            return psi_x(0.0), psi_x(self.x)
        if self.kind == "haar":
            if self.seed is None:
                raise ConfigError("pair.kind = 'haar' needs pair.seed")
            if not 1 <= self.n_qubits <= MAX_SYSTEM_QUBITS:
                raise ConfigError(
                    f"pair.n_qubits={self.n_qubits} outside [1, {MAX_SYSTEM_QUBITS}]"
                )
            rng_phi = np.random.default_rng(np.random.SeedSequence([int(self.seed), 0]))
            rng_psi = np.random.default_rng(np.random.SeedSequence([int(self.seed), 1]))
            return (
                haar_random(self.n_qubits, rng_phi),
                haar_random(self.n_qubits, rng_psi),
            )
        if self.kind == "explicit":
            if self.phi_amplitudes is None or self.psi_amplitudes is None:
                raise ConfigError("pair.kind = 'explicit' needs phi and psi amplitudes")
            return _state_from_pairs(self.phi_amplitudes), _state_from_pairs(self.psi_amplitudes)
        raise ConfigError(f"unknown pair.kind {self.kind!r}")

    @property
    def x_column(self) -> str:
        """Value for the CSV 'x' column: the family parameter or pair seed."""
        if self.kind == "psi_x":
            return repr(float(self.x))
        if self.kind == "haar":
            return str(int(self.seed))
        return ""

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.x is not None:
            out["x"] = self.x
        if self.kind == "haar":
            out["n_qubits"] = self.n_qubits
            out["seed"] = self.seed
        if self.phi_amplitudes is not None:
            out["phi"] = [list(p) for p in self.phi_amplitudes]
            out["psi"] = [list(p) for p in self.psi_amplitudes]
        return out


def _state_from_pairs(pairs) -> PureState:
    try:
        amps = np.array([complex(re, im) for re, im in pairs])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"amplitudes must be [re, im] pairs: {exc}") from exc
    return PureState(amps)


def state_to_pairs(state: PureState) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in state.amplitudes]


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    pair: PairSpec
    epsilons: tuple[float, ...]
    trials: int
    base_seed: int
    workers: Optional[int] = None
    r_cap: int = DEFAULT_ROUNDS_CAP
    eps_fail: float = 0.1
    delta_samplize: float = 0.1
    c_f: float = FOLKLORE_CONSTANT
    epsilon_floor: float = SAMPLIZED_EPSILON_FLOOR

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.epsilons:
            raise ConfigError("epsilons must be a non-empty list")
        floor = self.epsilon_floor if self.method == "samplized" else 0.0
        for eps in self.epsilons:
            if not floor < eps < 1.0:
                raise ConfigError(
                    f"epsilon={eps} outside ({floor}, 1) for method {self.method}"
                )
        phi, _ = self.pair.realize()
        n = phi.n_qubits
        if n > MAX_SYSTEM_QUBITS:
            raise ConfigError(f"system qubits {n} above the cap {MAX_SYSTEM_QUBITS}")
        if self.method in ("query", "samplized"):
            for eps in self.epsilons:
                try:
                    t = ancilla_count(self.eps_fail, eps / math.pi)
                except SamplizeError as exc:
                    raise ConfigError(
                        f"epsilon={eps}: {exc} (harness cap is "
                        f"{MAX_READOUT_QUBITS} readout qubits)"
                    ) from exc
                if t > MAX_READOUT_QUBITS:
                    raise ConfigError(
                        f"epsilon={eps} needs t={t} readout qubits, above the cap "
                        f"{MAX_READOUT_QUBITS}"
                    )
                if self.method == "samplized":
                    nbytes = 16 * 4 ** (t + n)
                    if nbytes > MAX_DENSITY_BYTES:
                        raise ConfigError(
                            f"epsilon={eps} with n={n} needs a {2**(t + n)}-dim "
                            f"density matrix ({nbytes} bytes), above the "
                            f"{MAX_DENSITY_BYTES}-byte guardrail"
                        )

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "pair": self.pair.to_json(),
            "epsilons": list(self.epsilons),
            "trials": self.trials,
            "base_seed": self.base_seed,
            "r_cap": self.r_cap,
            "eps_fail": self.eps_fail,
            "delta_samplize": self.delta_samplize,
            "c_f": self.c_f,
        }


def _pair_from_dict(d: dict) -> PairSpec:
    if not isinstance(d, dict):
        raise ConfigError(f"pair must be a table, got {type(d).__name__}")
    known = {"kind", "x", "n_qubits", "seed", "phi", "psi"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown pair fields: {sorted(unknown)}")
    if "kind" not in d:
        raise ConfigError("pair.kind is required")
    return PairSpec(
        kind=d["kind"],
        x=d.get("x"),
        n_qubits=int(d.get("n_qubits", 1)),
        seed=d.get("seed"),
        phi_amplitudes=tuple(tuple(p) for p in d["phi"]) if "phi" in d else None,
        psi_amplitudes=tuple(tuple(p) for p in d["psi"]) if "psi" in d else None,
    )


def config_from_dict(d: dict) -> ExperimentConfig:
    known = {
        "method",
        "pair",
        "epsilons",
        "trials",
        "base_seed",
        "workers",
        "r_cap",
        "eps_fail",
        "delta_samplize",
        "c_f",
        "epsilon_floor",
    }
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    for req in ("method", "pair", "epsilons", "trials", "base_seed"):
        if req not in d:
            raise ConfigError(f"config field {req!r} is required")
    cfg = ExperimentConfig(
        method=d["method"],
        pair=_pair_from_dict(d["pair"]),
        epsilons=tuple(float(e) for e in d["epsilons"]),
        trials=int(d["trials"]),
        base_seed=int(d["base_seed"]),
        workers=int(d["workers"]) if d.get("workers") is not None else None,
        r_cap=int(d.get("r_cap", DEFAULT_ROUNDS_CAP)),
        eps_fail=float(d.get("eps_fail", 0.1)),
        delta_samplize=float(d.get("delta_samplize", 0.1)),
        c_f=float(d.get("c_f", FOLKLORE_CONSTANT)),
        epsilon_floor=float(d.get("epsilon_floor", SAMPLIZED_EPSILON_FLOOR)),
    )
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """Parse a config file: key = value with nested tables, or JSON."""
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8")
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    else:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


@dataclass(frozen=True)
class TrialRow:
    method: str
    x: str
    epsilon: float
    seed: int
    t: Optional[int]
    rounds_per_query: Optional[int]
    T_true: float
    F_true: float
    T_hat: float
    F_hat: float
    err_T: float
    err_F: float
    success: bool
    samples_phi: int
    samples_psi: int
    samples_total: int
    wall_ms: float

    def to_csv_fields(self) -> list[str]:
        def num(v):
            return repr(float(v))

        return [
            self.method,
            self.x,
            num(self.epsilon),
            str(self.seed),
            "" if self.t is None else str(self.t),
            "" if self.rounds_per_query is None else str(self.rounds_per_query),
            num(self.T_true),
            num(self.F_true),
            num(self.T_hat),
            num(self.F_hat),
            num(self.err_T),
            num(self.err_F),
            "true" if self.success else "false",
            str(self.samples_phi),
            str(self.samples_psi),
            str(self.samples_total),
            f"{self.wall_ms:.3f}",
        ]


def trial_seed(base_seed: int, eps_index: int, trial_index: int) -> int:
    """Fixed, position-derived seed mixing; independent of scheduling."""
    ss = np.random.SeedSequence([int(base_seed), int(eps_index), int(trial_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _run_one(cfg: ExperimentConfig, phi, psi, truth, eps_index, trial_index) -> TrialRow:
    epsilon = cfg.epsilons[eps_index]
    seed = trial_seed(cfg.base_seed, eps_index, trial_index)
    t0 = time.perf_counter()
    if cfg.method == "folklore":
        est = folklore_estimate(phi, psi, epsilon, seed, c_f=cfg.c_f)
    elif cfg.method == "query":
        est = query_estimate(phi, psi, cfg.eps_fail, epsilon, seed)
    else:
        est = samplized_estimate(
            phi,
            psi,
            epsilon,
            seed,
            eps_fail=cfg.eps_fail,
            delta_samplize=cfg.delta_samplize,
            epsilon_floor=cfg.epsilon_floor,
            rounds_cap=cfg.r_cap,
        )
    wall_ms = (time.perf_counter() - t0) * 1e3
    t_true, f_true = truth
    err_t = abs(est.T_hat - t_true)
    err_f = abs(est.F_hat - f_true)
    return TrialRow(
        method=cfg.method,
        x=cfg.pair.x_column,
        epsilon=epsilon,
        seed=seed,
        t=est.t,
        rounds_per_query=est.rounds_per_query,
        T_true=t_true,
        F_true=f_true,
        T_hat=est.T_hat,
        F_hat=est.F_hat,
        err_T=err_t,
        err_F=err_f,
        success=(err_t <= epsilon and err_f <= epsilon),
        samples_phi=est.ledger.count(1) + est.ledger.input_copies,
        samples_psi=est.ledger.count(2),
        samples_total=est.ledger.total,
        wall_ms=wall_ms,
    )


def resolve_workers(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV_VAR}={env!r} is not an integer") from exc
    return 1


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[TrialRow]:
    """One row per (epsilon, trial), deterministic given the config."""
    cfg.validate()
    phi, psi = cfg.pair.realize()
    truth = (trace_distance_exact(phi, psi), fidelity_exact(phi, psi))
    items = [
        (ei, ti) for ei in range(len(cfg.epsilons)) for ti in range(cfg.trials)
    ]
    n_workers = resolve_workers(workers if workers is not None else cfg.workers)
    if n_workers == 1:
        return [_run_one(cfg, phi, psi, truth, ei, ti) for ei, ti in items]
    # Executor.map yields results in submission order, which is already the
    # (epsilon index, trial index) emission order.
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(
            pool.map(lambda it: _run_one(cfg, phi, psi, truth, it[0], it[1]), items)
        )


@dataclass(frozen=True)
class ScalingFit:
    """OLS fit of log(median samples) against log(epsilon)."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


def fit_scaling(rows: Sequence[TrialRow], method: str) -> ScalingFit:
    """Least-squares exponent of the measured sample cost against epsilon."""
    per_eps: dict[float, list[int]] = {}
    for row in rows:
        if row.method == method:
            per_eps.setdefault(row.epsilon, []).append(row.samples_total)
    if len(per_eps) < 3:
        raise InsufficientDataError(
            f"need >= 3 distinct epsilon values for method {method!r}, got {len(per_eps)}"
        )
    points = tuple(
        (math.log(eps), math.log(float(np.median(samples))))
        for eps, samples in sorted(per_eps.items())
    )
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ScalingFit(
        slope=float(slope), intercept=float(intercept), r_squared=r2, points=points
    )


def write_csv(rows: Sequence[TrialRow], path: str, cfg: Optional[ExperimentConfig] = None):
    """Emit rows with a commented metadata header; body layout is stable."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# samplize {__version__}\n")
        fh.write(f"# timestamp: {datetime.now(timezone.utc).isoformat()}\n")
        fh.write(f"# prng: {PRNG_NAME}\n")
        if cfg is not None:
            fh.write("# config: " + json.dumps(cfg.to_json(), sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.to_csv_fields())


def read_csv(path: str) -> list[dict]:
    """Rows as dicts keyed by CSV_COLUMNS; metadata comments are skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("".join(lines)))
    return list(reader)


def rows_from_csv(path: str) -> list[TrialRow]:
    rows = []
    for d in read_csv(path):
        rows.append(
            TrialRow(
                method=d["method"],
                x=d["x"],
                epsilon=float(d["epsilon"]),
                seed=int(d["seed"]),
                t=int(d["t"]) if d["t"] else None,
                rounds_per_query=int(d["rounds_per_query"]) if d["rounds_per_query"] else None,
                T_true=float(d["T_true"]),
                F_true=float(d["F_true"]),
                T_hat=float(d["T_hat"]),
                F_hat=float(d["F_hat"]),
                err_T=float(d["err_T"]),
                err_F=float(d["err_F"]),
                success=d["success"] == "true",
                samples_phi=int(d["samples_phi"]),
                samples_psi=int(d["samples_psi"]),
                samples_total=int(d["samples_total"]),
                wall_ms=float(d["wall_ms"]),
            )
        )
    return rows


def csv_body(text: str) -> str:
    """Deterministic portion of a CSV dump: metadata comment lines and the
    measured wall_ms column are stripped before golden comparison."""
    out_lines = []
    for line in text.splitlines():
        if line.startswith("#") or not line:
            continue
        cells = next(csv.reader(io.StringIO(line)))
        out_lines.append(",".join(cells[:-1]))
    return "\n".join(out_lines) + "\n"

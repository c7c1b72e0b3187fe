"""Fixed-structure fidelity optimization and gate-count evidence reports.

Each two-qubit gate is ``exp(i sum_m p_m P_m)`` over the fifteen non-identity
two-qubit Pauli products, so a k-gate structure has 15k real parameters. The
objective ``1 - |tr(T^dag C)| / 8`` is minimized with L-BFGS-B using an exact
gradient (Frechet derivative of the matrix exponential through the
eigenbasis of each generator).
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize

from .circuit import Circuit, PairClass, StructureSignature, TwoQubitGate, circuit_unitary, merge_adjacent
from .gates import PAULIS
from .linalg import dagger, infidelity, require_unitary

log = logging.getLogger(__name__)

N_PARAMS = 15
K_MAX_GUARD = 6
NEGATIVE_THRESHOLD = 1e-3
POSITIVE_THRESHOLD = 1e-6

PAULI_BASIS = np.array(
    [np.kron(a, b) for a, b in itertools.product(PAULIS, PAULIS)][1:], dtype=complex
)
_PAULI_FLAT = PAULI_BASIS.reshape(N_PARAMS, 16)


class CostGuardError(ValueError):
    """Requested search exceeds the supported structure size."""


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 20
    max_iterations: int = 2000
    convergence_tol: float = 1e-12
    seed: int = 0
    gtol: float = 1e-10
    memory: int = 20
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.convergence_tol <= 0 or self.gtol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SearchResult:
    structure: StructureSignature
    best_infidelity: float
    best_circuit: Circuit
    per_restart: list[float]
    iterations_used: list[int]
    restart_kinds: list[str] = field(default_factory=list)
    trajectories: list[list[float]] = field(default_factory=list, repr=False)
    best_params: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.structure.k,
            "pairs": [p.value for p in self.structure.pairs],
            "best_infidelity": self.best_infidelity,
            "restarts": self.per_restart,
            "restart_kinds": self.restart_kinds,
            "iterations": self.iterations_used,
        }


@dataclass
class OptimalityReport:
    target: str
    k_max: int
    results: dict[int, list[SearchResult]]
    floors: dict[int, float]
    smallest_k: int | None
    verdict: str

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "k": self.k_max,
            "structures": [r.to_dict() for k in sorted(self.results) for r in self.results[k]],
            "floors": {str(k): v for k, v in sorted(self.floors.items())},
            "verdict": {
                "smallest_k": self.smallest_k,
                "text": self.verdict,
                "evidence": "empirical",
                "negative_threshold": NEGATIVE_THRESHOLD,
                "positive_threshold": POSITIVE_THRESHOLD,
            },
        }


def enumerate_structures(k: int) -> list[StructureSignature]:
    """All pair sequences of length k without two equal neighbours, in lexicographic order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pairs = (PairClass.AB, PairClass.AC, PairClass.BC)
    return [
        StructureSignature(seq)
        for seq in itertools.product(pairs, repeat=k)
        if all(a != b for a, b in zip(seq, seq[1:]))
    ]


# ---------------------------------------------------------------------------
# parameter chart


def _embedding_tables(pair: PairClass) -> tuple[np.ndarray, np.ndarray]:
    """Index of the 4x4 entry feeding each 8x8 entry, and the identity-on-spectator mask."""
    qa, qb = pair.qubits
    other = ({0, 1, 2} - {qa, qb}).pop()
    idx = np.zeros((8, 8), dtype=int)
    mask = np.zeros((8, 8))
    for r in range(8):
        rb = [(r >> (2 - q)) & 1 for q in range(3)]
        for s in range(8):
            sb = [(s >> (2 - q)) & 1 for q in range(3)]
            idx[r, s] = (2 * rb[qa] + rb[qb]) * 4 + 2 * sb[qa] + sb[qb]
            mask[r, s] = float(rb[other] == sb[other])
    return idx, mask


_TABLES = {p: _embedding_tables(p) for p in PairClass}


def _scatter_matrix(pair: PairClass) -> np.ndarray:
    idx, mask = _TABLES[pair]
    out = np.zeros((16, 64))
    out[idx.ravel(), np.arange(64)] = mask.ravel()
    return out


_SCATTER = {p: _scatter_matrix(p) for p in PairClass}


def gate_matrices(params: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gates ``exp(i H)`` for a (k, 15) parameter block; also returns eigen-data of H."""
    h = (params @ _PAULI_FLAT).reshape(-1, 4, 4)
    lam, q = np.linalg.eigh(h)
    g = (q * np.exp(1j * lam)[:, None, :]) @ np.conj(np.swapaxes(q, 1, 2))
    return g, lam, q


def params_for_gate(m: np.ndarray) -> np.ndarray:
    """Chart coordinates of a 4x4 unitary, up to global phase.

    The eigenphases are shifted to sum to zero so the generator is traceless.
    """
    m = require_unitary(m)
    t, z = scipy.linalg.schur(m, output="complex")
    phases = np.angle(np.diag(t))
    phases = phases - phases.sum() / 4
    h = z @ np.diag(phases) @ dagger(z)
    return np.real(np.einsum("mij,ji->m", PAULI_BASIS, h)) / 4


def params_for_circuit(c: Circuit) -> np.ndarray:
    return np.concatenate([params_for_gate(g.matrix) for g in c.gates])


def circuit_from_params(structure: StructureSignature, x: np.ndarray) -> Circuit:
    g, _, _ = gate_matrices(np.asarray(x, dtype=float).reshape(structure.k, N_PARAMS))
    return Circuit(tuple(TwoQubitGate(p, m) for p, m in zip(structure.pairs, g)))


class StructureObjective:
    """Infidelity of a fixed structure against a target, with exact gradient."""

    def __init__(self, target: np.ndarray, structure: StructureSignature):
        self.target_dag = dagger(np.asarray(target, dtype=complex))
        self.structure = structure
        self.k = structure.k
        self.idx = np.stack([_TABLES[p][0] for p in structure.pairs])
        self.mask = np.stack([_TABLES[p][1] for p in structure.pairs])
        self.scatter = np.stack([_SCATTER[p] for p in structure.pairs])

    def _embedded(self, g: np.ndarray) -> np.ndarray:
        flat = g.reshape(self.k, 16)
        return np.take_along_axis(flat, self.idx.reshape(self.k, 64), axis=1).reshape(self.k, 8, 8) * self.mask

    def value(self, x: np.ndarray) -> float:
        g, _, _ = gate_matrices(x.reshape(self.k, N_PARAMS))
        e = self._embedded(g)
        u = np.eye(8, dtype=complex)
        for j in range(self.k):
            u = e[j] @ u
        return 1.0 - abs(np.trace(self.target_dag @ u)) / 8

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        k = self.k
        g, lam, q = gate_matrices(x.reshape(k, N_PARAMS))
        e = self._embedded(g)
        # right[j] = E_{j-1} ... E_0, left[j] = E_{k-1} ... E_{j+1}
        right = np.empty((k + 1, 8, 8), dtype=complex)
        right[0] = np.eye(8)
        for j in range(k):
            right[j + 1] = e[j] @ right[j]
        left = np.empty((k + 1, 8, 8), dtype=complex)
        left[k] = np.eye(8)
        for j in range(k - 1, -1, -1):
            left[j] = left[j + 1] @ e[j]
        tau = np.trace(self.target_dag @ right[k])
        atau = abs(tau)
        f = 1.0 - atau / 8
        if atau < 1e-300:
            return f, np.zeros_like(x)

        # env[j] = right[j] T^dag left[j+1], so d tau = tr(env[j] dE_j)
        env = right[:k] @ self.target_dag @ left[1:]
        # fold env onto the gate's 4x4 indices: F[x, y] = sum over embedded (r, s) of env[s, r]
        fold = (self.scatter @ np.swapaxes(env, 1, 2).reshape(k, 64, 1)).reshape(k, 4, 4)

        # divided differences of exp(i lam)
        ex = np.exp(1j * lam)
        dl = lam[:, :, None] - lam[:, None, :]
        close = np.abs(dl) < 1e-10
        gamma = np.where(close, 1j * ex[:, :, None], (ex[:, :, None] - ex[:, None, :]) / np.where(close, 1.0, dl))
        qt = np.swapaxes(q, 1, 2)
        qc = np.conj(q)
        b = qc @ ((qt @ fold @ qc) * gamma) @ qt  # conj(Q) [(Q^T F conj(Q)) o gamma] Q^T
        dtau = b.reshape(k, 16) @ _PAULI_FLAT.T
        grad = -np.real(np.conj(tau) * dtau) * (1.0 / (8 * atau))
        return f, grad.ravel()


# ---------------------------------------------------------------------------
# optimization


def _restart_rng(seed: int, structure: StructureSignature, restart: int) -> np.random.Generator:
    codes = [list(PairClass).index(p) for p in structure.pairs]
    return np.random.default_rng([seed, len(codes), *codes, restart])


def _run_one(target: np.ndarray, structure: StructureSignature, x0: np.ndarray, cfg: SearchConfig):
    obj = StructureObjective(target, structure)
    trajectory = [float(obj.value(x0))]

    def record(intermediate_result):
        trajectory.append(float(intermediate_result.fun))
        if intermediate_result.fun < cfg.convergence_tol:
            raise StopIteration

    if trajectory[0] < cfg.convergence_tol:
        return x0, 0, trajectory
    res = minimize(
        obj.value_and_grad,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=record,
        options={
            "maxiter": cfg.max_iterations,
            "ftol": cfg.convergence_tol,
            "gtol": cfg.gtol,
            "maxcor": cfg.memory,
        },
    )
    return res.x, int(res.nit), trajectory


def _run_star(args):
    return _run_one(*args)


def optimize_structure(
    target,
    structure: StructureSignature,
    cfg: SearchConfig = SearchConfig(),
    seeds: list[tuple[str, np.ndarray]] | None = None,
) -> SearchResult:
    """Multi-start minimization of infidelity over one structure.

    ``cfg.restarts`` random starts are drawn uniformly from ``[-pi, pi]`` per
    coordinate, each from its own generator keyed by (seed, structure,
    restart index). ``seeds`` adds labelled starting points (e.g. a known
    construction) after the random ones.
    """
    target = require_unitary(target, 1e-9)
    if target.shape != (8, 8):
        raise ValueError("target must be 8x8")
    structure = StructureSignature(structure.pairs)
    n = structure.k * N_PARAMS
    starts: list[tuple[str, np.ndarray]] = []
    for r in range(cfg.restarts):
        rng = _restart_rng(cfg.seed, structure, r)
        starts.append(("random", rng.uniform(-np.pi, np.pi, n)))
    for kind, x0 in seeds or ():
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (n,):
            raise ValueError(f"seed {kind!r} has {x0.size} parameters, structure needs {n}")
        starts.append((kind, x0))

    jobs = [(target, structure, x0, cfg) for _, x0 in starts]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(_run_star, jobs))  # map preserves restart order
    else:
        runs = [_run_one(*job) for job in jobs]

    circuits = [circuit_from_params(structure, x) for x, _, _ in runs]
    finals = [infidelity(circuit_unitary(c), target) for c in circuits]
    best = int(np.argmin(finals))
    return SearchResult(
        structure=structure,
        best_infidelity=finals[best],
        best_circuit=circuits[best],
        per_restart=finals,
        iterations_used=[it for _, it, _ in runs],
        restart_kinds=[kind for kind, _ in starts],
        trajectories=[t for _, _, t in runs],
        best_params=runs[best][0],
    )


def optimality_evidence(
    target,
    k_max: int,
    cfg: SearchConfig = SearchConfig(),
    witnesses: list[Circuit] | None = None,
    target_name: str = "target",
) -> OptimalityReport:
    """Run every structure for k = 1..k_max and record the infidelity floor per k.

    Each (k+1)-structure also starts from the best point of its k-prefix with an
    identity gate appended, so floors cannot increase with k. Witness circuits
    whose merged pair sequence matches a structure are injected as restarts.
    """
    if k_max > K_MAX_GUARD:
        raise CostGuardError(f"k_max={k_max} exceeds the guard of {K_MAX_GUARD}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    target = require_unitary(target, 1e-9)
    merged_witnesses = [merge_adjacent(w) for w in witnesses or ()]

    results: dict[int, list[SearchResult]] = {}
    floors: dict[int, float] = {}
    best_by_structure: dict[tuple, np.ndarray] = {}
    for k in range(1, k_max + 1):
        results[k] = []
        for s in enumerate_structures(k):
            seeds = []
            prefix = s.pairs[:-1]
            if prefix in best_by_structure:
                seeds.append(("extension", np.concatenate([best_by_structure[prefix], np.zeros(N_PARAMS)])))
            for w in merged_witnesses:
                if w.signature.pairs == s.pairs:
                    seeds.append(("witness", params_for_circuit(w)))
            res = optimize_structure(target, s, cfg, seeds)
            best_by_structure[s.pairs] = res.best_params
            results[k].append(res)
            log.info("k=%d %s floor=%.3e", k, s, res.best_infidelity)
        floors[k] = min(r.best_infidelity for r in results[k])

    smallest = next((k for k in sorted(floors) if floors[k] < POSITIVE_THRESHOLD), None)
    lines = []
    for k in sorted(floors):
        tag = "reached" if floors[k] < POSITIVE_THRESHOLD else (
            "not reached" if floors[k] > NEGATIVE_THRESHOLD else "inconclusive"
        )
        lines.append(f"k={k}: floor {floors[k]:.3e} ({tag})")
    head = (
        f"empirical evidence only: smallest k with floor < {POSITIVE_THRESHOLD:g} is {smallest}"
        if smallest is not None
        else f"empirical evidence only: no k <= {k_max} reached floor < {POSITIVE_THRESHOLD:g}"
    )
    verdict = head + f"; floors > {NEGATIVE_THRESHOLD:g} count as not reached. " + "; ".join(lines)
    return OptimalityReport(target_name, k_max, results, floors, smallest, verdict)

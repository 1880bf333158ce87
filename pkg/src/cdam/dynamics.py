"""State-update engine for graph-correlated dense associative memory.

The network holds p continuous patterns (columns of an n x p matrix) and a
coupling matrix M over the pattern graph.  One update moves the state toward

    retrieval = (a*Xc + h*Xc*M^T) @ softmax(beta * Xi^T sigma)

at rate eta, i.e. sigma <- sigma + eta*(retrieval - sigma), where Xc is the
pattern matrix with the mean memory load subtracted from every column.  The
auto term (a) pulls toward the best-matching pattern, the hetero term (h)
toward that pattern's graph successors.

Centering the projection columns is what keeps the mean activity at zero
for a + h = 1 (on graphs whose coupling columns sum to one it equals an
uncentered projection minus the full mean-load vector), and it makes the
quiescent regime a < -k*h decay toward the zero state instead of parking
on a multiple of the mean pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractError,
    EnergyUndefinedError,
    NumericDivergenceError,
    UndefinedCorrelationError,
)
from .graphs import MemoryGraph, NormalizedAdjacency, normalize


@dataclass
class PatternMatrix:
    """Stored memories: column mu of `values` is pattern mu (n x p, finite)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ContractError(f"pattern matrix must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ContractError("pattern matrix contains non-finite values")
        v.flags.writeable = False
        self.values = v
        self._mean_load = v.mean(axis=1)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def mean_load(self) -> np.ndarray:
        """Average of all stored patterns (the global inhibitory bias vector)."""
        return self._mean_load


@dataclass(frozen=True)
class ModelParams:
    a: float = 1.0
    h: float = 0.0
    beta: float = 1.0
    eta: float = 0.1

    def __post_init__(self):
        if not self.beta > 0:
            raise ContractError(f"beta must be > 0, got {self.beta}")
        if not self.eta > 0:
            raise ContractError(f"eta must be > 0, got {self.eta}")


@dataclass
class NetworkState:
    sigma: np.ndarray
    t: int = 0

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.ndim != 1:
            raise ContractError(f"state must be a vector, got shape {self.sigma.shape}")


@dataclass
class SimulationTrace:
    """Per-step records of a run; row k describes the state at time k."""

    correlations: np.ndarray  # (steps+1, p) pearson r per pattern
    overlaps: np.ndarray  # (steps+1, p)
    mean_activity: np.ndarray  # (steps+1,)
    sd_activity: np.ndarray  # (steps+1,)
    energies: np.ndarray | None  # (steps+1,) when an energy graph was given
    final_state: NetworkState
    termination: str  # "max-steps" | "fixed-point"

    @property
    def steps(self) -> int:
        return len(self.mean_activity) - 1


def softmax_beta(z: np.ndarray, beta: float) -> np.ndarray:
    """Softmax of beta*z with max subtraction for overflow safety."""
    z = np.asarray(z, dtype=float)
    shifted = beta * z
    shifted = shifted - shifted.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def _check_dims(state_len: int, patterns: PatternMatrix, m: NormalizedAdjacency) -> None:
    if patterns.n != state_len:
        raise ContractError(f"state length {state_len} != neuron count {patterns.n}")
    if m.matrix.shape != (patterns.p, patterns.p):
        raise ContractError(
            f"coupling matrix is {m.matrix.shape}, patterns hold p={patterns.p}"
        )


def retrieval_vector(
    sigma: np.ndarray, patterns: PatternMatrix, m: NormalizedAdjacency, params: ModelParams
) -> np.ndarray:
    """(a*Xc + h*Xc*M^T) softmax(beta*Xi^T sigma); works on a single state
    vector or an (n, batch) stack of states.

    Softmax logits use the raw patterns (the centered ones would only shift
    every logit by the same constant); the projection uses centered columns.
    """
    xi = patterns.values
    s = softmax_beta(xi.T @ sigma, params.beta)
    mixed = params.a * s + params.h * (m.matrix.T @ s)
    # Xc @ mixed == Xi @ mixed - mean_load * sum(mixed), cheaper than
    # materializing the centered matrix.
    if mixed.ndim == 2:
        return xi @ mixed - patterns.mean_load[:, None] * mixed.sum(axis=0)[None, :]
    return xi @ mixed - patterns.mean_load * mixed.sum()


def update_step(
    state: NetworkState,
    patterns: PatternMatrix,
    m: NormalizedAdjacency,
    params: ModelParams,
) -> NetworkState:
    """One synchronous update; returns a fresh state, input untouched."""
    _check_dims(len(state.sigma), patterns, m)
    target = retrieval_vector(state.sigma, patterns, m, params)
    sigma = state.sigma + params.eta * (target - state.sigma)
    return NetworkState(sigma, state.t + 1)


def run(
    initial: NetworkState,
    patterns: PatternMatrix,
    m: NormalizedAdjacency,
    params: ModelParams,
    max_steps: int = 101,
    fixed_point_tol: float = 1e-9,
    energy_graph: MemoryGraph | None = None,
) -> SimulationTrace:
    """Iterate update_step until max_steps or an infinity-norm fixed point.

    The trace includes the t=0 record, so it has steps+1 rows.  A non-finite
    state aborts with NumericDivergenceError naming the offending step.
    """
    if max_steps < 1:
        raise ContractError(f"max_steps must be >= 1, got {max_steps}")
    _check_dims(len(initial.sigma), patterns, m)

    corr, ovl, means, sds, energies = [], [], [], [], []

    def record(state: NetworkState) -> None:
        corr.append(pearson_all(state, patterns))
        ovl.append(overlaps_all(state, patterns))
        means.append(float(state.sigma.mean()))
        sds.append(float(state.sigma.std()))
        if energy_graph is not None:
            energies.append(energy(state, patterns, energy_graph, params))

    state = initial
    record(state)
    termination = "max-steps"
    for _ in range(max_steps):
        new = update_step(state, patterns, m, params)
        if not np.all(np.isfinite(new.sigma)):
            raise NumericDivergenceError(new.t)
        delta = float(np.max(np.abs(new.sigma - state.sigma)))
        state = new
        record(state)
        if delta < fixed_point_tol:
            termination = "fixed-point"
            break

    return SimulationTrace(
        correlations=np.array(corr),
        overlaps=np.array(ovl),
        mean_activity=np.array(means),
        sd_activity=np.array(sds),
        energies=np.array(energies) if energy_graph is not None else None,
        final_state=state,
        termination=termination,
    )


def overlap(state: NetworkState, mu: int, patterns: PatternMatrix) -> float:
    """m^mu = sigma . xi^mu / n."""
    if not 0 <= mu < patterns.p:
        raise ContractError(f"pattern index {mu} out of range [0,{patterns.p})")
    return float(state.sigma @ patterns.values[:, mu]) / patterns.n


def overlaps_all(state: NetworkState, patterns: PatternMatrix) -> np.ndarray:
    return (patterns.values.T @ state.sigma) / patterns.n


def pearson(state: NetworkState, mu: int, patterns: PatternMatrix) -> float:
    """Pearson r between the state and pattern mu; zero variance is an error."""
    if not 0 <= mu < patterns.p:
        raise ContractError(f"pattern index {mu} out of range [0,{patterns.p})")
    x = state.sigma
    y = patterns.values[:, mu]
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise UndefinedCorrelationError(
            "pearson undefined: zero-variance state or pattern"
        )
    return float(xc @ yc) / denom


def pearson_all(state: NetworkState, patterns: PatternMatrix) -> np.ndarray:
    """Pearson r against every pattern at once (same zero-variance contract)."""
    x = state.sigma - state.sigma.mean()
    xs = math.sqrt(float(x @ x))
    yc = patterns.values - patterns.values.mean(axis=0, keepdims=True)
    ys = np.sqrt((yc**2).sum(axis=0))
    if xs == 0.0 or np.any(ys == 0.0):
        raise UndefinedCorrelationError(
            "pearson undefined: zero-variance state or pattern"
        )
    return (yc.T @ x) / (xs * ys)


def energy(
    state: NetworkState,
    patterns: PatternMatrix,
    graph: MemoryGraph,
    params: ModelParams,
) -> float:
    """Log-sum-exp energy of the current state over the memory graph.

    Undirected graphs use the coupling-weighted double sum
        -(a/b)*log sum_mu exp(b*m_mu^2) - (h/b)*log sum_{a,k} M_ak exp(b*m_a*m_k)
    with the hetero term omitted when the graph has no edges.  Directed graphs
    use the single-log form
        -(1/b)*log(a*sum_mu exp(b*m_mu^2) + h*sum_edges w*exp(b*m_a*m_k))
    and raise if the log argument is not positive.
    """
    if graph.p != patterns.p:
        raise ContractError(f"graph has p={graph.p}, patterns hold p={patterns.p}")
    b = params.beta
    m = overlaps_all(state, patterns)
    auto_sum = float(np.sum(np.exp(b * m * m)))
    if graph.directed:
        hetero_sum = 0.0
        for src, dst, w in graph.edges:
            hetero_sum += w * math.exp(b * m[src] * m[dst])
        arg = params.a * auto_sum + params.h * hetero_sum
        if arg <= 0.0:
            raise EnergyUndefinedError(f"directed energy log argument {arg} <= 0")
        return -math.log(arg) / b
    coupling = normalize(graph).matrix
    total = -(params.a / b) * math.log(auto_sum)
    if graph.edges:
        hetero_sum = float(np.sum(coupling * np.exp(b * np.outer(m, m))))
        if hetero_sum <= 0.0:
            # possible only with negative edge weights
            raise EnergyUndefinedError(f"undirected hetero log argument {hetero_sum} <= 0")
        total += -(params.h / b) * math.log(hetero_sum)
    return total


def init_state(
    patterns: PatternMatrix, trigger: int, c: float = 1.0, seed: int = 0
) -> NetworkState:
    """sigma(0) = xi^trigger + c*zeta with zeta uniform on [-0.5, 0.5]."""
    if not 0 <= trigger < patterns.p:
        raise ContractError(f"trigger index {trigger} out of range [0,{patterns.p})")
    if c < 0:
        raise ContractError(f"noise amplitude must be >= 0, got {c}")
    rng = np.random.default_rng(seed)
    zeta = rng.uniform(-0.5, 0.5, patterns.n)
    return NetworkState(patterns.values[:, trigger] + c * zeta, t=0)

"""Sparse stochastic block model sampling with planted labels.

Edges are drawn as independent per-pair Bernoulli variables with rate a/n
inside blocks and b/n between blocks (assortative: b <= a).  The sample is
reduced to the 2-core of its largest connected component, with planted labels
carried through the relabeling.  Model-level predictions (average degree c,
structural eigenvalue magnitudes, signal-to-noise ratio) come with it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameterError, EmptyCoreError
from .graph import SimpleGraph, connected_components, from_edge_list, two_core


@dataclass(frozen=True)
class SbmParams:
    """Model parameters: within-rate a/n, between-rate b/n, k blocks."""

    n: int
    k: int
    a: float
    b: float
    proportions: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise BadParameterError(f"n must be positive, got {self.n}")
        if self.k < 1:
            raise BadParameterError(f"k must be positive, got {self.k}")
        if not (0 <= self.b <= self.a):
            raise BadParameterError(
                f"need 0 <= b <= a (assortative), got a={self.a}, b={self.b}")
        if self.a >= self.n:
            raise BadParameterError(f"a={self.a} must be below n={self.n}")
        if self.proportions is not None:
            p = np.asarray(self.proportions, dtype=np.float64)
            if len(p) != self.k or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise BadParameterError(
                    "proportions must be k nonnegative numbers summing to 1")

    def proportion_array(self) -> np.ndarray:
        if self.proportions is None:
            return np.full(self.k, 1.0 / self.k)
        return np.asarray(self.proportions, dtype=np.float64)


@dataclass
class SbmSample:
    """A sampled graph after 2-core and giant-component reduction."""

    graph: SimpleGraph
    labels: np.ndarray           # planted block per surviving node
    meta: dict = field(default_factory=dict)


def expected_quantities(p: SbmParams) -> dict:
    """Model predictions: c, structural magnitudes mu, SNR, detectability.

    For equal blocks c = (a + (k-1) b) / k, mu_1 = c and mu_i = (a - b) / k
    for i >= 2; in general the mu's are the eigenvalues of the reduced k x k
    rate matrix.  SNR = mu_2^2 / mu_1 with detection feasible above 1.
    """
    pi = p.proportion_array()
    M = np.full((p.k, p.k), float(p.b))
    np.fill_diagonal(M, float(p.a))
    c = float(pi @ M @ pi)
    mu = np.sort(np.linalg.eigvals(M @ np.diag(pi)).real)[::-1]
    mu2 = float(mu[1]) if p.k > 1 else 0.0
    snr = mu2 ** 2 / c if c > 0 else 0.0
    return {
        "c": c,
        "mu": [float(x) for x in mu],
        "mu1": float(mu[0]),
        "mu2": mu2,
        "snr": snr,
        "detectable": bool(snr > 1.0),
    }


@dataclass(frozen=True)
class BlockStructure:
    """Rank-k description of the expected adjacency matrix."""

    rates: np.ndarray            # k x k entrywise edge probabilities M/n
    block_sizes: np.ndarray      # nodes per block
    reduced: np.ndarray          # k x k matrix whose eigenvalues are the mu's


def expected_adjacency(p: SbmParams) -> BlockStructure:
    """The k x k rate matrix M/n, block sizes, and the reduced matrix."""
    pi = p.proportion_array()
    M = np.full((p.k, p.k), float(p.b))
    np.fill_diagonal(M, float(p.a))
    sizes = _block_sizes(p.n, pi)
    return BlockStructure(rates=M / p.n, block_sizes=sizes,
                          reduced=M @ np.diag(pi))


def _block_sizes(n: int, pi: np.ndarray) -> np.ndarray:
    """Largest-remainder rounding of n * pi to integers summing to n."""
    raw = n * pi
    sizes = np.floor(raw).astype(np.int64)
    short = n - int(sizes.sum())
    if short > 0:
        order = np.argsort(-(raw - sizes), kind="stable")
        sizes[order[:short]] += 1
    return sizes


def sample(p: SbmParams) -> SbmSample:
    """Draw one graph, reduce to the 2-core of the giant component.

    Deterministic per seed.  Raises EmptyCoreError when nothing survives.
    The meta record holds the model predictions plus the empirical mean
    degree, surviving fraction, and the degree-concentration statistic
    max_j |d_j - c| of the surviving graph.
    """
    rng = np.random.default_rng(p.seed)
    pi = p.proportion_array()
    sizes = _block_sizes(p.n, pi)
    labels = np.repeat(np.arange(p.k), sizes)
    rng.shuffle(labels)

    a_n, b_n = p.a / p.n, p.b / p.n
    pairs = []
    for i in range(p.n - 1):
        rates = np.where(labels[i + 1:] == labels[i], a_n, b_n)
        hits = np.nonzero(rng.random(p.n - 1 - i) < rates)[0]
        for j in hits:
            pairs.append((i, int(i + 1 + j)))

    g = from_edge_list(pairs, p.n)
    core, table = two_core(g)
    if core.n == 0:
        raise EmptyCoreError("the 2-core of the sample is empty")
    labels_core = labels[table >= 0]

    comps = connected_components(core)
    giant = max(comps, key=lambda comp: (len(comp), -comp[0]))
    keep = np.zeros(core.n, dtype=bool)
    keep[giant] = True
    table2 = np.full(core.n, -1, dtype=np.int64)
    table2[keep] = np.arange(int(keep.sum()))
    kept_edges = [(table2[u], table2[v]) for u, v in core.edges
                  if keep[u] and keep[v]]
    graph = from_edge_list(kept_edges, int(keep.sum()))
    labels_final = labels_core[keep]

    expected = expected_quantities(p)
    deg = graph.degrees
    meta = dict(expected)
    meta.update({
        "n_requested": p.n,
        "n_surviving": graph.n,
        "m": graph.m,
        "surviving_fraction": graph.n / p.n,
        "empirical_mean_degree": float(2 * graph.m / graph.n) if graph.n else 0.0,
        "degree_concentration": float(np.max(np.abs(deg - expected["c"])))
        if graph.n else 0.0,
        "seed": p.seed,
    })
    return SbmSample(graph=graph, labels=labels_final, meta=meta)

"""Seeded sampling of all tree models and the statistical experiments.

Reproducibility contract: every experiment is keyed by a 64-bit seed.
Trials are processed in fixed-size blocks; block i draws from the
counter-based stream (seed, i), so the sampled values depend only on
(parameters, seed); worker threads change nothing but wall time, and
results merge in block order. Outputs are therefore byte-identical across
thread counts.

Bias convention: a simple code bit is 1 with probability p (the left-edge
gluing). The distribution of every quantity studied here depends on p only
through pq, so the opposite convention would produce statistically
indistinguishable experiments; the fixed choice matters only for exact
stream reproducibility.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import scipy.stats

from . import _kernels
from .core_tree import BinaryTree, glue_plus, hs
from .exact_dist import mean_closed, variance_closed
from .hs_fast import hs_nonsimple_batch, hs_simple, hs_simple_batch
from .markov import mu as markov_mu

MODELS = ("simple", "nonsimple", "ebt", "block")
NONSIMPLE_GUARD_N = 24

_UINT64 = np.uint64


def load_thresholds():
    """Statistical acceptance thresholds, fixed in packaged config so every
    result records the exact values it was judged against."""
    with resources.files(__package__).joinpath("thresholds.json").open() as fh:
        return json.load(fh)


class RngStream:
    """Counter-based stream: same (seed, stream_index) gives the same
    sequence on every platform, and distinct indices are independent."""

    def __init__(self, seed, stream_index=0):
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        key = np.array([self.seed, self.stream_index], dtype=_UINT64)
        self.gen = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream_index):
        return RngStream(self.seed, stream_index)


def sample_simple_code(n, p, rng):
    """n independent bits, each 1 with probability p."""
    if not 0 < p < 1:
        raise ValueError("bias p must lie in (0,1), got %s" % (p,))
    return (rng.gen.random(n) < p).astype(np.int64)


def sample_butterfly_code(n, rng):
    """2^n - 1 independent fair bits in heap layout."""
    return rng.gen.integers(0, 2, size=(1 << n) - 1, dtype=np.int64)


def sample_uniform_ebt(m, rng):
    """Uniformly random m-node binary-tree shape.

    Leaf-grafting growth: a full binary tree gains one internal node per
    step at a uniformly chosen node (equivalently edge, counting the spot
    above the root), on a uniform side; its internal nodes, relabeled,
    are the sampled shape.
    """
    if m < 1:
        raise ValueError("need at least one node")
    highs = np.arange(1, 2 * m, 2, dtype=np.int64)
    choices = rng.gen.integers(0, highs)
    sides = rng.gen.integers(0, 2, size=m, dtype=np.int64)
    left, right, root = _kernels.remy_tree(m, choices, sides)
    return BinaryTree(left, right, None, root)


@dataclass
class ExperimentResult:
    """One experiment's complete outcome: histogram + summary, optional
    per-trial arrays, and the provenance (parameters, seed, thresholds)
    needed to re-run it bit-identically."""

    model: str
    params: dict
    histogram: dict
    summary: dict
    thresholds: dict = field(default_factory=load_thresholds)
    values: np.ndarray | None = None
    paths: np.ndarray | None = None
    path_times: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self):
        doc = {
            "model": self.model,
            "params": self.params,
            "histogram": [[int(v), int(c)] for v, c in sorted(self.histogram.items())],
            "summary": self.summary,
            "thresholds": self.thresholds,
        }
        if self.paths is not None:
            doc["path_times"] = [float(t) for t in self.path_times]
            doc["paths"] = [[float(x) for x in row] for row in self.paths]
        if self.extras:
            doc["extras"] = {
                k: [int(x) for x in v] for k, v in sorted(self.extras.items())
            }
        return json.dumps(doc, sort_keys=True, indent=1)

    def histogram_csv(self):
        lines = ["value,count"]
        for v, c in sorted(self.histogram.items()):
            lines.append("%d,%d" % (v, c))
        return "\n".join(lines) + "\n"

    def paths_csv(self):
        if self.paths is None:
            raise ValueError("result has no paths")
        lines = ["trial,t,W"]
        for i, row in enumerate(self.paths):
            for t, w in zip(self.path_times, row):
                lines.append("%d,%s,%s" % (i, repr(float(t)), repr(float(w))))
        return "\n".join(lines) + "\n"

    def trials_csv(self):
        if not self.extras:
            raise ValueError("result has no per-trial columns")
        keys = list(self.extras)
        lines = ["trial," + ",".join(keys)]
        for i in range(len(self.extras[keys[0]])):
            lines.append(
                "%d," % i + ",".join(str(int(self.extras[k][i])) for k in keys)
            )
        return "\n".join(lines) + "\n"


def _summaries(values):
    values = np.asarray(values)
    out = {
        "count": int(values.size),
        "mean": float(values.mean()),
        "variance": float(values.var(ddof=1)) if values.size > 1 else 0.0,
        "min": int(values.min()),
        "max": int(values.max()),
    }
    return out


def _histogram(values):
    vals, counts = np.unique(np.asarray(values), return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def _blocks(trials, block_size):
    return [
        (i, min(block_size, trials - i * block_size))
        for i in range((trials + block_size - 1) // block_size)
    ]


def _run_blocks(worker, trials, seed, threads, block_size):
    """Run worker(stream_index, block_trials) per block, merged in index
    order so the result is independent of scheduling."""
    blocks = _blocks(trials, block_size)
    if threads is None or threads <= 1 or len(blocks) == 1:
        parts = [worker(RngStream(seed, i), cnt) for i, cnt in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(worker, RngStream(seed, i), cnt) for i, cnt in blocks]
            parts = [f.result() for f in futs]
    return parts


def run_hs_experiment(
    model,
    size,
    trials,
    seed,
    p=None,
    threads=None,
    test_mode=False,
    allow_large=False,
):
    """Sample `trials` structures of the given model and aggregate their HS.

    simple: size = code length n, bits biased by p (default 1/2);
    nonsimple: size = level count n, fair bits, guarded above n = 24;
    ebt: size = node count m, uniform shape, DFS oracle;
    block: size = per-input node count m, two glued uniform shapes.
    """
    if model not in MODELS:
        raise ValueError("unknown model %r" % (model,))
    if model != "simple" and p is not None:
        raise ValueError("bias p only applies to the simple model")
    if model == "simple" and p is None:
        p = 0.5
    if trials < 1:
        raise ValueError("need at least one trial")
    if model == "nonsimple" and size > NONSIMPLE_GUARD_N and not allow_large:
        raise ValueError(
            "nonsimple n = %d builds 2^n-bit codes; pass allow_large to confirm"
            % size
        )
    thresholds = load_thresholds()
    block_size = thresholds["block_size"]

    if model == "simple":

        def worker(stream, cnt):
            bits = (stream.gen.random((cnt, size)) < p).astype(np.int64)
            vals = hs_simple_batch(bits)
            if test_mode and size <= 12:
                from .permutations import tree_from_simple_code

                for row, got in zip(bits, vals):
                    assert hs(tree_from_simple_code(row, shape_only=True)) == got
            return vals

    elif model == "nonsimple":

        def worker(stream, cnt):
            bits = stream.gen.integers(0, 2, size=(cnt, (1 << size) - 1), dtype=np.int64)
            vals = hs_nonsimple_batch(bits)
            if test_mode:
                from .permutations import tree_from_butterfly_code

                for row, got in zip(bits, vals):
                    assert hs(tree_from_butterfly_code(row, shape_only=True)) == got
            return vals

    elif model == "ebt":

        def worker(stream, cnt):
            vals = np.empty(cnt, dtype=np.int64)
            for i in range(cnt):
                vals[i] = hs(sample_uniform_ebt(size, stream))
            return vals

    else:  # block

        def worker(stream, cnt):
            vals = np.empty(cnt, dtype=np.int64)
            for i in range(cnt):
                t1 = sample_uniform_ebt(size, stream)
                t2 = sample_uniform_ebt(size, stream)
                vals[i] = hs(glue_plus(t1, t2, shape_only=True))
            return vals

    parts = _run_blocks(worker, trials, seed, threads, block_size)
    values = np.concatenate(parts)
    params = {"model": model, "size": size, "trials": trials, "seed": seed}
    if model == "simple":
        params["p"] = p
    return ExperimentResult(
        model=model,
        params=params,
        histogram=_histogram(values),
        summary=_summaries(values),
        thresholds=thresholds,
        values=values,
    )


def block_experiment(m, trials, seed, threads=None):
    """Glue pairs of independent uniform m-node shapes with the right-edge
    merge and record (HS, max input HS, increment indicator) per trial."""
    if m < 1:
        raise ValueError("need at least one node")
    thresholds = load_thresholds()

    def worker(stream, cnt):
        out = np.empty((cnt, 3), dtype=np.int64)
        for i in range(cnt):
            t1 = sample_uniform_ebt(m, stream)
            t2 = sample_uniform_ebt(m, stream)
            h1 = hs(t1)
            h2 = hs(t2)
            hg = hs(glue_plus(t1, t2, shape_only=True))
            out[i] = hg, max(h1, h2), hg - max(h1, h2)
        return out

    parts = _run_blocks(worker, trials, seed, threads, thresholds["block_size"])
    rows = np.concatenate(parts)
    values = rows[:, 0]
    return ExperimentResult(
        model="block",
        params={"model": "block", "size": m, "trials": trials, "seed": seed},
        histogram=_histogram(values),
        summary=_summaries(values),
        thresholds=thresholds,
        values=values,
        extras={
            "hs": rows[:, 0],
            "max_input_hs": rows[:, 1],
            "increment": rows[:, 2],
        },
    )


def fclt_paths(n, p, trials, grid_points, seed, threads=None):
    """Centered, scaled partial-sum paths of the HS increments:
    W(t_i) = (S_{floor(t_i n)} - n t_i mu_p) / sqrt(n) at t_i = i/grid."""
    if grid_points > n:
        raise ValueError("grid_points may not exceed n")
    if not 0 < p < 1:
        raise ValueError("bias p must lie in (0,1)")
    thresholds = load_thresholds()
    mu = float(markov_mu(p, exact=False))
    t = np.arange(grid_points + 1) / grid_points
    cut = (np.arange(grid_points + 1) * n) // grid_points
    cut_set = np.zeros(n + 1, dtype=bool)
    cut_set[cut] = True

    def worker(stream, cnt):
        bits = (stream.gen.random((cnt, n)) < p).astype(np.int64)
        W = np.empty((cnt, grid_points + 1))
        S = np.zeros(cnt, dtype=np.int64)
        X = np.zeros(cnt, dtype=np.int64)
        pos = 0
        if cut_set[0]:
            W[:, pos] = 0.0
            pos += 1
        for j in range(1, n):
            X = (bits[:, j] ^ bits[:, j - 1]) & (1 - X)
            S += X
            if cut_set[j + 1]:
                W[:, pos] = S
                pos += 1
        return W

    parts = _run_blocks(worker, trials, seed, threads, thresholds["block_size"])
    raw = np.concatenate(parts)
    W = (raw - n * t[None, :] * mu) / np.sqrt(n)
    W[:, 0] = 0.0
    return ExperimentResult(
        model="fclt",
        params={
            "model": "fclt",
            "size": n,
            "p": p,
            "trials": trials,
            "grid_points": grid_points,
            "seed": seed,
        },
        histogram={},
        summary={
            "count": int(W.shape[0]),
            "endpoint_mean": float(W[:, -1].mean()),
            "endpoint_variance": float(W[:, -1].var(ddof=1)),
        },
        thresholds=thresholds,
        paths=W,
        path_times=t,
    )


def clt_standardize(result, n):
    """Per-sample standardization (HS - mean_n)/sigma_n with the closed-form
    moments. A degenerate level (zero variance) maps every sample to 0."""
    values = result.values if isinstance(result, ExperimentResult) else result
    mu = float(mean_closed(n))
    var = float(variance_closed(n))
    z = np.asarray(values, dtype=np.float64) - mu
    if var == 0:
        return np.zeros_like(z)
    return z / np.sqrt(var)


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float


def chi_square_gof(histogram, pmf_map, min_expected=None):
    """Pearson goodness-of-fit of an integer histogram against an exact pmf.

    Support cells are merged left to right until each expected count
    reaches `min_expected` (trailing remainder merges backward). Observed
    mass outside the pmf support can never fit; it returns an infinite
    statistic. Acceptance is the caller's decision.
    """
    if min_expected is None:
        min_expected = load_thresholds()["gof_min_expected"]
    total = sum(histogram.values())
    if total == 0:
        raise ValueError("empty histogram")
    support = sorted(pmf_map)
    if any(v not in pmf_map for v in histogram):
        return GofResult(float("inf"), max(len(support) - 1, 1), 0.0)
    # merge support cells into bins with enough expected mass
    bins = []
    obs = exp = 0.0
    for v in support:
        obs += histogram.get(v, 0)
        exp += float(pmf_map[v]) * total
        if exp >= min_expected:
            bins.append((obs, exp))
            obs = exp = 0.0
    if exp > 0 or obs > 0:
        if bins:
            o0, e0 = bins.pop()
            bins.append((o0 + obs, e0 + exp))
        else:
            bins.append((obs, exp))
    if len(bins) < 2:
        raise ValueError("not enough expected mass to form two bins")
    stat = sum((o - e) ** 2 / e for o, e in bins)
    dof = len(bins) - 1
    return GofResult(float(stat), dof, float(scipy.stats.chi2.sf(stat, dof)))

"""Memory-based semantic compression: affinity propagation over the stored
embeddings picks exemplars that become a smaller codebook.

Similarities are negative Euclidean distances (not the negative *squared*
distances many libraries default to); the diagonal carries the preference.
The working arrays are dense N x N float64, so N around 20000 already needs
roughly 3 GB; this is a desk-scale implementation by design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .core import Codebook, LabeledDataset, Rng

_DEGENERACY_NOISE = 1e-12


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise negative Euclidean distances with the preference on the diagonal."""

    s: np.ndarray
    preference: float

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] < 2:
            raise ValueError("similarity matrix must be square with N >= 2")
        off = ~np.eye(s.shape[0], dtype=bool)
        if (s[off] > 0).any():
            raise ValueError("off-diagonal similarities must be <= 0")
        if not np.array_equal(s, s.T):
            raise ValueError("similarity matrix must be symmetric")
        if not np.all(np.diag(s) == self.preference):
            raise ValueError("diagonal must equal the preference")
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.shape[0]


@dataclass(frozen=True)
class APConfig:
    damping: float = 0.5
    max_iterations: int = 1000
    convergence_window: int = 50
    preference: float | str = "median"

    def __post_init__(self):
        if not 0.5 <= self.damping < 1:
            raise ValueError("damping must lie in [0.5, 1)")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be >= 1")
        if self.max_iterations < self.convergence_window:
            raise ValueError("max_iterations must be >= convergence_window")
        if isinstance(self.preference, str) and self.preference != "median":
            raise ValueError("preference must be a number or 'median'")


@dataclass(frozen=True)
class APResult:
    exemplar_ids: np.ndarray  # K dataset indices
    labels: np.ndarray  # N cluster labels in [0, K)
    iterations_run: int
    converged: bool

    @property
    def k(self) -> int:
        return self.exemplar_ids.shape[0]


def median_preference(s: np.ndarray) -> float:
    """Lower median of the off-diagonal similarities (lower of the two middle
    values for even counts)."""
    off = s[~np.eye(s.shape[0], dtype=bool)]
    ordered = np.sort(off)
    return float(ordered[(ordered.size - 1) // 2])


def similarity_matrix(ds: LabeledDataset, preference: float | str = "median") -> SimilarityMatrix:
    """s(i,k) = -||row_i - row_k||_2 off-diagonal; diagonal = preference."""
    if ds.n < 2:
        raise ValueError("need at least 2 points")
    s = -squareform(pdist(ds.embeddings.astype(np.float64)))
    if isinstance(preference, str):
        if preference != "median":
            raise ValueError("preference must be a number or 'median'")
        preference = median_preference(s)
    np.fill_diagonal(s, float(preference))
    return SimilarityMatrix(s, float(preference))


def affinity_propagation(sim: SimilarityMatrix, cfg: APConfig, rng: Rng) -> APResult:
    """Damped responsibility/availability message passing.

    Stops once the exemplar set {k : r(k,k) + a(k,k) > 0} is unchanged for
    convergence_window iterations, or at max_iterations. A tiny zero-mean
    noise (scale 1e-12) is added to the similarities once up front to break
    degeneracies deterministically from the rng.
    """
    n = sim.n
    s = sim.s + _DEGENERACY_NOISE * rng.gen.standard_normal((n, n))
    a = np.zeros((n, n))
    r = np.zeros((n, n))
    lam = cfg.damping
    idx = np.arange(n)

    prev_exemplars: np.ndarray | None = None
    stable = 0
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iterations + 1):
        # responsibilities: r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        tmp = a + s
        first = np.argmax(tmp, axis=1)
        best = tmp[idx, first]
        tmp[idx, first] = -np.inf
        second = tmp.max(axis=1)
        rnew = s - best[:, None]
        rnew[idx, first] = s[idx, first] - second
        r = lam * r + (1.0 - lam) * rnew

        # availabilities: a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        # and a(k,k) <- sum_{i' != k} max(0, r(i',k))
        rp = np.maximum(r, 0.0)
        rp[idx, idx] = r[idx, idx]
        colsum = rp.sum(axis=0)
        anew = colsum[None, :] - rp
        diag = anew[idx, idx].copy()
        np.minimum(anew, 0.0, out=anew)
        anew[idx, idx] = diag
        a = lam * a + (1.0 - lam) * anew

        exemplars = np.flatnonzero(np.diag(r) + np.diag(a) > 0)
        if exemplars.size and prev_exemplars is not None and np.array_equal(exemplars, prev_exemplars):
            stable += 1
            if stable >= cfg.convergence_window:
                converged = True
                break
        else:
            stable = 0
        prev_exemplars = exemplars if exemplars.size else None

    exemplars = np.flatnonzero(np.diag(r) + np.diag(a) > 0)
    if exemplars.size == 0:
        raise ValueError("no exemplars; raise preference")
    # Canonical finishing step: within each cluster, re-pick the exemplar as
    # the member maximizing total similarity to the cluster, then assign.
    c = np.argmax(s[:, exemplars], axis=1)
    c[exemplars] = np.arange(exemplars.size)
    refined = exemplars.copy()
    for k in range(exemplars.size):
        members = np.flatnonzero(c == k)
        best = np.argmax(s[np.ix_(members, members)].sum(axis=0))
        refined[k] = members[best]
    exemplars = np.unique(refined)
    labels = np.argmax(s[:, exemplars], axis=1)
    labels[exemplars] = np.arange(exemplars.size)
    return APResult(exemplars, labels, iterations, converged)


def build_centroid_codebook(ds: LabeledDataset, ap: APResult) -> Codebook:
    """Codebook of exemplar rows; exemplars are actual dataset points, so the
    human-inspectable mapping from codeword back to a stored message survives."""
    if ap.labels.shape[0] != ds.n or ap.exemplar_ids.max() >= ds.n:
        raise ValueError("AP result does not match this dataset")
    return Codebook(ds.embeddings[ap.exemplar_ids], ap.exemplar_ids.copy())


def format_ap_report(ap: APResult) -> str:
    """Plain text summary used by the CLI codebook subcommand."""
    return (
        f"clusters: {ap.k}\n"
        f"iterations: {ap.iterations_run}\n"
        f"converged: {'yes' if ap.converged else 'no'}\n"
    )

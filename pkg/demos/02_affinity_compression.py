"""Semantic compression: shrink the codebook with affinity propagation.

A big memory is precise but expensive (more index bits, more storage). AP
clusters the stored embeddings by negative Euclidean distance and keeps one
exemplar per cluster; exemplars are real stored messages, so the codebook
stays human-inspectable. AP picks the number of clusters itself.
"""

import numpy as np

from semlink.affinity import APConfig, affinity_propagation, build_centroid_codebook, similarity_matrix
from semlink.core import Rng, generate_synthetic
from semlink.quantizer import assign_indices, build_identity_codebook, index_bit_width

memory = generate_synthetic(n_class=4, per_class=100, p=32, spread=0.12, seed=3)
print(f"stored memory: {memory.n} embeddings")

sim = similarity_matrix(memory, preference="median")
print(f"similarity matrix: {sim.n}x{sim.n}, median preference = {sim.preference:.3f}")

result = affinity_propagation(sim, APConfig(), Rng(3))
print(f"AP finished after {result.iterations_run} iterations "
      f"(converged: {result.converged}), K = {result.k} exemplars")

small = build_centroid_codebook(memory, result)
full = build_identity_codebook(memory)
print(f"\nbit width: full codebook {index_bit_width(full.m)} bits, "
      f"compressed {index_bit_width(small.m)} bits")

# every codeword is still a stored message
for row in small.entries[:3]:
    assert (row == memory.embeddings).all(axis=1).any()
print("every exemplar is an actual stored embedding (explainability retained)")

# cluster sizes
sizes = np.bincount(result.labels, minlength=result.k)
print(f"cluster sizes: min {sizes.min()}, median {int(np.median(sizes))}, max {sizes.max()}")

# how much semantic distortion does compression add?
probe = generate_synthetic(n_class=4, per_class=120, p=32, spread=0.12, seed=4)
for name, cb in (("full", full), ("compressed", small)):
    idx = assign_indices(cb, probe.embeddings)
    d = np.linalg.norm(probe.embeddings.astype(np.float64) - cb.entries[idx], axis=1)
    print(f"{name:>11}: mean distortion {d.mean():.4f} at {index_bit_width(cb.m)} bits/message")

"""The learning-based alternative: a vector-quantized autoencoder.

A dense encoder maps embeddings to a low-dimensional latent space scaled down
by powers of alpha; latents are snapped to the nearest entry of a LEARNED
codebook; the decoder reconstructs from the codebook entry. Training uses the
three-term objective (reconstruction + codebook + commitment) with a
straight-through estimator across the quantizer.
"""

import numpy as np

from semlink.core import generate_synthetic
from semlink.neural import TrainConfig
from semlink.quantizer import index_bit_width
from semlink.vqae import VqaeConfig, decode, encode, plan_architecture, quantize_latent_batch, train_vqae, vqae_loss

p, latent = 64, 8
print("encoder widths for p=512, alpha=4:")
for k in (16, 64):
    print(f"  K={k:3d} -> {plan_architecture(512, 4, k)}")
print(f"this demo uses p={p}, K={latent} -> {plan_architecture(p, 4, latent)}")

data = generate_synthetic(n_class=4, per_class=250, p=p, spread=0.12, seed=11)
cfg = VqaeConfig(
    alpha=4, latent_dim=latent, codebook_size=48, beta=0.25,
    train=TrainConfig(batch_size=128, epochs=30, initial_lr=0.01,
                      scheduler_gamma=0.97, seed=11),
)

losses = []
model, t_train = train_vqae(data, cfg, epoch_losses=losses)
print(f"\ntrained on {data.n} embeddings in {t_train:.2f}s (this is T_train for eta_T)")
print("epoch loss curve (every 5th):")
for e in range(0, len(losses), 5):
    print(f"  epoch {e:2d}: {losses[e]:8.4f}")

# transmit one embedding: encoder -> codebook index -> decoder
q = data.embeddings[123].astype(np.float64)
z = encode(model, q)
idx, e = quantize_latent_batch(model.codebook, z[None, :])
q_hat = decode(model, e[0])
terms = vqae_loss(q, model, beta=cfg.beta)
print(f"\none message: latent dim {z.shape[0]}, codebook index {idx[0]} "
      f"of {cfg.codebook_size} ({index_bit_width(cfg.codebook_size)} bits)")
print(f"loss terms: reconstruction {terms.reconstruction:.4f}, "
      f"codebook {terms.codebook:.4f}, commitment {terms.commitment:.4f}")
print(f"reconstruction error |q - q^|: {np.linalg.norm(q - q_hat):.4f}")

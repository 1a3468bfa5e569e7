"""Task-oriented semantic communication link simulator.

Semantic codebooks built three ways (stored embeddings, affinity-propagation
exemplars, learned vector-quantized autoencoder) transmit codeword indices over
RS(31,25)-coded QPSK on AWGN or channel-inverted Rayleigh fading; a receiver
classifier turns reconstructed embeddings into task decisions, scored by
accuracy, bit cost, and system time efficiency.
"""

from .core import (
    Codebook,
    FormatError,
    LabeledDataset,
    Rng,
    generate_synthetic,
    l2_distance,
    load_codebook,
    load_dataset,
    save_codebook,
    save_dataset,
)
from .quantizer import Assignment, assign_index, build_identity_codebook, index_bit_width, reconstruct
from .affinity import APConfig, APResult, SimilarityMatrix, affinity_propagation, build_centroid_codebook, similarity_matrix
from .neural import DenseNet, TrainConfig, adam_step, exponential_lr, forward, backward, mse, softmax_cross_entropy
from .vqae import VqaeConfig, VqaeModel, plan_architecture, quantize_latent, train_vqae, vqae_loss
from .classifier import ClassifierModel, build_classifier, classify, train_classifier
from .phy import ChannelConfig, LinkStats, channel, qpsk_demodulate, qpsk_modulate, rs_decode, rs_encode, transmit_indices
from .baseline import HuffmanTable, build_huffman, huffman_decode, huffman_encode
from .metrics import RunReport, accuracy, measure_throughput, system_time_efficiency
from .config import ExperimentConfig, parse_config
from .experiment import run_experiment

__version__ = "0.1.0"

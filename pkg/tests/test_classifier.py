import numpy as np
import pytest

from semlink.classifier import build_classifier, classify, classify_batch, train_classifier
from semlink.core import derive_seed, generate_synthetic
from semlink.experiment import split_per_class
from semlink.metrics import accuracy
from semlink.neural import TrainConfig
from semlink.quantizer import assign_indices, build_identity_codebook


class TestBuild:
    def test_fixed_architecture(self):
        model = build_classifier(512, 4, seed=0)
        shapes = [layer.w.shape for layer in model.net.layers]
        assert shapes == [(128, 512), (32, 128), (4, 32)]
        acts = [layer.activation for layer in model.net.layers]
        assert acts == ["relu", "relu", "identity"]

    def test_ten_class_output(self):
        model = build_classifier(512, 10, seed=0)
        assert model.net.output_dim == 10

    def test_same_seed_identical_init(self):
        a = build_classifier(16, 3, seed=5)
        b = build_classifier(16, 3, seed=5)
        for la, lb in zip(a.net.layers, b.net.layers):
            assert np.array_equal(la.w, lb.w)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            build_classifier(0, 4, seed=0)
        with pytest.raises(ValueError):
            build_classifier(8, 1, seed=0)


class TestClassify:
    def test_crafted_bias_wins(self):
        model = build_classifier(4, 4, seed=0)
        for layer in model.net.layers:
            layer.w[:] = 0.0
            layer.b[:] = 0.0
        model.net.layers[-1].b[:] = [0.0, 5.0, 0.0, 0.0]
        assert classify(model, np.zeros(4)) == 1

    def test_tie_breaks_to_lowest(self):
        model = build_classifier(4, 3, seed=0)
        for layer in model.net.layers:
            layer.w[:] = 0.0
            layer.b[:] = 0.0
        assert classify(model, np.zeros(4)) == 0

    def test_constant_logit_shift_invariance(self):
        model = build_classifier(6, 3, seed=1)
        g = np.random.default_rng(2)
        q = g.standard_normal(6)
        before = classify(model, q)
        model.net.layers[-1].b += 7.5  # shifts every logit equally
        assert classify(model, q) == before

    def test_zero_distortion_same_class(self):
        model = build_classifier(6, 3, seed=3)
        q = np.random.default_rng(4).standard_normal(6)
        assert classify(model, q) == classify(model, q.copy())


class TestTrain:
    def test_separable_reaches_99(self):
        for seed in (1, 2, 3):
            ds = generate_synthetic(4, 100, 64, 0.02, seed=seed)
            model = build_classifier(64, 4, seed=seed)
            train_classifier(model, ds, TrainConfig(seed=seed))
            preds = classify_batch(model, ds.embeddings.astype(np.float64))
            assert accuracy(preds, ds.labels) >= 0.99

    def test_zero_epochs_rejected(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)

    def test_deterministic_weights(self):
        ds = generate_synthetic(3, 30, 8, 0.05, seed=6)
        nets = []
        for _ in range(2):
            model = build_classifier(8, 3, seed=7)
            train_classifier(model, ds, TrainConfig(epochs=4, seed=7))
            nets.append(model.net)
        for la, lb in zip(nets[0].layers, nets[1].layers):
            assert la.w.tobytes() == lb.w.tobytes()

    def test_dimension_mismatch(self):
        ds = generate_synthetic(2, 10, 8, 0.05, seed=8)
        model = build_classifier(16, 2, seed=0)
        with pytest.raises(ValueError):
            train_classifier(model, ds, TrainConfig(seed=0))

    def test_clean_accuracy_bounds_quantized(self):
        # quantized reconstructions cannot beat clean inputs by more than noise
        gaps = []
        for seed in (1, 2, 3):
            base = generate_synthetic(4, 625, 64, 0.25, seed=derive_seed(seed, "data"))
            ds_train, ds_code, ds_test = split_per_class(base, [250, 250, 125])
            model = build_classifier(64, 4, seed=seed)
            train_classifier(model, ds_train, TrainConfig(seed=seed))
            x = ds_test.embeddings.astype(np.float64)
            clean = accuracy(classify_batch(model, x), ds_test.labels)
            cb = build_identity_codebook(ds_code)
            q_hat = cb.entries[assign_indices(cb, ds_test.embeddings)].astype(np.float64)
            quant = accuracy(classify_batch(model, q_hat), ds_test.labels)
            gaps.append(clean - quant)
        assert np.mean(gaps) >= -0.02

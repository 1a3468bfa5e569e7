import numpy as np
import pytest

from semlink.cli import main
from semlink.core import load_codebook, load_dataset
from semlink.metrics import CSV_HEADER, read_reports
from semlink.neural import load_net


@pytest.fixture
def corpus(tmp_path):
    g = np.random.default_rng(0)
    words = ["news", "market", "team", "game", "science", "space", "bank", "trade"]
    def line():
        return " ".join(g.choice(words, size=int(g.integers(4, 9))))
    train = tmp_path / "train.txt"
    test = tmp_path / "test.txt"
    train.write_text("\n".join(line() for _ in range(80)) + "\n")
    test.write_text("\n".join(line() for _ in range(60)) + "\n")
    return train, test


def grid_config(tmp_path, corpus, extra=""):
    train_txt, test_txt = corpus
    cfg = tmp_path / "grid.cfg"
    cfg.write_text(f"""
        synthetic = true
        synthetic_classes = 4
        synthetic_dim = 16
        synthetic_spread = 0.1
        synthetic_train_per_class = 50
        synthetic_codebook_per_class = 30
        synthetic_test_per_class = 30
        models = sem_quan, sem_comp, vqae, huffman_baseline
        channels = awgn, rayleigh_inverted
        snr_db = 0, 5, 10, 15
        seeds = 1, 2, 3
        clf_epochs = 3
        vqae_epochs = 2
        vqae_latent_dim = 4
        deterministic_time = true
        baseline_train_text = {train_txt}
        baseline_test_text = {test_txt}
        {extra}
    """)
    return cfg


class TestGen:
    def test_reference_scale(self, tmp_path):
        out = tmp_path / "big.semb"
        rc = main(["gen", "--classes", "4", "--per-class", "2500", "--dim", "512",
                   "--spread", "0.05", "--seed", "1", "--out", str(out)])
        assert rc == 0
        ds = load_dataset(out)
        assert ds.n == 10000 and ds.p == 512 and ds.n_class == 4

    def test_seed_determinism(self, tmp_path):
        a, b = tmp_path / "a.semb", tmp_path / "b.semb"
        for out in (a, b):
            assert main(["gen", "--classes", "2", "--per-class", "5", "--dim", "8",
                         "--spread", "0.1", "--seed", "3", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestCodebook:
    def test_identity(self, tmp_path):
        data = tmp_path / "d.semb"
        main(["gen", "--classes", "2", "--per-class", "10", "--dim", "8",
              "--spread", "0.1", "--seed", "0", "--out", str(data)])
        out = tmp_path / "cb.scbk"
        assert main(["codebook", "--method", "identity", "--data", str(data),
                     "--out", str(out)]) == 0
        cb = load_codebook(out)
        assert cb.m == 20

    def test_ap_with_report(self, tmp_path, capsys):
        data = tmp_path / "d.semb"
        main(["gen", "--classes", "3", "--per-class", "12", "--dim", "8",
              "--spread", "0.05", "--seed", "0", "--out", str(data)])
        out = tmp_path / "cb.scbk"
        report = tmp_path / "ap.txt"
        assert main(["codebook", "--method", "ap", "--data", str(data),
                     "--out", str(out), "--report", str(report), "--seed", "1"]) == 0
        cb = load_codebook(out)
        assert 1 <= cb.m <= 36
        assert "clusters:" in report.read_text()
        assert "clusters:" in capsys.readouterr().out


class TestTrainClassifier:
    def test_writes_loadable_checkpoint(self, tmp_path, capsys):
        data = tmp_path / "d.semb"
        main(["gen", "--classes", "3", "--per-class", "40", "--dim", "16",
              "--spread", "0.05", "--seed", "0", "--out", str(data)])
        out = tmp_path / "clf.snet"
        assert main(["train-classifier", "--train", str(data), "--out", str(out),
                     "--epochs", "5", "--seed", "2"]) == 0
        net = load_net(out)
        assert [l.w.shape for l in net.layers] == [(128, 16), (32, 128), (3, 32)]
        assert "accuracy" in capsys.readouterr().out


class TestSimulate:
    def test_full_grid_row_count(self, tmp_path, corpus):
        cfg = grid_config(tmp_path, corpus)
        out = tmp_path / "results.csv"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        rows = out.read_text().splitlines()
        assert rows[0] == CSV_HEADER
        assert len(rows) == 1 + 4 * 2 * 4 * 3  # 96 grid cells
        assert (tmp_path / "results.csv.table2.txt").exists()

    def test_deterministic_rerun_identical(self, tmp_path, corpus):
        cfg = grid_config(tmp_path, corpus, extra="seeds = 1\nsnr_db = 5, 10\nchannels = awgn\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_override(self, tmp_path, corpus):
        cfg = grid_config(tmp_path, corpus, extra="snr_db = 10\nchannels = awgn\nmodels = sem_quan\n")
        out = tmp_path / "r.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "9"]) == 0
        reports = read_reports(out)
        assert [r.seed for r in reports] == [9]

    def test_adversarial_grid_flags_but_completes(self, tmp_path, corpus):
        # oversized learned codebook, brutal SNR, tiny codebook dataset
        cfg = grid_config(tmp_path, corpus, extra="""
            models = sem_quan, vqae
            synthetic_codebook_per_class = 1
            snr_db = -20, 10
            channels = awgn
            seeds = 1
            vqae_codebook_size = 5000
        """)
        out = tmp_path / "r.csv"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out)])
        assert rc == 1  # failures reported through the exit code
        reports = read_reports(out)
        assert len(reports) == 4
        vq_rows = [r for r in reports if r.model == "vqae"]
        assert all(r.flags.startswith("error") for r in vq_rows)
        quan_rows = [r for r in reports if r.model == "sem_quan"]
        assert all(not r.flags.startswith("error") for r in quan_rows)

    def test_jobs_parallel_same_rows(self, tmp_path, corpus):
        cfg = grid_config(tmp_path, corpus, extra="models = sem_quan, sem_comp\nseeds = 1\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(b), "--jobs", "4"]) == 0
        assert sorted(a.read_text().splitlines()) == sorted(b.read_text().splitlines())

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("synthetic = true\nbacth_size = 2\nmodels = sem_quan\n")
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "r.csv")])
        assert rc == 2
        assert "bacth_size" in capsys.readouterr().err


class TestReport:
    @pytest.fixture
    def results_csv(self, tmp_path, corpus):
        cfg = grid_config(tmp_path, corpus, extra="models = sem_quan, vqae\nseeds = 1\nchannels = awgn\n")
        out = tmp_path / "r.csv"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        return out

    def test_table(self, results_csv, capsys):
        assert main(["report", "--csv", str(results_csv), "--format", "table"]) == 0
        out = capsys.readouterr().out
        assert "model" in out and "sem_quan" in out

    def test_fig_columns(self, results_csv, capsys):
        assert main(["report", "--csv", str(results_csv), "--format", "fig"]) == 0
        out = capsys.readouterr().out
        assert "# channel=awgn" in out
        assert "eta_t[sem_quan]" in out
        # one data line per SNR point
        data_lines = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert len(data_lines) == 4

    def test_table2(self, results_csv, capsys):
        assert main(["report", "--csv", str(results_csv), "--format", "table2"]) == 0
        out = capsys.readouterr().out
        assert "acc_mean" in out and "sem_quan" in out

    def test_out_file(self, results_csv, tmp_path):
        dest = tmp_path / "fig.dat"
        assert main(["report", "--csv", str(results_csv), "--format", "fig",
                     "--out", str(dest)]) == 0
        assert dest.exists()

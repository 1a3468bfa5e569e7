import numpy as np
import pytest

from semlink.metrics import (
    CSV_HEADER,
    RunReport,
    accuracy,
    append_report,
    deterministic_throughput,
    format_csv_row,
    make_report,
    measure_throughput,
    read_reports,
    system_time_efficiency,
    table2_summary,
)


class TestAccuracy:
    def test_identical(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0

    def test_disjoint(self):
        assert accuracy([1, 1], [2, 2]) == 0.0

    def test_counting(self):
        truth = np.zeros(2000, dtype=int)
        pred = truth.copy()
        pred[:207] = 1  # 1793/2000 correct
        assert accuracy(pred, truth) == 0.8965

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy([1], [1, 2])


class TestEfficiency:
    def test_zero_training(self):
        assert system_time_efficiency(100, 0, 50) == 5000

    def test_basic(self):
        assert system_time_efficiency(100, 40, 50) == 3000

    def test_negative_flagged(self):
        report = make_report("m", "awgn", 10, 1, 200, 100, 0.5, 120.0, 50.0, 100.0)
        assert report.eta_t == -1000
        assert "neg_eta" in report.flags

    def test_preconditions(self):
        with pytest.raises(ValueError):
            system_time_efficiency(0, 0, 1)
        with pytest.raises(ValueError):
            system_time_efficiency(100, 0, -1)


class TestThroughput:
    def test_division(self):
        assert measure_throughput(1800, 2000, 3.6) == 500.0

    def test_minimum_messages(self):
        with pytest.raises(ValueError):
            measure_throughput(50, 99, 1.0)

    def test_zero_elapsed(self):
        with pytest.raises(ValueError, match="clock"):
            measure_throughput(100, 100, 0.0)

    def test_deterministic_cost_model(self):
        # 1 ms per message and 90% accuracy gives U = 900 at any scale
        assert deterministic_throughput(1800, 2000, 0.001) == 900.0
        assert deterministic_throughput(90, 100, 0.001) == 900.0


class TestRunReport:
    def test_identity_enforced(self):
        with pytest.raises(ValueError, match="eta_t"):
            RunReport("m", "awgn", 0.0, 1, 100, 100, 0.5, 1.0, 10.0,
                      eta_t=123.0, time_budget_s=100.0)

    def test_identity_recomputable_from_csv(self, tmp_path):
        path = tmp_path / "r.csv"
        for i in range(5):
            report = make_report("m", "awgn", 5.0, i, 200, 2000, 0.77,
                                 t_train_s=1.234567891234 + i, u_cps=654.321 / (i + 1),
                                 time_budget_s=100.0)
            append_report(path, report)
        for row in read_reports(path):
            assert row.eta_t == (row.time_budget_s - row.t_train_s) * row.u_cps

    def test_ordering_property(self):
        # equal throughput: zero-training model dominates any trained one
        free = make_report("free", "awgn", 0.0, 1, 100, 10, 0.9, 0.0, 42.0, 100.0)
        for t_train in (0.001, 1.0, 50.0, 200.0):
            paid = make_report("paid", "awgn", 0.0, 1, 100, 10, 0.9, t_train, 42.0, 100.0)
            assert free.eta_t >= paid.eta_t


class TestCsv:
    def test_header_golden(self):
        assert CSV_HEADER == ("model,channel,snr_db,seed,n_messages,bits_total,"
                              "accuracy,t_train_s,u_cps,eta_t,time_budget_s,flags")

    def test_header_written_once(self, tmp_path):
        path = tmp_path / "r.csv"
        r = make_report("m", "awgn", 0.0, 1, 100, 10, 0.5, 0.0, 1.0, 100.0)
        append_report(path, r)
        append_report(path, r)
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3

    def test_round_trip_exact(self, tmp_path):
        path = tmp_path / "r.csv"
        r = make_report("sem_quan", "rayleigh_inverted", 7.5, 3, 2000, 28000,
                        0.8965, 0.0123456789, 543.2109876, 100.0, flags="")
        append_report(path, r)
        back = read_reports(path)[0]
        assert back == r

    def test_flags_sanitized(self):
        r = make_report("m", "awgn", 0.0, 1, 100, 10, 0.5, 0.0, 1.0, 100.0,
                        flags="error:Bad,thing\nhappened")
        row = format_csv_row(r)
        assert row.count(",") == 11

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope\n1,2\n")
        with pytest.raises(ValueError, match="header"):
            read_reports(path)


class TestTable2Summary:
    def test_aggregates_per_model(self):
        reports = [
            make_report("sem_quan", "awgn", s, 1, 2000, 28000, a, 0.0, 1.0, 100.0)
            for s, a in ((0.0, 0.8), (5.0, 0.9))
        ] + [
            make_report("vqae", "awgn", 0.0, 1, 2000, 20000, 0.7, 3.0, 1.0, 100.0),
            make_report("vqae", "awgn", 5.0, 1, 0, 0, 0.0, 0.0, 0.0, 100.0,
                        flags="error:X:boom"),
        ]
        rows = table2_summary(reports)
        assert rows[0] == ("sem_quan", 28000, pytest.approx(0.85))
        assert rows[1] == ("vqae", 20000, pytest.approx(0.7))

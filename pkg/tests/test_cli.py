import numpy as np

from shbreg.cli import main


def read_csv(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "iter,mean_sq_rel_err,std_err"
    rows = [line.split(",") for line in lines[1:]]
    iters = np.array([int(r[0]) for r in rows])
    means = np.array([float(r[1]) for r in rows])
    return iters, means


class TestExample1Command:
    def test_writes_expected_files(self, tmp_path):
        out = tmp_path / "run"
        code = main(["example1", "--p", "12", "--m", "24", "--runs", "2",
                     "--iters", "60", "--policy", "dp", "--levels", "0.1",
                     "--out", str(out), "--seed", "3"])
        assert code == 0
        for name in ("ex1_0.1_const.csv", "ex1_0.1_dp.csv", "ex1.svg"):
            assert (out / name).exists()
        iters, means = read_csv(out / "ex1_0.1_const.csv")
        assert iters[0] == 0 and iters[-1] == 60
        assert np.all(means >= 0)

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ["example1", "--p", "10", "--m", "20", "--runs", "2", "--iters", "40",
                "--levels", "0.01", "--seed", "5"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        name = "ex1_0.01_const.csv"
        assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_noise_free_run_keeps_converging(self, tmp_path):
        out = tmp_path / "clean"
        code = main(["example1", "--p", "10", "--m", "20", "--runs", "3",
                     "--iters", "300", "--levels", "0", "--out", str(out),
                     "--seed", "2"])
        assert code == 0
        iters, means = read_csv(out / "ex1_0_const.csv")
        assert means[-1] <= 1.05 * means.min()
        assert means[-1] < means[0]

    def test_single_run_zero_iterations(self, tmp_path):
        out = tmp_path / "tiny"
        code = main(["example1", "--p", "8", "--m", "16", "--runs", "1",
                     "--iters", "0", "--levels", "0.1", "--out", str(out)])
        assert code == 0
        iters, means = read_csv(out / "ex1_0.1_const.csv")
        assert list(iters) == [0] and means.size == 1

    def test_io_failure_reports_path(self, tmp_path, capsys):
        blocker = tmp_path / "not_a_dir"
        blocker.write_text("occupied")
        code = main(["example1", "--p", "8", "--m", "16", "--runs", "1",
                     "--iters", "5", "--levels", "0.1", "--out", str(blocker)])
        assert code == 1
        assert str(blocker) in capsys.readouterr().err


class TestExample2Command:
    def test_writes_expected_files(self, tmp_path):
        out = tmp_path / "run"
        code = main(["example2", "--p", "40", "--runs", "2", "--iters", "80",
                     "--policy", "dp", "--levels", "0.1", "--out", str(out),
                     "--seed", "3"])
        assert code == 0
        for name in ("ex2_0.1_entropy.csv", "ex2_0.1_entropy-DP.csv", "ex2.svg"):
            assert (out / name).exists()


class TestCompareSgd:
    def test_runs_and_writes(self, tmp_path, capsys):
        out = tmp_path / "cmp"
        code = main(["compare-sgd", "--p", "10", "--m", "20", "--runs", "2",
                     "--iters", "50", "--levels", "0.01", "--out", str(out)])
        assert code == 0
        assert (out / "compare_0.01_shb.csv").exists()
        assert (out / "compare_0.01_sgd.csv").exists()
        assert "ratio=" in capsys.readouterr().out


class TestVerificationCommands:
    def test_oracle_check_passes(self, capsys):
        code = main(["oracle-check", "--runs", "1500", "--iters", "4", "--seed", "11"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("oracle-check: PASS")

    def test_stability_check_passes(self, capsys):
        code = main(["stability-check", "--runs", "60", "--iters", "120", "--seed", "11"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("stability-check: PASS")

    def test_rate_check_trivial_with_zero_representer(self, capsys):
        code = main(["rate-check", "--lam-scale", "0", "--seed", "11"])
        out = capsys.readouterr().out
        assert code == 0
        assert "trivial" in out

    def test_rate_check_small_instance(self, capsys):
        code = main(["rate-check", "--p", "8", "--m", "16", "--runs", "60",
                     "--iters", "400", "--seed", "11"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("rate-check: PASS")

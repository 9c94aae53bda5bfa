import shutil
import subprocess

import numpy as np
import pytest

from tsetlinkit.cli import cli_main
from tsetlinkit.dataio import load_model, save_dense, save_sparse

from conftest import random_sparse_dataset, xor_dataset

CC = shutil.which("cc") or shutil.which("gcc")


@pytest.fixture
def xor_files(tmp_path):
    (tx, ty), (ex, ey) = xor_dataset(400, 100)
    train_path = tmp_path / "train.csv"
    eval_path = tmp_path / "eval.csv"
    save_dense(tx, ty, train_path)
    save_dense(ex, ey, eval_path)
    return train_path, eval_path


TRAIN_FLAGS = ["--literals", "6", "--clauses", "8", "--classes", "2",
               "--s", "1.9", "--threshold", "11", "--budget", "3",
               "--epochs", "3", "--seed", "42", "--jobs", "-1"]


class TestTrain:
    def test_listing_flags_three_epoch_lines(self, xor_files, capsys):
        train_path, eval_path = xor_files
        code = cli_main(["train", "--data", str(train_path),
                         "--eval", str(eval_path), *TRAIN_FLAGS])
        out = capsys.readouterr().out
        assert code == 0
        epoch_lines = [l for l in out.splitlines() if l.startswith("epoch ")]
        assert len(epoch_lines) == 3
        assert all(" acc " in l and " time_s " in l for l in epoch_lines)

    def test_config_echo_includes_defaults(self, xor_files, capsys):
        train_path, _ = xor_files
        cli_main(["train", "--data", str(train_path), "--epochs", "1"])
        out = capsys.readouterr().out
        config_line = next(l for l in out.splitlines()
                           if l.startswith("config: "))
        for token in ("n_literals=6", "n_classes=2", "seed=0",
                      "n_jobs=-1", "backend="):
            assert token in config_line

    def test_save_and_reload(self, xor_files, tmp_path, capsys):
        train_path, eval_path = xor_files
        model_path = tmp_path / "m.bin"
        code = cli_main(["train", "--data", str(train_path),
                         "--eval", str(eval_path), *TRAIN_FLAGS,
                         "--save", str(model_path)])
        assert code == 0 and model_path.exists()
        load_model(model_path)

    def test_sparse_flag(self, tmp_path, capsys):
        data = random_sparse_dataset(30, 80, data_seed=4)
        p = tmp_path / "s.txt"
        save_sparse(data, p)
        code = cli_main(["train", "--data", str(p), "--sparse",
                         "--clauses", "6", "--epochs", "1"])
        assert code == 0


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert cli_main(["train", "--nonsense"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_subcommand(self, capsys):
        assert cli_main([]) == 1

    def test_missing_file_is_data_error(self, capsys):
        assert cli_main(["train", "--data", "/nonexistent.csv"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_data_is_data_error(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("1,7,0\n")
        assert cli_main(["train", "--data", str(p)]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error:")

    def test_bad_model_file(self, tmp_path, xor_files, capsys):
        train_path, _ = xor_files
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"JUNKJUNKJUNK")
        assert cli_main(["predict", "--model", str(bad),
                         "--data", str(train_path)]) == 2


class TestPredictExport:
    @pytest.fixture
    def trained_model(self, xor_files, tmp_path):
        train_path, eval_path = xor_files
        model_path = tmp_path / "m.bin"
        cli_main(["train", "--data", str(train_path), "--eval",
                  str(eval_path), *TRAIN_FLAGS, "--save", str(model_path)])
        return model_path

    def test_predict_lines(self, trained_model, xor_files, capsys):
        _, eval_path = xor_files
        code = cli_main(["predict", "--model", str(trained_model),
                         "--data", str(eval_path)])
        out = capsys.readouterr().out
        assert code == 0
        preds = [l for l in out.splitlines() if l.startswith("pred ")]
        assert len(preds) == 100
        assert any(l.startswith("accuracy ") for l in out.splitlines())

    def test_predict_with_explanation(self, trained_model, xor_files,
                                      tmp_path, capsys):
        _, eval_path = xor_files
        out_path = tmp_path / "preds.txt"
        code = cli_main(["predict", "--model", str(trained_model),
                         "--data", str(eval_path), "--explain", "feature",
                         "--out", str(out_path)])
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert all("scores" in l for l in lines)
        assert len(lines[0].split("scores")[1].split(",")) == 6

    def test_export_rules_text(self, trained_model, tmp_path, capsys):
        out = tmp_path / "rules.txt"
        code = cli_main(["export", "--model", str(trained_model),
                         "--out", str(out), "--rules-text"])
        assert code == 0
        assert ":" in out.read_text()

    def test_export_header_deterministic(self, trained_model, tmp_path,
                                         capsys):
        a, b = tmp_path / "a.h", tmp_path / "b.h"
        assert cli_main(["export", "--model", str(trained_model),
                         "--out", str(a), "--prefix", "xor"]) == 0
        assert cli_main(["export", "--model", str(trained_model),
                         "--out", str(b), "--prefix", "xor"]) == 0
        assert a.read_text() == b.read_text()
        assert "xor_predict" in a.read_text()

    @pytest.mark.skipif(CC is None, reason="no C99 toolchain available")
    def test_export_compile_and_match_predict(self, trained_model, xor_files,
                                              tmp_path, capsys):
        _, eval_path = xor_files
        header = tmp_path / "rules.h"
        assert cli_main(["export", "--model", str(trained_model),
                         "--out", str(header), "--prefix", "tm"]) == 0
        capsys.readouterr()
        assert cli_main(["predict", "--model", str(trained_model),
                         "--data", str(eval_path)]) == 0
        pred_lines = [int(l.split()[1]) for l in
                      capsys.readouterr().out.splitlines()
                      if l.startswith("pred ")]

        driver = tmp_path / "main.c"
        driver.write_text("""
#include <stdio.h>
#include <string.h>
#include "rules.h"
int main(void) {
    char line[4096];
    uint8_t x[1024];
    while (fgets(line, sizeof line, stdin)) {
        size_t width = 0, i;
        for (i = 0; i < strlen(line); ++i)
            if (line[i] == '0' || line[i] == '1')
                x[width++] = (uint8_t)(line[i] - '0');
        if (width) printf("%d\\n", tm_predict(x));
    }
    return 0;
}
""")
        exe = tmp_path / "runner"
        subprocess.run([CC, "-std=c99", "-O1", "-o", str(exe), str(driver)],
                       check=True, capture_output=True, cwd=tmp_path)
        from tsetlinkit.dataio import load_dense
        x, _ = load_dense(eval_path)
        stdin = "\n".join("".join(str(v) for v in row) for row in x)
        got = subprocess.run([str(exe)], input=stdin + "\n", text=True,
                             capture_output=True, check=True)
        c_preds = [int(v) for v in got.stdout.split()]
        assert c_preds == pred_lines


class TestSearchCvBench:
    def test_search_ranked_output(self, xor_files, tmp_path, capsys):
        train_path, _ = xor_files
        space = tmp_path / "space.txt"
        space.write_text("s uniform 1.5 4.0\nthreshold int 5 15\n")
        code = cli_main(["search", "--data", str(train_path), "--space",
                         str(space), "--trials", "3", "--epochs", "1",
                         "--clauses", "8", "--seed", "7", "--jobs", "1"])
        out = capsys.readouterr().out
        assert code == 0
        ranked = [l for l in out.splitlines() if l.startswith("rank ")]
        assert len(ranked) == 3

    def test_cv_report(self, xor_files, capsys):
        train_path, _ = xor_files
        code = cli_main(["cv", "--data", str(train_path), "--k", "2",
                         "--epochs", "1", "--clauses", "8", "--jobs", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert len([l for l in out.splitlines()
                    if l.startswith("fold ")]) == 2
        assert any(l.startswith("mean ") for l in out.splitlines())

    def test_bench_table(self, xor_files, capsys):
        train_path, eval_path = xor_files
        code = cli_main(["bench", "--data", str(train_path), "--eval",
                         str(eval_path), "--clauses-list", "4,8",
                         "--jobs-list", "1,2", "--epochs", "1"])
        out = capsys.readouterr().out
        assert code == 0
        rows = [l for l in out.splitlines()
                if l and l[0].isdigit()]
        assert len(rows) == 2
        assert all("x" in row for row in rows)  # speedup column

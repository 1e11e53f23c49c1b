import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dscatter.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    EvolveConfig,
    GridConfig,
    RunConfig,
    dumps_json,
    main,
    make_parser,
    read_csv,
)
from dscatter.errors import ConfigError

SMALL = ["--L", "20", "--N-x", "1025", "--N-k", "257", "--k-max", "4"]


def test_classify_reports_both_classes(tmp_path, capsys):
    assert main(["classify", "--potential", "square_well_pair", "--out", str(tmp_path)] + SMALL) == EXIT_OK
    rep = json.loads((tmp_path / "classify.json").read_text())
    assert rep["classification"] == "exceptional"
    assert rep["T0"] == pytest.approx([1.0, 0.0]) and rep["R0"] == pytest.approx([0.0, 0.0], abs=1e-12)
    assert json.loads(capsys.readouterr().out) == rep
    assert main(["classify", "--potential", "gaussian", "--out", str(tmp_path)] + SMALL) == EXIT_OK
    rep = json.loads((tmp_path / "classify.json").read_text())
    assert rep["classification"] == "generic" and rep["a"] is None and rep["R0"] == pytest.approx([-1.0, 0.0])


def test_scatter_csv_is_lossless(tmp_path):
    assert main(["scatter", "--out", str(tmp_path), "--seed", "7"] + SMALL) == EXIT_OK
    header, cols, meta = read_csv(tmp_path / "scatter.csv")
    assert header[:3] == ["k", "T_re", "T_im"]
    assert meta["seed"] == "7" and meta["N_x"] == "1025" and meta["classification"] == "exceptional"
    k = np.array(cols[0])
    assert k[0] == 0.0 and len(k) == 129
    assert np.max(np.array(cols[-1])[1:]) < 1e-10
    # 17 significant digits: re-reading the printed floats reproduces them exactly
    text = (tmp_path / "scatter.csv").read_text().splitlines()[1].split(",")
    assert [format(v, ".17g") for v in (c[0] for c in cols)] == text


def test_scatter_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["scatter", "--out", str(d)] + SMALL) == EXIT_OK
    assert (a / "scatter.csv").read_bytes() == (b / "scatter.csv").read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert main(["scatter", "--out", str(tmp_path), "--N-x", "64"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["scatter", "--out", str(tmp_path), "--potential", str(bad)] + SMALL) in (EXIT_CONFIG, EXIT_IO)
    assert main(["scatter", "--config", str(tmp_path / "missing.toml")]) == EXIT_IO
    assert main(["scatter", "--out", str(tmp_path), "--tol", "1e-30"] + SMALL) == EXIT_NUMERIC
    err = capsys.readouterr().err
    assert "UnitarityDefect" in err


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('seed = 3\n[potential]\nkind = "gaussian"\n[grid]\nL = 20.0\nN_x = 1025\nN_k = 257\nk_max = 4.0\n')
    assert main(["scatter", "--config", str(cfg), "--out", str(tmp_path), "--seed", "5"]) == EXIT_OK
    _, _, meta = read_csv(tmp_path / "scatter.csv")
    assert meta["seed"] == "5" and "gaussian" in meta["potential"] and meta["classification"] == "generic"
    cfg.write_text("[grid]\nbogus = 1\n")
    assert main(["scatter", "--config", str(cfg)]) == EXIT_CONFIG
    cfg.write_text("colour = 1\n")
    assert main(["scatter", "--config", str(cfg)]) == EXIT_CONFIG


@settings(max_examples=30, deadline=None)
@given(L=st.floats(1.0, 1e3), p=st.integers(4, 14), q=st.integers(4, 14), kmax=st.floats(0.5, 50.0),
       lam=st.sampled_from([-1.0, 1.0]), eps=st.floats(1e-3, 1.0), seed=st.integers(0, 2**31))
def test_config_round_trip(L, p, q, kmax, lam, eps, seed):
    c = RunConfig(grid=GridConfig(L, 2**p + 1, 2**q + 1, kmax), evolve=EvolveConfig(lam=lam, epsilon=eps),
                  seed=seed)
    d = json.loads(dumps_json(c.to_dict()))
    assert RunConfig.from_dict(d) == c


def test_grid_validation():
    with pytest.raises(ConfigError):
        GridConfig(N_x=1000).validate()
    with pytest.raises(ConfigError):
        GridConfig(L=-1).validate()


def test_help_documents_exit_codes(capsys):
    with pytest.raises(SystemExit):
        make_parser().parse_args(["scatter", "--help"])
    out = capsys.readouterr().out
    for code in ("0", "1", "2", "3"):
        assert code in out
    assert "DSCATTER_THREADS" in out


def test_dump_psi(tmp_path):
    dump = tmp_path / "psi.bin"
    assert main(["scatter", "--out", str(tmp_path), "--dump-psi", str(dump)] + SMALL) == EXIT_OK
    assert dump.stat().st_size >= 1025 * 257 * 16


def test_evolve_writes_norms_and_snapshots(tmp_path):
    args = ["evolve", "--out", str(tmp_path), "--L", "128", "--N-x", "4097", "--N-k", "4097",
            "--k-max", str(np.pi / (2 * 256 / 4096)), "--tmax", "10", "--epsilon", "0.05"]
    assert main(args) == EXIT_OK
    header, cols, meta = read_csv(tmp_path / "norms.csv")
    assert header[0] == "t" and cols[0][-1] == pytest.approx(10.0)
    m = np.array(cols[header.index("mass")])
    assert np.max(np.abs(m / m[0] - 1)) < 1e-6
    assert (tmp_path / "snapshot_x_t10.csv").exists() and (tmp_path / "snapshot_k_t10.csv").exists()
    assert meta["parity"] == "odd"


def test_selftest_subset(capsys):
    assert main(["selftest", "--only", "10"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[PASS] 10" in out and "1/1 checks passed" in out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "dscatter", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "selftest" in r.stdout

import configparser
import csv
import json
import math

import pytest

from varprof import __version__
from varprof.cli import main
from varprof.config import from_mapping, load_config
from varprof.errors import ConfigError
from varprof.experiments import sweep_bound
from varprof.presets import PRESETS, load_preset


def write_ini(path, text):
    path.write_text(text)
    return path


def read_rows(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


CLT_SMALL = """
[experiment]
kind = clt
seed = 3
replicas = 60

[profile]
family = band
n = 24
band = 4

[ensemble]
kind = symmetric
law = gaussian

[polynomial]
k = 2, 3
"""


class TestCommands:
    def test_list_presets(self, capsys):
        assert main(["list-presets"]) == 0
        out = capsys.readouterr().out
        for name in ("corollary-3.1", "corollary-3.4-band", "corollary-3.8", "remark-4.2-i", "remark-4.2-ii",
                     "remark-4.2-iii", "remark-4.3"):
            assert name in out

    def test_structural_zero_preset(self, tmp_path):
        out = tmp_path / "rz"
        assert main(["preset", "remark-4.2-ii", "--out", str(out)]) == 0
        header, rows = read_rows(out / "structural_zero.csv")
        cfg = load_preset("remark-4.2-ii")
        assert header == f"# varprof {__version__} config={cfg.hash} name=remark-4.2-ii kind=structural-zero"
        assert [int(r["k"]) for r in rows] == list(range(1, 8))
        assert [r["constant"] for r in rows] == ["true"] * 4 + ["false"] + ["true"] * 2
        meta = json.loads((out / "structural_zero.json").read_text())
        assert meta["config_hash"] == cfg.hash and meta["version"] == __version__
        assert (out / "structural_zero.png").stat().st_size > 0
        assert load_config(out / "config.ini").hash == cfg.hash

    def test_invalid_law(self, tmp_path, capsys):
        cfg = write_ini(tmp_path / "c.ini", CLT_SMALL.replace("law = gaussian", "law = cauchy"))
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "[ensemble] law" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_malformed_line(self, tmp_path, capsys):
        cfg = write_ini(tmp_path / "c.ini", "[experiment]\nkind = clt\nthis is not a pair\n")
        assert main(["run", str(cfg)]) == 2
        assert "line" in capsys.readouterr().err

    @pytest.mark.parametrize("old,new,field", [
        ("band = 4", "band = 4\nwidth = 3", "[profile] width"),
        ("replicas = 60", "replicas = many", "[experiment] replicas"),
        ("kind = clt", "kind = histogram", "[experiment] kind"),
        ("band = 4", "band = 30", "[profile] band"),
        ("k = 2, 3", "k = 0", "[polynomial] k"),
        ("n = 24", "n = 24, 48", "[profile] n"),
    ])
    def test_field_diagnostics(self, tmp_path, capsys, old, new, field):
        cfg = write_ini(tmp_path / "c.ini", CLT_SMALL.replace(old, new))
        assert main(["run", str(cfg)]) == 2
        assert field in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.ini")]) == 2

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["preset", "bound-sweep", "--out", str(blocker / "sub")]) == 2

    def test_unknown_preset(self):
        assert main(["preset", "corollary-9.9"]) == 2

    def test_n_override_rejected_for_embedding(self):
        assert main(["preset", "corollary-3.6", "--n", "10"]) == 2

    def test_check_failure_exit_code(self, tmp_path):
        cfg = write_ini(tmp_path / "c.ini", CLT_SMALL + "\n[checks]\nks_max = 0.0001\n")
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 1
        run = json.loads((tmp_path / "o" / "run.json").read_text())
        assert run["status"] == 1 and run["failures"]


class TestReproducibility:
    def test_byte_identical_bodies(self, tmp_path, monkeypatch):
        cfg = write_ini(tmp_path / "c.ini", CLT_SMALL)
        monkeypatch.setenv("VARPROF_WORKERS", "1")
        assert main(["run", str(cfg), "--out", str(tmp_path / "a")]) == 0
        monkeypatch.setenv("VARPROF_WORKERS", "4")
        assert main(["run", str(cfg), "--out", str(tmp_path / "b")]) == 0
        for name in ("clt_k2.csv", "clt_k3.csv", "clt_k2_hist.csv"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b and a.startswith(b"# varprof ")

    def test_outputs_carry_hash(self, tmp_path):
        cfg = write_ini(tmp_path / "c.ini", CLT_SMALL)
        assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
        h = load_config(cfg).hash
        for p in (tmp_path / "o").iterdir():
            if p.suffix == ".csv":
                assert f"config={h}" in p.read_text().splitlines()[0]
            elif p.suffix == ".json":
                assert json.loads(p.read_text())["config_hash"] == h
        assert (tmp_path / "o" / "clt_k2.png").exists()

    def test_ini_round_trip(self):
        for name in PRESETS:
            cfg = load_preset(name)
            cp = configparser.ConfigParser(interpolation=None)
            cp.read_string(cfg.to_ini())
            again = from_mapping({s: dict(cp[s]) for s in cp.sections()})
            assert again.hash == cfg.hash, name

    def test_hash_ignores_output_location(self):
        a = load_preset("bound-sweep")
        a.out = "/somewhere"
        assert a.hash == load_preset("bound-sweep").hash
        assert load_preset("bound-sweep", seed=5).hash != a.hash


class TestSweep:
    def test_all_ones(self):
        rows = sweep_bound(load_preset("bound-sweep"))
        rhs = [r["rhs"] for r in rows]
        assert [r["n"] for r in rows] == [100, 400, 1600]
        for a, b in zip(rhs, rhs[1:]):
            assert b / a == pytest.approx(0.5, rel=0.02)

    def test_band_exponent(self):
        rows = sweep_bound(load_preset("bound-sweep-band"))
        assert [r["b_n"] for r in rows] == [2 * math.ceil(n ** 0.8) + 1 for n in (100, 400, 1600)]
        rhs = [r["rhs"] for r in rows]
        for a, b in zip(rhs, rhs[1:]):
            assert b / a == pytest.approx(0.5, rel=0.05)

    def test_vacuous_rows_flagged(self, tmp_path):
        assert main(["preset", "bound-sweep-remark-4.2-ii", "--out", str(tmp_path)]) == 0
        _, rows = read_rows(tmp_path / "bound_sweep.csv")
        assert rows and all(r["status"] == "vacuous" and r["rhs"] == "nan" for r in rows)
        assert list(rows[0]) == ["n", "k", "max_a", "b_n", "s_k", "rhs", "status"]


SMALL_KINDS = {
    "norm-check": """
[experiment]
kind = norm-check
seed = 1
[profile]
family = all-ones
n = 40
[ensemble]
kind = symmetric
[norm]
trials = 30
t = 1.0
[checks]
ratio_max = 3.0
""",
    "variance-check": """
[experiment]
kind = variance-check
replicas = 800
[profile]
family = band
n = 12
band = 2
[ensemble]
kind = iid
[polynomial]
k = 2, 3
""",
    "cycle-oracle": """
[experiment]
kind = cycle-oracle
[polynomial]
k = 2, 3
[oracle]
cases = 10
n_max = 6
density = 0.5
""",
    "er-concentration": """
[experiment]
kind = er-concentration
[profile]
family = erdos-renyi
n = 200
p = 0.3
[polynomial]
k = 3
[graph]
graphs = 5
""",
    "embedding": """
[experiment]
kind = embedding
replicas = 100
[ensemble]
kind = iid
[polynomial]
coeffs = 1, 0, 1
[embedding]
type = product
dims = 6, 5, 7
""",
}


@pytest.mark.parametrize("kind", sorted(SMALL_KINDS))
def test_every_kind_runs(tmp_path, kind):
    cfg = write_ini(tmp_path / "c.ini", SMALL_KINDS[kind])
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    files = {p.suffix for p in (tmp_path / "o").iterdir()}
    assert {".csv", ".json", ".png", ".ini"} <= files


def test_config_requires_compliant_law_for_embedding():
    with pytest.raises(ConfigError, match=r"\[ensemble\] law"):
        from_mapping({"experiment": {"kind": "embedding"}, "ensemble": {"law": "uniform01"},
                      "embedding": {"type": "covariance", "dims": "3, 4"}})


def test_symmetric_ensemble_needs_symmetric_profile():
    with pytest.raises(ConfigError, match=r"\[ensemble\] kind"):
        from_mapping({"experiment": {"kind": "clt"}, "ensemble": {"kind": "symmetric"},
                      "profile": {"family": "remark42", "variant": "ii", "n": "10"}})


def test_profile_from_file(tmp_path):
    from varprof.profiles import make_band, save_profile

    save_profile(make_band(10, 2), tmp_path / "p.txt")
    cfg = from_mapping({"experiment": {"kind": "bound-sweep"},
                        "profile": {"family": "file", "path": str(tmp_path / "p.txt")},
                        "polynomial": {"k": "2"}})
    row = sweep_bound(cfg)[0]
    assert row["n"] == 10 and row["s_k"] == 40
    with pytest.raises(ConfigError, match=r"\[profile\] path"):
        from_mapping({"experiment": {"kind": "bound-sweep"},
                      "profile": {"family": "file", "path": str(tmp_path / "missing.txt")}})

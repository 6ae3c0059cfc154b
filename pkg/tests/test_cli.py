import json
import subprocess
import sys

import numpy as np
import pytest

from stabverify.builders import build_basis_complex, build_splitting
from stabverify.cache import Cache, CacheError
from stabverify.cli import run
from stabverify.rings import parse_ring


def report(tmp_path, argv):
    out = tmp_path / "r.json"
    code = run(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_ring_rejects_z1(capsys):
    assert run(["ring", "--spec", "Z/1"]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_ring_exits_2():
    assert run(["steinberg", "--ring", "UT2", "--n", "2"]) == 2


def test_ring_report(tmp_path):
    code, rep = report(tmp_path, ["ring", "--spec", "Z/6"])
    assert code == 0
    assert rep["status"] == "pass"
    for key in ("schema_version", "tool_version", "command", "ring", "arguments", "created", "records", "anchors"):
        assert key in rep


def test_verify_cm(tmp_path):
    code, rep = report(tmp_path, ["verify-cm", "--ring", "F_2", "--complex", "B", "--n", "3"])
    assert code == 0 and rep["status"] == "pass"
    assert rep["records"][0]["witness"]["f_vector"] == [7, 21, 28]
    assert rep["records"][0]["witness"]["flag"] == "homology-proxy"


def test_homology_relative(tmp_path):
    code, rep = report(tmp_path, ["homology", "--ring", "F_2", "--complex", "BX", "--n", "2", "--m", "1",
                                  "--relative-to", "B"])
    assert code == 0


def test_coinvariants_half(tmp_path):
    code, rep = report(tmp_path, ["coinvariants", "--ring", "F_2", "--module", "St", "--n", "2", "--coeff", "half"])
    assert code == 0 and rep["status"] == "pass"


def test_stability_csv(tmp_path):
    out = tmp_path / "s.json"
    assert run(["stability", "--ring", "F_2", "--n", "2", "--max-degree", "1", "--coeff", "Fp:3",
                "--out", str(out)]) == 0
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "n,i,dim_prev,dim_cur,dim_rel_i,verdict"
    assert len(rows) == 1 + 2 * 2


def test_config_file(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("ring: F_3\nn: 2\ncomplex: T\n")
    code, rep = report(tmp_path, ["verify-cm", "--config", str(cfg)])
    assert code == 0 and rep["ring"] == "F_3"


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["verify-cm", "--config", str(cfg)]) == 2


def test_unknown_profile():
    assert run(["suite", "--profile", "nope"]) == 2


def test_smoke_suite(tmp_path):
    code, rep = report(tmp_path, ["suite", "--profile", "smoke"])
    assert code == 0
    assert {r["criterion"] for r in rep["records"]} == set(range(1, 12))


def test_guard_gives_infeasible(tmp_path):
    code, rep = report(tmp_path, ["build", "--ring", "F_3", "--complex", "B", "--n", "9", "--guard", "1000"])
    assert rep["records"][0]["status"] in ("infeasible", "fail")
    assert code in (0, 1, 2)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "stabverify", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "stabverify" in r.stdout


@pytest.mark.parametrize("builder", [
    lambda: build_basis_complex(parse_ring("F_2"), 3),
    lambda: build_splitting(parse_ring("F_2"), 3).order_complex(),
])
def test_cache_roundtrip(tmp_path, builder):
    x = builder()
    c = Cache(tmp_path, "write")
    key = Cache.key("complex", name=x.name)
    c.store_complex(key, x)
    y = c.load_complex(key, parse_ring("F_2"))
    assert y is not None and y.same_as(x)
    assert [y.payload(v) for v in range(y.num_vertices)] == [x.payload(v) for v in range(x.num_vertices)]


def test_cache_corruption_rebuilds(tmp_path, caplog):
    x = build_basis_complex(parse_ring("F_2"), 2)
    c = Cache(tmp_path, "write")
    key = Cache.key("complex", kind="B")
    c.store_complex(key, x)
    (tmp_path / f"{key}.npz").write_bytes(b"garbage")
    assert c.load_complex(key, parse_ring("F_2")) is None
    assert "corrupt" in caplog.text
    calls = []
    y = c.complex(key, parse_ring("F_2"), lambda: calls.append(1) or x)
    assert calls and y.same_as(x)


def test_cache_read_mode_never_writes(tmp_path):
    c = Cache(tmp_path / "sub", "read")
    c.store_json("k", {"a": 1})
    assert not (tmp_path / "sub").exists()


def test_cache_off(tmp_path):
    c = Cache(tmp_path, "off")
    assert not c.enabled
    assert c.load_json("k") is None


def test_cache_bad_mode(tmp_path):
    with pytest.raises(CacheError):
        Cache(tmp_path, "sometimes")


def test_cache_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("STABVERIFY_CACHE", str(tmp_path / "env"))
    c = Cache(tmp_path / "flag", "write")
    assert c.root == tmp_path / "env"


def test_snf_cache(tmp_path):
    c = Cache(tmp_path, "write")
    a = np.array([[2, 4], [6, 8]])
    first = c.snf(a)
    again = Cache(tmp_path, "read").snf(a)
    assert first[0] == again[0] == (2, 4)


def test_cli_cache_roundtrip(tmp_path):
    argv = ["verify-cm", "--ring", "F_2", "--complex", "B", "--n", "3", "--cache", str(tmp_path / "c")]
    assert run(argv + ["--out", str(tmp_path / "a.json")]) == 0
    assert list((tmp_path / "c").glob("*.npz"))
    assert run(argv + ["--cache-mode", "read", "--out", str(tmp_path / "b.json")]) == 0

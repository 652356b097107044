import json

import numpy as np
import pytest

from mmsample import Discretization, Net, NerveComplex, build_from_points
from mmsample import io
from mmsample.cli import main


@pytest.fixture
def line_csv(tmp_path):
    p = tmp_path / "line.csv"
    io.write_points_csv(p, [[0.0], [1.0], [2.0], [3.0]])
    return p


@pytest.fixture
def grid_csv(tmp_path):
    c = (np.arange(12) + 0.5) / 12
    x, y = np.meshgrid(c, c, indexing="ij")
    p = tmp_path / "grid.csv"
    io.write_points_csv(p, np.c_[x.ravel(), y.ravel()], np.full(144, 1 / 144))
    return p


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_net_happy_path(capsys, line_csv, tmp_path):
    code, out, _ = _run(capsys, "net", line_csv, "--eps", 1.0, "--seed", 0)
    assert code == 0
    doc = json.loads(out)
    assert doc["centers"] == ["0", "3"] and doc["covering_radius"] == 1
    out_path = tmp_path / "net.json"
    assert _run(capsys, "net", line_csv, "--eps", 1.0, "--out", out_path)[0] == 0
    space = io.read_space(line_csv)
    assert Net.from_dict(io.read_json(out_path), space).centers == (0, 3)


def test_validate_asymmetric(capsys, tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("0,1,2\n1.5,0,1\n2,1,0\n")
    code, out, err = _run(capsys, "validate", p)
    assert code == 2
    assert "asymmetric pair (0, 1)" in err
    assert json.loads(out)["symmetric"] is False


def test_validate_ok(capsys, line_csv):
    code, out, _ = _run(capsys, "validate", line_csv)
    assert code == 0 and json.loads(out)["ok"] is True


def test_missing_input(capsys, tmp_path):
    code, _, err = _run(capsys, "net", tmp_path / "nope.csv", "--eps", 1)
    assert code == 2 and "does not exist" in err


def test_domain_error(capsys, line_csv):
    code, _, err = _run(capsys, "net", line_csv, "--eps", -1)
    assert code == 3 and err


def test_missing_parameter(capsys, line_csv):
    code, _, err = _run(capsys, "net", line_csv)
    assert code == 2 and "--eps" in err


def test_gh_size_guard(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_points_csv(a, np.arange(10.0)[:, None])
    io.write_points_csv(b, np.arange(10.0)[:, None] * 2)
    code, _, err = _run(capsys, "distance", "--kind", "gh", "--space", a, "--space2", b)
    assert code == 4 and "14" in err


def test_gh_small(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    io.write_points_csv(a, [[0.0], [1.0]])
    io.write_points_csv(b, [[0.0], [3.0]])
    code, out, _ = _run(capsys, "distance", "--kind", "gh", "--space", a, "--space2", b)
    doc = json.loads(out)
    assert code == 0 and doc["value"] == 1 and doc["method"] == "brute_force"
    assert len(doc["correspondence"]) >= 2


def test_measure_distances(capsys, tmp_path):
    s = tmp_path / "s.csv"
    io.write_points_csv(s, [[0.0], [1.0]])
    mu, nu = tmp_path / "mu.csv", tmp_path / "nu.csv"
    io.write_vector_csv(mu, [1, 0])
    io.write_vector_csv(nu, [1, 1])
    cpl = tmp_path / "plan.csv"
    code, out, _ = _run(capsys, "distance", "--kind", "w2", "--space", s, "--mu", mu, "--nu", nu, "--coupling-out", cpl)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(2**-0.5)
    np.testing.assert_allclose(io.read_matrix_csv(cpl), [[0.5, 0.5], [0, 0]], atol=1e-12)
    for kind, want in [("hausdorff", 1.0), ("prokhorov", 0.5), ("ghp", 1.5)]:
        code, out, _ = _run(capsys, "distance", "--kind", kind, "--space", s, "--mu", mu, "--nu", nu)
        assert code == 0 and json.loads(out)["value"] == pytest.approx(want, abs=1e-6)


def test_snowflake_outputs(capsys, line_csv, tmp_path):
    code, out, _ = _run(capsys, "snowflake", line_csv, "--s", 0.5, "--variant", "plain_snowflake", "--chain")
    doc = json.loads(out)
    assert code == 0 and doc["K"] == 1 and doc["chain"]["max_ratio"] == 1
    q = tmp_path / "q.csv"
    assert _run(capsys, "snowflake", line_csv, "--s", 0.5, "--out", q, "--chain")[0] == 0
    back = io.read_quasimetric(q)
    assert back.s == 0.5 and back.variant == "general"
    assert "remark_bound" in io.read_json(tmp_path / "q.chain.json")


def test_regularity_and_curvature(capsys, grid_csv, tmp_path):
    code, out, _ = _run(capsys, "regularity", grid_csv, "--n-radii", 6)
    assert code == 0 and json.loads(out)["measure_doubling_D"] >= 1
    table = tmp_path / "t.csv"
    code, out, _ = _run(capsys, "curvature", "--K", 0, "--N", 2, "--D", 1.0, "--eps", 0.1, "--table", table, "--table-points", 5)
    doc = json.loads(out)
    assert code == 0 and doc["bounds"]["n2"] == 81
    rows = table.read_text().splitlines()
    assert rows[0] == "t,S,int_S" and len(rows) == 6
    code, _, _ = _run(capsys, "curvature", "--K", 1, "--N", 2, "--D", 4.0, "--eps", 0.1)
    assert code == 3


def test_discretize_and_nerve(capsys, line_csv, tmp_path):
    nerve = tmp_path / "n.off"
    out_path = tmp_path / "disc.json"
    code, _, _ = _run(capsys, "discretize", line_csv, "--eps", 1.0, "--nerve-out", nerve, "--out", out_path)
    assert code == 0
    doc = io.read_json(out_path)
    assert doc["w2_to_original"] == pytest.approx(0.5**0.5)
    assert doc["mesh"] == 2 and doc["order"] == 1
    space = io.read_space(line_csv)
    assert Discretization.from_dict(doc, space).cells == {0: [0, 1], 3: [2, 3]}
    assert NerveComplex.from_off(nerve.read_text(), space).edges == ()
    js = tmp_path / "n.json"
    assert _run(capsys, "discretize", line_csv, "--eps", 1.0, "--nerve-out", js)[0] == 0
    assert NerveComplex.from_dict(io.read_json(js), space).vertices == (0, 3)


def test_embed_outputs(capsys, tmp_path):
    p = tmp_path / "sq.csv"
    io.write_points_csv(p, [[0, 0], [1, 0], [0, 1], [1, 1]])
    out_path = tmp_path / "emb.json"
    assert _run(capsys, "embed", p, "--eps", 1, "--dim", 2, "--out", out_path)[0] == 0
    doc = io.read_json(out_path)
    assert doc["distortion_L"] <= 1.02
    coords = io.read_points_csv(doc["coords"]).coords
    assert coords.shape == (4, 2)
    code, _, _ = _run(capsys, "embed", p, "--eps", 1.5, "--dim", 2)
    assert code == 3


def test_byte_identical_outputs(capsys, grid_csv, tmp_path):
    outs = []
    for k in range(2):
        o = tmp_path / f"r{k}.json"
        assert _run(capsys, "report", grid_csv, "--out", o)[0] == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
    for k in range(2):
        o = tmp_path / f"e{k}.json"
        assert _run(capsys, "embed", grid_csv, "--eps", 0.5, "--dim", 2, "--restarts", 2, "--out", o)[0] == 0
    assert (tmp_path / "e0.json").read_bytes().replace(b"e0", b"e1") == (tmp_path / "e1.json").read_bytes()
    assert (tmp_path / "e0.coords.csv").read_bytes() == (tmp_path / "e1.coords.csv").read_bytes()


def test_report_grid(capsys, grid_csv):
    code, out, _ = _run(capsys, "report", grid_csv)
    doc = json.loads(out)
    assert code == 0 and not doc["degenerate"]
    assert doc["validation"]["ok"]
    assert doc["regime"]["ahlfors_regular"]
    assert doc["regime"]["bishop_gromov_consistent"]
    assert doc["bishop_gromov"]["n_violations"] == 0
    assert doc["bounds_satisfied"] == {"cardinality": True, "covering_order": True}


def test_report_two_clusters(capsys, tmp_path):
    blob = np.array([[i / 4, j / 4] for i in range(5) for j in range(5)])
    p = tmp_path / "two.csv"
    io.write_points_csv(p, np.vstack([blob, blob + [100.0, 0.0]]), np.full(50, 1 / 25))
    code, out, _ = _run(capsys, "report", p)
    doc = json.loads(out)
    assert code == 0
    assert doc["bishop_gromov"]["n_violations"] > 0
    assert not doc["regime"]["bishop_gromov_consistent"]


def test_report_single_point(capsys, tmp_path):
    p = tmp_path / "one.csv"
    io.write_points_csv(p, [[0.0, 0.0]])
    code, out, _ = _run(capsys, "report", p)
    doc = json.loads(out)
    assert code == 0 and doc["degenerate"] is True and doc["n_points"] == 1


def test_thread_cap(capsys, line_csv, monkeypatch):
    monkeypatch.setenv("MMS_THREADS", "1")
    assert _run(capsys, "net", line_csv, "--eps", 1.0)[0] == 0


def test_outputs_roundtrip_through_readers(capsys, line_csv, tmp_path):
    o = tmp_path / "reg.json"
    assert _run(capsys, "regularity", line_csv, "--out", o)[0] == 0
    from mmsample import RegularityReport

    rep = RegularityReport.from_dict(io.read_json(o))
    assert rep.to_dict() == io.read_json(o)
    space = build_from_points([[0.0], [1.0], [2.0], [3.0]])
    assert space.ref == io.read_space(line_csv).ref

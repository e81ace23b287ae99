import io

import numpy as np
import pytest

from ellipt_vne import io as eio
from ellipt_vne.dynamics import integrate
from ellipt_vne.scenarios import d3_known, maxwell_bloch


@pytest.fixture
def traj():
    sc = d3_known(0.5)
    ts = np.linspace(0, 2, 21)
    return integrate(sc.state(0.0), sc.hamiltonian, ts, reference=sc.state)


def test_columns():
    assert eio.trajectory_columns(2) == [
        "t", "re_1_1", "im_1_1", "re_1_2", "im_1_2", "re_2_1", "im_2_1", "re_2_2", "im_2_2",
        "trace_re", "eig_1", "eig_2", "residual",
    ]


def test_csv_roundtrip_is_textually_exact(traj):
    buf = io.StringIO()
    eio.write_trajectory_csv(buf, traj)
    text = buf.getvalue()
    cols, rows = eio.read_trajectory_csv(io.StringIO(text))
    assert cols == eio.trajectory_columns(3)
    again = "\n".join([",".join(cols)] + [",".join(eio.format_float(x) for x in r) for r in rows])
    assert again + "\n" == text
    states = eio.states_from_rows(cols, rows)
    assert np.array_equal(states, traj.states)


def test_json_roundtrip(traj):
    buf = io.StringIO()
    eio.write_trajectory_json(buf, traj, {"scenario": "d3_known"})
    cols, rows, meta = eio.read_trajectory_json(io.StringIO(buf.getvalue()))
    assert meta["scenario"] == "d3_known"
    assert np.array_equal(rows, eio.trajectory_rows(traj))


def test_missing_reference_gives_nan(traj):
    rows = eio.trajectory_rows(traj.with_reference(None))
    assert np.all(np.isnan(rows[:, -1]))
    assert eio.format_float(float("nan")) == "nan"


def test_operator_file_roundtrip(tmp_path):
    sc = maxwell_bloch(2.0, 0.5)
    path = tmp_path / "ops.json"
    eio.write_operators(path, sc.operators(), case=2, omega=sc.omega, k=1.0)
    ops, header = eio.read_operators(path)
    assert header == {"case": 2, "omega": 0.5, "k": 1.0}
    for name, op in sc.operators().items():
        assert np.array_equal(ops[name], op)
    assert eio.infer_case(ops) == 2


def test_operator_entries_object_form():
    doc = {"dim": 1, "operators": {"A": {"entries": [[2.0, 0.0]]}}}
    ops, _ = eio.parse_operators(doc)
    assert ops["A"][0, 0] == 2.0


@pytest.mark.parametrize("doc", [
    [],
    {"dim": 2},
    {"dim": 0, "operators": {}},
    {"dim": 2, "operators": []},
    {"dim": 2, "operators": {"A": [[1, 0]]}},
    {"dim": 1, "operators": {"A": [["x", 0]]}},
    {"dim": 1, "operators": {"A": {"values": []}}},
])
def test_malformed_operator_docs(doc):
    with pytest.raises(eio.FormatError):
        eio.parse_operators(doc)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(eio.FormatError):
        eio.read_operators(p)


def test_infer_case():
    assert eio.infer_case({"B": 0}) == 1
    with pytest.raises(eio.FormatError):
        eio.infer_case({"A": 0})

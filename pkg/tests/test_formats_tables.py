import json

import pytest

from pairbounds.errors import OutOfRange
from pairbounds.formats import load_dataset, load_problem, problem_from_dict, problem_to_dict
from pairbounds.tables import diff_table, half_unit, n11_marks, regenerate_n11


def test_datasets_shape():
    n12 = load_dataset("n12")
    assert len(n12["p"]) == 12 and n12["k"] == list(range(1, 13))
    n11 = load_dataset("n11.json")
    assert n11["n"] == 11 and len(n11["cells"]) == 7
    with pytest.raises(OutOfRange):
        load_dataset("n13")


def test_problem_roundtrip(tmp_path):
    raw = {"p": ["1/2", "1/3", "1/4"], "k": 2, "bivariates": [[0, 1, "1/6"], [0, 2, "1/8"], [1, 2, "1/12"]]}
    prob = problem_from_dict(raw)
    assert prob.p.exact and prob.k == 2
    back = problem_to_dict(prob)
    again = problem_from_dict(json.loads(json.dumps(back)))
    assert again.p == prob.p and again.bivariates.pairs == prob.bivariates.pairs
    path = tmp_path / "prob.json"
    path.write_text(json.dumps(back))
    assert load_problem(path).p == prob.p


def test_problem_fallback_and_errors():
    prob = load_problem("n12.json")
    assert prob.p.n == 12 and prob.k is None
    with pytest.raises(OutOfRange):
        load_problem("/nonexistent/other.json")
    with pytest.raises(OutOfRange):
        problem_from_dict({"k": 1})


def test_n11_marks_match():
    data = load_dataset("n11")
    got = n11_marks()
    for key, expected in data["underlined"].items():
        for row in ("chebyshev", "sss"):
            assert got[key][row] == expected.get(row, []), (key, row)


def test_n11_within_one_printed_unit():
    data = load_dataset("n11")
    rows = regenerate_n11()
    for key, by_row in rows.items():
        for row, values in by_row.items():
            for v, printed in zip(values, data["cells"][key][row]):
                unit = 2 * half_unit(printed, 5)
                assert abs(v - float(printed)) <= unit + 1e-12, (key, row, printed, v)


def test_n12_closed_rows_within_one_printed_unit():
    diff = diff_table("n12", with_lp=False)
    assert len(diff.cells) == 72
    for cell in diff.cells:
        assert cell.error <= 1e-4 + 1e-12, cell


def test_unknown_table():
    with pytest.raises(ValueError):
        diff_table("n10")

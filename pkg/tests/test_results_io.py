import numpy as np
import pytest

from conftest import DATA
from fibbraid.anyon_core import evaluate_braid, parse_braid_string
from fibbraid.braid_search import Objective, SearchConfig, SearchRecord, run_search
from fibbraid.gate_metrics import CNOT_TARGET, decompose, distance_to_gate
from fibbraid.local_invariants import LocalInvariants, class_distance, get_class, invariants_u4
from fibbraid.results_io import (SCHEMAS, ResultRow, TableKind, TableParseError, emit_weyl_points,
                                 read_table, read_weyl_points, rows_from_records, write_table)


def survey_records():
    return run_search(SearchConfig(Objective.survey(), (1, 4), top_k=None)).records


def record_at(g, op="0"):
    return SearchRecord(parse_braid_string(op), 1.0, 0.0, 0.0, LocalInvariants(*g, 0.0), "ID", 0.0)


def test_schemas():
    assert SCHEMAS[TableKind.GATE_SEARCH] == ("Index", "Length", "Operator", "Distance", "Norm11",
                                              "UnitaryMeasure")
    assert SCHEMAS[TableKind.CLASS_SEARCH] == SCHEMAS[TableKind.GATE_SEARCH]
    assert SCHEMAS[TableKind.SURVEY_INVARIANTS] == ("Index", "Length", "Operator", "g1", "g2",
                                                    "g3Re", "g3Im")
    assert SCHEMAS[TableKind.CLOSEST_CLASS] == ("Index", "Length", "Operator", "Distance", "Class",
                                                "Norm11", "UnitaryMeasure")


@pytest.mark.parametrize("kind", list(TableKind))
def test_empty_is_header_only(tmp_path, kind):
    p = write_table([], kind, tmp_path / "t.csv")
    assert p.read_bytes() == (",".join(SCHEMAS[kind]) + "\n").encode()
    assert read_table(p, kind) == []


def test_single_survey_row_for_sigma1(tmp_path):
    res = run_search(SearchConfig(Objective.survey(), 1, top_k=None))
    rec = next(r for r in res if r.operator == "0")
    p = write_table([rec], "survey_invariants", tmp_path / "s.csv")
    (row,) = read_table(p, "survey_invariants")
    assert (row.index, row.length, row.operator) == (1, 1, "0")
    assert (row.g1, row.g2, row.g3re) == pytest.approx((1, 0, 3), abs=1e-10)


@pytest.mark.parametrize("kind", list(TableKind))
def test_round_trip(tmp_path, kind):
    recs = survey_records()
    rows = rows_from_records(recs, kind)
    p = write_table(recs, kind, tmp_path / "t.csv")
    assert read_table(p, kind) == rows
    # rewriting the parsed rows is byte-identical
    q = write_table(read_table(p, kind), kind, tmp_path / "u.csv")
    assert q.read_bytes() == p.read_bytes()


def test_byte_stable_and_lf(tmp_path):
    recs = survey_records()
    a = write_table(recs, "closest_class", tmp_path / "a.csv").read_bytes()
    b = write_table(recs, "closest_class", tmp_path / "b.csv").read_bytes()
    assert a == b
    assert b"\r" not in a
    assert a.decode("utf-8").count("\n") == len(recs) + 1


def test_index_reassigned(tmp_path):
    rows = [ResultRow(7, 1, "0", 0.5, 1.0, 0.0), ResultRow(3, 1, "1", 0.6, 1.0, 0.0)]
    p = write_table(rows, "gate_search", tmp_path / "t.csv")
    assert [r.index for r in read_table(p, "gate_search")] == [1, 2]


def test_full_precision(tmp_path):
    x = 0.1 + 0.2
    rows = [ResultRow(1, 3, "012", x, 1 / 3, 2 ** -50)]
    (back,) = read_table(write_table(rows, "class_search", tmp_path / "t.csv"), "class_search")
    assert (back.distance, back.norm11, back.unitary_measure) == (x, 1 / 3, 2 ** -50)


def test_wrong_field_count_names_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("Index,Length,Operator,Distance,Norm11,UnitaryMeasure\n"
                 "1,1,0,0.5,1,0\n"
                 "2,1,1,0.5,1\n")
    with pytest.raises(TableParseError) as exc:
        read_table(p, "gate_search")
    assert exc.value.line == 3 and "line 3" in str(exc.value)


def test_header_mismatch_and_bad_value(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("Index,Length,Operator,g1,g2,g3Re,g3Im\n")
    with pytest.raises(TableParseError) as exc:
        read_table(p, "gate_search")
    assert exc.value.line == 1
    p.write_text("Index,Length,Operator,Distance,Norm11,UnitaryMeasure\n1,x,0,0,1,0\n")
    with pytest.raises(TableParseError) as exc:
        read_table(p, "gate_search")
    assert exc.value.line == 2
    p.write_text("")
    with pytest.raises(TableParseError):
        read_table(p, "gate_search")


def test_closest_class_requires_class(tmp_path):
    rec = run_search(SearchConfig(Objective.to_gate(CNOT_TARGET), 2)).records[0]
    with pytest.raises(ValueError):
        write_table([rec], "closest_class", tmp_path / "t.csv")
    with pytest.raises(ValueError):
        emit_weyl_points([rec], tmp_path / "w.csv")


def test_weyl_points(tmp_path):
    p = emit_weyl_points([record_at((1, 0, 3)), record_at((-1, 0, -3))], tmp_path / "w.csv")
    assert p.read_text() == "g1,g2,g3Re\n1,0,3\n-1,0,-3\n"
    assert read_weyl_points(p) == [(1, 0, 3), (-1, 0, -3)]
    assert emit_weyl_points([], tmp_path / "e.csv").read_text() == "g1,g2,g3Re\n"


# -- frozen regression fixtures from exhaustive runs ---------------------------

def check_against_fixture(result, fixture, kind, score):
    rows = read_table(fixture, kind)
    assert len(result) == len(rows)
    tol = 1e-9
    np.testing.assert_allclose([r.objective_distance for r in result], [r.distance for r in rows],
                               atol=tol)
    for row in rows:
        a = decompose(evaluate_braid(parse_braid_string(row.operator)))
        assert abs(score(a.a_block) - row.distance) < tol
        assert abs(abs(a.m11) - row.norm11) < tol
    # Rows clearly above the cut-off must be the same words; words tied at
    # the cut-off may swap in the last place across platforms.
    cut = rows[-1].distance - tol
    assert ({r.operator for r in rows if r.distance < cut}
            == {r.operator for r in result if r.objective_distance < cut})


def test_fixture_gate_cnot_lengths_3_to_7():
    res = run_search(SearchConfig(Objective.to_gate(CNOT_TARGET), (3, 7), top_k=10))
    check_against_fixture(res, DATA / "gate_cnot_L3-7.csv", "gate_search",
                          lambda a: distance_to_gate(a, CNOT_TARGET))


def test_fixture_class_cnot_length_10():
    cnot = get_class("CNOT")
    res = run_search(SearchConfig(Objective.to_class(cnot), 10, top_k=10))
    check_against_fixture(res, DATA / "class_cnot_L10.csv", "class_search",
                          lambda a: class_distance(invariants_u4(a), cnot))

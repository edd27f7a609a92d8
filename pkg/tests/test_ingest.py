import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpca.exceptions import DataError, DomainError, ParseError
from lpca.ingest import (ProficiencyBand, ResponseTable, aggregate_items,
                         band_of, parse_table, read_table, serialize_table,
                         to_response_matrix)

FIXTURE = Path(__file__).parent / "data" / "descriptor_rows.csv"
NA = math.nan

FIXTURE_GRID = [
    [0, NA, 0.5, NA, NA, 0, 0, 0.5],
    [0, NA, 0, 1, 0, 0, 1, 1],
    [0, NA, 0, NA, NA, 0, 1, 0],
    [0.5, NA, 0, 0, 0, 0, 1, 0],
]


def test_fixture_parses_to_expected_grid():
    t = read_table(FIXTURE)
    assert t.examinee_ids == ("S1", "S2", "S3", "S4")
    assert t.descriptor_names == ("D16", "D19", "D20", "D24", "D28", "D40",
                                  "D76", "D78")
    np.testing.assert_array_equal(t.cells, np.array(FIXTURE_GRID))
    assert t.metadata == {}


def test_first_row_example():
    t = parse_table("examinee,D16,D19,D20\nS1,0,NA,1/2\n")
    np.testing.assert_array_equal(t.cells, [[0.0, NA, 0.5]])


def test_both_half_spellings():
    t = parse_table("examinee,A,B\nx,0.5,1/2\n")
    assert t.cells.tolist() == [[0.5, 0.5]]


def test_metadata_columns():
    t = parse_table("examinee,A,meta:proficiency,meta:shift\n"
                    "s1,1,275.5,morning\ns2,0,,evening\n")
    assert t.descriptor_names == ("A",)
    assert t.metadata["shift"] == ("morning", "evening")
    prof = t.numeric_metadata("proficiency")
    assert prof[0] == 275.5 and math.isnan(prof[1])


@pytest.mark.parametrize("text,row,column", [
    ("examinee,A,B\ns1,0,2\n", 2, 3),
    ("examinee,A,B\ns1,0,1\ns2,0.25,1\n", 3, 2),
    ("examinee,A,B\ns1,0,1\ns1,1,1\n", 3, 1),
    ("examinee,A,B\ns1,0,1\ns2,1\n", 3, None),
    ("examinee,A\n", 2, None),
    ("id,A\ns1,0\n", 1, 1),
])
def test_parse_errors_carry_position(text, row, column):
    with pytest.raises(ParseError) as err:
        parse_table(text)
    assert err.value.row == row
    assert err.value.column == column


def test_empty_body_is_an_error_not_an_empty_table():
    with pytest.raises(ParseError):
        parse_table("examinee,D1,D2\n")


def test_lenient_mode_accepts_reals():
    t = parse_table("examinee,A,B\ns1,-1.25,NA\ns2,3e2,0\n", strict=False)
    np.testing.assert_array_equal(t.cells, [[-1.25, NA], [300.0, 0.0]])
    with pytest.raises(ParseError):
        parse_table("examinee,A\ns1,inf\n", strict=False)


cell_values = st.sampled_from([0.0, 0.5, 1.0, NA])


@settings(max_examples=60)
@given(st.integers(1, 6), st.integers(1, 5), st.data())
def test_round_trip(n, d, data):
    cells = np.array(data.draw(
        st.lists(st.lists(cell_values, min_size=d, max_size=d),
                 min_size=n, max_size=n)))
    meta = {"shift": [data.draw(st.sampled_from(["am", "pm", ""]))
                      for _ in range(n)]}
    t = ResponseTable([f"e{i}" for i in range(n)],
                      [f"D{j}" for j in range(d)], cells, meta)
    text = serialize_table(t)
    back = parse_table(text)
    np.testing.assert_array_equal(back.cells, t.cells)
    assert back.examinee_ids == t.examinee_ids
    assert back.descriptor_names == t.descriptor_names
    assert back.metadata == t.metadata
    assert serialize_table(back) == text


def test_serialize_normalizes_tokens():
    t = read_table(FIXTURE)
    text = serialize_table(t)
    assert "1/2" not in text
    assert text.splitlines()[1] == "S1,0,NA,0.5,NA,NA,0,0,0.5"


def test_aggregate_items_rates():
    raw = {
        "s1": {"i1": 1, "i2": 0, "i3": 1},
        "s2": {"i1": 1, "i2": 1},
        "s3": {"i3": 0},
    }
    mapping = {"i1": "D1", "i2": "D1", "i3": "D2"}
    t = aggregate_items(raw, mapping)
    assert t.descriptor_names == ("D1", "D2")
    np.testing.assert_array_equal(t.cells, [[0.5, 1.0], [1.0, NA], [NA, 0.0]])


def test_aggregate_items_rejects_three_items_on_a_descriptor():
    raw = {"s1": {"a": 1, "b": 0, "c": 1}}
    with pytest.raises(DataError):
        aggregate_items(raw, {"a": "D", "b": "D", "c": "D"})


def test_aggregate_items_rejects_unmapped_item_and_bad_response():
    with pytest.raises(DataError):
        aggregate_items({"s1": {"z": 1}}, {"a": "D"})
    with pytest.raises(DataError):
        aggregate_items({"s1": {"a": 2}}, {"a": "D"})


@settings(max_examples=60)
@given(st.dictionaries(
    st.text("abc", min_size=1, max_size=3),
    st.dictionaries(st.sampled_from(["i1", "i2", "i3", "i4"]),
                    st.sampled_from([0, 1, None])),
    min_size=1, max_size=5))
def test_aggregate_items_grid(raw):
    mapping = {"i1": "D1", "i2": "D1", "i3": "D2", "i4": "D3"}
    t = aggregate_items(raw, mapping)
    for v in t.cells.ravel():
        assert math.isnan(v) or v in (0.0, 0.5, 1.0)


@pytest.mark.parametrize("score,band", [
    (0, ProficiencyBand.VERY_CRITICAL),
    (250, ProficiencyBand.VERY_CRITICAL),
    (250.5, ProficiencyBand.CRITICAL),
    (275, ProficiencyBand.CRITICAL),
    (300, ProficiencyBand.CRITICAL),
    (301, ProficiencyBand.INTERMEDIATE),
    (350, ProficiencyBand.INTERMEDIATE),
    (351, ProficiencyBand.ADEQUATE),
    (500, ProficiencyBand.ADEQUATE),
])
def test_band_of(score, band):
    assert band_of(score) is band


def test_band_labels():
    assert [b.label for b in ProficiencyBand] == [
        "very critical", "critical", "intermediate", "adequate"]


@pytest.mark.parametrize("score", [-0.1, 500.01, math.nan])
def test_band_of_rejects_out_of_range(score):
    with pytest.raises(DomainError):
        band_of(score)


@given(st.floats(0, 500), st.floats(0, 500))
def test_band_of_is_monotone(a, b):
    order = list(ProficiencyBand)
    lo, hi = sorted((a, b))
    assert order.index(band_of(lo)) <= order.index(band_of(hi))


def test_to_response_matrix():
    t = parse_table("examinee,B,A,C\ns1,1,NA,0\ns2,0,1,1/2\n")
    data = to_response_matrix(t)
    assert (data.n, data.d) == (2, 3)
    assert data.column_names == ("B", "A", "C")
    assert (~data.observed).sum() == 1 and not data.observed[0, 1]
    assert data.values[1, 2] == 0.5


def test_to_response_matrix_names_empty_column():
    # D19 is NA for every examinee in the fixture
    with pytest.raises(DataError, match="D19"):
        to_response_matrix(read_table(FIXTURE))


def test_to_response_matrix_names_empty_row():
    t = parse_table("examinee,A,B\ns1,1,0\nghost,NA,NA\n")
    with pytest.raises(DataError, match="ghost"):
        to_response_matrix(t)

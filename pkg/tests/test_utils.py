from fractions import Fraction

import pandas as pd  # type: ignore
import pytest

import core.utils as utils
from core.exact_cake import EMPTY, Allocation, Piece


@pytest.mark.parametrize(
    "text,expected",
    [
        ("1/3", Fraction(1, 3)),
        (" 2/4 ", Fraction(1, 2)),
        ("0", Fraction(0)),
        (3, Fraction(3)),
    ]
)
def test_parse_scalar(text, expected):
    assert utils.parse_scalar(text) == expected


@pytest.mark.parametrize("text", [0.5, True, "abc", "1/0"])
def test_parse_scalar_rejects_inexact_or_malformed(text):
    with pytest.raises(ValueError):
        utils.parse_scalar(text)


@pytest.mark.parametrize(
    "value,expected",
    [(Fraction(3, 2), "3/2"), (Fraction(4, 2), "2"), (Fraction(0), "0")]
)
def test_format_scalar(value, expected):
    assert utils.format_scalar(value) == expected


def test_piece_json():
    piece = Piece.of((0, Fraction(1, 4)), (Fraction(1, 2), 1))

    assert utils.piece_to_json(piece) == [["0", "1/4"], ["1/2", "1"]]
    assert utils.piece_from_json([["0", "1/4"], ["1/2", "1"]]) == piece
    assert utils.piece_to_json(EMPTY) == []


def test_piece_from_json_rejects_bad_intervals():
    with pytest.raises(ValueError):
        utils.piece_from_json([["1/2", "1/4"]])


def test_allocation_json():
    allocation = Allocation((Piece.of((0, Fraction(1, 2))), Piece.of((Fraction(1, 2), 1))))

    assert utils.allocation_from_json(utils.allocation_to_json(allocation)) == allocation


@pytest.mark.parametrize("k,expected", [(1, 2), (2, 5), (3, 8), (5, 15)])
def test_ceil_log_bound(k, expected):
    assert utils.ceil_log_bound(k) == expected


def test_execute_duckdb_sql_returns_results():
    frame = pd.DataFrame({"x": [1, 2, 3]})

    result = utils.execute_duckdb_sql("SELECT SUM(x) AS total FROM numbers", "Unable to sum", tables={"numbers": frame}, return_results=True)

    assert result["total"].iloc[0] == 6


def test_execute_duckdb_sql_wraps_errors():
    with pytest.raises(Exception, match="Unable to query: "):
        utils.execute_duckdb_sql("SELECT * FROM missing_table", "Unable to query")

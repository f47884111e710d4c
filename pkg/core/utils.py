import logging
import math
import sys
from fractions import Fraction
from typing import Optional

import duckdb  # type: ignore
import pandas as pd  # type: ignore

from core.exact_cake import Allocation, Piece

"""
Set up a logging instance that will write to stdout
"""
logging.basicConfig(
    level=logging.INFO,
    format='cake-lef %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler(sys.stdout)]
)
# Create the logger at module level so its settings are applied throughout code base
logger = logging.getLogger(__name__)


def parse_scalar(text) -> Fraction:
    """
    Parse a rational written as "p/q" or "p".

    Integers are accepted as-is; floats are rejected so no inexact value can
    enter the engine through a file.
    """
    if isinstance(text, bool) or isinstance(text, float):
        raise ValueError(f"Rational values must be strings or integers, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Invalid rational value {text!r}: {e}") from e


def format_scalar(value: Fraction) -> str:
    """Render a rational as "p/q", or "p" when the denominator is 1."""
    return str(Fraction(value))


def piece_to_json(piece: Piece) -> list:
    return [[format_scalar(iv.lo), format_scalar(iv.hi)] for iv in piece.intervals]


def piece_from_json(data: list) -> Piece:
    try:
        return Piece.of(*[(parse_scalar(lo), parse_scalar(hi)) for lo, hi in data])
    except (TypeError, ValueError) as e:
        raise ValueError(f"Invalid piece {data!r}: {e}") from e


def allocation_to_json(allocation: Allocation) -> list:
    return [piece_to_json(bundle) for bundle in allocation.bundles]


def allocation_from_json(data: list) -> Allocation:
    return Allocation(tuple(piece_from_json(bundle) for bundle in data))


def ceil_log_bound(k: int) -> int:
    """
    Proven per-level round bound of the domination while-loop for k candidates:
    ceil(k * (1 + ln k)) + 1.
    """
    if k <= 1:
        return 2
    return math.ceil(k * (1 + math.log(k))) + 1


def execute_duckdb_sql(sql: str, error_msg: str, tables: Optional[dict[str, pd.DataFrame]] = None, return_results: bool = False) -> Optional[pd.DataFrame]:
    """
    Execute SQL statement using an in-memory DuckDB connection.

    Args:
        sql: SQL statement to execute
        error_msg: Error message to display if execution fails
        tables: DataFrames to register as views, keyed by view name
        return_results: If True, returns the query result as a DataFrame

    Returns:
        If return_results=True: DataFrame with the query result
        If return_results=False: None
    """
    conn = None

    try:
        conn = duckdb.connect()
        for name, frame in (tables or {}).items():
            conn.register(name, frame)

        result = conn.execute(sql)
        if return_results:
            return result.df()
        return None
    except Exception as e:
        raise Exception(f"{error_msg}: {str(e)}") from e
    finally:
        if conn is not None:
            conn.close()

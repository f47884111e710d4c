import json

import pandas as pd  # type: ignore

import core.constants as constants
import core.utils as utils
from core.helpers.bench_record import BenchRecord
from core.storage_backend import storage

# Column types the summary query needs; bound can exceed int64 so it is compared as a double
SQL_COLUMN_TYPES = {
    "n": "int64",
    "seed": "int64",
    "cut": "int64",
    "eval": "int64",
    "raw_eval": "int64",
    "rounds": "int64",
    "bound": "float64",
    "envy_free": "bool",
    "ms": "int64",
}


class BenchReport:
    """
    Collects bench records into a CSV of per-run query counts and a
    per-(protocol, graph, n) summary computed with DuckDB.
    """

    def __init__(self, records: list[BenchRecord]):
        """
        Args:
            records: Bench records in sweep order
        """
        self.records = records

    def to_frame(self) -> pd.DataFrame:
        # object dtype keeps arbitrarily large bounds as exact integers in the CSV
        return pd.DataFrame([record.to_row() for record in self.records], columns=constants.BENCH_CSV_COLUMNS, dtype=object)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    def write_csv(self, output_path: str) -> str:
        uri = storage.write_text(output_path, self.to_csv())
        utils.logger.info(f"Wrote {len(self.records)} bench record(s) to {uri}")
        return uri

    @staticmethod
    def generate_summary_sql() -> str:
        """
        Generate SQL summarizing charged queries per protocol, graph and n.

        Returns:
            SQL over the registered `records` view, one row per group
        """
        return """
            SELECT
                protocol,
                graph,
                n,
                COUNT(*) AS runs,
                MIN(cut + "eval") AS min_queries,
                MEDIAN(cut + "eval") AS median_queries,
                MAX(cut + "eval") AS max_queries,
                MAX(bound) AS bound,
                MAX(rounds) AS max_rounds,
                BOOL_AND(envy_free) AS all_envy_free
            FROM records
            GROUP BY protocol, graph, n
            ORDER BY protocol, graph, n
        """

    def summary(self) -> pd.DataFrame:
        if not self.records:
            return pd.DataFrame(columns=constants.BENCH_SUMMARY_COLUMNS)
        frame = self.to_frame().astype(SQL_COLUMN_TYPES)
        result = utils.execute_duckdb_sql(
            self.generate_summary_sql(),
            "Unable to summarize bench records",
            tables={"records": frame},
            return_results=True,
        )
        return result[constants.BENCH_SUMMARY_COLUMNS]

    def summary_records(self) -> list[dict]:
        return json.loads(self.summary().to_json(orient="records"))

    def write_summary(self, output_path: str) -> str:
        uri = storage.write_json(output_path, self.summary_records())
        utils.logger.info(f"Wrote bench summary to {uri}")
        return uri

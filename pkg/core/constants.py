import os
from enum import Enum

MAX_DENOMINATOR = int(os.getenv('CAKE_MAX_DENOMINATOR', '1000'))
DEFAULT_SEGMENTS = int(os.getenv('CAKE_SEGMENTS', '3'))
TRACE_ENABLED = os.getenv('CAKE_TRACE_ENABLED', 'true').lower() == 'true'
ROUND_LIMIT_FACTOR = int(os.getenv('CAKE_ROUND_LIMIT_FACTOR', '10'))
STORAGE_ROOT = os.getenv('STORAGE_ROOT', '.')

# Densities of generated valuations are drawn as integer weights in [1, MAX_DENSITY_WEIGHT]
MAX_DENSITY_WEIGHT = 9

LOCAL_SCHEME = "file://"

# Physical scissor cuts per Alg2 round are audited against PHYSICAL_CUT_FACTOR * n
PHYSICAL_CUT_FACTOR = 3
# Generous constant for the Depth2Tree round bound: 10 * n^2 * ceil(ln n + 1)
DEPTH2_ROUND_FACTOR = 10
# Generous constant for the 2-Star cut bound: 6 * n^2
TWO_STAR_CUT_FACTOR = 6

# Closed-form query totals of the direct protocols
ALG1_CUTS = 8
ALG1_EVALS = 16
ALG5_CUTS = 18
ALG5_EVALS = 29


class GraphKind(str, Enum):
    """
    Social graph shapes understood by the engine.

    LINE: path a_1 - a_2 - ... - a_n rooted at a_n
    TREE: arbitrary rooted tree
    DEPTH2: rooted tree of depth at most 2
    TWO_STAR: depth-2 tree where each non-root agent has degree at most 2
    STAR: depth-1 tree
    """
    LINE = "line"
    TREE = "tree"
    DEPTH2 = "depth2"
    TWO_STAR = "2star"
    STAR = "star"


class ProtocolName(str, Enum):
    DOMINATION = "domination"
    ALG1 = "alg1"
    ALG5 = "alg5"
    ALG2 = "alg2"
    STAR = "star"


class Phase(str, Enum):
    TRIM = "trim"
    EQUAL = "equal"


class Fairness(str, Enum):
    LINE = "line"
    TREE = "tree"


# Graph kinds each protocol accepts
PROTOCOL_GRAPHS = {
    ProtocolName.DOMINATION: [GraphKind.LINE, GraphKind.TREE, GraphKind.DEPTH2, GraphKind.TWO_STAR, GraphKind.STAR],
    ProtocolName.ALG1: [GraphKind.LINE],
    ProtocolName.ALG5: [GraphKind.LINE],
    ProtocolName.ALG2: [GraphKind.DEPTH2, GraphKind.TWO_STAR, GraphKind.STAR],
    ProtocolName.STAR: [GraphKind.STAR],
}

BENCH_CSV_COLUMNS = [
    "protocol",
    "graph",
    "n",
    "seed",
    "cut",
    "eval",
    "raw_eval",
    "rounds",
    "bound",
    "envy_free",
    "ms",
]

BENCH_SUMMARY_COLUMNS = [
    "protocol",
    "graph",
    "n",
    "runs",
    "min_queries",
    "median_queries",
    "max_queries",
    "bound",
    "max_rounds",
    "all_envy_free",
]

"""
Reusable sub-protocols: Select, Trim, Equal and Eq-Div.

Each procedure talks to the valuations only through the oracle and charges
the ledger the fixed amounts the complexity analysis assumes:

    Select   |X| evals
    Trim     |X| - 1 cuts, |X| evals
    Equal    |X| - 1 cuts, |X| evals
    Eq-Div   n - 1 cuts, 1 eval (0 when R is the whole cake)

Physical scissor cuts can be counted separately through PhysicalCuts.
"""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from core.exact_cake import EMPTY, ONE, WHOLE, Piece, union_all
from core.exceptions import EmptyInput, MTooLarge
from core.rw_oracle import RobertsonWebbOracle


@dataclass
class PhysicalCuts:
    count: int = 0

    def add(self, cuts: int = 1) -> None:
        self.count += cuts


def _note(cuts: Optional[PhysicalCuts], amount: int = 1) -> None:
    if cuts is not None:
        cuts.add(amount)


def rank_pieces(oracle: RobertsonWebbOracle, agent: int, X: list[Piece]) -> list[int]:
    """
    Positions of X ordered from most to least valuable, ties by lowest position.
    Charges |X| evals.
    """
    values = [oracle.eval_piece(agent, piece) for piece in X]
    return sorted(range(len(X)), key=lambda position: (-values[position], position))


def select(oracle: RobertsonWebbOracle, agent: int, X: list[Piece], m: int) -> tuple[list[Piece], list[Piece]]:
    """
    The m most valuable pieces of X for the agent.

    Returns:
        (chosen in decreasing value, rest in input order)
    """
    if m > len(X):
        raise MTooLarge(f"Cannot select {m} of {len(X)} pieces")
    order = rank_pieces(oracle, agent, X)
    taken = set(order[:m])
    chosen = [X[position] for position in order[:m]]
    rest = [piece for position, piece in enumerate(X) if position not in taken]
    return chosen, rest


def lowest_position(values: list[Fraction]) -> int:
    return min(range(len(values)), key=lambda position: (values[position], position))


def trim(oracle: RobertsonWebbOracle, agent: int, X: list[Piece], cuts: Optional[PhysicalCuts] = None) -> tuple[list[Piece], Piece]:
    """
    Cut every piece down to the value of the agent's least valuable piece.

    Args:
        oracle: Query oracle
        agent: Trimming agent
        X: Pieces to trim
        cuts: Optional physical cut counter

    Returns:
        (trimmed pieces in input order, union of the trimmings)
    """
    if not X:
        raise EmptyInput("Trim needs at least one piece")

    values = [oracle.eval_piece(agent, piece) for piece in X]
    anchor = lowest_position(values)
    tau = values[anchor]

    trimmed: list[Piece] = []
    trimmings: list[Piece] = []
    for position, piece in enumerate(X):
        if position == anchor:
            trimmed.append(piece)
            continue
        prefix, suffix = oracle.cut_piece_query(agent, piece, tau)
        if not prefix.is_empty and not suffix.is_empty:
            _note(cuts)
        trimmed.append(prefix)
        trimmings.append(suffix)
    return trimmed, union_all(trimmings)


def equal(oracle: RobertsonWebbOracle, agent: int, X: list[Piece], cuts: Optional[PhysicalCuts] = None) -> tuple[list[Piece], int]:
    """
    Redistribute X so every piece is worth the average to the agent.

    Pieces above the average give up their right ends to a pool; pieces
    below the average absorb pool pieces in order, cutting the last one they
    need. x_star is the lowest position whose input was at least average;
    its output is a subset of its input.

    Returns:
        (equalized pieces in input order, x_star)
    """
    if not X:
        raise EmptyInput("Equal needs at least one piece")

    values = [oracle.eval_piece(agent, piece) for piece in X]
    oracle.ledger.charge_cut(agent, len(X) - 1)
    tau = sum(values, Fraction(0)) / len(X)
    x_star = min(position for position, value in enumerate(values) if value >= tau)

    equalized = list(X)
    pool: deque[Piece] = deque()
    for position, piece in enumerate(X):
        if values[position] > tau:
            prefix, suffix = oracle.cut_piece_query(agent, piece, tau, charged=False)
            _note(cuts)
            equalized[position] = prefix
            pool.append(suffix)

    short = [position for position, value in enumerate(values) if value < tau]
    for position in short:
        need = tau - values[position]
        gathered = [X[position]]
        while need > 0:
            head = pool.popleft()
            worth = oracle.cached_value(agent, head)
            if worth <= need:
                gathered.append(head)
                need -= worth
            else:
                prefix, suffix = oracle.cut_piece_query(agent, head, need, charged=False)
                _note(cuts)
                gathered.append(prefix)
                pool.appendleft(suffix)
                need = Fraction(0)
        equalized[position] = union_all(gathered)

    # Whatever is left in the pool is worth nothing to the agent
    leftover = union_all(pool)
    if not leftover.is_empty:
        equalized[short[-1]] = equalized[short[-1]].union(leftover)
    return equalized, x_star


def eq_div(oracle: RobertsonWebbOracle, agent: int, R: Piece, n: int, cuts: Optional[PhysicalCuts] = None) -> list[Piece]:
    """
    Divide R left to right into n pieces of equal value to the agent.

    An empty R gives n empty pieces and costs nothing. The value of the whole
    cake is known to be 1, so dividing it costs no eval.
    """
    if n < 1:
        raise ValueError(f"Eq-Div needs n >= 1, got {n}")
    if R.is_empty:
        return [EMPTY] * n
    if n == 1:
        return [R]

    total = ONE if R == WHOLE else oracle.eval_piece(agent, R)
    tau = total / n
    pieces = []
    rest = R
    for _ in range(n - 1):
        prefix, rest = oracle.cut_piece_query(agent, rest, tau)
        pieces.append(prefix)
    _note(cuts, n - 1)
    pieces.append(rest)
    return pieces

import json
from dataclasses import dataclass, field
from fractions import Fraction

import core.utils as utils
from core.exact_cake import Piece


def _jsonable(value):
    if isinstance(value, Fraction):
        return utils.format_scalar(value)
    if isinstance(value, Piece):
        return utils.piece_to_json(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if hasattr(value, 'value'):
        return value.value
    return value


@dataclass
class ClaimReport:
    """
    Pass/fail per named claim over a trace.

    A claim passes until check() sees it fail; only the first counterexample
    of each claim is kept, with its context.
    """
    subject: str
    claims: dict[str, bool] = field(default_factory=dict)
    violations: list[dict] = field(default_factory=list)

    def check(self, claim: str, holds: bool, **context) -> bool:
        first_failure = not holds and self.claims.get(claim, True)
        self.claims[claim] = self.claims.get(claim, True) and holds
        if first_failure:
            self.violations.append({"claim": claim, **{key: _jsonable(value) for key, value in context.items()}})
        return holds

    @property
    def ok(self) -> bool:
        return all(self.claims.values())

    @property
    def failed(self) -> list[str]:
        return [claim for claim, holds in self.claims.items() if not holds]

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "claims": dict(self.claims),
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

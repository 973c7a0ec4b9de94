from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

CERTIFIED = "Certified"
CERTIFIED_FINITE = "Certified-Finite"
REFUTED_EVIDENCE = "RefutedEvidence"
UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Verdict:
    analysis: str
    status: str
    certificate: dict = field(default_factory=dict)
    series: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status.startswith(CERTIFIED)

    def to_dict(self) -> dict[str, Any]:
        return {
            "analysis": self.analysis,
            "status": self.status,
            "certificate": self.certificate,
            "series": self.series,
            "witness": self.witness,
        }

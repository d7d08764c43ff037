"""Disruption scenarios and the line-delimited JSON scenario file."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..case_model import PowerCase
from ..errors import ParseError, ValidationError

SCENARIO_FORMAT = "wildfire-psps-scenarios"


@dataclass(frozen=True)
class DisruptionScenario:
    """One realization: disruption period, exogenous damage, faults and their fire sets.

    Components are canonical positions (see ``PowerCase.components``). ``tau``
    is None for a scenario without disruption.
    """

    tau: int | None
    v: frozenset = frozenset()
    u: frozenset = frozenset()
    fire_sets: dict = field(default_factory=dict)
    probability: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "v", frozenset(int(c) for c in self.v))
        object.__setattr__(self, "u", frozenset(int(c) for c in self.u))
        sets = {int(c): frozenset(int(k) for k in ks) for c, ks in self.fire_sets.items()}
        object.__setattr__(self, "fire_sets", sets)
        for c in self.u:
            sets.setdefault(c, frozenset({c}))
            if c not in sets[c]:
                raise ValidationError(f"fire set of faulted component {c} must contain it",
                                      field="fire_sets")
        if self.tau is None and (self.u or self.v):
            raise ValidationError("scenario without disruption cannot carry damage",
                                  field="tau")
        if self.probability < 0:
            raise ValidationError("negative scenario probability", field="probability")

    @property
    def disruptive(self) -> bool:
        return self.tau is not None

    def tau_index(self, horizon: int) -> int:
        """Disruption period, or T+1 when there is none."""
        return horizon + 1 if self.tau is None else self.tau

    def v_vector(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=int)
        out[list(self.v)] = 1
        return out

    def u_vector(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=int)
        out[list(self.u)] = 1
        return out

    def with_probability(self, p: float) -> "DisruptionScenario":
        return dataclasses.replace(self, probability=p)

    def signature(self):
        """Hashable content key, probability excluded."""
        return (self.tau, tuple(sorted(self.v)), tuple(sorted(self.u)),
                tuple(sorted((c, tuple(sorted(ks))) for c, ks in self.fire_sets.items()
                             if c in self.u)))


def check_probabilities(scenarios, tol: float = 1e-9) -> None:
    total = sum(s.probability for s in scenarios)
    if abs(total - 1.0) > tol:
        raise ValidationError(f"scenario probabilities sum to {total}", field="probability")


def scenario_to_record(case: PowerCase, index: int, s: DisruptionScenario) -> dict:
    lab = case.component_label
    return {
        "type": "scenario",
        "index": index,
        "tau": s.tau,
        "p": s.probability,
        "v": sorted(lab(c) for c in s.v),
        "u": sorted(lab(c) for c in s.u),
        "I": {lab(c): sorted(lab(k) for k in s.fire_sets[c]) for c in sorted(s.u)},
    }


def scenario_from_record(case: PowerCase, rec: dict) -> DisruptionScenario:
    pos = case.position_of_label
    try:
        return DisruptionScenario(
            tau=None if rec["tau"] is None else int(rec["tau"]),
            v=frozenset(pos(x) for x in rec.get("v", [])),
            u=frozenset(pos(x) for x in rec.get("u", [])),
            fire_sets={pos(c): frozenset(pos(k) for k in ks) for c, ks in rec.get("I", {}).items()},
            probability=float(rec["p"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed scenario record: {exc!r}") from exc


def write_scenarios(path, case: PowerCase, scenarios, header: dict) -> None:
    head = {"type": "header", "format": SCENARIO_FORMAT, "version": 1, "n": len(scenarios)}
    head.update(header)
    lines = [json.dumps(head, sort_keys=True)]
    lines += [json.dumps(scenario_to_record(case, i, s), sort_keys=True)
              for i, s in enumerate(scenarios)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_scenarios(path, case: PowerCase):
    """Returns ``(header, scenarios)``."""
    try:
        raw = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not raw:
        raise ParseError(f"{path}: empty scenario file")
    try:
        head = json.loads(raw[0])
        records = [json.loads(line) for line in raw[1:] if line.strip()]
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON line ({exc})") from exc
    if head.get("format") != SCENARIO_FORMAT:
        raise ParseError(f"{path}: not a scenario file")
    scenarios = [scenario_from_record(case, r) for r in records if r.get("type") == "scenario"]
    if len(scenarios) != head.get("n", len(scenarios)):
        raise ParseError(f"{path}: header says {head.get('n')} scenarios, found {len(scenarios)}")
    return head, scenarios

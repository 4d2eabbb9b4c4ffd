"""Word-level space accounting for the streaming pipelines.

One word is one machine word (a counter, an index or a hash key).  A stored
clause costs ``2 + size`` words: a length, a tag and one word per literal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import SpaceBudgetExceeded


def clause_words(c) -> int:
    return 2 + len(c)


@dataclass
class SpaceReport:
    words_stored_peak: int = 0
    samples_achieved: int = 0
    large_clauses_dropped: int = 0
    breakdown: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "words_stored_peak": self.words_stored_peak,
            "samples_achieved": self.samples_achieved,
            "large_clauses_dropped": self.large_clauses_dropped,
            "breakdown": dict(sorted(self.breakdown.items())),
        }


class SpaceMeter:
    """Tracks current words per component and the peak of their sum.

    ``budget`` (words) is checked on every change.
    """

    def __init__(self, budget=None):
        self.budget = budget
        self.current = {}
        self.peak_by_component = {}
        self.total = 0
        self.peak = 0

    def set(self, component: str, words: int):
        old = self.current.get(component, 0)
        self.current[component] = words
        self.total += words - old
        if words > self.peak_by_component.get(component, 0):
            self.peak_by_component[component] = words
        if self.total > self.peak:
            self.peak = self.total
            if self.budget is not None and self.peak > self.budget:
                raise SpaceBudgetExceeded(
                    f"{self.peak} words stored, budget is {self.budget} ({component} grew last)")

    def add(self, component: str, words: int):
        self.set(component, self.current.get(component, 0) + words)

    def report(self, samples_achieved=0, large_dropped=0) -> SpaceReport:
        return SpaceReport(self.peak, samples_achieved, large_dropped, dict(self.peak_by_component))

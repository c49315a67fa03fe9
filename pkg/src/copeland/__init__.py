"""Copeland^alpha elections: scoring, control, bribery, and hard instances."""

from .core import (
    Alpha,
    Election,
    LinearOrder,
    PreferenceTable,
    OutcomeTable,
    copeland_scores,
    outcome_table,
    pairwise_tally,
    winners,
)

__all__ = [
    "Alpha",
    "Election",
    "LinearOrder",
    "PreferenceTable",
    "OutcomeTable",
    "copeland_scores",
    "outcome_table",
    "pairwise_tally",
    "winners",
]

"""Epistemic action theories: parsing, state transitions and entailment."""

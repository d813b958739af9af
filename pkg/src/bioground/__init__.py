"""Contradiction-aware biomedical evidence grounding and citation attribution."""

__version__ = "0.1.0"

"""Point-of-interest recommendation with popularity-calibrated re-ranking.

The package covers the full desk-scale experiment pipeline: check-in
ingestion and temporal splitting, popularity indexing and user grouping,
three recommenders (BPR, USG, LORE), calibrated-popularity re-ranking with
group-specific trade-off weights, and group-wise accuracy / popularity-bias
evaluation with significance testing.
"""

__version__ = "0.1.0"

"""dqkit: dataset-quality pruning and quality-feedback dataset creation."""

__version__ = "0.1.0"

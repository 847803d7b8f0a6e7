"""Network elites from board registries: co-board graphs, broker pruning, weighted k-cores,
company ranking and committee-membership models."""

__version__ = "0.1.0"

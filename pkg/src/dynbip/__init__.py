"""Dynamic attributed bipartite graphs with labelled anomalies."""

__version__ = "0.1.0"

"""FairMetric - axiomatic fairness measures for resource allocation vectors."""

__version__ = "1.0.0"

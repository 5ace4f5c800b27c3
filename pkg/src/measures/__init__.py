"""Fairness measures, axioms, majorization, alpha-fairness and bounds."""

"""Perspective modeling over subjective annotations.

Jointly trains per-annotation label classifiers and contrastively
learned socio-demographic representations, alongside four baseline
regimes, and quantifies demographic structure in the learned
representation space via homophily statistics.
"""

__version__ = "0.1.0"

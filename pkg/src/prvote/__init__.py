"""Multiwinner voting with verifiable proportionality guarantees.

The package provides committee election rules (greedy justified-candidate
selection, expanding approvals, equal shares, STV, PAV, sequential
Phragmen), exact verifiers for proportionality axioms over approval and
ranked ballots, price-system certification via exact rational LPs,
statistical ballot cultures, query-model simulators, a participatory
budgeting extension, and a batch experiment harness.
"""

from prvote.core import Instance, WeakProfile, rank_expand, validate_profile

__version__ = "0.1.0"

__all__ = ["Instance", "WeakProfile", "rank_expand", "validate_profile", "__version__"]

"""Certified conical density experiments for hierarchical measures.

Cone predicates and covering nets (geometry), lazy measure trees with
certified region enclosures (measure), explicit test measures
(constructions), homogeneity and doubling statistics (homogeneity), density
ratios and the constant chain (density), and cone-triple configuration
search (configurations).
"""

__version__ = "0.1.0"

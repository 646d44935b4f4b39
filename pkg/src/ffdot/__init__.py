"""Exact laboratory for dot-product graphs over finite fields."""
from .cyclo import CertifiedInterval, CycloNum, embed_certified
from .field import (FieldElement, FieldVector, FiniteField, PointSet, additive_character,
                    dot, enumerate_vectors, make_field, norm, trace)
from .graphs import EdgeLabeling, Graph, LabelSet, ProductSubset
from .report import Report, Verdict

__all__ = [
    "CertifiedInterval", "CycloNum", "embed_certified",
    "FieldElement", "FieldVector", "FiniteField", "PointSet", "additive_character",
    "dot", "enumerate_vectors", "make_field", "norm", "trace",
    "EdgeLabeling", "Graph", "LabelSet", "ProductSubset", "Report", "Verdict",
]
__version__ = "0.1.0"

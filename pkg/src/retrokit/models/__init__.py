"""Graph-attention encoder and the two retrosynthesis models."""

from .center import CenterModel, CenterPrediction
from .drgat import BatchedGraphs, DRGATLayer, DRGATStack, batch_graphs
from .oracle import OracleCenterModel, OracleSynthonModel
from .synthon import (PairAttention, PairTransformerLayer, SynthonClassifier,
                      SynthonGroup, prior_filter, topk_joint_assignments)

__all__ = [
    "BatchedGraphs", "CenterModel", "CenterPrediction", "DRGATLayer",
    "DRGATStack", "OracleCenterModel", "OracleSynthonModel", "PairAttention",
    "PairTransformerLayer", "SynthonClassifier", "SynthonGroup",
    "batch_graphs", "prior_filter", "topk_joint_assignments",
]

"""Desk-scale closed-loop driving stack: simulator, annotation pipeline,
multimodal sequence model, training, and driving-score evaluation."""

__version__ = "0.1.0"

"""
iso-lab

Prediction-aware no-regret learning in latent-context multiplayer games:
bilinear context-dependent losses, per-context optimistic Hedge learners routed
by context predictions, and a metrics layer for contextual regret audits.
"""

__version__ = "1.0.0"

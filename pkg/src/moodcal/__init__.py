"""Emotion-aware day scheduling: a constraint solver over calendar
events plus the signal pipelines (ECG, interaction logs) that estimate
the emotional state steering it."""

__version__ = "0.1.0"

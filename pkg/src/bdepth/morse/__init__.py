"""Morse-theoretic examples: functions on the circle and on the line."""

from bdepth.morse.circle import CircleMorseData, SampledCircleFunction, beta_chain, beta_combinatorial
from bdepth.morse.sampled import BumpProfile, SampledLineFunction, embedding_bounds

__all__ = [
    "BumpProfile",
    "CircleMorseData",
    "SampledCircleFunction",
    "SampledLineFunction",
    "beta_chain",
    "beta_combinatorial",
    "embedding_bounds",
]

"""Counterfactual learning toolkit for phrase-suggestion policies.

Pipeline: train a Kneser-Ney n-gram base model on a review corpus, deploy a
stochastic log-linear suggestion policy, log (context, phrase, reward,
propensity) interactions, and fit improved policies offline with clipped
inverse-propensity estimates of expected reward.
"""

__version__ = "0.1.0"

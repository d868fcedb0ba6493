"""
Service layer

Game evaluation, learners, predictors, metrics, oracles and the experiment
harness, plus file parsing, output writing and the game cache.
"""

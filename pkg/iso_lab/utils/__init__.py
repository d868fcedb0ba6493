"""
Utility modules

Error types, argument validators and seeded random streams.
"""

"""
Exact finite probability spaces over ±1 sign patterns.

Distributions, moment constraints and the rational solver that decides
feasibility, uniqueness and attainable correlation ranges.
"""

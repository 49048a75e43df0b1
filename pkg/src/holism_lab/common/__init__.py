"""
Shared plumbing for holism_lab: arguments, configuration and failure tracking.
"""

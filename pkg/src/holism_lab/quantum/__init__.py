"""Pauli algebra, GHZ expectations and simulated joint measurements."""

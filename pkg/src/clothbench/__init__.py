"""Deterministic towel pick-and-place benchmark with scripted oracles, a
diffusion policy, an evaluation harness and a human-in-the-loop service."""

__version__ = "0.1.0"

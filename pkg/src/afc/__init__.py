"""Active flow control of a circular cylinder wake with deep reinforcement learning.

A finite-difference immersed-boundary Navier-Stokes environment with paired
synthetic jets, a from-scratch PPO agent, and a TCP tensor broker that couples
solver worker processes to the trainer.
"""

__version__ = "0.1.0"

# snake_tracking
"""Adaptive trajectory tracking of a cable-driven snake robot: MPPI vs MPC on a GMM-GMR surrogate plant."""

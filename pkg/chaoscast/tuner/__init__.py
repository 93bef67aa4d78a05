"""
chaoscast/tuner

Local grid search over hyperparameter domains.
"""
from chaoscast.tuner.defaults import default_grid
from chaoscast.tuner.grid import initial_grid, neighbors, next_grid
from chaoscast.tuner.search import local_grid_search

__all__ = ["default_grid", "initial_grid", "local_grid_search", "neighbors", "next_grid"]

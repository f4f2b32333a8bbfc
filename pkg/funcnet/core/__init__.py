"""
Grids, bases, simulation, training and dataset I/O
"""

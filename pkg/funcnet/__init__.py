"""
Functional neural networks for scalar-on-function regression
"""

__version__ = "1.0.0"

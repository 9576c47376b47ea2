"""
Accelerated regularized sub-sampled Newton.
"""

__version__ = "0.1.0"

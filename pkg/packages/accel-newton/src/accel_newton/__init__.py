"""
Experiment harness for accelerated regularized sub-sampled Newton.
"""

__version__ = "0.1.0"

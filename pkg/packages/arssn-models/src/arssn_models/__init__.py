"""
Pydantic models for sub-sampled Newton solver parameters and traces.
"""

__version__ = "0.1.0"

"""
Obstacle-lattice large-deviation rate-function pipeline.
"""

__version__ = "1.0.0"

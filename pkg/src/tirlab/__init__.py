"""Temporal-inconsistency intrinsic rewards with prediction-error, disagreement and RND baselines."""

from tirlab._accel import backend, set_backend

__version__ = "0.1.0"
__all__ = ["backend", "set_backend", "__version__"]

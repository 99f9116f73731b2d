"""API routers package."""

from routers import bench, problems, solve

__all__ = ["bench", "problems", "solve"]

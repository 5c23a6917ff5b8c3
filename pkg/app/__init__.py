# app/__init__.py
# This file makes 'app' a Python package.

__version__ = "0.1.0"

from .config import settings

__all__ = ["settings"]

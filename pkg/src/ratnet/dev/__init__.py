"""
Development utilities for ratnet.
"""

from .cli import main

__all__ = ['main']

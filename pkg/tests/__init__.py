"""
Tests for the Chebyshev CNN toolkit
"""

__all__ = []

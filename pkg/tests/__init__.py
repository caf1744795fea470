"""
WP Lab - Test Suite

This package contains all tests for the Weil-Petersson curve lab.
"""

__version__ = "1.0.0"

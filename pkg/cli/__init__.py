# cli/__init__.py
"""
Command-line interface.

Example:
    python -m cli.main generate --out data/synth --per-class 50 --side 32
"""
from .main import build_parser, main

__all__ = ["build_parser", "main"]

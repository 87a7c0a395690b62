# infrastructure/__init__.py
"""Cross-cutting infrastructure (logging)."""

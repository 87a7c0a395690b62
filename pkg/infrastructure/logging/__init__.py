# infrastructure/logging/__init__.py
"""
Centralized logging setup.

Example:
    import logging
    from infrastructure.logging import init_logging
    init_logging(level="DEBUG", log_dir="logs")
    logging.getLogger(__name__).info("ready")
"""
from .logger_config import LoggerConfig, init_logging

__all__ = ["LoggerConfig", "init_logging"]

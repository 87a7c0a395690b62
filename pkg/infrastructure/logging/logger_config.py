"""
Logging Configuration - Centralized logger setup

Responsibility: uniform logging across the CLI and the library packages,
console output plus an optional rotating log file.

Library modules only call ``logging.getLogger(__name__)``; the CLI calls
``init_logging`` once so every module logger inherits the handlers.
"""

import logging
import logging.handlers
import os
import sys
from pathlib import Path
from typing import Optional

LOG_FORMAT = '%(asctime)s [%(name)s] %(levelname)s: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
ENV_LEVEL = "CHEBCNN_LOG_LEVEL"


class LoggerConfig:
    """Centralized logging configuration"""

    def __init__(
        self,
        log_dir: Optional[str] = None,
        level: str = "INFO",
        max_bytes: int = 10 * 1024 * 1024,  # 10 MB
        backup_count: int = 5
    ):
        """
        Args:
            log_dir: Directory for rotating log files (None = console only)
            level: DEBUG, INFO, WARNING, ERROR or CRITICAL
            max_bytes: Size before rotating
            backup_count: Rotated files to keep
        """
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir is not None:
            self.log_dir.mkdir(parents=True, exist_ok=True)

        level_name = os.environ.get(ENV_LEVEL, level).upper()
        if not isinstance(getattr(logging, level_name, None), int):
            raise ValueError(f"Unknown log level: {level_name}")
        self.level = getattr(logging, level_name)
        self.max_bytes = max_bytes
        self.backup_count = backup_count

    def configure_root(self, name: str = "chebcnn") -> logging.Logger:
        """
        Attach handlers to the root logger so every module logger shares them

        Args:
            name: Base name of the log file

        Returns:
            The root logger
        """
        root = logging.getLogger()
        root.setLevel(self.level)
        root.handlers.clear()

        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(self.level)
        console_handler.setFormatter(formatter)
        root.addHandler(console_handler)

        if self.log_dir is not None:
            log_path = self.log_dir / f"{name}.log"
            try:
                file_handler = logging.handlers.RotatingFileHandler(
                    log_path,
                    maxBytes=self.max_bytes,
                    backupCount=self.backup_count,
                    encoding='utf-8'
                )
                file_handler.setLevel(self.level)
                file_handler.setFormatter(formatter)
                root.addHandler(file_handler)
            except OSError as e:
                root.warning(f"⚠️ Could not create file handler: {e}")

        return root


# Global instance
_logger_config: Optional[LoggerConfig] = None


def init_logging(level: str = "INFO", log_dir: Optional[str] = None) -> LoggerConfig:
    """
    Initialize global logging; call once at program start

    Args:
        level: Minimum logging level
        log_dir: Optional directory for rotating files

    Returns:
        LoggerConfig instance
    """
    global _logger_config
    _logger_config = LoggerConfig(log_dir=log_dir, level=level)
    _logger_config.configure_root()
    return _logger_config

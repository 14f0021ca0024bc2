"""
Run report for the Tropical EP Analyzer.

This module keeps the summary of every command run against one output
directory and persists it as report.json, so successive commands
accumulate into a single artifact.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from app.errors import InputError

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1


class RunReport:
    """
    Accumulated results of the commands run into one output directory.

    The report is loaded from disk when present, updated per command and
    written back with sorted keys.
    """

    def __init__(self, output_dir: Union[str, Path], source: Optional[Dict[str, Any]] = None):
        """Initialize the report, loading an existing report.json if present."""
        self.report_file_path = Path(output_dir) / "report.json"
        self.data: Dict[str, Any] = {"schema": REPORT_SCHEMA}
        self._load_report()
        if source is not None:
            if self.data.get("input") not in (None, source):
                logger.warning("Input changed since the last run; dropping previous results")
                self.data = {"schema": REPORT_SCHEMA}
            self.data["input"] = source

    def _load_report(self):
        """Load the report from disk if available."""
        try:
            if os.path.exists(self.report_file_path):
                with open(self.report_file_path, "r", encoding="utf-8") as f:
                    data = json.load(f)
                if data.get("schema") == REPORT_SCHEMA:
                    self.data = data
                    logger.info(f"Loaded report from {self.report_file_path}")
                else:
                    logger.warning(f"Ignoring report with unknown schema in {self.report_file_path}")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error loading report: {str(e)}")

    def _save_report(self):
        """Save the report to disk."""
        try:
            with open(self.report_file_path, "w", encoding="utf-8") as f:
                json.dump(self.data, f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            raise InputError(f"cannot write {self.report_file_path}: {e}") from e
        logger.debug(f"Saved report to {self.report_file_path}")

    def record(self, command: str, payload: Dict[str, Any]) -> None:
        """Store the result of one command and persist the report."""
        self.data[command] = payload
        self._save_report()

    def get(self, command: str) -> Optional[Dict[str, Any]]:
        return self.data.get(command)

"""Loader for the bundled JSON report schema."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def report_schema() -> dict:
    """The JSON schema every CLI report conforms to."""
    path = resources.files("tfm_lab") / "schemas" / "report.schema.json"
    return json.loads(path.read_text())

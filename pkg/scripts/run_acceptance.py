#!/usr/bin/env python3
"""Run the acceptance suite (tests/test_acceptance.py) with verdict lines."""
import sys

import pytest

if __name__ == "__main__":
    sys.exit(pytest.main(["tests/test_acceptance.py", "-q", *sys.argv[1:]]))

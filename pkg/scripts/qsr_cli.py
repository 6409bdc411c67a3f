"""
Command-line wrapper: python scripts/qsr_cli.py <command> --config <path> [...]
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())

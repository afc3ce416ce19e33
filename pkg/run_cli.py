#!/usr/bin/env python3
"""
Development entry point for the qcs command line
Runs the CLI from a source checkout without installing the package
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


def run():
    try:
        # Import here to catch missing dependencies with a hint
        from app.main import main
    except ImportError as e:
        print(f"Import error: {e}", file=sys.stderr)
        print("Try installing dependencies with: pip install -r requirements.txt", file=sys.stderr)
        sys.exit(1)
    sys.exit(main())


if __name__ == "__main__":
    run()

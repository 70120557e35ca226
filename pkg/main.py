#!/usr/bin/env python3
"""Launch script for cartankit."""
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent))

from cartankit.app import main

if __name__ == '__main__':
    sys.exit(main())

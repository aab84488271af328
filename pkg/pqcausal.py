"""Command-line launcher for pqcausal.

Why this design:
- Allow `python pqcausal.py <command>` from a source checkout.
- Delegate to src.index main so the CLI has a single implementation.
- Keep the script tiny for packaging.
"""

from __future__ import annotations

from src.index import main


if __name__ == "__main__":
    raise SystemExit(main())

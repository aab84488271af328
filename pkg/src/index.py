"""Application entry point for pqcausal.

Why this design:
- Configure logging before dispatch to capture early failures.
- Keep stdout reserved for the JSON run report; logs go to stderr.
- Provide a callable `main` for tests and packaging scripts.
"""

from __future__ import annotations

import logging
import sys
from typing import Optional, Sequence

from .ui.cli import dispatch

# One report per run.


def configure_logging(level: str = "WARNING") -> None:
    numeric = logging.getLevelName(str(level).upper())
    logging.basicConfig(
        level=numeric if isinstance(numeric, int) else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    return dispatch(argv, configure=configure_logging)


if __name__ == "__main__":
    raise SystemExit(main())

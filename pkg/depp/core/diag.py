from __future__ import annotations

import os
import sys


def debug_enabled() -> bool:
    return bool(os.environ.get("DEPP_DEBUG"))


def debug(msg: str, *, scope: str | None = None) -> None:
    """Debug line on stderr, only when DEPP_DEBUG is set."""
    if not debug_enabled():
        return
    prefix = f"[depp][{scope}]" if scope else "[depp]"
    sys.stderr.write(f"{prefix} {msg}\n")


def error(msg: str) -> None:
    sys.stderr.write(f"[depp] error: {msg}\n")

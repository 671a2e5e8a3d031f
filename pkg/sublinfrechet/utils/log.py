from __future__ import annotations

import os
import sys

PREFIX = "[sublinfrechet]"


def log(msg: str) -> None:
    # stdout carries JSON/CSV results, so diagnostics go to stderr
    print(f"{PREFIX} {msg}", file=sys.stderr)


def debug(msg: str) -> None:
    if os.environ.get("SUBLINFRECHET_DEBUG") == "1":
        try:
            print(f"{PREFIX} {msg}", file=sys.stderr)
        except Exception:
            pass

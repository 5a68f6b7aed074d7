"""Line-based `key = value` configuration files.

Blank lines and `#` comments are ignored.  Values auto-type to int, float,
bool, or comma-separated tuples of ints; everything else stays a string.
Defaults for every key live with the drivers that consume them (see the
README's configuration table).
"""

from __future__ import annotations

from pathlib import Path


def _autotype(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if "," in text:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return tuple(int(p) for p in parts)
        except ValueError:
            return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def load_config(path) -> dict:
    """Parse `key = value` lines into a typed dict."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"{path}:{lineno}: empty key")
        out[key] = _autotype(value)
    return out

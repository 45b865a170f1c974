import hashlib
import json
import logging
import math
import os
import tempfile

import numpy as np

logger = logging.getLogger("Helpers")


def generate_progress_bar(percent, length=15):
    """Generates a text-based progress bar."""
    percent = max(0, min(100, percent))
    filled_length = int(length * percent // 100)
    bar = "█" * filled_length + "-" * (length - filled_length)
    return f"[{bar}]"


def block_rng(seed, block):
    """Counter-based stream for one Monte Carlo block; independent of which worker runs it."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def format_float(value):
    """17 significant digits, the report-wide float format."""
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        return str(value)
    return format(value, ".17g")


def _encode(value):
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return format_float(value)
        return json.dumps(str(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        items = sorted(value.items(), key=lambda kv: str(kv[0]))
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in list(value)) + "]"
    return json.dumps(str(value))


def canonical_json(value):
    """Deterministic JSON: sorted keys, floats at 17 significant digits, no trailing whitespace."""
    return _encode(value)


def config_hash(configuration):
    return hashlib.sha256(canonical_json(configuration).encode("utf-8")).hexdigest()[:12]


def atomic_write_text(path, text):
    """Writes via a temp file in the same directory, then os.replace."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f"Wrote {len(text)} bytes to {path}")

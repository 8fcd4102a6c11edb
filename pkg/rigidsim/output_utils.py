import csv
import io
import json
import os
import tempfile
from typing import Any, Iterable, List

from rigidsim.constants import TRAJECTORY_COLUMNS


def _atomic_write_text(text: str, dst_path: str) -> None:
    dst_dir = os.path.dirname(os.path.abspath(dst_path))
    os.makedirs(dst_dir, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=dst_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_path, dst_path)
    finally:
        if os.path.exists(tmp_path):
            try:
                os.remove(tmp_path)
            except OSError:
                pass


def format_float(x: float) -> str:
    # repr is the shortest string that round-trips, never more than 17 digits
    return repr(float(x))


def trajectory_csv(samples: Iterable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for s in samples:
        writer.writerow([format_float(v) for v in s.as_row()])
    return buf.getvalue()


def trajectory_jsonl(samples: Iterable) -> str:
    lines = [json.dumps(dict(zip(TRAJECTORY_COLUMNS, s.as_row())), sort_keys=True) for s in samples]
    return "".join(line + "\n" for line in lines)


def write_trajectory(samples: List, dst_path: str, fmt: str = "csv") -> None:
    if fmt == "csv":
        text = trajectory_csv(samples)
    elif fmt == "jsonl":
        text = trajectory_jsonl(samples)
    else:
        raise ValueError(f"Unknown trajectory format '{fmt}'")
    _atomic_write_text(text, dst_path)


def write_json(data: Any, dst_path: str) -> None:
    _atomic_write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", dst_path)


def format_time(seconds: float) -> str:
    """
    Formats a duration into a short string like '1m 3s', '2.41s' or '35ms'.
    """
    if seconds <= 0:
        return "0s"
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.2f}s"

    m, s = divmod(int(seconds), 60)
    h, m = divmod(m, 60)

    parts = []
    if h > 0:
        parts.append(f"{h}h")
    if m > 0:
        parts.append(f"{m}m")
    parts.append(f"{s}s")
    return " ".join(parts)

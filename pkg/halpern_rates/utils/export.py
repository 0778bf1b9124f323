"""Atomic CSV and JSON output."""
import csv
import json
import os
import tempfile

from halpern_rates.models.reports import jsonable


def _atomic_write(path, writer):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            writer(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, columns, rows, format_tag):
    """CSV with a ``# format: <tag>`` comment line before the header."""

    def writer(handle):
        handle.write(f"# format: {format_tag}\n")
        out = csv.writer(handle, lineterminator="\n")
        out.writerow(columns)
        for row in rows:
            out.writerow(row)

    return _atomic_write(path, writer)


def write_json(path, data):
    def writer(handle):
        json.dump(jsonable(data), handle, indent=2, ensure_ascii=False)
        handle.write("\n")

    return _atomic_write(path, writer)

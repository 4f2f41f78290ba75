"""CSV and manifest emission shared by the experiment commands.

All files are UTF-8 with '\\n' line endings, a header row, '.' decimal
floats via repr (shortest round-trip), so reruns of the same configuration
are byte-identical.
"""

from __future__ import annotations

import datetime
import json
import os

SUMMARY_HEADER = "factor,value,arm,median,q1,q3,count,failures"
RAW_HEADER = "arm,repetition,error"


def format_float(x: float) -> str:
    return repr(float(x))


def _slug(value) -> str:
    return str(value).replace(".", "p").replace("-", "m")


def write_raw_errors(out_dir, factor: str, value, trials) -> str:
    """Per-cell raw errors, one row per (arm, repetition, sample)."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(str(out_dir), f"raw_{factor}_{_slug(value)}.csv")
    lines = [RAW_HEADER]
    for trial in trials:
        for arm in ("dp", "nondp"):
            errors = getattr(trial, f"{arm}_errors")
            if errors is None:
                continue
            for err in errors:
                lines.append(f"{arm},{trial.repetition},{format_float(err)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_summary(out_dir, records) -> str:
    """One row per (cell, arm); empty quantile fields when an arm never fit."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(str(out_dir), "summary.csv")
    lines = [SUMMARY_HEADER]
    for record in records:
        for arm in ("dp", "nondp"):
            summary = getattr(record, f"{arm}_summary")
            failures = getattr(record, f"{arm}_failures")
            if summary is None:
                stats = ",,,0"
            else:
                stats = ",".join(
                    [
                        format_float(summary.median),
                        format_float(summary.q1),
                        format_float(summary.q3),
                        str(summary.count),
                    ]
                )
            lines.append(
                f"{record.factor_name},{record.factor_value},{arm},{stats},{failures}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_manifest(out_dir, command: str, config: dict, outputs, seed_base) -> str:
    """Everything needed to reproduce a run: command, config echo, outputs."""
    from . import __version__

    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(str(out_dir), "manifest.json")
    manifest = {
        "command": command,
        "config": config,
        "seed_base": seed_base,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": sorted(os.path.basename(str(p)) for p in outputs),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path

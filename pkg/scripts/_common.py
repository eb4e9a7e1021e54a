"""Shared helpers for the experiment scripts."""

from __future__ import annotations

import argparse
from pathlib import Path

from confext.cli import write_records


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return p


def save(records, columns, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    write_records(records, columns, "csv", path)
    print(f"wrote {len(records)} rows to {path}")
    return path

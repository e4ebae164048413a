#!/usr/bin/env python3
"""Regenerate the committed scenario JSON files from the builders."""

import json
from pathlib import Path

from ensim import scenarios

OUT = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    OUT.mkdir(exist_ok=True)
    for name, builder in sorted(scenarios.BUILDERS.items()):
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(builder(), indent=2) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

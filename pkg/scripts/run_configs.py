"""Run every bundled config through the CLI and print one status line each.

    python3 scripts/run_configs.py [--out DIR]
"""

import argparse
from pathlib import Path

from univkern.cli import main as cli_main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("univkern-out"))
    args = ap.parse_args()
    worst = 0
    for path in sorted(CONFIG_DIR.glob("*.toml")):
        code = cli_main(["report", str(path), "--out", str(args.out), "--quiet"])
        worst = max(worst, code)
        print(f"{path.stem:20s} exit {code}")
    return worst


if __name__ == "__main__":
    raise SystemExit(main())

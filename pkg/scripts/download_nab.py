#!/usr/bin/env python3
"""Fetch the six benchmarked NAB datasets plus the combined anomaly windows.

Usage: python scripts/download_nab.py [target_dir]

Creates target_dir (default ./data/nab) mirroring the NAB repository layout
expected by `autoad bench --nab-dir target_dir`.
"""

import sys
import urllib.request
from pathlib import Path

BASE = "https://raw.githubusercontent.com/numenta/NAB/master"

FILES = [
    "data/realTweets/Twitter_volume_CRM.csv",
    "data/realTweets/Twitter_volume_FB.csv",
    "data/realTweets/Twitter_volume_GOOG.csv",
    "data/realKnownCause/nyc_taxi.csv",
    "data/realKnownCause/machine_temperature_system_failure.csv",
    "data/realAWSCloudwatch/cpu_utilization_asg_misconfiguration.csv",
    "labels/combined_windows.json",
]


def main() -> int:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/nab")
    for rel in FILES:
        # data files live under data/ in the NAB repo but are expected
        # directly under the target directory here
        dest_rel = rel[len("data/") :] if rel.startswith("data/") else rel
        dest = target / dest_rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        if dest.exists():
            print(f"already present: {dest}")
            continue
        url = f"{BASE}/{rel}"
        print(f"fetching {url}")
        with urllib.request.urlopen(url) as resp:
            dest.write_bytes(resp.read())
    print(f"done; pass --nab-dir {target} to `autoad bench`")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

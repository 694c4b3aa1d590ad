"""Prepare the public datasets for full-scale runs (acceptance criterion 9).

    python scripts/fetch_datasets.py --dest datasets/ --adclick ~/Downloads/advertising.csv
    export AUDITNB_ADCLICK_CSV=datasets/adclick.csv AUDITNB_SMS_CSV=datasets/sms.csv
    pytest tests/test_acceptance.py -k criterion_9 -rs

* SMS spam corpus: downloaded from the UCI repository (tab-separated
  ``label<TAB>message``) and rewritten as a ``label,text`` CSV.
* Customer ad-click table: distributed through Kaggle behind a login, so it is
  not downloaded; pass the local ``advertising.csv`` and it is checked and copied.

The tool itself never touches the network; only this script does.
"""

from __future__ import annotations

import argparse
import csv
import io
import shutil
import sys
import urllib.request
import zipfile
from pathlib import Path

SMS_URL = "https://archive.ics.uci.edu/static/public/228/sms+spam+collection.zip"
ADCLICK_COLUMNS = ("Daily Time Spent on Site", "Age", "Area Income", "Daily Internet Usage", "Clicked on Ad")


def fetch_sms(dest: Path, url: str) -> Path:
    with urllib.request.urlopen(url, timeout=60) as resp:
        blob = resp.read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        raw = zf.read("SMSSpamCollection").decode("utf-8", errors="replace")
    out = dest / "sms.csv"
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "text"])
        for line in raw.splitlines():
            if line.strip():
                label, _, message = line.partition("\t")
                w.writerow([label.strip(), message])
    return out


def copy_adclick(src: Path, dest: Path) -> Path:
    with open(src, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    missing = [c for c in ADCLICK_COLUMNS if c not in header]
    if missing:
        sys.exit(f"{src}: missing columns {missing}")
    out = dest / "adclick.csv"
    shutil.copyfile(src, out)
    return out


def main():
    ap = argparse.ArgumentParser(description="prepare public datasets for full-scale runs")
    ap.add_argument("--dest", default="datasets")
    ap.add_argument("--adclick", help="local copy of the Kaggle advertising.csv")
    ap.add_argument("--sms-url", default=SMS_URL)
    ap.add_argument("--skip-sms", action="store_true")
    args = ap.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    if not args.skip_sms:
        print("sms ->", fetch_sms(dest, args.sms_url))
    if args.adclick:
        print("adclick ->", copy_adclick(Path(args.adclick), dest))


if __name__ == "__main__":
    main()

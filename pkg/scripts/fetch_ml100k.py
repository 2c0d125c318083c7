"""Materialize MovieLens-100K (u.data, u.user, u.item) in its native layout.

Tries the GroupLens zip first, then falls back to the copy bundled in the
``pytorch-widedeep`` wheel (fetched with ``pip download``).

    python scripts/fetch_ml100k.py [--dest data/ml-100k]
"""
import argparse
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]


def from_grouplens(dest: Path) -> bool:
    try:
        with urllib.request.urlopen(GROUPLENS_URL, timeout=10) as resp:
            blob = resp.read()
    except OSError as exc:
        print(f"grouplens download failed: {exc}", file=sys.stderr)
        return False
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        for name in ("u.data", "u.user", "u.item"):
            (dest / name).write_bytes(zf.read(f"ml-100k/{name}"))
    return True


def _fmt(v) -> str:
    if v is None or v != v:  # NaN
        return ""
    return str(v)


def from_widedeep(dest: Path) -> bool:
    import pandas as pd

    with tempfile.TemporaryDirectory() as tmp:
        cmd = [sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp,
               "pytorch-widedeep==1.7.0"]
        if subprocess.run(cmd).returncode != 0:
            return False
        wheel = next(Path(tmp).glob("pytorch_widedeep-*.whl"))
        frames = {}
        with zipfile.ZipFile(wheel) as zf:
            for part in ("data", "users", "items"):
                member = f"pytorch_widedeep/datasets/data/MovieLens100k_{part}.parquet.brotli"
                frames[part] = pd.read_parquet(io.BytesIO(zf.read(member)))

    data = frames["data"]
    with open(dest / "u.data", "w") as fh:
        for row in data.itertuples(index=False):
            fh.write(f"{row.user_id}\t{row.movie_id}\t{row.rating}\t{row.timestamp}\n")
    with open(dest / "u.user", "w") as fh:
        for row in frames["users"].itertuples(index=False):
            fh.write(f"{row.user_id}|{row.age}|{row.gender}|{row.occupation}|{row.zip_code}\n")
    items = frames["items"]
    with open(dest / "u.item", "w", encoding="latin-1") as fh:
        for _, row in items.iterrows():
            fields = [str(row["movie_id"]), _fmt(row["movie_title"]), _fmt(row["release_date"]),
                      _fmt(row["video_release_date"]), _fmt(row["IMDb_URL"])]
            fields += [str(int(row[g])) for g in GENRES]
            fh.write("|".join(fields) + "\n")
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="data/ml-100k")
    args = parser.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    if from_grouplens(dest) or from_widedeep(dest):
        print(f"MovieLens-100K written to {dest}")
        return 0
    print("could not obtain MovieLens-100K", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())

"""Build the benchmark CSV files from copies of the public datasets shipped in PyPI wheels.

    python scripts/fetch_data.py [--dest DIR] [--wheels DIR]

Wheels are fetched with ``pip download`` unless ``--wheels`` already holds
them. Output files: diabetes.csv, spambase.csv, heart.csv, mnist.csv.
"""

import argparse
import csv
import glob
import gzip
import io
import os
import subprocess
import sys
import tempfile
import zipfile

WHEELS = {"keel": "keel-ds==0.2.5", "orange": "orange3==3.39.0", "mlxtend": "mlxtend==0.24.0"}

DIABETES_COLUMNS = ["Pregnancies", "Glucose", "BloodPressure", "SkinThickness", "Insulin",
                    "BMI", "DiabetesPedigreeFunction", "Age", "Outcome"]

SPAM_WORDS = ["make", "address", "all", "3d", "our", "over", "remove", "internet", "order",
              "mail", "receive", "will", "people", "report", "addresses", "free", "business",
              "email", "you", "credit", "your", "font", "000", "money", "hp", "hpl", "george",
              "650", "lab", "labs", "telnet", "857", "data", "415", "85", "technology", "1999",
              "parts", "pm", "direct", "cs", "meeting", "original", "project", "re", "edu",
              "table", "conference"]
SPAM_CHARS = ["semicolon", "paren", "bracket", "exclaim", "dollar", "hash"]
SPAM_COLUMNS = ([f"word_freq_{w}" for w in SPAM_WORDS] + [f"char_freq_{c}" for c in SPAM_CHARS]
                + ["capital_run_length_average", "capital_run_length_longest",
                   "capital_run_length_total", "spam"])

HEART_COLUMNS = ["age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach", "exang",
                 "oldpeak", "slope", "ca", "thal", "target"]
HEART_CODES = {
    1: {"male": "1", "female": "0"},
    2: {"typical ang": "1", "atypical ang": "2", "non-anginal": "3", "asymptomatic": "4"},
    6: {"normal": "0", "ST-T abnormal": "1", "left vent hypertrophy": "2"},
    10: {"upsloping": "1", "flat": "2", "downsloping": "3"},
    12: {"normal": "3", "fixed defect": "6", "reversable defect": "7"},
}


def wheel(wheels_dir, key):
    prefix = WHEELS[key].split("==")[0].replace("-", "_")
    found = glob.glob(os.path.join(wheels_dir, f"{prefix}-*.whl"))
    if not found:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                        WHEELS[key], "-d", wheels_dir], check=True)
        found = glob.glob(os.path.join(wheels_dir, f"{prefix}-*.whl"))
    return zipfile.ZipFile(found[0])


def write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def keel_rows(text):
    return [[c.strip() for c in line.split(",")] for line in text.splitlines()
            if line.strip() and not line.startswith("@")]


def build(dest, wheels_dir):
    os.makedirs(dest, exist_ok=True)
    z = wheel(wheels_dir, "keel")
    rows = keel_rows(z.read("keel_ds/data/balanced/raw/pima.dat").decode())
    for r in rows:
        r[-1] = "1" if r[-1] == "tested_positive" else "0"
    write(os.path.join(dest, "diabetes.csv"), DIABETES_COLUMNS, rows)
    rows = keel_rows(z.read("keel_ds/data/balanced/raw/spambase.dat").decode())
    write(os.path.join(dest, "spambase.csv"), SPAM_COLUMNS, rows)

    z = wheel(wheels_dir, "orange")
    lines = z.read("Orange/datasets/heart_disease.tab").decode().splitlines()[3:]
    rows = []
    for line in lines:
        if not line.strip():
            continue
        cells = line.split("\t")
        for j, mapping in HEART_CODES.items():
            if cells[j] != "?":
                cells[j] = mapping[cells[j]]
        rows.append(["" if c == "?" else c for c in cells])
    write(os.path.join(dest, "heart.csv"), HEART_COLUMNS, rows)

    z = wheel(wheels_dir, "mlxtend")
    text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [[str(int(float(c))) for c in r] for r in rows if r]
    write(os.path.join(dest, "mnist.csv"), [f"pixel_{i}" for i in range(784)] + ["label"], rows)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dest", default=os.environ.get("RULEVOTE_DATA", "data"))
    ap.add_argument("--wheels", default=None)
    args = ap.parse_args(argv)
    if args.wheels:
        build(args.dest, args.wheels)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            build(args.dest, tmp)


if __name__ == "__main__":
    main()

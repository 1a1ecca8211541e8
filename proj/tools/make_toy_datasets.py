"""Regenerates the bundled toy datasets in data/datasets."""
import csv
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "datasets"


def write(name, header, rows, label, domain):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / f"{name}.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    with open(OUT / f"{name}.csv.meta.json", "w") as f:
        json.dump({"label_column": label, "domain_tag": domain}, f, indent=2)
        f.write("\n")


def credit_risk(rng):
    rows = []
    for _ in range(240):
        income = rng.lognormal(10.5, 0.4)
        debt = rng.beta(2, 5)
        age = int(rng.integers(21, 70))
        employment = rng.choice(["salaried", "self-employed", "unemployed"], p=[0.6, 0.3, 0.1])
        late = int(rng.poisson(0.8))
        z = -1.0 + 3.0 * debt + 0.6 * late - 0.00003 * (income - 36000) + (1.2 if employment == "unemployed" else 0)
        label = "default" if rng.random() < 1 / (1 + np.exp(-z)) else "repaid"
        cells = [f"{income:.0f}", f"{debt:.3f}", str(age), employment, str(late), label]
        if rng.random() < 0.04:
            cells[2] = "NA"
        rows.append(cells)
    write("credit_risk", ["income", "debt_ratio", "age", "employment", "late_payments", "outcome"], rows,
          "outcome", "finance")


def heart_screening(rng):
    rows = []
    for _ in range(200):
        age = int(rng.integers(30, 80))
        bp = rng.normal(130, 15)
        chol = rng.normal(220, 35)
        max_hr = rng.normal(200 - 0.8 * age, 12)
        smoker = rng.choice(["yes", "no"], p=[0.3, 0.7])
        z = 0.06 * (age - 55) + 0.03 * (bp - 130) + 0.01 * (chol - 220) - 0.03 * (max_hr - 150) + (0.8 if smoker == "yes" else 0)
        label = 1 if rng.random() < 1 / (1 + np.exp(-z)) else 0
        cells = [str(age), f"{bp:.1f}", f"{chol:.0f}", f"{max_hr:.0f}", smoker, str(label)]
        if rng.random() < 0.05:
            cells[2] = "?"
        rows.append(cells)
    write("heart_screening", ["age", "resting_bp", "cholesterol", "max_heart_rate", "smoker", "disease"], rows,
          "disease", "health and medicine")


def wine_grade(rng):
    rows = []
    for _ in range(210):
        acidity = rng.normal(7.5, 1.2)
        sugar = rng.gamma(2.0, 1.5)
        alcohol = rng.normal(10.8, 1.1)
        sulphates = rng.normal(0.65, 0.15)
        ph = rng.normal(3.3, 0.15)
        score = 1.1 * (alcohol - 10.8) + 3.0 * (sulphates - 0.65) - 0.2 * (acidity - 7.5) + rng.normal(0, 0.6)
        label = "high" if score > 0.7 else ("low" if score < -0.7 else "mid")
        rows.append([f"{acidity:.2f}", f"{sugar:.2f}", f"{alcohol:.2f}", f"{sulphates:.3f}", f"{ph:.2f}", label])
    write("wine_grade", ["fixed_acidity", "residual_sugar", "alcohol", "sulphates", "ph", "grade"], rows,
          "grade", "food and agriculture")


if __name__ == "__main__":
    rng = np.random.default_rng(20240611)
    credit_risk(rng)
    heart_screening(rng)
    wine_grade(rng)

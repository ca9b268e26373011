"""Writes abilities.csv: a 17-test, six-ability correlation matrix.

Correlated-factor model Λ Φ Λᵀ + Ψ sampled at n = 212 and rounded to three
decimals, in the layout of the classic ability-test batteries.
"""
import numpy as np

tests = {
    "M": ["First_Names", "Word_Number"],
    "V": ["Sentences", "Vocabulary", "Completion"],
    "W": ["First_Letters", "Four_Letter_Words", "Suffixes"],
    "S": ["Flags", "Figures", "Cards"],
    "N": ["Addition", "Multiplication", "Three_Higher"],
    "R": ["Letter_Series", "Pedigrees", "Letter_Grouping"],
}
abilities = list(tests)
phi = np.array([
    # M    V    W    S    N    R
    [1.0, 0.25, 0.30, 0.10, 0.25, 0.30],
    [0.25, 1.0, 0.45, 0.15, 0.30, 0.60],
    [0.30, 0.45, 1.0, 0.15, 0.35, 0.45],
    [0.10, 0.15, 0.15, 1.0, 0.20, 0.25],
    [0.25, 0.30, 0.35, 0.20, 1.0, 0.35],
    [0.30, 0.60, 0.45, 0.25, 0.35, 1.0],
])
rng = np.random.default_rng(1941)
labels, lam = [], []
for a, names in tests.items():
    for name in names:
        row = np.zeros(len(abilities))
        row[abilities.index(a)] = rng.uniform(0.65, 0.9)
        labels.append(name)
        lam.append(row)
lam = np.array(lam)
pop = lam @ phi @ lam.T
np.fill_diagonal(pop, 1.0)
x = rng.multivariate_normal(np.zeros(len(labels)), pop, size=212)
r = np.round(np.corrcoef(x, rowvar=False), 3)
np.fill_diagonal(r, 1.0)
assert np.linalg.eigvalsh(r).min() > 0
with open("abilities.csv", "w") as f:
    f.write(",".join(labels) + "\n")
    for row in r:
        f.write(",".join(f"{v:.3f}".rstrip("0").rstrip(".") if v != 1 else "1" for v in row) + "\n")

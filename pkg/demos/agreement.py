# # Agreement between two validators
#
# Each validator rates annotated records on a 1 to 4 scale. Cohen's kappa
# corrects the raw agreement for what two raters would reach by chance.

# %%
import random

from readmefeat.agree import RatingSheet, cohen_kappa, rating_distribution

rng = random.Random(3)
items = [f"repo{i}" for i in range(40)]
first = {k: rng.choice([3, 4, 4, 4]) for k in items}
# the second validator agrees most of the time
second = {k: v if rng.random() < 0.85 else rng.randint(1, 4) for k, v in first.items()}

a = RatingSheet("validator_a", first)
b = RatingSheet("validator_b", second)
print(rating_distribution(a))
print(rating_distribution(b))

# %%
raw = sum(first[k] == second[k] for k in items) / len(items)
print(f"raw agreement {raw:.3f}, kappa {cohen_kappa(a, b):.3f}")

# %% [markdown]
# Only items rated by both validators count.

# %%
partial = RatingSheet("validator_c", {k: first[k] for k in items[:10]})
print(cohen_kappa(a, partial))

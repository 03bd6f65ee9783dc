# # Scoring a matched pair
#
# Once features are paired, each pair gets lexical (ROUGE) and semantic scores.

# %%
from readmefeat import HashEmbedder
from readmefeat.textmetrics import aggregate_pair_metrics, rouge_l, rouge_n, score_pair

print(rouge_n("the cat sat", "the cat slept", 1))
print(rouge_n("the cat sat", "the cat slept", 2))
print(rouge_l("a b c d", "a c b d"))

# %% [markdown]
# The semantic score credits each token with its closest counterpart on the
# other side, so a reworded feature keeps some credit that ROUGE misses.

# %%
embedder = HashEmbedder()
pairs = [
    ("export reports as csv", "export reports to csv"),
    ("exporting csv reports", "export reports to csv"),
]
scores = [score_pair(c, r, embedder) for c, r in pairs]
for (c, r), s in zip(pairs, scores):
    print(f"{c!r} vs {r!r}: rouge1 F1 {s.rouge1.f1:.3f}, semantic F1 {s.semantic.f1:.3f}")

# %%
print(aggregate_pair_metrics(scores))

# # Aligning generated features with gold features
#
# Three ways to pair a list of generated functionalities with the annotated
# list: one-to-one (#), many-to-one (*) and weighted many-to-one (+).

# %%
import numpy as np

from readmefeat import HashEmbedder
from readmefeat.align import build_similarity_graph, match, scheme_scores, similarity_matrix

embedder = HashEmbedder()
gold = ["export reports to csv", "schedule nightly backups", "login with oauth"]
gen = ["export reports to csv and schedule nightly backups", "oauth login", "dark mode"]

# %% [markdown]
# Pairwise cosine similarities. Rows are generated features, columns gold ones.

# %%
np.set_printoptions(precision=3, suppress=True)
print(similarity_matrix(gen, gold, embedder))

# %% [markdown]
# Edges survive when the similarity reaches the threshold (inclusive).

# %%
graph = build_similarity_graph(gen, gold, embedder, threshold=0.3)
for e in graph.edges:
    print(f"gen {e.gen} -> gold {e.gold}: {e.similarity:.3f}")

# %% [markdown]
# The long first line covers two gold features. One-to-one may use it only
# once. Many-to-one lets it absorb both, and the weighted variant halves the
# credit of each of those edges.

# %%
for scheme in ("one2one", "many2one", "weighted"):
    result = match(graph, scheme)
    s = scheme_scores(result, len(gen), len(gold))
    pairs = ", ".join(f"({p.gen},{p.gold}) w={p.weight}" for p in result.pairs)
    print(f"{scheme:9s} P={s.precision:.3f} R={s.recall:.3f} F1={s.f1:.3f}  {pairs}")

# %% [markdown]
# Raising the threshold can only remove edges, so credit never grows.

# %%
for t in (0.3, 0.4, 0.5):
    g = build_similarity_graph(gen, gold, embedder, threshold=t)
    print(t, [len(match(g, s)) for s in ("one2one", "many2one")])

# # From README to training example and back
#
# Cleaning a README, building the prompt a model is trained on, and parsing
# a model's numbered answer into a feature list.

# %%
from readmefeat.corpus import (
    CorpusRecord,
    FeatureList,
    License,
    SplitSpec,
    make_inference_prompt,
    make_training_example,
    parse_feature_list,
    scrub_pii,
    split_corpus,
    strip_markdown,
)

raw = """# Daytrader

[![build](https://ci.example/badge.svg)](https://ci.example)

A **stock trading** toolkit. Questions: jane@example.com

- Buy or sell shares from the terminal
- Lookup stock quotes

```bash
pip install daytrader
```
"""

# %% [markdown]
# Markdown goes, code blocks go, e-mail addresses are masked.

# %%
clean = scrub_pii(strip_markdown(raw))
print(clean)

# %%
record = CorpusRecord(
    "octo/daytrader",
    clean,
    License.MIT,
    extractive=FeatureList(("Buy or sell shares from the terminal", "Lookup stock quotes")),
)
print(make_training_example(record))
print("---")
print(make_inference_prompt(record))

# %% [markdown]
# Model output usually runs past the list. Parsing stops at the first stop marker.

# %%
generation = "1. Buy or sell shares\n2) Lookup stock quotes\n- Lookup stock quotes\n</s>\nnoise"
print(parse_feature_list(generation))

# %% [markdown]
# Seeded splits are reproducible and keep the requested sizes.

# %%
corpus = [CorpusRecord(f"o/r{i}", "text", License.MIT) for i in range(10)]
split = split_corpus(corpus, SplitSpec(6, 2, 2, seed=1))
print([r.repo_id for r in split.test])

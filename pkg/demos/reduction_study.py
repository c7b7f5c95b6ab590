"""
Shrinking one tag pair
======================

Four tag pairs share one rule (ge- + stem + -t).  One pair's training data is
halved repeatedly.  A single model trained on all pairs keeps its accuracy
on that pair; a model trained on that pair alone does not.  Runs for a few
minutes.
"""

from medpoet.harness import halving_fractions, reduction_curve
from medpoet.med import MedConfig
from medpoet.synthetic import split_shared_rule

train, test = split_shared_rule(64, 50, pairs=4, seed=0)
pair = sorted(train.tag_pairs)[0]
config = MedConfig(hidden_size=32, embedding_size=32, iterations=2000)
fractions = halving_fractions()[::2]          # 100%, 25%, 6.25%

shared = reduction_curve(train, test, config, fractions, pair=pair)
alone = reduction_curve(train, test, config, fractions, pair=pair, pair_only=True)

print("fraction  pair-size  all-pairs  pair-only")
for a, b in zip(shared, alone):
    print(f"{a.fraction:8.4f}  {a.pair_train_size:9d}  {100 * a.accuracy:9.1f}  {100 * b.accuracy:9.1f}")

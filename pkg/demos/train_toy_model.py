"""
Training a small MED model
==========================

One encoder-decoder for all tag pairs of a synthetic corpus: prefixing,
suffixing, stem-vowel umlaut and identity, two tag pairs each.  Takes about
a minute on one core.
"""

import numpy as np

from medpoet import MedConfig, ensemble_predict, train
from medpoet.corpus import Sample
from medpoet.synthetic import rules_corpus

# 25 stems per tag pair; with only a handful the model memorises instead of
# learning the rules.
corpus = rules_corpus(per_pair=25, seed=0)
for s in corpus[::50]:
    print(s.source_tag, s.source_form, "->", s.target_tag, s.target_form)

# Small layers are plenty here; the defaults are 100 units.
config = MedConfig(hidden_size=32, embedding_size=32, iterations=1500, log_every=250)
model = train(corpus, config)
for it, loss in model.log:
    print(f"iteration {it:5d}  loss {loss:.4f}")

# Unseen stems.  The tags select the rule.
for src, trg in [("pos=V,src=prefix1", "pos=V,trg=prefix1"),
                 ("pos=V,src=suffix2", "pos=V,trg=suffix2"),
                 ("pos=V,src=vowel1", "pos=V,trg=vowel1")]:
    probe = Sample("dulak", src, trg)
    print(trg, model.predict(probe), model.predict(probe, beam_width=4))

# Three members that differ only by seed vote on each output.
members = [model] + [train(corpus, config.replace(seed=s)) for s in (1, 2)]
print(ensemble_predict(members, Sample("dulak", "pos=V,src=prefix1", "pos=V,trg=prefix1"),
                       np.random.default_rng(0)))

"""Morphological reinflection with a single attention encoder-decoder (MED)
and edit-tree based output correction (POET)."""

from .corpus import Corpus, Sample, Vocabulary, build_vocab, load_tsv
from .edittree import apply_edit_tree, build_edit_tree, canonical_key, levenshtein
from .med import MedConfig, MedModel, ensemble_predict, load, predict, save, train
from .poet import PoetStore, build_store, correct

__version__ = "0.1.0"

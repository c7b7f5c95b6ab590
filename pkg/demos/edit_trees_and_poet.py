"""
Edit trees and POET
===================

How a source/target pair becomes an edit tree, how trees are stored per tag
pair, and how a near-miss prediction gets repaired.
"""

from medpoet import apply_edit_tree, build_edit_tree, build_store, canonical_key, correct
from medpoet.corpus import Corpus, Sample

# The tree for a German participle-to-infinitive pair.  The longest common
# substring "sag" is copied; what lies left and right of it is handled by
# subtrees.
tree = build_edit_tree("abgesagt", "absagen")
print(tree)
print(canonical_key(tree))

# Trees only record lengths and the differing strings, so they transfer to
# other verbs with the same pattern.
print(apply_edit_tree(tree, "angesagt"))
print(apply_edit_tree(tree, "abgelegt"))

# A tree that does not fit a word yields None.
print(apply_edit_tree(tree, "holt"))

# A store counts trees per (source tag, target tag).
train = Corpus([
    Sample("steuert", "pos=V,per=3", "pos=V,tense=PST", "gesteuert"),
    Sample("holt", "pos=V,per=3", "pos=V,tense=PST", "geholt"),
    Sample("sagt", "pos=V,per=3", "pos=V,tense=PST", "gesagt"),
])
store = build_store(train)
print(store.counts())

# "gspielt" is one edit away from "gespielt", whose tree is in the store;
# the wrong output is replaced.  An output whose tree is already known
# stays as it is.
print(correct(store, "spielt", "pos=V,per=3", "pos=V,tense=PST", "gspielt"))
print(correct(store, "spielt", "pos=V,per=3", "pos=V,tense=PST", "gespielt"))

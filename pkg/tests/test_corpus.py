import pytest
from hypothesis import given, strategies as st

from medpoet.corpus import (
    END, START, UNK, Corpus, CorpusFormatError, MalformedTagError, Sample, Vocabulary,
    build_vocab, decode_output, encode_input, encode_output, input_tokens, load_tsv,
    parse_tag, write_tsv,
)

GERMAN = Sample("isolierter", "pos=ADJ,case=GEN,num=PL", "pos=ADJ,case=ACC,num=PL", "isolierte")


def test_parse_tag_keyed():
    assert parse_tag("pos=ADJ,case=GEN,num=PL", "IN") == ["IN=pos=ADJ", "IN=case=GEN", "IN=num=PL"]
    assert parse_tag("pos=V,tense=PST", "OUT") == ["OUT=pos=V", "OUT=tense=PST"]


def test_parse_tag_unkeyed():
    assert parse_tag("pA", "OUT") == ["OUT=pA"]


@pytest.mark.parametrize("raw", ["", "a,,b", ","])
def test_parse_tag_malformed(raw):
    with pytest.raises(MalformedTagError):
        parse_tag(raw, "IN")


def test_load_tsv(tmp_path):
    f = tmp_path / "d.tsv"
    f.write_text("rP\tsteuert\tpA\tgesteuert\n", encoding="utf-8")
    corpus = load_tsv(f)
    assert len(corpus) == 1
    assert corpus[0] == Sample("steuert", "rP", "pA", "gesteuert")
    assert corpus.tag_pairs == {("rP", "pA")}


def test_load_tsv_empty(tmp_path):
    f = tmp_path / "d.tsv"
    f.write_text("", encoding="utf-8")
    assert len(load_tsv(f)) == 0


def test_load_tsv_bad_field_count(tmp_path):
    f = tmp_path / "d.tsv"
    f.write_text("rP\tsteuert\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="line 1"):
        load_tsv(f)


def test_load_tsv_prediction_file_without_targets(tmp_path):
    f = tmp_path / "d.tsv"
    f.write_text("rP\tsteuert\tpA\n\nrP\tholt\tpA\t\n", encoding="utf-8")
    corpus = load_tsv(f)
    assert [s.target_form for s in corpus] == [None, None]


def test_load_tsv_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_tsv(tmp_path / "nope.tsv")


def test_write_then_load(tmp_path):
    corpus = Corpus([GERMAN, Sample("steuert", "rP", "pA", "gesteuert")])
    write_tsv(corpus, tmp_path / "x.tsv")
    assert load_tsv(tmp_path / "x.tsv") == corpus


def test_build_vocab_minimal():
    v = build_vocab(Corpus([Sample("ab", "s", "t", "ba")]))
    assert v.characters == ("a", "b")
    assert set(v.input_tokens) == {START, END, UNK, "IN=s", "OUT=t", "a", "b"}
    assert v.output_tokens == (START, END, UNK, "a", "b")


def test_build_vocab_german_letters():
    v = build_vocab(Corpus([GERMAN]))
    assert set("isolert") <= set(v.characters)


def test_build_vocab_order_independent():
    a = Sample("ab", "s", "t", "ba")
    b = Sample("xyz", "pos=N", "pos=V", "zyx")
    assert build_vocab(Corpus([a, b])) == build_vocab(Corpus([b, a]))


def test_build_vocab_empty():
    with pytest.raises(ValueError):
        build_vocab(Corpus([]))


def test_vocab_invariants():
    v = build_vocab(Corpus([GERMAN, Sample("ab", "s", "t", "ba")]))
    for tokens in (v.input_tokens, v.output_tokens):
        assert len(set(tokens)) == len(tokens)
    src = [t for t in v.input_tokens if t.startswith("IN=")]
    trg = [t for t in v.input_tokens if t.startswith("OUT=")]
    assert src and trg
    chars = [t for t in v.input_tokens if t not in (START, END, UNK) and t not in src and t not in trg]
    assert tuple(sorted(chars)) == v.characters


def test_vocab_json_roundtrip(tmp_path):
    v = build_vocab(Corpus([GERMAN]))
    v.save(tmp_path / "v.json")
    assert Vocabulary.load(tmp_path / "v.json") == v
    assert '"format_version": 1' in (tmp_path / "v.json").read_text()


def test_encode_input_german_sample():
    v = build_vocab(Corpus([GERMAN]))
    ids = encode_input(GERMAN, v)
    tokens = [v.input_tokens[i] for i in ids]
    assert " ".join(tokens) == (
        "<w> IN=pos=ADJ IN=case=GEN IN=num=PL OUT=pos=ADJ OUT=case=ACC OUT=num=PL "
        "i s o l i e r t e r </w>"
    )
    assert len(ids) == 2 + 3 + 3 + len("isolierter")


def test_encode_input_unknown_character():
    v = build_vocab(Corpus([Sample("strasse", "s", "t", "strassen")]))
    ids = encode_input(Sample("straße", "s", "t"), v)
    assert ids[3 + 4] == v.unk_id
    assert ids.count(v.unk_id) == 1


def test_encode_output():
    v = build_vocab(Corpus([GERMAN]))
    ids = encode_output("isolierte", v)
    assert [v.output_tokens[i] for i in ids] == [START, *"isolierte", END]
    with pytest.raises(ValueError):
        encode_output("", v)


def test_decode_roundtrip_example():
    v = build_vocab(Corpus([Sample("abgesagt", "x", "y", "absagen")]))
    assert decode_output(encode_output("abgesagt", v), v) == "abgesagt"


def test_decode_without_end_is_flagged():
    v = build_vocab(Corpus([Sample("ab", "s", "t", "ba")]))
    ids = [v.start_id, v.output_id("a"), v.unk_id, v.output_id("b")]
    assert decode_output(ids, v, with_status=True) == ("ab", False)
    assert decode_output(ids + [v.end_id, v.output_id("a")], v, with_status=True) == ("ab", True)


@given(st.text(alphabet="abcdefgäöüß", min_size=1, max_size=20))
def test_output_roundtrip_property(form):
    v = build_vocab(Corpus([Sample("abcdefgäöüß", "s", "t", "x")]))
    assert decode_output(encode_output(form, v), v) == form


@given(
    st.lists(st.sampled_from(["a=1", "b=2", "c"]), min_size=1, max_size=3),
    st.lists(st.sampled_from(["a=1", "b=2", "c"]), min_size=1, max_size=3),
    st.text(alphabet="xyz", min_size=1, max_size=6),
)
def test_input_tokens_injective(src, trg, form):
    s = Sample(form, ",".join(src), ",".join(trg))
    toks = input_tokens(s)
    # the three parts can be read back unambiguously from the token sequence
    assert [t[3:] for t in toks if t.startswith("IN=")] == src
    assert [t[4:] for t in toks if t.startswith("OUT=")] == trg
    assert "".join(t for t in toks[1:-1] if "=" not in t or len(t) == 1) == form


def test_sample_validation():
    with pytest.raises(ValueError):
        Sample("", "a", "b")
    with pytest.raises(ValueError):
        Sample("x", "a", "b", "")

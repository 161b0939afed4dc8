import numpy as np
import pytest

from reasonplan.annotate import serialize_record, serialize_reasoning, trajectory_line
from reasonplan.config import Config
from reasonplan.text import (
    BOI,
    BOS,
    BOT,
    EOI,
    EOS,
    EOT,
    IMAGE,
    GrammarError,
    OutOfVocabError,
    SPECIALS,
    SequenceLayout,
    TrajectoryArityError,
    TrajectoryParseError,
    Vocab,
    assemble_input,
    assemble_target,
    build_vocab,
    concat_sequences,
    parse_target_grammar,
    parse_trajectory,
    tokenize,
)
from reasonplan.train import prepare_samples


@pytest.fixture(scope="module")
def corpus():
    from reasonplan.annotate import generate_dataset
    cfg = Config()
    records, _ = generate_dataset([("overtake", 0)], "/tmp/test_text_ds.jsonl", cfg,
                                  max_records=6)
    vocab = build_vocab([serialize_record(r) for r in records])
    return records, vocab


def _front_rows(layout):
    rows = list(range(layout.l_v))
    for g in range(6, layout.n_grids):
        rows.extend(range(g * layout.l_v, (g + 1) * layout.l_v))
    return np.asarray(rows, dtype=np.intp)


def test_specials_have_reserved_ids(corpus):
    _, vocab = corpus
    for i, word in enumerate(SPECIALS):
        assert vocab.word2id[word] == i
    assert (IMAGE, BOS, EOS, BOI, EOI, BOT, EOT) == (0, 1, 2, 3, 4, 5, 6)


def test_every_serializer_word_in_vocab(corpus):
    records, vocab = corpus
    for rec in records:
        for tok in tokenize(serialize_record(rec)):
            assert tok in vocab, tok


def test_unknown_word_maps_to_unk(corpus):
    _, vocab = corpus
    assert vocab.encode_word("zeppelin") == vocab.unk_id


def test_vocab_save_load_roundtrip(tmp_path, corpus):
    _, vocab = corpus
    path = tmp_path / "vocab.txt"
    vocab.save(path)
    loaded = Vocab.load(path)
    assert loaded.id2word == vocab.id2word


def test_tokenize_numbers_per_character():
    assert tokenize("12.50") == ["1", "2", ".", "5", "0"]
    assert tokenize("speed -3.2 m/s2") == ["speed", "-", "3", ".", "2", "m/s2"]


def test_assemble_input_slot_count_and_order(corpus):
    records, vocab = corpus
    layout = SequenceLayout(l_v=16)
    seq = assemble_input(records[0], vocab, layout)
    assert len(seq.t_slots) == 160
    assert seq.context_pos == 0
    # CAM_FRONT tag immediately precedes the first front slot
    first = seq.t_slots[0]
    assert vocab.id2word[seq.ids[first - 2]] == "CAM_FRONT"
    assert vocab.id2word[seq.ids[first - 1]] == ":"
    assert seq.ids[first] == IMAGE
    assert not seq.text_mask.any()
    again = assemble_input(records[0], vocab, layout)
    assert np.array_equal(seq.ids, again.ids)


def test_assemble_target_grammar_and_mask(corpus):
    records, vocab = corpus
    layout = SequenceLayout(l_v=16)
    rec = records[0]
    reasoning = serialize_reasoning(rec)
    traj = trajectory_line(rec.waypoints)
    tgt = assemble_target(reasoning, traj, vocab, layout, _front_rows(layout))
    assert tgt.ids[0] == BOS and tgt.ids[1] == BOI
    n_reason = len(vocab.encode(reasoning))
    n_traj = len(vocab.encode(traj))
    assert tgt.text_mask.sum() == n_reason + n_traj + 3
    assert len(tgt.front_future) == 5 * layout.l_v
    assert len(tgt.future_slots) == layout.n_slots
    parse_target_grammar(tgt.ids, layout.n_slots)


def test_mask_and_slots_disjoint(corpus):
    records, vocab = corpus
    layout = SequenceLayout(l_v=16)
    samples = prepare_samples(records[:2], vocab, layout)
    for sample in samples:
        for stage in (1, 2):
            seq = sample.seqs[stage]
            slots = np.concatenate([seq.t_slots, seq.future_slots])
            assert not seq.text_mask[slots].any()
            parse_target_grammar(seq.ids[seq.target_start:], layout.n_slots)


def test_specials_appear_once_each(corpus):
    records, vocab = corpus
    layout = SequenceLayout(l_v=16)
    sample = prepare_samples(records[:1], vocab, layout)[0]
    ids = sample.seqs[2].ids[sample.seqs[2].target_start:].tolist()
    for special in (BOS, EOS, BOI, EOI, BOT, EOT):
        assert ids.count(special) == 1


def test_out_of_vocab_raises_in_strict_mode(corpus):
    _, vocab = corpus
    layout = SequenceLayout(l_v=4)
    with pytest.raises(OutOfVocabError):
        assemble_target("zeppelin overhead", "", vocab, layout,
                        np.asarray([0], dtype=np.intp))


def test_grammar_rejects_corruptions(corpus):
    records, vocab = corpus
    layout = SequenceLayout(l_v=16)
    rec = records[0]
    tgt = assemble_target(serialize_reasoning(rec), trajectory_line(rec.waypoints),
                          vocab, layout, _front_rows(layout))
    good = tgt.ids.tolist()
    for mutate in (
        lambda ids: ids[1:],                      # drop [BOS]
        lambda ids: ids[:-1],                     # drop [EOS]
        lambda ids: ids[:50] + ids[51:],          # shrink the image span
        lambda ids: [ids[0]] + [EOT] + ids[1:],   # duplicate a special
    ):
        with pytest.raises(GrammarError):
            parse_target_grammar(mutate(list(good)), layout.n_slots)


def test_parse_trajectory_basics():
    pts = parse_trajectory("Trajectory: (0.00, 0.00), (1.00, 0.00), (2.00, 0.00), (3.00, 0.00)")
    assert pts == [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
    spaced = parse_trajectory("Trajectory : ( 1 2 . 5 , - 3 . 2 5 ) , ( 0 , 0 ) , ( 1 , 1 ) , ( 2 , 2 )")
    assert spaced[0] == (12.5, -3.25)


def test_parse_trajectory_arity_error():
    with pytest.raises(TrajectoryArityError) as err:
        parse_trajectory("Trajectory: (1, 2)")
    assert err.value.count == 1


def test_parse_trajectory_malformed_reports_position():
    with pytest.raises(TrajectoryParseError) as err:
        parse_trajectory("Trajectory: (1.0, oops), (1,1), (2,2), (3,3)")
    assert err.value.position > 0
    with pytest.raises(TrajectoryParseError):
        parse_trajectory("no header here")


def test_trajectory_roundtrip_through_serializer(corpus):
    records, vocab = corpus
    for rec in records:
        text = serialize_record(rec)
        pts = parse_trajectory(text.splitlines()[-1])
        for (px, py), (lx, ly) in zip(pts, rec.waypoints):
            assert abs(px - lx) <= 0.01 and abs(py - ly) <= 0.01


def test_trajectory_roundtrip_through_tokens(corpus):
    records, vocab = corpus
    rec = records[0]
    ids = vocab.encode(trajectory_line(rec.waypoints))
    pts = parse_trajectory(vocab.decode(ids))
    for (px, py), (lx, ly) in zip(pts, rec.waypoints):
        assert abs(px - lx) <= 0.01 and abs(py - ly) <= 0.01


def test_concat_sequences_offsets(corpus):
    records, vocab = corpus
    layout = SequenceLayout(l_v=16)
    rec = records[0]
    inp = assemble_input(rec, vocab, layout)
    tgt = assemble_target(serialize_reasoning(rec), trajectory_line(rec.waypoints),
                          vocab, layout, _front_rows(layout))
    full = concat_sequences(inp, tgt)
    assert full.target_start == len(inp.ids)
    assert full.future_slots[0] == len(inp.ids) + 2
    assert (full.ids[full.future_slots] == IMAGE).all()

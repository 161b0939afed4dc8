import numpy as np
import pytest

from reasonplan.autodiff import Tensor
from reasonplan.config import Config, FrontendConfig, ModelConfig
from reasonplan.model import (
    InferenceEngine,
    forward,
    forward_graph,
    generate,
    init_model_params,
    load_checkpoint,
    save_checkpoint,
)
from reasonplan.text import BOI, BOS, EOI, EOS, SequenceLayout, TokenSequence


def tiny_cfg():
    return ModelConfig(layers=2, heads=2, ff_mult=2, max_seq=96)


def make_seq(ids, future=(), t_slots=(), context=-1):
    ids = np.asarray(ids, dtype=np.int64)
    return TokenSequence(
        ids=ids,
        text_mask=np.zeros(len(ids), dtype=bool),
        t_slots=np.asarray(t_slots, dtype=np.intp),
        future_slots=np.asarray(future, dtype=np.intp),
        front_future=np.asarray([], dtype=np.intp),
        context_pos=context,
    )


@pytest.fixture
def params(rng):
    return init_model_params(tiny_cfg(), 8, 40, np.random.default_rng(3))


def test_causality_exact(params, rng):
    cfg = tiny_cfg()
    ids = rng.integers(7, 40, size=20)
    seq = make_seq(ids)
    out1 = forward(params, seq, None, None, cfg)
    for k in (5, 12, 19):
        mutated = ids.copy()
        mutated[k] = (mutated[k] + 3) % 33 + 7
        out2 = forward(params, make_seq(mutated), None, None, cfg)
        assert np.array_equal(out1.hidden[:k], out2.hidden[:k])
        assert np.array_equal(out1.logits[:k + 1], out2.logits[:k + 1])
        assert not np.allclose(out1.hidden[k], out2.hidden[k])


def test_residual_identity_with_zeroed_output_projections(params, rng):
    cfg = tiny_cfg()
    for i in range(cfg.layers):
        for name in (f"blk{i}.wo", f"blk{i}.w2", f"blk{i}.b2"):
            params[name] = Tensor(np.zeros_like(params[name].data), requires_grad=True)
    ids = rng.integers(7, 40, size=12)
    out = forward(params, make_seq(ids), None, None, cfg)
    expect = params["tok_emb"].data[ids] + params["pos_emb"].data[:12]
    assert np.allclose(out.hidden, expect, atol=1e-12)


def test_predicted_latents_read_previous_position(params, rng):
    cfg = tiny_cfg()
    ids = rng.integers(7, 40, size=16)
    future = [10, 11, 12]
    base_rows = Tensor(rng.normal(size=(3, 8)))
    seq = make_seq(ids, future=future)
    out = forward(params, seq, base_rows, np.asarray(future, dtype=np.intp), cfg)
    # latents must match the NSP head applied to hidden[p-1]
    for j, p in enumerate(future):
        manual = out.hidden[p - 1] @ params["nsp_head.w"].data + params["nsp_head.b"].data
        assert np.allclose(out.predicted_latents[j], manual)
    # perturbing the content injected AT p changes latents for p+1, not for p
    rows2 = Tensor(base_rows.data.copy())
    rows2.data[0] += 1.0   # slot at position 10
    out2 = forward(params, seq, rows2, np.asarray(future, dtype=np.intp), cfg)
    assert np.allclose(out.predicted_latents[0], out2.predicted_latents[0])
    assert not np.allclose(out.predicted_latents[1], out2.predicted_latents[1])


def test_override_injection_replaces_token_embedding(params, rng):
    cfg = tiny_cfg()
    ids = rng.integers(7, 40, size=10)
    pos = np.asarray([4], dtype=np.intp)
    rows = Tensor(rng.normal(size=(1, 8)))
    h1 = forward_graph(params, ids, pos, rows, cfg).data
    ids2 = ids.copy()
    ids2[4] = (ids[4] + 5) % 33 + 7   # different token id under the override
    h2 = forward_graph(params, ids2, pos, rows, cfg).data
    assert np.allclose(h1, h2)


def test_forward_rejects_overlong_sequence(params, rng):
    cfg = tiny_cfg()
    ids = rng.integers(7, 40, size=cfg.max_seq + 1)
    with pytest.raises(ValueError, match="max_seq"):
        forward_graph(params, ids, None, None, cfg)


def test_incremental_engine_matches_batch_forward(params, rng):
    cfg = tiny_cfg()
    ids = rng.integers(7, 40, size=24)
    pos = np.asarray([3, 7], dtype=np.intp)
    rows = rng.normal(size=(2, 8))
    batch = forward_graph(params, ids, pos, Tensor(rows), cfg).data
    eng = InferenceEngine(params, cfg)
    overrides = {3: rows[0], 7: rows[1]}
    inc = [eng.append_token(int(t), overrides.get(i)) for i, t in enumerate(ids)]
    assert np.allclose(np.stack(inc), batch, atol=1e-9)


def test_generate_structure_and_determinism(params, rng):
    cfg = tiny_cfg()
    layout = SequenceLayout(l_v=2, n_grids=3)   # 6 slots
    n_inp = 10
    inp = make_seq(rng.integers(7, 40, size=n_inp),
                   t_slots=np.arange(2, 8), context=0)
    overrides = rng.normal(size=(7, 8))
    a = generate(params, inp, overrides, layout.n_slots, cfg, max_new=30)
    b = generate(params, inp, overrides, layout.n_slots, cfg, max_new=30)
    assert a.ids == b.ids
    assert a.ids[0] == BOS and a.ids[1] == BOI
    assert a.ids[2 + layout.n_slots] == EOI
    assert a.latents.shape == (layout.n_slots, 8)
    assert len(a.ids) <= 3 + layout.n_slots + 30 + 1


def test_generate_forced_span_independent_of_weights(params, rng):
    cfg = tiny_cfg()
    layout = SequenceLayout(l_v=2, n_grids=3)
    inp = make_seq(rng.integers(7, 40, size=10), t_slots=np.arange(2, 8), context=0)
    overrides = rng.normal(size=(7, 8))
    other = init_model_params(cfg, 8, 40, np.random.default_rng(99))
    a = generate(params, inp, overrides, layout.n_slots, cfg, max_new=10)
    b = generate(other, inp, overrides, layout.n_slots, cfg, max_new=10)
    assert a.ids[:3 + layout.n_slots] == b.ids[:3 + layout.n_slots]


def test_generate_truncation_flag(params, rng):
    cfg = tiny_cfg()
    inp = make_seq(rng.integers(7, 40, size=8), context=0)
    overrides = rng.normal(size=(1, 8))
    res = generate(params, inp, overrides, 2, cfg, max_new=3)
    if EOS not in res.ids[-1:]:
        assert res.truncated


def test_checkpoint_roundtrip_bit_exact(params, tmp_path):
    meta = {"stage": 2, "note": "unit"}
    path = tmp_path / "m.ckpt"
    h1 = save_checkpoint(params, meta, path)
    loaded, meta2 = load_checkpoint(path)
    assert meta2 == meta
    assert set(loaded) == set(params)
    for name in params:
        assert np.array_equal(loaded[name].data, params[name].data)
    h2 = save_checkpoint(loaded, meta2, tmp_path / "m2.ckpt")
    assert h1 == h2


def test_checkpoint_version_rejected(params, tmp_path):
    import json, struct
    path = tmp_path / "m.ckpt"
    save_checkpoint(params, {}, path)
    raw = bytearray(path.read_bytes())
    hlen = struct.unpack("<I", raw[6:10])[0]
    header = json.loads(raw[10:10 + hlen].decode())
    header["version"] = 99
    blob = json.dumps(header, sort_keys=True).encode()
    bad = raw[:6] + struct.pack("<I", len(blob)) + blob + raw[10 + hlen:]
    path2 = tmp_path / "bad.ckpt"
    path2.write_bytes(bad)
    with pytest.raises(ValueError, match="version"):
        load_checkpoint(path2)
    path3 = tmp_path / "junk.ckpt"
    path3.write_bytes(b"JUNKJUNKJUNK")
    with pytest.raises(ValueError, match="not a checkpoint"):
        load_checkpoint(path3)

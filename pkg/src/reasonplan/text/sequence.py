"""Sequence grammar: the user prompt with tagged image slots, the bracketed
assistant target with future-frame slots, loss masks, and trajectory parsing.

Target grammar:
  [BOS] [BOI] <image>*N [EOI] [BOT] reasoning [EOT] trajectory [EOS]
with the text loss on reasoning, trajectory, [BOT], [EOT], and [EOS] only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..config import FrontendConfig
from .vocab import (
    BOI,
    BOS,
    CONTEXT_WORD,
    EOI,
    EOS,
    EOT,
    BOT,
    IMAGE,
    PROMPT_TEXT,
    SPECIALS,
    Vocab,
    camera_tag_words,
    detokenize,
    tokenize,
)


@dataclass
class SequenceLayout:
    l_v: int
    n_grids: int = 10

    @classmethod
    def from_frontend(cls, cfg: FrontendConfig) -> "SequenceLayout":
        return cls(l_v=cfg.l_v)

    @property
    def n_slots(self) -> int:
        return self.n_grids * self.l_v


@dataclass
class TokenSequence:
    ids: np.ndarray                   # (L,) int64
    text_mask: np.ndarray             # (L,) bool, True = scored by the text loss
    t_slots: np.ndarray               # positions of current-frame image tokens
    future_slots: np.ndarray          # positions of future-frame image tokens
    front_future: np.ndarray          # subset of future_slots from the front view
    context_pos: int = -1             # reserved context-embedding position
    target_start: int = 0             # first position of the assistant part

    def __post_init__(self):
        L = len(self.ids)
        assert len(self.text_mask) == L
        for pos in (self.t_slots, self.future_slots):
            if len(pos) and (pos.min() < 0 or pos.max() >= L):
                raise ValueError("slot positions out of bounds")
        slotset = set(self.t_slots.tolist()) | set(self.future_slots.tolist())
        if any(self.text_mask[p] for p in slotset):
            raise ValueError("text mask overlaps an image slot")

    def __len__(self):
        return len(self.ids)


def _camera_blocks(layout: SequenceLayout, vocab: Vocab) -> tuple[list, list]:
    """Token ids for the tagged image blocks plus slot offsets within them."""
    tags = camera_tag_words()
    colon = vocab.encode_word(":")
    ids: list[int] = []
    slot_offsets: list[int] = []
    for tag in tags[:layout.n_grids]:
        ids.append(vocab.encode_word(tag))
        ids.append(colon)
        for _ in range(layout.l_v):
            slot_offsets.append(len(ids))
            ids.append(IMAGE)
    return ids, slot_offsets


def assemble_input(rec, vocab: Vocab, layout: SequenceLayout) -> TokenSequence:
    """User turn: context slot, ego numbers, command, tagged image slots, prompt."""
    ids = [vocab.encode_word(CONTEXT_WORD)]
    context_pos = 0
    ids += vocab.encode(f"{rec.v:.2f} {rec.a:.2f} {rec.cmd}")
    block_ids, offsets = _camera_blocks(layout, vocab)
    base = len(ids)
    ids += block_ids
    t_slots = np.asarray([base + off for off in offsets], dtype=np.intp)
    ids += vocab.encode(PROMPT_TEXT)
    ids = np.asarray(ids, dtype=np.int64)
    return TokenSequence(
        ids=ids,
        text_mask=np.zeros(len(ids), dtype=bool),
        t_slots=t_slots,
        future_slots=np.asarray([], dtype=np.intp),
        front_future=np.asarray([], dtype=np.intp),
        context_pos=context_pos,
        target_start=len(ids),
    )


class OutOfVocabError(ValueError):
    def __init__(self, word, position):
        super().__init__(f"word {word!r} at token {position} is out of vocabulary")
        self.word = word
        self.position = position


def _encode_strict(text: str, vocab: Vocab, strict: bool) -> list[int]:
    ids = []
    for i, tok in enumerate(tokenize(text)):
        if strict and tok not in vocab:
            raise OutOfVocabError(tok, i)
        ids.append(vocab.encode_word(tok))
    return ids


def assemble_target(reasoning_text: str, trajectory_text: str, vocab: Vocab,
                    layout: SequenceLayout, front_rows: np.ndarray,
                    strict: bool = True) -> TokenSequence:
    """Assistant turn under the bracketed grammar, with loss mask and spans."""
    ids = [BOS, BOI]
    slot_base = len(ids)
    ids += [IMAGE] * layout.n_slots
    future_slots = np.arange(slot_base, slot_base + layout.n_slots, dtype=np.intp)
    ids.append(EOI)
    bot_pos = len(ids)
    ids.append(BOT)
    reasoning_ids = _encode_strict(reasoning_text, vocab, strict)
    ids += reasoning_ids
    eot_pos = len(ids)
    ids.append(EOT)
    traj_ids = _encode_strict(trajectory_text, vocab, strict)
    ids += traj_ids
    eos_pos = len(ids)
    ids.append(EOS)

    mask = np.zeros(len(ids), dtype=bool)
    mask[bot_pos] = True
    mask[bot_pos + 1:eot_pos] = True
    mask[eot_pos] = True
    mask[eot_pos + 1:eos_pos] = True
    mask[eos_pos] = True

    front_future = future_slots[np.asarray(front_rows, dtype=np.intp)]
    return TokenSequence(
        ids=np.asarray(ids, dtype=np.int64),
        text_mask=mask,
        t_slots=np.asarray([], dtype=np.intp),
        future_slots=future_slots,
        front_future=front_future,
        context_pos=-1,
        target_start=0,
    )


def concat_sequences(inp: TokenSequence, tgt: TokenSequence) -> TokenSequence:
    off = len(inp.ids)
    return TokenSequence(
        ids=np.concatenate([inp.ids, tgt.ids]),
        text_mask=np.concatenate([inp.text_mask, tgt.text_mask]),
        t_slots=inp.t_slots,
        future_slots=tgt.future_slots + off,
        front_future=tgt.front_future + off,
        context_pos=inp.context_pos,
        target_start=off,
    )


class GrammarError(ValueError):
    pass


def parse_target_grammar(ids, n_slots: int) -> tuple[list, list]:
    """Re-parse an assistant sequence; returns (reasoning_ids, trajectory_ids)."""
    ids = list(ids)
    if len(ids) < n_slots + 6:
        raise GrammarError("sequence too short for the target grammar")
    if ids[0] != BOS or ids[1] != BOI:
        raise GrammarError("target must open with [BOS] [BOI]")
    body = ids[2:2 + n_slots]
    if any(i != IMAGE for i in body):
        raise GrammarError("future image span must be <image> tokens")
    cur = 2 + n_slots
    if ids[cur] != EOI:
        raise GrammarError("missing [EOI] after the image span")
    cur += 1
    if ids[cur] != BOT:
        raise GrammarError("missing [BOT]")
    cur += 1
    try:
        eot = cur + ids[cur:].index(EOT)
    except ValueError:
        raise GrammarError("missing [EOT]") from None
    reasoning = ids[cur:eot]
    try:
        eos = eot + 1 + ids[eot + 1:].index(EOS)
    except ValueError:
        raise GrammarError("missing [EOS]") from None
    trajectory = ids[eot + 1:eos]
    if eos != len(ids) - 1:
        raise GrammarError("tokens after [EOS]")
    specials_seen = [i for i in ids if i in (BOS, EOS, BOI, EOI, BOT, EOT)]
    if sorted(specials_seen) != sorted([BOS, EOS, BOI, EOI, BOT, EOT]):
        raise GrammarError("each bracketing special must appear exactly once")
    if any(i in (BOS, EOS, BOI, EOI, BOT, EOT, IMAGE) for i in reasoning + trajectory):
        raise GrammarError("special token inside a text span")
    return reasoning, trajectory


class TrajectoryParseError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class TrajectoryArityError(ValueError):
    def __init__(self, count):
        super().__init__(f"expected 4 trajectory points, got {count}")
        self.count = count


_NUM = re.compile(r"[-+]?\d+(?:\.\d+)?")


def parse_trajectory(text: str):
    """Parse `Trajectory: (x, y), (x, y), (x, y), (x, y)` into 4 points.

    Whitespace-insensitive so both serializer output and detokenized model
    output (digits spaced apart) parse identically.
    """
    m = re.search(r"Trajectory\s*:", text)
    if m is None:
        raise TrajectoryParseError("missing 'Trajectory:' header", 0)
    compact = re.sub(r"\s+", "", text[m.end():])
    pos = 0
    points = []
    while pos < len(compact):
        if points:
            if compact[pos] != ",":
                raise TrajectoryParseError("expected ',' between points", pos)
            pos += 1
        if pos >= len(compact) or compact[pos] != "(":
            raise TrajectoryParseError("expected '('", pos)
        pos += 1
        mx = _NUM.match(compact, pos)
        if mx is None:
            raise TrajectoryParseError("expected a number", pos)
        pos = mx.end()
        if pos >= len(compact) or compact[pos] != ",":
            raise TrajectoryParseError("expected ',' inside a point", pos)
        pos += 1
        my = _NUM.match(compact, pos)
        if my is None:
            raise TrajectoryParseError("expected a number", pos)
        pos = my.end()
        if pos >= len(compact) or compact[pos] != ")":
            raise TrajectoryParseError("expected ')'", pos)
        pos += 1
        points.append((float(mx.group()), float(my.group())))
    if len(points) != 4:
        raise TrajectoryArityError(len(points))
    return points

"""Word-level vocabulary over the closed annotation-template corpus.

Seven special tokens hold the reserved ids 0-6; numbers are tokenized one
character at a time so the vocabulary stays closed under any numeric value.
"""

from __future__ import annotations

import re
from pathlib import Path

SPECIALS = ("<image>", "[BOS]", "[EOS]", "[BOI]", "[EOI]", "[BOT]", "[EOT]")
UNK = "<unk>"
CONTEXT_WORD = "<context>"

IMAGE, BOS, EOS, BOI, EOI, BOT, EOT = range(7)

_TOKEN_RE = re.compile(r"\[[A-Z]+\]|<[a-z]+>|[A-Za-z_][A-Za-z_0-9/]*|\S")


def tokenize(text: str) -> list[str]:
    """Words stay whole; digits and punctuation split per character."""
    return _TOKEN_RE.findall(text)


def detokenize(tokens) -> str:
    return " ".join(tokens)


class Vocab:
    def __init__(self, words):
        self.id2word = list(SPECIALS)
        seen = set(self.id2word)
        for w in [UNK, CONTEXT_WORD] + sorted(set(words) - {UNK, CONTEXT_WORD}):
            if w in seen:
                continue
            self.id2word.append(w)
            seen.add(w)
        self.word2id = {w: i for i, w in enumerate(self.id2word)}
        self.unk_id = self.word2id[UNK]

    def __len__(self):
        return len(self.id2word)

    def __contains__(self, word):
        return word in self.word2id

    def encode_word(self, word: str) -> int:
        return self.word2id.get(word, self.unk_id)

    def encode(self, text: str) -> list[int]:
        return [self.encode_word(t) for t in tokenize(text)]

    def decode(self, ids) -> str:
        return detokenize(self.id2word[i] for i in ids)

    def save(self, path) -> None:
        lines = [f"{w}\t{i}" for i, w in enumerate(self.id2word)]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        id2word = []
        for line in Path(path).read_text().splitlines():
            word, _, idx = line.rpartition("\t")
            if int(idx) != len(id2word):
                raise ValueError(f"non-contiguous vocab ids in {path}")
            id2word.append(word)
        if tuple(id2word[:7]) != SPECIALS:
            raise ValueError("vocab file missing the reserved special tokens")
        vocab = cls.__new__(cls)
        vocab.id2word = id2word
        vocab.word2id = {w: i for i, w in enumerate(id2word)}
        vocab.unk_id = vocab.word2id[UNK]
        return vocab


# Words every sequence can need regardless of which scenarios were sampled.
_BASE_WORDS = (
    [str(d) for d in range(10)]
    + list(".,;:()-+/")
    + ["Trajectory", CONTEXT_WORD]
)


def camera_tag_words() -> list[str]:
    from ..sim.types import CAMERA_NAMES

    tags = list(CAMERA_NAMES)
    tags += [f"CAM_FRONT_PATCH_{i}" for i in range(1, 5)]
    return tags


def prompt_words() -> list[str]:
    return tokenize(PROMPT_TEXT)


PROMPT_TEXT = ("Predict the scene three seconds ahead , then reason through the "
               "driving stages , and output the trajectory .")


def build_vocab(texts) -> Vocab:
    """Vocabulary = base words + camera tags + prompt + the corpus itself."""
    words = list(_BASE_WORDS) + camera_tag_words() + prompt_words()
    for text in texts:
        words.extend(tokenize(text))
    return Vocab(words)

from .sequence import (
    GrammarError,
    OutOfVocabError,
    SequenceLayout,
    TokenSequence,
    TrajectoryArityError,
    TrajectoryParseError,
    assemble_input,
    assemble_target,
    concat_sequences,
    parse_target_grammar,
    parse_trajectory,
)
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
    UNK,
    Vocab,
    build_vocab,
    detokenize,
    tokenize,
)

__all__ = [
    "BOI", "BOS", "BOT", "CONTEXT_WORD", "EOI", "EOS", "EOT", "GrammarError",
    "IMAGE", "OutOfVocabError", "PROMPT_TEXT", "SPECIALS", "SequenceLayout",
    "TokenSequence", "TrajectoryArityError", "TrajectoryParseError", "UNK",
    "Vocab", "assemble_input", "assemble_target", "build_vocab",
    "concat_sequences", "detokenize", "parse_target_grammar",
    "parse_trajectory", "tokenize",
]

"""Loss definitions: front-view latent MSE, masked text cross-entropy, and
their weighted combination. Numpy reference implementations; the training
graph mirrors them and a regression test pins the two together.
"""

from __future__ import annotations

import numpy as np


def loss_image(predicted_latents, target_latents, front_span) -> float:
    """Mean squared error over front-view rows only (bit-exact slice first)."""
    front = np.asarray(front_span, dtype=np.intp)
    if front.size == 0:
        raise ValueError("empty front span")
    pred = np.asarray(predicted_latents)[front]
    tgt = np.asarray(target_latents)[front]
    diff = pred - tgt
    return float((diff * diff).mean())


def loss_text(logits, target_ids, text_loss_mask) -> float:
    """Mean NLL of target ids over masked positions (softmax over vocab)."""
    mask = np.asarray(text_loss_mask, dtype=bool)
    if not mask.any():
        raise ValueError("text loss mask is all false")
    pos = np.flatnonzero(mask)
    rows = np.asarray(logits)[pos]
    ids = np.asarray(target_ids)[pos]
    m = rows.max(axis=-1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(rows - m).sum(axis=-1))
    nll = lse - rows[np.arange(len(ids)), ids]
    return float(nll.mean())


def total_loss(l_image: float, l_text: float, lambda_image: float,
               lambda_text: float) -> float:
    return lambda_image * l_image + lambda_text * l_text

"""Dynamic voting weights with per-layer penalty/reward factors.

Each active layer's factor p drifts up on correct predictions and down
on wrong ones (step zeta, clamped to [0, 1]); its voting weight beta is
then multiplied up (capped at 1) or down (floored above zero so a layer
can recover when an old concept returns). Normalization happens once per
batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BETA_FLOOR = 1e-6


@dataclass
class VotingState:
    """Voting weights and factors of the output-active layers."""
    beta: np.ndarray
    p: np.ndarray
    zeta: float


def update_factor(p: float, correct: bool, zeta: float) -> float:
    p = p + zeta if correct else p - zeta
    return min(max(p, 0.0), 1.0)


def apply_reward(beta: float, p: float) -> float:
    return min(beta * (1.0 + p), 1.0)


def apply_penalty(beta: float, p: float) -> float:
    return max(p * beta, BETA_FLOOR)


def normalize(state: VotingState) -> VotingState:
    total = state.beta.sum()
    if total <= 0.0:
        raise ValueError("voting weights must have a positive sum")
    state.beta = state.beta / total
    return state


def winning_layer(state: VotingState) -> int:
    """Index (within the state's layer order) of the highest weight; ties go shallow."""
    return int(np.argmax(state.beta))


def apply_batch_votes(state: VotingState, correctness: np.ndarray) -> VotingState:
    """Fold a batch of per-sample, per-layer correctness into the weights.

    correctness: (T, L) booleans in the state's layer order. Factors
    update before the weight they scale; normalization runs once at the
    end of the batch.
    """
    correctness = np.asarray(correctness, dtype=bool)
    if correctness.ndim != 2 or correctness.shape[1] != len(state.beta):
        raise ValueError(
            f"correctness must be (T, {len(state.beta)}), got {correctness.shape}"
        )
    for row in correctness:
        for l, correct in enumerate(row):
            state.p[l] = update_factor(state.p[l], bool(correct), state.zeta)
            if correct:
                state.beta[l] = apply_reward(state.beta[l], state.p[l])
            else:
                state.beta[l] = apply_penalty(state.beta[l], state.p[l])
    return normalize(state)

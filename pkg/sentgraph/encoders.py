"""
Sentence composition functions f_e(c): word average, GRU with mean
pooling and bidirectional GRU, with exact analytic gradients
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .errors import PreconditionError
from .params import GruWeights, ModelParams


@dataclass
class GruTrace:
    """Cached activations of one GRU direction over one token order"""
    inputs: np.ndarray    # (L, d_w)
    hidden: np.ndarray    # (L + 1, d_h), row 0 is h_0
    update: np.ndarray    # (L, d_h)
    reset: np.ndarray     # (L, d_h)
    candidate: np.ndarray  # (L, d_h)


@dataclass
class EncodeTrace:
    """Everything encode_backward needs; single use"""
    kind: str
    tokens: Tuple[int, ...]
    output: np.ndarray
    fwd: Optional[GruTrace] = None
    bwd: Optional[GruTrace] = None
    weights: Dict[str, GruWeights] = field(default_factory=dict)


@dataclass
class EncodeGrad:
    """
    Gradient of a scalar loss w.r.t. encoder weights and input word vectors.

    word_grads[i] is the gradient for the word at sentence position i;
    repeated tokens get one row per occurrence.
    """
    tokens: Tuple[int, ...]
    word_grads: np.ndarray
    weights: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)

    def squared_norm(self) -> float:
        total = float(np.sum(self.word_grads ** 2))
        for tensors in self.weights.values():
            total += sum(float(np.sum(array ** 2)) for array in tensors.values())
        return total

    def scale(self, factor: float) -> None:
        self.word_grads *= factor
        for tensors in self.weights.values():
            for array in tensors.values():
                array *= factor


def _require_tokens(sentence: Sequence[int]) -> Tuple[int, ...]:
    tokens = tuple(sentence)
    if not tokens:
        raise PreconditionError("Cannot encode an empty sentence")
    return tokens


def encode_wavg(sentence: Sequence[int], word_table: np.ndarray) -> np.ndarray:
    """Mean of the sentence's word vectors"""
    tokens = _require_tokens(sentence)
    return word_table[list(tokens)].mean(axis=0)


def _gru_gates(x: np.ndarray, h_prev: np.ndarray, weights: GruWeights):
    z = expit(weights.w_z @ x + weights.u_z @ h_prev + weights.b_z)
    r = expit(weights.w_r @ x + weights.u_r @ h_prev + weights.b_r)
    candidate = np.tanh(weights.w_h @ x + weights.u_h @ (r * h_prev) + weights.b_h)
    h = (1.0 - z) * h_prev + z * candidate
    return h, z, r, candidate


def gru_cell(x_t: np.ndarray, h_prev: np.ndarray, weights: GruWeights) -> np.ndarray:
    """One GRU step: h_t = (1 - z) * h_prev + z * tanh(W_h x + U_h (r * h_prev) + b_h)"""
    return _gru_gates(x_t, h_prev, weights)[0]


def _run_gru(inputs: np.ndarray, weights: GruWeights) -> GruTrace:
    length, hidden_dim = inputs.shape[0], weights.hidden_dim
    hidden = np.zeros((length + 1, hidden_dim))
    update = np.empty((length, hidden_dim))
    reset = np.empty((length, hidden_dim))
    candidate = np.empty((length, hidden_dim))
    for t in range(length):
        hidden[t + 1], update[t], reset[t], candidate[t] = _gru_gates(inputs[t], hidden[t], weights)
    return GruTrace(inputs=inputs, hidden=hidden, update=update, reset=reset, candidate=candidate)


def encode_gru(sentence: Sequence[int], word_table: np.ndarray,
               weights: GruWeights) -> Tuple[np.ndarray, EncodeTrace]:
    """Left-to-right GRU from h_0 = 0, mean-pooled over h_1..h_L"""
    tokens = _require_tokens(sentence)
    trace = _run_gru(word_table[list(tokens)], weights)
    output = trace.hidden[1:].mean(axis=0)
    return output, EncodeTrace(kind='gru', tokens=tokens, output=output, fwd=trace,
                               weights={'fwd': weights})


def encode_bigru(sentence: Sequence[int], word_table: np.ndarray, fwd_weights: GruWeights,
                 bwd_weights: GruWeights) -> Tuple[np.ndarray, EncodeTrace]:
    """
    Forward and backward GRUs concatenated per position, forward half first,
    then mean-pooled. Pooling commutes with the position reversal, so each
    half is the mean of its own direction's states.
    """
    tokens = _require_tokens(sentence)
    inputs = word_table[list(tokens)]
    fwd = _run_gru(inputs, fwd_weights)
    bwd = _run_gru(inputs[::-1], bwd_weights)
    output = np.concatenate((fwd.hidden[1:].mean(axis=0), bwd.hidden[1:].mean(axis=0)))
    return output, EncodeTrace(kind='bigru', tokens=tokens, output=output, fwd=fwd, bwd=bwd,
                               weights={'fwd': fwd_weights, 'bwd': bwd_weights})


def encode(params: ModelParams, sentence: Sequence[int]) -> Tuple[np.ndarray, EncodeTrace]:
    """Dispatch on the run's encoder kind"""
    if params.encoder_kind == 'gru':
        return encode_gru(sentence, params.word_table, params.gru_fwd)
    if params.encoder_kind == 'bigru':
        return encode_bigru(sentence, params.word_table, params.gru_fwd, params.gru_bwd)
    output = encode_wavg(sentence, params.word_table)
    return output, EncodeTrace(kind='wavg', tokens=tuple(sentence), output=output)


def _gru_backward(trace: GruTrace, weights: GruWeights,
                  pooled_grad: np.ndarray) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """BPTT through mean pooling and the recurrence; returns (weight grads, input grads)"""
    length = trace.inputs.shape[0]
    grads = {name: np.zeros_like(array) for name, array in weights.tensors().items()}
    input_grads = np.zeros_like(trace.inputs)
    per_step = pooled_grad / length
    carry = np.zeros(weights.hidden_dim)

    for t in range(length - 1, -1, -1):
        x, h_prev = trace.inputs[t], trace.hidden[t]
        z, r, candidate = trace.update[t], trace.reset[t], trace.candidate[t]
        dh = per_step + carry

        dz = dh * (candidate - h_prev)
        da_h = dh * z * (1.0 - candidate ** 2)
        dh_prev = dh * (1.0 - z)

        reset_prev = r * h_prev
        grads['w_h'] += np.outer(da_h, x)
        grads['u_h'] += np.outer(da_h, reset_prev)
        grads['b_h'] += da_h
        d_reset_prev = weights.u_h.T @ da_h
        dr = d_reset_prev * h_prev
        dh_prev += d_reset_prev * r
        dx = weights.w_h.T @ da_h

        da_z = dz * z * (1.0 - z)
        grads['w_z'] += np.outer(da_z, x)
        grads['u_z'] += np.outer(da_z, h_prev)
        grads['b_z'] += da_z
        dx += weights.w_z.T @ da_z
        dh_prev += weights.u_z.T @ da_z

        da_r = dr * r * (1.0 - r)
        grads['w_r'] += np.outer(da_r, x)
        grads['u_r'] += np.outer(da_r, h_prev)
        grads['b_r'] += da_r
        dx += weights.w_r.T @ da_r
        dh_prev += weights.u_r.T @ da_r

        input_grads[t] = dx
        carry = dh_prev

    return grads, input_grads


def encode_backward(trace: EncodeTrace, upstream_grad: np.ndarray) -> EncodeGrad:
    """
    Gradients of upstream_grad · f_e(c) w.r.t. encoder weights and the
    input word vectors of the traced sentence.
    """
    length = len(trace.tokens)
    if trace.kind == 'wavg':
        word_grads = np.tile(upstream_grad / length, (length, 1))
        return EncodeGrad(tokens=trace.tokens, word_grads=word_grads)

    if trace.kind == 'gru':
        grads, word_grads = _gru_backward(trace.fwd, trace.weights['fwd'], upstream_grad)
        return EncodeGrad(tokens=trace.tokens, word_grads=word_grads, weights={'fwd': grads})

    half = trace.fwd.hidden.shape[1]
    fwd_grads, fwd_inputs = _gru_backward(trace.fwd, trace.weights['fwd'], upstream_grad[:half])
    bwd_grads, bwd_inputs = _gru_backward(trace.bwd, trace.weights['bwd'], upstream_grad[half:])
    word_grads = fwd_inputs + bwd_inputs[::-1]
    return EncodeGrad(tokens=trace.tokens, word_grads=word_grads,
                      weights={'fwd': fwd_grads, 'bwd': bwd_grads})


def clip_gradients(grads: Sequence[EncodeGrad], max_norm: Optional[float]) -> float:
    """Rescale a group of gradients in place to a joint L2 norm of at most max_norm"""
    norm = float(np.sqrt(sum(grad.squared_norm() for grad in grads)))
    if max_norm is not None and norm > max_norm > 0:
        factor = max_norm / norm
        for grad in grads:
            grad.scale(factor)
    return norm

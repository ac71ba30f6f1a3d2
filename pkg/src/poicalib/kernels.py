"""Hot-loop kernels with backend selection.

Two operations dominate pipeline runtime: the BPR minibatch epoch and the
greedy calibrated re-ranking step. Both exist twice — a compiled Cython
extension (``poicalib._fastpath``) and a vectorized numpy fallback — and the
compiled one is picked at import time when present. ``POICALIB_BACKEND``
overrides the choice (``auto`` | ``compiled`` | ``python``).

Both backends consume identical pre-sampled inputs, so a fixed seed gives a
deterministic result under either; the two agree to floating-point noise
(see tests/test_kernels.py) but are not guaranteed bit-identical.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _fastpath as _compiled
except ImportError:  # extension not built; numpy fallback only
    _compiled = None


def _sigmoid_neg(x: np.ndarray) -> np.ndarray:
    # sigma(-x); exp overflow saturates to 0 exactly like the C kernel
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(x))


def bpr_epoch_python(
    user_factors: np.ndarray,
    item_factors: np.ndarray,
    users: np.ndarray,
    pos: np.ndarray,
    neg: np.ndarray,
    lr: float,
    reg: float,
    batch_size: int,
) -> None:
    """One epoch of minibatch gradient ascent on the BPR objective, in place.

    Triples are consumed in consecutive batches; each batch applies the mean
    gradient of ln sigma(x_uij) with per-occurrence L2 shrinkage on the rows
    it touches.
    """
    n = users.shape[0]
    grad_u = np.zeros_like(user_factors)
    grad_i = np.zeros_like(item_factors)
    for start in range(0, n, batch_size):
        ub = users[start : start + batch_size]
        pb = pos[start : start + batch_size]
        nb = neg[start : start + batch_size]
        uvec = user_factors[ub]
        ivec = item_factors[pb]
        jvec = item_factors[nb]
        diff = ivec - jvec
        e = _sigmoid_neg(np.einsum("nd,nd->n", uvec, diff))[:, None]
        np.add.at(grad_u, ub, e * diff - reg * uvec)
        np.add.at(grad_i, pb, e * uvec - reg * ivec)
        np.add.at(grad_i, nb, -e * uvec - reg * jvec)
        scale = lr / ub.shape[0]
        urows = np.unique(ub)
        irows = np.unique(np.concatenate([pb, nb]))
        user_factors[urows] += scale * grad_u[urows]
        item_factors[irows] += scale * grad_i[irows]
        grad_u[urows] = 0.0
        grad_i[irows] = 0.0


def _jsd_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Base-2 Jensen-Shannon divergence of p against each row of q."""
    mid = 0.5 * (p[None, :] + q)

    def half(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = x * np.log2(x / mid)
        return np.where(x > 0.0, t, 0.0).sum(axis=1)

    return 0.5 * (half(np.broadcast_to(p, q.shape)) + half(q))


def greedy_select_python(
    scores: np.ndarray,
    classes: np.ndarray,
    target: np.ndarray,
    lam: float,
    n: int,
) -> np.ndarray:
    """Greedy maximization of (1-lam)*Rel - lam*JSD over n selection steps.

    ``scores`` are the normalized base scores in base-list order, ``classes``
    the item class codes (0=H, 1=M, 2=T), ``target`` the user's 3-bin profile
    distribution. Ties go to the lowest index, i.e. the higher base rank.
    Returns the selected indices in selection order.
    """
    m = scores.shape[0]
    onehot = np.zeros((m, 3))
    onehot[np.arange(m), classes] = 1.0
    taken = np.zeros(m, dtype=bool)
    counts = np.zeros(3)
    relsum = 0.0
    out = np.empty(n, dtype=np.intp)
    for k in range(n):
        size = k + 1.0
        q = (counts[None, :] + onehot) / size
        rel = (relsum + scores) / size
        obj = (1.0 - lam) * rel - lam * _jsd_rows(target, q)
        obj[taken] = -np.inf
        best = int(np.argmax(obj))  # argmax keeps the first maximizer
        out[k] = best
        taken[best] = True
        counts += onehot[best]
        relsum += scores[best]
    return out


def _resolve_backend() -> str:
    requested = os.environ.get("POICALIB_BACKEND", "auto")
    if requested not in ("auto", "compiled", "python"):
        raise ValueError(f"POICALIB_BACKEND must be auto|compiled|python, got {requested!r}")
    if requested == "compiled" and _compiled is None:
        raise ImportError("POICALIB_BACKEND=compiled but poicalib._fastpath is not built")
    if requested == "python" or _compiled is None:
        return "python"
    return "compiled"


_BACKEND = _resolve_backend()


def backend_name() -> str:
    return _BACKEND


def bpr_epoch(user_factors, item_factors, users, pos, neg, lr, reg, batch_size) -> None:
    users = np.ascontiguousarray(users, dtype=np.int64)
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    neg = np.ascontiguousarray(neg, dtype=np.int64)
    if _BACKEND == "compiled":
        _compiled.bpr_epoch(user_factors, item_factors, users, pos, neg,
                            float(lr), float(reg), int(batch_size))
    else:
        bpr_epoch_python(user_factors, item_factors, users, pos, neg,
                         float(lr), float(reg), int(batch_size))


def greedy_select(scores, classes, target, lam, n) -> np.ndarray:
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    classes = np.ascontiguousarray(classes, dtype=np.int8)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if _BACKEND == "compiled":
        return _compiled.greedy_select(scores, classes, target, float(lam), int(n))
    return greedy_select_python(scores, classes, target, float(lam), int(n))

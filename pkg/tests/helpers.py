"""Independent oracles and data generators shared by the test modules.

Everything here deliberately avoids the package's own code paths: the
brute-force scorer walks a plain dict with a running float sum, the
metric oracle uses separate counting loops, and the reference regression
goes through numpy's lstsq.  Agreement between package and oracle is the
point of the tests, so keep it that way.
"""

from __future__ import annotations

import math
import random

import numpy as np


def brute_force_score(text: str, neg_by_word: dict[str, float]):
    """Naive per-word dictionary walk; returns (d or None, matched)."""
    total = 0.0
    hits = 0
    for word in text.lower().split():
        if word in neg_by_word:
            total += neg_by_word[word]
            hits += 1
    if hits == 0:
        return None, 0
    return total / hits, hits


def brute_force_metrics(pred: list[bool], gold: list[bool]):
    """Direct counting loops for the confusion matrix and metrics."""
    tp = sum(1 for p, g in zip(pred, gold) if p and g)
    fp = sum(1 for p, g in zip(pred, gold) if p and not g)
    fn = sum(1 for p, g in zip(pred, gold) if not p and g)
    tn = sum(1 for p, g in zip(pred, gold) if not p and not g)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / len(pred)
    return tp, fp, fn, tn, precision, recall, f1, accuracy


def _alpha(i: int) -> str:
    """0 -> a, 1 -> b, ..., 26 -> aa; alphabetic so tokenization is a no-op."""
    out = ""
    i += 1
    while i:
        i, r = divmod(i - 1, 26)
        out = chr(97 + r) + out
    return out


def random_lexicon_and_text(rng: random.Random, max_words: int = 50,
                            max_tokens: int = 200):
    """A small random word->neg map plus a text mixing known/unknown tokens."""
    vocab_size = rng.randint(1, max_words)
    vocab = ["w" + _alpha(i) for i in range(vocab_size)]
    neg_by_word = {w: rng.random() for w in vocab}
    n_tokens = rng.randint(0, max_tokens)
    pool = vocab + ["q" + _alpha(i) for i in range(10)]
    text = " ".join(rng.choice(pool) for _ in range(n_tokens))
    return neg_by_word, text


def ar1_xy(seed: int, n: int = 200, rho: float = 0.6, slope: float = 1.0,
           intercept: float = 3.0):
    """y = intercept + slope*x + u with AR(1) errors, x = 1..n."""
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(n)
    u = np.empty(n)
    u[0] = eta[0] / math.sqrt(1.0 - rho * rho)
    for t in range(1, n):
        u[t] = rho * u[t - 1] + eta[t]
    x = np.arange(1.0, n + 1.0)
    return x, intercept + slope * x + u


def reference_prais_winsten(x, y, tol: float = 1e-6, max_iter: int = 100):
    """Independent matrix-algebra implementation of the same estimator.

    Uses numpy lstsq on the explicitly transformed design (first row
    scaled by sqrt(1-rho^2)); returns (rho, intercept, slope, slope_se).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.column_stack([np.ones_like(x), x])
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    rho = float(np.clip((resid[1:] @ resid[:-1]) / (resid[:-1] @ resid[:-1]),
                        -0.999, 0.999))
    transformed = design
    y_t = y
    for _ in range(max_iter):
        s = math.sqrt(1.0 - rho * rho)
        transformed = np.vstack([s * design[0], design[1:] - rho * design[:-1]])
        y_t = np.concatenate([[s * y[0]], y[1:] - rho * y[:-1]])
        beta, *_ = np.linalg.lstsq(transformed, y_t, rcond=None)
        resid = y - design @ beta
        rho_new = float(np.clip((resid[1:] @ resid[:-1]) / (resid[:-1] @ resid[:-1]),
                                -0.999, 0.999))
        if abs(rho_new - rho) < tol:
            rho = rho_new
            break
        rho = rho_new
    resid_t = y_t - transformed @ beta
    sigma2 = float(resid_t @ resid_t) / (len(y) - 2)
    cov = sigma2 * np.linalg.inv(transformed.T @ transformed)
    return rho, float(beta[0]), float(beta[1]), math.sqrt(cov[1, 1])

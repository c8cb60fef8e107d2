import numpy as np
from scipy.stats import rankdata


def roc_auc(scores, flags):
    """Area under the ROC curve from the Mann-Whitney U statistic.

    ``flags`` marks the positive samples.  Ties between a positive and a
    negative count one half.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    flags = np.asarray(flags, dtype=bool).ravel()
    if scores.shape != flags.shape:
        raise ValueError("scores and flags must have the same length")
    n_pos = int(flags.sum())
    n_neg = flags.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative sample")
    ranks = rankdata(scores)
    u = ranks[flags].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def accuracy(predicted, class_ids):
    return float(np.mean(np.asarray(predicted) == np.asarray(class_ids)))

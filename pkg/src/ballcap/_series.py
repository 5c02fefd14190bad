"""Two-sided power series evaluation for coefficient-sequence kernels.

Evaluates sum_{n>=0} pos[n]*s^n + sum_{n>=1} neg[n-1]*conj(s)^n by Horner
recurrences over a flat array of inner products.
"""

import numpy as np


def build(jit):
    @jit
    def series_eval(pos, neg, s):
        acc = np.zeros_like(s)
        for j in range(pos.shape[0] - 1, -1, -1):
            acc *= s
            acc += pos[j]
        if neg.shape[0] > 0:
            sc = np.conj(s)
            acc2 = np.zeros_like(s)
            for j in range(neg.shape[0] - 1, -1, -1):
                acc2 *= sc
                acc2 += neg[j]
            acc2 *= sc
            acc += acc2
        return acc

    return series_eval

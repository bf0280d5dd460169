"""Loop-based reference for the monogamy and retention losses.

Nothing here is vectorized or shared with the package; it restates the
formulas term by term so the fast path can be checked against it.
"""

import math


def cos(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0 or nv == 0:
        return 0.0
    return dot / (nu * nv)


def sinusoid(pos, dim, scale):
    out = []
    width = dim + dim % 2
    for c in range(dim):
        k = c // 2
        angle = pos / 10000 ** (2 * k / width)
        out.append(scale * (math.sin(angle) if c % 2 == 0 else math.cos(angle)))
    return out


def with_positions(vectors, use_positions, scale):
    if not use_positions:
        return [list(v) for v in vectors]
    return [[a + b for a, b in zip(v, sinusoid(p, len(v), scale))] for p, v in enumerate(vectors)]


def probs(src, tgt, tau):
    """p[i][j] = p(t_j | s_i): softmax over the target sentence."""
    out = []
    for u in src:
        logits = [cos(u, v) / tau for v in tgt]
        top = max(logits)
        e = [math.exp(x - top) for x in logits]
        z = sum(e)
        out.append([x / z for x in e])
    return out


def round_trip(p_st, p_ts):
    n, m = len(p_st), len(p_ts)
    return [[sum(p_st[i][j] * p_ts[j][k] for j in range(m)) for k in range(n)] for i in range(n)]


def mono(r):
    n = len(r)
    trace = max(sum(r[i][i] for i in range(n)), 1e-30)
    return 1 - math.log(trace) / math.log(n)


def ret_term(p_st, p_ts, mask):
    num = sum(p_st[i][j] * p_ts[j][i] for i, j in mask)
    return -math.log(max(num / len(mask), 1e-30))


def pair_loss(X, Y, mask, tau, alpha, use_positions=False, scale=1.0):
    U = with_positions(X, use_positions, scale)
    V = with_positions(Y, use_positions, scale)
    p_st, p_ts = probs(U, V, tau), probs(V, U, tau)
    n, m = len(U), len(V)
    total = 0.0
    l_bi = None
    if n >= 2 and m >= 2:
        l_st = mono(round_trip(p_st, p_ts))
        l_ts = mono(round_trip(p_ts, p_st))
        l_bi = (l_st + l_ts) / 2
        total += l_bi
    l_ret = None
    if alpha > 0 and mask:
        forward = ret_term(p_st, p_ts, mask)
        backward = ret_term(p_ts, p_st, [(j, i) for i, j in mask])
        l_ret = (forward + backward) / 2
        total += alpha * l_ret
    return total, l_bi, l_ret

"""Independent reference computations, deliberately naive."""


def char_set(frag):
    return set(range(frag.begin, frag.end))


def brute_force_flc(S, T):
    """Precision, recall, F1 by enumerating every (s, t) pair and every character of s."""
    S, T = list(S), list(T)
    p_sum = 0.0
    r_sum = 0.0
    for s in S:
        for t in T:
            if s.article_id != t.article_id or s.label != t.label:
                continue
            t_chars = char_set(t)
            shared = sum(1 for c in range(s.begin, s.end) if c in t_chars)
            p_sum += shared / (s.end - s.begin)
            r_sum += shared / (t.end - t.begin)
    p = p_sum / len(S) if S else 0.0
    r = r_sum / len(T) if T else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def brute_force_slc(pred, gold):
    tp = sum(1 for p, g in zip(pred, gold) if p and g)
    npred = sum(1 for p in pred if p)
    ngold = sum(1 for g in gold if g)
    p = tp / npred if npred else 0.0
    r = tp / ngold if ngold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f

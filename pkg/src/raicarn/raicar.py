"""Cross-run component matching and normalized reproducibility.

Builds the block matrix of absolute spatial correlations between all
components of all runs, greedily matches one component per run into
aligned sets, and scores each set by the mean of its pairwise absolute
correlations.
"""

from dataclasses import dataclass, field

import numpy as np

from .types import Crcm, MatchedComponent, RunCollection


def _abs_corr_matrix(X: np.ndarray) -> np.ndarray:
    """Absolute Pearson correlations between rows of X; zero-variance rows
    correlate 0 with everything (including themselves)."""
    Xc = X - X.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(Xc, axis=1)
    ok = norms > 0
    N = np.zeros_like(Xc)
    N[ok] = Xc[ok] / norms[ok, None]
    C = np.abs(N @ N.T)
    return np.clip(C, 0.0, 1.0)


def compute_crcm(rc: RunCollection) -> Crcm:
    """Absolute correlations between every pair of components across runs,
    with within-run blocks zeroed; the un-zeroed matrix is kept for
    permutation nulls."""
    full = _abs_corr_matrix(rc.flat_maps())
    matrix = full.copy()
    for r in range(rc.K):
        sl = slice(r * rc.n_C, (r + 1) * rc.n_C)
        matrix[sl, sl] = 0.0
    return Crcm(rc.K, rc.n_C, matrix, full)


@dataclass
class MatchStep:
    """Audit record for one matched component."""

    anchor: tuple  # (l, i, m, j) of the seeding pair
    anchor_value: float
    selections: list = field(default_factory=list)  # (s, e_s, side, a_val, b_val)


@dataclass
class MatchTrace:
    """Full audit trail of the greedy matching; replays deterministically."""

    steps: list = field(default_factory=list)

    def member_lists(self):
        out = []
        for step in self.steps:
            l, i, m, j = step.anchor
            members = {l: i, m: j}
            for s, e_s, _side, _a, _b in step.selections:
                members[s] = e_s
            out.append([(r, members[r]) for r in sorted(members)])
        return out


def _argmax_2d(W: np.ndarray):
    """Index of the maximal entry; exact ties broken by smallest flat
    (row-major) index, i.e. lexicographically smallest position."""
    idx = int(np.argmax(W))
    return divmod(idx, W.shape[1])


def match_components(G: Crcm):
    """Greedy across-run matching on the zeroed correlation matrix.

    Repeatedly seeds a matched set at the global maximum, then pulls the
    best-correlated unused component from every other run, zeroing used
    rows and columns as it goes. Returns one matched set per component
    slot plus an audit trace; across all sets every (run, component) pair
    is used exactly once.
    """
    K, n_C = G.K, G.n_C
    W = G.matrix.copy()
    used = [set() for _ in range(K)]
    trace = MatchTrace()

    def flat(r, c):
        return r * n_C + c

    def zero_out(r, c):
        W[flat(r, c), :] = 0.0
        W[:, flat(r, c)] = 0.0
        used[r].add(c)

    def lowest_unused(r):
        return min(set(range(n_C)) - used[r])

    for _ in range(n_C):
        fi, fj = _argmax_2d(W)
        peak = W[fi, fj]
        if peak > 0.0:
            l, i = divmod(fi, n_C)
            m, j = divmod(fj, n_C)
            if (l, i) > (m, j):  # keep the anchor pair lexicographic
                l, i, m, j = m, j, l, i
        else:
            # Fully degenerate matrix: seed from the lowest-index unused
            # components of the two lowest-index runs.
            l, m = sorted(r for r in range(K) if len(used[r]) < n_C)[:2]
            i, j = lowest_unused(l), lowest_unused(m)
        step = MatchStep(anchor=(l, i, m, j), anchor_value=float(peak))
        row_i = W[flat(l, i), :].copy()
        col_j = W[:, flat(m, j)].copy()
        for s in range(K):
            if s in (l, m):
                continue
            block = slice(s * n_C, (s + 1) * n_C)
            a_s = int(np.argmax(col_j[block]))
            b_s = int(np.argmax(row_i[block]))
            a_val = float(col_j[block][a_s])
            b_val = float(row_i[block][b_s])
            if a_val == 0.0 and b_val == 0.0:
                e_s, side = lowest_unused(s), "fallback"
            elif a_val >= b_val:
                e_s, side = a_s, "column"
            else:
                e_s, side = b_s, "row"
            step.selections.append((s, e_s, side, a_val, b_val))
            zero_out(s, e_s)
        zero_out(l, i)
        zero_out(m, j)
        trace.steps.append(step)

    matched = []
    for step, members in zip(trace.steps, trace.member_lists()):
        anchor = (step.anchor[0], step.anchor[1])
        matched.append((members, anchor))
    return matched, trace


def similarity_matrix(rc: RunCollection, members) -> np.ndarray:
    """K x K absolute correlations between the member maps, unit diagonal."""
    X = np.stack([rc.maps[r, c] for r, c, *_ in members])
    H = _abs_corr_matrix(X)
    np.fill_diagonal(H, 1.0)
    return H


def normalized_reproducibility(H: np.ndarray) -> float:
    """Mean of the strict upper triangle of a K x K similarity matrix."""
    K = H.shape[0]
    iu = np.triu_indices(K, k=1)
    return float(2.0 * H[iu].sum() / ((K - 1) * K))


def align_signs(rc: RunCollection, members, anchor):
    """Attach alignment signs: the anchor map gets +1, every other member
    the sign of its signed correlation with the anchor (0 maps to +1)."""
    a = rc.maps[anchor[0], anchor[1]]
    ac = a - a.mean()
    out = []
    for r, c, *_ in members:
        if (r, c) == tuple(anchor):
            out.append((r, c, 1))
            continue
        x = rc.maps[r, c]
        corr = float(np.dot(ac, x - x.mean()))
        out.append((r, c, -1 if corr < 0 else 1))
    return out


def match_and_score(rc: RunCollection, G: Crcm = None):
    """Full original-RAICAR pass: match, sign-align, and score every
    component slot. Returns MatchedComponents in matching order."""
    if G is None:
        G = compute_crcm(rc)
    matched, trace = match_components(G)
    out = []
    for members, anchor in matched:
        signed = align_signs(rc, members, anchor)
        H = similarity_matrix(rc, signed)
        rep = normalized_reproducibility(H)
        out.append(MatchedComponent(tuple(signed), anchor, H, rep))
    return out, trace

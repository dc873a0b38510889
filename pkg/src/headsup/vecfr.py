"""Numba kernels for counterfactual-regret solving on flattened game trees.

Two traversal families share the terminal evaluators:

  * ``vanilla_pass``  — full-width alternating-update CFR over hand
    vectors (regret matching, optional linear weighting).
  * ``es_walk``       — external-sampling MCCFR: private hands and the
    non-traverser are sampled, the traverser branches.

plus ``eval_pass`` for exact best-response / expected-value sweeps, which
also powers exploitability and per-hand counterfactual values.

Card blocking is handled arithmetically: for a query hand the mass of
compatible opponent hands is total - per-card sums + mirror add-back, so
no N^2 work ever happens outside explicit matrix terminals.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .efg import TERM_MATRIX, TERM_SHOWDOWN, TERM_VEC
from .fastcards import rng_uniform

DECISION, CHANCE, TERMINAL = 0, 1, 2

BR_MODE_VALUE = 0   # both players follow the given policy
BR_MODE_MAX = 1     # responder maximizes, opponent follows policy


@njit(cache=True)
def _compat_sum(x, hands_other, hands_mine, mirror_mine, pc, out):
    """out[i] = sum of x[j] over opponent hands j sharing no card with i."""
    pc[:] = 0.0
    tot = 0.0
    for j in range(x.shape[0]):
        v = x[j]
        tot += v
        a = hands_other[j, 0]
        b = hands_other[j, 1]
        if a >= 0:
            pc[a] += v
        if b >= 0:
            pc[b] += v
    for i in range(out.shape[0]):
        s = tot
        a = hands_mine[i, 0]
        b = hands_mine[i, 1]
        if a >= 0:
            s -= pc[a]
        if b >= 0:
            s -= pc[b]
            if a >= 0 and mirror_mine[i] >= 0:
                s += x[mirror_mine[i]]
        out[i] = s
    return out


@njit(cache=True)
def _showdown_cfv(x, s_opp, ord_opp, hands_opp, s_mine, ord_mine, hands_mine,
                  pc, out):
    """out[i] = sum of x[j]*sign(s_mine[i] - s_opp[j]) over compatible j.

    Opponent hands sharing a card with i are excluded by per-card sums;
    a shared-card hand on the same board has equal strength, so it never
    sits in the win or loss region and needs no mirror add-back.
    """
    n_my = s_mine.shape[0]
    n_opp = s_opp.shape[0]
    # wins: opponent strictly weaker
    pc[:] = 0.0
    tot = 0.0
    k = 0
    for idx in range(n_my):
        i = ord_mine[idx]
        si = s_mine[i]
        while k < n_opp and s_opp[ord_opp[k]] < si:
            j = ord_opp[k]
            v = x[j]
            tot += v
            a = hands_opp[j, 0]
            b = hands_opp[j, 1]
            if a >= 0:
                pc[a] += v
            if b >= 0:
                pc[b] += v
            k += 1
        w = tot
        a = hands_mine[i, 0]
        b = hands_mine[i, 1]
        if a >= 0:
            w -= pc[a]
        if b >= 0:
            w -= pc[b]
        out[i] = w
    # losses: opponent strictly stronger
    pc[:] = 0.0
    tot = 0.0
    k = n_opp - 1
    for idx in range(n_my - 1, -1, -1):
        i = ord_mine[idx]
        si = s_mine[i]
        while k >= 0 and s_opp[ord_opp[k]] > si:
            j = ord_opp[k]
            v = x[j]
            tot += v
            a = hands_opp[j, 0]
            b = hands_opp[j, 1]
            if a >= 0:
                pc[a] += v
            if b >= 0:
                pc[b] += v
            k -= 1
        w = tot
        a = hands_mine[i, 0]
        b = hands_mine[i, 1]
        if a >= 0:
            w -= pc[a]
        if b >= 0:
            w -= pc[b]
        out[i] -= w
    return out


@njit(cache=True)
def _terminal_values(n, traverser, rc, r_opp,
                     term_type, term_idx, term_scale,
                     vec0, vec1, sd_s0, sd_s1, sd_ord0, sd_ord1, mats,
                     hands0, hands1, mirror0, mirror1, pc, tmp, tmp2, out):
    """Fill out[:] with the traverser's counterfactual values at terminal n,
    weighted by rc and the opponent reach vector r_opp."""
    t = term_type[n]
    ti = term_idx[n]
    if traverser == 0:
        hm, ho, mm = hands0, hands1, mirror0
    else:
        hm, ho, mm = hands1, hands0, mirror1
    N = out.shape[0]
    No = r_opp.shape[0]
    if t == TERM_VEC:
        vm = vec0[ti] if traverser == 0 else vec1[ti]
        vo = vec1[ti] if traverser == 0 else vec0[ti]
        sign = 1.0 if traverser == 0 else -1.0
        for j in range(No):
            tmp[j] = r_opp[j] * vo[j]
        _compat_sum(r_opp, ho, hm, mm, pc, out)
        _compat_sum(tmp[:No], ho, hm, mm, pc, tmp2[:N])
        for i in range(N):
            out[i] = sign * rc * (vm[i] * out[i] + tmp2[i])
    elif t == TERM_SHOWDOWN:
        if traverser == 0:
            _showdown_cfv(r_opp, sd_s1[ti], sd_ord1[ti], hands1,
                          sd_s0[ti], sd_ord0[ti], hands0, pc, out)
        else:
            _showdown_cfv(r_opp, sd_s0[ti], sd_ord0[ti], hands0,
                          sd_s1[ti], sd_ord1[ti], hands1, pc, out)
        sc = term_scale[n] * rc
        for i in range(N):
            out[i] *= sc
    else:  # matrix
        M = mats[ti]
        if traverser == 0:
            for i in range(N):
                acc = 0.0
                for j in range(r_opp.shape[0]):
                    acc += M[i, j] * r_opp[j]
                out[i] = rc * acc
        else:
            for j in range(N):
                acc = 0.0
                for i in range(r_opp.shape[0]):
                    acc -= M[i, j] * r_opp[i]
                out[j] = rc * acc
    return out


@njit(cache=True, inline="always")
def _hand_blocked(hands, i, card):
    return card >= 0 and (hands[i, 0] == card or hands[i, 1] == card)


@njit(cache=True)
def _regret_match(regrets, off, A, N, sigma):
    for i in range(N):
        tot = 0.0
        for a in range(A):
            r = regrets[off + a * N + i]
            if r > 0.0:
                tot += r
        if tot > 0.0:
            for a in range(A):
                r = regrets[off + a * N + i]
                sigma[off + a * N + i] = r / tot if r > 0.0 else 0.0
        else:
            u = 1.0 / A
            for a in range(A):
                sigma[off + a * N + i] = u


@njit(cache=True)
def vanilla_pass(kind, player, child_start, child_count, child_arr,
                 chance_w, chance_card, slab_off,
                 term_type, term_idx, term_scale,
                 vec0, vec1, sd_s0, sd_s1, sd_ord0, sd_ord1, mats,
                 hands0, hands1, mirror0, mirror1, w0, w1,
                 regrets, stratsum, sigma,
                 r0, r1, rc, vbuf, pc, tmp, tmp2,
                 traverser, reg_w, strat_w):
    """One full-width CFR traversal updating the traverser's regrets and
    strategy sums.  Buffers r0/r1/rc/vbuf are per-node scratch."""
    n_nodes = kind.shape[0]
    N0 = w0.shape[0]
    N1 = w1.shape[0]
    Nt = N0 if traverser == 0 else N1

    for i in range(N0):
        r0[0, i] = w0[i]
    for j in range(N1):
        r1[0, j] = w1[j]
    rc[0] = 1.0

    # forward: reaches and current strategies
    for n in range(n_nodes):
        k = kind[n]
        if k == TERMINAL:
            continue
        cs = child_start[n]
        cc = child_count[n]
        if k == DECISION:
            p = player[n]
            N = N0 if p == 0 else N1
            off = slab_off[n]
            _regret_match(regrets, off, cc, N, sigma)
            if p == traverser:
                rt = r0 if p == 0 else r1
                for a in range(cc):
                    base = off + a * N
                    for i in range(N):
                        stratsum[base + i] += strat_w * rt[n, i] * sigma[base + i]
            for a in range(cc):
                c = child_arr[cs + a]
                rc[c] = rc[n]
                if p == 0:
                    base = slab_off[n] + a * N0
                    for i in range(N0):
                        r0[c, i] = r0[n, i] * sigma[base + i]
                    for j in range(N1):
                        r1[c, j] = r1[n, j]
                else:
                    base = slab_off[n] + a * N1
                    for i in range(N0):
                        r0[c, i] = r0[n, i]
                    for j in range(N1):
                        r1[c, j] = r1[n, j] * sigma[base + j]
        else:  # chance
            for a in range(cc):
                c = child_arr[cs + a]
                card = chance_card[cs + a]
                rc[c] = rc[n] * chance_w[cs + a]
                for i in range(N0):
                    r0[c, i] = 0.0 if _hand_blocked(hands0, i, card) else r0[n, i]
                for j in range(N1):
                    r1[c, j] = 0.0 if _hand_blocked(hands1, j, card) else r1[n, j]

    # backward: traverser values, regret updates
    ht = hands0 if traverser == 0 else hands1
    for n in range(n_nodes - 1, -1, -1):
        k = kind[n]
        if k == TERMINAL:
            r_opp = r1[n] if traverser == 0 else r0[n]
            _terminal_values(n, traverser, rc[n], r_opp,
                             term_type, term_idx, term_scale,
                             vec0, vec1, sd_s0, sd_s1, sd_ord0, sd_ord1, mats,
                             hands0, hands1, mirror0, mirror1, pc, tmp, tmp2,
                             vbuf[n])
            continue
        cs = child_start[n]
        cc = child_count[n]
        if k == CHANCE:
            for i in range(Nt):
                vbuf[n, i] = 0.0
            for a in range(cc):
                c = child_arr[cs + a]
                card = chance_card[cs + a]
                for i in range(Nt):
                    if not _hand_blocked(ht, i, card):
                        vbuf[n, i] += vbuf[c, i]
        else:
            p = player[n]
            if p == traverser:
                N = Nt
                off = slab_off[n]
                for i in range(N):
                    vbuf[n, i] = 0.0
                for a in range(cc):
                    c = child_arr[cs + a]
                    base = off + a * N
                    for i in range(N):
                        vbuf[n, i] += sigma[base + i] * vbuf[c, i]
                for a in range(cc):
                    c = child_arr[cs + a]
                    base = off + a * N
                    for i in range(N):
                        regrets[base + i] += reg_w * (vbuf[c, i] - vbuf[n, i])
            else:
                for i in range(Nt):
                    vbuf[n, i] = 0.0
                for a in range(cc):
                    c = child_arr[cs + a]
                    for i in range(Nt):
                        vbuf[n, i] += vbuf[c, i]


@njit(cache=True)
def eval_pass(kind, player, child_start, child_count, child_arr,
              chance_w, chance_card, slab_off,
              term_type, term_idx, term_scale,
              vec0, vec1, sd_s0, sd_s1, sd_ord0, sd_ord1, mats,
              hands0, hands1, mirror0, mirror1,
              probs, root_node, r0_init, r1_init, rc_init,
              responder, mode,
              r0, r1, rc, vbuf, visited, pc, tmp, tmp2, br_choice):
    """Exact sweep below ``root_node``.

    mode 0: both players follow ``probs``; returns responder values.
    mode 1: responder best-responds (opponent follows ``probs``); fills
            ``br_choice`` with the argmax action per (node, hand), lowest
            index on ties.
    Returns the responder's per-hand counterfactual values at root_node.
    """
    n_nodes = kind.shape[0]
    N0 = hands0.shape[0]
    N1 = hands1.shape[0]
    Nr = N0 if responder == 0 else N1

    visited[:] = 0
    visited[root_node] = 1
    for i in range(N0):
        r0[root_node, i] = r0_init[i]
    for j in range(N1):
        r1[root_node, j] = r1_init[j]
    rc[root_node] = rc_init

    for n in range(root_node, n_nodes):
        if visited[n] == 0 or kind[n] == TERMINAL:
            continue
        cs = child_start[n]
        cc = child_count[n]
        if kind[n] == DECISION:
            p = player[n]
            N = N0 if p == 0 else N1
            off = slab_off[n]
            follow = mode == BR_MODE_VALUE or p != responder
            for a in range(cc):
                c = child_arr[cs + a]
                visited[c] = 1
                rc[c] = rc[n]
                base = off + a * N
                if p == 0:
                    for i in range(N0):
                        r0[c, i] = r0[n, i] * (probs[base + i] if follow else 1.0)
                    for j in range(N1):
                        r1[c, j] = r1[n, j]
                else:
                    for i in range(N0):
                        r0[c, i] = r0[n, i]
                    for j in range(N1):
                        r1[c, j] = r1[n, j] * (probs[base + j] if follow else 1.0)
        else:
            for a in range(cc):
                c = child_arr[cs + a]
                visited[c] = 1
                card = chance_card[cs + a]
                rc[c] = rc[n] * chance_w[cs + a]
                for i in range(N0):
                    r0[c, i] = 0.0 if _hand_blocked(hands0, i, card) else r0[n, i]
                for j in range(N1):
                    r1[c, j] = 0.0 if _hand_blocked(hands1, j, card) else r1[n, j]

    hr = hands0 if responder == 0 else hands1
    for n in range(n_nodes - 1, root_node - 1, -1):
        if visited[n] == 0:
            continue
        k = kind[n]
        if k == TERMINAL:
            r_opp = r1[n] if responder == 0 else r0[n]
            _terminal_values(n, responder, rc[n], r_opp,
                             term_type, term_idx, term_scale,
                             vec0, vec1, sd_s0, sd_s1, sd_ord0, sd_ord1, mats,
                             hands0, hands1, mirror0, mirror1, pc, tmp, tmp2,
                             vbuf[n])
            continue
        cs = child_start[n]
        cc = child_count[n]
        if k == CHANCE:
            for i in range(Nr):
                vbuf[n, i] = 0.0
            for a in range(cc):
                c = child_arr[cs + a]
                card = chance_card[cs + a]
                for i in range(Nr):
                    if not _hand_blocked(hr, i, card):
                        vbuf[n, i] += vbuf[c, i]
        else:
            p = player[n]
            if p == responder and mode == BR_MODE_MAX:
                for i in range(Nr):
                    best = -1.0e300
                    pick = 0
                    for a in range(cc):
                        c = child_arr[cs + a]
                        if vbuf[c, i] > best:
                            best = vbuf[c, i]
                            pick = a
                    vbuf[n, i] = best
                    br_choice[n, i] = pick
            elif p == responder:
                N = Nr
                off = slab_off[n]
                for i in range(N):
                    vbuf[n, i] = 0.0
                for a in range(cc):
                    c = child_arr[cs + a]
                    base = off + a * N
                    for i in range(N):
                        vbuf[n, i] += probs[base + i] * vbuf[c, i]
            else:
                for i in range(Nr):
                    vbuf[n, i] = 0.0
                for a in range(cc):
                    c = child_arr[cs + a]
                    for i in range(Nr):
                        vbuf[n, i] += vbuf[c, i]
    return vbuf[root_node]


@njit(cache=True)
def _sample_index(w, rng_state):
    tot = 0.0
    for i in range(w.shape[0]):
        tot += w[i]
    u = rng_uniform(rng_state) * tot
    acc = 0.0
    for i in range(w.shape[0]):
        acc += w[i]
        if acc >= u:
            return i
    return w.shape[0] - 1


@njit(cache=True)
def _compatible(hands0, i, hands1, j):
    a0 = hands0[i, 0]
    b0 = hands0[i, 1]
    a1 = hands1[j, 0]
    b1 = hands1[j, 1]
    if a0 >= 0 and (a0 == a1 or a0 == b1):
        return False
    if b0 >= 0 and (b0 == a1 or b0 == b1):
        return False
    return True


@njit(cache=True)
def es_walk(n, hi, hj, traverser,
            kind, player, child_start, child_count, child_arr,
            chance_w, chance_card, slab_off,
            term_type, term_idx, term_scale,
            vec0, vec1, sd_s0, sd_s1, mats,
            hands0, hands1,
            regrets, stratsum, rng_state, reg_w, strat_w):
    """External-sampling walk with fixed private hands (hi, hj); returns
    the traverser's sampled value.  Chance and the non-traverser sample,
    the traverser branches over all actions."""
    k = kind[n]
    if k == TERMINAL:
        t = term_type[n]
        ti = term_idx[n]
        if t == TERM_VEC:
            u0 = vec0[ti, hi] + vec1[ti, hj]
        elif t == TERM_SHOWDOWN:
            d = sd_s0[ti, hi] - sd_s1[ti, hj]
            u0 = term_scale[n] * (1.0 if d > 0 else (-1.0 if d < 0 else 0.0))
        else:
            u0 = mats[ti, hi, hj]
        return u0 if traverser == 0 else -u0

    cs = child_start[n]
    cc = child_count[n]
    if k == CHANCE:
        tot = 0.0
        for a in range(cc):
            card = chance_card[cs + a]
            if not (_hand_blocked(hands0, hi, card) or _hand_blocked(hands1, hj, card)):
                tot += chance_w[cs + a]
        u = rng_uniform(rng_state) * tot
        acc = 0.0
        pick = -1
        for a in range(cc):
            card = chance_card[cs + a]
            if not (_hand_blocked(hands0, hi, card) or _hand_blocked(hands1, hj, card)):
                acc += chance_w[cs + a]
                if acc >= u and pick < 0:
                    pick = a
        if pick < 0:
            pick = cc - 1
        return es_walk(child_arr[cs + pick], hi, hj, traverser,
                       kind, player, child_start, child_count, child_arr,
                       chance_w, chance_card, slab_off,
                       term_type, term_idx, term_scale,
                       vec0, vec1, sd_s0, sd_s1, mats, hands0, hands1,
                       regrets, stratsum, rng_state, reg_w, strat_w)

    p = player[n]
    N = hands0.shape[0] if p == 0 else hands1.shape[0]
    h = hi if p == 0 else hj
    off = slab_off[n]
    # regret matching for this hand only
    tot = 0.0
    for a in range(cc):
        r = regrets[off + a * N + h]
        if r > 0.0:
            tot += r
    if p == traverser:
        v = 0.0
        vals = np.empty(cc, dtype=np.float64)
        for a in range(cc):
            r = regrets[off + a * N + h]
            sa = (r / tot if r > 0.0 else 0.0) if tot > 0.0 else 1.0 / cc
            va = es_walk(child_arr[cs + a], hi, hj, traverser,
                         kind, player, child_start, child_count, child_arr,
                         chance_w, chance_card, slab_off,
                         term_type, term_idx, term_scale,
                         vec0, vec1, sd_s0, sd_s1, mats, hands0, hands1,
                         regrets, stratsum, rng_state, reg_w, strat_w)
            vals[a] = va
            v += sa * va
        for a in range(cc):
            regrets[off + a * N + h] += reg_w * (vals[a] - v)
        return v
    # opponent: accumulate average strategy, sample one action
    u = rng_uniform(rng_state)
    acc = 0.0
    pick = -1
    for a in range(cc):
        r = regrets[off + a * N + h]
        sa = (r / tot if r > 0.0 else 0.0) if tot > 0.0 else 1.0 / cc
        stratsum[off + a * N + h] += strat_w * sa
        acc += sa
        if pick < 0 and u < acc:
            pick = a
    if pick < 0:
        pick = cc - 1
    return es_walk(child_arr[cs + pick], hi, hj, traverser,
                   kind, player, child_start, child_count, child_arr,
                   chance_w, chance_card, slab_off,
                   term_type, term_idx, term_scale,
                   vec0, vec1, sd_s0, sd_s1, mats, hands0, hands1,
                   regrets, stratsum, rng_state, reg_w, strat_w)


@njit(cache=True)
def es_iteration(kind, player, child_start, child_count, child_arr,
                 chance_w, chance_card, slab_off,
                 term_type, term_idx, term_scale,
                 vec0, vec1, sd_s0, sd_s1, mats,
                 hands0, hands1, w0, w1,
                 regrets, stratsum, rng_state, reg_w, strat_w):
    """One external-sampling iteration: both traversers, fresh sampled deal
    for each."""
    for traverser in range(2):
        hi = _sample_index(w0, rng_state)
        hj = _sample_index(w1, rng_state)
        tries = 0
        while not _compatible(hands0, hi, hands1, hj):
            hi = _sample_index(w0, rng_state)
            hj = _sample_index(w1, rng_state)
            tries += 1
            if tries > 10000:
                break
        es_walk(0, hi, hj, traverser,
                kind, player, child_start, child_count, child_arr,
                chance_w, chance_card, slab_off,
                term_type, term_idx, term_scale,
                vec0, vec1, sd_s0, sd_s1, mats, hands0, hands1,
                regrets, stratsum, rng_state, reg_w, strat_w)

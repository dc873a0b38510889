"""Nopython kernels for blueprint training on the abstracted HUNL game.

The betting walk is external-sampling MCCFR: one sampled deal per
iteration, the traverser branching over its full abstract menu, the
opponent and chance sampled.  Infosets are allocated on first visit
through typed dicts:

  * sequence ids: (parent_seq << 4 | action index) -> dense id, giving an
    exact, collision-free encoding of the abstract action sequence;
  * infoset rows: (seq << 17 | bucket) -> row in the regret/strategy
    arrays (17 bits covers the largest per-round bucket count).

Bucket ids per (player, round) are computed outside and passed in, so
the card-feature machinery stays in Python where its per-board caches
live.  Chip arithmetic mirrors hunl.py exactly; the menu function is the
nopython twin of abstraction.actions.abstract_actions and is tested for
agreement with it.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba.typed import Dict
from numba.types import int64

from .fastcards import eval_hand, rng_uniform, sample_cards

KIND_FOLD = 0
KIND_CALL = 1
KIND_RAISE = 2
KIND_ALLIN = 3

MAX_MENU = 7   # fold + call + four pot fractions + all-in
MAX_DEPTH = 64
BUCKET_BITS = 17


def new_seq_dict():
    d = Dict.empty(int64, int64)
    d[-1] = -1  # sentinel so the dict always has a concrete type
    return d


def new_infoset_dict():
    d = Dict.empty(int64, int64)
    d[-1] = -1
    return d


@njit(cache=True)
def menu_hunl(rnd, ordinal, call_level, my_wager, my_stack, opp_stack,
              pot, bb, last_inc,
              band_lims, band_kind, band_frac, band_len,
              out_kind, out_amt):
    """Abstract action menu at a state; returns entry count.

    out_kind: 0 fold, 1 call, 2 raise-to(out_amt), 3 all-in.  Order is
    fold, call, raises ascending, all-in.  Must match the Python
    abstract_actions resolution exactly.
    """
    band = band_lims.shape[0] - 1
    for b in range(band_lims.shape[0]):
        if ordinal <= band_lims[b]:
            band = b
            break
    facing = call_level > my_wager
    my_max = my_wager + my_stack
    can_raise = opp_stack > 0 and my_max > call_level
    raise_min = call_level + (last_inc if last_inc > bb else bb)
    if raise_min > my_max:
        raise_min = my_max
    call_pay = call_level - my_wager
    if call_pay > my_stack:
        call_pay = my_stack
    pot_after_call = pot + call_pay

    n = 0
    want_allin = False
    raises = np.empty(MAX_MENU, dtype=np.int64)
    n_raises = 0
    has_fold = False
    for e in range(band_len[band]):
        k = band_kind[band, e]
        if k == KIND_FOLD:
            if facing:
                has_fold = True
        elif k == KIND_CALL:
            pass  # always emitted
        elif k == KIND_ALLIN:
            if can_raise:
                want_allin = True
        else:  # pot fraction
            if not can_raise:
                continue
            amount = call_level + int(round(band_frac[band, e] * pot_after_call))
            if amount >= my_max:
                want_allin = True
            elif amount >= raise_min:
                dup = False
                for t in range(n_raises):
                    if raises[t] == amount:
                        dup = True
                        break
                if not dup:
                    raises[n_raises] = amount
                    n_raises += 1
    if has_fold:
        out_kind[n] = KIND_FOLD
        out_amt[n] = 0
        n += 1
    out_kind[n] = KIND_CALL
    out_amt[n] = 0
    n += 1
    for a in range(n_raises):
        for b2 in range(a + 1, n_raises):
            if raises[b2] < raises[a]:
                tmp = raises[a]
                raises[a] = raises[b2]
                raises[b2] = tmp
    for a in range(n_raises):
        out_kind[n] = KIND_RAISE
        out_amt[n] = raises[a]
        n += 1
    if want_allin and can_raise:
        out_kind[n] = KIND_ALLIN
        out_amt[n] = my_max
        n += 1
    return n


@njit(cache=True)
def deal_iteration(rng_state, cards_out):
    """Sample seat-0 holes, seat-1 holes, and 5 board cards."""
    sample_cards(rng_state, np.int64(0), cards_out)
    return cards_out


@njit(cache=True)
def showdown_sign(cards9):
    """Sign of seat 0's showdown result on the full board."""
    hand = np.empty(7, dtype=np.int64)
    for i in range(5):
        hand[2 + i] = cards9[4 + i]
    hand[0] = cards9[0]
    hand[1] = cards9[1]
    r0 = eval_hand(hand)
    hand[0] = cards9[2]
    hand[1] = cards9[3]
    r1 = eval_hand(hand)
    if r0 > r1:
        return 1
    if r0 < r1:
        return -1
    return 0


@njit(cache=True)
def _row_for(seq, bucket, rnd, infoset_dict,
             row_seq, row_bucket, row_round, row_actions, counters, n_actions):
    key = (seq << BUCKET_BITS) | bucket
    if key in infoset_dict:
        return infoset_dict[key]
    row = counters[1]
    infoset_dict[key] = row
    row_seq[row] = seq
    row_bucket[row] = bucket
    row_round[row] = rnd
    row_actions[row] = n_actions
    counters[1] = row + 1
    return row


@njit(cache=True)
def _child_seq(seq, action, seq_dict, seq_parent, seq_action, counters):
    key = (seq << 4) | action
    if key in seq_dict:
        return seq_dict[key]
    sid = counters[0]
    seq_dict[key] = sid
    seq_parent[sid] = seq
    seq_action[sid] = action
    counters[0] = sid + 1
    return sid


@njit(cache=True)
def _step(kind, amt, rnd, me, pot, wager0, wager1, stack0, stack1,
          last_inc, ordinal, sd_sign, start_stack):
    """Apply one abstract action.  Returns
    (done, value_for_seat0, rnd, to_act, pot, w0, w1, s0, s1, last_inc,
    ordinal); the state fields are meaningful only when not done."""
    level = wager0 if wager0 > wager1 else wager1

    if kind == KIND_FOLD:
        c0 = start_stack - stack0
        c1 = start_stack - stack1
        risk = c0 if c0 < c1 else c1
        won = risk if me == 1 else -risk  # folder loses the matched amount
        return (1, float(won), rnd, me, pot, wager0, wager1, stack0, stack1,
                last_inc, ordinal)

    if kind == KIND_CALL:
        if me == 0:
            pay = level - wager0
            if pay > stack0:
                pay = stack0
            wager0 += pay
            stack0 -= pay
        else:
            pay = level - wager1
            if pay > stack1:
                pay = stack1
            wager1 += pay
            stack1 -= pay
        pot += pay
        ordinal += 1
        caller_allin_short = wager0 != wager1 and \
            ((me == 0 and stack0 == 0) or (me == 1 and stack1 == 0))
        closes = (wager0 == wager1 and ordinal >= 2) or caller_allin_short
        if not closes:
            return (0, 0.0, rnd, 1 - me, pot, wager0, wager1, stack0, stack1,
                    last_inc, ordinal)
        if rnd == 3 or stack0 == 0 or stack1 == 0:
            c0 = start_stack - stack0
            c1 = start_stack - stack1
            risk = c0 if c0 < c1 else c1
            return (1, float(sd_sign * risk), rnd, me, pot, wager0, wager1,
                    stack0, stack1, last_inc, ordinal)
        return (0, 0.0, rnd + 1, 1, pot, 0, 0, stack0, stack1, 0, 0)

    # raise / all-in: amt is the raise-to total
    inc = amt - level
    if me == 0:
        pay = amt - wager0
        wager0 = amt
        stack0 -= pay
    else:
        pay = amt - wager1
        wager1 = amt
        stack1 -= pay
    pot += pay
    nli = last_inc if last_inc > inc else inc
    return (0, 0.0, rnd, 1 - me, pot, wager0, wager1, stack0, stack1,
            nli, ordinal + 1)


@njit(cache=True)
def walk_hunl(traverser, rnd, to_act, pot, wager0, wager1, stack0, stack1,
              last_inc, ordinal, seq, sd_sign, start_stack, bb,
              buckets, band_lims, band_kind, band_frac, band_len,
              seq_dict, infoset_dict,
              seq_parent, seq_action, row_seq, row_bucket, row_round,
              row_actions, counters,
              regrets, stratsum, rng_state, reg_w, strat_w,
              depth, kinds_s, amts_s, vals_s):
    """External-sampling walk over the abstract betting tree; returns the
    traverser's sampled value in chips.  Scratch rows are indexed by
    recursion depth to keep the walk allocation-free."""
    kinds = kinds_s[depth]
    amts = amts_s[depth]
    if to_act == 0:
        n = menu_hunl(rnd, ordinal + 1, max(wager0, wager1), wager0, stack0,
                      stack1, pot, bb, last_inc,
                      band_lims, band_kind, band_frac, band_len, kinds, amts)
    else:
        n = menu_hunl(rnd, ordinal + 1, max(wager0, wager1), wager1, stack1,
                      stack0, pot, bb, last_inc,
                      band_lims, band_kind, band_frac, band_len, kinds, amts)

    bucket = buckets[to_act, rnd]
    row = _row_for(seq, bucket, rnd, infoset_dict,
                   row_seq, row_bucket, row_round, row_actions, counters, n)

    tot = 0.0
    for a in range(n):
        r = regrets[row, a]
        if r > 0.0:
            tot += r

    if to_act == traverser:
        vals = vals_s[depth]
        v = 0.0
        for a in range(n):
            r = regrets[row, a]
            sa = (r / tot if r > 0.0 else 0.0) if tot > 0.0 else 1.0 / n
            nseq = _child_seq(seq, a, seq_dict, seq_parent, seq_action, counters)
            done, v0, r2, ta, p2, w0, w1, s0, s1, li, od = _step(
                kinds[a], amts[a], rnd, to_act, pot, wager0, wager1,
                stack0, stack1, last_inc, ordinal, sd_sign, start_stack)
            if done:
                va = v0 if traverser == 0 else -v0
            else:
                va = walk_hunl(traverser, r2, ta, p2, w0, w1, s0, s1, li, od,
                               nseq, sd_sign, start_stack, bb,
                               buckets, band_lims, band_kind, band_frac,
                               band_len, seq_dict, infoset_dict,
                               seq_parent, seq_action, row_seq, row_bucket,
                               row_round, row_actions, counters,
                               regrets, stratsum, rng_state, reg_w, strat_w,
                               depth + 1, kinds_s, amts_s, vals_s)
            vals[a] = va
            v += sa * va
        for a in range(n):
            regrets[row, a] += reg_w * (vals[a] - v)
        return v

    # opponent node: accumulate average strategy, sample one action
    u = rng_uniform(rng_state)
    acc = 0.0
    pick = -1
    for a in range(n):
        r = regrets[row, a]
        sa = (r / tot if r > 0.0 else 0.0) if tot > 0.0 else 1.0 / n
        stratsum[row, a] += strat_w * sa
        acc += sa
        if pick < 0 and u < acc:
            pick = a
    if pick < 0:
        pick = n - 1
    nseq = _child_seq(seq, pick, seq_dict, seq_parent, seq_action, counters)
    done, v0, r2, ta, p2, w0, w1, s0, s1, li, od = _step(
        kinds[pick], amts[pick], rnd, to_act, pot, wager0, wager1,
        stack0, stack1, last_inc, ordinal, sd_sign, start_stack)
    if done:
        return v0 if traverser == 0 else -v0
    return walk_hunl(traverser, r2, ta, p2, w0, w1, s0, s1, li, od,
                     nseq, sd_sign, start_stack, bb,
                     buckets, band_lims, band_kind, band_frac, band_len,
                     seq_dict, infoset_dict, seq_parent, seq_action,
                     row_seq, row_bucket, row_round, row_actions, counters,
                     regrets, stratsum, rng_state, reg_w, strat_w,
                     depth + 1, kinds_s, amts_s, vals_s)


@njit(cache=True)
def seq_path(seq, seq_parent, seq_action, out):
    """Reconstruct the action-index path of a sequence id (root = 0).
    Returns the path length; out is filled root-first."""
    n = 0
    s = seq
    while s > 0:
        out[n] = seq_action[s]
        n += 1
        s = seq_parent[s]
    for i in range(n // 2):
        tmp = out[i]
        out[i] = out[n - 1 - i]
        out[n - 1 - i] = tmp
    return n


@njit(cache=True)
def export_dict(d, keys, vals):
    """Copy a typed dict's items into arrays; returns the count."""
    i = 0
    for k, v in d.items():
        keys[i] = k
        vals[i] = v
        i += 1
    return i


@njit(cache=True)
def import_dict(d, keys, vals, n):
    for i in range(n):
        d[keys[i]] = vals[i]

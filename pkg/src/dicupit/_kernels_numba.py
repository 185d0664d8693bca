"""Numba-compiled hot kernels: batch hashing, cuckoo probe/insert, Bloom,
chain-hash and open-addressed lookups.

Mirrors `_kernels_py` function for function; both operate on the same raw
numpy state arrays. All hash arithmetic stays in uint64 — mixing uint64 with
signed ints in numba promotes to float64 and silently corrupts digests.
"""

import numpy as np
from numba import njit

U0 = np.uint64(0)
U1 = np.uint64(1)
U27 = np.uint64(27)
U29 = np.uint64(29)
U32 = np.uint64(32)
U33 = np.uint64(33)
U37 = np.uint64(37)
U63 = np.uint64(63)
UP1 = np.uint64(0x9E3779B185EBCA87)
UP2 = np.uint64(0xC2B2AE3D27D4EB4F)
UP3 = np.uint64(0x165667B19E3779F9)
UF1 = np.uint64(0xFF51AFD7ED558CCD)
UF2 = np.uint64(0xC4CEB9FE1A85EC53)


@njit(cache=True)
def _hash_range(flat, lo, hi, seed):
    n = hi - lo
    h = seed ^ (np.uint64(n + 1) * UP1)
    i = lo
    while i + 8 <= hi:
        c = U0
        for j in range(8):
            c |= np.uint64(flat[i + j]) << np.uint64(8 * j)
        h ^= c * UP2
        h = (h << U27) | (h >> U37)
        h = h * UP1 + UP3
        i += 8
    if i < hi:
        c = U0
        for j in range(hi - i):
            c |= np.uint64(flat[i + j]) << np.uint64(8 * j)
        h ^= c * UP2
        h = (h << U27) | (h >> U37)
        h = h * UP1 + UP3
    h ^= h >> U33
    h *= UF1
    h ^= h >> U29
    h *= UF2
    h ^= h >> U32
    return h


@njit(cache=True)
def _hash_fp(fp, fp_seed):
    # identical to hashing the fingerprint as 2 little-endian bytes
    h = fp_seed ^ (np.uint64(3) * UP1)
    h ^= fp * UP2
    h = (h << U27) | (h >> U37)
    h = h * UP1 + UP3
    h ^= h >> U33
    h *= UF1
    h ^= h >> U29
    h *= UF2
    h ^= h >> U32
    return h


@njit(cache=True)
def hash_batch(flat, offsets, seed, out):
    s = np.uint64(seed)
    for i in range(len(offsets) - 1):
        out[i] = _hash_range(flat, offsets[i], offsets[i + 1], s)


@njit(cache=True)
def _read_slot(words, slot, width, mask):
    pos = slot * width
    w = pos >> 6
    off = pos & 63
    v = words[w] >> np.uint64(off)
    if off + width > 64:
        v |= words[w + 1] << np.uint64(64 - off)
    return v & mask


@njit(cache=True)
def _write_slot(words, slot, width, mask, value):
    pos = slot * width
    w = pos >> 6
    off = pos & 63
    lo = words[w]
    lo &= ~(mask << np.uint64(off))
    lo |= value << np.uint64(off)
    words[w] = lo
    if off + width > 64:
        spill = np.uint64(off + width - 64)
        hi = words[w + 1]
        hi &= ~((U1 << spill) - U1)
        hi |= value >> np.uint64(64 - off)
        words[w + 1] = hi


@njit(cache=True)
def cuckoo_insert_batch(fp_words, pay_words, e, lanes, b, fp_bits, pay_bits,
                        max_kicks, flat, offsets, lane_arr, payload,
                        seed, fp_seed, rng_seed, out_kicks, hash_ctr):
    """Insert each name into its lane. out_kicks[i] = kicks used, -1 on Full
    (table restored). Payload is stored alongside when pay_bits > 0."""
    np.random.seed(rng_seed)
    s = np.uint64(seed)
    fs = np.uint64(fp_seed)
    fmask = (U1 << np.uint64(fp_bits)) - U1
    pmask = (U1 << np.uint64(pay_bits)) - U1 if pay_bits > 0 else U0
    emask = np.uint64(e - 1)
    pay = np.uint64(payload)
    undo_slot = np.empty(max_kicks, dtype=np.int64)
    undo_fp = np.empty(max_kicks, dtype=np.uint64)
    undo_pay = np.empty(max_kicks, dtype=np.uint64)
    nhash = U0
    for i in range(len(offsets) - 1):
        d = _hash_range(flat, offsets[i], offsets[i + 1], s)
        fp = (d >> U32) & fmask
        if fp == U0:
            fp = U1
        i1 = np.int64(d & emask)
        d2 = _hash_fp(fp, fs)
        i2 = i1 ^ np.int64(d2 & emask)
        nhash += np.uint64(2)
        lane = lane_arr[i]
        placed = False
        for bucket in (i1, i2):
            base = (bucket * lanes + lane) * b
            for sl in range(b):
                if _read_slot(fp_words, base + sl, fp_bits, fmask) == U0:
                    _write_slot(fp_words, base + sl, fp_bits, fmask, fp)
                    if pay_bits > 0:
                        _write_slot(pay_words, base + sl, pay_bits, pmask, pay)
                    out_kicks[i] = 0
                    placed = True
                    break
            if placed:
                break
        if placed:
            continue
        cur = i1 if np.random.randint(0, 2) == 0 else i2
        cur_fp = fp
        cur_pay = pay
        done = -1
        for kick in range(max_kicks):
            v = np.random.randint(0, b)
            slot = (cur * lanes + lane) * b + v
            old_fp = _read_slot(fp_words, slot, fp_bits, fmask)
            old_pay = _read_slot(pay_words, slot, pay_bits, pmask) if pay_bits > 0 else U0
            _write_slot(fp_words, slot, fp_bits, fmask, cur_fp)
            if pay_bits > 0:
                _write_slot(pay_words, slot, pay_bits, pmask, cur_pay)
            undo_slot[kick] = slot
            undo_fp[kick] = old_fp
            undo_pay[kick] = old_pay
            cur_fp = old_fp
            cur_pay = old_pay
            nhash += U1
            cur = cur ^ np.int64(_hash_fp(cur_fp, fs) & emask)
            base = (cur * lanes + lane) * b
            for sl in range(b):
                if _read_slot(fp_words, base + sl, fp_bits, fmask) == U0:
                    _write_slot(fp_words, base + sl, fp_bits, fmask, cur_fp)
                    if pay_bits > 0:
                        _write_slot(pay_words, base + sl, pay_bits, pmask, cur_pay)
                    done = kick + 1
                    break
            if done >= 0:
                break
        if done < 0:
            # overflow: unwind so every previously held fingerprint survives
            for kick in range(max_kicks - 1, -1, -1):
                _write_slot(fp_words, undo_slot[kick], fp_bits, fmask, undo_fp[kick])
                if pay_bits > 0:
                    _write_slot(pay_words, undo_slot[kick], pay_bits, pmask, undo_pay[kick])
        out_kicks[i] = done
    hash_ctr[0] += nhash


@njit(cache=True)
def cuckoo_lookup_batch(fp_words, e, lanes, b, fp_bits, flat, offsets,
                        seed, fp_seed, out_hits, hash_ctr):
    """Fingerprint membership probe over both candidate buckets of every lane."""
    s = np.uint64(seed)
    fs = np.uint64(fp_seed)
    fmask = (U1 << np.uint64(fp_bits)) - U1
    emask = np.uint64(e - 1)
    n = len(offsets) - 1
    for i in range(n):
        d = _hash_range(flat, offsets[i], offsets[i + 1], s)
        fp = (d >> U32) & fmask
        if fp == U0:
            fp = U1
        i1 = np.int64(d & emask)
        i2 = i1 ^ np.int64(_hash_fp(fp, fs) & emask)
        hit = False
        for bucket in (i1, i2):
            base = bucket * lanes * b
            for sl in range(lanes * b):
                if _read_slot(fp_words, base + sl, fp_bits, fmask) == fp:
                    hit = True
                    break
            if hit:
                break
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(2 * n)


# 6-bit lane constants for word-parallel row scans: every 192 bits of a
# bucket row hold 32 six-bit fingerprints as 10+10+10 aligned lanes plus two
# lanes straddling the word boundaries.
LANE_ONES = np.uint64(0x0041041041041041)   # bit 0 of each of 10 lanes
LANE_MSBS = np.uint64(0x0820820820820820)   # bit 5 of each of 10 lanes
M60 = np.uint64((1 << 60) - 1)
U2 = np.uint64(2)
U4 = np.uint64(4)
U60 = np.uint64(60)
U62 = np.uint64(62)
U6MASK = np.uint64(63)


@njit(cache=True)
def _row_has_fp6(words, wbase, groups, fp, bcast):
    """True when any 6-bit slot in a row of `groups`*192 bits equals fp.

    The subtract/and-not trick flags words that may contain a zero lane after
    XOR with the broadcast fingerprint; flagged words are verified exactly, so
    false negatives are impossible and false positives only cost a re-scan.
    """
    for g in range(groups):
        w0 = words[wbase + 3 * g]
        w1 = words[wbase + 3 * g + 1]
        w2 = words[wbase + 3 * g + 2]
        y = (w0 & M60) ^ bcast
        if ((y - LANE_ONES) & ~y & LANE_MSBS) != U0:
            v = w0 & M60
            for _ in range(10):
                if (v & U6MASK) == fp:
                    return True
                v >>= np.uint64(6)
        if (((w0 >> U60) | (w1 << U4)) & U6MASK) == fp:
            return True
        y = ((w1 >> U2) & M60) ^ bcast
        if ((y - LANE_ONES) & ~y & LANE_MSBS) != U0:
            v = (w1 >> U2) & M60
            for _ in range(10):
                if (v & U6MASK) == fp:
                    return True
                v >>= np.uint64(6)
        if (((w1 >> U62) | (w2 << U2)) & U6MASK) == fp:
            return True
        y = ((w2 >> U4) & M60) ^ bcast
        if ((y - LANE_ONES) & ~y & LANE_MSBS) != U0:
            v = (w2 >> U4) & M60
            for _ in range(10):
                if (v & U6MASK) == fp:
                    return True
                v >>= np.uint64(6)
    return False


@njit(cache=True)
def _row_has_fp_generic(words, row_start_slot, row_slots, fp_bits, fmask, fp):
    """Sequential scan of one bucket row with incremental bit-offset tracking."""
    pos = row_start_slot * fp_bits
    w = pos >> 6
    off = pos & 63
    for _ in range(row_slots):
        v = words[w] >> np.uint64(off)
        if off + fp_bits > 64:
            v |= words[w + 1] << np.uint64(64 - off)
        if (v & fmask) == fp:
            return True
        off += fp_bits
        if off >= 64:
            off -= 64
            w += 1
    return False


@njit(cache=True)
def dicupit_lookup_batch(g_fp_words, g_e, g_b, s_fp_words, e, k, b, fp_bits,
                         flat, offsets, seed, fp_seed, out_hits, hash_ctr):
    """Full PIT membership probe: GlobalCu first, then the fan-out across all
    k per-interface lanes. One name digest plus one fingerprint digest."""
    s = np.uint64(seed)
    fs = np.uint64(fp_seed)
    fmask = (U1 << np.uint64(fp_bits)) - U1
    emask = np.uint64(e - 1)
    gmask = np.uint64(g_e - 1)
    n = len(offsets) - 1
    row_slots = k * b
    row_bits = row_slots * fp_bits
    fast = fp_bits == 6 and row_bits % 192 == 0
    groups = row_bits // 192
    row_words = row_bits // 64 if fast else 0
    for i in range(n):
        d = _hash_range(flat, offsets[i], offsets[i + 1], s)
        fp = (d >> U32) & fmask
        if fp == U0:
            fp = U1
        i1 = np.int64(d & emask)
        xor = _hash_fp(fp, fs)
        i2 = i1 ^ np.int64(xor & emask)
        g1 = np.int64(d & gmask)
        g2 = g1 ^ np.int64(xor & gmask)
        hit = _row_has_fp_generic(g_fp_words, g1 * g_b, g_b, fp_bits, fmask, fp)
        if not hit and g2 != g1:
            hit = _row_has_fp_generic(g_fp_words, g2 * g_b, g_b, fp_bits, fmask, fp)
        if not hit:
            if fast:
                bcast = fp * LANE_ONES
                hit = _row_has_fp6(s_fp_words, i1 * row_words, groups, fp, bcast)
                if not hit and i2 != i1:
                    hit = _row_has_fp6(s_fp_words, i2 * row_words, groups, fp, bcast)
            else:
                hit = _row_has_fp_generic(s_fp_words, i1 * row_slots, row_slots,
                                          fp_bits, fmask, fp)
                if not hit and i2 != i1:
                    hit = _row_has_fp_generic(s_fp_words, i2 * row_slots, row_slots,
                                              fp_bits, fmask, fp)
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(2 * n)


@njit(cache=True)
def bloom_insert_batch(nibbles, m, kh, seed_base, flat, offsets, lane_arr,
                       shared_row, hash_ctr):
    """Counting-Bloom insert into each name's lane row plus the shared row.
    4-bit counters saturate at 15 and stay sticky once saturated."""
    nhash = U0
    for i in range(len(offsets) - 1):
        lo = offsets[i]
        hi = offsets[i + 1]
        for row in (np.int64(lane_arr[i]), np.int64(shared_row)):
            if row < 0:
                continue
            for j in range(kh):
                d = _hash_range(flat, lo, hi, seed_base + np.uint64(row * 256 + j))
                idx = np.int64(d % np.uint64(m))
                byte = idx >> 1
                shift = (idx & 1) * 4
                cur = np.int64(nibbles[row, byte])
                c = (cur >> shift) & 0xF
                if c < 15:
                    nibbles[row, byte] = np.uint8((cur & (0xFF ^ (0xF << shift))) | ((c + 1) << shift))
            nhash += np.uint64(kh)
    hash_ctr[0] += nhash


@njit(cache=True)
def bloom_lookup_batch(nibbles, m, kh, seed_base, row_lo, row_hi, flat,
                       offsets, out_hits, hash_ctr):
    """Query rows [row_lo, row_hi); hit when any row has all kh counters > 0.
    Every consulted filter computes its full set of kh hashes (fixed-cost
    query keeps the per-filter invocation count exact)."""
    nhash = U0
    for i in range(len(offsets) - 1):
        lo = offsets[i]
        hi = offsets[i + 1]
        hit = False
        for row in range(row_lo, row_hi):
            ok = True
            for j in range(kh):
                d = _hash_range(flat, lo, hi, seed_base + np.uint64(row * 256 + j))
                idx = np.int64(d % np.uint64(m))
                c = (np.int64(nibbles[row, idx >> 1]) >> ((idx & 1) * 4)) & 0xF
                if c == 0:
                    ok = False
            nhash += np.uint64(kh)
            if ok:
                hit = True
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += nhash


@njit(cache=True)
def chain_insert_batch(heads, key32, exp16, if16, nxt, meta, mask, flat,
                       offsets, lane_arr, exp_value, seed_a, seed_b,
                       out_ok, hash_ctr):
    """Prepend one entry per name. meta[0] is the allocation cursor; the pool
    is full when it reaches len(key32). Two name digests per insert: one for
    the bucket, one for the stored 32-bit tag."""
    sa = np.uint64(seed_a)
    sb = np.uint64(seed_b)
    nhash = U0
    for i in range(len(offsets) - 1):
        lo = offsets[i]
        hi = offsets[i + 1]
        da = _hash_range(flat, lo, hi, sa)
        db = _hash_range(flat, lo, hi, sb)
        nhash += np.uint64(2)
        cursor = meta[0]
        if cursor >= len(key32):
            out_ok[i] = 0
            continue
        bucket = np.int64(da & np.uint64(mask))
        key32[cursor] = np.uint32(db & np.uint64(0xFFFFFFFF))
        exp16[cursor] = np.uint16(exp_value)
        if16[cursor] = np.uint16(1 << lane_arr[i])
        nxt[cursor] = heads[bucket]
        heads[bucket] = np.int32(cursor + 1)
        meta[0] = cursor + 1
        out_ok[i] = 1
    hash_ctr[0] += nhash


@njit(cache=True)
def chain_lookup_batch(heads, key32, nxt, mask, flat, offsets, seed_a, seed_b,
                       out_hits, hash_ctr):
    sa = np.uint64(seed_a)
    sb = np.uint64(seed_b)
    n = len(offsets) - 1
    for i in range(n):
        lo = offsets[i]
        hi = offsets[i + 1]
        da = _hash_range(flat, lo, hi, sa)
        db = _hash_range(flat, lo, hi, sb)
        tag = np.uint32(db & np.uint64(0xFFFFFFFF))
        e = heads[np.int64(da & np.uint64(mask))]
        hit = False
        while e != 0:
            if key32[e - 1] == tag:
                hit = True
                break
            e = nxt[e - 1]
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(2 * n)


@njit(cache=True)
def ht32_insert_batch(key32, exp16, if16, state, mask, flat, offsets,
                      lane_arr, exp_value, seed, out_ok, hash_ctr):
    """Linear-probing insert; one digest supplies both index and 32-bit tag."""
    s = np.uint64(seed)
    nhash = U0
    nslots = len(key32)
    for i in range(len(offsets) - 1):
        d = _hash_range(flat, offsets[i], offsets[i + 1], s)
        nhash += U1
        tag = np.uint32((d >> U32) & np.uint64(0xFFFFFFFF))
        pos = np.int64(d & np.uint64(mask))
        ok = 0
        for _ in range(nslots):
            if state[pos] != 1:
                state[pos] = 1
                key32[pos] = tag
                exp16[pos] = np.uint16(exp_value)
                if16[pos] = np.uint16(1 << lane_arr[i])
                ok = 1
                break
            pos = (pos + 1) & mask
        out_ok[i] = ok
    hash_ctr[0] += nhash


@njit(cache=True)
def ht32_lookup_batch(key32, state, mask, flat, offsets, seed, out_hits,
                      hash_ctr):
    s = np.uint64(seed)
    n = len(offsets) - 1
    nslots = len(key32)
    for i in range(n):
        d = _hash_range(flat, offsets[i], offsets[i + 1], s)
        tag = np.uint32((d >> U32) & np.uint64(0xFFFFFFFF))
        pos = np.int64(d & np.uint64(mask))
        hit = False
        for _ in range(nslots):
            st = state[pos]
            if st == 0:
                break
            if st == 1 and key32[pos] == tag:
                hit = True
                break
            pos = (pos + 1) & mask
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(n)

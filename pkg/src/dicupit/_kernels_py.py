"""Pure-Python fallback kernels, signature-compatible with `_kernels_numba`.

Selected when numba is unavailable or `DICUPIT_BACKEND=numpy` is set. These
operate on the same numpy state arrays as the compiled kernels and must
produce identical digests, identical membership answers, and identical hash
invocation counts; only relocation victim choices may differ (seeded RNGs of
the two backends are not sequence-matched).
"""

from __future__ import annotations

import random

import numpy as np

from .hashing import MASK64, mix64

_M64 = MASK64


def _digest(flat, lo, hi, seed):
    return mix64(flat[lo:hi].tobytes(), int(seed))


def _fp_digest(fp, fp_seed):
    return mix64(int(fp).to_bytes(2, "little"), int(fp_seed))


def _read_slot(words, slot, width, mask):
    pos = slot * width
    w = pos >> 6
    off = pos & 63
    v = int(words[w]) >> off
    if off + width > 64:
        v |= int(words[w + 1]) << (64 - off)
    return v & mask


def _write_slot(words, slot, width, mask, value):
    pos = slot * width
    w = pos >> 6
    off = pos & 63
    lo = int(words[w])
    lo &= ~(mask << off) & _M64
    lo |= (value << off) & _M64
    words[w] = lo
    if off + width > 64:
        spill = width - (64 - off)
        hi = int(words[w + 1])
        hi &= ~((1 << spill) - 1) & _M64
        hi |= value >> (64 - off)
        words[w + 1] = hi


def hash_batch(flat, offsets, seed, out):
    for i in range(len(offsets) - 1):
        out[i] = _digest(flat, offsets[i], offsets[i + 1], seed)


def cuckoo_insert_batch(fp_words, pay_words, e, lanes, b, fp_bits, pay_bits,
                        max_kicks, flat, offsets, lane_arr, payload,
                        seed, fp_seed, rng_seed, out_kicks, hash_ctr):
    rng = random.Random(int(rng_seed))
    fmask = (1 << fp_bits) - 1
    pmask = (1 << pay_bits) - 1 if pay_bits > 0 else 0
    emask = e - 1
    payload = int(payload)
    nhash = 0
    for i in range(len(offsets) - 1):
        d = _digest(flat, offsets[i], offsets[i + 1], seed)
        fp = (d >> 32) & fmask or 1
        i1 = d & emask
        i2 = i1 ^ (_fp_digest(fp, fp_seed) & emask)
        nhash += 2
        lane = int(lane_arr[i])
        placed = False
        for bucket in (i1, i2):
            base = (bucket * lanes + lane) * b
            for sl in range(b):
                if _read_slot(fp_words, base + sl, fp_bits, fmask) == 0:
                    _write_slot(fp_words, base + sl, fp_bits, fmask, fp)
                    if pay_bits > 0:
                        _write_slot(pay_words, base + sl, pay_bits, pmask, payload)
                    out_kicks[i] = 0
                    placed = True
                    break
            if placed:
                break
        if placed:
            continue
        cur = i1 if rng.randrange(2) == 0 else i2
        cur_fp, cur_pay = fp, payload
        undo = []
        done = -1
        for kick in range(max_kicks):
            v = rng.randrange(b)
            slot = (cur * lanes + lane) * b + v
            old_fp = _read_slot(fp_words, slot, fp_bits, fmask)
            old_pay = _read_slot(pay_words, slot, pay_bits, pmask) if pay_bits > 0 else 0
            _write_slot(fp_words, slot, fp_bits, fmask, cur_fp)
            if pay_bits > 0:
                _write_slot(pay_words, slot, pay_bits, pmask, cur_pay)
            undo.append((slot, old_fp, old_pay))
            cur_fp, cur_pay = old_fp, old_pay
            nhash += 1
            cur ^= _fp_digest(cur_fp, fp_seed) & emask
            base = (cur * lanes + lane) * b
            for sl in range(b):
                if _read_slot(fp_words, base + sl, fp_bits, fmask) == 0:
                    _write_slot(fp_words, base + sl, fp_bits, fmask, cur_fp)
                    if pay_bits > 0:
                        _write_slot(pay_words, base + sl, pay_bits, pmask, cur_pay)
                    done = kick + 1
                    break
            if done >= 0:
                break
        if done < 0:
            for slot, old_fp, old_pay in reversed(undo):
                _write_slot(fp_words, slot, fp_bits, fmask, old_fp)
                if pay_bits > 0:
                    _write_slot(pay_words, slot, pay_bits, pmask, old_pay)
        out_kicks[i] = done
    hash_ctr[0] += np.uint64(nhash)


def cuckoo_lookup_batch(fp_words, e, lanes, b, fp_bits, flat, offsets,
                        seed, fp_seed, out_hits, hash_ctr):
    fmask = (1 << fp_bits) - 1
    emask = e - 1
    n = len(offsets) - 1
    for i in range(n):
        d = _digest(flat, offsets[i], offsets[i + 1], seed)
        fp = (d >> 32) & fmask or 1
        i1 = d & emask
        i2 = i1 ^ (_fp_digest(fp, fp_seed) & emask)
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


def dicupit_lookup_batch(g_fp_words, g_e, g_b, s_fp_words, e, k, b, fp_bits,
                         flat, offsets, seed, fp_seed, out_hits, hash_ctr):
    fmask = (1 << fp_bits) - 1
    emask = e - 1
    gmask = g_e - 1
    n = len(offsets) - 1
    for i in range(n):
        d = _digest(flat, offsets[i], offsets[i + 1], seed)
        fp = (d >> 32) & fmask or 1
        xor = _fp_digest(fp, fp_seed)
        i1 = d & emask
        i2 = i1 ^ (xor & emask)
        g1 = d & gmask
        g2 = g1 ^ (xor & gmask)
        hit = False
        for bucket in (g1, g2):
            base = bucket * g_b
            for sl in range(g_b):
                if _read_slot(g_fp_words, base + sl, fp_bits, fmask) == fp:
                    hit = True
                    break
            if hit:
                break
        if not hit:
            for bucket in (i1, i2):
                base = bucket * k * b
                for sl in range(k * b):
                    if _read_slot(s_fp_words, base + sl, fp_bits, fmask) == fp:
                        hit = True
                        break
                if hit:
                    break
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(2 * n)


def bloom_insert_batch(nibbles, m, kh, seed_base, flat, offsets, lane_arr,
                       shared_row, hash_ctr):
    nhash = 0
    base_seed = int(seed_base)
    for i in range(len(offsets) - 1):
        data = flat[offsets[i]:offsets[i + 1]].tobytes()
        for row in (int(lane_arr[i]), int(shared_row)):
            if row < 0:
                continue
            for j in range(kh):
                idx = mix64(data, (base_seed + row * 256 + j) & _M64) % m
                byte = idx >> 1
                shift = (idx & 1) * 4
                cur = int(nibbles[row, byte])
                c = (cur >> shift) & 0xF
                if c < 15:
                    nibbles[row, byte] = (cur & (0xFF ^ (0xF << shift))) | ((c + 1) << shift)
            nhash += kh
    hash_ctr[0] += np.uint64(nhash)


def bloom_lookup_batch(nibbles, m, kh, seed_base, row_lo, row_hi, flat,
                       offsets, out_hits, hash_ctr):
    nhash = 0
    base_seed = int(seed_base)
    for i in range(len(offsets) - 1):
        data = flat[offsets[i]:offsets[i + 1]].tobytes()
        hit = False
        for row in range(row_lo, row_hi):
            ok = True
            for j in range(kh):
                idx = mix64(data, (base_seed + row * 256 + j) & _M64) % m
                c = (int(nibbles[row, idx >> 1]) >> ((idx & 1) * 4)) & 0xF
                if c == 0:
                    ok = False
            nhash += kh
            if ok:
                hit = True
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(nhash)


def chain_insert_batch(heads, key32, exp16, if16, nxt, meta, mask, flat,
                       offsets, lane_arr, exp_value, seed_a, seed_b,
                       out_ok, hash_ctr):
    nhash = 0
    for i in range(len(offsets) - 1):
        data = flat[offsets[i]:offsets[i + 1]].tobytes()
        da = mix64(data, int(seed_a))
        db = mix64(data, int(seed_b))
        nhash += 2
        cursor = int(meta[0])
        if cursor >= len(key32):
            out_ok[i] = 0
            continue
        bucket = da & mask
        key32[cursor] = db & 0xFFFFFFFF
        exp16[cursor] = exp_value
        if16[cursor] = 1 << int(lane_arr[i])
        nxt[cursor] = heads[bucket]
        heads[bucket] = cursor + 1
        meta[0] = cursor + 1
        out_ok[i] = 1
    hash_ctr[0] += np.uint64(nhash)


def chain_lookup_batch(heads, key32, nxt, mask, flat, offsets, seed_a, seed_b,
                       out_hits, hash_ctr):
    n = len(offsets) - 1
    for i in range(n):
        data = flat[offsets[i]:offsets[i + 1]].tobytes()
        da = mix64(data, int(seed_a))
        tag = mix64(data, int(seed_b)) & 0xFFFFFFFF
        e = int(heads[da & mask])
        hit = False
        while e != 0:
            if int(key32[e - 1]) == tag:
                hit = True
                break
            e = int(nxt[e - 1])
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(2 * n)


def ht32_insert_batch(key32, exp16, if16, state, mask, flat, offsets,
                      lane_arr, exp_value, seed, out_ok, hash_ctr):
    nhash = 0
    nslots = len(key32)
    for i in range(len(offsets) - 1):
        d = _digest(flat, offsets[i], offsets[i + 1], seed)
        nhash += 1
        tag = (d >> 32) & 0xFFFFFFFF
        pos = d & mask
        ok = 0
        for _ in range(nslots):
            if state[pos] != 1:
                state[pos] = 1
                key32[pos] = tag
                exp16[pos] = exp_value
                if16[pos] = 1 << int(lane_arr[i])
                ok = 1
                break
            pos = (pos + 1) & mask
        out_ok[i] = ok
    hash_ctr[0] += np.uint64(nhash)


def ht32_lookup_batch(key32, state, mask, flat, offsets, seed, out_hits,
                      hash_ctr):
    n = len(offsets) - 1
    nslots = len(key32)
    for i in range(n):
        d = _digest(flat, offsets[i], offsets[i + 1], seed)
        tag = (d >> 32) & 0xFFFFFFFF
        pos = d & mask
        hit = False
        for _ in range(nslots):
            st = state[pos]
            if st == 0:
                break
            if st == 1 and int(key32[pos]) == tag:
                hit = True
                break
            pos = (pos + 1) & mask
        out_hits[i] = 1 if hit else 0
    hash_ctr[0] += np.uint64(n)

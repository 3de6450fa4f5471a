"""Compiled Gillespie kernel for the open ASEP.

State layout (all arrays owned by ``AsepState``):

eta    int8[L+2]    occupation at sites 1..L, values -1/+1
h      int64[L+1]   height h(0..L); each event moves exactly one entry
catR   int32[L]     bonds b (sites b, b+1) with pattern (+1, -1): right jump at rate p
posR   int32[L+1]   index of bond b in catR, -1 if absent
catL   int32[L]     bonds with pattern (-1, +1): left jump at rate q
posL   int32[L+1]
ints   int64[7]     nR, nL, overflow flag, interval flag, last site, logged events,
                    overflow detection on (narrow wedge only)
reals  float64[2]   clock, pending event time (-1 when none)
counts int64[6]     events per type
rng    uint64[2]    stream key, draw counter
rates  float64[6]   p, q, alpha, gamma, beta, delta

Event types: 0 right jump, 1 left jump, 2 creation at 1 (alpha),
3 annihilation at 1 (gamma), 4 annihilation at N (beta), 5 creation at N (delta).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, uint64

from ..rng import nb_uniform


RIGHT, LEFT, CREATE_L, ANNIH_L, ANNIH_R, CREATE_R = range(6)
# drift, exact bracket, approx bracket, |exact - approx|, eps Z^2, jump QV, integrated-up-to time
N_ACC = 7


@njit(cache=True)
def _cat_add(cat, pos, ints, slot, b):
    if pos[b] < 0:
        n = ints[slot]
        cat[n] = b
        pos[b] = n
        ints[slot] = n + 1


@njit(cache=True)
def _cat_remove(cat, pos, ints, slot, b):
    i = pos[b]
    if i >= 0:
        n = ints[slot] - 1
        last = cat[n]
        cat[i] = last
        pos[last] = i
        pos[b] = -1
        ints[slot] = n


@njit(cache=True)
def _refresh_bond(eta, catR, posR, catL, posL, ints, b, last):
    if b < 1 or b >= last:
        return
    if eta[b] == 1 and eta[b + 1] == -1:
        _cat_add(catR, posR, ints, 0, b)
    else:
        _cat_remove(catR, posR, ints, 0, b)
    if eta[b] == -1 and eta[b + 1] == 1:
        _cat_add(catL, posL, ints, 1, b)
    else:
        _cat_remove(catL, posL, ints, 1, b)


@njit(cache=True)
def build_catalog(eta, catR, posR, catL, posL, ints):
    last = ints[4]
    posR[:] = -1
    posL[:] = -1
    ints[0] = 0
    ints[1] = 0
    for b in range(1, last):
        _refresh_bond(eta, catR, posR, catL, posL, ints, b, last)


@njit(cache=True)
def formula_rate(eta, etype, site, rates, N):
    """Rate of an event recomputed from the occupation formulas."""
    p, q, alpha, gamma, beta, delta = rates[0], rates[1], rates[2], rates[3], rates[4], rates[5]
    if etype == RIGHT:
        return 0.25 * p * (1 + eta[site]) * (1 - eta[site + 1])
    if etype == LEFT:
        return 0.25 * q * (1 - eta[site]) * (1 + eta[site + 1])
    if etype == CREATE_L:
        return 0.5 * alpha * (1 - eta[1])
    if etype == ANNIH_L:
        return 0.5 * gamma * (1 + eta[1])
    if etype == ANNIH_R:
        return 0.5 * beta * (1 + eta[N])
    return 0.5 * delta * (1 - eta[N])


@njit(cache=True)
def _local_rates(eta, h, x, ints, rates):
    """Rates of the events lowering (r_minus_h) and raising (r_plus_h) h(x)."""
    if x == 0:
        if eta[1] == -1:
            return rates[2], 0.0
        return 0.0, rates[3]
    if ints[3] == 1 and x == ints[4]:
        if eta[x] == 1:
            return rates[4], 0.0
        return 0.0, rates[5]
    if eta[x] == 1 and eta[x + 1] == -1:
        return rates[0], 0.0
    if eta[x] == -1 and eta[x + 1] == 1:
        return 0.0, rates[1]
    return 0.0, 0.0


@njit(cache=True)
def _accumulate(eta, h, ints, rates, x, row, t1, sq, nu, norm, mu_A, mu_B):
    """Integrate the functionals at site ``x`` from ``row[6]`` to ``t1``, state frozen."""
    t0 = row[6]
    dt = t1 - t0
    if dt <= 0.0:
        return
    row[6] = t1
    g1 = math.expm1(nu * dt) / nu if nu > 0 else dt
    g2 = math.expm1(2.0 * nu * dt) / (2.0 * nu) if nu > 0 else dt
    e1 = math.exp(nu * t0)
    e2 = e1 * e1
    eps = sq * sq
    down = math.expm1(-2.0 * sq) ** 2
    up = math.expm1(2.0 * sq) ** 2
    z = norm * math.exp(sq * h[x])
    if x == 0:
        zl = mu_A * z
    else:
        zl = norm * math.exp(sq * h[x - 1])
    if ints[3] == 1 and x == ints[4]:
        zr = mu_B * z
    else:
        zr = norm * math.exp(sq * h[x + 1])
    row[0] += 0.5 * (zl + zr - 2.0 * z) * e1 * g1
    rm, rp = _local_rates(eta, h, x, ints, rates)
    exact = z * z * (down * rm + up * rp)
    if x == 0:
        approx = eps * z * z
    else:
        approx = eps * z * z - (zr - z) * (z - zl)
    row[1] += exact * e2 * g2
    row[2] += approx * e2 * g2
    row[3] += abs(exact - approx) * e2 * g2
    row[4] += eps * z * z * e2 * g2


@njit(cache=True)
def _flush_all(eta, h, ints, rates, track, acc, t1, sq, nu, norm, mu_A, mu_B):
    for k in range(track.shape[0]):
        _accumulate(eta, h, ints, rates, track[k], acc[k], t1, sq, nu, norm, mu_A, mu_B)


@njit(cache=True)
def advance(eta, h, catR, posR, catL, posL, ints, reals, counts, rng, rates,
            t_target, max_events, sq, nu, norm, mu_A, mu_B,
            track, acc, audit_every, audit, log_t, log_type, log_site):
    """Run events until the clock passes ``t_target`` or ``max_events`` fire.

    A drawn holding time that overshoots ``t_target`` is kept as the pending
    event, so the path does not depend on where the run is paused.
    Returns the number of events applied.
    """
    key = rng[0]
    done = 0
    last = ints[4]
    N = ints[4]
    interval = ints[3] == 1
    do_track = track.shape[0] > 0
    if do_track:
        for k in range(track.shape[0]):
            acc[k, 6] = max(acc[k, 6], reals[0])
    while done < max_events:
        if ints[2] == 1:
            break
        left_rate = rates[2] if eta[1] == -1 else rates[3]
        right_rate = 0.0
        if interval:
            right_rate = rates[4] if eta[N] == 1 else rates[5]
        total = rates[0] * ints[0] + rates[1] * ints[1] + left_rate + right_rate
        if reals[1] < 0.0:
            if total <= 0.0:
                if do_track:
                    _flush_all(eta, h, ints, rates, track, acc, t_target, sq, nu, norm, mu_A, mu_B)
                reals[0] = max(reals[0], t_target)
                break
            u = nb_uniform(key, rng[1])
            rng[1] += uint64(1)
            reals[1] = reals[0] - math.log(u) / total
        t_next = reals[1]
        if t_next > t_target:
            if do_track:
                _flush_all(eta, h, ints, rates, track, acc, t_target, sq, nu, norm, mu_A, mu_B)
            reals[0] = max(reals[0], t_target)
            break
        reals[0] = t_next
        reals[1] = -1.0
        v = nb_uniform(key, rng[1]) * total
        rng[1] += uint64(1)
        # categorical choice, then uniform within the category
        pr = rates[0] * ints[0]
        ql = rates[1] * ints[1]
        if v < pr:
            i = min(int(v / rates[0]), ints[0] - 1)
            etype = RIGHT
            site = catR[i]
            rate = rates[0]
        elif v < pr + ql:
            i = min(int((v - pr) / rates[1]), ints[1] - 1)
            etype = LEFT
            site = catL[i]
            rate = rates[1]
        elif v < pr + ql + left_rate or not interval:
            etype = CREATE_L if eta[1] == -1 else ANNIH_L
            site = 1
            rate = left_rate
        else:
            etype = ANNIH_R if eta[N] == 1 else CREATE_R
            site = N
            rate = right_rate
        if audit_every > 0 and (counts[0] + counts[1] + counts[2] + counts[3] + counts[4] + counts[5]) % audit_every == 0:
            audit[0] += 1
            if abs(formula_rate(eta, etype, site, rates, N) - rate) > 1e-14:
                audit[1] += 1
            # the maintained catalogue must agree with a recount
            nr = 0
            nl = 0
            for b in range(1, last):
                if eta[b] == 1 and eta[b + 1] == -1:
                    nr += 1
                elif eta[b] == -1 and eta[b + 1] == 1:
                    nl += 1
            if nr != ints[0] or nl != ints[1]:
                audit[2] += 1
        # apply; exactly one height entry moves
        if etype == RIGHT or etype == LEFT:
            moved = site
        elif etype == CREATE_L or etype == ANNIH_L:
            moved = 0
        else:
            moved = N
        h_before = h[moved]
        if do_track:
            # only sites next to the moved height see their integrands change
            for k in range(track.shape[0]):
                if abs(track[k] - moved) <= 1:
                    _accumulate(eta, h, ints, rates, track[k], acc[k], t_next, sq, nu, norm, mu_A, mu_B)
        if etype == RIGHT or etype == LEFT:
            eta[site] = -eta[site]
            eta[site + 1] = -eta[site + 1]
            h[site] += 2 * eta[site]
            b_lo, b_hi = site - 1, site + 1
            if etype == RIGHT and ints[6] == 1 and site + 1 >= last - 1:
                ints[2] = 1
        elif etype == CREATE_L or etype == ANNIH_L:
            eta[1] = -eta[1]
            h[0] += -2 if etype == CREATE_L else 2
            b_lo, b_hi = 1, 1
        else:
            eta[N] = -eta[N]
            h[N] += 2 * eta[N]
            b_lo, b_hi = N - 1, N - 1
        # catalogue refresh, written out: helper calls cost array refcounting
        for b in range(max(b_lo, 1), min(b_hi, last - 1) + 1):
            isR = eta[b] == 1 and eta[b + 1] == -1
            isL = eta[b] == -1 and eta[b + 1] == 1
            j = posR[b]
            if isR and j < 0:
                n = ints[0]
                catR[n] = b
                posR[b] = n
                ints[0] = n + 1
            elif not isR and j >= 0:
                n = ints[0] - 1
                other = catR[n]
                catR[j] = other
                posR[other] = j
                posR[b] = -1
                ints[0] = n
            j = posL[b]
            if isL and j < 0:
                n = ints[1]
                catL[n] = b
                posL[b] = n
                ints[1] = n + 1
            elif not isL and j >= 0:
                n = ints[1] - 1
                other = catL[n]
                catL[j] = other
                posL[other] = j
                posL[b] = -1
                ints[1] = n
        counts[etype] += 1
        done += 1
        if do_track:
            for k in range(track.shape[0]):
                if track[k] == moved:
                    base = norm * math.exp(nu * reals[0])
                    acc[k, 5] += (base * (math.exp(sq * h[moved]) - math.exp(sq * h_before))) ** 2
        n_log = ints[5]
        if n_log < log_t.shape[0]:
            log_t[n_log] = reals[0]
            log_type[n_log] = etype
            log_site[n_log] = site
            ints[5] = n_log + 1
    return done

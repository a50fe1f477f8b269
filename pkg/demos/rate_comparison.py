"""
Coded fragments versus whole messages: what storage buys
========================================================

Two storage strategies for K messages on N servers, same privacy guarantee:

* whole messages: each server stores M complete messages; the download rate
  is stuck between 1/ceil(K/M) and M/K no matter how clever the scheme;
* coded fragments: each server stores coded pieces; running the scheme on
  ceil(K/M) servers delivers at rate L/ceil(K/M), up to 1.

This script prints both for concrete parameters, then runs the coded scheme
live to show the advertised rate is what actually comes off the wire.
"""

from fractions import Fraction

import numpy as np

from codedpid.analysis import (
    achievable_coded_rate,
    coded_capacity,
    randomness_overheads,
    subset_scheme_rate,
    sweep_rate_vs_n,
    sweep_to_csv,
    uncoded_bounds,
    uncoded_randomness_overhead,
)
from codedpid.protocol import Message, run_subset_scheme

# -- worked set (a): K=12 messages of L=4 symbols, M=2 per server -----------

k, l, m = 12, 4, 2
print("K=%d messages of L=%d symbols, M=%d messages of storage per server" % (
    k, l, m))
lo, hi = uncoded_bounds(k, m)
print("  whole-message storage: rate between %s and %s" % (lo, hi))
print("  coded storage on 6 servers: rate %s" % achievable_coded_rate(k, 6, m, l))
r = randomness_overheads(k, 6, l)
print("  coded mask cost: %s symbols per delivered symbol (%s per server)" % (
    r.total, r.per_server))
print("  -> coding multiplies the rate by %s at identical storage" % (
    achievable_coded_rate(k, 6, m, l) / hi))

# The same comparison across server counts, as the CSV the CLI emits
# (`pid sweep --k 12 --m 2 --l 4 --n-range 5:10`):
print("\n" + sweep_to_csv(sweep_rate_vs_n(k, m, l, range(5, 11))))

# -- worked set (b): K=8, N=6, L=3 ------------------------------------------
# At the minimal balanced storage M = K/N = 4/3 the capacity is L/N = 1/2.
# Whole-message storage cannot even use M=4/3 (you cannot store a third of
# a message "whole"); the nearest integer M=3 still only reaches 3/8.

print("K=8, N=6, L=3:")
print("  capacity at M=4/3: %s" % coded_capacity(8, 6, 3))
print("  coded rate at M=4/3: %s" % achievable_coded_rate(8, 6, Fraction(4, 3), 3))
lo, hi = uncoded_bounds(8, 3)
print("  whole-message storage needs M=3 and tops out at %s..%s" % (lo, hi))
print("  mask overhead: coded %s vs whole-message %s" % (
    randomness_overheads(8, 6, 3).total, uncoded_randomness_overhead(8, 3)))

# -- the tradeoff, live ------------------------------------------------------
# With room for M=2 of K=12 messages, only ceil(12/2)=6 of 7 servers need to
# participate; the seventh stays silent on every request and the rate rises
# to 4/6 = 2/3.

q = 13
rng = np.random.default_rng(1)
messages = tuple(
    Message(index=i + 1, symbols=tuple(int(x) for x in rng.integers(0, q, 4)),
            modulus=q)
    for i in range(12)
)
print("live run, K=12 N=7 M=2 L=4 (predicted rate %s):" %
      subset_scheme_rate(12, 7, 2, 4))
for d in (3, 11):
    t = run_subset_scheme(12, 7, 2, 4, messages, d, seed=d)
    ok = t.decoded == messages[d - 1].symbols
    print("  request %2d: downloads per server %s  rate %s  decode %s" % (
        d, t.transmission_counts, t.rate, "ok" if ok else "WRONG"))
print("server 7 is idle for every request, so its silence reveals nothing.")

# With even more storage (M=2 of K=4), ceil(4/2)=2 servers suffice and a
# 2-symbol message arrives at rate 1 -- one useful symbol per downloaded one.
rows = [(1, 2), (3, 4), (0, 1), (2, 0)]
messages = tuple(
    Message(index=i + 1, symbols=s, modulus=5) for i, s in enumerate(rows)
)
print("\nlive run, K=4 N=5 M=2 L=2 (predicted rate %s):" %
      subset_scheme_rate(4, 5, 2, 2))
t = run_subset_scheme(4, 5, 2, 2, messages, 3)
print("  request 3: downloads per server %s  rate %s  decoded %s" % (
    t.transmission_counts, t.rate, t.decoded))

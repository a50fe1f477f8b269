"""Brute-force certification of correctness and privacy on small instances.

For a scheme with K messages of L symbols over F_q, N servers and an
(N-L)-symbol mask, the joint input space has q^(K*L + N-L) points and each
point serves K possible requests, so a full audit costs

    cases = q^(K*L + N-L) * K

answer evaluations.  ``exhaustive_correctness`` walks every case and checks
the decoder output; ``exhaustive_privacy`` counts, for every request d, how
often each complete answer vector occurs over all inputs.  The scheme keeps
the request private exactly when those K count maps are identical: then the
answer distribution (inputs uniform) carries zero information about d.  All
counting is exact integer arithmetic; no entropies, no floats.

Schemes plug in through ``SchemeUnderTest`` (build storage once per message
tuple, then answer per mask and request), so the real masked protocol, the
unmasked split variant (a negative control: correct but leaky) and
fault-injected copies all run through the same enumerators.

Budgets: audits refuse to start when ``cases`` exceeds the budget, which
defaults to 10**7 and can be overridden by the PID_BUDGET environment
variable or a keyword argument.  For instances past the budget,
``randomized_privacy_probe`` samples random inputs and flags observable
leaks: transmission patterns that vary with d (a hard fail) and per-server
symbol marginals far from uniform (a chi-square screen).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from codedpid.codes import CodePair
from codedpid.protocol import PidConfig

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceededError",
    "SchemeUnderTest",
    "masked_scheme",
    "split_scheme",
    "case_count",
    "resolve_budget",
    "scheme_correctness",
    "scheme_privacy",
    "exhaustive_correctness",
    "exhaustive_privacy",
    "CorrectnessReport",
    "Counterexample",
    "PrivacyReport",
    "PrivacyMismatch",
    "randomized_privacy_probe",
    "ProbeReport",
    "verdict_line",
]

DEFAULT_BUDGET = 10**7
BUDGET_ENV_VAR = "PID_BUDGET"


class BudgetExceededError(RuntimeError):
    """An exhaustive audit would exceed the allowed number of cases."""

    def __init__(self, needed: int, budget: int):
        super().__init__(
            f"exhaustive audit needs {needed} cases, budget is {budget}"
        )
        self.needed = needed
        self.budget = budget


def resolve_budget(budget: int | None = None) -> int:
    """Explicit argument, else PID_BUDGET from the environment, else default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(
                f"{BUDGET_ENV_VAR} must be an integer, got {env!r}"
            ) from None
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class SchemeUnderTest:
    """The three stages of a delivery scheme, as plain callables.

    ``build_storage`` maps a K-tuple of message symbol tuples to an opaque
    storage object; ``answers`` maps (storage, mask tuple, request d) to the
    per-server answer tuples; ``decode`` maps those answers back to symbols.
    The enumerators hoist ``build_storage`` out of the mask/request loops.
    """

    name: str
    modulus: int
    k_messages: int
    msg_len: int
    n_servers: int
    mask_len: int
    build_storage: Callable
    answers: Callable
    decode: Callable


def masked_scheme(
    config: PidConfig,
    code: CodePair,
    corrupt: tuple[int, int, int, int] | None = None,
) -> SchemeUnderTest:
    """The real coded+masked protocol as a pluggable scheme.

    ``corrupt`` optionally flips one stored symbol: (server, message,
    position, delta) with 1-based server/message, position indexing that
    server's stored symbols for that message, and delta added mod q.  Fault
    injection for audits; delta % q == 0 is rejected as a no-op.
    """
    q = code.modulus
    n = config.n_servers
    host_cols = [
        tuple(s - 1 for s in config.servers_for(k))
        for k in range(1, config.k_messages + 1)
    ]
    inv_rows = [code.h_sub_inverse(cols) for cols in host_cols]
    g_cols = [code.g_column(j) for j in range(n)]
    h = code.h_rows()

    if corrupt is not None:
        c_server, c_msg, c_pos, c_delta = corrupt
        if c_delta % q == 0:
            raise ValueError("corruption delta must be nonzero mod q")
        if not 1 <= c_msg <= config.k_messages:
            raise ValueError(f"corrupt message {c_msg} outside 1..{config.k_messages}")
        if c_server not in config.servers_for(c_msg):
            raise ValueError(
                f"server {c_server} stores nothing for message {c_msg}"
            )
        if c_pos != 1:
            raise ValueError("each server stores one symbol per message here")

    def build_storage(w_tuples):
        # storage[server][message] -> stored symbol (one per hosted message)
        storage: list[dict[int, int]] = [{} for _ in range(n)]
        for k0, (cols, rows) in enumerate(zip(host_cols, inv_rows)):
            w = w_tuples[k0]
            for row, col in zip(rows, cols):
                storage[col][k0 + 1] = (
                    sum(c * s for c, s in zip(row, w)) % q
                )
        if corrupt is not None:
            storage[c_server - 1][c_msg] = (
                storage[c_server - 1][c_msg] + c_delta
            ) % q
        return storage

    def answers(storage, mask, d):
        out = []
        for j in range(n):
            share = sum(c * u for c, u in zip(g_cols[j], mask)) % q
            frag = storage[j].get(d)
            out.append((share,) if frag is None else ((frag + share) % q,))
        return tuple(out)

    def decode(answer_tuples):
        flat = [a[0] for a in answer_tuples]
        return tuple(
            sum(c * a for c, a in zip(row, flat)) % q for row in h
        )

    return SchemeUnderTest(
        name="masked-coded",
        modulus=q,
        k_messages=config.k_messages,
        msg_len=config.msg_len,
        n_servers=n,
        mask_len=code.mask_len,
        build_storage=build_storage,
        answers=answers,
        decode=decode,
    )


def split_scheme(config: PidConfig) -> SchemeUnderTest:
    """Unmasked raw-slice variant: correct, same storage cost, not private.

    Each host stores one raw symbol of the message; on a request only d's
    hosts transmit and everyone else stays silent, so the transmission
    pattern is the host set of d in plain sight.  Serves as the negative
    control for the privacy audit.
    """
    q = config.modulus
    n = config.n_servers
    hosts = [
        config.servers_for(k) for k in range(1, config.k_messages + 1)
    ]

    def build_storage(w_tuples):
        storage: list[dict[int, int]] = [{} for _ in range(n)]
        for k0, hset in enumerate(hosts):
            w = w_tuples[k0]
            for i, server in enumerate(hset):
                storage[server - 1][k0 + 1] = w[i]
        return storage

    def answers(storage, _mask, d):
        return tuple(
            (storage[j][d],) if d in storage[j] else () for j in range(n)
        )

    def decode(answer_tuples):
        return tuple(s for a in answer_tuples for s in a)

    return SchemeUnderTest(
        name="unmasked-split",
        modulus=q,
        k_messages=config.k_messages,
        msg_len=config.msg_len,
        n_servers=n,
        mask_len=0,
        build_storage=build_storage,
        answers=answers,
        decode=decode,
    )


def case_count(scheme: SchemeUnderTest) -> int:
    """q^(K*L + mask_len) * K answer evaluations for a full audit."""
    exponent = scheme.k_messages * scheme.msg_len + scheme.mask_len
    return scheme.modulus**exponent * scheme.k_messages


@dataclass(frozen=True)
class Counterexample:
    """A failing delivery case, in enumeration order."""

    messages: tuple[tuple[int, ...], ...]
    mask: tuple[int, ...]
    requested: int
    decoded: tuple[int, ...]
    expected: tuple[int, ...]


@dataclass(frozen=True)
class CorrectnessReport:
    passed: bool
    cases: int
    counterexample: Counterexample | None


def scheme_correctness(
    scheme: SchemeUnderTest, budget: int | None = None
) -> CorrectnessReport:
    """Decode every (messages, mask, request) case; stop at the first failure."""
    total = case_count(scheme)
    allowed = resolve_budget(budget)
    if total > allowed:
        raise BudgetExceededError(total, allowed)
    q, k, l = scheme.modulus, scheme.k_messages, scheme.msg_len
    masks = list(itertools.product(range(q), repeat=scheme.mask_len))
    requests = range(1, k + 1)
    done = 0
    for w_flat in itertools.product(range(q), repeat=k * l):
        w = tuple(w_flat[i * l : (i + 1) * l] for i in range(k))
        storage = scheme.build_storage(w)
        for mask in masks:
            for d in requests:
                decoded = scheme.decode(scheme.answers(storage, mask, d))
                done += 1
                if decoded != w[d - 1]:
                    return CorrectnessReport(
                        passed=False,
                        cases=done,
                        counterexample=Counterexample(
                            messages=w,
                            mask=mask,
                            requested=d,
                            decoded=decoded,
                            expected=w[d - 1],
                        ),
                    )
    return CorrectnessReport(passed=True, cases=done, counterexample=None)


@dataclass(frozen=True)
class PrivacyMismatch:
    """First answer vector whose occurrence count depends on the request."""

    answer: tuple[tuple[int, ...], ...]
    request_a: int
    count_a: int
    request_b: int
    count_b: int


@dataclass(frozen=True)
class PrivacyReport:
    """Exact answer-vector census, per request.

    ``passed`` means the K census maps are identical, i.e. the answer
    distribution is the same whatever the request - zero leakage.
    ``uniform`` additionally says that distribution is uniform over all
    q^N single-symbol answer vectors (true for the masked scheme; stronger
    than what privacy alone needs).
    """

    passed: bool
    cases: int
    distinct_answers: int
    uniform: bool
    uniform_count: int | None
    mismatch: PrivacyMismatch | None


def scheme_privacy(
    scheme: SchemeUnderTest, budget: int | None = None
) -> PrivacyReport:
    """Count every answer vector for every request and compare the censuses."""
    total = case_count(scheme)
    allowed = resolve_budget(budget)
    if total > allowed:
        raise BudgetExceededError(total, allowed)
    q, k, l = scheme.modulus, scheme.k_messages, scheme.msg_len
    masks = list(itertools.product(range(q), repeat=scheme.mask_len))
    requests = range(1, k + 1)
    census: list[dict[tuple, int]] = [dict() for _ in range(k)]
    done = 0
    for w_flat in itertools.product(range(q), repeat=k * l):
        w = tuple(w_flat[i * l : (i + 1) * l] for i in range(k))
        storage = scheme.build_storage(w)
        for mask in masks:
            for d in requests:
                a = scheme.answers(storage, mask, d)
                counts = census[d - 1]
                counts[a] = counts.get(a, 0) + 1
                done += 1

    reference = census[0]
    mismatch = None
    for d0 in range(1, k):
        other = census[d0]
        if other == reference:
            continue
        for key in reference.keys() | other.keys():
            if reference.get(key, 0) != other.get(key, 0):
                mismatch = PrivacyMismatch(
                    answer=key,
                    request_a=1,
                    count_a=reference.get(key, 0),
                    request_b=d0 + 1,
                    count_b=other.get(key, 0),
                )
                break
        break

    support = {key for counts in census for key in counts}
    inputs_per_request = q ** (k * l + scheme.mask_len)
    full_space = q**scheme.n_servers
    uniform = (
        mismatch is None
        and len(support) == full_space
        and inputs_per_request % full_space == 0
        and all(
            count == inputs_per_request // full_space
            for counts in census
            for count in counts.values()
        )
    )
    return PrivacyReport(
        passed=mismatch is None,
        cases=done,
        distinct_answers=len(support),
        uniform=uniform,
        uniform_count=inputs_per_request // full_space if uniform else None,
        mismatch=mismatch,
    )


def exhaustive_correctness(
    config: PidConfig, code: CodePair, budget: int | None = None
) -> CorrectnessReport:
    """Full correctness audit of the real masked protocol."""
    return scheme_correctness(masked_scheme(config, code), budget=budget)


def exhaustive_privacy(
    config: PidConfig, code: CodePair, budget: int | None = None
) -> PrivacyReport:
    """Full privacy audit of the real masked protocol."""
    return scheme_privacy(masked_scheme(config, code), budget=budget)


# -- randomized probe for instances beyond the exhaustive budget -------------


def _chi_square_upper(df: int, z: float = 3.719) -> float:
    """Wilson-Hilferty upper quantile approximation (z=3.719 ~ p=1e-4)."""
    t = 2.0 / (9.0 * df)
    return df * (1.0 - t + z * math.sqrt(t)) ** 3


@dataclass(frozen=True)
class ProbeReport:
    """What a sampled audit can see.

    ``pattern_anomaly`` is a hard fail: some request produced a per-server
    transmission-length pattern another request never can.  The chi-square
    screen compares each (request, server) symbol marginal to uniform;
    ``suspicious`` flags stats beyond a p~1e-4 bound.  A clean probe is
    evidence, not proof.
    """

    trials: int
    patterns_by_request: tuple[tuple[tuple[int, ...], ...], ...]
    pattern_anomaly: bool
    max_marginal_stat: float | None
    stat_bound: float | None
    suspicious: bool


def randomized_privacy_probe(
    config: PidConfig,
    code: CodePair,
    trials: int,
    seed: int | None = 0,
    scheme: SchemeUnderTest | None = None,
) -> ProbeReport:
    """Sample random (messages, mask) inputs and answer all K requests on each.

    Tests the two observable fingerprints of a leak: request-dependent
    transmission patterns (flagged exactly) and non-uniform per-server
    symbol marginals (flagged statistically).
    """
    if scheme is None:
        scheme = masked_scheme(config, code)
    q, k, l = scheme.modulus, scheme.k_messages, scheme.msg_len
    n = scheme.n_servers
    if trials == 0:
        return ProbeReport(
            trials=0,
            patterns_by_request=tuple(() for _ in range(k)),
            pattern_anomaly=False,
            max_marginal_stat=None,
            stat_bound=None,
            suspicious=False,
        )
    rng = np.random.default_rng(seed)
    patterns: list[set[tuple[int, ...]]] = [set() for _ in range(k)]
    marginals = np.zeros((k, n, q), dtype=np.int64)
    for _ in range(trials):
        w = tuple(
            tuple(int(x) for x in rng.integers(0, q, size=l)) for _ in range(k)
        )
        mask = tuple(int(x) for x in rng.integers(0, q, size=scheme.mask_len))
        storage = scheme.build_storage(w)
        for d in range(1, k + 1):
            answer = scheme.answers(storage, mask, d)
            patterns[d - 1].add(tuple(len(a) for a in answer))
            for j, a in enumerate(answer):
                for s in a:
                    marginals[d - 1, j, s] += 1

    pattern_sets = tuple(tuple(sorted(p)) for p in patterns)
    pattern_anomaly = len(set(pattern_sets)) > 1

    # Chi-square screen only where every server sent exactly one symbol per
    # trial (otherwise the marginal totals differ by construction).
    max_stat = None
    bound = None
    if not pattern_anomaly and all(
        p == ((1,) * n,) for p in pattern_sets
    ):
        expected = trials / q
        stats = ((marginals - expected) ** 2 / expected).sum(axis=2)
        max_stat = float(stats.max())
        bound = _chi_square_upper(q - 1)
    return ProbeReport(
        trials=trials,
        patterns_by_request=pattern_sets,
        pattern_anomaly=pattern_anomaly,
        max_marginal_stat=max_stat,
        stat_bound=bound,
        suspicious=pattern_anomaly
        or (max_stat is not None and bound is not None and max_stat > bound),
    )


def verdict_line(property_name: str, instance: str, passed: bool, cases: int) -> str:
    """The one-line audit verdict format used by the CLI and the reports."""
    verdict = "pass" if passed else "fail"
    return (
        f"PROPERTY={property_name} INSTANCE={instance} "
        f"VERDICT={verdict} CASES={cases}"
    )

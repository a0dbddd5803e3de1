"""Exact-rational averaging maps over permutations.

Given decreasing non-negative sequences a, b with dominating tail sums
(Σ_{j>=i} b_j >= Σ_{j>=i} a_j for all i), constructs a convex combination of
permutations alpha with b_i >= Σ_pi alpha(pi) a_{pi(i)} pointwise, following
the inductive transposition argument. All arithmetic is exact; floats appear
only in the square-root certificate evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

DEFAULT_N_CAP = 12   # support can grow combinatorially with n


class MajorizeError(ValueError):
    pass


def _to_fractions(seq) -> tuple:
    out = []
    for v in seq:
        if isinstance(v, Fraction):
            out.append(v)
        elif isinstance(v, int):
            out.append(Fraction(v))
        elif isinstance(v, float):
            out.append(Fraction(v))   # exact binary expansion
        else:
            out.append(Fraction(v))
    return tuple(out)


@dataclass(frozen=True)
class SequencePair:
    """Decreasing non-negative rational sequences of equal length."""

    a: tuple
    b: tuple

    @classmethod
    def make(cls, a: Sequence, b: Sequence) -> "SequencePair":
        a = _to_fractions(a)
        b = _to_fractions(b)
        if len(a) != len(b) or not a:
            raise MajorizeError("sequences must be non-empty and equally long")
        for name, s in (("a", a), ("b", b)):
            if any(x < 0 for x in s):
                raise MajorizeError(f"sequence {name} must be non-negative")
            if any(s[i] < s[i + 1] for i in range(len(s) - 1)):
                raise MajorizeError(f"sequence {name} must be non-increasing")
        return cls(a=a, b=b)

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class AveragingMap:
    """Positive rational weights on permutations (tuples), summing to 1."""

    entries: tuple   # ((perm tuple, Fraction weight), ...)

    def __post_init__(self):
        total = sum(w for _, w in self.entries)
        if total != 1:
            raise MajorizeError(f"weights must sum to 1 exactly, got {total}")
        n = len(self.entries[0][0])
        for perm, w in self.entries:
            if w <= 0:
                raise MajorizeError("zero/negative weight survived pruning")
            if sorted(perm) != list(range(n)):
                raise MajorizeError(f"not a permutation: {perm}")

    def __len__(self):
        return len(self.entries)

    def averaged(self, a: Sequence) -> tuple:
        """Component-wise average: (Σ_pi alpha(pi) a_{pi(i)})_i."""
        a = _to_fractions(a)
        n = len(a)
        out = [Fraction(0)] * n
        for perm, w in self.entries:
            for i in range(n):
                out[i] += w * a[perm[i]]
        return tuple(out)

    def to_text(self) -> str:
        lines = [f"{len(self.entries)} permutations on n="
                 f"{len(self.entries[0][0])}"]
        for perm, w in sorted(self.entries):
            one_line = " ".join(str(p + 1) for p in perm)
            lines.append(f"[{one_line}]  {w}")
        return "\n".join(lines)


def check_tail_dominance(pair: SequencePair) -> bool:
    """All tail sums of b dominate those of a, exactly."""
    ta = Fraction(0)
    tb = Fraction(0)
    for ai, bi in zip(reversed(pair.a), reversed(pair.b)):
        ta += ai
        tb += bi
        if tb < ta:
            return False
    return True


def _identity(n: int) -> tuple:
    return tuple(range(n))


def _direct_map(a: tuple, b: tuple) -> dict:
    """Transposition map for the case b_i >= a_i, i >= 2 (0-based: i >= 1).

    Picks the q_i greedily from the smallest index upward (deterministic
    choice among the valid ones).
    """
    n = len(a)
    ident = _identity(n)
    if b[0] >= a[0]:
        return {ident: Fraction(1)}
    deficit = a[0] - b[0]
    out = {}
    total_tau = Fraction(0)
    for i in range(1, n):
        if deficit == 0:
            break
        cap = b[i] - a[i]
        if cap <= 0:
            continue
        q = min(cap, deficit)
        deficit -= q
        # a[0] > b[0] >= b[i] >= a[i] + q > a[i], so the denominator is positive
        weight = q / (a[0] - a[i])
        tau = list(ident)
        tau[0], tau[i] = tau[i], tau[0]
        out[tuple(tau)] = out.get(tuple(tau), Fraction(0)) + weight
        total_tau += weight
    if deficit != 0:
        raise MajorizeError("tail dominance violated: transposition deficit "
                            "not coverable")
    w_id = Fraction(1) - total_tau
    if w_id < 0:
        raise MajorizeError("internal: identity weight went negative")
    if w_id > 0:
        out[ident] = out.get(ident, Fraction(0)) + w_id
    return out


def _compose(beta: dict, gamma: dict) -> dict:
    """alpha(pi) = Σ_sigma beta(sigma) gamma(pi sigma^{-1}); here built as
    pi = g ∘ s for every (s, g) pair, with zero weights pruned."""
    out = {}
    for s, ws in beta.items():
        for g, wg in gamma.items():
            pi = tuple(g[s[i]] for i in range(len(s)))
            w = ws * wg
            if w != 0:
                out[pi] = out.get(pi, Fraction(0)) + w
    return {p: w for p, w in out.items() if w != 0}


def _build(a: tuple, b: tuple) -> dict:
    n = len(a)
    if n == 1:
        return {(0,): Fraction(1)}
    # inductive map on the tails, embedded as permutations fixing index 0
    gamma_tail = _build(a[1:], b[1:])
    gamma = {}
    for perm, w in gamma_tail.items():
        emb = (0,) + tuple(p + 1 for p in perm)
        gamma[emb] = w
    # averaged sequence: a_tilde_0 = a_0, and b_i >= a_tilde_i for i >= 1
    a_tilde = [Fraction(0)] * n
    for perm, w in gamma.items():
        for i in range(n):
            a_tilde[i] += w * a[perm[i]]
    beta = _direct_map(tuple(a_tilde), b)
    # effective permutation is pi ∘ sigma: sigma from the direct map applied
    # to the index first, then pi from the tail map
    return _compose(beta, gamma)


def build_averaging_map(pair: SequencePair,
                        n_cap: int = DEFAULT_N_CAP) -> AveragingMap:
    """Averaging map certifying b_i >= Σ alpha(pi) a_{pi(i)} for all i.

    Verifies the domination exactly before returning.
    """
    if pair.n > n_cap:
        raise MajorizeError(f"n={pair.n} exceeds the support cap {n_cap}")
    if not check_tail_dominance(pair):
        raise MajorizeError("tail dominance violated; no averaging map exists")
    weights = _build(pair.a, pair.b)
    amap = AveragingMap(entries=tuple(sorted(weights.items())))
    avg = amap.averaged(pair.a)
    for i, (bi, ai) in enumerate(zip(pair.b, avg)):
        if bi < ai:
            raise MajorizeError(f"internal: domination failed at index {i}: "
                                f"{bi} < {ai}")
    return amap


def jensen_sqrt_certificate(pair: SequencePair, amap: AveragingMap):
    """Chain Σ sqrt(b_i) >= Σ_i sqrt(avg_i) >= Σ sqrt(a_i).

    The inner averages are exact rationals; square roots are evaluated in
    floating point and the chain is asserted with a small interval slack.
    """
    avg = amap.averaged(pair.a)
    sb = math.fsum(math.sqrt(v) for v in pair.b)
    sm = math.fsum(math.sqrt(v) for v in avg)
    sa = math.fsum(math.sqrt(v) for v in pair.a)
    slack = 1e-12 * max(sb, sm, sa, 1.0)
    if not (sb >= sm - slack and sm >= sa - slack):
        raise MajorizeError(f"certificate chain violated: {sb} >= {sm} >= {sa}")
    return sb, sm, sa


def random_dominated_pair(rng, n: int, denominator: int = 64) -> SequencePair:
    """Random exact-rational pair with b tail-dominating a.

    Draws both sequences on a fixed denominator grid, sorts them decreasing,
    then shrinks a by the exact factor making every tail of b dominate.
    """
    bv = sorted((Fraction(int(k), denominator)
                 for k in rng.integers(0, 4 * denominator, size=n)),
                reverse=True)
    av = sorted((Fraction(int(k), denominator)
                 for k in rng.integers(0, 4 * denominator, size=n)),
                reverse=True)
    ta = Fraction(0)
    tb = Fraction(0)
    worst = Fraction(0)   # max over i of tail_a / tail_b
    for ai, bi in zip(reversed(av), reversed(bv)):
        ta += ai
        tb += bi
        if ta > 0 and tb == 0:
            worst = None
            break
        if tb > 0:
            ratio = ta / tb
            if ratio > worst:
                worst = ratio
    if worst is None or worst == 0:
        av = [Fraction(0)] * n
    elif worst > 1:
        av = [x / worst for x in av]
    return SequencePair.make(av, bv)

"""Executable checks of the framework's meta-claims at desk scale.

Brute-force incentive checking over finite mechanisms (exact rational
arithmetic), the two-part-pricing incentive lemma, truncated two-sided
geometric noise and its privacy ratio report, weighted-welfare transfer
inversion, exact real-versus-simulated transcript distribution
comparison for the hiding claim, and a rewinding extraction driver that
turns inconsistent seller strategies into discrete logarithms.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable

from .commitments import BitOpening, binding_break_to_dlog, commit_bit, int_bits, verify_opening
from .errors import (
    DegenerateValuation,
    EnumerationBudget,
    ParameterError,
    ShapeMismatch,
)
from .gadgets import ge_positions, ge_statement, ge_targets
from .group import GroupParams, RefString
from .protocols import MechanismSpec, unit_demand_choice, width_of
from .sigma import (
    CdsStatement,
    CdsWitness,
    SigmaFirst,
    SigmaResponse,
    _build_first,
    _build_response,
    cds_extract,
    cds_verify,
    check_witness,
)

# -- brute-force incentive checking -------------------------------------------


@dataclass(frozen=True)
class FiniteMechanism:
    """A finite direct-revelation mechanism with exact rational lotteries."""

    types: tuple
    outcomes: tuple
    table: dict
    utility: Callable

    def __post_init__(self):
        for t in self.types:
            dist = self.table[t]
            if sum(dist.values()) != 1:
                raise ParameterError(f"distribution for type {t!r} does not sum to 1")
            for x in dist:
                if x not in self.outcomes:
                    raise ParameterError(f"unknown outcome {x!r}")


def expected_utility(m: FiniteMechanism, true_type, report) -> Fraction:
    return sum(
        (Fraction(prob) * Fraction(m.utility(true_type, x)) for x, prob in m.table[report].items()),
        Fraction(0),
    )


def check_dsic_ir(m: FiniteMechanism) -> list[tuple]:
    """Empty iff the mechanism is exactly IR and strategyproof.

    IR is checked in expectation over the mechanism's own randomness.
    Each violation is ("IR", t, None) or ("DSIC", t, profitable_report).
    """
    violations = []
    for t in m.types:
        truthful = expected_utility(m, t, t)
        if truthful < 0:
            violations.append(("IR", t, None))
        for other in m.types:
            if other == t:
                continue
            if expected_utility(m, t, other) > truthful:
                violations.append(("DSIC", t, other))
    return violations


def posted_price_mechanism(price: int, bound: int) -> FiniteMechanism:
    """Take-it-or-leave-it at a fixed price: IR and DSIC by construction."""
    outcomes = ((0, 0), (1, price))
    table = {
        v: ({(1, price): Fraction(1)} if v >= price else {(0, 0): Fraction(1)})
        for v in range(bound)
    }
    return FiniteMechanism(
        types=tuple(range(bound)),
        outcomes=outcomes,
        table=table,
        utility=lambda v, x: Fraction(x[0] * v - x[1]),
    )


def two_part_mechanism(s1: int, s2: int, bound: int) -> FiniteMechanism:
    """The two-part pricing family as a finite mechanism.

    Values are a statement about the whole value line, so reports range
    over the half-integer grid {0, 1/2, ..., 2H - 1/2}: the coarsest
    exact grid on which every v/2-threshold is expressible and the
    classic profitable deviation to twice the base price always has a
    value strictly inside its window.  Integer-only reports would make
    adjacent price pairs vacuously incentive compatible.
    """
    types = tuple(Fraction(k, 2) for k in range(4 * bound))
    outcomes = ((0, 0), (0, s1), (1, s1), (1, s1 + s2))
    table = {}
    for v in types:
        half = v / 2
        if half < s1:
            table[v] = {(0, 0): Fraction(1)}
        elif half < s2:
            table[v] = {(1, s1): Fraction(1, 2), (0, s1): Fraction(1, 2)}
        else:
            table[v] = {(1, s1 + s2): Fraction(1)}
    return FiniteMechanism(
        types=types,
        outcomes=outcomes,
        table=table,
        utility=lambda v, x: Fraction(x[0] * v - x[1]),
    )


def ex3_ic_lemma_check(bound: int) -> bool:
    """True iff, over all price pairs, incentive violations vanish exactly
    when the base price is at most the top-up price."""
    if bound > 32:
        raise ParameterError("lemma scan is intended for H <= 32")
    for s1 in range(bound):
        for s2 in range(bound):
            clean = not check_dsic_ir(two_part_mechanism(s1, s2, bound))
            if clean != (s1 <= s2):
                return False
    return True


# -- truncated two-sided geometric noise ----------------------------------------


@dataclass
class TruncatedGeometric:
    """Two-sided geometric noise, renormalized over a finite window.

    Pre-truncation mass at z is ((1-alpha)/(1+alpha)) * alpha^|z|; the
    window must be supplied explicitly.
    """

    alpha: float
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie strictly between 0 and 1")
        if self.lo > self.hi:
            raise ParameterError("degenerate window")
        self.support = list(range(self.lo, self.hi + 1))
        weights = [self.alpha ** abs(z) for z in self.support]
        total = math.fsum(weights)
        self._pmf = [w / total for w in weights]
        self._cum = []
        acc = 0.0
        for p in self._pmf:
            acc += p
            self._cum.append(acc)
        self._cum[-1] = 1.0

    def pmf(self, z: int) -> float:
        if not self.lo <= z <= self.hi:
            return 0.0
        return self._pmf[z - self.lo]

    def sample(self, rng: random.Random) -> int:
        return self.support[bisect_right(self._cum, rng.random())]


def geometric_noise(alpha: float, bounds: tuple[int, int], rng: random.Random) -> int:
    """One draw of truncated two-sided geometric noise."""
    return TruncatedGeometric(alpha, bounds[0], bounds[1]).sample(rng)


@dataclass
class NoiseReport:
    """How close the truncated noise comes to the ideal privacy ratio.

    A price shifted by `ell` changes each realized payment's probability
    by the factor (1-epsilon)^ell wherever both shifted distributions put
    geometric mass; bins where one distribution has no support are only
    counted, never asserted.
    """

    epsilon: float
    ell: int
    lo: int
    hi: int
    n_samples: int
    max_interior_dev: float
    max_mirror_dev: float
    interior_bins: int
    gap_bins: int
    boundary_bins: int
    empirical_max_z: float

    def lines(self) -> list[str]:
        return [
            "truncated geometric noise report",
            f"alpha={1.0 - self.epsilon}",
            f"epsilon={self.epsilon}",
            f"ell={self.ell}",
            f"window={self.lo}..{self.hi}",
            f"interior_bins={self.interior_bins}",
            f"gap_bins={self.gap_bins}",
            f"boundary_bins={self.boundary_bins}",
            f"max_interior_log_ratio_dev={self.max_interior_dev:.3e}",
            f"max_mirror_log_ratio_dev={self.max_mirror_dev:.3e}",
            f"n_samples={self.n_samples}",
            f"empirical_max_abs_z={self.empirical_max_z:.3f}",
        ]

    def render(self) -> str:
        return "\n".join(self.lines()) + "\n"


def noise_ratio_report(
    epsilon: float,
    ell: int,
    n_samples: int,
    bounds: tuple[int, int],
    rng: random.Random,
) -> NoiseReport:
    if ell < 1:
        raise ParameterError("shift ell must be positive")
    lo, hi = bounds
    alpha = 1.0 - epsilon
    dist = TruncatedGeometric(alpha, lo, hi)
    target = ell * math.log(alpha)
    max_dev = 0.0
    max_mirror = 0.0
    interior = 0
    # Payment y under base price 0 has mass pmf(y); under price ell it has
    # mass pmf(y - ell).  Normalizers cancel, so interior ratios are exact.
    for y in range(max(lo, lo + ell), hi + 1):
        if y >= ell:
            ratio = math.log(dist.pmf(y)) - math.log(dist.pmf(y - ell))
            max_dev = max(max_dev, abs(ratio - target))
            interior += 1
        elif y <= 0:
            ratio = math.log(dist.pmf(y)) - math.log(dist.pmf(y - ell))
            max_mirror = max(max_mirror, abs(ratio + target))
    gap = sum(1 for y in range(max(lo + ell, 1), min(hi + 1, ell)))
    boundary = 2 * ell
    counts = [0] * len(dist.support)
    for _ in range(n_samples):
        counts[dist.sample(rng) - lo] += 1
    max_z = 0.0
    if n_samples:
        for idx, p in enumerate(dist._pmf):
            sd = math.sqrt(n_samples * p * (1 - p))
            if sd > 0:
                max_z = max(max_z, abs(counts[idx] - n_samples * p) / sd)
    return NoiseReport(
        epsilon=epsilon,
        ell=ell,
        lo=lo,
        hi=hi,
        n_samples=n_samples,
        max_interior_dev=max_dev,
        max_mirror_dev=max_mirror,
        interior_bins=interior,
        gap_bins=gap,
        boundary_bins=boundary,
        empirical_max_z=max_z,
    )


# -- weighted-welfare transfers and their inversion ------------------------------


@dataclass(frozen=True)
class GrovesInstance:
    """Players with rational valuations over unpriced outcomes, plus the
    designer's hidden positive weights summing to one."""

    n: int
    outcomes: tuple
    weights: tuple
    valuations: tuple  # valuations[i][y_index] >= 0

    def __post_init__(self):
        if len(self.weights) != self.n or len(self.valuations) != self.n:
            raise ParameterError("weights/valuations must have one entry per player")
        if sum(self.weights) != 1:
            raise ParameterError("weights must sum to exactly 1")
        for w in self.weights:
            if not 0 < w < 1:
                raise ParameterError("weights must lie strictly between 0 and 1")
        for row in self.valuations:
            if len(row) != len(self.outcomes):
                raise ParameterError("valuation rows must cover every outcome")
            if any(v < 0 for v in row):
                raise ParameterError("valuations must be nonnegative")


def groves_outcome(inst: GrovesInstance) -> tuple[int, tuple]:
    """Maximize weighted welfare (ties to the first outcome); transfer of
    player i is -(1/w_i) * sum_{j != i} w_j t_j(y)."""
    best = max(
        range(len(inst.outcomes)),
        key=lambda y: (sum(w * t[y] for w, t in zip(inst.weights, inst.valuations)), -y),
    )
    transfers = []
    for i in range(inst.n):
        others = sum(inst.weights[j] * inst.valuations[j][best] for j in range(inst.n) if j != i)
        transfers.append(-others / inst.weights[i])
    return best, tuple(transfers)


def random_groves_instance(n: int, n_outcomes: int, rng: random.Random) -> GrovesInstance:
    """A random rational instance with at least one positive valuation."""
    raw = [rng.randrange(1, 100) for _ in range(n)]
    total = sum(raw)
    weights = tuple(Fraction(a, total) for a in raw)
    while True:
        valuations = tuple(
            tuple(Fraction(rng.randrange(0, 24), rng.randrange(1, 7)) for _ in range(n_outcomes))
            for _ in range(n)
        )
        if any(v > 0 for row in valuations for v in row):
            return GrovesInstance(
                n=n,
                outcomes=tuple(range(n_outcomes)),
                weights=weights,
                valuations=valuations,
            )


def groves_extract_weights(valuations: tuple, outcome: tuple[int, tuple]) -> tuple:
    """Invert the transfers back to the hidden weights, exactly.

    Requires a non-degenerate profile: with all-zero valuations the
    transfers carry no information about the weights.
    """
    y, transfers = outcome
    denoms = [s - t[y] for s, t in zip(transfers, valuations)]
    if any(d == 0 for d in denoms):
        raise DegenerateValuation("transfers coincide with valuations; weights unrecoverable")
    inverses = [Fraction(1) / Fraction(d) for d in denoms]
    total = sum(inverses)
    return tuple(inv / total for inv in inverses)


# -- exact hiding check: real vs trapdoor-simulated transcripts -------------------


def _subgroup_elements(params: GroupParams) -> list[int]:
    return sorted({pow(x, 2, params.q) for x in range(1, params.q)})


def _proof_space_size(shape: tuple[int, ...], wit_row: int, p: int) -> int:
    size = p  # the challenge
    for i, w in enumerate(shape):
        size *= p**w if i == wit_row else p ** (1 + w)
    return size


def _proof_tuples(stmt: CdsStatement, wit: CdsWitness):
    """Every interactive transcript an honest prover can produce: all
    nonce vectors, all simulated rows, all challenges."""
    p = stmt.params.p
    rows = stmt.rows
    other_rows = [i for i in range(len(rows)) if i != wit.row]
    nonce_space = product(range(1, p + 1), repeat=len(rows[wit.row]))
    sim_spaces = [product(range(p), repeat=1 + len(rows[i])) for i in other_rows]
    for nonces in nonce_space:
        for sim_combo in product(*sim_spaces):
            sims = {
                i: (combo[0], tuple(combo[1:])) for i, combo in zip(other_rows, sim_combo)
            }
            first = _build_first(stmt, wit, nonces, sims)
            for beta in range(1, p + 1):
                resp = _build_response(stmt, wit, nonces, sims, beta)
                yield (
                    tuple(a for row in first.alphas for a in row),
                    beta,
                    resp.betas,
                    tuple(g for row in resp.gammas for g in row),
                )


def _ge_proof_plan(ref: RefString, com_values: list[int], w: int, claimed_bits: list[int]):
    """Statements and witness rows for a lower-bound proof, using the same
    first-satisfying-target row selection as the live prover."""
    width = len(com_values)
    plan = []
    for i in ge_positions(w, width):
        targets = ge_targets(w, width, i)
        rows = tuple(((ref.h, com_values[j - 1]),) for j in targets)
        stmt = CdsStatement(params=ref.params, rows=rows)
        row = next(k for k, j in enumerate(targets) if claimed_bits[j - 1] == 1)
        plan.append((stmt, row, targets[row]))
    return plan


class _WorldBuilder:
    """Accumulates the distribution of one world's full transcripts."""

    def __init__(self):
        self.counter: dict[tuple, int] = {}

    def add(self, transcript: tuple, weight: int = 1):
        self.counter[transcript] = self.counter.get(transcript, 0) + weight


def _enumerate_proofs(base: tuple, plans: list[tuple[CdsStatement, CdsWitness]], sink: _WorldBuilder):
    if not plans:
        sink.add(base)
        return
    spaces = [list(_proof_tuples(stmt, wit)) for stmt, wit in plans]
    for combo in product(*spaces):
        sink.add(base + tuple(x for t in combo for x in t))


def _check_budget(size: int, budget: int):
    if size > budget:
        raise EnumerationBudget(f"enumeration of {size} transcripts exceeds budget {budget}")


def _hiding_worlds_ex1(
    ref_pairs_real, ref_pairs_sim, params, spec, v, budget
) -> tuple[_WorldBuilder, _WorldBuilder]:
    width = width_of(spec.bound)
    p = params.p
    s = spec.prices[0]
    trade = s <= v
    real, sim = _WorldBuilder(), _WorldBuilder()

    # real world: honest commitments to s
    s_bits = int_bits(s, width)
    size = len(ref_pairs_real) * (p - 1) ** width
    if not trade:
        w = v + 1
        for i in ge_positions(w, width):
            size *= _proof_space_size((1,) * len(ge_targets(w, width, i)), 0, p)
    _check_budget(size, budget)
    for g, h in ref_pairs_real:
        ref = RefString(params=params, seed=b"e", g=g, h=h)
        for r_vec in product(range(1, p), repeat=width):
            coms = [commit_bit(ref, b, r).value for b, r in zip(s_bits, r_vec)]
            base = (g, h, *coms, v)
            if trade:
                base += ("reveal", *(x for b, r in zip(s_bits, r_vec) for x in (b, r)))
                real.add(base)
            else:
                base += ("no-trade",)
                plan = _ge_proof_plan(ref, coms, v + 1, s_bits)
                plans = [
                    (stmt, CdsWitness(row=row, exps=(r_vec[j - 1],)))
                    for stmt, row, j in plan
                ]
                _enumerate_proofs(base, plans, real)

    # simulated world: equivocal commitments, price chosen after the outcome
    for g, rho in ref_pairs_sim:
        h = pow(g, rho, params.q)
        ref = RefString(params=params, seed=b"e", g=g, h=h)
        for rp_vec in product(range(1, p), repeat=width):
            coms = [params.pow_unchecked(h, rp) for rp in rp_vec]
            base = (g, h, *coms, v)
            if trade:
                # open to the true price: bit 1 opens as-is, bit 0 via rho
                exps = [rp if b == 1 else rho * rp % p for b, rp in zip(s_bits, rp_vec)]
                base += ("reveal", *(x for b, r in zip(s_bits, exps) for x in (b, r)))
                sim.add(base)
            else:
                base += ("no-trade",)
                claimed = int_bits(v + 1, width)  # any price above v is consistent
                plan = _ge_proof_plan(ref, coms, v + 1, claimed)
                plans = [
                    (stmt, CdsWitness(row=row, exps=(rp_vec[j - 1],)))
                    for stmt, row, j in plan
                ]
                _enumerate_proofs(base, plans, sim)
    return real, sim


def _hiding_worlds_ex2(
    ref_pairs_real, ref_pairs_sim, params, spec, values, budget
) -> tuple[_WorldBuilder, _WorldBuilder]:
    width = width_of(spec.bound)
    p = params.p
    prices = spec.prices
    chosen = unit_demand_choice(prices, list(values))
    real, sim = _WorldBuilder(), _WorldBuilder()

    def bounds_for(claimed_prices):
        """(item, bound, claimed bits) for each lower-bound proof required."""
        out = []
        if chosen is None:
            for i in (0, 1):
                out.append((i, values[i] + 1, int_bits(claimed_prices[i], width)))
        else:
            other = 1 - chosen
            b = claimed_prices[chosen] - values[chosen] + values[other]
            if b >= 1:
                out.append((other, b, int_bits(claimed_prices[other], width)))
        return out

    size = len(ref_pairs_real) * (p - 1) ** (2 * width)
    for _, w, _bits in bounds_for(prices):
        for i in ge_positions(w, width):
            size *= _proof_space_size((1,) * len(ge_targets(w, width, i)), 0, p)
    _check_budget(size, budget)

    for g, h in ref_pairs_real:
        ref = RefString(params=params, seed=b"e", g=g, h=h)
        all_bits = [int_bits(prices[0], width), int_bits(prices[1], width)]
        for r_all in product(range(1, p), repeat=2 * width):
            r_vecs = [r_all[:width], r_all[width:]]
            com_vecs = [
                [commit_bit(ref, b, r).value for b, r in zip(bits, rv)]
                for bits, rv in zip(all_bits, r_vecs)
            ]
            base = (g, h, *com_vecs[0], *com_vecs[1], *values)
            plans = []
            if chosen is None:
                base += ("no-trade",)
            else:
                base += (
                    "sold",
                    chosen,
                    *(x for b, r in zip(all_bits[chosen], r_vecs[chosen]) for x in (b, r)),
                )
            for item, w, _bits in bounds_for(prices):
                for stmt, row, j in _ge_proof_plan(ref, com_vecs[item], w, all_bits[item]):
                    plans.append((stmt, CdsWitness(row=row, exps=(r_vecs[item][j - 1],))))
            _enumerate_proofs(base, plans, real)

    for g, rho in ref_pairs_sim:
        h = pow(g, rho, params.q)
        ref = RefString(params=params, seed=b"e", g=g, h=h)
        # post-hoc consistent prices: the sold item's true price is public,
        # hidden items sit exactly at their proven bounds
        if chosen is None:
            claimed = [values[0] + 1, values[1] + 1]
        else:
            other = 1 - chosen
            b = prices[chosen] - values[chosen] + values[other]
            claimed = [0, 0]
            claimed[chosen] = prices[chosen]
            claimed[other] = max(b, 0)
        claimed_bits = [int_bits(cp, width) for cp in claimed]
        for rp_all in product(range(1, p), repeat=2 * width):
            rp_vecs = [rp_all[:width], rp_all[width:]]
            com_vecs = [[params.pow_unchecked(h, rp) for rp in rv] for rv in rp_vecs]
            base = (g, h, *com_vecs[0], *com_vecs[1], *values)
            plans = []
            if chosen is None:
                base += ("no-trade",)
            else:
                exps = [
                    rp if b == 1 else rho * rp % p
                    for b, rp in zip(claimed_bits[chosen], rp_vecs[chosen])
                ]
                base += (
                    "sold",
                    chosen,
                    *(x for b, r in zip(claimed_bits[chosen], exps) for x in (b, r)),
                )
            for item, w, bits in bounds_for(claimed):
                for stmt, row, j in _ge_proof_plan(ref, com_vecs[item], w, bits):
                    plans.append((stmt, CdsWitness(row=row, exps=(rp_vecs[item][j - 1],))))
            _enumerate_proofs(base, plans, sim)
    return real, sim


def transcript_distribution_equality(
    kind: str,
    params: GroupParams,
    spec: MechanismSpec,
    reports: list[int],
    budget: int = 2_000_000,
) -> bool:
    """Exact multiset comparison of real and trapdoor-simulated runs.

    The real world enumerates all generator pairs, commitment randomness,
    prover nonces, and challenges; the simulated world plants h = g^rho,
    commits equivocally, and picks a consistent mechanism only after the
    outcome is known.  Equality is exact or the claim fails.
    """
    members = _subgroup_elements(params)
    nonid = [x for x in members if x != 1]
    ref_pairs_real = [(g, h) for g in nonid for h in nonid if g != h]
    ref_pairs_sim = [(g, rho) for g in nonid for rho in range(2, params.p)]
    if kind == "ex1":
        real, sim = _hiding_worlds_ex1(
            ref_pairs_real, ref_pairs_sim, params, spec, reports[0], budget
        )
    elif kind == "ex2":
        real, sim = _hiding_worlds_ex2(
            ref_pairs_real, ref_pairs_sim, params, spec, list(reports), budget
        )
    else:
        raise ParameterError(f"distribution comparison not implemented for {kind!r}")
    return real.counter == sim.counter


# Configurations exercised by the acceptance suite: one revealing run, two
# hidden-price runs, and a mixed two-item run.
SHIPPED_HIDING_CONFIGS = (
    ("ex1", 7, MechanismSpec("ex1", 2, (1,)), [0]),
    ("ex1", 7, MechanismSpec("ex1", 2, (1,)), [1]),
    ("ex2", 7, MechanismSpec("ex2", 2, (1, 1)), [0, 0]),
    ("ex2", 7, MechanismSpec("ex2", 2, (0, 1)), [1, 0]),
)


# -- rewinding extraction driver ---------------------------------------------------


@dataclass
class RevealAction:
    """The adversary opens its committed price bits."""

    openings: list[BitOpening]


@dataclass
class ClaimAction:
    """The adversary claims `price >= bound` and offers interactive provers."""

    bound: int
    prover_for: Callable[[int], "ReplayableProver"]


class ReplayableProver:
    """A prover that answers any number of challenges for one first message.

    Honest single-use prover state forbids this; test adversaries (and the
    extraction driver that rewinds them) need it.
    """

    def __init__(self, stmt: CdsStatement, wit: CdsWitness, rng: random.Random):
        if not check_witness(stmt, wit):
            raise ParameterError("witness does not satisfy its row")
        self.stmt = stmt
        self.wit = wit
        p = stmt.params.p
        self.nonces = tuple(rng.randrange(1, p + 1) for _ in stmt.rows[wit.row])
        self.sims = {
            i: (rng.randrange(p), tuple(rng.randrange(p) for _ in row))
            for i, row in enumerate(stmt.rows)
            if i != wit.row
        }

    def first(self) -> SigmaFirst:
        return _build_first(self.stmt, self.wit, self.nonces, self.sims)

    def respond(self, beta: int) -> SigmaResponse:
        return _build_response(self.stmt, self.wit, self.nonces, self.sims, beta)


def commitment_attack_driver(adversary, ref: RefString, bound: int) -> int | None:
    """Replays a seller strategy against every type report, rechallenging
    each claimed proof over the whole challenge space.

    Any double opening -- direct, or implied by an extracted claim witness
    conflicting with a reveal -- yields log_g(h).  Consistent strategies
    produce nothing, as they must.
    """
    width = width_of(bound)
    params = ref.params
    com = adversary.commit(ref)
    for bit in com.bits:
        params.require_member(bit.value)
    zero_open: dict[int, int] = {}
    one_open: dict[int, int] = {}

    def note(index: int, op: BitOpening):
        if not verify_opening(ref, com.bits[index - 1], op):
            return
        (zero_open if op.bit == 0 else one_open)[index] = op.r

    for v in range(bound):
        action = adversary.evaluate(ref, v)
        if isinstance(action, RevealAction):
            for index, op in enumerate(action.openings, start=1):
                note(index, op)
        elif isinstance(action, ClaimAction):
            w = action.bound
            for i in ge_positions(w, width):
                targets = ge_targets(w, width, i)
                stmt = ge_statement(ref, com, w, i)
                prover = action.prover_for(i)
                first = prover.first()
                accepting = []
                for beta in range(1, params.p + 1):
                    resp = prover.respond(beta)
                    try:
                        ok = cds_verify(stmt, first, beta, resp)
                    except (ShapeMismatch, ParameterError):
                        ok = False
                    if ok:
                        accepting.append((beta, resp))
                    if len(accepting) == 2:
                        break
                if len(accepting) == 2:
                    wit = cds_extract(stmt, first, accepting[0], accepting[1])
                    note(targets[wit.row], BitOpening(bit=1, r=wit.exps[0]))
        else:
            raise ParameterError(f"unknown adversary action {action!r}")
    for index in zero_open:
        if index in one_open:
            return binding_break_to_dlog(ref, zero_open[index], one_open[index])
    return None


# Built-in adversaries for the driver ------------------------------------------


class HonestSellerStrategy:
    """Plays the honest hidden-price strategy: consistent, so nothing extracts."""

    def __init__(self, price: int, bound: int, rng: random.Random):
        self.price = price
        self.bound = bound
        self.rng = rng
        self.openings: list[BitOpening] | None = None

    def commit(self, ref: RefString):
        from .commitments import commit_int

        com, ops = commit_int(ref, self.price, width_of(self.bound), self.rng)
        self.openings = ops
        self.com = com
        return com

    def evaluate(self, ref: RefString, v: int):
        if self.price <= v:
            return RevealAction(openings=list(self.openings))
        w = v + 1
        width = width_of(self.bound)
        bits = [op.bit for op in self.openings]

        def prover_for(i: int) -> ReplayableProver:
            targets = ge_targets(w, width, i)
            row = next(k for k, j in enumerate(targets) if bits[j - 1] == 1)
            stmt = ge_statement(ref, self.com, w, i)
            wit = CdsWitness(row=row, exps=(self.openings[targets[row] - 1].r,))
            return ReplayableProver(stmt, wit, self.rng)

        return ClaimAction(bound=w, prover_for=prover_for)


class EquivocatorStrategy:
    """Knows rho with h = g^rho, so every commitment opens both ways.

    `reveal_plan` maps reports to the price revealed for them; reports
    below `claim_below` are answered with a (trapdoor-powered) claim that
    the price exceeds them.
    """

    def __init__(self, rho: int, bound: int, rng: random.Random, reveal_plan, claim_below: int = 0):
        self.rho = rho
        self.bound = bound
        self.rng = rng
        self.reveal_plan = reveal_plan
        self.claim_below = claim_below
        self.exps: list[int] | None = None

    def commit(self, ref: RefString):
        from .commitments import BitCommitment, IntCommitment

        width = width_of(self.bound)
        params = ref.params
        if params.pow(ref.g, self.rho) != ref.h:
            raise ParameterError("planted trapdoor inconsistent with the reference string")
        self.exps = [params.exp_sample(self.rng) for _ in range(width)]
        bits = tuple(BitCommitment(params.pow_unchecked(ref.h, r)) for r in self.exps)
        self.com = IntCommitment(width=width, bits=bits)
        return self.com

    def _opening(self, index: int, bit: int, params) -> BitOpening:
        r = self.exps[index - 1]
        return BitOpening(bit=bit, r=r if bit == 1 else self.rho * r % params.p)

    def evaluate(self, ref: RefString, v: int):
        width = width_of(self.bound)
        if v < self.claim_below:
            w = v + 1

            def prover_for(i: int) -> ReplayableProver:
                stmt = ge_statement(ref, self.com, w, i)
                # log base h of every commitment is known; use the first target
                wit = CdsWitness(row=0, exps=(self.exps[ge_targets(w, width, i)[0] - 1],))
                return ReplayableProver(stmt, wit, self.rng)

            return ClaimAction(bound=w, prover_for=prover_for)
        price = self.reveal_plan(v)
        bits = int_bits(price, width)
        return RevealAction(
            openings=[self._opening(i, b, ref.params) for i, b in enumerate(bits, start=1)]
        )

"""Families of k-spaces with exact rational parameter, and the battery of
equivalent membership tests.

A family is a set of k-space ids inside a GeometryCtx; its parameter is
x = |family| / qbinom(n,k).  The battery runs every applicable equivalent
characterization (row-space membership, kernel orthogonality, disjointness
counts, disjointness-matrix eigenvector, eigenspace split, meet distribution,
switching-set balance, spread intersection) and insists that all conclusive
verdicts agree; a disagreement is a defect in this package, never a property
of the input, and is raised loudly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .geometry import GeometryCtx, GeometrySizeError, Subspace
from .qformulas import (
    eigenvalue_p,
    meet_count_target,
    parameter_range,
    qbinom,
    valence,
)
from .scheme import SchemeBundle, q_disjoint_coefficient, v1_eigen_check


class FamilyError(ValueError):
    """Invalid family construction; carries a witness when one exists."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class CLCandidate:
    """A set of k-space ids with characteristic-vector view."""

    __slots__ = ("ctx", "ids", "mask")

    def __init__(self, ctx: GeometryCtx, ids):
        ids = tuple(sorted(ids))
        total = len(ctx.kspaces)
        if any(not 0 <= c < total for c in ids):
            raise FamilyError("k-space id out of range")
        if any(a == b for a, b in zip(ids, ids[1:])):
            raise FamilyError("duplicate k-space ids")
        self.ctx = ctx
        self.ids = ids
        mask = 0
        for c in ids:
            mask |= 1 << c
        self.mask = mask

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, c: int) -> bool:
        return (self.mask >> c) & 1 == 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CLCandidate)
            and other.ctx is self.ctx
            and other.ids == self.ids
        )

    def __hash__(self) -> int:
        return hash((id(self.ctx), self.ids))

    @property
    def x(self) -> Fraction:
        """The parameter |family| / qbinom(n,k), recomputed on demand."""
        p = self.ctx.params
        value = Fraction(len(self.ids), qbinom(p.n, p.k, p.q))
        lo, hi = parameter_range(p)
        assert lo <= value <= hi
        return value

    def chi(self, c: int) -> int:
        return (self.mask >> c) & 1


def family(ctx: GeometryCtx, ids) -> CLCandidate:
    return CLCandidate(ctx, ids)


def point_pencil_family(ctx: GeometryCtx, point: int) -> CLCandidate:
    """All k-spaces through a point (the parameter-1 example)."""
    return CLCandidate(ctx, ctx.pencil(point))


def hyperplane_family(ctx: GeometryCtx, hyperplane: Subspace) -> CLCandidate:
    """All k-spaces inside a fixed hyperplane."""
    if hyperplane.dim != ctx.params.n - 1:
        raise FamilyError(f"need a hyperplane, got dimension {hyperplane.dim}")
    return CLCandidate(ctx, ctx.all_in(hyperplane))


def full_family(ctx: GeometryCtx) -> CLCandidate:
    return CLCandidate(ctx, range(len(ctx.kspaces)))


def complement(cand: CLCandidate) -> CLCandidate:
    total = len(cand.ctx.kspaces)
    return CLCandidate(cand.ctx, (c for c in range(total) if c not in cand))


def disjoint_union(a: CLCandidate, b: CLCandidate) -> CLCandidate:
    if a.ctx is not b.ctx:
        raise FamilyError("families live in different geometries")
    overlap = a.mask & b.mask
    if overlap:
        witness = (overlap & -overlap).bit_length() - 1
        raise FamilyError(
            f"families are not disjoint: both contain k-space {witness}",
            witness=witness,
        )
    return CLCandidate(a.ctx, a.ids + b.ids)


def difference(a: CLCandidate, b: CLCandidate) -> CLCandidate:
    """a minus b, requiring b to be contained in a."""
    if a.ctx is not b.ctx:
        raise FamilyError("families live in different geometries")
    stray = b.mask & ~a.mask
    if stray:
        witness = (stray & -stray).bit_length() - 1
        raise FamilyError(
            f"subtrahend is not contained in the family: k-space {witness}",
            witness=witness,
        )
    return CLCandidate(a.ctx, (c for c in a.ids if c not in b))


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"
    SAMPLED_PASS = "sampled-pass"


@dataclass
class CheckResult:
    verdict: Verdict
    witness: object = None
    note: str = ""
    seconds: float = 0.0


@dataclass
class BatteryReport:
    x: Fraction
    size: int
    results: dict[str, CheckResult] = field(default_factory=dict)

    @property
    def conclusive(self) -> dict[str, Verdict]:
        """Verdicts that count toward agreement: full passes and fails, and
        definite failures found by sampled checks."""
        out = {}
        for name, res in self.results.items():
            if res.verdict in (Verdict.PASS, Verdict.FAIL):
                out[name] = res.verdict
        return out

    @property
    def agreed(self) -> bool:
        return len(set(self.conclusive.values())) <= 1

    @property
    def passed(self) -> bool:
        verdicts = set(self.conclusive.values())
        return self.agreed and verdicts == {Verdict.PASS}

    def lines(self) -> list[str]:
        out = [f"x = {self.x} (size {self.size})"]
        for name, res in self.results.items():
            line = f"{name}: {res.verdict.value}"
            if res.note:
                line += f" ({res.note})"
            if res.witness is not None and res.verdict is Verdict.FAIL:
                line += f" witness={res.witness}"
            out.append(line)
        return out


class BatteryDisagreement(RuntimeError):
    """Two conclusive definition checks disagreed: an internal defect."""

    def __init__(self, report: BatteryReport):
        super().__init__(
            "equivalent definition checks disagreed: "
            + ", ".join(f"{k}={v.value}" for k, v in report.conclusive.items())
        )
        self.report = report


@dataclass(frozen=True)
class BatteryConfig:
    checks: tuple[str, ...] = (
        "rowspace",
        "kernel",
        "disjointness-counts",
        "kneser-eigenvector",
        "eigenspace-split",
        "meet-distribution",
        "switching-sets",
        "spread-intersections",
    )
    switching_pairs: tuple | None = None  # explicit (R, R') id-tuple pairs
    max_sigma: int | None = None  # cap on (2k+1)-spaces scanned by def 7
    spread_mode: str = "auto"  # "auto": exhaustive when gated; "reduced": sampled

    @classmethod
    def fast(cls) -> "BatteryConfig":
        return cls(checks=("kernel", "disjointness-counts"))


def _spread_source(bundle: SchemeBundle, config: BatteryConfig):
    """(spread list, their id-masks, exhaustive?) per battery config."""
    if config.spread_mode == "reduced":
        spreads = bundle.ctx.permuted_spread_sample()
        masks = []
        for s in spreads:
            m = 0
            for c in s:
                m |= 1 << c
            masks.append(m)
        return spreads, masks, False
    spreads, exhaustive = bundle.spreads()
    return spreads, bundle.spread_masks(), exhaustive


# -- individual checks -------------------------------------------------------


def check_rowspace_membership(cand: CLCandidate, bundle: SchemeBundle) -> CheckResult:
    """Characteristic vector lies in the row space of the incidence matrix."""
    rows, pivots = bundle.incidence_rref()
    res = [Fraction(cand.chi(c)) for c in range(len(cand.ctx.kspaces))]
    for r, p in enumerate(pivots):
        f = res[p]
        if f:
            row = rows[r]
            res = [a - f * b for a, b in zip(res, row)]
    for c, v in enumerate(res):
        if v:
            return CheckResult(Verdict.FAIL, witness=("residual-at", c))
    return CheckResult(Verdict.PASS)


def check_kernel_orthogonality(cand: CLCandidate, bundle: SchemeBundle) -> CheckResult:
    """Characteristic vector is orthogonal to ker(A)."""
    for idx, vec in enumerate(bundle.kernel_int()):
        if bundle.kernel_dot(cand.mask, vec):
            return CheckResult(Verdict.FAIL, witness=("kernel-vector", idx))
    return CheckResult(Verdict.PASS)


def _disjoint_targets(cand: CLCandidate) -> tuple[Fraction, Fraction]:
    p = cand.ctx.params
    coeff = q_disjoint_coefficient(p)
    x = cand.x
    return (x - 1) * coeff, x * coeff


def check_disjointness_counts(cand: CLCandidate, bundle: SchemeBundle) -> CheckResult:
    """Every k-space pi sees exactly (x - chi(pi)) * q^(k^2+k) * qbinom(n-k-1,k)
    members disjoint from it."""
    masks = bundle.disjointness_masks()
    t_in, t_out = _disjoint_targets(cand)
    for c in range(len(cand.ctx.kspaces)):
        count = (masks[c] & cand.mask).bit_count()
        target = t_in if cand.chi(c) else t_out
        if count != target:
            return CheckResult(
                Verdict.FAIL, witness=("kspace", c, "expected", target, "got", count)
            )
    return CheckResult(Verdict.PASS)


def check_kneser_eigenvector(cand: CLCandidate, bundle: SchemeBundle) -> CheckResult:
    """T*chi - |L|*j is an eigenvector of the disjointness matrix for the
    first nontrivial eigenvalue (closed-form row evaluation)."""
    p = cand.ctx.params
    total = len(cand.ctx.kspaces)
    size = len(cand)
    deg = valence(p.k + 1, p)
    lam = eigenvalue_p(1, p.k + 1, p)
    if size in (0, total):
        return CheckResult(Verdict.PASS, note="zero vector (constant family)")
    masks = bundle.disjointness_masks()
    for c in range(total):
        a_c = (masks[c] & cand.mask).bit_count()
        lhs = total * a_c - size * deg
        rhs = lam * (total * cand.chi(c) - size)
        if lhs != rhs:
            return CheckResult(Verdict.FAIL, witness=("kspace", c))
    return CheckResult(Verdict.PASS)


def check_eigenspace_split(cand: CLCandidate, bundle: SchemeBundle) -> CheckResult:
    """chi decomposes over the first two common eigenspaces: its projection
    off the all-one line is annihilated by (K - P_{1,k+1} I), checked by a
    literal exact matrix-vector product."""
    total = len(cand.ctx.kspaces)
    size = len(cand)
    w = [total * cand.chi(c) - size for c in range(total)]
    if not any(w):
        return CheckResult(Verdict.PASS, note="zero vector (constant family)")
    ok = v1_eigen_check(w, cand.ctx)
    if ok:
        return CheckResult(Verdict.PASS)
    return CheckResult(Verdict.FAIL)


def intersection_distribution(cand: CLCandidate, pi: int) -> tuple[int, ...]:
    """Counts of members meeting k-space pi in dimension k-i, for i = 0..k+1."""
    rel = cand.ctx.relation_masks()
    return tuple(
        (rel[i][pi] & cand.mask).bit_count() for i in range(cand.ctx.params.k + 2)
    )


def check_meet_distribution(cand: CLCandidate, bundle: SchemeBundle) -> CheckResult:
    """For every pi and every i in 1..k+1, the number of members meeting pi
    in dimension k-i matches the two-case closed form."""
    p = cand.ctx.params
    x = cand.x
    rel = bundle.relation_masks()
    targets_in = [meet_count_target(i, p, x, member=True) for i in range(1, p.k + 2)]
    targets_out = [meet_count_target(i, p, x, member=False) for i in range(1, p.k + 2)]
    for c in range(len(cand.ctx.kspaces)):
        targets = targets_in if cand.chi(c) else targets_out
        for i in range(1, p.k + 2):
            count = (rel[i][c] & cand.mask).bit_count()
            if count != targets[i - 1]:
                return CheckResult(
                    Verdict.FAIL,
                    witness=("kspace", c, "i", i, "expected", targets[i - 1], "got", count),
                )
    return CheckResult(Verdict.PASS)


def check_switching_pairs(cand: CLCandidate, pairs) -> CheckResult:
    """|L meet R| = |L meet R'| over the supplied conjugate switching-set
    pairs.  A pass over supplied pairs is only a sampled pass."""
    ctx = cand.ctx
    if not pairs:
        return CheckResult(Verdict.SKIPPED, note="no switching pairs supplied")
    for r1, r2 in pairs:
        if not ctx.are_conjugate_switching_sets(r1, r2):
            raise FamilyError(
                "supplied pair is not a pair of conjugate switching sets",
                witness=(tuple(r1), tuple(r2)),
            )
        m1 = 0
        for c in r1:
            m1 |= 1 << c
        m2 = 0
        for c in r2:
            m2 |= 1 << c
        if (m1 & cand.mask).bit_count() != (m2 & cand.mask).bit_count():
            return CheckResult(Verdict.FAIL, witness=(tuple(r1), tuple(r2)))
    return CheckResult(Verdict.SAMPLED_PASS, note=f"{len(pairs)} supplied pairs")


def _spread_meet_constant(cand: CLCandidate, spreads, masks) -> tuple[bool, object]:
    """Whether |L meet S| is constant over the given spreads; equivalent to
    checking every difference pair (S \\ S', S' \\ S) of the list."""
    seen = None
    seen_idx = 0
    for idx, m in enumerate(masks):
        meet = (m & cand.mask).bit_count()
        if seen is None:
            seen, seen_idx = meet, idx
        elif meet != seen:
            s = spreads[idx]
            witness = (
                tuple(c for c in spreads[seen_idx] if c not in s),
                tuple(c for c in s if c not in spreads[seen_idx]),
            )
            return False, witness
    return True, None


def check_switching_sets(
    cand: CLCandidate, bundle: SchemeBundle, config: BatteryConfig
) -> CheckResult:
    """Switching-set balance.  With explicit pairs, checks exactly those.
    Otherwise generates all spread-difference pairs inside (2k+1)-subspaces
    (the span-sized case uses the global spread list) and checks them via
    constancy of the spread meets, which is the same condition."""
    if config.switching_pairs is not None:
        return check_switching_pairs(cand, config.switching_pairs)
    ctx = cand.ctx
    p = ctx.params
    if p.n == 2 * p.k + 1:
        spreads, masks, exhaustive = _spread_source(bundle, config)
        if len(spreads) < 2:
            return CheckResult(Verdict.SKIPPED, note="fewer than two spreads known")
        ok, witness = _spread_meet_constant(cand, spreads, masks)
        if not ok:
            return CheckResult(Verdict.FAIL, witness=witness)
        if exhaustive:
            return CheckResult(Verdict.PASS, note=f"{len(spreads)} spreads, all pairs")
        return CheckResult(Verdict.SAMPLED_PASS, note=f"{len(spreads)} sampled spreads")
    sigmas = ctx.subspaces_of_dim(2 * p.k + 1)
    capped = config.max_sigma is not None and config.max_sigma < len(sigmas)
    if capped:
        sigmas = sigmas[: config.max_sigma]
    checked = 0
    try:
        for sigma in sigmas:
            spreads = ctx.spreads_within(sigma)
            if len(spreads) < 2:
                continue
            smasks = ctx.sigma_spread_masks(sigma)
            ok, witness = _spread_meet_constant(cand, spreads, smasks)
            if not ok:
                return CheckResult(Verdict.FAIL, witness=("sigma", sigma.basis, witness))
            checked += 1
    except GeometrySizeError as exc:
        return CheckResult(Verdict.SKIPPED, note=str(exc))
    if checked == 0:
        return CheckResult(Verdict.SKIPPED, note="no switching pairs available")
    note = f"spread pairs inside {checked} span-dimensional subspaces"
    if capped:
        return CheckResult(Verdict.SAMPLED_PASS, note=note + " (capped)")
    return CheckResult(Verdict.PASS, note=note)


def check_spread_intersections(
    cand: CLCandidate, bundle: SchemeBundle, config: BatteryConfig
) -> CheckResult:
    """|L meet S| = x for every available k-spread S."""
    p = cand.ctx.params
    if (p.n + 1) % (p.k + 1):
        return CheckResult(
            Verdict.SKIPPED, note=f"no k-spreads: {p.k + 1} does not divide {p.n + 1}"
        )
    spreads, masks, exhaustive = _spread_source(bundle, config)
    x = cand.x
    if x.denominator != 1:
        return CheckResult(
            Verdict.FAIL,
            witness=("non-integer parameter", x),
            note="spread meets are integers; non-integer x is impossible",
        )
    for idx, m in enumerate(masks):
        meet = (m & cand.mask).bit_count()
        if meet != x:
            return CheckResult(
                Verdict.FAIL, witness=("spread", idx, "meet", meet, "expected", int(x))
            )
    if exhaustive:
        return CheckResult(Verdict.PASS, note=f"all {len(spreads)} spreads")
    return CheckResult(Verdict.SAMPLED_PASS, note=f"{len(spreads)} sampled spreads")


def point_flag_identity(cand: CLCandidate, point: int, tau: Subspace) -> bool:
    """Exact incidence identity tying the pencil through a point, the
    k-spaces inside a containing subspace tau, and the pencil inside tau."""
    ctx = cand.ctx
    p = ctx.params
    i = tau.dim
    if i < p.k + 1:
        raise ValueError(f"need dim(tau) >= k+1, got {i}")
    tmask = ctx.point_mask(tau)
    if not (tmask >> point) & 1:
        raise ValueError("point does not lie in tau")
    q, n, k = p.q, p.n, p.k
    in_tau = 0
    for c in ctx.all_in(tau):
        in_tau |= 1 << c
    pencil_mask = ctx.pencil_masks[point]
    a = (pencil_mask & cand.mask).bit_count()
    b = (in_tau & cand.mask).bit_count()
    c_ = (pencil_mask & in_tau & cand.mask).bit_count()
    ratio = Fraction(qbinom(n - 1, k, q), qbinom(i - 1, k, q))
    lhs = a + ratio * Fraction(q**k - 1, q**i - 1) * b
    rhs = ratio * c_ + Fraction(q**k - 1, q**n - 1) * len(cand)
    return lhs == rhs


_CHECKS = {
    "rowspace": lambda cand, bundle, config: check_rowspace_membership(cand, bundle),
    "kernel": lambda cand, bundle, config: check_kernel_orthogonality(cand, bundle),
    "disjointness-counts": lambda cand, bundle, config: check_disjointness_counts(
        cand, bundle
    ),
    "kneser-eigenvector": lambda cand, bundle, config: check_kneser_eigenvector(
        cand, bundle
    ),
    "eigenspace-split": lambda cand, bundle, config: check_eigenspace_split(
        cand, bundle
    ),
    "meet-distribution": lambda cand, bundle, config: check_meet_distribution(
        cand, bundle
    ),
    "switching-sets": check_switching_sets,
    "spread-intersections": check_spread_intersections,
}


def run_battery(
    cand: CLCandidate,
    bundle: SchemeBundle,
    config: BatteryConfig | None = None,
) -> BatteryReport:
    """Run every enabled definition check and assert verdict agreement."""
    if config is None:
        config = BatteryConfig()
    report = BatteryReport(x=cand.x, size=len(cand))
    for name in config.checks:
        if name not in _CHECKS:
            raise ValueError(f"unknown battery check: {name}")
        start = time.perf_counter()
        result = _CHECKS[name](cand, bundle, config)
        result.seconds = time.perf_counter() - start
        report.results[name] = result
    if not report.agreed:
        raise BatteryDisagreement(report)
    return report

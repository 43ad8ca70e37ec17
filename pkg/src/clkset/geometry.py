"""Enumeration and canonical representation of PG(n,q).

Subspaces are stored as reduced-row-echelon bases over GF(q); two values are
equal exactly when they describe the same subspace.  A GeometryCtx fixes a
deterministic id order (lexicographic on the flattened canonical matrices)
for the points and the k-spaces, and precomputes the incidence bitmasks the
rest of the package runs on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .gf import FieldCtx, FieldReduction, field_ctx
from .qformulas import SchemeParams, qbinom

DEFAULT_ENUM_CAP = 10**6
DEFAULT_SPREAD_POINT_CAP = 40
DEFAULT_PERMUTATION_CAP = 5040


def rref(rows, field: FieldCtx) -> tuple[tuple[int, ...], ...]:
    """Reduced row echelon form over GF(q); zero rows dropped, pivots 1."""
    work = [list(r) for r in rows]
    if not work:
        return ()
    cols = len(work[0])
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, len(work)):
            if work[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        inv = field.inv(work[r][c])
        if inv != 1:
            work[r] = [field.mul(inv, v) for v in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [
                    field.sub(a, field.mul(f, b)) for a, b in zip(work[i], work[r])
                ]
        r += 1
        if r == len(work):
            break
    return tuple(tuple(row) for row in work[:r])


@dataclass(frozen=True)
class Subspace:
    """A subspace of PG(n,q), identified by its canonical RREF basis."""

    n: int
    q: int
    dim: int
    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def from_vectors(cls, vectors, field: FieldCtx, n: int) -> "Subspace":
        canon = rref(vectors, field)
        if not canon:
            raise ValueError("empty span is not a projective subspace")
        return cls(n=n, q=field.q, dim=len(canon) - 1, basis=canon)

    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.basis for v in row)


def _canonical_points(dim: int, field: FieldCtx) -> list[tuple[int, ...]]:
    """All canonical point vectors of PG(dim, q): leftmost nonzero entry 1."""
    q = field.q
    pts = []
    for lead in range(dim + 1):
        for tail in itertools.product(range(q), repeat=dim - lead):
            pts.append((0,) * lead + (1,) + tail)
    pts.sort()
    return pts


def _enumerate_rref_bases(n: int, d: int, field: FieldCtx):
    """Yield every canonical (d+1) x (n+1) RREF basis over GF(q)."""
    q = field.q
    rows = d + 1
    cols = n + 1
    for pivots in itertools.combinations(range(cols), rows):
        pivot_set = set(pivots)
        free_cells = [
            (r, c)
            for r in range(rows)
            for c in range(pivots[r] + 1, cols)
            if c not in pivot_set
        ]
        for values in itertools.product(range(q), repeat=len(free_cells)):
            mat = [[0] * cols for _ in range(rows)]
            for r, p in enumerate(pivots):
                mat[r][p] = 1
            for (r, c), v in zip(free_cells, values):
                mat[r][c] = v
            yield tuple(tuple(row) for row in mat)


class GeometrySizeError(ValueError):
    """Raised when an enumeration would exceed the configured cap."""


class GeometryCtx:
    """Enumerated points and k-spaces of PG(n,q) with incidence structure."""

    def __init__(self, params: SchemeParams, cap: int = DEFAULT_ENUM_CAP):
        total = params.num_kspaces
        if total > cap:
            raise GeometrySizeError(
                f"PG({params.n},{params.q}) has {total} {params.k}-spaces, "
                f"exceeding the cap of {cap}"
            )
        self.params = params
        self.field = field_ctx(params.q)
        self.points: list[tuple[int, ...]] = _canonical_points(params.n, self.field)
        assert len(self.points) == params.num_points
        self.point_id: dict[tuple[int, ...], int] = {
            p: i for i, p in enumerate(self.points)
        }
        self._dim_cache: dict[int, list[Subspace]] = {}
        self.kspaces: list[Subspace] = self.subspaces_of_dim(params.k)
        assert len(self.kspaces) == total
        self.kspace_id: dict[tuple[tuple[int, ...], ...], int] = {
            s.basis: i for i, s in enumerate(self.kspaces)
        }
        assert len(self.kspace_id) == len(self.kspaces)  # duplicate-free
        self._coeff_points = _canonical_points(params.k, self.field)
        self.kspace_points: list[tuple[int, ...]] = []
        self.kspace_masks: list[int] = []
        pencil_masks = [0] * len(self.points)
        for idx, sub in enumerate(self.kspaces):
            ids = self._span_point_ids(sub.basis)
            mask = 0
            for pid in ids:
                mask |= 1 << pid
                pencil_masks[pid] |= 1 << idx
            self.kspace_points.append(ids)
            self.kspace_masks.append(mask)
        self.pencil_masks = pencil_masks
        self.full_kspace_mask = (1 << total) - 1
        self.full_point_mask = (1 << len(self.points)) - 1
        self._point_count_to_dim = {0: -1}
        acc = 0
        for d in range(params.n + 1):
            acc = qbinom(d + 1, 1, params.q)
            self._point_count_to_dim[acc] = d
        self._relations: list[list[int]] | None = None
        self._mask_cache: dict[tuple[tuple[int, ...], ...], int] = {}
        self._sub_spread_cache: dict[tuple[tuple[int, ...], ...], list[tuple[int, ...]]] = {}
        self._sub_spread_masks: dict[tuple[tuple[int, ...], ...], list[int]] = {}
        self._perm_maps: list[tuple[int, ...]] | None = None

    # -- enumeration ------------------------------------------------------

    def subspaces_of_dim(self, d: int) -> list[Subspace]:
        """All d-dimensional subspaces, lexicographic on flattened bases."""
        if not 0 <= d <= self.params.n:
            raise ValueError(f"dimension {d} out of range for PG({self.params.n},*)")
        if d not in self._dim_cache:
            subs = [
                Subspace(n=self.params.n, q=self.params.q, dim=d, basis=b)
                for b in _enumerate_rref_bases(self.params.n, d, self.field)
            ]
            subs.sort(key=Subspace.flat)
            self._dim_cache[d] = subs
        return self._dim_cache[d]

    def hyperplanes(self) -> list[Subspace]:
        return self.subspaces_of_dim(self.params.n - 1)

    def _span_point_ids(self, basis) -> tuple[int, ...]:
        coeffs = (
            self._coeff_points
            if len(basis) == self.params.k + 1
            else _canonical_points(len(basis) - 1, self.field)
        )
        field = self.field
        ids = []
        for combo in coeffs:
            vec = [0] * (self.params.n + 1)
            for c, row in zip(combo, basis):
                if c:
                    for j, v in enumerate(row):
                        if v:
                            vec[j] = field.add(vec[j], field.mul(c, v))
            ids.append(self.point_id[tuple(vec)])
        ids.sort()
        return tuple(ids)

    def point_mask(self, sub: Subspace) -> int:
        """Bitmask over point ids of the points of an arbitrary subspace."""
        if sub.dim == self.params.k and sub.basis in self.kspace_id:
            return self.kspace_masks[self.kspace_id[sub.basis]]
        if sub.basis not in self._mask_cache:
            mask = 0
            for pid in self._span_point_ids(sub.basis):
                mask |= 1 << pid
            self._mask_cache[sub.basis] = mask
        return self._mask_cache[sub.basis]

    # -- incidence queries -------------------------------------------------

    def intersection_dim(self, a: Subspace, b: Subspace) -> int:
        """Projective dimension of the meet (-1 when disjoint), via the rank
        of the stacked bases: dim(a) + dim(b) + 1 - rank."""
        if a.n != b.n or a.q != b.q:
            raise ValueError("subspaces live in different ambient spaces")
        stacked = rref(a.basis + b.basis, self.field)
        return a.dim + b.dim + 1 - len(stacked)

    def span(self, a: Subspace, b: Subspace) -> Subspace:
        return Subspace.from_vectors(a.basis + b.basis, self.field, self.params.n)

    def meet_dim_ids(self, i: int, j: int) -> int:
        """Meet dimension of two enumerated k-spaces from point counts."""
        common = (self.kspace_masks[i] & self.kspace_masks[j]).bit_count()
        return self._point_count_to_dim[common]

    def relation_masks(self) -> list[list[int]]:
        """rel[i][c] = bitmask of k-spaces meeting k-space c in dim k-i."""
        if self._relations is None:
            k = self.params.k
            total = len(self.kspaces)
            rel = [[0] * total for _ in range(k + 2)]
            for c in range(total):
                rel[0][c] |= 1 << c
                for d in range(c + 1, total):
                    i = k - self.meet_dim_ids(c, d)
                    rel[i][c] |= 1 << d
                    rel[i][d] |= 1 << c
            for c in range(total):  # the relations partition all pairs
                assert sum(rel[i][c] for i in range(k + 2)) == self.full_kspace_mask
            self._relations = rel
        return self._relations

    def disjointness_masks(self) -> list[int]:
        return self.relation_masks()[self.params.k + 1]

    def _ids_from_mask(self, mask: int) -> tuple[int, ...]:
        ids = []
        while mask:
            low = mask & -mask
            ids.append(low.bit_length() - 1)
            mask ^= low
        return tuple(ids)

    def pencil(self, point: int) -> tuple[int, ...]:
        """Ids of all k-spaces through a point."""
        return self._ids_from_mask(self.pencil_masks[point])

    def all_in(self, tau: Subspace) -> tuple[int, ...]:
        """Ids of all k-spaces contained in tau."""
        if tau.dim < self.params.k:
            raise ValueError(f"{tau.dim}-space cannot contain a {self.params.k}-space")
        tmask = self.point_mask(tau)
        return tuple(
            c
            for c, m in enumerate(self.kspace_masks)
            if m & ~tmask == 0
        )

    def pencil_in(self, point: int, tau: Subspace) -> tuple[int, ...]:
        """Ids of all k-spaces through a point and inside tau."""
        tmask = self.point_mask(tau)
        if not (tmask >> point) & 1:
            raise ValueError(f"point {point} does not lie in the given subspace")
        pmask = self.pencil_masks[point]
        return tuple(
            c
            for c, m in enumerate(self.kspace_masks)
            if (pmask >> c) & 1 and m & ~tmask == 0
        )

    # -- spreads and switching sets ----------------------------------------

    def spread_size(self) -> int:
        n, k, q = self.params.n, self.params.k, self.params.q
        return (q ** (n + 1) - 1) // (q ** (k + 1) - 1)

    def _require_spread_divisibility(self) -> None:
        n, k = self.params.n, self.params.k
        if (n + 1) % (k + 1):
            raise ValueError(
                f"no {k}-spread exists in PG({n},{self.params.q}): "
                f"{k + 1} does not divide {n + 1}"
            )

    def construct_spread(self) -> tuple[int, ...]:
        """The field-reduction spread: images of the points of
        PG((n+1)/(k+1)-1, q^(k+1)) under coordinate expansion."""
        self._require_spread_divisibility()
        n, k, q = self.params.n, self.params.k, self.params.q
        big = field_ctx(q ** (k + 1), cap=q ** (k + 1))
        red = FieldReduction(big, self.field)
        m = (n + 1) // (k + 1)
        alpha = big.p if big.e > 1 else 1
        members = []
        for pt in _canonical_points(m - 1, big):
            rows = []
            scalar = 1
            for _ in range(k + 1):
                rows.append(red.expand_vector(tuple(big.mul(scalar, w) for w in pt)))
                scalar = big.mul(scalar, alpha)
            sub = Subspace.from_vectors(rows, self.field, n)
            members.append(self.kspace_id[sub.basis])
        members.sort()
        spread = tuple(members)
        assert self._is_partition(spread, self.full_point_mask)
        return spread

    def _is_partition(self, ids, target_mask: int) -> bool:
        union = 0
        count = 0
        for c in ids:
            union |= self.kspace_masks[c]
            count += self.kspace_masks[c].bit_count()
        return union == target_mask and count == target_mask.bit_count()

    def is_partial_spread(self, ids) -> bool:
        union = 0
        for c in ids:
            m = self.kspace_masks[c]
            if union & m:
                return False
            union |= m
        return True

    def are_conjugate_switching_sets(self, r1, r2) -> bool:
        """Two disjoint partial spreads covering exactly the same points."""
        if set(r1) & set(r2):
            return False
        if not (self.is_partial_spread(r1) and self.is_partial_spread(r2)):
            return False
        union1 = 0
        for c in r1:
            union1 |= self.kspace_masks[c]
        union2 = 0
        for c in r2:
            union2 |= self.kspace_masks[c]
        return union1 == union2

    def _spread_backtrack(
        self, member_ids, target_mask: int
    ) -> list[tuple[int, ...]]:
        masks = self.kspace_masks
        by_point: dict[int, list[int]] = {}
        for c in member_ids:
            low_point = (masks[c] & -masks[c]).bit_length() - 1
            by_point.setdefault(low_point, []).append(c)
        found: list[tuple[int, ...]] = []
        chosen: list[int] = []

        def rec(covered: int) -> None:
            if covered == target_mask:
                found.append(tuple(chosen))
                return
            free = ~covered & target_mask
            point = (free & -free).bit_length() - 1
            for c in by_point.get(point, ()):
                m = masks[c]
                if m & covered:
                    continue
                if m & ~target_mask:
                    continue
                chosen.append(c)
                rec(covered | m)
                chosen.pop()

        rec(0)
        found.sort()
        return found

    def enumerate_all_spreads(
        self, max_points: int = DEFAULT_SPREAD_POINT_CAP
    ) -> list[tuple[int, ...]]:
        """Complete list of k-spreads, by exhaustive backtracking over the
        lowest uncovered point.  Guarded: refuses geometries with more than
        max_points points."""
        self._require_spread_divisibility()
        npts = len(self.points)
        if npts > max_points:
            raise GeometrySizeError(
                f"spread enumeration guard: {npts} points exceeds cap {max_points}"
            )
        return self._spread_backtrack(range(len(self.kspaces)), self.full_point_mask)

    def spreads_within(self, sigma: Subspace) -> list[tuple[int, ...]]:
        """All k-spreads of a (2k+1)-dimensional subspace, as id tuples."""
        if sigma.dim != 2 * self.params.k + 1:
            raise ValueError(
                f"need a {2 * self.params.k + 1}-space, got dim {sigma.dim}"
            )
        if sigma.basis not in self._sub_spread_cache:
            tmask = self.point_mask(sigma)
            members = self.all_in(sigma)
            self._sub_spread_cache[sigma.basis] = self._spread_backtrack(
                members, tmask
            )
        return self._sub_spread_cache[sigma.basis]

    def sigma_spread_masks(self, sigma: Subspace) -> list[int]:
        if sigma.basis not in self._sub_spread_masks:
            masks = []
            for s in self.spreads_within(sigma):
                m = 0
                for c in s:
                    m |= 1 << c
                masks.append(m)
            self._sub_spread_masks[sigma.basis] = masks
        return self._sub_spread_masks[sigma.basis]

    # -- collineations from coordinate permutations --------------------------

    def coordinate_permutation_maps(
        self, cap: int = DEFAULT_PERMUTATION_CAP
    ) -> list[tuple[int, ...]]:
        """Id permutations of the k-spaces induced by permuting the n+1
        coordinates.  Small-geometry tool for sampled spread generation and
        optional search symmetry reduction."""
        if self._perm_maps is None:
            import math

            n = self.params.n
            if math.factorial(n + 1) > cap:
                raise GeometrySizeError(
                    f"{math.factorial(n + 1)} coordinate permutations exceed cap {cap}"
                )
            maps = []
            for perm in itertools.permutations(range(n + 1)):
                img = []
                for sub in self.kspaces:
                    moved = [
                        tuple(row[perm[j]] for j in range(n + 1)) for row in sub.basis
                    ]
                    canon = rref(moved, self.field)
                    img.append(self.kspace_id[canon])
                maps.append(tuple(img))
            self._perm_maps = maps
        return self._perm_maps

    def permuted_spread_sample(self) -> list[tuple[int, ...]]:
        """Deduplicated images of the field-reduction spread under all
        coordinate permutations: a deterministic spread sample for
        geometries too large for exhaustive enumeration."""
        base = self.construct_spread()
        spreads = {base}
        for mapping in self.coordinate_permutation_maps():
            spreads.add(tuple(sorted(mapping[c] for c in base)))
        return sorted(spreads)


_CTX_CACHE: dict[tuple[int, int, int], GeometryCtx] = {}


def geometry(n: int, k: int, q: int, cap: int = DEFAULT_ENUM_CAP) -> GeometryCtx:
    """Shared GeometryCtx instances keyed by (n, k, q)."""
    key = (n, k, q)
    if key not in _CTX_CACHE:
        _CTX_CACHE[key] = GeometryCtx(SchemeParams(n=n, k=k, q=q), cap=cap)
    return _CTX_CACHE[key]

from collections import Counter

import pytest

from clkset import GeometrySizeError, SchemeParams, Subspace, geometry, qbinom
from clkset.geometry import GeometryCtx, rref


class TestEnumeration:
    def test_pg32_counts(self, pg32):
        assert len(pg32.points) == 15
        assert len(pg32.kspaces) == 35

    def test_pg23_self_dual_counts(self):
        ctx = geometry(2, 1, 3)
        assert len(ctx.points) == 13
        assert len(ctx.kspaces) == 13

    def test_pg42_planes(self, pg42_planes):
        assert len(pg42_planes.kspaces) == 155
        assert qbinom(5, 3, 2) == 155

    def test_counts_match_qbinom(self):
        for n, k, q in ((3, 1, 2), (4, 1, 2), (3, 1, 3), (4, 2, 2)):
            ctx = geometry(n, k, q)
            assert len(ctx.kspaces) == qbinom(n + 1, k + 1, q)
            assert len(ctx.points) == qbinom(n + 1, 1, q)

    def test_ordering_deterministic(self, pg32):
        flats = [s.flat() for s in pg32.kspaces]
        assert flats == sorted(flats)
        assert pg32.points == sorted(pg32.points)

    def test_canonicality(self, pg32, pg33):
        for ctx in (pg32, pg33):
            for sub in ctx.kspaces:
                assert rref(sub.basis, ctx.field) == sub.basis

    def test_points_per_kspace(self, pg33):
        per = qbinom(pg33.params.k + 1, 1, pg33.params.q)
        for ids in pg33.kspace_points:
            assert len(ids) == per

    def test_size_cap(self):
        with pytest.raises(GeometrySizeError):
            GeometryCtx(SchemeParams(n=9, k=2, q=5), cap=10**6)


class TestIntersection:
    def test_self_meet(self, pg32):
        s = pg32.kspaces[0]
        assert pg32.intersection_dim(s, s) == s.dim

    def test_concurrent_lines(self, pg32):
        pencil = pg32.pencil(0)
        a, b = pg32.kspaces[pencil[0]], pg32.kspaces[pencil[1]]
        assert pg32.intersection_dim(a, b) == 0

    def test_disjoint_lines(self, pg32):
        disj = pg32.disjointness_masks()
        a = 0
        b = (disj[a] & -disj[a]).bit_length() - 1
        sub_a, sub_b = pg32.kspaces[a], pg32.kspaces[b]
        assert pg32.intersection_dim(sub_a, sub_b) == -1
        stacked = rref(sub_a.basis + sub_b.basis, pg32.field)
        assert len(stacked) == 4

    def test_rank_route_matches_point_count_route(self, pg33):
        for a in range(0, 30, 7):
            for b in range(a, 130, 11):
                by_rank = pg33.intersection_dim(pg33.kspaces[a], pg33.kspaces[b])
                assert by_rank == pg33.meet_dim_ids(a, b)


class TestPencilsAndFlats:
    def test_pencil_sizes(self, pg32):
        for point in range(len(pg32.points)):
            assert len(pg32.pencil(point)) == 7

    def test_pencil_size_formula_everywhere(self):
        for n, k, q in ((4, 1, 2), (3, 1, 3), (4, 2, 2)):
            ctx = geometry(n, k, q)
            expected = qbinom(n, k, q)
            for point in range(len(ctx.points)):
                assert len(ctx.pencil(point)) == expected

    def test_all_in_hyperplane(self, pg32):
        for h in pg32.hyperplanes():
            assert len(pg32.all_in(h)) == 7  # Fano plane line count

    def test_all_in_size_formula(self, pg42_planes):
        tau = pg42_planes.hyperplanes()[0]
        assert len(pg42_planes.all_in(tau)) == qbinom(4, 3, 2)

    def test_pencil_in(self, pg32):
        tau = pg32.hyperplanes()[0]
        point = (pg32.point_mask(tau) & -pg32.point_mask(tau)).bit_length() - 1
        assert len(pg32.pencil_in(point, tau)) == 3  # qbinom(2,1,2)

    def test_pencil_in_rejects_outside_point(self, pg32):
        tau = pg32.hyperplanes()[0]
        outside = next(
            p for p in range(15) if not (pg32.point_mask(tau) >> p) & 1
        )
        with pytest.raises(ValueError):
            pg32.pencil_in(outside, tau)


class TestRelations:
    def test_partition_of_pairs(self, pg32):
        rel = pg32.relation_masks()
        for c in range(35):
            assert rel[0][c] == 1 << c
            assert sum(rel[i][c] for i in range(3)) == pg32.full_kspace_mask

    def test_symmetry(self, pg33):
        rel = pg33.relation_masks()
        for i in range(3):
            for a in range(0, 130, 13):
                for b in range(0, 130, 7):
                    assert ((rel[i][a] >> b) & 1) == ((rel[i][b] >> a) & 1)

    def test_disjoint_count_matches_formula(self, pg32):
        from clkset import count_disjoint

        disj = pg32.disjointness_masks()
        for c in range(35):
            assert disj[c].bit_count() == count_disjoint(3, 2, 1, 1)


class TestSpreads:
    def test_pg32_all_spreads(self, pg32):
        spreads = pg32.enumerate_all_spreads()
        assert len(spreads) == 56
        for s in spreads:
            covered = 0
            for c in s:
                assert covered & pg32.kspace_masks[c] == 0
                covered |= pg32.kspace_masks[c]
            assert covered == pg32.full_point_mask

    def test_pg32_spread_transitivity_counts(self, pg32):
        # every line lies in n0 / qbinom(3,1,2) spreads; every disjoint pair
        # in that count divided by q^(k^2+k) * qbinom(n-k-1,k)
        spreads = pg32.enumerate_all_spreads()
        per_line = Counter(c for s in spreads for c in s)
        assert set(per_line.values()) == {8}
        disj = pg32.disjointness_masks()
        pair_counts = set()
        for a in range(35):
            m = disj[a]
            while m:
                low = m & -m
                b = low.bit_length() - 1
                m ^= low
                if b > a:
                    pair_counts.add(
                        sum(1 for s in spreads if a in s and b in s)
                    )
        assert pair_counts == {2}

    def test_pg33_spread_counts_uniform(self, pg33):
        spreads = pg33.enumerate_all_spreads()
        assert len(spreads) == 8424
        per_line = Counter(c for s in spreads for c in s)
        assert set(per_line.values()) == {8424 // 13}
        # spreads through a fixed disjoint pair: n1 / (q^2 * qbinom(1,1,3))
        disj = pg33.disjointness_masks()
        a = 0
        b = (disj[0] & -disj[0]).bit_length() - 1
        through_pair = sum(1 for s in spreads if a in s and b in s)
        assert through_pair == (8424 // 13) // 9

    def test_rejected_without_divisibility(self):
        ctx = geometry(2, 1, 2)
        with pytest.raises(ValueError):
            ctx.enumerate_all_spreads()

    def test_guard_on_large_geometry(self, pg52):
        with pytest.raises(GeometrySizeError):
            pg52.enumerate_all_spreads()

    def test_spreads_within_sigma(self, pg52):
        sigma = pg52.subspaces_of_dim(3)[0]
        spreads = pg52.spreads_within(sigma)
        assert len(spreads) == 56
        tmask = pg52.point_mask(sigma)
        for s in spreads:
            covered = 0
            for c in s:
                covered |= pg52.kspace_masks[c]
            assert covered == tmask

    def test_permuted_spread_sample(self, pg33):
        sample = pg33.permuted_spread_sample()
        assert pg33.construct_spread() in sample
        for s in sample:
            assert pg33.is_partial_spread(s) and len(s) == 10


class TestSwitchingSets:
    def test_spread_differences_are_conjugate(self, pg32):
        spreads = pg32.enumerate_all_spreads()
        for s1 in spreads[:8]:
            for s2 in spreads[:8]:
                if s1 == s2:
                    continue
                r1 = tuple(c for c in s1 if c not in s2)
                r2 = tuple(c for c in s2 if c not in s1)
                assert pg32.are_conjugate_switching_sets(r1, r2)

    def test_identical_sets_are_not_conjugate(self, pg32):
        spread = pg32.enumerate_all_spreads()[0]
        assert not pg32.are_conjugate_switching_sets(spread, spread)

    def test_regulus_pairs_exist(self, pg32):
        # spreads sharing two lines differ in a regulus/opposite-regulus swap
        spreads = pg32.enumerate_all_spreads()
        found = False
        for i, s1 in enumerate(spreads):
            for s2 in spreads[i + 1 :]:
                shared = len(set(s1) & set(s2))
                assert shared in (0, 1, 2)
                if shared == 2:
                    r1 = tuple(c for c in s1 if c not in s2)
                    r2 = tuple(c for c in s2 if c not in s1)
                    assert len(r1) == len(r2) == 3
                    assert pg32.are_conjugate_switching_sets(r1, r2)
                    found = True
        assert found

    def test_non_partial_spread_rejected(self, pg32):
        pencil = pg32.pencil(0)[:2]
        assert not pg32.is_partial_spread(pencil)
        assert not pg32.are_conjugate_switching_sets(pencil, (30, 31))


class TestPermutationMaps:
    def test_maps_are_collineations(self, pg32):
        rel = pg32.relation_masks()
        for mapping in pg32.coordinate_permutation_maps()[:6]:
            assert sorted(mapping) == list(range(35))
            for a in range(0, 35, 5):
                for b in range(0, 35, 7):
                    i = next(
                        i for i in range(3) if (rel[i][a] >> b) & 1
                    )
                    assert (rel[i][mapping[a]] >> mapping[b]) & 1


class TestSubspaceFromVectors:
    def test_recanonicalization(self, pg32):
        field = pg32.field
        sub = pg32.kspaces[20]
        doubled = sub.basis + sub.basis
        again = Subspace.from_vectors(doubled, field, 3)
        assert again == sub

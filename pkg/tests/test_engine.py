"""Tests for placement, delivery, decoding, and key update."""

import random
from fractions import Fraction

import pytest

from splfr.engine import (
    DeliveryPayload,
    EngineError,
    Library,
    Mode,
    NonDivisibleB,
    Randomness,
    decode,
    deliver,
    measure,
    place,
    privacy_key,
    split,
    update_round,
)
from splfr.field import FieldContext
from splfr.pda import STAR, man_pda, memory_load, validate

GF2 = FieldContext.prime(2)
GF3 = FieldContext.prime(3)

TOY = validate(
    (
        (STAR, 1, 2),
        (1, STAR, 3),
        (2, 3, STAR),
    )
)


def unit_demands(k, n):
    return tuple(tuple(1 if i == (j % n) else 0 for i in range(n)) for j in range(k))


def make_state(arr, n, b, ctx, seed, mode=Mode.SPLFR):
    rng = random.Random(seed)
    library = Library.random(ctx, n, b, rng)
    randomness = Randomness.generate(arr, n, b, ctx, rng)
    return place(arr, library, randomness, mode)


class TestSplit:
    def test_three_packets(self):
        assert split((1, 2, 3), 3) == ((1,), (2,), (3,))

    def test_identity(self):
        assert split((4, 5, 6), 1) == ((4, 5, 6),)

    def test_non_divisible(self):
        with pytest.raises(NonDivisibleB):
            split((1, 2, 3, 4), 3)

    def test_concatenation_inverts(self):
        file = tuple(range(12))
        packets = split(file, 4)
        assert tuple(x for pkt in packets for x in pkt) == file


class TestPrivacyKey:
    def test_unit_vector_selects_packet(self):
        lib = Library(GF3, ((1, 2, 0), (2, 0, 1)))
        arr = man_pda(3, 1)
        key = privacy_key(lib, arr, (0, 1), 2)
        assert key == split(lib.files[1], 3)[2]

    def test_zero_vector(self):
        lib = Library(GF3, ((1, 2, 0), (2, 0, 1)))
        assert privacy_key(lib, man_pda(3, 1), (0, 0), 0) == (0,)

    def test_gf2_is_xor_of_selected_packets(self):
        rng = random.Random(3)
        lib = Library.random(GF2, 4, 3, rng)
        p = (1, 0, 1, 1)
        for i in range(3):
            want = 0
            for n, coeff in enumerate(p):
                if coeff:
                    want ^= split(lib.files[n], 3)[i][0]
            assert privacy_key(lib, TOY, p, i) == (want,)


class TestPlace:
    def test_toy_cache_layout(self):
        state = make_state(TOY, 4, 3, GF2, seed=1)
        for k in range(3):
            cache = state.caches[k]
            # one starred row holding all four packets, two superposition keys
            assert set(cache.uncoded) == {k}
            assert len(cache.uncoded[k]) == 4
            assert set(cache.coded) == set(range(3)) - {k}

    def test_toy_superposition_values(self):
        state = make_state(TOY, 4, 3, GF2, seed=1)
        lib, rnd = state.library, state.randomness
        # user 1, row 2 carries symbol 1: record must equal V_1 + T_{2,1}
        t_block = privacy_key(lib, TOY, rnd.privacy_vectors[0], 1)
        want = GF2.vec_add(rnd.security_keys[0], t_block)
        assert state.caches[0].coded[1] == want

    def test_all_star_caches_everything(self):
        arr = validate([[STAR, STAR]])
        state = make_state(arr, 3, 4, GF3, seed=2)
        m, _ = memory_load(arr, 3)
        assert m == 3
        for cache in state.caches:
            assert cache.symbols == 3 * 4  # N * B symbols = M * B

    def test_lfr_mode_records_are_zero(self):
        state = make_state(TOY, 4, 3, GF2, seed=5, mode=Mode.LFR)
        for cache in state.caches:
            for block in cache.coded.values():
                assert all(v == 0 for v in block)

    def test_cache_budget_exact(self):
        for k, t, n, b in [(3, 1, 4, 3), (4, 2, 3, 12), (4, 0, 2, 1)]:
            arr = man_pda(k, t)
            state = make_state(arr, n, b, GF3, seed=9)
            want = (arr.z * n + arr.f - arr.z) * (b // arr.f)
            m, _ = memory_load(arr, n)
            for cache in state.caches:
                assert cache.symbols == want
                assert cache.symbols <= int(m * b)

    def test_shape_mismatch(self):
        rng = random.Random(0)
        lib = Library.random(GF2, 4, 3, rng)
        bad = Randomness.zeros(man_pda(4, 2), 4, 6)
        with pytest.raises(EngineError):
            place(TOY, lib, bad, Mode.SPLFR)

    def test_non_divisible_b(self):
        rng = random.Random(0)
        lib = Library.random(GF2, 4, 4, rng)
        rnd = Randomness.zeros(TOY, 4, 3)
        with pytest.raises(NonDivisibleB):
            place(TOY, lib, rnd, Mode.SPLFR)


class TestDeliver:
    def test_coeffs_mask_demands(self):
        state = make_state(TOY, 4, 3, GF2, seed=4)
        demands = unit_demands(3, 4)
        payload = deliver(state, demands)
        for k in range(3):
            want = GF2.vec_add(state.randomness.privacy_vectors[k], demands[k])
            assert payload.coeff_vectors[k] == want

    def test_slfr_coeffs_equal_demands(self):
        state = make_state(TOY, 4, 3, GF2, seed=4, mode=Mode.SLFR)
        demands = unit_demands(3, 4)
        payload = deliver(state, demands)
        assert payload.coeff_vectors == demands

    def test_slfr_equals_zero_privacy_substitution(self):
        # zeroing the privacy vectors by hand must give a byte-identical payload
        rng = random.Random(11)
        lib = Library.random(GF2, 4, 3, rng)
        rnd = Randomness.generate(TOY, 4, 3, GF2, rng)
        zero_p = Randomness(
            security_keys=rnd.security_keys,
            privacy_vectors=tuple((0,) * 4 for _ in range(3)),
        )
        demands = unit_demands(3, 4)
        a = deliver(place(TOY, lib, rnd, Mode.SLFR), demands)
        b = deliver(place(TOY, lib, zero_p, Mode.SPLFR), demands)
        assert a == b

    def test_lfr_zero_demands_zero_blocks(self):
        state = make_state(TOY, 4, 3, GF2, seed=4, mode=Mode.LFR)
        demands = tuple((0, 0, 0, 0) for _ in range(3))
        payload = deliver(state, demands)
        assert all(all(v == 0 for v in y) for y in payload.blocks)

    def test_lfr_blocks_are_plain_multicast(self):
        # with both key families off, each block is the bare coded multicast
        state = make_state(TOY, 4, 3, GF2, seed=8, mode=Mode.LFR)
        demands = unit_demands(3, 4)
        payload = deliver(state, demands)
        packets = [split(f, 3) for f in state.library.files]
        for s in range(1, 4):
            want = (0,)
            for i, j in TOY.symbol_positions(s):
                for n in range(4):
                    if demands[j][n]:
                        want = GF2.vec_add(want, packets[n][i])
            assert payload.blocks[s - 1] == want

    def test_wrong_demand_shape(self):
        state = make_state(TOY, 4, 3, GF2, seed=4)
        with pytest.raises(EngineError):
            deliver(state, unit_demands(2, 4))
        with pytest.raises(EngineError):
            deliver(state, unit_demands(3, 3))


class TestDecode:
    def test_toy_all_users_unit_demands(self):
        state = make_state(TOY, 4, 3, GF2, seed=7)
        demands = unit_demands(3, 4)
        payload = deliver(state, demands)
        for k in range(3):
            got = decode(state.user_view(k), payload, demands[k])
            assert got == state.library.combine(demands[k])

    def test_zero_demand_gives_zero_file(self):
        state = make_state(TOY, 4, 3, GF2, seed=7)
        demands = tuple((0, 0, 0, 0) for _ in range(3))
        payload = deliver(state, demands)
        assert decode(state.user_view(0), payload, demands[0]) == (0, 0, 0)

    def test_random_instances_against_direct_combination(self):
        for n in (2, 3, 4, 5):
            for k in (2, 3, 4):
                for q in (2, 3):
                    ctx = FieldContext.prime(q)
                    for t in range(k + 1):
                        arr = man_pda(k, t)
                        rng = random.Random(1000 * n + 100 * k + 10 * q + t)
                        lib = Library.random(ctx, n, arr.f, rng)
                        rnd = Randomness.generate(arr, n, arr.f, ctx, rng)
                        state = place(arr, lib, rnd, Mode.SPLFR)
                        demands = tuple(
                            ctx.random_vector(n, rng) for _ in range(k)
                        )
                        payload = deliver(state, demands)
                        for user in range(k):
                            got = decode(state.user_view(user), payload, demands[user])
                            assert got == lib.combine(demands[user])

    def test_all_modes_decode(self):
        for mode in Mode:
            state = make_state(TOY, 4, 3, GF2, seed=13, mode=mode)
            demands = unit_demands(3, 4)
            payload = deliver(state, demands)
            for k in range(3):
                got = decode(state.user_view(k), payload, demands[k])
                assert got == state.library.combine(demands[k])

    def test_view_withholds_global_state(self):
        # decoder isolation: the view exposes only the array, field, and
        # the user's own cache
        state = make_state(TOY, 4, 3, GF2, seed=7)
        view = state.user_view(0)
        assert not hasattr(view, "library")
        assert not hasattr(view, "randomness")
        assert not hasattr(view, "caches")

    def test_payload_mismatch(self):
        state = make_state(TOY, 4, 3, GF2, seed=7)
        demands = unit_demands(3, 4)
        payload = deliver(state, demands)
        bad = DeliveryPayload(payload.coeff_vectors, payload.blocks[:2])
        with pytest.raises(EngineError):
            decode(state.user_view(0), bad, demands[0])


class TestMeasure:
    def test_toy(self):
        state = make_state(TOY, 4, 3, GF2, seed=1)
        meas = measure(state)
        assert meas.m_exact == 2
        assert meas.r_asymptotic == 1
        assert meas.tx_symbols == 3 * 1 + 3 * 4
        assert meas.randomness_log2q_units == 15

    def test_all_star(self):
        arr = validate([[STAR, STAR, STAR]])
        state = make_state(arr, 2, 5, GF3, seed=1)
        meas = measure(state)
        assert meas.r_asymptotic == 0
        assert meas.tx_symbols == 3 * 2

    def test_man_randomness_budget(self):
        arr = man_pda(4, 2)
        state = make_state(arr, 3, 12, GF3, seed=1)
        meas = measure(state)
        assert meas.randomness_log2q_units == arr.s * (12 // arr.f) + 3 * 4
        assert meas.m_exact == Fraction(arr.z * 3 + arr.f - arr.z, arr.f) * 12 / 12


class TestUpdateRound:
    def test_zero_update_is_identity(self):
        state = make_state(TOY, 4, 3, GF2, seed=21)
        demands = unit_demands(3, 4)
        zeros = tuple((0,) for _ in range(3))
        new = update_round(state, demands, zeros, (0, 0, 0))
        assert new.caches == state.caches
        assert new.randomness == state.randomness

    def test_matches_place_with_accumulated_keys(self):
        ctx = GF3
        arr = man_pda(3, 1)
        rng = random.Random(31)
        lib = Library.random(ctx, 3, 3, rng)
        rnd = Randomness.generate(arr, 3, 3, ctx, rng)
        state = place(arr, lib, rnd, Mode.SPLFR)
        demands = tuple(ctx.random_vector(3, rng) for _ in range(3))
        fresh = tuple(ctx.random_vector(1, rng) for _ in range(arr.s))
        coeffs = tuple(ctx.random_element(rng) for _ in range(3))

        updated = update_round(state, demands, fresh, coeffs)

        accumulated = Randomness(
            security_keys=tuple(
                ctx.vec_add(v, u) for v, u in zip(rnd.security_keys, fresh)
            ),
            privacy_vectors=tuple(
                ctx.vec_add(p, ctx.vec_scale(c, d))
                for p, c, d in zip(rnd.privacy_vectors, coeffs, demands)
            ),
        )
        scratch = place(arr, lib, accumulated, Mode.SPLFR)
        assert updated.caches == scratch.caches
        assert updated.randomness == scratch.randomness

    def test_three_round_trip(self):
        ctx = GF2
        arr = man_pda(3, 1)
        rng = random.Random(41)
        lib = Library.random(ctx, 4, 6, rng)
        rnd = Randomness.generate(arr, 4, 6, ctx, rng)
        state = place(arr, lib, rnd, Mode.SPLFR)
        for _ in range(3):
            demands = tuple(ctx.random_vector(4, rng) for _ in range(3))
            payload = deliver(state, demands)
            for k in range(3):
                got = decode(state.user_view(k), payload, demands[k])
                assert got == lib.combine(demands[k])
            fresh = tuple(ctx.random_vector(2, rng) for _ in range(arr.s))
            coeffs = tuple(ctx.random_element(rng) for _ in range(3))
            state = update_round(state, demands, fresh, coeffs)

    def test_shape_errors(self):
        state = make_state(TOY, 4, 3, GF2, seed=21)
        demands = unit_demands(3, 4)
        with pytest.raises(EngineError):
            update_round(state, demands, ((0,),), (0, 0, 0))
        with pytest.raises(EngineError):
            update_round(state, demands, tuple((0,) for _ in range(3)), (0, 0))

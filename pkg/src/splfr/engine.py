"""Key-superposition caching scheme: placement, delivery, decoding, update.

Given a (K,F,Z,S) array, each file is split into F packets.  The server
draws S uniform security keys (one block per multicast signal) and K
uniform coefficient vectors generating the per-user privacy keys.  Each
user caches the uncoded packets of its starred rows plus, for every
ordinary entry in its column, the field-sum of the matching security key
and its privacy key.  Delivery masks each user's demand with its privacy
vector and pads each multicast block with its security key, so the signal
is simultaneously one-time-pad secure and demand-hiding.

States are immutable once placed; deliver/decode are pure, and update
rounds produce a new state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

from .field import FieldContext
from .pda import PDA, STAR


class EngineError(ValueError):
    """Shape mismatch or precondition violation in the scheme pipeline."""


class NonDivisibleB(EngineError):
    """File length not divisible by the packet count F."""


class Mode(Enum):
    """Which key families are active.

    SPLFR uses both; PLFR zeroes the security keys, SLFR zeroes the
    privacy vectors, LFR zeroes both.
    """

    SPLFR = "splfr"
    PLFR = "plfr"
    SLFR = "slfr"
    LFR = "lfr"

    @property
    def security_keys_active(self) -> bool:
        return self in (Mode.SPLFR, Mode.SLFR)

    @property
    def privacy_keys_active(self) -> bool:
        return self in (Mode.SPLFR, Mode.PLFR)


Vector = tuple[int, ...]


@dataclass(frozen=True)
class Library:
    """N files of B symbols each over a common field."""

    ctx: FieldContext
    files: tuple[Vector, ...]

    def __post_init__(self):
        if not self.files:
            raise EngineError("library must contain at least one file")
        b = len(self.files[0])
        if any(len(f) != b for f in self.files):
            raise EngineError("all files must have the same length")

    @property
    def n_files(self) -> int:
        return len(self.files)

    @property
    def b(self) -> int:
        return len(self.files[0])

    @classmethod
    def random(cls, ctx: FieldContext, n: int, b: int, rng: random.Random) -> "Library":
        return cls(ctx, tuple(ctx.random_vector(b, rng) for _ in range(n)))

    def combine(self, demand: Vector) -> Vector:
        """The demanded linear combination sum_n demand[n] * W_n, full length."""
        if len(demand) != self.n_files:
            raise EngineError(f"demand length {len(demand)} != N={self.n_files}")
        ctx = self.ctx
        out = (0,) * self.b
        for coeff, file in zip(demand, self.files):
            if coeff:
                out = ctx.vec_add(out, ctx.vec_scale(coeff, file))
        return out


def split(file: Sequence[int], f: int) -> tuple[Vector, ...]:
    """Split a file into f contiguous equal-size packets."""
    b = len(file)
    if f <= 0 or b % f != 0:
        raise NonDivisibleB(f"packet count {f} does not divide file length {b}")
    size = b // f
    return tuple(tuple(file[i * size : (i + 1) * size]) for i in range(f))


@dataclass(frozen=True)
class Randomness:
    """Server randomness: S security key blocks and K privacy vectors."""

    security_keys: tuple[Vector, ...]  # S vectors of length B/F
    privacy_vectors: tuple[Vector, ...]  # K vectors of length N

    @classmethod
    def generate(
        cls, pda: PDA, n: int, b: int, ctx: FieldContext, rng: random.Random
    ) -> "Randomness":
        if b % pda.f != 0:
            raise NonDivisibleB(f"F={pda.f} does not divide B={b}")
        block = b // pda.f
        return cls(
            security_keys=tuple(ctx.random_vector(block, rng) for _ in range(pda.s)),
            privacy_vectors=tuple(ctx.random_vector(n, rng) for _ in range(pda.k)),
        )

    @classmethod
    def zeros(cls, pda: PDA, n: int, b: int) -> "Randomness":
        block = b // pda.f
        return cls(
            security_keys=tuple((0,) * block for _ in range(pda.s)),
            privacy_vectors=tuple((0,) * n for _ in range(pda.k)),
        )

    def masked(self, mode: Mode) -> "Randomness":
        """Zero out the key families that the mode disables."""
        v = self.security_keys
        p = self.privacy_vectors
        if not mode.security_keys_active:
            v = tuple(tuple(0 for _ in key) for key in v)
        if not mode.privacy_keys_active:
            p = tuple(tuple(0 for _ in vec) for vec in p)
        return Randomness(v, p)

    def check_shapes(self, pda: PDA, n: int, b: int) -> None:
        block = b // pda.f
        if len(self.security_keys) != pda.s or any(
            len(v) != block for v in self.security_keys
        ):
            raise EngineError(f"expected {pda.s} security keys of length {block}")
        if len(self.privacy_vectors) != pda.k or any(
            len(p) != n for p in self.privacy_vectors
        ):
            raise EngineError(f"expected {pda.k} privacy vectors of length {n}")


@dataclass(frozen=True)
class UserCache:
    """Cache of one user: uncoded packet rows plus coded superposition keys.

    ``uncoded[i]`` holds the i-th packet of every file (rows where the
    user's column has a star); ``coded[i]`` holds one block per ordinary
    entry in the user's column.
    """

    uncoded: dict[int, tuple[Vector, ...]]
    coded: dict[int, Vector]

    @property
    def symbols(self) -> int:
        n_unc = sum(len(pkts[0]) * len(pkts) for pkts in self.uncoded.values())
        n_cod = sum(len(v) for v in self.coded.values())
        return n_unc + n_cod

    def key(self) -> tuple:
        """Hashable canonical form, used by the exact audits."""
        return (
            tuple(sorted(self.uncoded.items())),
            tuple(sorted(self.coded.items())),
        )


@dataclass(frozen=True)
class UserView:
    """Everything user k may consult while decoding: its cache and the array.

    Deliberately excludes the library, the raw randomness, and every other
    user's cache.
    """

    pda: PDA
    ctx: FieldContext
    user: int  # 0-based column index
    cache: UserCache


@dataclass(frozen=True)
class SchemeState:
    """A placed system: array, library, effective randomness, and all caches.

    ``randomness`` is already masked for ``mode``, so the stored key values
    are exactly the ones the caches were built from.
    """

    pda: PDA
    library: Library
    randomness: Randomness
    mode: Mode
    caches: tuple[UserCache, ...]

    def user_view(self, k: int) -> UserView:
        return UserView(self.pda, self.library.ctx, k, self.caches[k])

    @property
    def block_size(self) -> int:
        return self.library.b // self.pda.f


class DeliveryPayload(NamedTuple):
    """The broadcast signal: K coefficient vectors and S multicast blocks."""

    coeff_vectors: tuple[Vector, ...]
    blocks: tuple[Vector, ...]


class Measure(NamedTuple):
    m_exact: Fraction
    r_asymptotic: Fraction
    tx_symbols: int
    randomness_log2q_units: int  # randomness budget = this many times log2(q) bits


def privacy_key(library: Library, pda: PDA, p_j: Vector, i: int) -> Vector:
    """The block sum_n p_j[n] * W_{n,i} for packet row i (0-based)."""
    ctx = library.ctx
    packets = [split(file, pda.f)[i] for file in library.files]
    block = (0,) * (library.b // pda.f)
    for coeff, pkt in zip(p_j, packets):
        if coeff:
            block = ctx.vec_add(block, ctx.vec_scale(coeff, pkt))
    return block


def place(pda: PDA, library: Library, randomness: Randomness, mode: Mode) -> SchemeState:
    """Fill every cache: uncoded packets under stars, superposition keys elsewhere."""
    ctx = library.ctx
    b, n = library.b, library.n_files
    if b % pda.f != 0:
        raise NonDivisibleB(f"F={pda.f} does not divide B={b}")
    randomness.check_shapes(pda, n, b)
    effective = randomness.masked(mode)

    packets = [split(file, pda.f) for file in library.files]  # [n][i] -> block
    caches = []
    for k in range(pda.k):
        uncoded: dict[int, tuple[Vector, ...]] = {}
        coded: dict[int, Vector] = {}
        for i in range(pda.f):
            entry = pda.entries[i][k]
            if entry is STAR:
                uncoded[i] = tuple(packets[nn][i] for nn in range(n))
            else:
                t_block = (0,) * (b // pda.f)
                p_k = effective.privacy_vectors[k]
                for coeff, file_packets in zip(p_k, packets):
                    if coeff:
                        t_block = ctx.vec_add(t_block, ctx.vec_scale(coeff, file_packets[i]))
                coded[i] = ctx.vec_add(effective.security_keys[entry - 1], t_block)
        caches.append(UserCache(uncoded=uncoded, coded=coded))

    return SchemeState(
        pda=pda, library=library, randomness=effective, mode=mode, caches=tuple(caches)
    )


def deliver(state: SchemeState, demands: Sequence[Vector]) -> DeliveryPayload:
    """Build the broadcast signal for one demand tuple."""
    pda, lib = state.pda, state.library
    ctx = lib.ctx
    if len(demands) != pda.k:
        raise EngineError(f"expected {pda.k} demand vectors, got {len(demands)}")
    for d in demands:
        if len(d) != lib.n_files:
            raise EngineError(f"demand length {len(d)} != N={lib.n_files}")
        for value in d:
            ctx.check(value)

    coeffs = tuple(
        ctx.vec_add(state.randomness.privacy_vectors[k], demands[k])
        for k in range(pda.k)
    )

    packets = [split(file, pda.f) for file in lib.files]
    blocks = []
    for s in range(1, pda.s + 1):
        y = state.randomness.security_keys[s - 1]
        for i, j in pda.symbol_positions(s):
            for nn in range(lib.n_files):
                coeff = coeffs[j][nn]
                if coeff:
                    y = ctx.vec_add(y, ctx.vec_scale(coeff, packets[nn][i]))
        blocks.append(y)
    return DeliveryPayload(coeff_vectors=coeffs, blocks=tuple(blocks))


def decode(view: UserView, payload: DeliveryPayload, demand: Vector) -> Vector:
    """Recover the demanded combination from the user's cache and the signal.

    Consumes only the user's own cache, the broadcast, and the demand;
    returns the full-length B-symbol combination.
    """
    pda, ctx, k = view.pda, view.ctx, view.user
    if len(payload.blocks) != pda.s or len(payload.coeff_vectors) != pda.k:
        raise EngineError("payload shape does not match the array")
    out_packets: list[Vector] = []
    for h in range(pda.f):
        entry = pda.entries[h][k]
        if entry is STAR:
            # direct computation from the cached uncoded packets
            pkts = view.cache.uncoded[h]
            block = (0,) * len(pkts[0])
            for coeff, pkt in zip(demand, pkts):
                if coeff:
                    block = ctx.vec_add(block, ctx.vec_scale(coeff, pkt))
            out_packets.append(block)
        else:
            s = entry
            block = payload.blocks[s - 1]
            # cancel the cached superposition key for this row
            block = ctx.vec_sub(block, view.cache.coded[h])
            # cancel the cross terms of the other users sharing symbol s;
            # the defining conditions guarantee their rows are starred here
            for i, j in pda.symbol_positions(s):
                if j == k:
                    continue
                pkts = view.cache.uncoded[i]
                q_j = payload.coeff_vectors[j]
                for coeff, pkt in zip(q_j, pkts):
                    if coeff:
                        block = ctx.vec_sub(block, ctx.vec_scale(coeff, pkt))
            # what is left is sum_n q_{k,n} W_{n,h} - sum_n p_{k,n} W_{n,h}
            out_packets.append(block)
    return tuple(sym for pkt in out_packets for sym in pkt)


def measure(state: SchemeState) -> Measure:
    """Exact memory, asymptotic load, transmitted symbols, randomness budget."""
    pda, lib = state.pda, state.library
    b = lib.b
    cached = state.caches[0].symbols if state.caches else 0
    block = b // pda.f
    tx = pda.s * block + pda.k * lib.n_files
    return Measure(
        m_exact=Fraction(cached, b),
        r_asymptotic=Fraction(pda.s, pda.f),
        tx_symbols=tx,
        randomness_log2q_units=pda.s * block + lib.n_files * pda.k,
    )


def update_round(
    state: SchemeState,
    demands: Sequence[Vector],
    fresh_security_keys: Sequence[Vector],
    local_coeffs: Sequence[int],
) -> SchemeState:
    """Refresh the superposition keys after a delivery round.

    Each user k adds V^u to its coded records through the public fresh keys
    and shifts its privacy component by c_k times its decoded combination,
    both computable from the user's own view.  The security keys become
    V + V^u and the privacy vectors p_k + c_k * d_k.  Key families disabled
    by the state's mode stay zero: their updates are masked the same way.
    """
    pda, lib = state.pda, state.library
    ctx = lib.ctx
    block = state.block_size
    if len(fresh_security_keys) != pda.s or any(
        len(v) != block for v in fresh_security_keys
    ):
        raise EngineError(f"expected {pda.s} fresh keys of length {block}")
    if len(local_coeffs) != pda.k:
        raise EngineError(f"expected {pda.k} local coefficients")
    if len(demands) != pda.k:
        raise EngineError(f"expected {pda.k} demand vectors")

    mode = state.mode
    fresh = list(fresh_security_keys)
    coeffs = list(local_coeffs)
    if not mode.security_keys_active:
        fresh = [(0,) * block for _ in fresh]
    if not mode.privacy_keys_active:
        coeffs = [0 for _ in coeffs]

    payload = deliver(state, demands)
    new_caches = []
    for k in range(pda.k):
        decoded = decode(state.user_view(k), payload, tuple(demands[k]))
        decoded_packets = split(decoded, pda.f)
        coded = dict(state.caches[k].coded)
        for i, old in coded.items():
            entry = pda.entries[i][k]
            delta = fresh[entry - 1]
            if coeffs[k]:
                delta = ctx.vec_add(delta, ctx.vec_scale(coeffs[k], decoded_packets[i]))
            coded[i] = ctx.vec_add(old, delta)
        new_caches.append(UserCache(uncoded=state.caches[k].uncoded, coded=coded))

    new_randomness = Randomness(
        security_keys=tuple(
            ctx.vec_add(v, u)
            for v, u in zip(state.randomness.security_keys, fresh)
        ),
        privacy_vectors=tuple(
            ctx.vec_add(p, ctx.vec_scale(c, tuple(d)))
            for p, c, d in zip(state.randomness.privacy_vectors, coeffs, demands)
        ),
    )
    return SchemeState(
        pda=pda,
        library=lib,
        randomness=new_randomness,
        mode=mode,
        caches=tuple(new_caches),
    )

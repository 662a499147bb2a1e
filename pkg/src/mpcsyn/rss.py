"""Three-party replicated secret sharing over Z_{2^64}.

A value x is split as x = c0 + c1 + c2 (mod 2^64); party i holds the pair
(c_i, c_{i+1 mod 3}). Any two parties can reconstruct, a single party's
view is uniform. The engine simulates the three parties in one process:
each party's state is its own pair of arrays, and every interactive step
moves data through an explicit logged message, so transcripts reflect the
real communication pattern (3 messages per multiplication, 0 for linear
work).

Everything is vectorized: a ShareVec carries numpy uint64 arrays of any
shape, protocols batch elementwise, and message sizes are 8 bytes per
element.

``PlainEngine`` exposes the identical operation surface on plaintext
words. It is the trusted-aggregator (cdp) backend: same fixed-point
semantics, same DP-level randomness streams, no communication. Because
the two engines share the "noise"-purpose randomness streams and all
revealed MPC values are deterministic in the inputs (masks and resharing
randomness cancel), running the same protocol code on either engine
yields bit-identical results.
"""

from __future__ import annotations

import functools
import json
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .fixed import F, HALF, as_word, encode, trunc_word

U64 = np.uint64
MASK64 = 0xFFFFFFFFFFFFFFFF


def _wrapping(fn):
    """Ring arithmetic wraps mod 2^64 by design; numpy's scalar-overflow
    warning (which fires on 0-d operands) is noise here."""

    @functools.wraps(fn)
    def inner(*args, **kwargs):
        with np.errstate(over="ignore"):
            return fn(*args, **kwargs)

    return inner

# purpose tags for pairwise PRF streams (numpy Philox, keyed by
# (master seed, purpose, pair)). Purposes are separated so that the
# DP-level "noise" stream is consumed identically by the mpc and cdp
# backends regardless of how many masked openings the mpc side performs.
_PURPOSE_ZERO_SHARE = 0
_PURPOSE_MASK = 1
_PURPOSE_NOISE = 2
_PURPOSE_INPUT = 3


class IntegrityError(RuntimeError):
    """Replicated copies of a share component disagree."""


class DegenerateInputError(ValueError):
    """A protocol input is outside its usable domain (e.g. all-zero weights)."""


def _philox(master_seed: int, purpose: int, idx: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(purpose, idx))
    return np.random.Generator(np.random.Philox(ss))


class Transcript:
    """Message and primitive-invocation accounting for one engine run.

    Aggregates are always kept (message/byte totals per directed channel
    and per protocol scope, monotone counters). Full ordered message
    records are stored only when recording is enabled, for the
    shape-invariance tests.
    """

    def __init__(self, record_messages: bool = False):
        self.counters: dict[str, int] = {}
        self.msg_count = 0
        self.byte_count = 0
        self.rounds = 0
        self.channels: dict[str, dict[str, int]] = {}
        self.scopes: dict[str, dict[str, int]] = {}
        self.records: list[tuple[int, str, int, int, int]] | None = (
            [] if record_messages else None
        )

    def count(self, name: str, k: int) -> None:
        self.counters[name] = self.counters.get(name, 0) + int(k)

    def log_message(self, scope: str, sender: int, receiver: int, nbytes: int) -> None:
        self.msg_count += 1
        self.byte_count += nbytes
        chan = f"{sender}->{receiver}"
        entry = self.channels.setdefault(chan, {"messages": 0, "bytes": 0})
        entry["messages"] += 1
        entry["bytes"] += nbytes
        sc = self.scopes.setdefault(scope, {"messages": 0, "bytes": 0})
        sc["messages"] += 1
        sc["bytes"] += nbytes
        if self.records is not None:
            self.records.append((self.rounds, scope, sender, receiver, nbytes))

    def next_round(self) -> None:
        self.rounds += 1

    def summary(self) -> dict:
        return {
            "messages": self.msg_count,
            "bytes": self.byte_count,
            "rounds": self.rounds,
            "channels": {k: dict(v) for k, v in sorted(self.channels.items())},
            "counters": dict(sorted(self.counters.items())),
            "scopes": {k: dict(v) for k, v in sorted(self.scopes.items())},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.summary(), **kwargs)


@dataclass(frozen=True)
class ShareVec:
    """Replicated sharing of an array: pairs[i] = (c_i, c_{i+1}) at party i."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.pairs[0][0].shape

    @property
    def size(self) -> int:
        return int(self.pairs[0][0].size)

    def pair_of(self, party: int) -> tuple[np.ndarray, np.ndarray]:
        """Party ``party``'s private view (its two component arrays)."""
        return self.pairs[party]


@dataclass(frozen=True)
class PlainVec:
    """Plaintext counterpart of ShareVec used by the cdp backend."""

    raw: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.raw.shape

    @property
    def size(self) -> int:
        return int(self.raw.size)


class _EngineBase:
    """Operation surface shared by the MPC engine and the plaintext engine.

    Subclasses provide the representation-specific pieces; everything
    expressed in terms of those (public scaling, uniform draws, linear
    combinations) lives here once so both backends cannot drift apart.
    """

    is_plain: bool

    def __init__(self, seed: int, record_messages: bool = False):
        self.seed = int(seed)
        self.transcript = Transcript(record_messages)
        self._scope_stack: list[str] = ["top"]
        self._noise_streams = [_philox(self.seed, _PURPOSE_NOISE, p) for p in range(3)]
        self._injected_uniform: list[int] = []
        self._injected_bits: list[int] = []

    # -- scopes / accounting -------------------------------------------------

    @property
    def scope_name(self) -> str:
        return self._scope_stack[-1]

    @contextmanager
    def scope(self, name: str):
        self._scope_stack.append(name)
        try:
            yield
        finally:
            self._scope_stack.pop()

    def count(self, name: str, k: int) -> None:
        self.transcript.count(name, k)

    # -- test hooks ----------------------------------------------------------

    def inject_uniform(self, values) -> None:
        """Queue uniform draws (reals in [0,1) or raw grid words) for tests."""
        for v in values:
            if isinstance(v, (int, np.integer)):
                raw = int(v)
            else:
                raw = int(float(v) * (1 << F))
            if not 0 <= raw < (1 << F):
                raise ValueError("injected uniform outside [0,1)")
            self._injected_uniform.append(raw)

    def inject_bits(self, bits) -> None:
        for b in bits:
            if int(b) not in (0, 1):
                raise ValueError("injected bit must be 0 or 1")
            self._injected_bits.append(int(b))

    def _pop_injected(self, queue: list[int], n: int) -> np.ndarray | None:
        if not queue:
            return None
        if len(queue) < n:
            raise ValueError("injected stream shorter than one draw request")
        vals = [queue.pop(0) for _ in range(n)]
        return np.array(vals, dtype=U64)

    # -- representation-specific hooks ---------------------------------------

    def const_vec(self, raws):
        raise NotImplementedError

    def mul_const_int(self, x, c):
        raise NotImplementedError

    def add(self, x, y):
        raise NotImplementedError

    def trunc(self, x, g: int = F):
        raise NotImplementedError

    def _embed_public(self, raws: np.ndarray):
        raise NotImplementedError

    def _xor3(self, b0, b1, b2):
        """Combine the three pairwise PRF bit arrays into one shared bit."""
        raise NotImplementedError

    # -- shared randomness ----------------------------------------------------

    def rand_bit(self, shape):
        """Shared uniform bits, unknown to every single party (noise purpose)."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape, dtype=np.int64)) if shape else 1
        self.count("rand_bit", n)
        inj = self._pop_injected(self._injected_bits, n)
        if inj is not None:
            return self._embed_public(inj.reshape(shape))
        draws = [g.integers(0, 2, size=shape, dtype=U64) for g in self._noise_streams]
        return self._xor3(*draws)

    def rand_uniform01(self, shape):
        """Shared uniform fixed-point value on {k * 2^-F : 0 <= k < 2^F}."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape, dtype=np.int64)) if shape else 1
        inj = self._pop_injected(self._injected_uniform, n)
        if inj is not None:
            self.count("rand_bit", F * n)
            return self._embed_public(inj.reshape(shape))
        bits = self.rand_bit((F,) + shape)
        weights = (np.uint64(1) << np.arange(F, dtype=U64)).reshape((F,) + (1,) * len(shape))
        return self.sum_axis(self.mul_const_int(bits, weights), axis=0)

    # -- generic derived operations -------------------------------------------

    def zeros(self, shape):
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        return self.const_vec(np.zeros(shape, dtype=U64))

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def neg(self, x):
        return self.mul_const_int(x, -1)

    def add_const(self, x, raws):
        return self.add(x, self.const_vec(np.broadcast_to(as_word(raws), x.shape)))

    def sub_const(self, x, raws):
        return self.add_const(x, np.uint64(0) - as_word(raws))

    def linear(self, coeffs, inputs, const: float = 0.0):
        """Share of sum(c_i * x_i) + const, computed locally (0 messages).

        Coefficients must be integer-valued: exact public scaling by a
        non-integer requires an interactive truncation, which scale_pub
        provides separately.
        """
        if len(coeffs) != len(inputs):
            raise ValueError("coeffs and inputs length mismatch")
        acc = None
        for c, x in zip(coeffs, inputs):
            cf = float(c)
            if cf != int(cf):
                raise ValueError("linear() coefficients must be integer-valued")
            term = self.mul_const_int(x, int(cf))
            acc = term if acc is None else self.add(acc, term)
        base = self.const_vec(np.broadcast_to(encode(float(const)), acc.shape if acc is not None else ()))
        return base if acc is None else self.add(acc, base)

    def scale_pub(self, x, c: float):
        """Multiply by a public real constant, exact to < 2^-31.

        Integer constants are exact and local; otherwise the encoded
        constant is split into two 16-bit limbs, each applied by a local
        integer multiply followed by a truncation. Contract: |value| < 2^15
        and |value * c| < 2^15 (enough for count-scale pipeline data).
        """
        cf = float(c)
        if cf == int(cf):
            return self.mul_const_int(x, int(cf))
        mag = abs(cf)
        c_raw = int(encode(mag))
        hi, lo = c_raw >> 16, c_raw & 0xFFFF
        y = self.trunc(self.mul_const_int(x, hi), 16)
        if lo:
            y = self.add(y, self.trunc(self.mul_const_int(x, lo), F))
        return self.neg(y) if cf < 0 else y

    def fx_mul(self, x, y):
        """Fixed-point product of two shared values with |x*y| < 1/2."""
        return self.trunc(self.mul(x, y))

    # -- layout helpers (linear, local, message-free) --------------------------

    def _layout(self, fn, *vecs):
        raise NotImplementedError

    def reshape(self, x, shape):
        return self._layout(lambda a: a.reshape(shape), x)

    def broadcast_to(self, x, shape):
        return self._layout(lambda a: np.broadcast_to(a, shape).copy(), x)

    def index(self, x, key):
        return self._layout(lambda a: a[key], x)

    def stack(self, xs, axis=0):
        return self._layout(lambda *arrs: np.stack(arrs, axis=axis), *xs)

    def concat(self, xs, axis=0):
        return self._layout(lambda *arrs: np.concatenate(arrs, axis=axis), *xs)

    def sum_axis(self, x, axis=None):
        return self._layout(lambda a: np.sum(a, axis=axis, dtype=U64), x)

    def cumsum_axis(self, x, axis):
        return self._layout(lambda a: np.cumsum(a, axis=axis, dtype=U64), x)

    def assemble(self, shape, placements):
        """Zero array with rectangles written in: (row_slice, columns, vec)."""
        raise NotImplementedError


class Mpc3Engine(_EngineBase):
    """Deterministic in-process simulator of the three-party protocol."""

    is_plain = False

    def __init__(self, seed: int, record_messages: bool = False):
        super().__init__(seed, record_messages)
        self._zero_streams = [_philox(self.seed, _PURPOSE_ZERO_SHARE, p) for p in range(3)]
        self._mask_streams = [_philox(self.seed, _PURPOSE_MASK, p) for p in range(3)]
        self._input_streams = [_philox(self.seed, _PURPOSE_INPUT, p) for p in range(3)]

    # -- plumbing --------------------------------------------------------------

    def _send(self, sender: int, receiver: int, arr: np.ndarray) -> np.ndarray:
        """Move an array from one party to another, logging the message."""
        self.transcript.log_message(
            self.scope_name, sender + 1, receiver + 1, 8 * int(arr.size)
        )
        return arr

    def _from_components(self, c0, c1, c2) -> ShareVec:
        comps = [np.asarray(c, dtype=U64) for c in (c0, c1, c2)]
        return ShareVec(tuple((comps[i].copy(), comps[(i + 1) % 3].copy()) for i in range(3)))

    # -- sharing / reconstruction ----------------------------------------------

    @_wrapping
    def share(self, raws, owner: int = 0) -> ShareVec:
        """Owner splits its input into uniform components and distributes pairs."""
        raws = as_word(raws)
        rng = self._input_streams[owner]
        a = rng.integers(0, 1 << 64, size=raws.shape, dtype=U64)
        b = rng.integers(0, 1 << 64, size=raws.shape, dtype=U64)
        comps = [None, None, None]
        comps[owner] = a
        comps[(owner + 1) % 3] = b
        comps[(owner + 2) % 3] = raws - a - b
        self.transcript.next_round()
        for other in ((owner + 1) % 3, (owner + 2) % 3):
            # owner ships party `other` its pair (c_other, c_other+1)
            self._send(owner, other, np.concatenate([comps[other].ravel(), comps[(other + 1) % 3].ravel()]))
        return self._from_components(*comps)

    def const_vec(self, raws) -> ShareVec:
        """Public constant by convention: party 1 contributes it, others zero."""
        raws = as_word(raws)
        z = np.zeros_like(raws)
        return self._from_components(raws, z, z)

    def _embed_public(self, raws: np.ndarray) -> ShareVec:
        return self.const_vec(raws)

    def reconstruct(self, x: ShareVec) -> np.ndarray:
        """Simulator-level reconstruction with the replication tripwire."""
        for i in range(3):
            if not np.array_equal(x.pairs[i][1], x.pairs[(i + 1) % 3][0]):
                raise IntegrityError(f"replicated copies of component {(i + 1) % 3} disagree")
        return np.asarray(x.pairs[0][0] + x.pairs[1][0] + x.pairs[2][0], dtype=U64)

    def open(self, x: ShareVec, to: int | None = None) -> np.ndarray:
        """Protocol-level opening; ``to=None`` reveals to all parties.

        The receiving party obtains its missing component from both
        holders and cross-checks the copies.
        """
        self.transcript.next_round()
        targets = range(3) if to is None else [to]
        out = None
        for p in targets:
            missing = (p + 2) % 3
            copy_a = self._send((p + 1) % 3, p, x.pairs[(p + 1) % 3][1])
            copy_b = self._send((p + 2) % 3, p, x.pairs[(p + 2) % 3][0])
            if not np.array_equal(copy_a, copy_b):
                raise IntegrityError(f"opening to party {p + 1}: component copies disagree")
            out = np.asarray(x.pairs[p][0] + x.pairs[p][1] + copy_a, dtype=U64)
        return out

    # -- local algebra -----------------------------------------------------------

    @_wrapping
    def _layout(self, fn, *vecs):
        # np.asarray: full reductions yield numpy scalars, which warn on wrap
        return ShareVec(
            tuple(
                (
                    np.asarray(fn(*(v.pairs[i][0] for v in vecs)), dtype=U64),
                    np.asarray(fn(*(v.pairs[i][1] for v in vecs)), dtype=U64),
                )
                for i in range(3)
            )
        )

    def add(self, x: ShareVec, y: ShareVec) -> ShareVec:
        return self._layout(lambda a, b: a + b, x, y)

    def mul_const_int(self, x: ShareVec, c) -> ShareVec:
        cw = as_word(np.asarray(c))
        return self._layout(lambda a: a * cw, x)

    # -- interactive operations ---------------------------------------------------

    def _zero_share(self, shape) -> list[np.ndarray]:
        draws = [g.integers(0, 1 << 64, size=shape, dtype=U64) for g in self._zero_streams]
        # party i: PRF(pair {i,i+1}) - PRF(pair {i-1,i})
        return [draws[i] - draws[(i + 2) % 3] for i in range(3)]

    @_wrapping
    def _mul_impl(self, x: ShareVec, y: ShareVec) -> ShareVec:
        shape = np.broadcast_shapes(x.shape, y.shape)
        u = self._zero_share(shape)
        w = []
        for i in range(3):
            xi, xj = x.pairs[i]
            yi, yj = y.pairs[i]
            zi = xi * yi + xi * yj + xj * yi
            w.append(np.asarray(zi + u[i], dtype=U64))
        self.transcript.next_round()
        # party i sends its reshared term to party i-1; new pair = (w_i, w_{i+1})
        received = [self._send((i + 1) % 3, i, w[(i + 1) % 3]) for i in range(3)]
        return ShareVec(tuple((w[i].copy(), received[i].copy()) for i in range(3)))

    def mul(self, x: ShareVec, y: ShareVec, count: bool = True) -> ShareVec:
        """Protocol-level multiplication (3 messages, one ring element each way)."""
        if count:
            n = int(np.prod(np.broadcast_shapes(x.shape, y.shape), dtype=np.int64))
            self.count("mul", n)
        return self._mul_impl(x, y)

    def _mul_raw(self, x: ShareVec, y: ShareVec) -> ShareVec:
        """Multiplication internal to another primitive: messages, no counter."""
        return self._mul_impl(x, y)

    def assemble(self, shape, placements) -> ShareVec:
        base = self.zeros(shape)
        for rslice, cols, vec in placements:
            for i in range(3):
                for j in range(2):
                    base.pairs[i][j][rslice, cols] = vec.pairs[i][j]
        return base

    def mask_bits(self, shape) -> ShareVec:
        """Uniform shared bits for masked openings (mask purpose streams)."""
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        n = int(np.prod(shape, dtype=np.int64))
        self.count("mask_bit", n)
        draws = [g.integers(0, 2, size=shape, dtype=U64) for g in self._mask_streams]
        return self._xor3(*draws)

    def _xor3(self, b0, b1, b2) -> ShareVec:
        # bit known to pair {p, p+1} enters as component p+1 (their common one)
        z = np.zeros_like(b0)
        s0 = self._from_components(z, b0, z)
        s1 = self._from_components(z, z, b1)
        s2 = self._from_components(b2, z, z)
        t = self._xor(s0, s1)
        return self._xor(t, s2)

    def _xor(self, a: ShareVec, b: ShareVec) -> ShareVec:
        prod = self._mul_raw(a, b)
        return self._layout(lambda x, y, p: x + y - np.uint64(2) * p, a, b, prod)

    def masked_open(self, x: ShareVec) -> tuple[np.ndarray, ShareVec]:
        """Open x + r for a fresh 64-bit shared-bit mask r; returns (public, bits).

        The opened value is uniform, so it reveals nothing; the caller
        extracts what it needs from the public word plus the shared bits.
        """
        bits = self.mask_bits((64,) + x.shape)
        weights = (np.uint64(1) << np.arange(64, dtype=U64)).reshape((64,) + (1,) * len(x.shape))
        r = self._layout(lambda b: np.sum(b * weights, axis=0, dtype=U64), bits)
        m = self.open(self.add(x, r))
        return m, bits

    def borrow_taps(self, m: np.ndarray, bits: ShareVec, taps: list[int]) -> dict[int, ShareVec]:
        """Borrow chain of (public m) - (shared r) over bit positions.

        Returns, for each tap position t, the shared borrow *into* bit t
        (so taps=[64] yields the overall borrow, i.e. [m < r]). One raw
        multiplication per chain position; message shape depends only on
        the bit width, never on the data.
        """
        want = sorted(set(taps))
        out: dict[int, ShareVec] = {}
        borrow = self.zeros(m.shape)
        pos = 0
        if want and want[0] == 0:
            out[0] = borrow
            want = want[1:]
        for t in want:
            while pos < t:
                m_bit = ((m >> np.uint64(pos)) & np.uint64(1)).astype(U64)
                r_bit = self.index(bits, pos)
                and_rb = self._mul_raw(r_bit, borrow)
                # public per-element bit of m selects AND (m_j=1) vs OR
                # (m_j=0); one fused local pass over the components
                keep = np.uint64(1) - m_bit
                borrow = self._layout(
                    lambda r, b, a, k=keep, mb=m_bit: k * (r + b - a) + mb * a,
                    r_bit, borrow, and_rb,
                )
                pos += 1
            out[t] = borrow
        return out

    @_wrapping
    def trunc(self, x: ShareVec, g: int = F) -> ShareVec:
        """Exact arithmetic right shift by g bits of the shared 64-bit value.

        Mask-and-open construction: with the +2^63 bias, the unsigned
        identity X >> g = (C >> g) - (R >> g) - carry_g + 2^(64-g) * ov
        holds for C = X + R (mod 2^64), carry_g = [C mod 2^g < R mod 2^g],
        ov = [C < R]; both indicator bits come from one borrow chain.
        """
        if not 0 < g < 64:
            raise ValueError("shift amount out of range")
        n = x.size
        self.count("trunc", n)
        biased = self.add_const(x, np.uint64(HALF))
        c_pub, bits = self.masked_open(biased)
        borrows = self.borrow_taps(c_pub, bits, [g, 64])
        carry, ov = borrows[g], borrows[64]
        weights = np.zeros(64, dtype=U64)
        weights[g:] = np.uint64(1) << np.arange(0, 64 - g, dtype=U64)
        wshaped = weights.reshape((64,) + (1,) * len(x.shape))
        r_high = self._layout(lambda b: np.sum(b * wshaped, axis=0, dtype=U64), bits)
        unbias = np.uint64((1 << (63 - g)) & MASK64)
        pub = (c_pub >> np.uint64(g)) - unbias
        wrap = np.uint64(1) << np.uint64(64 - g)
        y = self._layout(lambda rh, ca, o: wrap * o - rh - ca, r_high, carry, ov)
        return self.add_const(y, pub)


class PlainEngine(_EngineBase):
    """Trusted-aggregator backend: the same surface on plaintext words."""

    is_plain = True

    def share(self, raws, owner: int = 0) -> PlainVec:
        return PlainVec(as_word(raws).copy())

    def const_vec(self, raws) -> PlainVec:
        return PlainVec(as_word(raws).copy())

    def _embed_public(self, raws: np.ndarray) -> PlainVec:
        return PlainVec(raws.copy())

    def reconstruct(self, x: PlainVec) -> np.ndarray:
        return x.raw

    def open(self, x: PlainVec, to: int | None = None) -> np.ndarray:
        return x.raw

    @_wrapping
    def _layout(self, fn, *vecs):
        return PlainVec(np.asarray(fn(*(v.raw for v in vecs)), dtype=U64))

    @_wrapping
    def add(self, x: PlainVec, y: PlainVec) -> PlainVec:
        return PlainVec(x.raw + y.raw)

    @_wrapping
    def mul_const_int(self, x: PlainVec, c) -> PlainVec:
        return PlainVec(x.raw * as_word(np.asarray(c)))

    @_wrapping
    def mul(self, x: PlainVec, y: PlainVec, count: bool = True) -> PlainVec:
        if count:
            n = int(np.prod(np.broadcast_shapes(x.shape, y.shape), dtype=np.int64))
            self.count("mul", n)
        return PlainVec(x.raw * y.raw)

    @_wrapping
    def _mul_raw(self, x: PlainVec, y: PlainVec) -> PlainVec:
        return PlainVec(x.raw * y.raw)

    def _xor3(self, b0, b1, b2) -> PlainVec:
        return PlainVec(b0 ^ b1 ^ b2)

    def trunc(self, x: PlainVec, g: int = F) -> PlainVec:
        self.count("trunc", x.size)
        return PlainVec(trunc_word(x.raw, g))

    def assemble(self, shape, placements) -> PlainVec:
        base = np.zeros(shape, dtype=U64)
        for rslice, cols, vec in placements:
            base[rslice, cols] = vec.raw
        return PlainVec(base)


def make_engine(backend: str, seed: int, record_messages: bool = False) -> _EngineBase:
    if backend == "mpc":
        return Mpc3Engine(seed, record_messages)
    if backend == "cdp":
        return PlainEngine(seed, record_messages)
    raise ValueError(f"unknown backend {backend!r}")

"""Keyed hash families: Ajtai, the f_Delta binary-measurement family over
toy regular one-way functions, Chor-Goldreich universal hashing with
superposition inversion, plus balance estimation and the TCR game.

Bit strings are ints; qsim registers use big-endian bit order (bit 0 is the
most significant slot), which also fixes the lexicographic order used by
f_Delta. One-wayness of the toy functions is stipulated, not real: every
domain here is brute-forcible by design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import qsim
from .gf2k import GF2k
from .zqcore import ZqMatrix, ZqVector, centered_array, rho_sigma

FIBER_GUARD = 1 << 16  # largest domain we exhaustively enumerate per fiber


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BitDomain:
    """Domain {0,1}^bits, values as ints, registers as big-endian qubits."""

    bits: int

    @property
    def size(self) -> int:
        return 1 << self.bits

    def values(self) -> Iterable[int]:
        return range(self.size)

    def register_dims(self) -> tuple[int, ...]:
        return (2,) * self.bits

    def to_register(self, x: int) -> tuple[int, ...]:
        return tuple((x >> (self.bits - 1 - i)) & 1 for i in range(self.bits))

    def from_register(self, reg: Sequence[int]) -> int:
        v = 0
        for b in reg:
            v = (v << 1) | (b & 1)
        return v

    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= x < self.size


@dataclass(frozen=True)
class ZqBallDomain:
    """{x in Z_q^m : ||centered(x)||^2 <= norm_bound_sq}, values as tuples."""

    q: int
    m: int
    norm_bound_sq: Fraction | None = None

    @property
    def size(self) -> int:
        return self.q**self.m  # box size; the ball filter applies to contains()

    def values(self) -> Iterable[tuple[int, ...]]:
        import itertools

        for x in itertools.product(range(self.q), repeat=self.m):
            if self.contains(x):
                yield x

    def register_dims(self) -> tuple[int, ...]:
        return (self.q,) * self.m

    def to_register(self, x) -> tuple[int, ...]:
        return tuple(int(c) % self.q for c in x)

    def from_register(self, reg: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(c) for c in reg)

    def contains(self, x) -> bool:
        if len(x) != self.m:
            return False
        if self.norm_bound_sq is None:
            return True
        c = centered_array(np.asarray(x, dtype=np.int64), self.q)
        return Fraction(int(np.dot(c, c))) <= self.norm_bound_sq


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

@dataclass
class HashFamily:
    """A sampleable keyed function with optional measurement predicate M[h],
    optional trapdoor inversion, and optional exhaustive key enumeration.

    ``invert(key, td, y)`` returns the full preimage list of y (used for
    superposition inversion); ``measure`` is None for identity-measurement
    families, where the challenger measures the whole input register.
    """

    name: str
    domain: object
    range_bits: int | None
    sample: Callable  # rng -> (key, td or None)
    eval: Callable  # (key, x) -> y
    measure: Callable | None = None  # (key, x) -> bit
    invert: Callable | None = None  # (key, td, y) -> list of preimages
    keys: Callable | None = None  # () -> list[(key, td)], exact-mode only
    descriptor: dict = field(default_factory=dict)

    def fiber(self, key, y) -> list:
        """All domain values mapping to y, by exhaustive enumeration."""
        if self.domain.size > FIBER_GUARD:
            raise ValueError(f"domain too large to enumerate ({self.domain.size})")
        return [x for x in self.domain.values() if self.eval(key, x) == y]


def superposition_invert(family: HashFamily, key, td, y,
                         segment: str = "X") -> qsim.QState:
    """Uniform superposition over the preimages of y, via the trapdoor."""
    if family.invert is None:
        raise ValueError(f"family {family.name} has no trapdoor inversion")
    pre = family.invert(key, td, y)
    if not pre:
        raise ValueError(f"empty preimage set for {y!r}")
    layout = qsim.RegisterLayout([(segment, family.domain.register_dims())])
    w = {family.domain.to_register(x): 1.0 for x in pre}
    return qsim.prepare_weighted(layout, segment, w)


def fiber_state(family: HashFamily, key, y, weights: Callable | None = None,
                signed_bit: int = 0, segment: str = "X") -> qsim.QState:
    """Fiber superposition sum_x (+/-)^ (b*M(x)) sqrt(D(x)) |x> by enumeration."""
    pre = family.fiber(key, y)
    if not pre:
        raise ValueError(f"empty fiber for {y!r}")
    layout = qsim.RegisterLayout([(segment, family.domain.register_dims())])
    amps = np.zeros(layout.dim, dtype=np.complex128)
    for x in pre:
        w = 1.0 if weights is None else math.sqrt(weights(x))
        if signed_bit and family.measure is not None and family.measure(key, x):
            w = -w
        amps[layout.value_index(segment, family.domain.to_register(x))] = w
    return qsim.QState(layout, amps).normalized()


# --- Ajtai -----------------------------------------------------------------

def ajtai_family(n: int, m: int, q: int, sigma: float) -> HashFamily:
    """h_A(x) = A x mod q over the ball ||x|| <= sigma * sqrt(m/2)."""
    from .zqcore import is_prime

    if not is_prime(q):
        raise ValueError(f"q must be prime, got {q}")
    bound_sq = Fraction(sigma).limit_denominator(10**9) ** 2 * Fraction(m, 2)
    domain = ZqBallDomain(q, m, bound_sq)

    def sample(rng: np.random.Generator):
        A = ZqMatrix(rng.integers(0, q, size=(n, m)), q)
        return A, None

    def evalf(key: ZqMatrix, x) -> tuple[int, ...]:
        return tuple((key @ ZqVector(np.asarray(x), q)).entries.tolist())

    return HashFamily(
        name="ajtai",
        domain=domain,
        range_bits=None,
        sample=sample,
        eval=evalf,
        descriptor={"family": "ajtai", "n": n, "m": m, "q": q, "sigma": sigma},
    )


def structured_ajtai_keygen(n: int, m: int, q: int, rng: np.random.Generator
                            ) -> tuple[ZqMatrix, ZqVector]:
    """A = [Abar | Abar xbar mod q] with binary xbar; trapdoor t = (-xbar, 1).

    A t = 0 (mod q) by construction; A is n x m, so xbar has m-1 bits.
    """
    abar = rng.integers(0, q, size=(n, m - 1))
    xbar = rng.integers(0, 2, size=m - 1)
    last = (abar @ xbar) % q
    A = ZqMatrix(np.concatenate([abar, last[:, None]], axis=1), q)
    t = ZqVector(np.concatenate([(-xbar) % q, [1]]), q)
    return A, t


# --- toy regular OWFs ------------------------------------------------------

def toy_regular_owf(m: int, r: int, range_bits: int | None = None) -> HashFamily:
    """Exactly 2^r-regular toy OWF f(x) = g(x >> r) with injective seeded g.

    With range_bits == m - r (the default) g is a bijection, so every range
    point is hit and every fiber has exactly 2^r elements.
    """
    if not 0 <= r < m:
        raise ValueError(f"need 0 <= r < m, got m={m} r={r}")
    ell = m - r if range_bits is None else range_bits
    if ell < m - r:
        raise ValueError("range too small for an injective table")
    domain = BitDomain(m)

    def sample(rng: np.random.Generator):
        targets = rng.permutation(1 << ell)[: 1 << (m - r)]
        table = np.asarray(targets, dtype=np.int64)
        inverse = {int(v): u for u, v in enumerate(table)}
        return table, inverse

    def evalf(table, x: int) -> int:
        return int(table[x >> r])

    def invert(table, inverse, y: int) -> list[int]:
        u = inverse.get(int(y))
        if u is None:
            return []
        return [(u << r) | j for j in range(1 << r)]

    fam = HashFamily(
        name="toy-regular-owf",
        domain=domain,
        range_bits=ell,
        sample=sample,
        eval=evalf,
        invert=invert,
        descriptor={"family": "toy-regular-owf", "m": m, "r": r, "range_bits": ell},
    )
    fam.input_bits = m
    fam.regularity = r
    return fam


def two_to_one_family(bits: int) -> HashFamily:
    """Fixed 2-to-1 toy function x -> x >> 1 (single-key family, identity M)."""
    domain = BitDomain(bits)

    def sample(rng):
        return "fixed", None

    def evalf(key, x: int) -> int:
        return x >> 1

    def invert(key, td, y: int) -> list[int]:
        return [2 * y, 2 * y + 1]

    return HashFamily(
        name="two-to-one",
        domain=domain,
        range_bits=bits - 1,
        sample=sample,
        eval=evalf,
        invert=invert,
        keys=lambda: [("fixed", None)],
        descriptor={"family": "two-to-one", "bits": bits},
    )


# --- f_Delta ---------------------------------------------------------------

def fdelta_family(base: HashFamily) -> HashFamily:
    """h_Delta = f_Delta o f: merge image pairs {z, z xor Delta}, with the
    one-bit predicate M[h](x) = [f(x) > f(x) xor Delta] (lexicographic on
    big-endian bit strings)."""
    if base.range_bits is None:
        raise ValueError("fdelta needs a base family with a bit-string range")
    n = base.range_bits

    def sample(rng: np.random.Generator):
        bkey, btd = base.sample(rng)
        delta = int(rng.integers(1, 1 << n))  # Delta = 0 excluded
        return (bkey, delta), btd

    def evalf(key, x: int) -> int:
        bkey, delta = key
        z = base.eval(bkey, x)
        return min(z, z ^ delta)

    def measure(key, x: int) -> int:
        bkey, delta = key
        z = base.eval(bkey, x)
        return 1 if z > (z ^ delta) else 0

    def invert(key, td, y: int) -> list[int]:
        bkey, delta = key
        if base.invert is None:
            raise ValueError("base family has no inversion")
        if y > (y ^ delta):
            return []  # outputs are always the lexicographically first element
        return base.invert(bkey, td, y) + base.invert(bkey, td, y ^ delta)

    keys = None
    if base.keys is not None:
        def keys():
            out = []
            for bkey, btd in base.keys():
                for delta in range(1, 1 << n):
                    out.append(((bkey, delta), btd))
            return out

    return HashFamily(
        name=f"fdelta({base.name})",
        domain=base.domain,
        range_bits=n,
        sample=sample,
        eval=evalf,
        measure=measure,
        invert=invert if base.invert is not None else None,
        keys=keys,
        descriptor={"family": "fdelta", "base": base.descriptor},
    )


# --- Chor-Goldreich universal hashing --------------------------------------

def chor_goldreich_family(t: int, field_bits: int, out_bits: int) -> HashFamily:
    """t-universal hash: first out_bits of a degree-(t-1) polynomial over
    GF(2^field_bits); superposition inversion enumerates the 2^(k-n)
    field-element completions and root-finds each by brute force."""
    if not 1 <= field_bits <= 16:
        raise ValueError("field_bits must be 1..16 at desk scale")
    if not 1 <= out_bits <= field_bits:
        raise ValueError("need 1 <= out_bits <= field_bits")
    gf = GF2k(field_bits)
    domain = BitDomain(field_bits)
    shift = field_bits - out_bits
    value_table_cache: dict[tuple[int, ...], np.ndarray] = {}

    def sample(rng: np.random.Generator):
        coeffs = tuple(int(c) for c in rng.integers(0, gf.size, size=t))
        return coeffs, None

    def evalf(coeffs, x: int) -> int:
        return gf.poly_eval(coeffs, x) >> shift

    def _values(coeffs) -> np.ndarray:
        tab = value_table_cache.get(coeffs)
        if tab is None:
            tab = np.array([gf.poly_eval(coeffs, x) for x in range(gf.size)],
                           dtype=np.int64)
            value_table_cache[coeffs] = tab
        return tab

    def roots(coeffs, w: int) -> list[int]:
        tab = _values(coeffs)
        return [int(x) for x in np.nonzero(tab == w)[0]]

    def invert(coeffs, td, y: int) -> list[int]:
        pre: list[int] = []
        for rem in range(1 << shift):
            pre.extend(roots(coeffs, (y << shift) | rem))
        return sorted(pre)

    fam = HashFamily(
        name="chor-goldreich",
        domain=domain,
        range_bits=out_bits,
        sample=sample,
        eval=evalf,
        invert=invert,
        descriptor={"family": "chor-goldreich", "t": t,
                    "field_bits": field_bits, "out_bits": out_bits},
    )
    fam.universality = t
    return fam


def compose_balanced(owf: HashFamily, uhash: HashFamily) -> HashFamily:
    """f'(x) = u(f(x)): compose a (toy) regular OWF with a universal hash.

    The balance of the result is measured by balance_estimate (on the
    f_Delta wrap), never assumed.
    """
    if owf.range_bits is None or uhash.range_bits is None:
        raise ValueError("both families need bit-string ranges")
    if not isinstance(uhash.domain, BitDomain) or uhash.domain.bits != owf.range_bits:
        raise ValueError(
            f"uhash domain ({uhash.domain}) must match owf range ({owf.range_bits} bits)")
    if uhash.range_bits >= owf.range_bits:
        raise ValueError("uhash must compress the owf range")

    def sample(rng: np.random.Generator):
        okey, otd = owf.sample(rng)
        ukey, utd = uhash.sample(rng)
        return (okey, ukey), (otd, utd)

    def evalf(key, x: int) -> int:
        okey, ukey = key
        return uhash.eval(ukey, owf.eval(okey, x))

    def invert(key, td, y: int) -> list[int]:
        if owf.invert is None or uhash.invert is None:
            raise ValueError("composition is not invertible")
        (okey, ukey), (otd, utd) = key, td
        pre: list[int] = []
        for w in uhash.invert(ukey, utd, y):
            pre.extend(owf.invert(okey, otd, w))
        return sorted(pre)

    invertible = owf.invert is not None and uhash.invert is not None
    return HashFamily(
        name=f"compose({owf.name},{uhash.name})",
        domain=owf.domain,
        range_bits=uhash.range_bits,
        sample=sample,
        eval=evalf,
        invert=invert if invertible else None,
        descriptor={"family": "compose", "owf": owf.descriptor,
                    "uhash": uhash.descriptor},
    )


# ---------------------------------------------------------------------------
# Balance estimation
# ---------------------------------------------------------------------------

@dataclass
class BalanceReport:
    delta_hat: float
    fraction_ok: float
    samples: int
    ratios: list[float] = field(repr=False, default_factory=list)


def balance_estimate(family: HashFamily, delta: float | None, trials: int,
                     rng: np.random.Generator) -> BalanceReport:
    """Exact fiber counts A0/A1 on sampled (h, x); reports the fraction of
    samples with |A0 - A1| / (A0 + A1) <= 1 - delta.

    delta=None evaluates the bound at the measured delta_hat, which is
    1 - (99.5th percentile of the observed ratios), clamped to [0, 1).
    """
    if family.measure is None:
        raise ValueError(f"family {family.name} has no measurement predicate")
    dom = list(family.domain.values())
    ratios = []
    for _ in range(trials):
        key, _ = family.sample(rng)
        x = dom[int(rng.integers(0, len(dom)))]
        y = family.eval(key, x)
        a0 = a1 = 0
        for xp in dom:
            if family.eval(key, xp) == y:
                if family.measure(key, xp):
                    a1 += 1
                else:
                    a0 += 1
        ratios.append(abs(a0 - a1) / (a0 + a1))
    delta_hat = min(max(1.0 - float(np.percentile(ratios, 99.5)), 0.0), 1.0 - 1e-12)
    d = delta_hat if delta is None else delta
    ok = sum(1 for r in ratios if r <= 1.0 - d + 1e-12) / len(ratios)
    return BalanceReport(delta_hat=delta_hat, fraction_ok=ok, samples=trials,
                         ratios=ratios)


def family_from_descriptor(desc: dict) -> HashFamily:
    """Rebuild a family from its JSON-able descriptor, so experiments are
    replayable from config files (same descriptor + same seed = same keys)."""
    kind = desc["family"]
    if kind == "ajtai":
        return ajtai_family(desc["n"], desc["m"], desc["q"], desc["sigma"])
    if kind == "toy-regular-owf":
        return toy_regular_owf(desc["m"], desc["r"], desc.get("range_bits"))
    if kind == "two-to-one":
        return two_to_one_family(desc["bits"])
    if kind == "chor-goldreich":
        return chor_goldreich_family(desc["t"], desc["field_bits"], desc["out_bits"])
    if kind == "fdelta":
        return fdelta_family(family_from_descriptor(desc["base"]))
    if kind == "compose":
        return compose_balanced(family_from_descriptor(desc["owf"]),
                                family_from_descriptor(desc["uhash"]))
    raise ValueError(f"unknown family descriptor {kind!r}")


def fiber_split(family: HashFamily, key, y) -> tuple[int, int]:
    """(A0, A1): exact counts of the fiber of y on each side of M[h]."""
    if family.measure is None:
        raise ValueError("family has no measurement predicate")
    a0 = a1 = 0
    for x in family.fiber(key, y):
        if family.measure(key, x):
            a1 += 1
        else:
            a0 += 1
    return a0, a1


# ---------------------------------------------------------------------------
# TCR game (Definition: challenger-side target collision resistance)
# ---------------------------------------------------------------------------

@dataclass
class TCRTranscript:
    y: object
    v: object
    answer: object
    win: bool
    key: object = None


def tcr_game(family: HashFamily, adversary, rng: np.random.Generator,
             dist: Callable | None = None, aux: Callable | None = None) -> TCRTranscript:
    """One run of the target-collision-resistance experiment.

    The challenger prepares the D-weighted superposition, coherently hashes
    and measures the image y, measures the predicate value v (the whole
    register for identity-M families), and hands (h, y, X) to the adversary,
    who answers with x'. Win iff eval(h, x') = y and M[h](x') != v.

    ``aux``, when given, is called once with the trapdoor and its result is
    passed to the adversary (the auxiliary-information variant).
    """
    key, td = family.sample(rng)
    dom = family.domain
    layout = qsim.RegisterLayout([("X", dom.register_dims())])
    if dist is None:
        weights = np.ones(layout.dim)
    else:
        weights = np.zeros(layout.dim)
        for x in dom.values():
            weights[layout.value_index("X", dom.to_register(x))] = math.sqrt(dist(x))
    state = qsim.prepare_weighted(layout, "X", weights)

    # image measurement: branch by classical pushforward, identical to the
    # coherent compute-then-measure since eval is a basis function
    probs = qsim.marginal_probs(state, "X")
    y_weights: dict[object, float] = {}
    for x in dom.values():
        p = probs[layout.value_index("X", dom.to_register(x))]
        if p > 0:
            yv = family.eval(key, x)
            y_weights[yv] = y_weights.get(yv, 0.0) + p
    ys = sorted(y_weights.keys(), key=repr)
    py = np.array([y_weights[y] for y in ys])
    y = ys[int(rng.choice(len(ys), p=py / py.sum()))]

    fiber_amps = np.zeros(layout.dim, dtype=np.complex128)
    for x in family.fiber(key, y):
        i = layout.value_index("X", dom.to_register(x))
        fiber_amps[i] = state.amps[i]
    state = qsim.QState(layout, fiber_amps).normalized()

    if family.measure is None:
        out = qsim.measure(state, "X", rng)
        v = dom.from_register(out.value)
        state = out.post_state
    else:
        sides = {0: 0.0, 1: 0.0}
        for x in family.fiber(key, y):
            i = layout.value_index("X", dom.to_register(x))
            sides[family.measure(key, x)] += abs(state.amps[i]) ** 2
        v = int(rng.random() < sides[1] / (sides[0] + sides[1]))
        kept = np.zeros(layout.dim, dtype=np.complex128)
        for x in family.fiber(key, y):
            if family.measure(key, x) == v:
                i = layout.value_index("X", dom.to_register(x))
                kept[i] = state.amps[i]
        state = qsim.QState(layout, kept).normalized()

    aux_value = aux(td) if aux is not None else None
    answer = adversary(family, key, y, state, rng, aux_value)
    if family.measure is None:
        win = answer is not None and family.eval(key, answer) == y and answer != v
    else:
        win = (answer is not None and family.eval(key, answer) == y
               and family.measure(key, answer) != v)
    return TCRTranscript(y=y, v=v, answer=answer, win=win, key=key)


def brute_force_tcr_adversary(family, key, y, state, rng, aux=None):
    """Outputs a uniformly random preimage of y (unbounded-search model)."""
    pre = family.fiber(key, y)
    return pre[int(rng.integers(0, len(pre)))] if pre else None


def honest_tcr_adversary(family, key, y, state, rng, aux=None):
    """Measures the handed register and returns the outcome."""
    out = qsim.measure(state, "X", rng)
    return family.domain.from_register(out.value)


def garbage_tcr_adversary(family, key, y, state, rng, aux=None):
    """Returns a fixed non-preimage when one exists."""
    for x in family.domain.values():
        if family.eval(key, x) != y:
            return x
    return None

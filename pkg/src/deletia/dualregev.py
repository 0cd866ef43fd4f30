"""Dual-Regev public-key encryption with publicly-verifiable deletion,
simulated exactly on the state-vector core.

Encryption prepares the Gaussian coset state over {x : A x = y}, applies
the plaintext phase, and applies the forward q-ary Fourier transform;
deletion applies the inverse transform and measures, so the certificate
lands in the coset exactly (A pi = y with probability 1). Under the
forward-transform convention the matching literal ciphertext sum carries
phase w^{+<s,y>} and plaintext offset +b*(0,..,0,floor(q/2)), with the
coset-side phase negated; see dual_ciphertext_sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import qsim
from .zqcore import (
    ENUM_GUARD,
    ZqMatrix,
    ZqVector,
    centered,
    centered_array,
    isis_verify,
)


@dataclass(frozen=True)
class DRParams:
    """(n, m, q, sigma) with sigma^2 kept exact for norm-bound comparisons."""

    n: int
    m: int
    q: int
    sigma_sq: Fraction

    @property
    def sigma(self) -> float:
        return math.sqrt(float(self.sigma_sq))

    @property
    def alpha(self) -> float:
        return 1.0 / self.sigma

    @property
    def width(self) -> int:
        return self.m + 1

    def cert_bound_sq(self) -> Fraction:
        # ||pi|| <= sqrt(m+1) / (sqrt(2) alpha) = sigma sqrt((m+1)/2)
        return Fraction(self.width, 2) * self.sigma_sq

    def state_dim(self) -> int:
        return self.q**self.width

    def validate(self):
        if self.state_dim() > ENUM_GUARD:
            raise ValueError(f"q^(m+1) = {self.state_dim()} exceeds {ENUM_GUARD}")


def dr_params(n: int, m: int, q: int, sigma=None, *, sigma_sq=None) -> DRParams:
    if sigma_sq is None:
        sigma_sq = Fraction(sigma) ** 2
    return DRParams(n, m, q, Fraction(sigma_sq))


@dataclass
class DRKeys:
    pk: ZqMatrix  # A, n x (m+1)
    sk: ZqVector  # (-xbar, 1)
    params: DRParams


@dataclass
class DRCiphertext:
    vk: tuple[ZqMatrix, ZqVector]  # (A, y)
    state: qsim.QState  # (m+1) q-ary slots, segment "X"


def dr_keygen(params: DRParams, rng: np.random.Generator) -> DRKeys:
    """A = [Abar | Abar xbar mod q] with binary xbar, sk = (-xbar, 1).

    Key generation is classical, so it works at any parameter size; the
    q^(m+1) enumeration guard applies when a ciphertext state is built.
    """
    n, m, q = params.n, params.m, params.q
    abar = rng.integers(0, q, size=(n, m))
    xbar = rng.integers(0, 2, size=m)
    last = (abar @ xbar) % q
    A = ZqMatrix(np.concatenate([abar, last[:, None]], axis=1), q)
    sk = ZqVector(np.concatenate([(-xbar) % q, [1]]), q)
    return DRKeys(pk=A, sk=sk, params=params)


def _box_digits(q: int, w: int) -> np.ndarray:
    """All of Z_q^w as an array of shape (q^w, w), row-major."""
    return np.array(list(itertools.product(range(q), repeat=w)), dtype=np.int64)


def gaussian_box_weights(q: int, w: int, sigma: float) -> np.ndarray:
    """rho_sigma over the full box Z_q^w on centered representatives, flat."""
    digits = centered_array(np.arange(q, dtype=np.int64), q).astype(float)
    nsq = np.zeros(1)
    for _ in range(w):
        nsq = (nsq[:, None] + (digits**2)[None, :]).reshape(-1)
    return np.exp(-math.pi * nsq / sigma**2)


def gen_gauss(A: ZqMatrix, sigma: float, rng: np.random.Generator
              ) -> tuple[qsim.QState, ZqVector]:
    """GenGauss: Gaussian superposition, coherent A.x into Y, measure Y.

    Returns the residual Gaussian coset state on segment "X" and the image.
    The image register is measured immediately, so the sampling is done on
    the classical pushforward and the coset amplitudes are written directly;
    gen_gauss_verbatim is the step-by-step register version (same channel).
    """
    n, w = A.rows, A.cols
    q = A.q
    if q**w > ENUM_GUARD:
        raise ValueError(f"q^m = {q**w} exceeds {ENUM_GUARD}")
    weights = gaussian_box_weights(q, w, sigma)
    digits = _box_digits(q, w)
    from .zqcore import matmul_mod

    images = matmul_mod(digits, A.entries.T, q)
    ycodes = images @ (q ** np.arange(n - 1, -1, -1, dtype=np.int64))
    probs = weights**2
    ydist = np.bincount(ycodes, weights=probs, minlength=q**n)
    ydist /= ydist.sum()
    code = int(rng.choice(len(ydist), p=ydist))
    amps = np.where(ycodes == code, weights, 0.0)
    layout = qsim.RegisterLayout([("X", (q,) * w)])
    coset = qsim.QState(layout, amps.astype(np.complex128)).normalized()
    yval = []
    rem = code
    for _ in range(n):
        yval.append(rem % q)
        rem //= q
    return coset, ZqVector(np.asarray(list(reversed(yval))), q)


def gen_gauss_verbatim(A: ZqMatrix, sigma: float, rng: np.random.Generator
                       ) -> tuple[qsim.QState, ZqVector]:
    """GenGauss as literal register operations (prepare, U_A, measure)."""
    n, w = A.rows, A.cols
    q = A.q
    layout = qsim.RegisterLayout([("X", (q,) * w), ("Y", (q,) * n)])
    state = qsim.prepare_weighted(layout, "X", gaussian_box_weights(q, w, sigma))

    def f(xval):
        x = ZqVector(np.asarray(xval, dtype=np.int64), q)
        return tuple((A @ x).entries.tolist())

    state = qsim.apply_classical(state, f, "X", "Y")
    out = qsim.measure(state, "Y", rng)
    coset = qsim.drop_segment(out.post_state, "Y", out.value)
    return coset, ZqVector(np.asarray(out.value), q)


def plaintext_offset(params: DRParams, b: int) -> np.ndarray:
    g = np.zeros(params.width, dtype=np.int64)
    g[-1] = (b % 2) * (params.q // 2)
    return g


def dr_encrypt(keys: DRKeys, b: int, rng: np.random.Generator) -> DRCiphertext:
    """Enc: GenGauss coset, plaintext phase, forward Fourier transform."""
    params = keys.params
    params.validate()
    coset, y = gen_gauss(keys.pk, params.sigma, rng)
    g = plaintext_offset(params, b)
    if b % 2:
        coset = qsim.phase_oracle(coset, "X", tuple((-g) % params.q))
    ct_state = qsim.qft(coset, "X")
    return DRCiphertext(vk=(keys.pk, y), state=ct_state)


def dr_decrypt(keys: DRKeys, ct: DRCiphertext, rng: np.random.Generator) -> int:
    """Dec: measure, form centered(c . sk), decide against q/4 (tie -> 1)."""
    out = qsim.measure(ct.state, "X", rng)
    c = ZqVector(np.asarray(out.value), keys.params.q)
    return decide_decryption(c, keys.sk, keys.params.q)


def decide_decryption(c: ZqVector, sk: ZqVector, q: int) -> int:
    v = centered(c.dot(sk), q)
    return 0 if 4 * abs(v) < q else 1


def dr_delete(ct: DRCiphertext, rng: np.random.Generator) -> ZqVector:
    """Del: inverse Fourier transform, measure all slots."""
    coset = qsim.qft_inverse(ct.state, "X")
    out = qsim.measure(coset, "X", rng)
    A, _ = ct.vk
    return ZqVector(np.asarray(out.value), A.q)


def dr_verify(vk: tuple[ZqMatrix, ZqVector], pi: ZqVector, params: DRParams) -> bool:
    A, y = vk
    return isis_verify(A, y, pi, norm_bound_sq=params.cert_bound_sq())


# ---------------------------------------------------------------------------
# Literal ciphertext sum (the paper-formula reference construction)
# ---------------------------------------------------------------------------

def dual_ciphertext_sum(params: DRParams, A: ZqMatrix, y: ZqVector, b: int
                        ) -> qsim.QState:
    """The ciphertext evaluated directly as the double Gaussian sum

        sum_s sum_e rho_{q/sigma}(e) w^{+<s,y>} |s^T A + e^T + b.g>,

    normalized. The phase sign is pinned to +<s,y> to match the forward
    Fourier transform used by dr_encrypt; the opposite sign is the same
    state with negated coordinates.
    """
    q, w = params.q, params.width
    if q ** (params.n + w) > ENUM_GUARD * 32:
        raise ValueError("direct sum too large to enumerate")
    layout = qsim.RegisterLayout([("X", (q,) * w)])
    rho_e = gaussian_box_weights(q, w, q / params.sigma)
    digits = _box_digits(q, w)
    radix = q ** np.arange(w - 1, -1, -1, dtype=np.int64)
    g = plaintext_offset(params, b)
    amps = np.zeros(q**w, dtype=np.complex128)
    omega = np.exp(2j * np.pi / q)
    for s in itertools.product(range(q), repeat=params.n):
        sA = (np.asarray(s, dtype=np.int64) @ A.entries) % q
        phase = omega ** (int(np.dot(s, y.entries)) % q)
        target = ((digits + sA[None, :] + g[None, :]) % q) @ radix
        amps[target] += phase * rho_e
    return qsim.QState(layout, amps).normalized()


def serialize_vk(vk: tuple[ZqMatrix, ZqVector]) -> str:
    """vk = (A, y) in the zqcore wire format, matrix then vector."""
    from .zqcore import serialize_zq

    A, y = vk
    return serialize_zq(A) + serialize_zq(y)


def parse_vk(text: str) -> tuple[ZqMatrix, ZqVector]:
    from .zqcore import parse_zq

    lines = text.strip().splitlines()
    header = lines[0].split()
    rows = int(header[2])
    a_text = "\n".join(lines[: rows + 1])
    y_text = "\n".join(lines[rows + 1:])
    return parse_zq(a_text), parse_zq(y_text)


def deletion_certificate_distribution(params: DRParams, A: ZqMatrix,
                                      y: ZqVector, b: int) -> dict[tuple, float]:
    """Exact outcome distribution of Del on Enc(b), by construction the
    squared Gaussian mass on the coset (independent of b)."""
    q, w = params.q, params.width
    sigma = params.sigma
    weights = {}
    total = 0.0
    for x in itertools.product(range(q), repeat=w):
        xv = np.asarray(x, dtype=np.int64)
        if np.array_equal((A.entries @ xv) % q, y.entries):
            c = centered_array(xv, q)
            p = math.exp(-2 * math.pi * float(np.dot(c, c)) / sigma**2)
            weights[x] = p
            total += p
    return {x: p / total for x, p in weights.items()}

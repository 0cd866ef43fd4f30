"""Dual-Regev leveled FHE with publicly-verifiable deletion.

Fresh ciphertexts exist in two modes: per-column quantum states (the
ciphertext sum factorizes over gadget columns, so Enc/Del/Vrfy simulate
exactly column by column), and a classical computational-basis sample
C = A S + E + x G used for homomorphic NAND evaluation. The NAND unitary
permutes basis states and decryption is basis-diagonal, so classical
evaluation is distribution-exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import qsim
from .dualregev import gaussian_box_weights, plaintext_offset
from .zqcore import (
    ENUM_GUARD,
    ZqMatrix,
    ZqVector,
    centered,
    gadget_inverse,
    gadget_matrix,
    gadget_width,
    gaussian_pmf_1d,
    isis_verify,
    matmul_mod,
)


@dataclass(frozen=True)
class FHEParams:
    n: int
    m: int
    q: int
    sigma_sq: Fraction
    depth: int = 1  # NAND-depth bound L

    @property
    def sigma(self) -> float:
        return math.sqrt(float(self.sigma_sq))

    @property
    def alpha(self) -> float:
        return 1.0 / self.sigma

    @property
    def width(self) -> int:
        return self.m + 1

    @property
    def ncols(self) -> int:
        return self.width * gadget_width(self.q)  # N = (m+1) ceil(log2 q)

    def cert_bound_sq(self) -> Fraction:
        return Fraction(self.width, 2) * self.sigma_sq

    def column_dim(self) -> int:
        return self.q**self.width


def fhe_params(n: int, m: int, q: int, sigma=None, depth: int = 1,
               *, sigma_sq=None) -> FHEParams:
    if sigma_sq is None:
        sigma_sq = Fraction(sigma) ** 2
    return FHEParams(n, m, q, Fraction(sigma_sq), depth)


@dataclass
class FHEKeys:
    pk: ZqMatrix  # A, (m+1) x n
    sk: ZqVector  # (-xbar, 1)
    params: FHEParams


@dataclass
class FHECiphertextQ:
    vk: tuple[ZqMatrix, ZqMatrix]  # (A, Y) with Y n x N
    columns: list[qsim.QState]  # N states, each over (m+1) q-ary slots


@dataclass
class FHECiphertextC:
    matrix: ZqMatrix  # (m+1) x N


def fhe_keygen(params: FHEParams, rng: np.random.Generator) -> FHEKeys:
    """A = [Abar | Abar xbar mod q]^T in Z_q^{(m+1) x n}, sk = (-xbar, 1)."""
    n, m, q = params.n, params.m, params.q
    abar = rng.integers(0, q, size=(n, m))
    xbar = rng.integers(0, 2, size=m)
    last = (abar @ xbar) % q
    A = ZqMatrix(np.concatenate([abar, last[:, None]], axis=1).T, q)
    sk = ZqVector(np.concatenate([(-xbar) % q, [1]]), q)
    return FHEKeys(pk=A, sk=sk, params=params)


def fhe_encrypt_q(keys: FHEKeys, x: int, rng: np.random.Generator) -> FHECiphertextQ:
    """Per-column quantum encryption: column j carries plaintext offset x.g_j.

    Column j is the dual-Regev-style state for the coset {v : A^T v = y_j},
    phased and Fourier-transformed exactly as in the PKE.
    """
    params = keys.params
    if params.column_dim() > ENUM_GUARD:
        raise ValueError(f"column dimension {params.column_dim()} exceeds {ENUM_GUARD}")
    q, w, N = params.q, params.width, params.ncols
    At = keys.pk.transpose()  # n x (m+1)
    G = gadget_matrix(q, w)
    from .dualregev import gen_gauss

    cols, ys = [], []
    for j in range(N):
        coset, yj = gen_gauss(At, params.sigma, rng)
        gj = (x % 2) * G.entries[:, j]
        if np.any(gj % q):
            coset = qsim.phase_oracle(coset, "X", tuple((-gj) % q))
        cols.append(qsim.qft(coset, "X"))
        ys.append(yj.entries)
    Y = ZqMatrix(np.stack(ys, axis=1), q)
    return FHECiphertextQ(vk=(keys.pk, Y), columns=cols)


def fhe_encrypt_c(keys: FHEKeys, x: int, rng: np.random.Generator) -> FHECiphertextC:
    """Classical sample C = A S + E + x G with E ~ D_{Z_q, q/(sqrt(2) sigma)}
    per entry, the computational-basis distribution of fhe_encrypt_q."""
    params = keys.params
    q, w, N, n = params.q, params.width, params.ncols, params.n
    S = rng.integers(0, q, size=(n, N))
    vals, probs = gaussian_pmf_1d(params.q / (math.sqrt(2) * params.sigma), q)
    E = vals[rng.choice(len(vals), p=probs, size=(w, N))]
    G = gadget_matrix(q, w)
    C = (matmul_mod(keys.pk.entries, S, q) + E + (x % 2) * G.entries) % q
    return FHECiphertextC(matrix=ZqMatrix(C, q))


def fhe_eval_nand(c0: FHECiphertextC, c1: FHECiphertextC) -> FHECiphertextC:
    """NAND: G - C0 . G^{-1}(C1) mod q (the Z = 0 slice of U_NAND)."""
    q = c0.matrix.q
    if c1.matrix.q != q or c0.matrix.entries.shape != c1.matrix.entries.shape:
        raise ValueError("ciphertext shape/modulus mismatch")
    w, N = c0.matrix.rows, c0.matrix.cols
    G = gadget_matrix(q, w)
    bits = gadget_inverse(c1.matrix, q, w)  # N x N binary
    out = (G.entries - matmul_mod(c0.matrix.entries, bits, q)) % q
    return FHECiphertextC(matrix=ZqMatrix(out, q))


def fhe_decrypt(keys: FHEKeys, ct: FHECiphertextC) -> int:
    """sk . (last column), centered, thresholded at q/4 (tie decides 1)."""
    q = keys.params.q
    last = ct.matrix.column(ct.matrix.cols - 1)
    v = centered(last.dot(keys.sk), q)
    return 0 if 4 * abs(v) < q else 1


def fhe_measure_q(ct: FHECiphertextQ, rng: np.random.Generator) -> FHECiphertextC:
    """Computational-basis measurement of all columns."""
    A, _ = ct.vk
    cols = []
    for st in ct.columns:
        out = qsim.measure(st, "X", rng)
        cols.append(np.asarray(out.value, dtype=np.int64))
    return FHECiphertextC(matrix=ZqMatrix(np.stack(cols, axis=1), A.q))


def fhe_delete(ct: FHECiphertextQ, rng: np.random.Generator) -> list[ZqVector]:
    """Per-column inverse Fourier transform and measurement."""
    A, _ = ct.vk
    pis = []
    for st in ct.columns:
        coset = qsim.qft_inverse(st, "X")
        out = qsim.measure(coset, "X", rng)
        pis.append(ZqVector(np.asarray(out.value), A.q))
    return pis


def fhe_verify(vk: tuple[ZqMatrix, ZqMatrix], pis: list[ZqVector],
               params: FHEParams) -> bool:
    """Accept iff A^T pi_i = y_i and ||pi_i|| is short, for every column."""
    A, Y = vk
    if len(pis) != Y.cols:
        return False
    At = A.transpose()
    bound_sq = params.cert_bound_sq()
    return all(
        isis_verify(At, Y.column(i), pis[i], norm_bound_sq=bound_sq)
        for i in range(Y.cols)
    )


def nand_tree_eval(keys: FHEKeys, leaves: list[int], rng: np.random.Generator
                   ) -> tuple[int, int]:
    """Encrypt 2^L leaf bits classically, fold a balanced NAND tree, decrypt.

    Returns (decrypted, expected) where expected folds plain NANDs.
    """
    if len(leaves) & (len(leaves) - 1):
        raise ValueError("leaf count must be a power of two")
    cts = [fhe_encrypt_c(keys, b, rng) for b in leaves]
    vals = list(leaves)
    while len(cts) > 1:
        cts = [fhe_eval_nand(cts[i], cts[i + 1]) for i in range(0, len(cts), 2)]
        vals = [1 - (vals[i] & vals[i + 1]) for i in range(0, len(vals), 2)]
    return fhe_decrypt(keys, cts[0]), vals[0]


def column_direct_sum(params: FHEParams, A: ZqMatrix, yj: ZqVector, x: int,
                      j: int) -> qsim.QState:
    """Column j of the literal Enc sum: sum over (s_j, e_j) of
    rho_{q/sigma}(e) w^{+<s,y_j>} |A s + e + x g_j>."""
    q, w = params.q, params.width
    layout = qsim.RegisterLayout([("X", (q,) * w)])
    rho_e = gaussian_box_weights(q, w, q / params.sigma)
    digits = np.array(list(itertools.product(range(q), repeat=w)), dtype=np.int64)
    radix = q ** np.arange(w - 1, -1, -1, dtype=np.int64)
    gj = (x % 2) * gadget_matrix(q, w).entries[:, j]
    amps = np.zeros(q**w, dtype=np.complex128)
    omega = np.exp(2j * np.pi / q)
    for s in itertools.product(range(q), repeat=params.n):
        As = (A.entries @ np.asarray(s, dtype=np.int64)) % q
        phase = omega ** (int(np.dot(s, yj.entries)) % q)
        target = ((digits + As[None, :] + gj[None, :]) % q) @ radix
        amps[target] += phase * rho_e
    return qsim.QState(layout, amps).normalized()


def joint_direct_sum(params: FHEParams, A: ZqMatrix, ys: list[ZqVector],
                     x: int, cols: list[int]) -> qsim.QState:
    """The literal Enc sum over a chosen set of columns jointly: enumerate
    (S, E) restricted to those columns, with phase w^{+Tr[S^T Y]}."""
    q, w = params.q, params.width
    k = len(cols)
    if (q ** (w * k)) > ENUM_GUARD:
        raise ValueError("joint sum too large")
    layout = qsim.RegisterLayout([(f"C{i}", (q,) * w) for i in range(k)])
    G = gadget_matrix(q, w)
    digits = np.array(list(itertools.product(range(q), repeat=w)), dtype=np.int64)
    radix = q ** np.arange(w - 1, -1, -1, dtype=np.int64)
    rho_e = gaussian_box_weights(q, w, q / params.sigma)
    omega = np.exp(2j * np.pi / q)

    col_vecs = []
    for i, j in enumerate(cols):
        gj = (x % 2) * G.entries[:, j]
        amps = np.zeros(q**w, dtype=np.complex128)
        for s in itertools.product(range(q), repeat=params.n):
            As = (A.entries @ np.asarray(s, dtype=np.int64)) % q
            phase = omega ** (int(np.dot(s, ys[i].entries)) % q)
            target = ((digits + As[None, :] + gj[None, :]) % q) @ radix
            amps[target] += phase * rho_e
        col_vecs.append(amps)
    joint = col_vecs[0]
    for v in col_vecs[1:]:
        joint = np.kron(joint, v)
    return qsim.QState(layout, joint).normalized()


def validate_noise_window(params: FHEParams) -> list[tuple[str, str, str]]:
    """The parameter inequalities as (name, status, detail) rows.

    sqrt(8(m+1)) <= alpha q <= q / (sqrt(8) (m+1) (N+1)^L) must hold (fail
    otherwise); the stronger theorem-level lower bound sqrt(8(m+1)N) and the
    leftover-hash condition m >= 2n log2 q are reported as warnings.
    """
    rows = []
    aq = params.alpha * params.q
    w, N, L = params.width, params.ncols, params.depth
    lo = math.sqrt(8 * w)
    hi = params.q / (math.sqrt(8) * w * (N + 1) ** L)
    if lo <= aq <= hi:
        rows.append(("fhe-noise-window", "pass",
                     f"{lo:.4g} <= alpha*q = {aq:.4g} <= {hi:.4g}"))
    elif aq < lo:
        rows.append(("fhe-noise-window", "fail",
                     f"alpha*q = {aq:.4g} < sqrt(8(m+1)) = {lo:.4g}"))
    else:
        rows.append(("fhe-noise-window", "fail",
                     f"alpha*q = {aq:.4g} > q/(sqrt(8)(m+1)(N+1)^L) = {hi:.4g} at L={L}"))
    lo_thm = math.sqrt(8 * w * N)
    rows.append(("fhe-noise-lower-thm", "pass" if aq >= lo_thm else "warn",
                 f"alpha*q = {aq:.4g} vs sqrt(8(m+1)N) = {lo_thm:.4g}"))
    lhl = 2 * params.n * math.log2(params.q)
    rows.append(("leftover-hash", "pass" if params.m >= lhl else "warn",
                 f"m = {params.m} vs 2n log2 q = {lhl:.4g}"))
    return rows

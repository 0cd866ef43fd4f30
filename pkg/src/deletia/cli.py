"""deletia: demos, experiment batches, and parameter validation.

JSON goes to stdout, a short human summary to stderr. Exit codes: 0 ok,
1 verdict failure, 2 config error. DELETIA_SEED overrides any seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import configs, dualfhe, dualregev, games, hashfam, pvdcore, qsim
from .configs import RunConfig


def _rng(seed: int, offset: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed + offset)


def _emit(obj: dict) -> None:
    print(json.dumps(obj))


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolve_seed(args) -> int:
    env = os.environ.get("DELETIA_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _config_from(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        raw = configs.parse_config_file(args.config)
        for key, val in raw.items():
            if not hasattr(cfg, key):
                raise SystemExit(f"unknown config key {key!r}")
            cur = getattr(cfg, key)
            cfg = replace(cfg, **{key: type(cur)(val) if not isinstance(cur, bool)
                                  else val.lower() in ("1", "true", "yes")})
    for key in ("n", "m", "q", "sigma", "depth", "trials", "reps"):
        val = getattr(args, key, None)
        if val is not None:
            cfg = replace(cfg, **{key: val})
    cfg = replace(cfg, seed=_resolve_seed(args))
    return cfg


# ---------------------------------------------------------------------------
# dr / fhe / commit / pvd demos
# ---------------------------------------------------------------------------

def cmd_dr_roundtrip(args) -> int:
    cfg = _config_from(args)
    params = cfg.dr() if args.n is not None else configs.DR_ROUNDTRIP
    rng = _rng(cfg.seed)
    keys = dualregev.dr_keygen(params, rng)
    b = int(rng.integers(0, 2)) if args.bit is None else args.bit % 2
    decrypted = dualregev.dr_decrypt(keys, dualregev.dr_encrypt(keys, b, rng), rng)
    ct = dualregev.dr_encrypt(keys, b, rng)
    pi = dualregev.dr_delete(ct, rng)
    verified = dualregev.dr_verify(ct.vk, pi, params)
    _emit({"b": b, "decrypted": decrypted, "cert": pi.entries.tolist(),
           "verified": bool(verified)})
    _note(f"dr roundtrip: b={b} decrypted={decrypted} verified={verified}")
    return 0 if (decrypted == b and verified) else 1


def cmd_fhe_nand_tree(args) -> int:
    cfg = _config_from(args)
    params = cfg.fhe() if args.n is not None else configs.FHE_CLASSICAL
    if args.depth is not None:
        params = dualfhe.fhe_params(params.n, params.m, params.q,
                                    sigma_sq=params.sigma_sq, depth=args.depth)
    rng = _rng(cfg.seed)
    keys = dualfhe.fhe_keygen(params, rng)
    records, all_ok = [], True
    for t in range(cfg.trials):
        leaves = [int(v) for v in rng.integers(0, 2, size=1 << params.depth)]
        dec, exp = dualfhe.nand_tree_eval(keys, leaves, rng)
        ok = dec == exp
        all_ok &= ok
        records.append({"trial": t, "leaves": leaves, "decrypted": dec,
                        "expected": exp, "ok": ok})
    _emit({"scheme": "fhe", "depth": params.depth, "trials": cfg.trials,
           "all_ok": all_ok, "records": records})
    _note(f"fhe nand-tree: {sum(r['ok'] for r in records)}/{cfg.trials} correct")
    return 0 if all_ok else 1


def cmd_fhe_delete_roundtrip(args) -> int:
    cfg = _config_from(args)
    params = cfg.fhe() if args.n is not None else configs.FHE_QUANTUM
    rng = _rng(cfg.seed)
    keys = dualfhe.fhe_keygen(params, rng)
    x = int(rng.integers(0, 2)) if args.bit is None else args.bit % 2
    measured = dualfhe.fhe_measure_q(dualfhe.fhe_encrypt_q(keys, x, rng), rng)
    decrypted = dualfhe.fhe_decrypt(keys, measured)
    ct = dualfhe.fhe_encrypt_q(keys, x, rng)
    pis = dualfhe.fhe_delete(ct, rng)
    verified = dualfhe.fhe_verify(ct.vk, pis, params)
    _emit({"x": x, "decrypted": decrypted,
           "certs": [p.entries.tolist() for p in pis], "verified": bool(verified)})
    _note(f"fhe delete-roundtrip: x={x} decrypted={decrypted} verified={verified}")
    return 0 if (decrypted == x and verified) else 1


def _default_bbm_family(cfg: RunConfig) -> hashfam.HashFamily:
    return hashfam.fdelta_family(hashfam.toy_regular_owf(6, 2))


def cmd_commit_demo(args) -> int:
    cfg = _config_from(args)
    rng = _rng(cfg.seed)
    fam = _default_bbm_family(cfg)
    b = int(rng.integers(0, 2)) if args.bit is None else args.bit % 2
    pair = pvdcore.commit(fam, b, configs.COMMIT_REPS, rng)
    honest = pvdcore.open_accept_prob(pair, b)
    cross = pvdcore.open_accept_prob(pair, 1 - b)
    pis = pvdcore.commit_delete(pair, rng)
    verified = pvdcore.commit_ver(fam, pair.key, pair.images, pis)
    _emit({"bit": b, "honest_open_prob": honest, "cross_open_prob": cross,
           "cert": pis, "verified": bool(verified)})
    _note(f"commit demo: bit={b} honest={honest:.6f} cross={cross:.3e} verified={verified}")
    return 0 if (verified and honest > 1 - 1e-9) else 1


def cmd_pvd_roundtrip(args) -> int:
    cfg = _config_from(args)
    rng = _rng(cfg.seed)
    comp = hashfam.compose_balanced(
        hashfam.toy_regular_owf(6, 2),
        hashfam.chor_goldreich_family(cfg.t_universal, 4, 3))
    fam = hashfam.fdelta_family(comp)
    keys = pvdcore.pvd_keygen(fam, rng, reps=cfg.reps)
    b = int(rng.integers(0, 2)) if args.bit is None else args.bit % 2
    decrypted = pvdcore.pvd_decrypt(keys, pvdcore.pvd_encrypt(keys, b, rng), rng)
    ct = pvdcore.pvd_encrypt(keys, b, rng)
    pis = pvdcore.pvd_delete(ct, fam, rng)
    verified = pvdcore.pvd_verify(fam, keys.key, ct.images, pis)
    _emit({"b": b, "decrypted": decrypted, "threshold": keys.recover_threshold,
           "cert": pis, "verified": bool(verified)})
    _note(f"pvd roundtrip: b={b} decrypted={decrypted} verified={verified}")
    return 0 if (decrypted == b and verified) else 1


# ---------------------------------------------------------------------------
# game run
# ---------------------------------------------------------------------------

def _ladder_family() -> hashfam.HashFamily:
    return hashfam.two_to_one_family(3)


def _map_trials(fn, trials: int, jobs: int) -> list:
    """Run fn(t) for t in range(trials), optionally on a thread pool.

    Results come back in trial order either way, so reports are identical
    for any jobs value (each trial owns its own seeded generator).
    """
    if jobs <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, range(trials)))


def _advantage_ci(w0: int, w1: int, t: int) -> tuple[float, float]:
    if t == 0:
        return 0.0, 0.0
    p0, p1 = w0 / t, w1 / t
    ci = 1.96 * math.sqrt(p0 * (1 - p0) / t + p1 * (1 - p1) / t)
    return abs(p0 - p1), ci


def cmd_game_run(args) -> int:
    cfg = _config_from(args)
    adv = games.ADVERSARIES.get(args.adv)
    if adv is None and args.exp != "fact35":
        raise SystemExit(f"unknown adversary {args.adv!r}; "
                         f"known: {sorted(games.ADVERSARIES)}")
    report = {"exp": args.exp, "adv": args.adv, "seed": cfg.seed,
              "trials": cfg.trials, "exact": bool(args.exact)}
    rows = []
    if cfg.trials == 0 and not args.exact and args.exp != "fact35":
        report.update({"advantage": None, "ci": 0.0, "counts": {}})
        _finish_game(report, rows, args)
        return 0

    if args.exp == "ladder":
        fam = _ladder_family()
        if args.exact:
            res = games.hybrid_ladder_exact(fam, adv)
            report.update({f"adv{i}": res.adv[i] for i in range(4)})
            report.update({"advantage": res.adv[0], "ci": 0.0,
                           "proj_success": res.proj_success})
        else:
            advs = []
            for exp in range(4):
                def one_trial(t, exp=exp):
                    out = {}
                    for b in (0, 1):
                        rng = _rng(cfg.seed, t * 8 + exp * 2 + b)
                        out[b] = games.hybrid_ladder_mc(fam, adv, exp, b, rng)
                    return out
                results = _map_trials(one_trial, cfg.trials, args.jobs)
                wins = {0: 0, 1: 0}
                for t, out in enumerate(results):
                    for b in (0, 1):
                        wins[b] += out[b]
                        rows.append({"trial": t, "seed": cfg.seed + t * 8 + exp * 2 + b,
                                     "b": b, "verdict": "", "guess": out[b]})
                a, ci = _advantage_ci(wins[0], wins[1], cfg.trials)
                advs.append((a, ci, wins[0], wins[1]))
            report.update({f"adv{i}": advs[i][0] for i in range(4)})
            report.update({"advantage": advs[0][0], "ci": advs[0][1],
                           "counts": {f"exp{i}": {"b0_ones": advs[i][2],
                                                  "b1_ones": advs[i][3]}
                                      for i in range(4)}})
    elif args.exp in ("tc", "tcr", "evtc"):
        fam = _ladder_family() if args.exp != "tcr" else _default_bbm_family(cfg)
        wins = {0: 0, 1: 0}
        win_count = 0
        for t in range(cfg.trials):
            rng = _rng(cfg.seed, t)
            if args.exp == "tc":
                for b in (0, 1):
                    out = games.target_collapse_exp(fam, None, adv, b, _rng(cfg.seed, t * 2 + b))
                    wins[b] += out
                    rows.append({"trial": t, "seed": cfg.seed + t * 2 + b, "b": b,
                                 "verdict": "", "guess": out})
            elif args.exp == "tcr":
                adv_fn = {"brute-force-inverter": hashfam.brute_force_tcr_adversary,
                          "honest-deleter": hashfam.honest_tcr_adversary,
                          "garbage-certifier": hashfam.garbage_tcr_adversary}.get(
                              args.adv, hashfam.honest_tcr_adversary)
                tr = hashfam.tcr_game(fam, adv_fn, rng)
                win_count += tr.win
                rows.append({"trial": t, "seed": cfg.seed + t, "b": "",
                             "verdict": tr.win, "guess": repr(tr.answer)})
            else:
                for b in (0, 1):
                    tr = games.ev_target_collapse_exp(fam, None, adv, b,
                                                      _rng(cfg.seed, t * 2 + b),
                                                      seed=cfg.seed + t * 2 + b)
                    wins[b] += tr.verdict
                    rows.append({"trial": t, "seed": tr.seed, "b": b,
                                 "verdict": tr.outputs["valid"], "guess": tr.verdict})
        if args.exp == "tcr":
            report.update({"win_rate": win_count / max(1, cfg.trials), "ci": 0.0,
                           "advantage": win_count / max(1, cfg.trials),
                           "counts": {"wins": win_count,
                                      "losses": cfg.trials - win_count}})
        else:
            a, ci = _advantage_ci(wins[0], wins[1], cfg.trials)
            report.update({"advantage": a, "ci": ci,
                           "counts": {"b0_ones": wins[0], "b1_ones": wins[1]}})
        if args.exp == "evtc" and args.exact:
            e0, e1 = games.ev_target_collapse_ensembles(fam, None, adv)
            report.update({"advantage": qsim.ensemble_trace_distance(e0, e1), "ci": 0.0})
    elif args.exp == "sgc":
        params = configs.SGC_DESK

        def one_trial(t):
            return [games.strong_gauss_collapse_exp(
                params, adv, b, _rng(cfg.seed, t * 2 + b), seed=cfg.seed + t * 2 + b)
                for b in (0, 1)]

        wins, valid_count = {0: 0, 1: 0}, 0
        for t, trs in enumerate(_map_trials(one_trial, cfg.trials, args.jobs)):
            for b, tr in zip((0, 1), trs):
                wins[b] += tr.verdict
                valid_count += tr.outputs["valid"]
                rows.append({"trial": t, "seed": tr.seed, "b": b,
                             "verdict": tr.outputs["valid"], "guess": tr.verdict})
        a, ci = _advantage_ci(wins[0], wins[1], cfg.trials)
        report.update({"advantage": a, "ci": ci,
                       "counts": {"b0_ones": wins[0], "b1_ones": wins[1],
                                  "valid": valid_count},
                       "valid_rate": valid_count / max(1, 2 * cfg.trials)})
        if args.exact:
            e0, e1 = games.sgc_honest_ensembles(params, _rng(cfg.seed))
            report.update({"advantage": qsim.ensemble_trace_distance(e0, e1), "ci": 0.0})
    elif args.exp == "fact35":
        rng = _rng(cfg.seed)
        worst = math.inf
        holds = True
        for t in range(cfg.trials):
            nproj = int(rng.integers(2, 5))
            dim = int(rng.integers(nproj + 1, 9))
            D, pis, psi = games.random_fact35_instance(rng, dim, nproj)
            res = games.fact35_check(D, pis, psi)
            worst = min(worst, res.lhs - res.rhs)
            holds &= res.holds
            rows.append({"trial": t, "seed": cfg.seed, "b": "",
                         "verdict": res.holds, "guess": f"{res.lhs - res.rhs:.3e}"})
        report.update({"advantage": 0.0, "ci": 0.0, "all_hold": holds,
                       "worst_slack": worst})
        if not holds:
            _finish_game(report, rows, args)
            return 1
    else:
        raise SystemExit(f"unknown experiment {args.exp!r}")
    _finish_game(report, rows, args)
    return 0


def _finish_game(report: dict, rows: list[dict], args) -> None:
    _emit(report)
    adv = report.get("advantage")
    _note(f"game {report['exp']}: advantage={adv} ci={report.get('ci')}")
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["trial", "seed", "b", "verdict", "guess"])
            writer.writeheader()
            for row in rows:
                writer.writerow(row)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    cfg = _config_from(args)
    scheme = args.scheme
    rows = configs.validate_scheme(scheme, cfg)
    report = {"scheme": scheme,
              "params": {"n": cfg.n, "m": cfg.m, "q": cfg.q,
                         "sigma": cfg.sigma, "depth": cfg.depth},
              "checks": [{"name": n, "status": s, "detail": d} for n, s, d in rows]}
    _emit(report)
    for name, status, detail in rows:
        _note(f"{status.upper():5s} {name}: {detail}")
    return 2 if any(s == "fail" for _, s, _ in rows) else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deletia")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, trials_default=100):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", "--params", dest="config", type=str, default=None)
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--m", type=int, default=None)
        p.add_argument("--q", type=int, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--depth", type=int, default=None)
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--jobs", type=int, default=1)

    dr = sub.add_parser("dr").add_subparsers(dest="sub", required=True)
    p = dr.add_parser("roundtrip")
    common(p)
    p.add_argument("--bit", type=int, default=None)
    p.set_defaults(fn=cmd_dr_roundtrip)

    fhe = sub.add_parser("fhe").add_subparsers(dest="sub", required=True)
    p = fhe.add_parser("nand-tree")
    common(p, trials_default=10)
    p.set_defaults(fn=cmd_fhe_nand_tree)
    p = fhe.add_parser("delete-roundtrip")
    common(p)
    p.add_argument("--bit", type=int, default=None)
    p.set_defaults(fn=cmd_fhe_delete_roundtrip)

    com = sub.add_parser("commit").add_subparsers(dest="sub", required=True)
    p = com.add_parser("demo")
    common(p)
    p.add_argument("--bit", type=int, default=None)
    p.set_defaults(fn=cmd_commit_demo)

    pvd = sub.add_parser("pvd").add_subparsers(dest="sub", required=True)
    p = pvd.add_parser("roundtrip")
    common(p)
    p.add_argument("--bit", type=int, default=None)
    p.set_defaults(fn=cmd_pvd_roundtrip)

    game = sub.add_parser("game").add_subparsers(dest="sub", required=True)
    p = game.add_parser("run")
    common(p, trials_default=200)
    p.add_argument("--exp", required=True,
                   choices=["tc", "tcr", "evtc", "ladder", "sgc", "fact35"])
    p.add_argument("--adv", default="honest-deleter")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(fn=cmd_game_run)

    p = sub.add_parser("validate")
    common(p)
    p.add_argument("--scheme", choices=["dr", "fhe"], default="dr")
    p.set_defaults(fn=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        _note(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front door: ``kacbench <subcommand> [flags]``.

Settings resolve as flags > ``--config`` JSON file > defaults, and the
effective configuration is embedded in every JSON document.  Trial i
draws from ``numpy.random.default_rng(seed + i)``, so results do not
depend on ``--workers``.

Exit status: 0 success, 1 usage error, 2 attack or check failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import FORMATS as BOUND_FORMATS, emit_report, exponent_table
from .classical import result_record, run_classical_attack
from .core import MAX_BITS, MIN_EXPERIMENT_BITS, KeyDistribution, random_instance
from .grover import attack_first_last_equal, attack_repeated_keys, attack_same_key
from .hybrid import AdversaryScript, run_hybrid_trials
from .oracles import AccessPolicy, QueryLedger
from .verify import MAX_VERIFY_BITS, verify_suite
from .walk import emulate_walk_search, plan_parameters

OUTPUT_DIR_ENV = "KACBENCH_OUTPUT_DIR"

COMMON_DEFAULTS = {"seed": 0, "trials": 1, "workers": 1, "output": None}

DEFAULTS = {
    "attack-classical": {"n": 8, "t": 2, "beta": 3.0},
    "attack-walk": {"n": 8, "t": 2, "policy": "q1", "r": None, "step_budget": None},
    "attack-grover-samekey": {"n": 10, "t": 3},
    "attack-grover-firstlast": {"n": 10, "t": 2},
    "attack-grover-repeated": {"n": 8, "t": 3, "j": 1},
    "hybrid": {"n": 8, "q_e": 1, "q_p1": 1, "q_p2": 1, "support": "full", "trials": 100},
    "bounds": {"t_max": 2, "format": "csv", "include_literature": False},
    "verify": {"n": 4, "trials": 3},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_or_none(v):
    return None if v in (None, "none", "auto") else int(v)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kacbench", description="Query-counted KAC cryptanalysis workbench")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_):
        c = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        c.add_argument("--config", help="JSON file of settings (flags override it)")
        c.add_argument("--seed", type=int)
        c.add_argument("--trials", type=int)
        c.add_argument("--workers", type=int, help="process pool size (default 1)")
        c.add_argument("--output", help=f"output file (default: ${OUTPUT_DIR_ENV} or stdout)")
        return c

    c = command("attack-classical", "candidate-counting key recovery")
    c.add_argument("--n", type=int)
    c.add_argument("--t", type=int)
    c.add_argument("--beta", type=float)

    c = command("attack-walk", "quantum-walk key recovery (classical emulation)")
    c.add_argument("--n", type=int)
    c.add_argument("--t", type=int)
    c.add_argument("--policy", help="q1, q2 or mixed:Pj")
    c.add_argument("--r", type=_int_or_none, help="walk subset size (default: cost-model argmin)")
    c.add_argument("--step-budget", dest="step_budget", type=_int_or_none)

    for name, help_ in (("attack-grover-samekey", "Grover search, all round keys equal"),
                        ("attack-grover-firstlast", "Grover search, 2 rounds with k0 = k2"),
                        ("attack-grover-repeated", "Grover search, one distinct round key")):
        c = command(name, help_)
        c.add_argument("--n", type=int)
        c.add_argument("--t", type=int)
        if name == "attack-grover-repeated":
            c.add_argument("--j", type=int, help="index of the distinct key")

    c = command("hybrid", "trace distances between the 2-KAC hybrids")
    c.add_argument("--n", type=int)
    c.add_argument("--q-e", dest="q_e", type=int)
    c.add_argument("--q-p1", dest="q_p1", type=int)
    c.add_argument("--q-p2", dest="q_p2", type=int)
    c.add_argument("--support", help="'full' or the support size of each quantum query")

    c = command("bounds", "exponent table")
    c.add_argument("--t-max", dest="t_max", type=int)
    c.add_argument("--format", choices=BOUND_FORMATS)
    c.add_argument("--include-literature", dest="include_literature", action="store_true")

    c = command("verify", "exhaustive-search check of attack outputs at n <= 6")
    c.add_argument("--n", type=int)
    return p


def effective_config(args: argparse.Namespace) -> dict:
    cmd = args.command
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(DEFAULTS[cmd])
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    path = getattr(args, "config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"--config: cannot read {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise UsageError("--config: top level must be an object")
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise UsageError(f"--config: unknown keys {unknown} for {cmd}")
        cfg.update(loaded)
    cfg.update(flags)
    cfg["command"] = cmd
    _validate(cfg)
    return cfg


def _require(ok: bool, flag: str, msg: str) -> None:
    if not ok:
        raise UsageError(f"{flag}: {msg}")


def _validate(cfg: dict) -> None:
    cmd = cfg["command"]
    _require(cfg["trials"] >= 1, "--trials", "must be >= 1")
    _require(cfg["workers"] >= 1, "--workers", "must be >= 1")
    if "n" in cfg:
        top = MAX_VERIFY_BITS if cmd == "verify" else MAX_BITS
        _require(MIN_EXPERIMENT_BITS <= cfg["n"] <= top, "--n",
                 f"must lie in [{MIN_EXPERIMENT_BITS}, {top}]")
    if "t" in cfg:
        _require(cfg["t"] >= 1, "--t", "must be >= 1")
    if cmd == "attack-grover-firstlast":
        _require(cfg["t"] == 2, "--t", "the first/last attack is defined for t = 2")
    if cmd == "attack-grover-repeated":
        _require(0 <= cfg["j"] <= cfg["t"], "--j", f"must lie in [0, {cfg['t']}]")
    if cmd == "attack-classical":
        _require(cfg["beta"] >= cfg["t"] + 1, "--beta", "must be >= t+1")
    if cmd == "attack-walk":
        pol = cfg["policy"]
        ok = pol in ("q1", "q2") or (pol.startswith("mixed:P") and pol[7:].isdigit()
                             and 1 <= int(pol[7:]) <= cfg["t"])
        _require(ok, "--policy", f"expected q1, q2 or mixed:Pj with 1 <= j <= {cfg['t']}")
    if cmd == "hybrid":
        for k in ("q_e", "q_p1", "q_p2"):
            _require(cfg[k] >= 1, "--" + k.replace("_", "-"), "must be >= 1")
        _require(cfg["q_e"] <= 2 ** cfg["n"], "--q-e", "exceeds 2^n distinct queries")
        sup = cfg["support"]
        _require(sup == "full" or (str(sup).isdigit() and 1 <= int(sup) <= 2 ** cfg["n"]),
                 "--support", "expected 'full' or a size in [1, 2^n]")
    if cmd == "bounds":
        _require(cfg["t_max"] >= 1, "--t-max", "must be >= 1")
        _require(cfg["format"] in BOUND_FORMATS, "--format", f"choose from {BOUND_FORMATS}")


# trial runners (module level so worker processes can import them) -------------

def _ledger(led) -> dict:
    return led.to_dict() if isinstance(led, QueryLedger) else led


def _trial_classical(cfg, rng):
    inst = random_instance(cfg["n"], cfg["t"], rng)
    return result_record(run_classical_attack(inst, cfg["beta"], rng))


def _trial_walk(cfg, rng):
    pol = cfg["policy"]
    mixed = int(pol[7:]) if pol.startswith("mixed:") else None
    plan = plan_parameters(cfg["n"], cfg["t"], mixed, cfg["r"])
    policy = AccessPolicy.q2(cfg["t"]) if pol == "q2" else None
    inst = random_instance(cfg["n"], cfg["t"], rng)
    return emulate_walk_search(inst, plan, rng, cfg["step_budget"], policy=policy).to_dict()


def _grover_record(r: dict) -> dict:
    out = dict(r)
    out["ledger"] = _ledger(r["ledger"])
    return out


def _trial_samekey(cfg, rng):
    inst = random_instance(cfg["n"], cfg["t"], rng, KeyDistribution.all_equal())
    return _grover_record(attack_same_key(inst, rng))


def _trial_firstlast(cfg, rng):
    inst = random_instance(cfg["n"], 2, rng, KeyDistribution.first_last_equal())
    return _grover_record(attack_first_last_equal(inst, rng))


def _trial_repeated(cfg, rng):
    inst = random_instance(cfg["n"], cfg["t"], rng, KeyDistribution.repeated_except(cfg["j"]))
    return _grover_record(attack_repeated_keys(inst, rng))


def _trial_verify(cfg, rng):
    checks = verify_suite(cfg["n"], rng)
    return {"checks": checks, "success": all(c["passed"] for c in checks)}


TRIALS = {
    "attack-classical": _trial_classical,
    "attack-walk": _trial_walk,
    "attack-grover-samekey": _trial_samekey,
    "attack-grover-firstlast": _trial_firstlast,
    "attack-grover-repeated": _trial_repeated,
    "verify": _trial_verify,
}


def _run_one(job):
    cfg, i = job
    return TRIALS[cfg["command"]](cfg, np.random.default_rng(cfg["seed"] + i))


def run_trials(cfg: dict) -> list[dict]:
    jobs = [(cfg, i) for i in range(cfg["trials"])]
    if cfg["workers"] == 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
        return list(pool.map(_run_one, jobs))


def _summary(results: list[dict]) -> dict:
    wins = sum(bool(r["success"]) for r in results)
    out = {"trials": len(results), "successes": wins, "success_rate": wins / len(results)}
    totals = [r["ledger"]["totals"] for r in results if isinstance(r.get("ledger"), dict)]
    if totals:
        out["mean_classical_queries"] = float(np.mean([t["classical"] for t in totals]))
        out["mean_quantum_queries"] = float(np.mean([t["quantum"] for t in totals]))
    return out


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


def execute(cfg: dict) -> tuple[str, int]:
    """Run the configured command; returns (document, exit status)."""
    cmd = cfg["command"]
    if cmd == "bounds":
        records = exponent_table(cfg["t_max"], cfg["include_literature"])
        if cfg["format"] == "json":
            doc = {"command": cmd, "version": __version__, "config": cfg,
                   "records": [r.row() for r in records]}
            return dumps(doc), 0
        return emit_report(records, cfg["format"]), 0
    if cmd == "hybrid":
        rng = np.random.default_rng(cfg["seed"])
        n = cfg["n"]
        xs = [int(x) for x in rng.choice(2 ** n, size=cfg["q_e"], replace=False)]
        if cfg["support"] == "full":
            script = AdversaryScript.uniform(n, xs, cfg["q_p1"], cfg["q_p2"])
        else:
            script = AdversaryScript.random(n, cfg["q_e"], cfg["q_p1"], cfg["q_p2"],
                                            int(cfg["support"]), rng)
        report = run_hybrid_trials(script, cfg["trials"], rng)
        ok = (report["certificate_violations"] == 0
              and report["no_collision_consistency_failures"] == 0)
        doc = {"command": cmd, "version": __version__, "config": cfg, "report": report,
               "summary": {"checks_passed": ok}}
        return dumps(doc), 0 if ok else 2
    results = run_trials(cfg)
    summary = _summary(results)
    doc = {"command": cmd, "version": __version__, "config": cfg, "results": results,
           "summary": summary}
    return dumps(doc), 0 if summary["successes"] == summary["trials"] else 2


def _destination(cfg: dict) -> Path | None:
    if cfg["output"]:
        return Path(cfg["output"])
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        ext = cfg["format"] if cfg["command"] == "bounds" else "json"
        return Path(out_dir) / f"{cfg['command']}-seed{cfg['seed']}.{ext}"
    return None


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = effective_config(args)
    except UsageError as e:
        print(f"kacbench: usage error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help and --version
        return int(e.code or 0)
    try:
        text, status = execute(cfg)
    except ValueError as e:
        print(f"kacbench: usage error: {e}", file=sys.stderr)
        return 1
    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
        print(f"kacbench: wrote {dest}", file=sys.stderr)
    if cfg["command"] == "bounds" and cfg["format"] != "json":
        print(f"# effective config: {json.dumps(cfg, sort_keys=True)}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

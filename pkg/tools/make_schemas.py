"""Regenerate src/kacbench/schemas/*.json (run after changing an output record)."""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "kacbench" / "schemas"
DRAFT = "https://json-schema.org/draft/2020-12/schema"

INT = {"type": "integer"}
NUM = {"type": "number"}
BOOL = {"type": "boolean"}
STR = {"type": "string"}
PROB = {"type": "number", "minimum": 0, "maximum": 1}
KEY = {"type": "array", "items": {"type": "integer", "minimum": 0}}
NKEY = {"anyOf": [KEY, {"type": "null"}]}

COUNT = {"type": "object", "required": ["classical", "quantum"],
         "properties": {"classical": {"type": "integer", "minimum": 0},
                        "quantum": {"type": "integer", "minimum": 0}}}
LEDGER = {
    "type": "object",
    "required": ["policy", "counts", "totals"],
    "properties": {
        "policy": STR,
        "counts": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["fwd", "inv"],
            "properties": {"fwd": COUNT, "inv": COUNT}}},
        "totals": {"type": "object", "required": ["classical", "quantum", "total", "per_oracle"],
                   "properties": {"classical": INT, "quantum": INT, "total": INT,
                                  "per_oracle": {"type": "object", "additionalProperties": COUNT}}},
    },
}
SUMMARY = {"type": "object", "required": ["trials", "successes", "success_rate"],
           "properties": {"trials": {"type": "integer", "minimum": 1},
                          "successes": {"type": "integer", "minimum": 0},
                          "success_rate": PROB,
                          "mean_classical_queries": NUM, "mean_quantum_queries": NUM}}


def obj(required: dict, optional: dict | None = None) -> dict:
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "required": sorted(required), "properties": props}


def envelope(command: str, result: dict | None = None, extra: dict | None = None) -> dict:
    base = {"command": {"const": command}, "version": STR, "config": {
        "type": "object", "required": ["command", "seed"],
        "properties": {"command": {"const": command}, "seed": INT}}}
    if result is not None:
        base["results"] = {"type": "array", "minItems": 1, "items": result}
        base["summary"] = {"$ref": "#/$defs/summary"}
    base.update(extra or {})
    return {"$schema": DRAFT, "$id": f"kacbench/{command}.json",
            "title": f"kacbench {command} output", **obj(base),
            "$defs": {"ledger": LEDGER, "summary": SUMMARY}}


REF_LEDGER = {"$ref": "#/$defs/ledger"}

GROVER = {"attack_name": STR, "n": INT, "t": INT, "success": BOOL, "verified": BOOL,
          "keys": NKEY, "true_keys": KEY, "iterations": {"type": "integer", "minimum": 0},
          "iterations_per_run": {"type": "integer", "minimum": 0},
          "runs": {"type": "integer", "minimum": 0}, "marked_count": INT,
          "success_prob_theoretical": PROB, "ledger": REF_LEDGER}

SCHEMAS = {
    "attack-classical": envelope("attack-classical", obj({
        "success": BOOL, "guessed_key": NKEY, "true_key": KEY, "set_sizes": KEY,
        "true_key_multiplicity": INT,
        "multiplicities_histogram": {"type": "object", "additionalProperties": INT},
        "ledger": REF_LEDGER})),
    "attack-walk": envelope("attack-walk", obj({
        "success": BOOL, "marked_found": BOOL, "key": NKEY, "true_key": KEY,
        "steps_taken": INT, "witness_count": INT, "epsilon_formula": PROB,
        "plan": obj({"n": INT, "t": INT, "T": INT, "r": INT, "s0_size": INT,
                     "epsilon_formula": PROB, "gamma": NUM}),
        "cost_model": {"type": "object"}, "ledger": REF_LEDGER})),
    "attack-grover-samekey": envelope("attack-grover-samekey", obj(GROVER)),
    "attack-grover-firstlast": envelope("attack-grover-firstlast", obj(GROVER)),
    "attack-grover-repeated": envelope("attack-grover-repeated", obj({**GROVER, "j": INT})),
    "verify": envelope("verify", obj({
        "success": BOOL,
        "checks": {"type": "array", "items": obj({
            "attack": STR, "consistent_keys": INT, "true_key_consistent": BOOL,
            "reported_success": BOOL, "reported_key_consistent": BOOL, "passed": BOOL})}})),
    "hybrid": envelope("hybrid", extra={
        "report": obj({
            "params": obj({"n": INT, "q_E": INT, "q_P1": INT, "q_P2": INT}),
            "samples": INT, "mean_td_h1h2": PROB, "mean_td_h1h2_full": PROB,
            "mean_td_h1h2_reduced": PROB, "max_td_h1h2": PROB, "bound_h1h2": NUM,
            "mean_td_h0h1": PROB, "bound_h0h1": NUM, "p_coll_formula": PROB,
            "p_coll_empirical": PROB, "certificate_violations": INT,
            "no_collision_consistency_failures": INT, "mean_p_S": PROB}),
        "summary": obj({"checks_passed": BOOL})}),
    "bounds": envelope("bounds", extra={
        "records": {"type": "array", "minItems": 1, "items": obj({
            "t": {"type": "integer", "minimum": 1}, "setting": STR,
            "kind": {"enum": ["upper", "lower", "absent"]},
            "exponent_num": {"type": ["integer", "null"]},
            "exponent_den": {"type": ["integer", "null"], "minimum": 1},
            "source": STR})}}),
}

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for name, schema in SCHEMAS.items():
        (OUT / f"{name}.json").write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")
        print("wrote", name)

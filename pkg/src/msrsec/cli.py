"""Command-line experiments: construct, verify, capacity, attack, simulate, fig1, table.

Every command accepts ``--config FILE`` (a JSON object whose keys are the
long option names) and explicit flags override values from the file.
Exit codes: 0 success or secure, 1 secrecy violation, 2 verification
failure, 64 configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .galois import FieldError, GF, field_create, is_prime, make_tower
from .msrcode import (
    CodeError,
    MsrCode,
    load_code,
    save_code,
    verify_exact_repair,
    verify_mds,
    verify_subspace_conditions,
    zigzag_construct,
)
from .secrecy import (
    EavesdropperPattern,
    PatternError,
    capacity_csv,
    capacity_rows,
    gabidulin_precoder,
    leakage_accounting,
    thm1_bound,
)
from . import dss_sim

EXIT_OK = 0
EXIT_INSECURE = 1
EXIT_VERIFY = 2
EXIT_CONFIG = 64

# flattening over GF(q) is used up to this many base-field input symbols
FLATTEN_LIMIT = 256


class ConfigError(ValueError):
    pass


def parse_field(value) -> GF | None:
    """``None``, a field order like ``4`` or ``"4"``, or ``"p^m"``."""
    if value is None:
        return None
    text = str(value).strip()
    m = re.fullmatch(r"(\d+)\s*\^\s*(\d+)", text)
    if m:
        p, e = int(m.group(1)), int(m.group(2))
    elif text.isdigit():
        q = int(text)
        p = next((c for c in range(2, q + 1) if q % c == 0), None)
        e = 0
        if p is None:
            raise ConfigError(f"field order {q} is not a prime power")
        while q % p == 0:
            q //= p
            e += 1
        if q != 1:
            raise ConfigError(f"field order {text} is not a prime power")
    else:
        raise ConfigError(f"cannot parse field {text!r}")
    if not is_prime(p):
        raise ConfigError(f"{p} is not prime")
    return field_create(p, e)


def parse_nodes(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in re.split(r"[,\s]+", text) if x]
    except ValueError as exc:
        raise ConfigError(f"bad node list {text!r}") from exc


def parse_pattern(value) -> EavesdropperPattern:
    """``"Es=1,2;Ed=3"``, either part optional, or a dict."""
    if value is None:
        return EavesdropperPattern()
    if isinstance(value, dict):
        return EavesdropperPattern.from_dict(value)
    es: list[int] = []
    ed: list[int] = []
    for part in str(value).split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, val = part.partition("=")
        key = key.strip().lower()
        if key == "es":
            es = parse_nodes(val)
        elif key == "ed":
            ed = parse_nodes(val)
        else:
            raise ConfigError(f"unknown pattern part {part!r}; use Es=... and Ed=...")
    return EavesdropperPattern(es, ed)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


class Settings:
    """Merged view of command-line flags over config-file values."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self._args = args
        self._config = config

    def get(self, name: str, default=None):
        val = getattr(self._args, name, None)
        if val is not None:
            return val
        val = self._config.get(name)
        return default if val is None else val

    def int(self, name: str, default=None):
        val = self.get(name, default)
        if val is None:
            return None
        try:
            return int(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} must be an integer, got {val!r}") from exc


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _code_from_settings(s: Settings) -> MsrCode:
    path = s.get("code")
    if path:
        try:
            return load_code(path)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot load code {path}: {exc}") from exc
    n, k = s.int("n"), s.int("k")
    if n is None or k is None:
        raise ConfigError("give --n and --k, or --code")
    d = s.int("d", n - 1)
    if not 1 <= k <= d <= n - 1:
        raise ConfigError(f"need 1 <= k <= d <= n-1, got (n,k,d)=({n},{k},{d})")
    if d != n - 1:
        raise ConfigError(f"no achievable construction for d < n-1 (got d={d}, n={n})")
    if k < 2 or n - k < 2:
        raise ConfigError("the zigzag construction needs k >= 2 and n-k >= 2")
    return zigzag_construct(k, n - k, parse_field(s.get("field")), s.int("max_alpha", 4096))


def _method(code: MsrCode, N: int, requested) -> str:
    if requested:
        if requested not in ("flatten", "extension"):
            raise ConfigError(f"unknown method {requested!r}")
        return requested
    return "flatten" if code.k * code.alpha * N <= FLATTEN_LIMIT else "extension"


def _tower(code: MsrCode, s: Settings):
    M = code.k * code.alpha
    N = s.int("tower_degree", M)
    if N < M:
        raise ConfigError(f"tower degree {N} is below k*alpha = {M}")
    return make_tower(code.field, N)


def verification_report(code: MsrCode) -> dict:
    p = code.params
    mds = verify_mds(code)
    bad_repair = verify_exact_repair(code)
    subspace = {str(j): verify_subspace_conditions(code, j).ok for j in range(1, p.k + 1)}
    return {
        "params": {"n": p.n, "k": p.k, "d": p.d, "alpha": p.alpha, "beta": p.beta, "field": str(p.field)},
        "coefficients": None if code.coefficients is None else list(code.coefficients),
        "bandwidth": {"d_beta": p.d * p.beta, "optimal": str(p.optimal_bandwidth)},
        "mds": {"ok": mds.ok, "checked": mds.checked, "failing": [list(a) for a in mds.failing]},
        "exact_repair": {"ok": not bad_repair, "failing": bad_repair},
        "subspace_conditions": subspace,
        "ok": mds.ok and not bad_repair and all(subspace.values()),
    }


def cmd_construct(s: Settings) -> int:
    code = _code_from_settings(s)
    report = verification_report(code)
    out = s.get("out")
    if out:
        save_code(code, out)
        report["code_file"] = str(out)
    else:
        report["code"] = code.to_dict()
    sys.stdout.write(_dump(report))
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def cmd_verify(s: Settings) -> int:
    code = _code_from_settings(s)
    try:
        code.validate()
        structural = None
    except CodeError as exc:
        structural = str(exc)
    report = verification_report(code)
    report["structural_error"] = structural
    report["ok"] = report["ok"] and structural is None
    _emit(_dump(report), s.get("out"))
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _bound_rows(n: int, k: int, d: int, alpha: int):
    rows = []
    for total in range(k):
        for l2 in range(total + 1):
            l1 = total - l2
            rows.append((n, k, d, alpha, l1, l2, thm1_bound(n, k, d, alpha, l1, l2), None))
    return rows


def _capacity_for(s: Settings, n: int | None = None, k: int | None = None) -> list:
    achieve = not s.get("no_achieve", False)
    if n is None and s.get("code"):
        code = _code_from_settings(s)
    else:
        if n is None:
            n, k, d = s.int("n"), s.int("k"), s.int("d")
            if n is None or k is None:
                raise ConfigError("give --n and --k, or --code")
            d = n - 1 if d is None else d
        else:
            d = n - 1
        if not 1 <= k <= d <= n - 1:
            raise ConfigError(f"need 1 <= k <= d <= n-1, got (n,k,d)=({n},{k},{d})")
        if d != n - 1:
            # no construction exists here, so only the bound is reported
            alpha = s.int("alpha", (d - k + 1) ** k)
            if alpha < 1 or alpha % (d - k + 1):
                raise ConfigError("alpha must be a positive multiple of d-k+1")
            return _bound_rows(n, k, d, alpha)
        if not achieve:
            return _bound_rows(n, k, d, (n - k) ** k)
        code = _code_from_settings(Settings(argparse.Namespace(n=n, k=k, d=d, code=None), s._config | {
            "field": s.get("field"), "max_alpha": s.get("max_alpha")}))
    if not achieve:
        p = code.params
        return _bound_rows(p.n, p.k, p.d, p.alpha)
    tower = _tower(code, s)
    return capacity_rows(code, tower, True, _method(code, tower.degree, s.get("method")))


def cmd_capacity(s: Settings) -> int:
    rows = _capacity_for(s)
    _emit(capacity_csv(rows), s.get("out"))
    return EXIT_OK


def cmd_table(s: Settings) -> int:
    value = s.get("params") or "4,2;5,3"
    rows = []
    for part in str(value).split(";"):
        nk = parse_nodes(part)
        if len(nk) != 2:
            raise ConfigError(f"table params must be n,k pairs separated by ';', got {part!r}")
        rows.extend(_capacity_for(s, *nk))
    _emit(capacity_csv(rows), s.get("out"))
    return EXIT_OK


def _secret_size(s: Settings, code: MsrCode, pattern: EavesdropperPattern) -> int:
    M = code.k * code.alpha
    if s.get("unkeyed"):
        return M
    ms = s.int("ms")
    if ms is None:
        p = code.params
        ms = int(thm1_bound(p.n, p.k, p.d, p.alpha, pattern.l1, pattern.l2))
    if not 0 <= ms <= M:
        raise ConfigError(f"secret size {ms} outside 0..{M}")
    return ms


def cmd_attack(s: Settings) -> int:
    code = _code_from_settings(s)
    pattern = parse_pattern(s.get("pattern"))
    pattern.validate(code.params)
    tower = _tower(code, s)
    precoder = gabidulin_precoder(code.k * code.alpha, _secret_size(s, code, pattern), tower)
    report = leakage_accounting(code, pattern, precoder, _method(code, tower.degree, s.get("method")))
    _emit(report.to_json() + "\n", s.get("out"))
    return EXIT_OK if report.secrecy_ok else EXIT_INSECURE


def cmd_simulate(s: Settings) -> int:
    code = _code_from_settings(s)
    pattern = parse_pattern(s.get("pattern"))
    pattern.validate(code.params)
    tower = _tower(code, s)
    M = code.k * code.alpha
    ms = _secret_size(s, code, pattern)
    precoder = gabidulin_precoder(M, ms, tower)
    seed = s.int("seed", 0)
    rng = np.random.default_rng(seed)
    secret = rng.integers(0, tower.ext.order, size=ms, dtype=np.int64)
    state = dss_sim.store(code, precoder, secret, seed=seed + 1)
    start = state.digest()
    repairs = s.get("repairs")
    if repairs is None:
        order = sorted(pattern.repair_observed) or list(range(1, code.k + 1))
    elif isinstance(repairs, list):
        order = [int(x) for x in repairs]
    else:
        order = parse_nodes(str(repairs))
    lines = [{"type": "store", "secret_size": ms, "digest": start, "seed": seed}]
    log = dss_sim.EveLog(pattern, precoder)
    dss_sim.eve_accumulate(state, log)
    for node in order:
        try:
            ev = dss_sim.fail_and_repair(state, node)
        except dss_sim.UnsupportedScenarioError as exc:
            raise ConfigError(str(exc)) from exc
        lines.append(ev.to_dict())
        if node in pattern.repair_observed:
            dss_sim.eve_accumulate(state, log, [ev])
    collected = {}
    for A in itertools.combinations(range(1, code.n + 1), code.k):
        collected[",".join(map(str, A))] = bool(np.array_equal(dss_sim.collect(state, A), secret))
    leaked = dss_sim.attempt_decode(log, code)
    invariant = state.digest() == start and state.check_invariant()
    lines.append({"type": "collect", "all_recover_secret": all(collected.values()), "subsets": len(collected)})
    lines.append(
        {
            "type": "eve",
            "pattern": pattern.to_dict(),
            "leaked_dimensions": leaked,
            "log_consistent": log.consistent_with(state),
        }
    )
    lines.append({"type": "end", "digest": state.digest(), "invariant": invariant})
    _emit("".join(json.dumps(x, sort_keys=True) + "\n" for x in lines), s.get("out"))
    if not invariant or not all(collected.values()):
        return EXIT_VERIFY
    return EXIT_OK if leaked == 0 else EXIT_INSECURE


def cmd_fig1(s: Settings) -> int:
    report = dss_sim.scenario_fig1()
    if s.get("json"):
        _emit(_dump(report.to_dict()), s.get("out"))
    else:
        _emit("\n".join(report.lines) + "\n", s.get("out"))
    reproduced = all(v == 0 for v in report.stored_only.values()) and report.repair_leak == 1
    return EXIT_OK if reproduced else EXIT_VERIFY


def _code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="number of nodes")
    p.add_argument("--k", type=int, help="nodes needed to reconstruct")
    p.add_argument("--d", type=int, help="repair degree (default n-1)")
    p.add_argument("--field", help="code field order, e.g. 4 or 2^2 (default: searched)")
    p.add_argument("--code", help="load a code file instead of constructing one")
    p.add_argument("--max-alpha", type=int, dest="max_alpha")


def _secrecy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pattern", help='eavesdropper pattern, e.g. "Es=1;Ed=2"')
    p.add_argument("--ms", type=int, help="secret size in positions (default: the bound)")
    p.add_argument("--unkeyed", action="store_true", default=None, help="store the secret without keys")
    p.add_argument("--tower-degree", type=int, dest="tower_degree")
    p.add_argument("--method", choices=("flatten", "extension"))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--config", help="JSON config; flags override its values")

    parser = argparse.ArgumentParser(prog="msrsec", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build and verify a zigzag MSR code")
    _code_args(p)
    p = sub.add_parser("verify", parents=[common], help="verify a code")
    _code_args(p)
    p = sub.add_parser("capacity", parents=[common], help="bound and achieved secure size per (l1, l2)")
    _code_args(p)
    p.add_argument("--alpha", type=int, help="alpha for bound-only rows when d < n-1")
    p.add_argument("--no-achieve", action="store_true", default=None, dest="no_achieve")
    p.add_argument("--tower-degree", type=int, dest="tower_degree")
    p.add_argument("--method", choices=("flatten", "extension"))
    p = sub.add_parser("attack", parents=[common], help="leakage report for one eavesdropper pattern")
    _code_args(p)
    _secrecy_args(p)
    p = sub.add_parser("simulate", parents=[common], help="store, repair, collect and eavesdrop")
    _code_args(p)
    _secrecy_args(p)
    p.add_argument("--repairs", help="systematic nodes to fail in order, e.g. 1,2,1")
    p = sub.add_parser("fig1", parents=[common], help="the three-share repair leak example")
    p.add_argument("--json", action="store_true", default=None)
    p = sub.add_parser("table", parents=[common], help="capacity CSV for several (n, k)")
    p.add_argument("--params", help='n,k pairs, default "4,2;5,3"')
    p.add_argument("--field")
    p.add_argument("--no-achieve", action="store_true", default=None, dest="no_achieve")
    p.add_argument("--tower-degree", type=int, dest="tower_degree")
    p.add_argument("--method", choices=("flatten", "extension"))
    return parser


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "capacity": cmd_capacity,
    "attack": cmd_attack,
    "simulate": cmd_simulate,
    "fig1": cmd_fig1,
    "table": cmd_table,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args, _load_config(args.config))
        return COMMANDS[args.command](settings)
    except (ConfigError, PatternError, FieldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CodeError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())

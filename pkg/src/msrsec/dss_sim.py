"""Deterministic simulation of a secured storage system under repair.

The simulator stores a precoded secret, fails and exactly repairs systematic
nodes, serves data collectors and records what an eavesdropper captures.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from .matgf import InconsistentSystemError, MatrixGF, left_kernel, rank, solve, vstack
from .msrcode import MsrCode, RepairError, encode, exact_repair
from .secrecy import (
    EavesdropperPattern,
    PatternError,
    Precoder,
    fig1_code,
    fig1_precoder,
    leaked_dimensions,
    perfect_secrecy_check,
)


class UnsupportedScenarioError(RuntimeError):
    """The simulator does not model this event (e.g. parity repair)."""


class CollectError(RuntimeError):
    """The contacted nodes do not determine the stored data."""


def _digest(values: np.ndarray) -> str:
    payload = json.dumps([int(v) for v in np.asarray(values).ravel()], separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class DssState:
    code: MsrCode
    precoder: Precoder
    node_contents: list[np.ndarray]
    generation: int = 0
    seed: int | None = None
    events: list[RepairEvent] = dc_field(default_factory=list)

    @property
    def field(self):
        return self.precoder.tower.ext

    def digest(self) -> str:
        """sha256 of the canonical JSON of all node contents."""
        payload = json.dumps(
            [[int(v) for v in node] for node in self.node_contents], separators=(",", ":")
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def data_vector(self) -> np.ndarray:
        return np.concatenate(self.node_contents[: self.code.k])

    def check_invariant(self) -> bool:
        expected = encode(self.code, self.node_contents[: self.code.k], self.field)
        return all(np.array_equal(a, b) for a, b in zip(expected, self.node_contents))


@dataclass(frozen=True)
class RepairEvent:
    failed: int
    helpers: tuple[int, ...]
    transcripts: dict[int, np.ndarray]
    restored: np.ndarray
    generation: int

    @property
    def download(self) -> int:
        return sum(len(t) for t in self.transcripts.values())

    def to_dict(self) -> dict:
        return {
            "type": "repair",
            "node": self.failed,
            "helpers": list(self.helpers),
            "transcript_digests": {str(h): _digest(self.transcripts[h]) for h in self.helpers},
        }


@dataclass(frozen=True)
class Capture:
    source: str
    node: int
    helper: int | None
    rows: MatrixGF  # functionals on the precoded data positions
    values: np.ndarray


@dataclass
class EveLog:
    pattern: EavesdropperPattern
    precoder: Precoder
    captured: list[Capture] = dc_field(default_factory=list)

    def view_matrix(self, cols: int, field) -> MatrixGF:
        return vstack([c.rows for c in self.captured], cols, field)

    def consistent_with(self, state: DssState) -> bool:
        data = state.data_vector()
        F = state.field
        return all(np.array_equal(c.rows.apply(data, F), c.values) for c in self.captured)


def store(code: MsrCode, precoder: Precoder, secret: Sequence[int], seed: int | None = 0, keys=None) -> DssState:
    """Precode ``secret`` with seeded random keys and encode onto all nodes."""
    if precoder.total != code.k * code.alpha:
        raise ValueError(f"precoder total {precoder.total} != k*alpha = {code.k * code.alpha}")
    if precoder.tower.base != code.field:
        raise ValueError("precoder tower is not built over the code field")
    secret = np.asarray(secret, dtype=np.int64).ravel()
    if secret.size != precoder.secret_size:
        raise ValueError(f"secret has {secret.size} symbols, precoder expects {precoder.secret_size}")
    if keys is None:
        rng = np.random.default_rng(seed)
        keys = rng.integers(0, precoder.tower.ext.order, size=precoder.n_keys, dtype=np.int64)
    data = precoder.encode(secret, keys)
    a = code.alpha
    w = [data[j * a : (j + 1) * a] for j in range(code.k)]
    return DssState(code, precoder, encode(code, w, precoder.tower.ext), 0, seed)


def fail_and_repair(state: DssState, i: int) -> RepairEvent:
    """Erase systematic node ``i`` and rebuild it from all survivors."""
    code = state.code
    if not 1 <= i <= code.n:
        raise ValueError(f"node {i} outside 1..{code.n}")
    if i > code.k:
        raise UnsupportedScenarioError("only systematic nodes are repaired in simulation")
    lost = state.node_contents[i - 1]
    state.node_contents[i - 1] = np.zeros_like(lost)
    helpers = code.helpers(i)
    transcripts = {
        h: code.repair_matrix(h, i).apply(state.node_contents[h - 1], state.field) for h in helpers
    }
    restored = exact_repair(code, i, transcripts, state.field)
    if not np.array_equal(restored, lost):
        state.node_contents[i - 1] = lost
        raise RepairError(f"repair of node {i} did not restore its contents")
    state.node_contents[i - 1] = restored
    state.generation += 1
    event = RepairEvent(i, helpers, transcripts, restored, state.generation)
    state.events.append(event)
    return event


def collect(state: DssState, A: Iterable[int]) -> np.ndarray:
    """Recover the secret from the nodes in ``A``."""
    code = state.code
    A = sorted(set(A))
    if len(A) != code.k or any(not 1 <= x <= code.n for x in A):
        raise ValueError(f"need {code.k} distinct nodes in 1..{code.n}")
    L = vstack([code.node_map(x) for x in A])
    y = np.concatenate([state.node_contents[x - 1] for x in A])
    try:
        z, ker = solve(L, MatrixGF(state.field, y.reshape(-1, 1)))
    except InconsistentSystemError as exc:
        raise CollectError(f"nodes {A} hold inconsistent data") from exc
    if ker.rows:
        raise CollectError(f"nodes {A} do not determine the data")
    return state.precoder.decode(z.data[:, 0])


def eve_accumulate(state: DssState, log: EveLog, events: Sequence[RepairEvent] = ()) -> EveLog:
    """Add stored blocks of Es and the transcripts of the given repairs.

    Stored blocks are added once; every event must repair a node of Ed.
    """
    code, pattern = state.code, log.pattern
    pattern.validate(code.params)
    if log.precoder is not state.precoder and log.precoder.to_dict() != state.precoder.to_dict():
        raise PatternError("log and state use different precoders")
    seen = {(c.source, c.node, c.helper) for c in log.captured}
    for node in sorted(pattern.stored_only):
        if ("stored", node, None) not in seen:
            log.captured.append(
                Capture("stored", node, None, code.node_map(node), state.node_contents[node - 1].copy())
            )
    for ev in events:
        if ev.failed not in pattern.repair_observed:
            raise PatternError(f"repair of node {ev.failed} is not observed by {pattern}")
        for h in ev.helpers:
            key = ("repair", ev.failed, h)
            if key in seen:
                continue
            seen.add(key)
            log.captured.append(
                Capture("repair", ev.failed, h, code.transcript_map(h, ev.failed), ev.transcripts[h].copy())
            )
    return log


def attempt_decode(log: EveLog, code: MsrCode) -> int:
    """Secret dimensions (base-field symbols) pinned down by the log."""
    if not log.captured:
        return 0
    P = log.precoder
    view = log.view_matrix(code.k * code.alpha, code.field)
    C = view.embed(P.tower.ext) @ P.generator
    return P.tower.degree * (rank(C) - rank(C[:, : P.n_keys]))


def eve_recover(log: EveLog, code: MsrCode) -> np.ndarray | None:
    """The secret as Eve computes it from her log, or None if not determined.

    Combinations of observations that cancel every key are functionals of the
    secret alone; when they have full rank Eve solves for the secret.
    """
    P = log.precoder
    if P.secret_size == 0 or not log.captured:
        return None
    ext = P.tower.ext
    view = log.view_matrix(code.k * code.alpha, code.field)
    values = np.concatenate([c.values for c in log.captured])
    C = view.embed(ext) @ P.generator
    Y = left_kernel(C[:, : P.n_keys]) if P.n_keys else MatrixGF.identity(ext, C.rows)
    if Y.rows == 0:
        return None
    S = Y @ C[:, P.n_keys :]
    if rank(S) < P.secret_size:
        return None
    v = Y.apply(values)
    x, _ = solve(S, MatrixGF(ext, v.reshape(-1, 1)))
    return x.data[:, 0]


def observed_pattern(log: EveLog) -> EavesdropperPattern:
    """The part of the pattern actually present in the log."""
    stored = {c.node for c in log.captured if c.source == "stored"}
    repaired = {c.node for c in log.captured if c.source == "repair"}
    return EavesdropperPattern(stored, repaired)


def events_jsonl(events: Sequence[RepairEvent]) -> str:
    return "".join(json.dumps(ev.to_dict(), sort_keys=True) + "\n" for ev in events)


@dataclass(frozen=True)
class Fig1Report:
    stored_only: dict[int, int]
    repair_leak: int
    recovered: int | None
    lines: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "stored_only_leaked": {str(k): v for k, v in self.stored_only.items()},
            "repair_node1_leaked": self.repair_leak,
            "recovered_secret": self.recovered,
            "narrative": list(self.lines),
        }


def scenario_fig1(secret: int = 1, key: int = 2) -> Fig1Report:
    """Single-share secrecy holds at rest and breaks once a repair is watched.

    Over GF(3) the shares are F+K, K and F+2K; node 1 is rebuilt from the
    other two, which is exactly enough to solve for F.
    """
    code, P = fig1_code(), fig1_precoder()
    state = store(code, P, [secret], keys=[key])
    labels = {1: "F+K", 2: "K", 3: "F+2K"}
    lines = [f"stored F={secret} with key K={key} over GF(3)"]
    for node in (1, 2, 3):
        lines.append(f"node {node} holds {labels[node]} = {int(state.node_contents[node - 1][0])}")
    stored = {}
    for node in (1, 2, 3):
        log = eve_accumulate(state, EveLog(EavesdropperPattern([node]), P))
        stored[node] = attempt_decode(log, code)
        assert stored[node] == leaked_dimensions(code, P, EavesdropperPattern([node]))
        lines.append(f"eavesdropper on node {node} alone: {stored[node]} leaked dimensions")
    for A in ((1, 2), (1, 3), (2, 3)):
        got = int(collect(state, A)[0])
        lines.append(f"collector on nodes {list(A)} recovers F={got}")
    event = fail_and_repair(state, 1)
    log = eve_accumulate(state, EveLog(EavesdropperPattern((), [1]), P), [event])
    leak = attempt_decode(log, code)
    dl = ", ".join(f"{labels[h]}={int(event.transcripts[h][0])}" for h in event.helpers)
    lines.append(f"node 1 fails; its replacement downloads {dl}")
    recovered = eve_recover(log, code)
    got = "nothing" if recovered is None else f"F={int(recovered[0])}"
    lines.append(f"eavesdropper on the replacement: {leak} leaked dimension(s), decodes {got}")
    secure = perfect_secrecy_check(code, P, EavesdropperPattern((), [1]))
    lines.append(f"perfect secrecy under repair observation: {secure}")
    return Fig1Report(stored, leak, None if recovered is None else int(recovered[0]), tuple(lines))

"""Eavesdropper views, rank-based secrecy tests and secure capacity.

Entropies of linear observations of uniform data are ranks.  Eve's view of
a code is a matrix over the code field GF(q) acting on the k*alpha storage
coordinates; a precoder over GF(q^N) mixes the secret with random keys
before the data is laid out on the systematic nodes.

Capacities are counted in GF(q^N) positions, the same unit as alpha, and
one position is N base-field symbols.  Leaked dimensions are counted in
base-field symbols.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .galois import GF, TowerSpec, flatten_multipliers, make_tower
from .matgf import MatrixGF, echelon_pivots, field_matmul, inverse, rank, rref, subspace_sum_dim, vstack
from .msrcode import DssParams, MsrCode

BRUTEFORCE_LIMIT = 3_000_000
CSV_HEADER = ("n", "k", "d", "alpha", "l1", "l2", "bound", "achieved")


class PatternError(ValueError):
    """An eavesdropper pattern is not admissible for the given code."""


@dataclass(frozen=True)
class EavesdropperPattern:
    stored_only: frozenset[int] = frozenset()
    repair_observed: frozenset[int] = frozenset()

    def __init__(self, stored_only: Iterable[int] = (), repair_observed: Iterable[int] = ()):
        object.__setattr__(self, "stored_only", frozenset(int(x) for x in stored_only))
        object.__setattr__(self, "repair_observed", frozenset(int(x) for x in repair_observed))

    @property
    def l1(self) -> int:
        return len(self.stored_only)

    @property
    def l2(self) -> int:
        return len(self.repair_observed)

    def validate(self, params: DssParams) -> None:
        n, k = params.n, params.k
        if any(not 1 <= x <= n for x in self.stored_only):
            raise PatternError(f"stored-only nodes must lie in 1..{n}")
        if any(not 1 <= x <= k for x in self.repair_observed):
            raise PatternError(f"repair-observed nodes must be systematic (1..{k})")
        if self.stored_only & self.repair_observed:
            raise PatternError("a node cannot be both stored-only and repair-observed")
        if self.l1 + self.l2 >= k:
            raise PatternError(f"l1 + l2 = {self.l1 + self.l2} must be below k = {k}")

    def __le__(self, other: EavesdropperPattern) -> bool:
        """Every observation in ``self`` is also made in ``other``."""
        return self.repair_observed <= other.repair_observed and self.stored_only <= (
            other.stored_only | other.repair_observed
        )

    def to_dict(self) -> dict:
        return {"stored_only": sorted(self.stored_only), "repair_observed": sorted(self.repair_observed)}

    @staticmethod
    def from_dict(d: dict) -> EavesdropperPattern:
        return EavesdropperPattern(d.get("stored_only", ()), d.get("repair_observed", ()))

    def __str__(self) -> str:
        return f"Es={sorted(self.stored_only)} Ed={sorted(self.repair_observed)}"


def enumerate_patterns(n: int, k: int, l1: int, l2: int) -> Iterator[EavesdropperPattern]:
    """All patterns with |Es| = l1 and |Ed| = l2, Ed systematic and disjoint from Es."""
    if l1 < 0 or l2 < 0 or l1 + l2 >= k:
        raise PatternError(f"need l1, l2 >= 0 and l1 + l2 < k, got ({l1}, {l2}) with k = {k}")
    for Es in itertools.combinations(range(1, n + 1), l1):
        rest = [i for i in range(1, k + 1) if i not in Es]
        for Ed in itertools.combinations(rest, l2):
            yield EavesdropperPattern(Es, Ed)


def eve_view_matrix(code: MsrCode, pattern: EavesdropperPattern) -> MatrixGF:
    """Rows: every symbol Eve sees, as functionals of the systematic data.

    A repair-observed node contributes the transcripts from all survivors of
    one repair event; its own contents are a function of those.
    """
    pattern.validate(code.params)
    blocks = [code.node_map(i) for i in sorted(pattern.stored_only)]
    for i in sorted(pattern.repair_observed):
        blocks.extend(code.transcript_map(h, i) for h in code.helpers(i))
    return vstack(blocks, code.k * code.alpha, code.field)


def linear_entropy(view: MatrixGF) -> int:
    return rank(view)


def _check_bound_args(n: int, k: int, d: int, l1: int, l2: int) -> None:
    if not 1 <= k <= d <= n - 1:
        raise ValueError(f"need 1 <= k <= d <= n-1, got (n,k,d)=({n},{k},{d})")
    if l1 < 0 or l2 < 0 or l1 + l2 >= k:
        raise ValueError(f"need l1, l2 >= 0 and l1 + l2 < k, got ({l1}, {l2})")
    if l1 > n:
        raise ValueError("more stored-only nodes than nodes")


def thm1_bound(n: int, k: int, d: int, alpha, l1: int, l2: int) -> Fraction:
    """Upper bound (k-l1-l2) * (1 - 1/(d-k+1))^l2 * alpha on the secure file size."""
    _check_bound_args(n, k, d, l1, l2)
    return (k - l1 - l2) * (1 - Fraction(1, d - k + 1)) ** l2 * Fraction(alpha)


def thm2_capacity(n: int, k: int, l1: int, l2: int) -> tuple[int, int]:
    """(alpha, capacity) at alpha = (n-k)^k and d = n-1."""
    _check_bound_args(n, k, n - 1, l1, l2)
    alpha = (n - k) ** k
    value = thm1_bound(n, k, n - 1, alpha, l1, l2)
    if value.denominator != 1:
        raise AssertionError(f"capacity {value} is not integral")  # pragma: no cover
    return alpha, int(value)


# -- leakage accounting ---------------------------------------------------


@dataclass(frozen=True)
class LeakageReport:
    pattern: EavesdropperPattern
    view_rank: int
    per_node_residual: tuple[tuple[int, int, int], ...]  # (node, alpha, dim)
    thm1_bound: Fraction
    secrecy_ok: bool

    @property
    def bound(self) -> int:
        """Sum of alpha - dim over the retained nodes."""
        return sum(a - dim for _, a, dim in self.per_node_residual)

    def to_dict(self) -> dict:
        return {
            "pattern": self.pattern.to_dict(),
            "view_rank": self.view_rank,
            "per_node_residual": [
                {"node": node, "alpha": a, "dim": dim} for node, a, dim in self.per_node_residual
            ],
            "thm1_bound": {"num": self.thm1_bound.numerator, "den": self.thm1_bound.denominator},
            "secrecy_ok": self.secrecy_ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(d: dict) -> LeakageReport:
        return LeakageReport(
            EavesdropperPattern.from_dict(d["pattern"]),
            d["view_rank"],
            tuple((r["node"], r["alpha"], r["dim"]) for r in d["per_node_residual"]),
            Fraction(d["thm1_bound"]["num"], d["thm1_bound"]["den"]),
            d["secrecy_ok"],
        )


def repair_residual(code: MsrCode, i: int, observed: Iterable[int]) -> int:
    """dim of the sum of what node i sends to the repairs of ``observed``."""
    parts = [code.repair_matrix(i, j) for j in sorted(observed)]
    return subspace_sum_dim(parts) if parts else 0


def leakage_accounting(
    code: MsrCode, pattern: EavesdropperPattern, precoder: Precoder | None = None, method: str = "flatten"
) -> LeakageReport:
    """Per-node entropy left after Eve's repair observations.

    The retained set holds k - l1 - l2 systematic nodes outside Es and Ed,
    those with the smallest residual first.  Without a precoder the data is
    unkeyed and secrecy holds only for an empty view.
    """
    p = code.params
    pattern.validate(p)
    view_rank = linear_entropy(eve_view_matrix(code, pattern))
    free = [i for i in range(1, p.k + 1) if i not in pattern.stored_only | pattern.repair_observed]
    residuals = [(i, p.alpha, repair_residual(code, i, pattern.repair_observed)) for i in free]
    residuals.sort(key=lambda r: (r[1] - r[2], r[0]))
    kept = tuple(sorted(residuals[: p.k - pattern.l1 - pattern.l2]))
    bound = thm1_bound(p.n, p.k, p.d, p.alpha, pattern.l1, pattern.l2)
    if precoder is None:
        ok = view_rank == 0
    else:
        ok = perfect_secrecy_check(code, precoder, pattern, method)
    return LeakageReport(pattern, view_rank, kept, bound, ok)


# -- precoding -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Precoder:
    """Invertible map from inputs (keys; secret) to the M data positions.

    ``generator[pos][input]``; the first ``total - secret_size`` inputs are
    keys and the last ``secret_size`` inputs carry the secret.
    """

    tower: TowerSpec
    total: int
    secret_size: int
    generator: MatrixGF
    _inv: list = dc_field(default_factory=list, repr=False)

    def __post_init__(self):
        if not 0 <= self.secret_size <= self.total:
            raise ValueError(f"secret size {self.secret_size} outside 0..{self.total}")
        if self.generator.shape != (self.total, self.total) or self.generator.field != self.tower.ext:
            raise ValueError(f"generator must be {self.total} x {self.total} over {self.tower.ext}")
        if rank(self.generator) != self.total:
            raise ValueError("precoder generator is singular")

    @property
    def n_keys(self) -> int:
        return self.total - self.secret_size

    @property
    def key_generator(self) -> MatrixGF:
        return self.generator[:, : self.n_keys]

    def inverse(self) -> MatrixGF:
        if not self._inv:
            self._inv.append(inverse(self.generator))
        return self._inv[0]

    def encode(self, secret: Sequence[int], keys: Sequence[int]) -> np.ndarray:
        secret = np.asarray(secret, dtype=np.int64).ravel()
        keys = np.asarray(keys, dtype=np.int64).ravel()
        if secret.size != self.secret_size or keys.size != self.n_keys:
            raise ValueError(f"need {self.n_keys} keys and {self.secret_size} secret symbols")
        x = np.concatenate([keys, secret])
        if x.size and (x.min() < 0 or x.max() >= self.tower.ext.order):
            raise ValueError(f"inputs are not elements of {self.tower.ext}")
        return self.generator.apply(x)

    def decode(self, data: Sequence[int]) -> np.ndarray:
        """The secret part of the inputs that produced ``data``."""
        return self.inverse().apply(data)[self.n_keys :]

    def with_secret_size(self, secret_size: int) -> Precoder:
        return Precoder(self.tower, self.total, secret_size, self.generator)

    def to_dict(self) -> dict:
        return {
            "tower": self.tower.to_dict(),
            "total": self.total,
            "secret_size": self.secret_size,
            "generator": self.generator.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> Precoder:
        return Precoder(
            TowerSpec.from_dict(d["tower"]), d["total"], d["secret_size"], MatrixGF.from_dict(d["generator"])
        )


def moore_matrix(tower: TowerSpec, points: Sequence[int], powers: int) -> MatrixGF:
    """``[g_j^(q^i)]`` with one row per point and one column per q-power."""
    ext = tower.ext
    cols = [np.asarray(points, dtype=np.int64)]
    for _ in range(1, powers):
        cols.append(ext.frobenius(cols[-1]))
    return MatrixGF(ext, np.stack(cols, axis=1))


def gabidulin_precoder(M: int, Ms: int, tower: TowerSpec) -> Precoder:
    """Moore-matrix precoder: position j holds sum_i y_i g_j^(q^i).

    The points g_j are the first M tower basis elements.  Keys occupy the low
    q-powers, so any mu <= M - Ms independent GF(q)-combinations of positions
    see an invertible Moore block on the keys alone.
    """
    if M < 1:
        raise ValueError("M must be positive")
    if tower.degree < M:
        raise ValueError(f"extension degree {tower.degree} is below M = {M}")
    if not 0 <= Ms <= M:
        raise ValueError(f"secret size {Ms} outside 0..{M}")
    G = moore_matrix(tower, tower.basis[:M], M)
    return Precoder(tower, M, Ms, G)


def default_tower(code: MsrCode) -> TowerSpec:
    return make_tower(code.field, code.k * code.alpha)


# -- secrecy tests ------------------------------------------------------


def _row_basis(view: MatrixGF) -> MatrixGF:
    R, r, _ = rref(view)
    return R[:r, :]


def _composite(code: MsrCode, precoder: Precoder, pattern: EavesdropperPattern) -> MatrixGF:
    """Eve's observations as a map on the precoder inputs over GF(q^N)."""
    if precoder.total != code.k * code.alpha:
        raise ValueError(f"precoder total {precoder.total} != k*alpha = {code.k * code.alpha}")
    if precoder.tower.base != code.field:
        raise ValueError(f"precoder base {precoder.tower.base} != code field {code.field}")
    E = _row_basis(eve_view_matrix(code, pattern))
    return E.embed(precoder.tower.ext) @ precoder.generator


def flatten_matrix(tower: TowerSpec, C: MatrixGF) -> MatrixGF:
    """The GF(q)-matrix of a GF(q^N)-matrix acting on coordinate vectors."""
    N = tower.degree
    blocks = flatten_multipliers(tower, C.data)  # (rows, cols, N, N)
    flat = np.transpose(blocks, (0, 2, 1, 3)).reshape(C.rows * N, C.cols * N)
    return MatrixGF(tower.base, flat)


def leaked_dimensions(
    code: MsrCode, precoder: Precoder, pattern: EavesdropperPattern, method: str = "flatten"
) -> int:
    """I(secret; Eve's view) in base-field symbols for uniform keys and secret.

    ``flatten`` works over GF(q) on coordinates; ``extension`` computes the
    same ranks over GF(q^N), where every GF(q)-rank is N times larger.
    """
    C = _composite(code, precoder, pattern)
    nk, N = precoder.n_keys, precoder.tower.degree
    if method == "flatten":
        flat = flatten_matrix(precoder.tower, C)
        return rank(flat) - rank(flat[:, : nk * N])
    if method == "extension":
        return N * (rank(C) - rank(C[:, :nk]))
    raise ValueError(f"unknown method {method!r}")


def perfect_secrecy_check(
    code: MsrCode, precoder: Precoder, pattern: EavesdropperPattern, method: str = "flatten"
) -> bool:
    return leaked_dimensions(code, precoder, pattern, method) == 0


# -- explicit schemes and the counting oracle ------------------------------


@dataclass(frozen=True)
class LinearScheme:
    """Observation map over GF(q) acting on (keys; secret) coordinates."""

    field: GF
    n_keys: int
    n_secret: int
    observation: MatrixGF

    def __post_init__(self):
        if self.observation.cols != self.n_keys + self.n_secret:
            raise ValueError("observation columns must equal the number of inputs")
        if self.observation.field != self.field:
            raise ValueError("observation must be over the scheme field")

    @property
    def n_inputs(self) -> int:
        return self.n_keys + self.n_secret

    def restrict(self, rows: Sequence[int]) -> LinearScheme:
        obs = MatrixGF(self.field, self.observation.data[list(rows)], self.n_inputs)
        return LinearScheme(self.field, self.n_keys, self.n_secret, obs)


def scheme_leakage(scheme: LinearScheme) -> int:
    O = scheme.observation
    if O.rows == 0:
        return 0
    return rank(O) - rank(O[:, : scheme.n_keys])


def linear_secrecy(scheme: LinearScheme) -> bool:
    return scheme_leakage(scheme) == 0


def scheme_from_code(code: MsrCode, precoder: Precoder, pattern: EavesdropperPattern) -> LinearScheme:
    """Flatten a precoded code and a pattern into an explicit GF(q) scheme."""
    flat = flatten_matrix(precoder.tower, _composite(code, precoder, pattern))
    N = precoder.tower.degree
    return LinearScheme(code.field, precoder.n_keys * N, precoder.secret_size * N, flat)


def secrecy_oracle_bruteforce(scheme: LinearScheme) -> bool:
    """Exact counting: every observed value leaves the secret uniform."""
    F, t, s = scheme.field, scheme.n_inputs, scheme.n_secret
    q = F.order
    if q**t > BRUTEFORCE_LIMIT:
        raise ValueError(f"{q}^{t} input assignments exceed the enumeration limit")
    O = scheme.observation
    count = q**t
    idx = np.arange(count, dtype=np.int64)
    inputs = np.stack([(idx // q**c) % q for c in range(t)], axis=1) if t else np.zeros((1, 0), np.int64)
    secret = inputs[:, scheme.n_keys :]
    s_code = secret @ (q ** np.arange(s, dtype=np.int64)) if s else np.zeros(count, np.int64)
    if O.rows == 0 or s == 0:
        return True
    obs = field_matmul(F, inputs, O.data.T)
    # observed tuples are keyed by their position in a sorted unique table
    _, o_code = np.unique(obs, axis=0, return_inverse=True)
    o_code = o_code.ravel().astype(np.int64)
    joint = o_code * q**s + s_code
    pairs, counts = np.unique(joint, return_counts=True)
    o_of_pair = pairs // q**s
    o_vals, starts, per_o = np.unique(o_of_pair, return_index=True, return_counts=True)
    if np.any(per_o != q**s):
        return False
    lo = np.minimum.reduceat(counts, starts)
    hi = np.maximum.reduceat(counts, starts)
    return bool(np.all(lo == hi))


def fig1_code(field: GF | None = None) -> MsrCode:
    """Three nodes of unit size over GF(3): w1, w2 and the parity w1 + w2."""
    from .galois import field_create

    F = field or field_create(3)
    params = DssParams(3, 2, 2, 1, 1, F)
    one = MatrixGF(F, [[1]])
    coding = ((one, one),)
    repair = {(h, i): one for i in (1, 2) for h in (1, 2, 3) if h != i}
    code = MsrCode(params, coding, repair, (1, 1))
    code.validate()
    return code


def fig1_precoder() -> Precoder:
    """Inputs (K; F): node 1 stores F + K and node 2 stores K."""
    from .galois import extend, field_create

    F = field_create(3)
    tower = TowerSpec(F, extend(F, 1))
    return Precoder(tower, 2, 1, MatrixGF(tower.ext, [[1, 1], [1, 0]]))


def fig1_scheme(pattern: EavesdropperPattern) -> LinearScheme:
    return scheme_from_code(fig1_code(), fig1_precoder(), pattern)


# -- capacity search -----------------------------------------------------


@dataclass(frozen=True)
class PatternProfile:
    pattern: EavesdropperPattern
    view_rank: int
    max_secret: int


@dataclass(frozen=True)
class CapacityCertificate:
    params: DssParams
    l1: int
    l2: int
    tower_degree: int
    achieved: int
    bound: Fraction
    profiles: tuple[PatternProfile, ...]
    secure_at_achieved: bool
    failing_above: EavesdropperPattern | None
    method: str

    @property
    def achieved_base_symbols(self) -> int:
        return self.achieved * self.tower_degree

    @property
    def tight(self) -> bool:
        """No larger secret passes: a pattern fails at achieved + 1, or the
        secret already fills all k*alpha positions."""
        total = self.params.k * self.params.alpha
        return self.failing_above is not None or self.achieved == total

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "k": self.params.k,
            "d": self.params.d,
            "alpha": self.params.alpha,
            "l1": self.l1,
            "l2": self.l2,
            "units": f"GF(q^{self.tower_degree}) positions; 1 position = {self.tower_degree} base symbols",
            "achieved": self.achieved,
            "achieved_base_symbols": self.achieved_base_symbols,
            "bound": {"num": self.bound.numerator, "den": self.bound.denominator},
            "patterns": [
                {"pattern": pp.pattern.to_dict(), "view_rank": pp.view_rank, "max_secret": pp.max_secret}
                for pp in self.profiles
            ],
            "secure_at_achieved": self.secure_at_achieved,
            "failing_above": None if self.failing_above is None else self.failing_above.to_dict(),
            "tight": self.tight,
            "method": self.method,
        }


def pattern_profile(code: MsrCode, precoder: Precoder, pattern: EavesdropperPattern) -> PatternProfile:
    """Largest secret size this single pattern tolerates.

    The generator does not depend on the split between keys and secret, so
    the pivot columns of Eve's composite decide every split at once: the
    secret is safe iff all pivots fall among the key columns.
    """
    C = _composite(code, precoder, pattern)
    pivots = echelon_pivots(C)
    max_secret = precoder.total - (pivots[-1] + 1 if pivots else 0)
    return PatternProfile(pattern, len(pivots), max_secret)


def max_secure_filesize(
    code: MsrCode,
    l1: int,
    l2: int,
    tower: TowerSpec | None = None,
    method: str = "flatten",
) -> tuple[int, CapacityCertificate]:
    """Largest Moore-precoded secret secure against every pattern of size (l1, l2).

    ``method`` selects the rank route used to certify the result.
    """
    p = code.params
    tower = tower or default_tower(code)
    M = p.k * p.alpha
    G = gabidulin_precoder(M, 0, tower)
    patterns = list(enumerate_patterns(p.n, p.k, l1, l2))
    profiles = tuple(pattern_profile(code, G, pat) for pat in patterns)
    achieved = min(pp.max_secret for pp in profiles)
    at = G.with_secret_size(achieved)
    secure = all(perfect_secrecy_check(code, at, pat, method) for pat in patterns)
    failing = None
    if achieved < M:
        above = G.with_secret_size(achieved + 1)
        failing = next((pat for pat in patterns if not perfect_secrecy_check(code, above, pat, method)), None)
    bound = thm1_bound(p.n, p.k, p.d, p.alpha, l1, l2)
    cert = CapacityCertificate(p, l1, l2, tower.degree, achieved, bound, profiles, secure, failing, method)
    return achieved, cert


def capacity_rows(code: MsrCode, tower: TowerSpec | None = None, achieve: bool = True, method: str = "flatten"):
    """(n, k, d, alpha, l1, l2, bound, achieved) for every l1 + l2 < k."""
    p = code.params
    rows = []
    for total in range(p.k):
        for l2 in range(total + 1):
            l1 = total - l2
            bound = thm1_bound(p.n, p.k, p.d, p.alpha, l1, l2)
            achieved = None
            if achieve and p.d == p.n - 1:
                achieved, _ = max_secure_filesize(code, l1, l2, tower, method)
            rows.append((p.n, p.k, p.d, p.alpha, l1, l2, bound, achieved))
    rows.sort(key=lambda r: (r[4] + r[5], r[5], r[4]))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction) and v.denominator != 1:
        return f"{v.numerator}/{v.denominator}"
    return str(int(v))


def capacity_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()

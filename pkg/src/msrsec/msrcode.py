"""Systematic MSR codes with optimal-bandwidth exact repair.

Nodes are numbered 1..n as in the storage literature: nodes 1..k are
systematic and node k+t holds parity t.  Data vectors are integer-encoded
numpy arrays over the code field or over any extension of it (the code is
applied symbol-wise, so precoded GF(q^N) data uses the same matrices).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .galois import GF, field_create
from .matgf import (
    InconsistentSystemError,
    MatrixGF,
    contained_in,
    hstack,
    rank,
    same_row_space,
    solve,
    subspace_sum_dim,
    vstack,
)

DEFAULT_MAX_ALPHA = 4096


class CodeError(ValueError):
    """A code violates its construction or verification requirements."""


class RepairError(CodeError):
    """The supplied repair transcripts do not determine the lost node."""


@dataclass(frozen=True)
class DssParams:
    n: int
    k: int
    d: int
    alpha: int
    beta: int
    field: GF

    def __post_init__(self):
        if not 1 <= self.k <= self.d <= self.n - 1:
            raise CodeError(f"need 1 <= k <= d <= n-1, got (n,k,d)=({self.n},{self.k},{self.d})")
        if self.alpha < 1 or self.beta < 1:
            raise CodeError("alpha and beta must be positive")
        if self.beta * (self.d - self.k + 1) != self.alpha:
            raise CodeError(
                f"beta*(d-k+1) = {self.beta * (self.d - self.k + 1)} != alpha = {self.alpha}; "
                "repair bandwidth is not optimal"
            )

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def repair_bandwidth(self) -> int:
        return self.d * self.beta

    @property
    def optimal_bandwidth(self) -> Fraction:
        return Fraction(self.d * self.alpha, self.d - self.k + 1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "alpha": self.alpha,
            "beta": self.beta,
            "field": self.field.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> DssParams:
        return DssParams(d["n"], d["k"], d["d"], d["alpha"], d["beta"], GF.from_dict(d["field"]))


@dataclass(frozen=True, eq=False)
class MsrCode:
    """Coding matrices ``coding[t-1][j-1]`` (alpha x alpha) and repair
    matrices ``repair[(helper, failed)]`` (beta x alpha) for systematic
    ``failed``.  Helpers are all surviving nodes."""

    params: DssParams
    coding: tuple[tuple[MatrixGF, ...], ...]
    repair: Mapping[tuple[int, int], MatrixGF]
    coefficients: tuple[int, ...] | None = None
    _cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    @property
    def field(self) -> GF:
        return self.params.field

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def alpha(self) -> int:
        return self.params.alpha

    def coding_matrix(self, t: int, j: int) -> MatrixGF:
        return self.coding[t - 1][j - 1]

    def repair_matrix(self, helper: int, failed: int) -> MatrixGF:
        return self.repair[(helper, failed)]

    def helpers(self, failed: int) -> tuple[int, ...]:
        return tuple(h for h in range(1, self.n + 1) if h != failed)

    def node_map(self, node: int) -> MatrixGF:
        """alpha x k*alpha map from the systematic data to node's contents."""
        key = ("node", node)
        if key not in self._cache:
            k, a, F = self.k, self.alpha, self.field
            if not 1 <= node <= self.n:
                raise ValueError(f"node {node} outside 1..{self.n}")
            if node <= k:
                m = np.zeros((a, k * a), dtype=np.int64)
                m[:, (node - 1) * a : node * a] = np.eye(a, dtype=np.int64)
                self._cache[key] = MatrixGF(F, m)
            else:
                self._cache[key] = hstack(list(self.coding[node - k - 1]))
        return self._cache[key]

    def transcript_map(self, helper: int, failed: int) -> MatrixGF:
        """What ``helper`` sends when ``failed`` is repaired, as a map on the
        systematic data."""
        return self.repair_matrix(helper, failed) @ self.node_map(helper)

    def repair_decoder(self, failed: int, helpers: Sequence[int] | None = None) -> MatrixGF:
        """alpha x (sum of beta) matrix turning stacked transcripts into the lost node."""
        if not 1 <= failed <= self.k:
            raise CodeError("only systematic nodes have repair matrices")
        helpers = tuple(sorted(self.helpers(failed) if helpers is None else helpers))
        key = ("decoder", failed, helpers)
        if key not in self._cache:
            L = vstack([self.transcript_map(h, failed) for h in helpers], self.k * self.alpha, self.field)
            try:
                X, _ = solve(L.T, self.node_map(failed).T)
            except InconsistentSystemError as exc:
                raise RepairError(
                    f"transcripts from {list(helpers)} do not determine node {failed}"
                ) from exc
            self._cache[key] = X.T
        return self._cache[key]

    def validate(self) -> None:
        """Raise :class:`CodeError` unless every structural invariant holds."""
        p, F = self.params, self.field
        if len(self.coding) != p.r or any(len(row) != p.k for row in self.coding):
            raise CodeError("coding matrices must be indexed by (parity, systematic)")
        for t, row in enumerate(self.coding, 1):
            for j, A in enumerate(row, 1):
                if A.field != F or A.shape != (p.alpha, p.alpha):
                    raise CodeError(f"A[{t},{j}] must be alpha x alpha over {F}")
                if rank(A) != p.alpha:
                    raise CodeError(f"A[{t},{j}] is singular")
        for i in range(1, p.k + 1):
            for h in self.helpers(i):
                V = self.repair.get((h, i))
                if V is None or V.shape != (p.beta, p.alpha):
                    raise CodeError(f"V[{h},{i}] must be beta x alpha")
                if rank(V) != p.beta:
                    raise CodeError(f"V[{h},{i}] is not of full row rank")
        report = verify_mds(self)
        if not report.ok:
            raise CodeError(f"MDS property fails for node sets {list(report.failing)}")
        bad = verify_exact_repair(self)
        if bad:
            raise CodeError(f"exact repair fails for systematic nodes {bad}")

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "coding": [[A.to_dict() for A in row] for row in self.coding],
            "repair": [
                {"helper": h, "failed": i, "matrix": V.to_dict()}
                for (h, i), V in sorted(self.repair.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            ],
            "coefficients": None if self.coefficients is None else list(self.coefficients),
        }

    @staticmethod
    def from_dict(d: dict) -> MsrCode:
        coding = tuple(tuple(MatrixGF.from_dict(A) for A in row) for row in d["coding"])
        repair = {(e["helper"], e["failed"]): MatrixGF.from_dict(e["matrix"]) for e in d["repair"]}
        coeffs = d.get("coefficients")
        return MsrCode(
            DssParams.from_dict(d["params"]),
            coding,
            repair,
            None if coeffs is None else tuple(coeffs),
        )


def save_code(code: MsrCode, path: str | Path) -> None:
    Path(path).write_text(json.dumps(code.to_dict(), sort_keys=True) + "\n", encoding="utf-8")


def load_code(path: str | Path) -> MsrCode:
    return MsrCode.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _data_field(code: MsrCode, field: GF | None) -> GF:
    F = field or code.field
    if not F.is_extension_of(code.field):
        raise CodeError(f"data field {F} does not contain the code field {code.field}")
    return F


def encode(code: MsrCode, w: Sequence, field: GF | None = None) -> list[np.ndarray]:
    """Contents of all n nodes for systematic data ``w`` (k vectors of length alpha)."""
    F = _data_field(code, field)
    if len(w) != code.k:
        raise CodeError(f"expected {code.k} systematic vectors, got {len(w)}")
    blocks = [np.asarray(x, dtype=np.int64).ravel() for x in w]
    for b in blocks:
        if b.shape != (code.alpha,):
            raise CodeError(f"systematic vectors must have length {code.alpha}")
        if b.size and (b.min() < 0 or b.max() >= F.order):
            raise CodeError(f"data symbols are not elements of {F}")
    z = np.concatenate(blocks)
    parities = [code.node_map(code.k + t).apply(z, F) for t in range(1, code.params.r + 1)]
    return [b.copy() for b in blocks] + parities


class MdsReport(NamedTuple):
    ok: bool
    checked: int
    failing: tuple[tuple[int, ...], ...]


def verify_mds(code: MsrCode) -> MdsReport:
    """Every k nodes determine the systematic data (stacked map invertible)."""
    failing = []
    full = code.k * code.alpha
    subsets = list(itertools.combinations(range(1, code.n + 1), code.k))
    for A in subsets:
        if rank(vstack([code.node_map(x) for x in A])) != full:
            failing.append(A)
    return MdsReport(not failing, len(subsets), tuple(failing))


def verify_exact_repair(code: MsrCode) -> list[int]:
    """Systematic nodes whose full transcript set does not determine them."""
    bad = []
    for i in range(1, code.k + 1):
        try:
            code.repair_decoder(i)
        except RepairError:
            bad.append(i)
    return bad


def exact_repair(
    code: MsrCode, i: int, transcripts: Mapping[int, Sequence[int]], field: GF | None = None
) -> np.ndarray:
    """Rebuild systematic node ``i`` from ``{helper: V[helper,i] w_helper}``."""
    F = _data_field(code, field)
    helpers = tuple(sorted(transcripts))
    if i in helpers:
        raise RepairError("the failed node cannot help its own repair")
    for h in helpers:
        if len(transcripts[h]) != code.params.beta:
            raise RepairError(f"transcript from node {h} must have length beta={code.params.beta}")
    D = code.repair_decoder(i, helpers)
    s = np.concatenate([np.asarray(transcripts[h], dtype=np.int64) for h in helpers])
    return D.apply(s, F)


# -- zigzag construction -------------------------------------------------


def _digits(alpha: int, r: int, k: int) -> np.ndarray:
    """digits[v, t] = t-th base-r digit of coordinate v (digit t <-> node t+1)."""
    v = np.arange(alpha)
    return np.stack([(v // r**t) % r for t in range(k)], axis=1)


def _shift_perm(r: int, k: int, j: int, s: int) -> np.ndarray:
    """Permutation matrix of v -> v + s*e_j over Z_r^k (j is 1-based)."""
    alpha = r**k
    dig = _digits(alpha, r, k)
    v = np.arange(alpha)
    target = v + ((dig[:, j - 1] + s) % r - dig[:, j - 1]) * r ** (j - 1)
    P = np.zeros((alpha, alpha), dtype=np.int64)
    P[target, v] = 1
    return P


def slab_rows(r: int, k: int, node: int, value: int = 0) -> np.ndarray:
    """Coordinates v with digit v_node == value, in increasing order."""
    dig = _digits(r**k, r, k)
    return np.flatnonzero(dig[:, node - 1] == value)


def zigzag_layout(k: int, r: int, field: GF, coefficients: Sequence[int] | None = None) -> MsrCode:
    """The zigzag template with coefficients ``c[t,j]`` (t-major), unverified.

    A[t,j] = c[t,j] * P_j^(t-1) with P_j the shift v -> v + e_j on Z_r^k, and
    every helper answers the repair of node i with the slab {v : v_i = 0}.
    """
    if k < 1 or r < 1:
        raise CodeError("k and r must be positive")
    alpha, beta, n = r**k, r ** (k - 1), k + r
    if coefficients is None:
        coefficients = (1,) * (r * k)
    coefficients = tuple(int(c) for c in coefficients)
    if len(coefficients) != r * k or any(not 0 < c < field.order for c in coefficients):
        raise CodeError(f"need {r * k} nonzero coefficients in {field}")
    params = DssParams(n, k, n - 1, alpha, beta, field)
    coding = tuple(
        tuple(
            MatrixGF(field, field.mul(_shift_perm(r, k, j, t - 1), coefficients[(t - 1) * k + j - 1]))
            for j in range(1, k + 1)
        )
        for t in range(1, r + 1)
    )
    repair = {}
    eye = np.eye(alpha, dtype=np.int64)
    for i in range(1, k + 1):
        V = MatrixGF(field, eye[slab_rows(r, k, i)])
        for h in range(1, n + 1):
            if h != i:
                repair[(h, i)] = V
    return MsrCode(params, coding, repair, coefficients)


def _fast_mds(k: int, r: int, field: GF, perms, coeffs) -> bool:
    alpha = r**k
    blocks = {}
    for t in range(1, r + 1):
        row = [field.mul(perms[(t, j)], coeffs[(t - 1) * k + j - 1]) for j in range(1, k + 1)]
        blocks[k + t] = np.hstack(row)
    eye = np.eye(k * alpha, dtype=np.int64)
    for j in range(1, k + 1):
        blocks[j] = eye[(j - 1) * alpha : j * alpha]
    # subsets with the most parity nodes are checked first; they fail most often
    subsets = sorted(itertools.combinations(range(1, k + r + 1), k), key=lambda s: -sum(x > k for x in s))
    for A in subsets:
        if sum(x > k for x in A) == 0:
            continue
        if rank(MatrixGF._trusted(field, np.vstack([blocks[x] for x in A]))) != k * alpha:
            return False
    return True


def default_fields(r: int) -> list[GF]:
    if r == 2:
        return [field_create(2, 2)]
    return [field_create(p, m) for p, m in ((2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4))]


def zigzag_construct(
    k: int,
    r: int = 2,
    field: GF | None = None,
    max_alpha: int = DEFAULT_MAX_ALPHA,
    max_candidates: int | None = None,
) -> MsrCode:
    """Verified (k+r, k, k+r-1) zigzag MSR code with alpha = r^k.

    Coefficients are the first assignment, in lexicographic order over the
    nonzero field elements, that makes the code MDS.
    """
    if k < 2 or r < 2:
        raise CodeError("zigzag construction needs k >= 2 and r >= 2")
    if r**k > max_alpha:
        raise CodeError(f"alpha = {r}^{k} exceeds the configured maximum {max_alpha}")
    fields = [field] if field is not None else default_fields(r)
    perms = {(t, j): _shift_perm(r, k, j, t - 1) for t in range(1, r + 1) for j in range(1, k + 1)}
    for F in fields:
        nonzero = range(1, F.order)
        candidates = itertools.product(nonzero, repeat=r * k)
        if max_candidates is not None:
            candidates = itertools.islice(candidates, max_candidates)
        for coeffs in candidates:
            if _fast_mds(k, r, F, perms, coeffs):
                code = zigzag_layout(k, r, F, coeffs)
                code.validate()
                return code
    raise CodeError(f"no MDS coefficient assignment for k={k}, r={r} over {[str(F) for F in fields]}")


# -- subspace structure ---------------------------------------------------


class SubspaceReport(NamedTuple):
    ok: bool
    checks: tuple[tuple[str, bool], ...]


def verify_subspace_conditions(code: MsrCode, j: int) -> SubspaceReport:
    """Interference-alignment conditions for repairing systematic node ``j``.

    With two parities: S1 A_i ~ S2 B_i ~ V[i,j] for every other systematic i,
    and S1 A_j + S2 B_j is the whole space.  With more parities every
    parity-projected interference block from node i lies in V[i,j] and the
    projections of node j jointly span the space.
    """
    p = code.params
    if not 1 <= j <= p.k:
        raise ValueError(f"node {j} is not systematic")
    for h in code.helpers(j):
        V = code.repair_matrix(h, j)
        if V.shape != (p.beta, p.alpha) or rank(V) != p.beta:
            raise CodeError(f"V[{h},{j}] is not a full-rank beta x alpha repair matrix")
    checks: list[tuple[str, bool]] = []
    S = {t: code.repair_matrix(p.k + t, j) for t in range(1, p.r + 1)}
    for i in range(1, p.k + 1):
        if i == j:
            continue
        V = code.repair_matrix(i, j)
        proj = {t: S[t] @ code.coding_matrix(t, i) for t in S}
        if p.r == 2:
            checks.append((f"S1 A_{i} ~ S2 B_{i}", same_row_space(proj[1], proj[2])))
            checks.append((f"S2 B_{i} ~ V_{i},{j}", same_row_space(proj[2], V)))
        else:
            for t in S:
                checks.append((f"S{t} A{t}_{i} in V_{i},{j}", contained_in(proj[t], V)))
    own = [S[t] @ code.coding_matrix(t, j) for t in S]
    checks.append((f"sum of parity projections of node {j} spans F^alpha", subspace_sum_dim(own) == p.alpha))
    return SubspaceReport(all(ok for _, ok in checks), tuple(checks))


class Lemma1Profile(NamedTuple):
    dim: int
    bound: Fraction
    meets: bool


def lemma1_bound(n: int, k: int, d: int, alpha: int, size: int) -> Fraction:
    """(1 - ((d-k)/(d-k+1))^size) * alpha; with d = n-1 this is the
    two-or-more-parity form in terms of n-k."""
    if not 1 <= k <= d <= n - 1:
        raise ValueError("need 1 <= k <= d <= n-1")
    ratio = Fraction(d - k, d - k + 1)
    return (1 - ratio**size) * alpha


def lemma1_profile(code: MsrCode, i: int, A: Sequence[int]) -> Lemma1Profile:
    """Dimension of the sum of the repair subspaces node ``i`` sends to ``A``."""
    p = code.params
    A = sorted(set(A))
    if i in A:
        raise ValueError("the helper cannot belong to the repaired set")
    if not 1 <= i <= p.k or any(not 1 <= j <= p.k for j in A):
        raise ValueError("helper and repaired nodes must be systematic")
    dim = subspace_sum_dim([code.repair_matrix(i, j) for j in A]) if A else 0
    bound = lemma1_bound(p.n, p.k, p.d, p.alpha, len(A))
    return Lemma1Profile(dim, bound, dim >= bound)


def slab_union_size(r: int, k: int, A: Sequence[int]) -> int:
    """Number of coordinates v in Z_r^k with v_j = 0 for some j in A."""
    return r**k - r ** (k - len(set(A))) * (r - 1) ** len(set(A))


def mds_subset_count(code: MsrCode) -> int:
    return comb(code.n, code.k)

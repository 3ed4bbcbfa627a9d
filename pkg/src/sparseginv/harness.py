"""Random instances with prescribed spectra and batch experiments.

Instances have singular values ``M * rho**i`` (i = 1..r) and Haar-like
orthonormal factors from QR of seeded Gaussian matrices.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg, lp, search, verify
from .errors import GinvError, InvalidSpec

METHODS = ("local_search_ah", "local_search_sym", "lp_p1", "lp_p13", "lp_p123")
COLUMNS = (
    "m", "n", "r", "seed", "method", "one_norm", "nnz", "swaps",
    "wall_time_s", "init_one_norm", "certified_ratio", "error",
)


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    r: int
    seed: int = 0
    M: float = 2.0
    rho: float | None = None  # None -> (1/M) ** (2/(r+1))
    symmetric: bool = False

    def __post_init__(self):
        if min(self.m, self.n, self.r) < 1 or self.r > min(self.m, self.n):
            raise InvalidSpec(f"need 1 <= r <= min(m, n), got {(self.m, self.n, self.r)}")
        if self.symmetric and self.m != self.n:
            raise InvalidSpec("symmetric instances need m == n")
        if not self.M > 0:
            raise InvalidSpec("M must be positive")
        if self.rho is not None and not 0 < self.rho < 1:
            raise InvalidSpec("rho must lie in (0, 1)")

    @property
    def decay(self) -> float:
        return (1.0 / self.M) ** (2.0 / (self.r + 1)) if self.rho is None else self.rho

    def singular_values(self) -> np.ndarray:
        return self.M * self.decay ** np.arange(1, self.r + 1)

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(self.m, self.n, self.r, seed, self.M, self.rho, self.symmetric)


def _orthonormal(rng: np.random.Generator, k: int, r: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((k, r)))
    return Q * np.sign(np.diag(R))  # fix column signs so Q is Haar distributed


def gen_instance(spec: GenSpec) -> np.ndarray:
    """``U diag(M rho^1, ..., M rho^r) V^T``, deterministic in ``spec.seed``.

    Symmetric specs use ``Q diag(+-s) Q^T`` with random signs, so the
    result is symmetric indefinite with the same singular values.
    """
    rng = np.random.default_rng(spec.seed)
    s = spec.singular_values()
    if spec.symmetric:
        Q = _orthonormal(rng, spec.n, spec.r)
        signs = rng.choice([-1.0, 1.0], size=spec.r)
        A = (Q * (s * signs)) @ Q.T
        return 0.5 * (A + A.T)
    U = _orthonormal(rng, spec.m, spec.r)
    V = _orthonormal(rng, spec.n, spec.r)
    return (U * s) @ V.T


@dataclass
class ExperimentRecord:
    spec: GenSpec
    method: str
    one_norm: float = float("nan")
    nnz: int = -1
    swaps: int = 0
    init_one_norm: float | None = None
    wall_time_s: float = 0.0
    certified_ratio: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def relative_decrease(self) -> float | None:
        """``(||H0||_1 - ||H||_1) / ||H0||_1`` for local-search records."""
        if self.init_one_norm is None or not self.init_one_norm:
            return None
        return (self.init_one_norm - self.one_norm) / self.init_one_norm

    def row(self) -> dict:
        s = self.spec
        return {
            "m": s.m, "n": s.n, "r": s.r, "seed": s.seed, "method": self.method,
            "one_norm": self.one_norm, "nnz": self.nnz, "swaps": self.swaps,
            "init_one_norm": self.init_one_norm, "certified_ratio": self.certified_ratio,
            "wall_time_s": self.wall_time_s, "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        d = dict(d)
        d["spec"] = GenSpec(**d["spec"])
        return cls(**d)


@dataclass
class ExperimentConfig:
    search: search.SearchConfig = field(default_factory=search.SearchConfig)
    certify: bool = True
    threads: int | None = None  # None -> GINV_THREADS or 1


def _threads(cfg: ExperimentConfig) -> int:
    if cfg.threads is not None:
        return max(1, cfg.threads)
    try:
        return max(1, int(os.environ.get("GINV_THREADS", "1")))
    except ValueError:
        return 1


def _run_one(spec: GenSpec, methods, cfg: ExperimentConfig) -> list:
    A = gen_instance(spec)
    tol = cfg.search.tol
    out = []
    ah_result = None
    for method in methods:
        rec = ExperimentRecord(spec=spec, method=method)
        t0 = time.perf_counter()
        try:
            if method == "local_search_ah":
                res = search.ah_symmetric_ginv(A, cfg.search)
                ah_result = res
            elif method == "local_search_sym":
                res = search.sym_reflexive_ginv(A, cfg.search)
            else:
                kind = method[3:].upper()
                Hhat = None
                if kind == "P123":
                    Hhat = ah_result if ah_result is not None else search.ah_symmetric_ginv(A, cfg.search)
                res = lp.solve_model(A, kind, tol, Hhat=Hhat)
            rec.wall_time_s = time.perf_counter() - t0
            if method.startswith("local_search"):
                rec.one_norm, rec.nnz, rec.swaps = res.one_norm, res.nnz, res.swaps
                rec.init_one_norm = res.init_one_norm
                if cfg.certify:
                    cert = verify.certificate_for(A, res, tol)
                    rec.certified_ratio = verify.certified_ratio(A, res, cert)
            else:
                rec.one_norm = linalg.one_norm(res.H)
                rec.nnz = linalg.nnz(res.H, tol)
                rec.swaps = res.iterations
        except (GinvError, np.linalg.LinAlgError) as exc:
            rec.wall_time_s = time.perf_counter() - t0
            rec.error = f"{type(exc).__name__}: {exc}"
        except Exception as exc:  # keep the batch alive; record the traceback tail
            rec.wall_time_s = time.perf_counter() - t0
            rec.error = f"{type(exc).__name__}: {exc} | {traceback.format_exc(limit=1).strip()}"
        out.append(rec)
    return out


def make_specs(m: int, n: int, r: int, count: int, seed_base: int = 0, **kw) -> list:
    """``count`` specs with seeds ``seed_base + index``."""
    return [GenSpec(m, n, r, seed_base + i, **kw) for i in range(count)]


def run_experiment(specs, methods=("local_search_ah",), cfg: ExperimentConfig | None = None) -> list:
    """Run every method on every spec's instance.

    Records come back in input order (spec-major, then method order),
    whatever order the worker threads finish in.  A failure in one
    method is stored in that record's ``error`` field.
    """
    cfg = cfg or ExperimentConfig()
    methods = tuple(methods)
    bad = [mth for mth in methods if mth not in METHODS]
    if bad:
        raise InvalidSpec(f"unknown methods {bad}; choose from {METHODS}")
    specs = list(specs)
    if not specs:
        return []
    nthreads = min(_threads(cfg), len(specs))
    if nthreads == 1:
        chunks = [_run_one(s, methods, cfg) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            chunks = list(pool.map(lambda s: _run_one(s, methods, cfg), specs))
    return [rec for chunk in chunks for rec in chunk]


def aggregate(records) -> list:
    """Mean and standard deviation rows per (m, n, r, method), failures excluded.

    Each row is a dict with the keys of :data:`COLUMNS`; ``seed`` holds
    the label ``"mean"`` or ``"std"``.
    """
    groups: dict = {}
    for rec in records:
        if rec.ok:
            key = (rec.spec.m, rec.spec.n, rec.spec.r, rec.method)
            groups.setdefault(key, []).append(rec)
    rows = []
    for (m, n, r, method), recs in groups.items():
        for label, fn in (("mean", np.mean), ("std", np.std)):
            row = {"m": m, "n": n, "r": r, "seed": label, "method": method, "error": None}
            for col in ("one_norm", "nnz", "swaps", "init_one_norm", "certified_ratio", "wall_time_s"):
                vals = [getattr(x, col) for x in recs if getattr(x, col) is not None]
                row[col] = float(fn(vals)) if vals else None
            rows.append(row)
    return rows


def _md(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def emit_table(records, fmt: str = "csv", with_aggregate: bool = False) -> str:
    """Render records as csv, markdown (2-decimal floats) or json.

    Columns are :data:`COLUMNS`.  json output is a list of full record
    dicts and round-trips through :func:`load_records`.
    """
    records = list(records)
    if fmt == "json":
        payload = [asdict(r) for r in records]
        if with_aggregate:
            payload = {"records": payload, "aggregate": aggregate(records)}
        return json.dumps(payload, indent=2)
    rows = [r.row() for r in records]
    if with_aggregate:
        rows += aggregate(records)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row[k] is None else repr(row[k]) if isinstance(row[k], float) else row[k]) for k in COLUMNS})
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(COLUMNS) + " |", "|" + "---|" * len(COLUMNS)]
        lines += ["| " + " | ".join(_md(row[k]) for k in COLUMNS) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    raise InvalidSpec(f"unknown table format {fmt!r}")


def load_records(text: str) -> list:
    data = json.loads(text)
    if isinstance(data, dict):
        data = data["records"]
    return [ExperimentRecord.from_dict(d) for d in data]

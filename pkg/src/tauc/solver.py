"""Solving layer for commitment models.

The default backend is the in-process HiGHS MILP solver that ships with
scipy. Any external solver can be plugged in through a small command-line
contract: the executable is invoked as ``exe model.lp solution.sol`` and must
leave a readable solution file behind (plain name/value lines or a CPLEX-style
XML file). The ``TAUC_SOLVER`` environment variable overrides the configured
backend so operators can redirect solves without touching code.

Every answer, regardless of backend, is audited before it is returned:
binaries are snapped to integers, bounds and rows are re-checked against the
model with an independent residual test, and the objective is recomputed from
the returned point. A backend can therefore be wrong but not quietly wrong.

``brute_force_solve`` is an exhaustive enumeration oracle for small models.
It shares no solver code with the production path: its LP subproblems run on
the local simplex in ``_simplex``, and the binary search space is enumerated
directly. It exists so that tests can compare two fully independent routes to
the same optimum.
"""
from __future__ import annotations

import math
import os
import re
import subprocess
import tempfile
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from ._simplex import solve_lp
from .model import Row, UcModel, Variable

BINARY_SNAP_TOL = 1e-6
CHECK_TOL = 1e-6
ORACLE_MAX_BINARIES = 20


@dataclass(frozen=True)
class BackendConfig:
    """How to run a solve.

    backend: "auto" (in-process HiGHS), "oracle" (exhaustive enumeration,
    small models only), or a path to an external solver executable. The
    TAUC_SOLVER environment variable, when set, wins over this field.
    gap is the relative MIP gap target. threads is forwarded to external
    backends via TAUC_THREADS; the in-process backend ignores it.
    """

    backend: str = "auto"
    gap: float = 0.0
    time_limit: float | None = None
    threads: int | None = None


@dataclass(frozen=True)
class MipSolution:
    status: str  # "optimal" | "feasible" | "infeasible" | "unbounded" | "error"
    objective: float | None
    values: dict[str, float] = field(default_factory=dict)
    gap: float | None = None
    wall_time: float = 0.0
    message: str = ""


def solve(model: UcModel, config: BackendConfig | None = None) -> MipSolution:
    """Solve a model and return an audited solution."""
    cfg = config or BackendConfig()
    backend = os.environ.get("TAUC_SOLVER", "").strip() or cfg.backend
    start = time.perf_counter()
    if backend in ("auto", "highs", "scipy"):
        raw = _solve_inprocess(model, cfg)
    elif backend == "oracle":
        raw = brute_force_solve(model)
    else:
        raw = _solve_process(backend, model, cfg)
    wall = time.perf_counter() - start
    if raw.status not in ("optimal", "feasible"):
        return replace(raw, wall_time=wall)

    values = dict(raw.values)
    for var in model.variables:
        if var.name not in values:
            return replace(raw, status="error", wall_time=wall,
                           message=f"backend returned no value for {var.name}")
        if var.binary:
            val = values[var.name]
            snapped = float(round(val))
            if abs(val - snapped) > BINARY_SNAP_TOL:
                return replace(raw, status="error", wall_time=wall,
                               message=f"non-integral binary {var.name}={val:.9g}")
            values[var.name] = snapped
    problems = check_solution(model, values)
    if problems:
        return replace(raw, status="error", wall_time=wall,
                       message="solution failed verification: " + problems[0])
    objective = model.objective_offset
    for name, coef in model.objective.items():
        objective += coef * values[name]
    return MipSolution(raw.status, float(objective), values, raw.gap, wall, raw.message)


def check_solution(model: UcModel, values: dict[str, float],
                   tol: float = CHECK_TOL) -> list[str]:
    """Independent feasibility audit; returns human-readable violations.

    Residuals are judged relative to the row's magnitude (rhs and the
    individual terms), so tol is a relative tolerance on anything large and
    an absolute one near zero.
    """
    out = []
    for var in model.variables:
        x = values.get(var.name)
        if x is None:
            out.append(f"missing value for {var.name}")
            continue
        allow = tol * max(1.0, abs(x))
        if x < var.lb - allow:
            out.append(f"{var.name}={x:.9g} below lower bound {var.lb:.9g}")
        if x > var.ub + allow:
            out.append(f"{var.name}={x:.9g} above upper bound {var.ub:.9g}")
        if var.binary and abs(x - round(x)) > tol:
            out.append(f"{var.name}={x:.9g} is not integral")
    for row in model.constraints:
        lhs = 0.0
        scale = max(1.0, abs(row.rhs))
        ok = True
        for name, coef in row.coeffs.items():
            x = values.get(name)
            if x is None:
                ok = False
                break
            lhs += coef * x
            scale = max(scale, abs(coef * x))
        if not ok:
            continue  # already reported as a missing value
        allow = tol * scale
        if row.sense == "<=" and lhs > row.rhs + allow:
            out.append(f"{row.label}: {lhs:.9g} > {row.rhs:.9g}")
        elif row.sense == ">=" and lhs < row.rhs - allow:
            out.append(f"{row.label}: {lhs:.9g} < {row.rhs:.9g}")
        elif row.sense == "=" and abs(lhs - row.rhs) > allow:
            out.append(f"{row.label}: {lhs:.9g} != {row.rhs:.9g}")
    return out


# ---------------------------------------------------------------------------
# in-process backend


def _solve_inprocess(model: UcModel, cfg: BackendConfig) -> MipSolution:
    names = [v.name for v in model.variables]
    pos = {name: i for i, name in enumerate(names)}
    nvar = len(names)
    c = np.zeros(nvar)
    for name, coef in model.objective.items():
        c[pos[name]] = coef
    integrality = np.array([1 if v.binary else 0 for v in model.variables])
    lo = np.array([v.lb for v in model.variables])
    hi = np.array([v.ub for v in model.variables])

    constraints = None
    nrow = len(model.constraints)
    if nrow:
        data: list[float] = []
        rows_ix: list[int] = []
        cols_ix: list[int] = []
        cl = np.empty(nrow)
        cu = np.empty(nrow)
        for r, row in enumerate(model.constraints):
            for name, coef in row.coeffs.items():
                rows_ix.append(r)
                cols_ix.append(pos[name])
                data.append(coef)
            if row.sense == "<=":
                cl[r], cu[r] = -np.inf, row.rhs
            elif row.sense == ">=":
                cl[r], cu[r] = row.rhs, np.inf
            else:
                cl[r] = cu[r] = row.rhs
        amat = sparse.csr_matrix((data, (rows_ix, cols_ix)), shape=(nrow, nvar))
        constraints = LinearConstraint(amat, cl, cu)

    # Always pass the gap: left unset, HiGHS applies its own default of 1e-4
    # and can stop on a suboptimal incumbent while still reporting "optimal".
    options: dict[str, object] = {"presolve": True, "mip_rel_gap": float(cfg.gap)}
    if cfg.time_limit is not None:
        options["time_limit"] = float(cfg.time_limit)
    res = milp(c=c, constraints=constraints, integrality=integrality,
               bounds=Bounds(lo, hi), options=options)

    if res.status == 0:
        status = "optimal"
    elif res.status == 2:
        status = "infeasible"
    elif res.status == 3:
        status = "unbounded"
    elif res.status == 1 and res.x is not None:
        status = "feasible"  # stopped on a limit with an incumbent
    else:
        status = "error"
    values = {}
    if res.x is not None:
        values = {name: float(res.x[i]) for i, name in enumerate(names)}
    objective = None
    if res.fun is not None:
        objective = float(res.fun) + model.objective_offset
    gap = getattr(res, "mip_gap", None)
    gap = float(gap) if gap is not None and status in ("optimal", "feasible") else None
    return MipSolution(status, objective, values, gap, 0.0, str(res.message))


# ---------------------------------------------------------------------------
# external process backend


def _solve_process(executable: str, model: UcModel, cfg: BackendConfig) -> MipSolution:
    lp_text = emit_model_file(model)
    with tempfile.TemporaryDirectory(prefix="tauc-solve-") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "solution.sol"
        lp_path.write_text(lp_text)
        env = dict(os.environ)
        env["TAUC_MIP_GAP"] = str(cfg.gap)
        if cfg.time_limit is not None:
            env["TAUC_TIME_LIMIT"] = str(cfg.time_limit)
        if cfg.threads is not None:
            env["TAUC_THREADS"] = str(int(cfg.threads))
        timeout = cfg.time_limit + 60.0 if cfg.time_limit else None
        try:
            proc = subprocess.run([executable, str(lp_path), str(sol_path)],
                                  capture_output=True, text=True, env=env,
                                  timeout=timeout)
        except FileNotFoundError:
            return MipSolution("error", None, {}, None, 0.0,
                               f"solver executable not found: {executable}")
        except subprocess.TimeoutExpired:
            return MipSolution("error", None, {}, None, 0.0,
                               f"solver timed out after {timeout:.0f}s")
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout or "").strip()[-400:]
            return MipSolution("error", None, {}, None, 0.0,
                               f"solver exited with code {proc.returncode}: {tail}")
        if not sol_path.exists():
            return MipSolution("error", None, {}, None, 0.0,
                               "solver wrote no solution file")
        values, hint, notes = parse_solution_file(sol_path.read_text(), model)
    if hint in ("infeasible", "unbounded"):
        return MipSolution(hint, None, {}, None, 0.0,
                           "; ".join(notes) or f"solver reported {hint}")
    if not values:
        return MipSolution("error", None, {}, None, 0.0,
                           "solution file contained no variable values")
    for var in model.variables:
        values.setdefault(var.name, 0.0)  # sparse files omit zero variables
    return MipSolution("optimal", None, values, None, 0.0, "; ".join(notes))


def parse_solution_file(text: str, model: UcModel | None = None):
    """Parse a solution file into (values, status_hint, notes).

    Two formats are understood: XML with <variable name=... value=...>
    elements, and plain text where each line carries "name value" (extra
    leading index and trailing columns, as some solvers write, are
    tolerated). Lines that are not value pairs are scanned for status
    keywords. When a model is given, names it does not know are dropped and
    reported in notes.
    """
    values: dict[str, float] = {}
    notes: list[str] = []
    hint = None
    if text.lstrip().startswith("<"):
        root = ET.fromstring(text)
        for el in root.iter("variable"):
            name = el.get("name")
            raw = el.get("value")
            if name is None or raw is None:
                continue
            try:
                values[name] = float(raw)
            except ValueError:
                notes.append(f"unparseable value for {name!r}")
        header = root.find("header")
        if header is not None:
            status_str = (header.get("solutionStatusString") or "").lower()
            for word in ("infeasible", "unbounded", "optimal"):
                if word in status_str:
                    hint = word
                    break
    else:
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith(("#", "//")):
                continue
            pair = _value_pair(line.split())
            if pair is None:
                low = line.lower()
                if "infeasible" in low:
                    hint = "infeasible"
                elif "unbounded" in low:
                    hint = "unbounded"
                elif "optimal" in low and hint is None:
                    hint = "optimal"
                continue
            values[pair[0]] = pair[1]
    if model is not None:
        known = model.variable_map
        for name in [n for n in values if n not in known]:
            notes.append(f"ignoring unknown variable {name!r} in solution file")
            del values[name]
    return values, hint, notes


def _value_pair(toks: list[str]) -> tuple[str, float] | None:
    def as_float(s: str) -> float | None:
        try:
            return float(s)
        except ValueError:
            return None

    if len(toks) >= 3 and toks[0].lstrip("-").isdigit() and as_float(toks[1]) is None:
        val = as_float(toks[2])
        if val is not None:
            return toks[1], val  # "index name value [extra]" style
    if len(toks) >= 2 and as_float(toks[0]) is None:
        val = as_float(toks[1])
        if val is not None:
            return toks[0], val
    return None


# ---------------------------------------------------------------------------
# LP file round trip


def _fmt(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError("cannot write a non-finite number to an LP file")
    if value == 0.0:
        value = 0.0  # normalize -0.0
    return f"{value:.12g}"


def _terms(coeffs, constant: float = 0.0) -> str:
    parts: list[str] = []
    for name, coef in coeffs.items():
        if not parts:
            head = f"- {_fmt(-coef)} {name}" if coef < 0 else f"{_fmt(coef)} {name}"
        else:
            head = f"- {_fmt(-coef)} {name}" if coef < 0 else f"+ {_fmt(coef)} {name}"
        parts.append(head)
    if constant != 0.0 or not parts:
        if not parts:
            parts.append(_fmt(constant))
        elif constant < 0:
            parts.append(f"- {_fmt(-constant)}")
        else:
            parts.append(f"+ {_fmt(constant)}")
    return " ".join(parts)


def emit_model_file(model: UcModel) -> str:
    """Serialize a model to LP text; byte-identical for equal models."""
    lines = ["Minimize",
             f" obj: {_terms(model.objective, model.objective_offset)}",
             "Subject To"]
    for row in model.constraints:
        if not row.coeffs:
            raise ValueError(f"constraint {row.label} has no terms")
        lines.append(f" {row.label}: {_terms(row.coeffs)} {row.sense} {_fmt(row.rhs)}")
    lines.append("Bounds")
    binaries = []
    for var in model.variables:
        if var.binary:
            binaries.append(var.name)
            if var.lb == var.ub:
                lines.append(f" {var.name} = {_fmt(var.lb)}")
            continue
        lo_inf = math.isinf(var.lb)
        hi_inf = math.isinf(var.ub)
        if var.lb == var.ub:
            lines.append(f" {var.name} = {_fmt(var.lb)}")
        elif lo_inf and hi_inf:
            lines.append(f" {var.name} free")
        elif hi_inf:
            lines.append(f" {var.name} >= {_fmt(var.lb)}")
        elif lo_inf:
            lines.append(f" -inf <= {var.name} <= {_fmt(var.ub)}")
        else:
            lines.append(f" {_fmt(var.lb)} <= {var.name} <= {_fmt(var.ub)}")
    if binaries:
        lines.append("Binary")
        lines.extend(f" {name}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


_SENSE_RE = re.compile(r"<=|=<|>=|=>|<|>|=")
_EXPR_TOKEN_RE = re.compile(
    r"[A-Za-z_][A-Za-z0-9_]*|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|[+-]")
_BOUND_TOKEN_RE = re.compile(r"<=|=<|>=|=>|=|<|>|[^\s<>=]+")


def _parse_expr(text: str):
    """Parse a linear expression into (coeffs, constant)."""
    coeffs: dict[str, float] = {}
    constant = 0.0
    sign = 1.0
    pending: float | None = None
    pos = 0
    for match in _EXPR_TOKEN_RE.finditer(text):
        if text[pos:match.start()].strip():
            raise ValueError(f"unparseable expression fragment {text[pos:match.start()]!r}")
        pos = match.end()
        tok = match.group()
        if tok in "+-":
            if pending is not None:
                constant += sign * pending
                pending = None
                sign = 1.0
            if tok == "-":
                sign = -sign
        elif tok[0].isdigit() or tok[0] == ".":
            if pending is not None:
                raise ValueError(f"two numbers in a row in expression {text!r}")
            pending = float(tok)
        else:
            coef = sign * (1.0 if pending is None else pending)
            coeffs[tok] = coeffs.get(tok, 0.0) + coef
            pending = None
            sign = 1.0
    if text[pos:].strip():
        raise ValueError(f"unparseable expression fragment {text[pos:]!r}")
    if pending is not None:
        constant += sign * pending
    return coeffs, constant


def _bound_number(tok: str) -> float:
    low = tok.lower()
    if low in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if low in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _is_number(tok: str) -> bool:
    try:
        _bound_number(tok)
        return True
    except ValueError:
        return False


def read_model_file(text: str) -> UcModel:
    """Parse LP text back into a model (minimization only)."""
    sections: dict[str, list[str]] = {
        "minimize": [], "subject to": [], "bounds": [], "binary": []}
    current: str | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "min", "minimise"):
            current = "minimize"
            continue
        if low in ("subject to", "st", "s.t.", "such that"):
            current = "subject to"
            continue
        if low in ("bounds", "bound"):
            current = "bounds"
            continue
        if low in ("binary", "binaries", "bin"):
            current = "binary"
            continue
        if low == "end":
            current = None
            continue
        if low in ("maximize", "max", "maximise"):
            raise ValueError("only minimization problems are supported")
        if low in ("general", "generals", "gen", "semi-continuous", "sos"):
            raise ValueError(f"unsupported LP section {line!r}")
        if current is None:
            raise ValueError(f"content outside any LP section: {line!r}")
        sections[current].append(line)

    obj_text = " ".join(sections["minimize"])
    label_match = re.match(r"\s*[A-Za-z_][A-Za-z0-9_]*\s*:", obj_text)
    if label_match:
        obj_text = obj_text[label_match.end():]
    objective, offset = _parse_expr(obj_text)

    # group physical lines into one logical line per constraint
    logical: list[str] = []
    for line in sections["subject to"]:
        if re.match(r"\s*[A-Za-z_][A-Za-z0-9_]*\s*:", line) or not logical:
            logical.append(line)
        else:
            logical[-1] += " " + line
    rows: list[Row] = []
    for i, line in enumerate(logical):
        label = f"r{i + 1}"
        body = line
        head = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*:", line)
        if head:
            label = head.group(1)
            body = line[head.end():]
        sense_match = _SENSE_RE.search(body)
        if not sense_match:
            raise ValueError(f"constraint {label} has no relational operator")
        sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(
            sense_match.group(), sense_match.group())
        lhs, lconst = _parse_expr(body[:sense_match.start()])
        rhs_coeffs, rconst = _parse_expr(body[sense_match.end():])
        for name, coef in rhs_coeffs.items():
            lhs[name] = lhs.get(name, 0.0) - coef
        coeffs = {name: coef for name, coef in lhs.items() if coef != 0.0}
        if not coeffs:
            raise ValueError(f"constraint {label} has no variables")
        rows.append(Row(label, coeffs, sense, rconst - lconst))

    explicit: dict[str, tuple[float, float]] = {}
    for line in sections["bounds"]:
        toks = _BOUND_TOKEN_RE.findall(line)
        toks = [{"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(t, t) for t in toks]
        if len(toks) == 2 and toks[1].lower() == "free":
            explicit[toks[0]] = (-math.inf, math.inf)
        elif len(toks) == 3 and toks[1] in ("<=", ">=", "="):
            a, op, b = toks
            if _is_number(a) and not _is_number(b):
                name = b
                lo, hi = explicit.get(name, (0.0, math.inf))
                if op == "<=":
                    lo = _bound_number(a)
                elif op == ">=":
                    hi = _bound_number(a)
                else:
                    lo = hi = _bound_number(a)
            elif _is_number(b) and not _is_number(a):
                name = a
                lo, hi = explicit.get(name, (0.0, math.inf))
                if op == "<=":
                    hi = _bound_number(b)
                elif op == ">=":
                    lo = _bound_number(b)
                else:
                    lo = hi = _bound_number(b)
            else:
                raise ValueError(f"unparseable bound line {line!r}")
            explicit[name] = (lo, hi)
        elif len(toks) == 5 and toks[1] in ("<=", ">=") and toks[3] == toks[1]:
            a, op, name, _, b = toks
            lo, hi = _bound_number(a), _bound_number(b)
            if op == ">=":
                lo, hi = hi, lo
            explicit[name] = (lo, hi)
        else:
            raise ValueError(f"unparseable bound line {line!r}")

    binary_names: list[str] = []
    for line in sections["binary"]:
        binary_names.extend(line.split())
    binary_set = set(binary_names)

    order: list[str] = []
    seen = set()
    for name in (*objective, *(n for row in rows for n in row.coeffs),
                 *explicit, *binary_names):
        if name not in seen:
            seen.add(name)
            order.append(name)
    variables = []
    for name in order:
        is_bin = name in binary_set
        default = (0.0, 1.0) if is_bin else (0.0, math.inf)
        lo, hi = explicit.get(name, default)
        variables.append(Variable(name, lo, hi, binary=is_bin))
    return UcModel(tuple(variables), tuple(rows), objective, offset)


# ---------------------------------------------------------------------------
# exhaustive oracle


def brute_force_solve(model: UcModel,
                      max_binaries: int = ORACLE_MAX_BINARIES) -> MipSolution:
    """Exhaustive reference solve: enumerate binaries, solve LPs exactly.

    Rows touching no continuous variable are checked for all assignments at
    once; the rest decompose into connected components of continuous
    variables whose LP solutions are memoized on the binary bits they
    actually see. Refuses models with more than max_binaries free binaries.
    """
    start = time.perf_counter()
    variables = model.variables
    index = {v.name: i for i, v in enumerate(variables)}
    fixed_value: dict[int, float] = {}
    free_bins: list[int] = []
    cont: list[int] = []
    for i, var in enumerate(variables):
        if var.lb == var.ub:
            fixed_value[i] = var.lb
        elif var.binary:
            free_bins.append(i)
        else:
            cont.append(i)
    k = len(free_bins)
    if k > max_binaries:
        raise ValueError(
            f"model has {k} free binaries; exhaustive search is capped at {max_binaries}")
    bin_pos = {i: p for p, i in enumerate(free_bins)}
    cont_pos = {i: p for p, i in enumerate(cont)}

    pure = []   # rows with no continuous variables
    mixed = []  # (bin_terms, const, cont_terms, sense, rhs)
    for row in model.constraints:
        const = 0.0
        bin_terms: dict[int, float] = {}
        cont_terms: dict[int, float] = {}
        for name, coef in row.coeffs.items():
            i = index[name]
            if i in fixed_value:
                const += coef * fixed_value[i]
            elif i in bin_pos:
                p = bin_pos[i]
                bin_terms[p] = bin_terms.get(p, 0.0) + coef
            else:
                p = cont_pos[i]
                cont_terms[p] = cont_terms.get(p, 0.0) + coef
        if cont_terms:
            mixed.append((sorted(bin_terms.items()), const, cont_terms,
                          row.sense, row.rhs))
        else:
            pure.append((bin_terms, const, row.sense, row.rhs))

    n_assign = 1 << k
    if k:
        bits_mat = ((np.arange(n_assign)[:, None] >> np.arange(k)) & 1).astype(np.int8)
    else:
        bits_mat = np.zeros((1, 0), dtype=np.int8)
    mask = np.ones(bits_mat.shape[0], dtype=bool)
    tol = 1e-9
    for bin_terms, const, sense, rhs in pure:
        vec = np.zeros(k)
        for p, coef in bin_terms.items():
            vec[p] = coef
        vals = bits_mat @ vec + const
        if sense == "<=":
            mask &= vals <= rhs + tol
        elif sense == ">=":
            mask &= vals >= rhs - tol
        else:
            mask &= np.abs(vals - rhs) <= tol
    candidates = np.flatnonzero(mask)
    elapsed = lambda: time.perf_counter() - start  # noqa: E731
    if candidates.size == 0:
        return MipSolution("infeasible", None, {}, None, elapsed(),
                           "every binary assignment violates a binary-only row")

    # connected components over continuous variables
    parent = list(range(len(cont)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, _, cont_terms, _, _ in mixed:
        ps = list(cont_terms)
        root = find(ps[0])
        for p in ps[1:]:
            parent[find(p)] = root

    comp_rows: dict[int, list[int]] = {}
    comp_vars: dict[int, list[int]] = {}
    for p in range(len(cont)):
        comp_vars.setdefault(find(p), []).append(p)
    for ri, (_, _, cont_terms, _, _) in enumerate(mixed):
        comp_rows.setdefault(find(next(iter(cont_terms))), []).append(ri)

    obj_of = dict(model.objective)

    class _Comp:
        __slots__ = ("vars", "key_bins", "a", "senses", "rhs_base", "bin_rows",
                     "folds", "c", "lb", "ub")

    comps: list[_Comp] = []
    attached = set()
    for root, vps in comp_vars.items():
        row_ids = comp_rows.get(root)
        if not row_ids:
            continue  # variables with no rows are handled in closed form
        comp = _Comp()
        comp.vars = sorted(vps)
        attached.update(comp.vars)
        local = {p: j for j, p in enumerate(comp.vars)}
        nv = len(comp.vars)
        arows: list[np.ndarray] = []
        comp.senses = []
        rhs_base: list[float] = []
        comp.bin_rows = []
        comp.folds = []  # single-variable rows become bounds per assignment
        keyset: set[int] = set()
        for ri in row_ids:
            bin_terms, const, cont_terms, sense, rhs = mixed[ri]
            keyset.update(p for p, _ in bin_terms)
            if len(cont_terms) == 1:
                (p, coef), = cont_terms.items()
                comp.folds.append((local[p], coef, sense, rhs - const, bin_terms))
                continue
            arow = np.zeros(nv)
            for p, coef in cont_terms.items():
                arow[local[p]] = coef
            arows.append(arow)
            comp.senses.append(sense)
            rhs_base.append(rhs - const)
            comp.bin_rows.append(bin_terms)
        comp.a = np.array(arows).reshape(len(arows), nv)
        comp.rhs_base = np.array(rhs_base)
        comp.key_bins = np.array(sorted(keyset), dtype=np.intp)
        comp.c = np.array([obj_of.get(variables[cont[p]].name, 0.0) for p in comp.vars])
        comp.lb = np.array([variables[cont[p]].lb for p in comp.vars])
        comp.ub = np.array([variables[cont[p]].ub for p in comp.vars])
        comps.append(comp)

    base_obj = model.objective_offset
    for i, val in fixed_value.items():
        base_obj += obj_of.get(variables[i].name, 0.0) * val
    obj_bin = np.zeros(k)
    for p, i in enumerate(free_bins):
        obj_bin[p] = obj_of.get(variables[i].name, 0.0)

    loose_values: dict[int, float] = {}
    loose_unbounded = False
    for p in range(len(cont)):
        if p in attached:
            continue
        var = variables[cont[p]]
        coef = obj_of.get(var.name, 0.0)
        if coef > 0 or (coef == 0 and math.isfinite(var.lb)):
            if not math.isfinite(var.lb):
                loose_unbounded = True
                break
            loose_values[p] = var.lb
        elif coef < 0:
            if not math.isfinite(var.ub):
                loose_unbounded = True
                break
            loose_values[p] = var.ub
        else:
            loose_values[p] = var.ub if math.isfinite(var.ub) else 0.0
    loose_cost = sum(obj_of.get(variables[cont[p]].name, 0.0) * v
                     for p, v in loose_values.items())

    best_total = math.inf
    best_bits: np.ndarray | None = None
    best_xs: list[np.ndarray] | None = None
    memo: list[dict[bytes, tuple[str, float, np.ndarray | None]]] = [dict() for _ in comps]
    for idx in candidates:
        bits = bits_mat[idx]
        total = base_obj + loose_cost + float(obj_bin @ bits)
        xs: list[np.ndarray] = []
        feasible = True
        for ci, comp in enumerate(comps):
            key = bits[comp.key_bins].tobytes()
            cached = memo[ci].get(key)
            if cached is None:
                rhs = comp.rhs_base.copy()
                for rj, bin_terms in enumerate(comp.bin_rows):
                    for p, coef in bin_terms:
                        rhs[rj] -= coef * bits[p]
                lb = comp.lb.copy()
                ub = comp.ub.copy()
                for j, coef, sense, base, bin_terms in comp.folds:
                    bound = base - sum(c_ * bits[p] for p, c_ in bin_terms)
                    bound /= coef
                    if sense == "=":
                        lb[j] = max(lb[j], bound)
                        ub[j] = min(ub[j], bound)
                    elif (sense == "<=") == (coef > 0):
                        ub[j] = min(ub[j], bound)
                    else:
                        lb[j] = max(lb[j], bound)
                if np.any(lb > ub + 1e-9):
                    cached = ("infeasible", math.inf, None)
                else:
                    res = solve_lp(comp.c, comp.a, comp.senses, rhs, lb, ub)
                    cached = (res.status, res.objective, res.x)
                memo[ci][key] = cached
            status, obj, x = cached
            if status == "infeasible":
                feasible = False
                break
            if status == "unbounded":
                return MipSolution("unbounded", None, {}, None, elapsed(),
                                   "continuous subproblem unbounded under a feasible commitment")
            total += obj
            xs.append(x)
        if not feasible:
            continue
        if loose_unbounded:
            return MipSolution("unbounded", None, {}, None, elapsed(),
                               "an unconstrained variable improves the objective without limit")
        if total < best_total:
            best_total = total
            best_bits = bits.copy()
            best_xs = [x.copy() for x in xs]
    if best_bits is None:
        return MipSolution("infeasible", None, {}, None, elapsed(),
                           "no binary assignment admits a feasible dispatch")

    values: dict[str, float] = {}
    for i, val in fixed_value.items():
        values[variables[i].name] = float(val)
    for p, i in enumerate(free_bins):
        values[variables[i].name] = float(best_bits[p])
    for comp, x in zip(comps, best_xs):
        for j, p in enumerate(comp.vars):
            values[variables[cont[p]].name] = float(x[j])
    for p, val in loose_values.items():
        values[variables[cont[p]].name] = float(val)
    return MipSolution("optimal", float(best_total), values, 0.0, elapsed(),
                       f"exhaustive search over {k} binaries, "
                       f"{candidates.size} candidate assignments")

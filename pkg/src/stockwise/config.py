"""Plan configuration files: JSON documents validated against
``schemas/config.schema.json``.

Every error raised while loading a configuration is a :class:`ConfigError`
whose message starts with ``<path>:<line>:`` pointing at the offending value.
"""

from __future__ import annotations

import bisect
import json
import re
from functools import cache
from importlib import resources

import jsonschema

from .constrained import LinearConstraint
from .demand import (
    DemandHistoryError,
    Exponential,
    Geometric,
    PiecewiseEmpirical,
    Poisson,
    TableDemand,
    TruncatedNormal,
    Uniform,
    fit_empirical,
    read_demand_history,
)
from .exceptions import DomainError, EmptySample, NegativeDemand, StockwiseError
from .profit import Catalog, Product

_WS = re.compile(r"[ \t\n\r]*")


class ConfigError(StockwiseError, ValueError):
    def __init__(self, source: str, line: int | None, message: str):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.line = line


@cache
def load_schema(name: str) -> dict:
    text = resources.files("stockwise.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def locate_lines(text: str) -> dict[tuple, int]:
    """Map each JSON path (tuple of keys and indices) to the 1-based line on
    which its value starts. ``text`` must already be valid JSON."""
    starts = [0] + [m.end() for m in re.finditer("\n", text)]
    decoder = json.JSONDecoder()
    lines: dict[tuple, int] = {}

    def skip(pos):
        return _WS.match(text, pos).end()

    def walk(pos, path):
        pos = skip(pos)
        lines[path] = bisect.bisect_right(starts, pos)
        ch = text[pos]
        if ch not in "{[":
            _, end = decoder.raw_decode(text, pos)
            return end
        close = "}" if ch == "{" else "]"
        pos = skip(pos + 1)
        if text[pos] == close:
            return pos + 1
        index = 0
        while True:
            if ch == "{":
                key, pos = json.decoder.scanstring(text, skip(pos) + 1)
                pos = walk(skip(pos) + 1, path + (key,))
            else:
                pos = walk(pos, path + (index,))
                index += 1
            pos = skip(pos)
            if text[pos] == close:
                return pos + 1
            pos += 1

    walk(0, ())
    return lines


def _line_for(lines: dict[tuple, int], path) -> int | None:
    path = tuple(path)
    while path not in lines and path:
        path = path[:-1]
    return lines.get(path)


def _dotted(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def parse_document(text: str, source: str, schema: str = "config"):
    """Parse and schema-validate ``text``; return ``(document, line_map)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(source, exc.lineno, f"invalid JSON: {exc.msg}") from None
    lines = locate_lines(text)
    validator = jsonschema.Draft202012Validator(load_schema(schema))
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise ConfigError(
            source,
            _line_for(lines, error.absolute_path),
            f"{_dotted(error.absolute_path)}: {error.message}",
        )
    return doc, lines


def _build_demand(spec: dict, history: dict | None):
    kind = spec["kind"]
    if kind == "uniform":
        return Uniform(spec["lo"], spec["hi"])
    if kind == "exponential":
        return Exponential(spec["rate"])
    if kind == "truncated_normal":
        return TruncatedNormal(spec["mean"], spec["stddev"], spec.get("lo", 0.0))
    if kind == "piecewise_empirical":
        return PiecewiseEmpirical(tuple(spec["breakpoints"]), tuple(spec["weights"]))
    if kind == "poisson":
        return Poisson(spec["lambda"])
    if kind == "geometric":
        return Geometric(spec["p"])
    if kind == "table":
        return TableDemand({int(k): v for k, v in spec["mass"].items()})
    # empirical
    if history is None:
        raise DomainError("empirical demand needs a demand-history CSV (--csv)")
    column = spec["csv_column"]
    if column not in history:
        raise DomainError(f"column {column!r} not found in the demand-history CSV")
    return fit_empirical(history[column])


def build_catalog(doc: dict, lines: dict, source: str, csv_path=None):
    """Turn a validated configuration into ``(Catalog, constraint or None)``."""
    history = None
    if csv_path is not None:
        try:
            history = read_demand_history(csv_path)
        except DemandHistoryError as exc:
            raise ConfigError(str(csv_path), None, str(exc)) from None
        except OSError as exc:
            raise ConfigError(str(csv_path), None, exc.strerror or str(exc)) from None

    entries = []
    seen: dict[str, int] = {}
    for i, item in enumerate(doc["products"]):
        name = item["name"]
        if name in seen:
            raise ConfigError(
                source,
                _line_for(lines, ("products", i, "name")),
                f"duplicate product name {name!r} (first used by products[{seen[name]}])",
            )
        seen[name] = i
        try:
            product = Product(name, item["unit_profit"], item["unit_loss"])
            demand = _build_demand(item["demand"], history)
        except (DomainError, EmptySample, NegativeDemand) as exc:
            raise ConfigError(
                source, _line_for(lines, ("products", i, "demand")), f"products[{i}]: {exc}"
            ) from None
        entries.append((product, demand))

    constraint = None
    if "constraint" in doc:
        spec = doc["constraint"]
        if len(spec["coeffs"]) != len(entries):
            raise ConfigError(
                source,
                _line_for(lines, ("constraint", "coeffs")),
                f"constraint.coeffs has {len(spec['coeffs'])} entries for {len(entries)} products",
            )
        try:
            constraint = LinearConstraint(tuple(spec["coeffs"]), spec["rhs"], spec["relation"])
        except DomainError as exc:
            raise ConfigError(source, _line_for(lines, ("constraint",)), str(exc)) from None
    return Catalog(tuple(entries)), constraint


def load_config(path, csv_path=None):
    source = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(source, None, exc.strerror or str(exc)) from None
    doc, lines = parse_document(text, source)
    return build_catalog(doc, lines, source, csv_path)

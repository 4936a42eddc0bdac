"""Text formats: TSV output and the compact prior / target specifications.

Specifications are the strings accepted on the command line:

``p:beta:78,2 m:gamma:200,1``
    hierarchical binomial design prior (gamma is shape, rate).
``pi:beta:20,1``
    fixed beta prior on the survival probability.
``beta:6.45,2`` or ``0.6:beta:106,2 0.4:beta:38,2``
    analysis prior, a single beta or a weighted mixture.
``q=0.5,tau=4000,s=25,delta=0.05``
    Weibull reliable-life target.
``mu0=-40,mu1=1,s00=1,s11=0.01,s01=0,a_beta=20,b_beta=13,a_eps=2,b_eps=2``
    Weibull regression prior.
"""

from __future__ import annotations

import math
import shlex
from typing import IO, Iterable, Sequence

import numpy as np

from .binomial import BetaPrior, DesignPrior, MixturePrior
from .errors import DomainError, IncoherenceError
from .weibull.model import ReliableLifeTarget
from .weibull.prior import WeibullPrior


def format_value(value, precision: int = 6) -> str:
    """Integers verbatim, reals to ``precision`` significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    out = f"{v:.{precision}g}"
    return "0" if out == "-0" else out


def write_tsv(out: IO[str], header: Sequence[str], rows: Iterable[Sequence], precision: int = 6) -> None:
    out.write("\t".join(header) + "\n")
    for row in rows:
        out.write("\t".join(format_value(v, precision) for v in row) + "\n")


def _numbers(text: str, count: int, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise DomainError(f"cannot read numbers from {what!r}") from exc
    if len(vals) != count:
        raise DomainError(f"{what!r} needs {count} comma-separated numbers")
    return vals


def _family(token: str) -> tuple[str, str, list[float]]:
    parts = token.split(":")
    if len(parts) != 3:
        raise DomainError(f"expected name:family:params, got {token!r}")
    name, fam, params = parts
    return name, fam.lower(), _numbers(params, 2, token)


def parse_binomial_design(tokens: Sequence[str]):
    """A :class:`DesignPrior` or, for ``pi:beta:a,b``, a fixed :class:`BetaPrior`."""
    got = {}
    for tok in tokens:
        name, fam, (a, b) = _family(tok)
        expected = {"p": "beta", "m": "gamma", "pi": "beta"}.get(name)
        if expected is None or fam != expected:
            raise DomainError(f"unknown design component {tok!r}; use p:beta, m:gamma or pi:beta")
        got[name] = (a, b)
    if set(got) == {"pi"}:
        return BetaPrior(*got["pi"])
    if set(got) == {"p", "m"}:
        return DesignPrior(*got["p"], *got["m"])
    raise DomainError("design prior needs both p:beta and m:gamma, or pi:beta alone")


def parse_analysis_prior(tokens: Sequence[str]):
    """``beta:a,b`` gives a :class:`BetaPrior`; ``w:beta:a,b ...`` a :class:`MixturePrior`."""
    if len(tokens) == 1 and tokens[0].count(":") == 1:
        fam, params = tokens[0].split(":")
        if fam.lower() != "beta":
            raise DomainError(f"analysis prior must be beta, got {tokens[0]!r}")
        return BetaPrior(*_numbers(params, 2, tokens[0]))
    comps, weights = [], []
    for tok in tokens:
        w, fam, (a, b) = _family(tok)
        if fam != "beta":
            raise DomainError(f"mixture components must be beta, got {tok!r}")
        try:
            weights.append(float(w))
        except ValueError as exc:
            raise DomainError(f"bad mixture weight in {tok!r}") from exc
        comps.append(BetaPrior(a, b))
    if not comps:
        raise DomainError("empty analysis prior")
    return MixturePrior(tuple(comps), tuple(weights))


def parse_keyvals(text: str | Sequence[str]) -> dict[str, float]:
    items = text.split(",") if isinstance(text, str) else [p for t in text for p in t.split(",")]
    out = {}
    for item in items:
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise DomainError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise DomainError(f"bad number in {item!r}") from exc
    return out


def parse_target(text: str) -> ReliableLifeTarget:
    kv = parse_keyvals(text)
    unknown = set(kv) - {"q", "tau", "s", "delta"}
    if unknown or not {"q", "tau", "s"} <= set(kv):
        raise DomainError(f"target needs q, tau, s (and optionally delta), got {text!r}")
    return ReliableLifeTarget(kv["q"], kv["tau"], kv["s"], kv.get("delta", 0.05))


_PRIOR_KEYS = {"mu0", "mu1", "s00", "s11", "s01", "a_beta", "b_beta", "v_eps", "a_eps", "b_eps", "beta_fixed"}


def parse_weibull_prior(text: str | Sequence[str]) -> WeibullPrior:
    kv = parse_keyvals(text)
    unknown = set(kv) - _PRIOR_KEYS
    if unknown:
        raise DomainError(f"unknown prior keys {sorted(unknown)}")
    missing = {"mu0", "mu1", "s00", "s11"} - set(kv)
    if missing:
        raise DomainError(f"prior needs {sorted(missing)}")
    return WeibullPrior(**kv)


def read_flag_file(path) -> list[str]:
    """Tokens of a config file holding one flag (with its values) per line."""
    tokens: list[str] = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                tokens.extend(shlex.split(line))
    except OSError as exc:
        raise IncoherenceError(f"cannot read config file {path}: {exc}") from exc
    return tokens

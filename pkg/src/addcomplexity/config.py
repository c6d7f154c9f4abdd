"""Run configuration: one JSON document per experiment.

Example::

    {"model": {"family": "korobov_parametric", "c": 1, "tau": 0.5, "r": 0,
               "sigma_rule": {"kind": "log_affine", "s0": 2, "s1": 1}},
     "eps": [0.3, 0.5],
     "d_grid": {"start": 1024, "end": 16384, "count": 5, "spacing": "log"},
     "method": "exact"}

Unknown keys anywhere in the document are rejected.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from .complexity import DEFAULT_TERM_CAP
from .errors import ComplexityError, ConfigurationError
from .spectra import SequenceModel, SigmaRule, explicit_spectrum

__all__ = ["RunConfig", "parse_config", "load_config", "expand_grid", "RUN_METHODS"]

RUN_METHODS = ("exact", "reduced", "integral", "homogeneous", "asymptotic", "all")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SigmaRuleDoc(_Strict):
    kind: Literal["log_affine", "affine", "constant"] = "log_affine"
    s0: float = 2.0
    s1: float = 1.0


class MarginalDoc(_Strict):
    lambda0: float = Field(ge=0)
    values: list[float]


class ModelDoc(_Strict):
    family: Literal["korobov_parametric", "explicit_list", "homogeneous"]
    c: float = Field(1.0, gt=0)
    tau: float = 0.0
    r: float = Field(0.0, ge=0)
    rho: float = 0.0
    sigma_rule: SigmaRuleDoc = SigmaRuleDoc()
    marginals: list[MarginalDoc] = []
    cycle: bool = False


class RangeGridDoc(_Strict):
    start: int = Field(ge=1)
    end: int = Field(ge=1)
    count: int = Field(ge=1)
    spacing: Literal["linear", "log"] = "linear"


class ListGridDoc(_Strict):
    points: list[int] = Field(alias="list", min_length=1)


class RunDoc(_Strict):
    model: ModelDoc
    eps: Union[float, list[float]]
    d_grid: Union[RangeGridDoc, ListGridDoc]
    method: Literal["exact", "reduced", "integral", "homogeneous", "asymptotic", "all"] = "exact"
    term_cap: int = Field(DEFAULT_TERM_CAP, ge=1)


@dataclass(frozen=True)
class RunConfig:
    model: SequenceModel
    eps: tuple[float, ...]
    d_grid: tuple[int, ...]
    method: str = "exact"
    term_cap: int = DEFAULT_TERM_CAP
    threads: int = 1
    output: str | None = None


def expand_grid(doc: RangeGridDoc | ListGridDoc) -> tuple[int, ...]:
    """Strictly increasing integer grid; duplicates after rounding are dropped."""
    if isinstance(doc, ListGridDoc):
        raw = doc.points
        if min(raw) < 1:
            raise ConfigurationError("d_grid.list: dimensions must be >= 1")
    else:
        if doc.end < doc.start:
            raise ConfigurationError("d_grid: end must be >= start")
        if doc.spacing == "log":
            pts = np.geomspace(doc.start, doc.end, doc.count)
        else:
            pts = np.linspace(doc.start, doc.end, doc.count)
        raw = [int(round(x)) for x in pts]
    return tuple(sorted(set(raw)))


def _build_model(doc: ModelDoc, d_max: int) -> SequenceModel:
    try:
        if doc.family == "korobov_parametric":
            rule = SigmaRule(doc.sigma_rule.kind, doc.sigma_rule.s0, doc.sigma_rule.s1)
            model = SequenceModel.korobov(doc.c, doc.tau, doc.r, rule, rho=doc.rho)
            if not model.degenerate:
                for j in range(1, d_max + 1):
                    model.korobov_params(j)
            return model
        spectra = []
        for i, m in enumerate(doc.marginals):
            try:
                spectra.append(explicit_spectrum(m.lambda0, m.values))
            except ComplexityError as exc:
                raise ConfigurationError(f"model.marginals.{i}: {exc}") from exc
        if doc.family == "homogeneous":
            if len(spectra) != 1:
                raise ConfigurationError("model.marginals: homogeneous model takes exactly one marginal")
            return SequenceModel.homogeneous(spectra[0])
        if not spectra:
            raise ConfigurationError("model.marginals: explicit_list needs at least one marginal")
        if not doc.cycle and d_max > len(spectra):
            raise ConfigurationError(
                f"model.marginals: d up to {d_max} requested but only {len(spectra)} marginals listed"
            )
        return SequenceModel.explicit(spectra, cycle=doc.cycle)
    except ConfigurationError:
        raise
    except ComplexityError as exc:
        raise ConfigurationError(f"model: {exc}") from exc


def _format_pydantic(exc: PydanticValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str | dict, threads: int | None = None, output: str | None = None) -> RunConfig:
    if isinstance(text, dict):
        data = text
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"malformed JSON: {exc}") from exc
    try:
        doc = RunDoc.model_validate(data)
    except PydanticValidationError as exc:
        raise ConfigurationError(_format_pydantic(exc)) from exc

    eps = tuple(doc.eps) if isinstance(doc.eps, list) else (doc.eps,)
    if not eps:
        raise ConfigurationError("eps: at least one value required")
    for i, e in enumerate(eps):
        if not 0.0 < e < 1.0:
            raise ConfigurationError(f"eps.{i}: {e!r} not in (0, 1)")
    grid = expand_grid(doc.d_grid)
    model = _build_model(doc.model, max(grid))
    if doc.method == "homogeneous" and model.family != "homogeneous":
        raise ConfigurationError("method: homogeneous requires model.family = homogeneous")
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigurationError("threads must be >= 1")
    return RunConfig(model, eps, grid, doc.method, doc.term_cap, threads, output)


def load_config(path: str, **kw) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text, **kw)

"""Resolved run configuration shared by every subcommand."""
import json
from typing import Any, Dict, List, Literal, Optional

import click
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from common.clustering.nmc import check_tau
from common.oracle.params import SceneGenParams, VoteNoise
from common.utils.config import DEFAULTS
from common.utils.errors import DataError

# inputs each subcommand cannot run without
REQUIRED_INPUTS = {
    'genlabels': ('scene',),
    'simulate': (),
    'cluster': ('votes',),
    'segment': ('votes', 'clusters'),
    'eval': ('pred', 'scene'),
    'degrade': ('boxes',),
    'baseline': ('votes', 'scene'),
    'pipeline': ('scene',),
    'sweep-tau': ('scene_dir',),
    'sweep-degrade': ('scene_dir',),
    'compare': ('scene_dir',),
}


class DataFileError(click.ClickException):
    """Input data failed to parse or validate."""

    exit_code = 2


class RunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    subcommand: str
    inputs: Dict[str, str] = {}
    output: str
    strategy: Optional[Literal['decided', 'closest', 'smallest']] = None
    tau: Optional[float] = None
    nms_thresh: Optional[float] = None
    radius: Optional[float] = None
    noise: Optional[VoteNoise] = None
    gen: Optional[SceneGenParams] = None
    seed: Optional[int] = None
    thresholds: List[float] = []
    extra: Dict[str, Any] = {}

    @model_validator(mode='after')
    def _check(self):
        if self.subcommand not in REQUIRED_INPUTS:
            raise ValueError(f"unknown subcommand '{self.subcommand}'")
        required = list(REQUIRED_INPUTS[self.subcommand])
        if self.extra.get('boxes_from') == 'file':
            required.append('boxes')
        missing = [k for k in required if not self.inputs.get(k)]
        if missing:
            raise ValueError(f"missing required input(s): {', '.join(missing)}")
        if self.tau is not None:
            check_tau(self.tau)
        if self.nms_thresh is not None and not 0.0 < self.nms_thresh < 1.0:
            raise ValueError("nms threshold must be in (0,1)")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode='json', exclude_none=True), sort_keys=True)


def _messages(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        msg = err['msg']
        if msg.startswith('Value error, '):
            msg = msg[len('Value error, '):]
        loc = '.'.join(str(x) for x in err['loc'])
        parts.append(f"{loc}: {msg}" if loc else msg)
    return '; '.join(parts)


def config_defaults(ctx: click.Context) -> Dict[str, Any]:
    config = (ctx.obj or {}).get('config') or DEFAULTS
    return config['defaults']


def resolve(ctx: click.Context, subcommand: str, **fields) -> RunConfig:
    """Fill unset values from the YAML defaults, validate, and echo the result."""
    defaults = config_defaults(ctx)
    fields['inputs'] = {k: v for k, v in fields.get('inputs', {}).items() if v}
    for key in ('tau', 'nms_thresh', 'radius'):
        if key in fields and fields[key] is None:
            fields[key] = defaults.get(key)
    if 'thresholds' not in fields or not fields['thresholds']:
        fields['thresholds'] = list(defaults.get('thresholds', []))
    try:
        run = RunConfig(subcommand=subcommand, **fields)
    except ValidationError as e:
        raise click.UsageError(_messages(e), ctx=ctx)
    click.echo(f"Resolved config: {run.to_json()}")
    click.echo(f"Seed: {run.seed if run.seed is not None else 'none'}")
    return run


def load_params(model, path: Optional[str], ctx: click.Context, **overrides):
    """Parameter model from a file (or defaults), with CLI overrides applied."""
    try:
        data = {} if path is None else model.from_file(path).model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return model(**data)
    except ValidationError as e:
        raise click.UsageError(_messages(e), ctx=ctx)
    except (FileNotFoundError, ValueError) as e:
        if isinstance(e, DataError):
            raise DataFileError(str(e))
        raise click.UsageError(str(e), ctx=ctx)


def parse_grid(text: str, name: str) -> List[float]:
    """Values from 'start:step:stop' (inclusive) or a comma-separated list."""
    try:
        if ':' in text:
            start, step, stop = (float(x) for x in text.split(':'))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [round(start + k * step, 10) for k in range(count)]
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise click.BadParameter(f"expected start:step:stop or a comma list, got '{text}'", param_hint=name)

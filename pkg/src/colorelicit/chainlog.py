"""Newline-delimited chain logs: one header line, then one line per record.

Logs are the durable form of a chain: they round-trip every record field,
carry enough provenance to replay the chain through a replay respondent,
and stay analyzable when a chain failed partway (each line stands alone).
Unknown fields written by newer versions are preserved opaquely.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .colors import GRID_SHAPE, GridHistogram, HslColor
from .errors import LogError
from .queries import answer_from_dict, answer_to_dict, query_from_dict, query_to_dict
from .respondents import ReplayEntry
from .samplers import ChainOutput, ChainRecord

LOG_VERSION = 1

_RECORD_KEYS = {
    "chain_id", "iteration", "method", "state", "proposal", "proposal_kind",
    "presented_first", "query", "query_rendered", "raw_answer", "answer",
    "result", "accepted", "flags", "timestamp",
}


def config_digest(config_data: dict) -> str:
    """Short stable digest of a config mapping (for drift detection)."""
    canonical = json.dumps(config_data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


@dataclass
class ChainLogHeader:
    version: int
    config_digest: str
    master_seed: int
    object: str
    method: str
    chain_id: int
    complete: bool = True
    failure: str | None = None
    accept_count: int | None = None
    extras: dict = field(default_factory=dict)


def _color_json(c: HslColor | None) -> list[int] | None:
    return None if c is None else list(c.as_tuple())


def _record_to_json(record: ChainRecord) -> dict:
    out = {
        "chain_id": record.chain_id,
        "iteration": record.iteration,
        "method": record.method,
        "state": _color_json(record.state),
        "proposal": _color_json(record.proposal),
        "proposal_kind": record.proposal_kind,
        "presented_first": record.presented_first,
        "query": query_to_dict(record.query),
        "query_rendered": record.query_rendered,
        "raw_answer": record.raw_answer,
        "answer": answer_to_dict(record.answer),
        "result": _color_json(record.result),
        "accepted": record.accepted,
        "flags": list(record.flags),
        "timestamp": record.timestamp,
    }
    out.update(record.extras)
    return out


def _record_from_json(data: dict) -> ChainRecord:
    extras = {k: v for k, v in data.items() if k not in _RECORD_KEYS}
    return ChainRecord(
        chain_id=int(data["chain_id"]),
        iteration=int(data["iteration"]),
        method=data["method"],
        state=HslColor(*data["state"]),
        proposal=None if data["proposal"] is None else HslColor(*data["proposal"]),
        proposal_kind=data["proposal_kind"],
        presented_first=data["presented_first"],
        query=query_from_dict(data["query"]),
        query_rendered=data["query_rendered"],
        raw_answer=data["raw_answer"],
        answer=answer_from_dict(data["answer"]),
        result=HslColor(*data["result"]),
        accepted=data["accepted"],
        flags=tuple(data["flags"]),
        timestamp=data["timestamp"],
        extras=extras,
    )


def write_chain_log(
    path: str | Path,
    output: ChainOutput,
    master_seed: int,
    digest: str = "",
) -> None:
    """Write one chain (header plus all records) as JSON lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "version": LOG_VERSION,
        "config_digest": digest,
        "master_seed": master_seed,
        "object": output.object,
        "method": output.method,
        "chain_id": output.chain_id,
        "complete": output.complete,
        "failure": output.failure,
        "accept_count": output.accept_count,
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for record in output.records:
            fh.write(json.dumps(_record_to_json(record), ensure_ascii=False) + "\n")


def read_chain_log(path: str | Path, expected_digest: str | None = None) -> tuple[ChainLogHeader, list[ChainRecord]]:
    """Read a chain log back into its header and records.

    A corrupt or truncated line raises LogError carrying the 1-based line
    number and the records parsed before it. A digest mismatch against
    ``expected_digest`` only warns; the log still loads.
    """
    path = Path(path)
    records: list[ChainRecord] = []
    header: ChainLogHeader | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                data = json.loads(stripped)
                if lineno == 1:
                    known = {
                        "version", "config_digest", "master_seed", "object",
                        "method", "chain_id", "complete", "failure", "accept_count",
                    }
                    header = ChainLogHeader(
                        version=int(data["version"]),
                        config_digest=data["config_digest"],
                        master_seed=int(data["master_seed"]),
                        object=data["object"],
                        method=data["method"],
                        chain_id=int(data["chain_id"]),
                        complete=bool(data.get("complete", True)),
                        failure=data.get("failure"),
                        accept_count=data.get("accept_count"),
                        extras={k: v for k, v in data.items() if k not in known},
                    )
                else:
                    records.append(_record_from_json(data))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise LogError(
                    f"{path.name}:{lineno}: bad log line ({exc})",
                    line_number=lineno,
                    partial=records,
                ) from exc
    if header is None:
        raise LogError(f"{path.name}: empty log (no header)", line_number=1)
    if expected_digest is not None and header.config_digest != expected_digest:
        warnings.warn(
            f"{path.name}: config digest {header.config_digest!r} does not match "
            f"the supplied configuration ({expected_digest!r}); proceeding",
            stacklevel=2,
        )
    return header, records


def output_from_log(header: ChainLogHeader, records: Sequence[ChainRecord]) -> ChainOutput:
    """Rebuild a ChainOutput view from a parsed log."""
    samples: list[HslColor] = []
    sample_iterations: list[int] = []
    if header.method == "direct_sampling":
        for r in records:
            if getattr(r.answer, "value", False) is True:
                samples.append(r.result)
                sample_iterations.append(r.iteration)
    elif header.method == "gibbs":
        # One sample per iteration: the state after its last dimension update.
        by_iteration: dict[int, ChainRecord] = {r.iteration: r for r in records}
        for it in sorted(by_iteration):
            samples.append(by_iteration[it].result)
            sample_iterations.append(it)
    else:
        for r in records:
            samples.append(r.result)
            sample_iterations.append(r.iteration)
    return ChainOutput(
        object=header.object,
        method=header.method,
        chain_id=header.chain_id,
        samples=samples,
        sample_iterations=sample_iterations,
        records=list(records),
        accept_count=header.accept_count,
        complete=header.complete,
        failure=header.failure,
    )


def replay_entries(records: Sequence[ChainRecord]) -> list[ReplayEntry]:
    """Turn logged records into the entries a replay respondent consumes."""
    return [ReplayEntry(r.query, r.answer, r.raw_answer) for r in records]


def read_reference_histogram(path: str | Path) -> GridHistogram:
    """Load an 1800-value reference grid file, normalized.

    Values are whitespace-separated nonnegative reals in (i, j, k)
    lexicographic order over the 18x10x10 grid.
    """
    values = np.loadtxt(path, dtype=float).ravel()
    expected = GRID_SHAPE[0] * GRID_SHAPE[1] * GRID_SHAPE[2]
    if values.size != expected:
        raise ValueError(
            f"reference file must hold {expected} values, got {values.size}"
        )
    return GridHistogram.from_mass(values.reshape(GRID_SHAPE))

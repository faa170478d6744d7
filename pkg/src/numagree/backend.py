"""Probability backends: where P(candidate | context) comes from.

Every backend satisfies one contract: given a template and a list of
candidate forms, return a TemplateDistribution holding, for each candidate,
its probability plus two sufficient statistics of the model's *full*
vocabulary distribution — its 1-based rank and the cumulative probability
of all strictly higher-ranked tokens (`cum_before`). Rank ties are broken
lexicographically everywhere. Those two statistics are all the percentile
machinery downstream ever needs, which keeps dump files small.

Three implementations: a dump-file reader, an HTTP client, and a synthetic
backend for hand-specified toy distributions.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    BackendError,
    DataFormatError,
    DistributionInvariantError,
    IncompleteDistributionError,
    UnsupportedOperationError,
)
from .templates import TemplateInstance

log = logging.getLogger(__name__)

DUMP_FORMAT_VERSION = 1
BIDIRECTIONAL = "bidirectional"
UNIDIRECTIONAL = "unidirectional"
DIRECTIONS = (BIDIRECTIONAL, UNIDIRECTIONAL)

_PROB_SLACK = 1e-9
_SYNTHETIC_SUM_TOL = 1e-12
AUTH_TOKEN_ENV = "NUMAGREE_API_TOKEN"


@dataclass(frozen=True)
class TokenProbRecord:
    """One candidate token's slice of the model distribution."""

    form: str
    prob: float
    rank: int
    cum_before: float

    def validate(self, template_id: str | None = None) -> None:
        if not self.form:
            raise DistributionInvariantError(
                "empty form", template_id=template_id, field="form"
            )
        if not 0.0 <= self.prob <= 1.0:
            raise DistributionInvariantError(
                f"prob {self.prob!r} outside [0, 1]",
                template_id=template_id,
                field="prob",
            )
        if not 0.0 <= self.cum_before <= 1.0:
            raise DistributionInvariantError(
                f"cum_before {self.cum_before!r} outside [0, 1]",
                template_id=template_id,
                field="cum_before",
            )
        if self.cum_before + self.prob > 1.0 + _PROB_SLACK:
            raise DistributionInvariantError(
                f"cum_before + prob = {self.cum_before + self.prob!r} exceeds 1",
                template_id=template_id,
                field="cum_before",
            )
        if not isinstance(self.rank, int) or self.rank < 1:
            raise DistributionInvariantError(
                f"rank {self.rank!r} must be a positive integer",
                template_id=template_id,
                field="rank",
            )


@dataclass
class TemplateDistribution:
    """Candidate-token records for one template, plus optional top-k listing."""

    template_id: str
    model_id: str
    direction: str
    records: dict[str, TokenProbRecord]
    topk: tuple[tuple[str, float], ...] | None = None

    def validate(self) -> None:
        if self.direction not in DIRECTIONS:
            raise DistributionInvariantError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}",
                template_id=self.template_id,
                field="direction",
            )
        for form, rec in self.records.items():
            if form != rec.form:
                raise DistributionInvariantError(
                    f"record keyed {form!r} carries form {rec.form!r}",
                    template_id=self.template_id,
                    field="form",
                )
            rec.validate(self.template_id)
        by_rank = sorted(self.records.values(), key=lambda r: r.rank)
        for prev, cur in zip(by_rank, by_rank[1:]):
            if cur.rank == prev.rank:
                raise DistributionInvariantError(
                    f"duplicate rank {cur.rank}",
                    template_id=self.template_id,
                    field="rank",
                )
            if cur.prob > prev.prob:
                raise DistributionInvariantError(
                    f"prob increases with rank at rank {cur.rank}",
                    template_id=self.template_id,
                    field="prob",
                )
            if cur.cum_before < prev.cum_before:
                raise DistributionInvariantError(
                    f"cum_before decreases with rank at rank {cur.rank}",
                    template_id=self.template_id,
                    field="cum_before",
                )
            if prev.cum_before + prev.prob > cur.cum_before + _PROB_SLACK:
                raise DistributionInvariantError(
                    f"prefix-sum inconsistency between ranks {prev.rank} and {cur.rank}",
                    template_id=self.template_id,
                    field="cum_before",
                )

    def restricted_to(self, candidates: Sequence[str]) -> "TemplateDistribution":
        """Copy containing only the requested candidates that are present."""
        kept = {f: self.records[f] for f in self.records if f in set(candidates)}
        return TemplateDistribution(
            self.template_id, self.model_id, self.direction, kept, self.topk
        )


def ranked_records(mapping: Mapping[str, float]) -> dict[str, TokenProbRecord]:
    """Build records for a full explicit distribution.

    Sorts by probability descending with lexicographic tie-breaking, assigns
    1-based ranks and prefix-sum cum_before.
    """
    ordered = sorted(mapping.items(), key=lambda kv: (-kv[1], kv[0]))
    out: dict[str, TokenProbRecord] = {}
    cum = 0.0
    for rank, (form, prob) in enumerate(ordered, start=1):
        out[form] = TokenProbRecord(form=form, prob=prob, rank=rank, cum_before=cum)
        cum += prob
    return out


# ---------------------------------------------------------------------------
# Vocabulary manifests
# ---------------------------------------------------------------------------

def load_vocab_manifest(path: str | Path) -> frozenset[str]:
    """One vocabulary word per line; blank lines ignored (words keep any
    leading/trailing markers except the newline, so wordpiece markers like
    '##s' survive intact)."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            word = raw.rstrip("\n")
            if word:
                words.add(word)
    return frozenset(words)


def write_vocab_manifest(words: Iterable[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word in sorted(set(words)):
            fh.write(word + "\n")


def manifest_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# Dump codec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DumpHeader:
    format_version: int
    model_id: str
    direction: str
    vocab_manifest_hash: str = ""


def _record_to_json(rec: TokenProbRecord) -> dict:
    return {
        "cum_before": rec.cum_before,
        "form": rec.form,
        "prob": rec.prob,
        "rank": rec.rank,
    }


def write_dump(
    dists: Iterable[TemplateDistribution],
    path: str | Path,
    *,
    vocab_manifest_hash: str = "",
) -> int:
    """Write distributions to a dump file; returns the number written.

    Bytes are deterministic given the input: sorted JSON keys, records
    sorted by form, shortest round-trip float formatting, LF newlines.
    All distributions must share one model_id/direction (the header).
    """
    path = Path(path)
    n = 0
    header: DumpHeader | None = None
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for dist in dists:
            dist.validate()
            if header is None:
                header = DumpHeader(
                    DUMP_FORMAT_VERSION, dist.model_id, dist.direction, vocab_manifest_hash
                )
                fh.write(
                    json.dumps(
                        {
                            "direction": header.direction,
                            "format_version": header.format_version,
                            "model_id": header.model_id,
                            "vocab_manifest_hash": header.vocab_manifest_hash,
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                        separators=(",", ":"),
                    )
                    + "\n"
                )
            elif (dist.model_id, dist.direction) != (header.model_id, header.direction):
                raise BackendError(
                    "dump cannot mix models: "
                    f"{(dist.model_id, dist.direction)} vs {(header.model_id, header.direction)}"
                )
            body: dict = {
                "records": [
                    _record_to_json(dist.records[form]) for form in sorted(dist.records)
                ],
                "template_id": dist.template_id,
            }
            if dist.topk is not None:
                body["topk"] = [[form, prob] for form, prob in dist.topk]
            fh.write(
                json.dumps(body, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
                + "\n"
            )
            n += 1
        if header is None:
            raise BackendError("refusing to write an empty dump (no distributions)")
    return n


def read_dump_header(path: str | Path) -> DumpHeader:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    return _parse_header(first, path)


def _parse_header(line: str, path: Path) -> DumpHeader:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid dump header JSON: {exc}", path=path, line=1)
    required = {"format_version", "model_id", "direction", "vocab_manifest_hash"}
    if not isinstance(obj, dict) or not required.issubset(obj):
        raise DataFormatError(
            f"dump header must carry fields {sorted(required)}", path=path, line=1
        )
    if obj["format_version"] != DUMP_FORMAT_VERSION:
        raise DataFormatError(
            f"unsupported dump format_version {obj['format_version']!r} "
            f"(expected {DUMP_FORMAT_VERSION})",
            path=path,
            line=1,
        )
    return DumpHeader(
        format_version=obj["format_version"],
        model_id=str(obj["model_id"]),
        direction=str(obj["direction"]),
        vocab_manifest_hash=str(obj["vocab_manifest_hash"]),
    )


def read_dump(
    path: str | Path, *, expected_manifest_hash: str | None = None
) -> Iterator[TemplateDistribution]:
    """Stream distributions out of a dump file, validating every invariant.

    Raises DataFormatError naming the template and field on any violation,
    and on a vocab manifest checksum mismatch when one is expected.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = _parse_header(fh.readline(), path)
        if (
            expected_manifest_hash is not None
            and header.vocab_manifest_hash != expected_manifest_hash
        ):
            raise DataFormatError(
                "vocab manifest checksum mismatch: dump has "
                f"{header.vocab_manifest_hash!r}, expected {expected_manifest_hash!r}",
                path=path,
                line=1,
            )
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", path=path, line=lineno)
            if not isinstance(obj, dict) or "template_id" not in obj or "records" not in obj:
                raise DataFormatError(
                    "dump record needs template_id and records", path=path, line=lineno
                )
            dist = _dist_from_json(obj, header, path, lineno)
            try:
                dist.validate()
            except DistributionInvariantError as exc:
                raise DistributionInvariantError(
                    str(exc),
                    template_id=dist.template_id,
                    path=path,
                    line=lineno,
                ) from exc
            yield dist


def _dist_from_json(
    obj: dict, header: DumpHeader, path: Path, lineno: int
) -> TemplateDistribution:
    tid = str(obj["template_id"])
    records: dict[str, TokenProbRecord] = {}
    for rec in obj["records"]:
        try:
            form = rec["form"]
            record = TokenProbRecord(
                form=form,
                prob=float(rec["prob"]),
                rank=int(rec["rank"]),
                cum_before=float(rec["cum_before"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(
                f"template {tid!r}: bad record ({exc})", path=path, line=lineno
            )
        if form in records:
            raise DistributionInvariantError(
                f"duplicate form {form!r}", template_id=tid, path=path, line=lineno
            )
        records[form] = record
    topk = None
    if "topk" in obj:
        topk = tuple((str(f), float(p)) for f, p in obj["topk"])
    return TemplateDistribution(
        template_id=tid,
        model_id=header.model_id,
        direction=header.direction,
        records=records,
        topk=topk,
    )


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

class Backend:
    """Contract: deterministic (or cached) per-template candidate scoring."""

    model_id: str
    direction: str

    def query(
        self, template: TemplateInstance, candidates: Sequence[str]
    ) -> TemplateDistribution:
        raise NotImplementedError

    def vocabulary(self) -> frozenset[str] | None:
        """The model's single-token vocabulary, or None when unknown."""
        return None

    def topk(self, template: TemplateInstance, k: int) -> list[tuple[str, float]]:
        raise UnsupportedOperationError(
            f"top-k listing unsupported by backend {type(self).__name__}"
        )


class SyntheticBackend(Backend):
    """Explicit toy distributions from a spec file.

    The spec file lists, per template id, a full distribution over a small
    vocabulary; ranks and cum_before are computed exactly from it with
    lexicographic tie-breaking.
    """

    def __init__(
        self,
        distributions: Mapping[str, Mapping[str, float]],
        *,
        model_id: str = "synthetic",
        direction: str = BIDIRECTIONAL,
    ):
        self.model_id = model_id
        self.direction = direction
        self._full: dict[str, dict[str, TokenProbRecord]] = {}
        self._raw: dict[str, dict[str, float]] = {}
        for tid, mapping in distributions.items():
            total = 0.0
            for form, prob in mapping.items():
                if prob < 0:
                    raise DataFormatError(
                        f"template {tid!r}: negative probability for {form!r}"
                    )
                total += prob
            if abs(total - 1.0) > _SYNTHETIC_SUM_TOL:
                raise DataFormatError(
                    f"template {tid!r}: probabilities sum to {total!r}, not 1"
                )
            self._raw[tid] = dict(mapping)
            self._full[tid] = ranked_records(mapping)

    @classmethod
    def from_spec_file(cls, path: str | Path) -> "SyntheticBackend":
        path = Path(path)

        def reject_duplicates(pairs):
            seen = {}
            for key, value in pairs:
                if key in seen:
                    raise DataFormatError(f"duplicate form {key!r}", path=path)
                seen[key] = value
            return seen

        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh, object_pairs_hook=reject_duplicates)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", path=path)
        if "templates" not in obj or not isinstance(obj["templates"], dict):
            raise DataFormatError('spec file needs a "templates" object', path=path)
        return cls(
            obj["templates"],
            model_id=str(obj.get("model_id", "synthetic")),
            direction=str(obj.get("direction", BIDIRECTIONAL)),
        )

    def has_template(self, template_id: str) -> bool:
        return template_id in self._full

    def query(
        self, template: TemplateInstance, candidates: Sequence[str]
    ) -> TemplateDistribution:
        full = self._full.get(template.id)
        if full is None:
            raise BackendError(f"synthetic spec has no template {template.id!r}")
        records = {f: full[f] for f in candidates if f in full}
        dist = TemplateDistribution(
            template_id=template.id,
            model_id=self.model_id,
            direction=self.direction,
            records=records,
        )
        dist.validate()
        return dist

    def vocabulary(self) -> frozenset[str]:
        words: set[str] = set()
        for full in self._full.values():
            words.update(full)
        return frozenset(words)

    def topk(self, template: TemplateInstance, k: int) -> list[tuple[str, float]]:
        full = self._full.get(template.id)
        if full is None:
            raise BackendError(f"synthetic spec has no template {template.id!r}")
        ordered = sorted(full.values(), key=lambda r: r.rank)
        return [(r.form, r.prob) for r in ordered[: max(k, 0)]]


class DumpBackend(Backend):
    """Serves distributions previously written with write_dump.

    Loads the whole dump into memory (dumps hold only candidate records, so
    they stay small). When a manifest path is given, its checksum must match
    the dump header.
    """

    def __init__(
        self,
        header: DumpHeader,
        dists: dict[str, TemplateDistribution],
        vocab: frozenset[str] | None = None,
    ):
        self.header = header
        self.model_id = header.model_id
        self.direction = header.direction
        self._dists = dists
        self._vocab = vocab

    @classmethod
    def open(
        cls, path: str | Path, *, manifest_path: str | Path | None = None
    ) -> "DumpBackend":
        path = Path(path)
        expected = None
        vocab = None
        if manifest_path is not None:
            expected = manifest_hash(manifest_path)
            vocab = load_vocab_manifest(manifest_path)
        header = read_dump_header(path)
        dists: dict[str, TemplateDistribution] = {}
        for dist in read_dump(path, expected_manifest_hash=expected):
            if dist.template_id in dists:
                raise DataFormatError(
                    f"duplicate template {dist.template_id!r} in dump", path=path
                )
            dists[dist.template_id] = dist
        return cls(header, dists, vocab)

    def __len__(self) -> int:
        return len(self._dists)

    def template_ids(self) -> list[str]:
        return list(self._dists)

    def query(
        self, template: TemplateInstance, candidates: Sequence[str]
    ) -> TemplateDistribution:
        dist = self._dists.get(template.id)
        if dist is None:
            raise BackendError(f"dump has no template {template.id!r}")
        return dist.restricted_to(candidates)

    def vocabulary(self) -> frozenset[str] | None:
        return self._vocab

    def topk(self, template: TemplateInstance, k: int) -> list[tuple[str, float]]:
        dist = self._dists.get(template.id)
        if dist is None:
            raise BackendError(f"dump has no template {template.id!r}")
        if dist.topk is None:
            raise UnsupportedOperationError(
                f"dump for template {template.id!r} carries no top-k section"
            )
        return list(dist.topk[: max(k, 0)])


class HttpBackend(Backend):
    """Remote scoring over the documented POST /score JSON schema.

    Transient failures (connection errors, HTTP 5xx and 429) are retried
    with exponential backoff up to `max_retries` times. Responses are cached
    per (template, candidates) so repeated queries are identical even
    against a non-deterministic server.
    """

    def __init__(
        self,
        base_url: str,
        *,
        model_id: str,
        direction: str,
        manifest_path: str | Path | None = None,
        max_retries: int = 5,
        timeout: float = 30.0,
        backoff: float = 0.1,
    ):
        if direction not in DIRECTIONS:
            raise BackendError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.direction = direction
        self.max_retries = max_retries
        self.timeout = timeout
        self.backoff = backoff
        self._vocab = (
            load_vocab_manifest(manifest_path) if manifest_path is not None else None
        )
        self._cache: dict[tuple[str, tuple[str, ...], int | None], TemplateDistribution] = {}
        self._lock = threading.Lock()
        self._local = threading.local()

    def _session(self):
        import requests

        if not hasattr(self._local, "session"):
            session = requests.Session()
            token = os.environ.get(AUTH_TOKEN_ENV)
            if token:
                session.headers["Authorization"] = f"Bearer {token}"
            self._local.session = session
        return self._local.session

    def _post(self, payload: dict) -> dict:
        import requests

        url = self.base_url + "/score"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                resp = self._session().post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = BackendError(f"HTTP {resp.status_code} from {url}")
                continue
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code} from {url}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise BackendError(f"non-JSON response from {url}: {exc}")
        raise BackendError(
            f"{url} failed after {self.max_retries + 1} attempts: {last_error}"
        )

    def _query(
        self, template: TemplateInstance, candidates: tuple[str, ...], k: int | None
    ) -> TemplateDistribution:
        key = (template.id, candidates, k)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        payload = {
            "prefix": template.prefix,
            "suffix": template.suffix,
            "direction": self.direction,
            "candidates": list(candidates),
        }
        if k is not None:
            payload["topk"] = k
        obj = self._post(payload)
        if "records" not in obj:
            raise BackendError('response missing "records"')
        records: dict[str, TokenProbRecord] = {}
        for rec in obj["records"]:
            try:
                record = TokenProbRecord(
                    form=str(rec["form"]),
                    prob=float(rec["prob"]),
                    rank=int(rec["rank"]),
                    cum_before=float(rec["cum_before"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendError(f"malformed record in response: {exc}")
            records[record.form] = record
        missing = [c for c in candidates if c not in records]
        if missing:
            raise IncompleteDistributionError(
                f"incomplete distribution for template {template.id!r}: "
                f"missing {missing}"
            )
        topk = None
        if "topk" in obj:
            topk = tuple((str(f), float(p)) for f, p in obj["topk"])
        dist = TemplateDistribution(
            template_id=template.id,
            model_id=self.model_id,
            direction=self.direction,
            records={c: records[c] for c in candidates},
            topk=topk,
        )
        dist.validate()
        with self._lock:
            self._cache[key] = dist
        return dist

    def query(
        self, template: TemplateInstance, candidates: Sequence[str]
    ) -> TemplateDistribution:
        return self._query(template, tuple(candidates), None)

    def vocabulary(self) -> frozenset[str] | None:
        return self._vocab

    def topk(self, template: TemplateInstance, k: int) -> list[tuple[str, float]]:
        dist = self._query(template, (), k)
        if dist.topk is None:
            raise UnsupportedOperationError("server returned no top-k section")
        return list(dist.topk[: max(k, 0)])

"""GitHub README ingestion: repository metadata, license filtering, README text.

Network access goes through an ``httpx`` transport, so tests (and offline
runs) replay recorded responses from a fixture directory instead of
touching the API. A fixture directory holds one JSON file per request::

    repos__octo__hello.json          GET /repos/octo/hello
    repos__octo__hello__readme.json  GET /repos/octo/hello/readme

each containing ``{"status": int, "headers": {...}, "json": <body>}``.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import os
import random
import re
import threading
import time
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import httpx

from .corpus import CorpusRecord, License, scrub_pii, strip_markdown

logger = logging.getLogger(__name__)

__all__ = [
    "API_URL",
    "PERMITTED_LICENSES",
    "IngestError",
    "NotFound",
    "RateLimited",
    "TransportError",
    "FormatError",
    "RepoMeta",
    "LicenseRow",
    "FeatureStats",
    "map_license",
    "license_permitted",
    "license_distribution",
    "feature_count_stats",
    "FixtureTransport",
    "RecordingTransport",
    "fixture_key",
    "GitHubClient",
    "crawl",
]

API_URL = "https://api.github.com"
PERMITTED_LICENSES = frozenset({License.MIT, License.APACHE, License.BSD, License.EPL})


class IngestError(Exception):
    pass


class NotFound(IngestError):
    pass


class RateLimited(IngestError):
    def __init__(self, reset_time: float, message: str = "GitHub rate limit exhausted") -> None:
        super().__init__(f"{message}; resets at {reset_time:.0f}")
        self.reset_time = reset_time


class TransportError(IngestError):
    pass


class FormatError(IngestError):
    pass


def map_license(spdx: str | None) -> License:
    if not spdx:
        return License.OTHER
    spdx = spdx.strip()
    if spdx == "MIT":
        return License.MIT
    for prefix, family in (("Apache-", License.APACHE), ("BSD-", License.BSD), ("EPL-", License.EPL)):
        if spdx.startswith(prefix):
            return family
    return License.OTHER


@dataclass(frozen=True)
class RepoMeta:
    repo_id: str
    license_spdx: str
    default_branch: str = "main"
    readme_path: str = "README.md"
    url: str = ""

    @property
    def license(self) -> License:
        return map_license(self.license_spdx)


def license_permitted(meta: RepoMeta) -> bool:
    return meta.license in PERMITTED_LICENSES


@dataclass(frozen=True)
class LicenseRow:
    license: License
    count: int
    percent: float


def license_distribution(records: Iterable[CorpusRecord]) -> list[LicenseRow]:
    counts = Counter(r.license for r in records)
    total = sum(counts.values())
    rows = [LicenseRow(lic, n, round(100.0 * n / total, 2)) for lic, n in counts.items()]
    order = {lic: i for i, lic in enumerate(License)}
    return sorted(rows, key=lambda row: (-row.count, order[row.license]))


@dataclass(frozen=True)
class FeatureStats:
    mean: float
    max: int
    histogram: dict[int, int]


def feature_count_stats(records: Sequence[CorpusRecord]) -> FeatureStats:
    """Per-repository extractive feature counts: mean, max and histogram."""
    if not records:
        raise ValueError("no records")
    lengths = [len(r.extractive) for r in records]
    return FeatureStats(
        mean=sum(lengths) / len(lengths),
        max=max(lengths),
        histogram=dict(sorted(Counter(lengths).items())),
    )


# -- fixtures -----------------------------------------------------------------


def fixture_key(request: httpx.Request) -> str:
    path = request.url.path.strip("/")
    key = path.replace("/", "__")
    if request.url.query:
        key += "__" + re.sub(r"[^A-Za-z0-9=._-]+", "_", request.url.query.decode())
    if request.method != "GET":
        key = f"{request.method}__{key}"
    return key


class FixtureTransport(httpx.BaseTransport):
    """Serve responses from a directory of recorded JSON files."""

    def __init__(self, directory: str | os.PathLike) -> None:
        self.directory = Path(directory)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        path = self.directory / f"{fixture_key(request)}.json"
        if not path.exists():
            raise httpx.ConnectError(f"no recorded fixture {path.name}", request=request)
        recorded = json.loads(path.read_text(encoding="utf-8"))
        return httpx.Response(
            recorded.get("status", 200),
            headers=recorded.get("headers", {}),
            json=recorded.get("json"),
            request=request,
        )


class RecordingTransport(httpx.BaseTransport):
    """Pass requests through to ``inner`` and save each response as a fixture."""

    def __init__(self, directory: str | os.PathLike, inner: httpx.BaseTransport | None = None) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.inner = inner or httpx.HTTPTransport()
        self._lock = threading.Lock()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        response = self.inner.handle_request(request)
        body = response.read()
        try:
            payload = json.loads(body) if body else None
        except ValueError:
            payload = None
        keep = {k: v for k, v in response.headers.items() if k.lower().startswith("x-ratelimit")}
        record = {"status": response.status_code, "headers": keep, "json": payload}
        with self._lock:
            (self.directory / f"{fixture_key(request)}.json").write_text(
                json.dumps(record, indent=2, sort_keys=True), encoding="utf-8"
            )
        return httpx.Response(response.status_code, headers=response.headers, content=body, request=request)


# -- client -------------------------------------------------------------------


class _RateGate:
    """Shared pause point: once any request sees an exhausted quota, all wait for the reset."""

    def __init__(self, clock: Callable[[], float], sleep: Callable[[float], None]) -> None:
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._resume_at = 0.0

    def block_until(self, reset_time: float) -> None:
        with self._lock:
            self._resume_at = max(self._resume_at, reset_time)

    def wait(self) -> None:
        with self._lock:
            delay = self._resume_at - self._clock()
        if delay > 0:
            logger.warning("rate limited, waiting %.1fs", delay)
            self._sleep(delay)


class GitHubClient:
    def __init__(
        self,
        token: str | None = None,
        *,
        transport: httpx.BaseTransport | None = None,
        base_url: str = API_URL,
        max_retries: int = 3,
        max_concurrency: int = 4,
        timeout: float = 30.0,
        clock: Callable[[], float] = time.time,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        token = token if token is not None else os.environ.get("GITHUB_TOKEN")
        headers = {"Accept": "application/vnd.github.v3+json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(base_url=base_url, headers=headers, timeout=timeout, transport=transport)
        self.max_retries = max_retries
        self.max_concurrency = max_concurrency
        self._slots = threading.BoundedSemaphore(max_concurrency)
        self._gate = _RateGate(clock, sleep)
        self._sleep = sleep

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> GitHubClient:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _get_once(self, path: str, params: dict | None) -> dict | list:
        self._gate.wait()
        with self._slots:
            try:
                resp = self._client.get(path, params=params)
            except httpx.HTTPError as exc:
                raise TransportError(f"GET {path}: {exc}") from exc
        if resp.status_code == 404:
            raise NotFound(path)
        if resp.status_code in (403, 429) and (
            resp.headers.get("X-RateLimit-Remaining") == "0" or resp.status_code == 429
        ):
            reset = float(resp.headers.get("X-RateLimit-Reset", "0") or 0)
            raise RateLimited(reset)
        if not resp.is_success:
            raise TransportError(f"GET {path}: HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise FormatError(f"GET {path}: response is not JSON") from exc

    def get(self, path: str, params: dict | None = None) -> dict | list:
        """GET with retries on rate limiting and server errors, up to ``max_retries``."""
        attempt = 0
        while True:
            try:
                return self._get_once(path, params)
            except RateLimited as exc:
                if attempt >= self.max_retries:
                    raise
                self._gate.block_until(exc.reset_time)
            except TransportError:
                if attempt >= self.max_retries:
                    raise
                self._sleep(min(2.0**attempt, 30.0))
            attempt += 1

    def fetch_repo_metadata(self, owner: str, name: str) -> RepoMeta:
        data = self.get(f"/repos/{owner}/{name}")
        if not isinstance(data, dict):
            raise FormatError(f"{owner}/{name}: unexpected repository payload")
        lic = data.get("license") or {}
        return RepoMeta(
            repo_id=data.get("full_name") or f"{owner}/{name}",
            license_spdx=lic.get("spdx_id") or "",
            default_branch=data.get("default_branch") or "main",
            readme_path="README.md",
            url=data.get("html_url") or f"https://github.com/{owner}/{name}",
        )

    def fetch_readme(self, owner: str, name: str) -> str:
        data = self.get(f"/repos/{owner}/{name}/readme")
        if not isinstance(data, dict) or "content" not in data:
            raise FormatError(f"{owner}/{name}: README payload has no content")
        if data.get("encoding", "base64") != "base64":
            raise FormatError(f"{owner}/{name}: unsupported encoding {data.get('encoding')!r}")
        try:
            raw = base64.b64decode("".join(data["content"].split()), validate=True)
        except (binascii.Error, ValueError) as exc:
            raise FormatError(f"{owner}/{name}: invalid base64 README content") from exc
        return raw.decode("utf-8", errors="replace")

    def sample_repositories(self, n: int, seed: int = 0, max_id: int = 700_000_000) -> list[str]:
        """Seeded sample of public ``owner/name`` ids from the repository listing."""
        rng = random.Random(seed)
        found: list[str] = []
        seen: set[str] = set()
        pages = 0
        while len(found) < n and pages < 10 * max(n, 1):
            pages += 1
            page = self.get("/repositories", params={"since": rng.randrange(max_id)})
            for repo in page if isinstance(page, list) else []:
                full = repo.get("full_name")
                if full and not repo.get("fork") and full not in seen:
                    seen.add(full)
                    found.append(full)
                    break
        return found


def crawl(
    client: GitHubClient,
    repo_ids: Iterable[str],
    *,
    keep_code: bool = False,
    name_patterns: Sequence[str] = (),
    workers: int | None = None,
) -> tuple[list[CorpusRecord], dict[str, str]]:
    """Fetch, license-filter and clean READMEs.

    Returns records for permitted repositories (sorted by repo_id) and a map
    of skipped repo_id to reason. Raw markdown is never kept.
    """

    def one(repo_id: str) -> CorpusRecord | str:
        owner, _, name = repo_id.partition("/")
        try:
            meta = client.fetch_repo_metadata(owner, name)
            if not license_permitted(meta):
                return f"license {meta.license_spdx or 'none'} not permitted"
            raw = client.fetch_readme(owner, name)
        except (NotFound, FormatError) as exc:
            return f"{type(exc).__name__}: {exc}"
        text = scrub_pii(strip_markdown(raw, keep_code=keep_code), name_patterns)
        return CorpusRecord(repo_id=repo_id, readme_text=text, license=meta.license, url=meta.url)

    ids = sorted(set(repo_ids))
    with ThreadPoolExecutor(max_workers=workers or client.max_concurrency) as pool:
        results = list(pool.map(one, ids))
    records = [r for r in results if isinstance(r, CorpusRecord)]
    skipped = {rid: r for rid, r in zip(ids, results) if isinstance(r, str)}
    return records, skipped

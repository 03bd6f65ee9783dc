import json
import threading

import httpx
import pytest

from readmefeat.corpus import CorpusRecord, FeatureList, License
from readmefeat.ingest import (
    FixtureTransport,
    FormatError,
    GitHubClient,
    NotFound,
    RateLimited,
    RecordingTransport,
    RepoMeta,
    TransportError,
    crawl,
    feature_count_stats,
    license_distribution,
    license_permitted,
    map_license,
)


@pytest.fixture
def client(data_dir):
    sleeps = []
    c = GitHubClient(
        token="t",
        transport=FixtureTransport(data_dir / "github"),
        max_retries=2,
        clock=lambda: 1_699_999_990.0,
        sleep=sleeps.append,
    )
    c.sleeps = sleeps
    yield c
    c.close()


def test_mit_metadata(client):
    meta = client.fetch_repo_metadata("octo", "trader")
    assert meta.license_spdx == "MIT"
    assert meta.license is License.MIT
    assert meta.repo_id == "octo/trader"
    assert license_permitted(meta)


def test_not_found(client):
    with pytest.raises(NotFound):
        client.fetch_repo_metadata("octo", "missing")
    with pytest.raises(NotFound):
        client.fetch_readme("octo", "noreadme")


def test_rate_limited_after_retries(client):
    with pytest.raises(RateLimited) as info:
        client.fetch_repo_metadata("octo", "limited")
    assert info.value.reset_time == 1_700_000_000
    # two retries, each waiting out the 10 s until reset
    assert client.sleeps == [10.0, 10.0]


def test_server_error_is_transport_error(client):
    with pytest.raises(TransportError):
        client.fetch_repo_metadata("octo", "broken")
    assert len(client.sleeps) == 2


def test_readme_decoding(client):
    text = client.fetch_readme("octo", "trader")
    assert text.startswith("# Daytrader\n")
    assert client.fetch_readme("octo", "bsd") == ""
    with pytest.raises(FormatError):
        client.fetch_readme("octo", "badreadme")


def test_readme_invalid_utf8_replaced():
    import base64

    payload = {"encoding": "base64", "content": base64.b64encode(b"ok \xff\xfe end").decode()}
    transport = httpx.MockTransport(lambda r: httpx.Response(200, json=payload))
    with GitHubClient(token="", transport=transport) as c:
        assert c.fetch_readme("a", "b") == "ok �� end"


def test_auth_header_from_env(monkeypatch):
    seen = {}

    def handler(request):
        seen.update(request.headers)
        return httpx.Response(200, json={"full_name": "a/b", "license": None})

    monkeypatch.setenv("GITHUB_TOKEN", "secret")
    with GitHubClient(transport=httpx.MockTransport(handler)) as c:
        meta = c.fetch_repo_metadata("a", "b")
    assert seen["authorization"] == "Bearer secret"
    assert meta.license is License.OTHER


def test_missing_fixture_is_transport_error(client):
    with pytest.raises(TransportError):
        client.fetch_repo_metadata("octo", "never-recorded")


@pytest.mark.parametrize(
    "spdx, expected",
    [
        ("MIT", License.MIT),
        ("Apache-2.0", License.APACHE),
        ("BSD-3-Clause", License.BSD),
        ("BSD-2-Clause", License.BSD),
        ("EPL-1.0", License.EPL),
        ("GPL-3.0", License.OTHER),
        ("NOASSERTION", License.OTHER),
        ("", License.OTHER),
        (None, License.OTHER),
    ],
)
def test_map_license(spdx, expected):
    assert map_license(spdx) is expected


def test_license_permitted():
    assert license_permitted(RepoMeta("a/b", "MIT"))
    assert not license_permitted(RepoMeta("a/b", "GPL-3.0"))
    assert license_permitted(RepoMeta("a/b", "BSD-3-Clause"))


def test_crawl_filters_and_cleans(client):
    records, skipped = crawl(client, ["octo/gpl", "octo/trader", "octo/bsd", "octo/missing"], workers=3)
    assert [r.repo_id for r in records] == ["octo/bsd", "octo/trader"]
    trader = records[1]
    assert trader.license is License.MIT
    assert "[EMAIL]" in trader.readme_text and "@" not in trader.readme_text
    assert "mvn install" not in trader.readme_text
    assert "- login via OAuth" in trader.readme_text
    assert set(skipped) == {"octo/gpl", "octo/missing"}


def test_concurrency_bound():
    active, peak = 0, 0
    lock = threading.Lock()
    gate = threading.Event()

    def handler(request):
        nonlocal active, peak
        with lock:
            active += 1
            peak = max(peak, active)
        gate.wait(0.05)
        with lock:
            active -= 1
        if request.url.path.endswith("/readme"):
            return httpx.Response(200, json={"encoding": "base64", "content": ""})
        return httpx.Response(200, json={"full_name": request.url.path[7:], "license": {"spdx_id": "MIT"}})

    with GitHubClient(token="", transport=httpx.MockTransport(handler), max_concurrency=2) as c:
        records, _ = crawl(c, [f"o/r{i}" for i in range(8)], workers=6)
    assert len(records) == 8
    assert peak <= 2


def test_recording_transport(tmp_path, data_dir):
    inner = FixtureTransport(data_dir / "github")
    with GitHubClient(token="", transport=RecordingTransport(tmp_path, inner)) as c:
        c.fetch_repo_metadata("octo", "trader")
    saved = json.loads((tmp_path / "repos__octo__trader.json").read_text())
    assert saved["status"] == 200 and saved["json"]["license"]["spdx_id"] == "MIT"
    with GitHubClient(token="", transport=FixtureTransport(tmp_path)) as c:
        assert c.fetch_repo_metadata("octo", "trader").license is License.MIT


def test_sample_repositories_seeded():
    def handler(request):
        since = int(request.url.params["since"])
        return httpx.Response(200, json=[{"full_name": f"u{since}/r", "fork": False}])

    with GitHubClient(token="", transport=httpx.MockTransport(handler)) as c:
        a = c.sample_repositories(5, seed=1)
        b = c.sample_repositories(5, seed=1)
    assert a == b and len(a) == 5


# -- corpus statistics ------------------------------------------------------------


def _records(counts):
    out = []
    for lic, n in counts.items():
        out += [CorpusRecord(f"{lic.value}/{i}", "t", lic) for i in range(n)]
    return out


def test_license_distribution_table():
    rows = license_distribution(_records({License.MIT: 1436, License.APACHE: 334, License.BSD: 325, License.EPL: 6}))
    assert [(r.license, r.count) for r in rows] == [
        (License.MIT, 1436), (License.APACHE, 334), (License.BSD, 325), (License.EPL, 6)
    ]
    assert [r.percent for r in rows] == [68.35, 15.90, 15.47, 0.29]
    assert abs(sum(r.percent for r in rows) - 100.0) <= 0.02


def test_license_distribution_edges():
    assert license_distribution([]) == []
    (row,) = license_distribution(_records({License.MIT: 1}))
    assert (row.license, row.count, row.percent) == (License.MIT, 1, 100.0)


def _with_features(lengths):
    return [
        CorpusRecord(f"o/{i}", "t", License.MIT, FeatureList(tuple(f"f{j}" for j in range(n))))
        for i, n in enumerate(lengths)
    ]


def test_feature_count_stats():
    assert feature_count_stats(_with_features([2, 8])).mean == 5.0
    assert feature_count_stats(_with_features([3, 34, 5])).max == 34
    assert feature_count_stats(_with_features([3, 3, 3])).histogram == {3: 3}
    with pytest.raises(ValueError):
        feature_count_stats([])

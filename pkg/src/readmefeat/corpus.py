"""README corpus records, cleaning, splitting, prompt formatting and output parsing."""

from __future__ import annotations

import html
import json
import os
import random
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

__all__ = [
    "FEATURES_DESIGNATOR",
    "STOP_MARKERS",
    "BLACKBOX_PROMPTS",
    "License",
    "FeatureList",
    "CorpusRecord",
    "SplitSpec",
    "Split",
    "CorpusError",
    "ConfigError",
    "strip_markdown",
    "scrub_pii",
    "render_numbered",
    "make_training_example",
    "make_inference_prompt",
    "make_blackbox_prompt",
    "parse_feature_list",
    "split_corpus",
    "load_corpus",
    "save_corpus",
    "load_predictions",
    "save_predictions",
    "is_admissible",
]

FEATURES_DESIGNATOR = "##FEATURES##"
STOP_MARKERS = (FEATURES_DESIGNATOR, "</s>", "<|endoftext|>", "<|end|>", "<eos>")

# Zero-shot prompts tried against hosted chat models; the last one is the default.
BLACKBOX_PROMPTS = (
    "List all the features for the above text.",
    "List all the functionalities for the above text.",
    "List all the features from above text. Each features should be in individual line"
    " without headings.",
    "List all the features from above text. Each features should be in individual line"
    " without headings. Each features should be in individual line without headings.",
    "List all the features from above text. Each features should be in individual line"
    " without headings. Each features should be in individual line without headings."
    " Do not include features related to license",
)


class CorpusError(ValueError):
    """Malformed corpus or predictions input."""


class ConfigError(ValueError):
    """Invalid user-supplied configuration."""


class License(str, Enum):
    MIT = "MIT"
    APACHE = "Apache"
    BSD = "BSD"
    EPL = "EPL"
    OTHER = "Other"

    @classmethod
    def parse(cls, value: str) -> License:
        for member in cls:
            if member.value.lower() == value.strip().lower():
                return member
        raise CorpusError(f"unknown license {value!r}")


_WS_RE = re.compile(r"\s+")


def _normalize_item(item: str) -> str:
    return _WS_RE.sub(" ", item).strip()


@dataclass(frozen=True)
class FeatureList(Sequence[str]):
    """Ordered, duplicate-free list of functionality strings.

    The constructor validates; use :meth:`normalized` to build one from
    arbitrary strings (whitespace is collapsed, blanks and repeats dropped).
    """

    items: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        seen = set()
        for item in self.items:
            if not isinstance(item, str):
                raise TypeError(f"feature must be str, got {type(item).__name__}")
            norm = _normalize_item(item)
            if not norm:
                raise ValueError("empty feature")
            if norm in seen:
                raise ValueError(f"duplicate feature {item!r}")
            seen.add(norm)

    @classmethod
    def normalized(cls, items: Iterable[str]) -> FeatureList:
        out: list[str] = []
        seen: set[str] = set()
        for item in items:
            norm = _normalize_item(item)
            if norm and norm not in seen:
                seen.add(norm)
                out.append(norm)
        return cls(tuple(out))

    def __getitem__(self, index):  # type: ignore[override]
        return self.items[index]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[str]:
        return iter(self.items)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FeatureList):
            return self.items == other.items
        if isinstance(other, (list, tuple)):
            return list(self.items) == list(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.items)

    def __repr__(self) -> str:
        return f"FeatureList({list(self.items)!r})"


@dataclass(frozen=True)
class CorpusRecord:
    repo_id: str
    readme_text: str
    license: License = License.OTHER
    extractive: FeatureList = field(default_factory=FeatureList)
    abstractive: FeatureList = field(default_factory=FeatureList)
    url: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.license, License):
            object.__setattr__(self, "license", License.parse(str(self.license)))
        for name in ("extractive", "abstractive"):
            value = getattr(self, name)
            if not isinstance(value, FeatureList):
                object.__setattr__(self, name, FeatureList(tuple(value)))
        if self.extractive and self.abstractive and len(self.extractive) != len(self.abstractive):
            raise CorpusError(
                f"{self.repo_id}: {len(self.extractive)} extractive vs "
                f"{len(self.abstractive)} abstractive features"
            )

    def gold(self, target: str) -> FeatureList:
        if target not in ("extractive", "abstractive"):
            raise ConfigError(f"unknown gold target {target!r}")
        return getattr(self, target)

    def to_json(self) -> dict:
        return {
            "repo_id": self.repo_id,
            "url": self.url,
            "license": self.license.value,
            "readme_text": self.readme_text,
            "extractive": list(self.extractive),
            "abstractive": list(self.abstractive),
        }

    @classmethod
    def from_json(cls, obj: dict) -> CorpusRecord:
        return cls(
            repo_id=obj["repo_id"],
            readme_text=obj["readme_text"],
            license=License.parse(obj.get("license", "Other")),
            extractive=FeatureList(tuple(obj.get("extractive", ()))),
            abstractive=FeatureList(tuple(obj.get("abstractive", ()))),
            url=obj.get("url", ""),
        )


def is_admissible(record: CorpusRecord, min_features: int = 2) -> bool:
    """Whether a record satisfies the annotated-corpus admission rules."""
    return (
        len(record.extractive) >= min_features
        and bool(record.readme_text)
        and _EMAIL_RE.search(record.readme_text) is None
    )


# -- markdown ---------------------------------------------------------------

_FENCE_OPEN_RE = re.compile(r"^[ \t]{0,3}(`{3,}|~{3,})(.*)$")
_COMMENT_RE = re.compile(r"<!--.*?-->", re.S)
_IMAGE_RE = re.compile(r"!\[[^\]\n]*\](?:\([^)\n]*\)|\[[^\]\n]*\])[ \t]?")
_EMPTY_LINK_RE = re.compile(r"\[\]\([^)\n]*\)[ \t]?")
_LINK_RE = re.compile(r"\[([^\]\n]*)\]\([^)\n]*\)")
_REF_LINK_RE = re.compile(r"\[([^\]\n]+)\]\[[^\]\n]*\]")
_REF_DEF_RE = re.compile(r"^[ \t]{0,3}\[[^\]\n]+\]:[ \t]*\S.*$", re.M)
_AUTOLINK_RE = re.compile(r"<((?:https?|ftp)://[^<>\s]+)>")
_MAILTO_RE = re.compile(r"<(?:mailto:)?([^<>\s@]+@[^<>\s]+)>")
_TAG_RE = re.compile(r"</?[A-Za-z][A-Za-z0-9-]*(?:\s[^<>]*)?/?>")
_INLINE_CODE_RE = re.compile(r"(`+)(?!`)(.+?)(?<!`)\1(?!`)")
_BOLD_STAR_RE = re.compile(r"\*\*(?=\S)(.+?)(?<=\S)\*\*")
_BOLD_UNDER_RE = re.compile(r"(?<!\w)__(?=\S)(.+?)(?<=\S)__(?!\w)")
_STRIKE_RE = re.compile(r"~~(?=\S)(.+?)(?<=\S)~~")
_EM_STAR_RE = re.compile(r"(?<![\w*])\*(?=[^\s*])(.+?)(?<=[^\s*])\*(?![\w*])")
_EM_UNDER_RE = re.compile(r"(?<!\w)_(?=[^\s_])(.+?)(?<=[^\s_])_(?!\w)")
_HEADING_RE = re.compile(r"^[ \t]{0,3}#{1,6}(?:[ \t]+|$)", re.M)
_HEADING_TAIL_RE = re.compile(r"[ \t]+#+[ \t]*$", re.M)
_QUOTE_RE = re.compile(r"^[ \t]{0,3}>[ \t]?", re.M)
_RULE_RE = re.compile(r"^[ \t]{0,3}([-*_=])(?:[ \t]*\1){2,}[ \t]*$", re.M)
_TABLE_RULE_RE = re.compile(r"^[ \t]*\|?[ \t]*:?-+:?[ \t]*(?:\|[ \t]*:?-+:?[ \t]*)+\|?[ \t]*$", re.M)
_BLANKS_RE = re.compile(r"\n{3,}")


def _split_fences(text: str) -> list[tuple[bool, str]]:
    """Cut text into (is_code, chunk) segments at fenced code blocks."""
    segments: list[tuple[bool, str]] = []
    prose: list[str] = []
    code: list[str] | None = None
    fence = ""
    for line in text.split("\n"):
        if code is None:
            m = _FENCE_OPEN_RE.match(line)
            if m and not (m.group(1)[0] == "`" and "`" in m.group(2)):
                segments.append((False, "\n".join(prose)))
                prose = []
                code, fence = [], m.group(1)
            else:
                prose.append(line)
        else:
            stripped = line.strip()
            if stripped and set(stripped) == {fence[0]} and len(stripped) >= len(fence) and len(line) - len(line.lstrip()) <= 3:
                segments.append((True, "\n".join(code)))
                code = None
            else:
                code.append(line)
    if code is not None:
        # unterminated fence runs to end of document
        segments.append((True, "\n".join(code)))
    else:
        segments.append((False, "\n".join(prose)))
    return segments


def _strip_inline(text: str) -> str:
    text = _COMMENT_RE.sub("", text)
    text = _IMAGE_RE.sub("", text)
    text = _EMPTY_LINK_RE.sub("", text)
    text = _LINK_RE.sub(r"\1", text)
    text = _REF_LINK_RE.sub(r"\1", text)
    text = _REF_DEF_RE.sub("", text)
    text = _AUTOLINK_RE.sub(r"\1", text)
    text = _MAILTO_RE.sub(r"\1", text)
    text = _TAG_RE.sub("", text)
    text = _INLINE_CODE_RE.sub(lambda m: m.group(2).strip() or m.group(2), text)
    for pattern in (_BOLD_STAR_RE, _BOLD_UNDER_RE, _STRIKE_RE, _EM_STAR_RE, _EM_UNDER_RE):
        text = pattern.sub(r"\1", text)
    text = _TABLE_RULE_RE.sub("", text)
    text = _RULE_RE.sub("", text)
    text = _HEADING_RE.sub("", text)
    text = _HEADING_TAIL_RE.sub("", text)
    text = _QUOTE_RE.sub("", text)
    return html.unescape(text)


def _tidy(text: str) -> str:
    text = "\n".join(line.rstrip() for line in text.split("\n"))
    return _BLANKS_RE.sub("\n\n", text).strip("\n")


def _strip_pass(text: str, keep_code: bool) -> str:
    parts = []
    for is_code, chunk in _split_fences(text):
        if is_code:
            if keep_code:
                parts.append(chunk)
        else:
            parts.append(_strip_inline(chunk))
    return _tidy("\n".join(parts))


def strip_markdown(text: str, keep_code: bool = False) -> str:
    """Convert README markdown to plain text.

    Headings, emphasis, links, images, inline HTML and rules are removed;
    list markers survive as plain lines. Fenced code is dropped unless
    ``keep_code`` is set, in which case block contents are kept verbatim.

    Without ``keep_code`` the rules are applied until the text stops
    changing, so the result is a fixed point: ``strip_markdown(out) == out``.
    """
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    if keep_code:
        parts = []
        for is_code, chunk in _split_fences(text):
            if is_code:
                parts.append(chunk)
            else:
                parts.append(strip_markdown(chunk))
        return _tidy("\n".join(parts))
    while True:
        out = _strip_pass(text, keep_code=False)
        if out == text:
            return out
        text = out


# -- PII ----------------------------------------------------------------------

_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}")
EMAIL_TOKEN = "[EMAIL]"
NAME_TOKEN = "[NAME]"


def scrub_pii(text: str, name_patterns: Iterable[str] = ()) -> str:
    """Replace e-mail addresses with ``[EMAIL]`` and name patterns with ``[NAME]``."""
    compiled = []
    for pattern in name_patterns:
        try:
            compiled.append(re.compile(pattern))
        except re.error as exc:
            raise ConfigError(f"invalid name pattern {pattern!r}: {exc}") from None
    text = _EMAIL_RE.sub(EMAIL_TOKEN, text)
    for regex in compiled:
        text = regex.sub(NAME_TOKEN, text)
    # a name replacement can splice an address back together
    while _EMAIL_RE.search(text):
        text = _EMAIL_RE.sub(EMAIL_TOKEN, text)
    return text


# -- prompts ------------------------------------------------------------------


def render_numbered(items: Iterable[str]) -> str:
    return "\n".join(f"{i}. {item}" for i, item in enumerate(items, 1))


def make_training_example(record: CorpusRecord, target: str = "extractive") -> str:
    if not record.readme_text:
        raise CorpusError(f"{record.repo_id}: empty readme_text")
    gold = record.gold(target)
    if not gold:
        raise CorpusError(f"{record.repo_id}: no gold features")
    return f"{record.readme_text}\n{FEATURES_DESIGNATOR}\n{render_numbered(gold)}"


def make_inference_prompt(record: CorpusRecord) -> str:
    if not record.readme_text:
        raise CorpusError(f"{record.repo_id}: empty readme_text")
    return f"{record.readme_text}\n{FEATURES_DESIGNATOR}\n"


def make_blackbox_prompt(record: CorpusRecord, prompt: int | str = -1) -> str:
    """README text followed by one of :data:`BLACKBOX_PROMPTS` (or a custom instruction)."""
    if not record.readme_text:
        raise CorpusError(f"{record.repo_id}: empty readme_text")
    instruction = BLACKBOX_PROMPTS[prompt] if isinstance(prompt, int) else prompt
    return f"{record.readme_text}\n\n{instruction}"


_MARKER_RE = re.compile(r"^(?:\d+[.)]|[-*•])(?=\s|$)\s*")


def parse_feature_list(generation: str) -> FeatureList:
    """Turn raw model output into a FeatureList.

    One feature per line. Enumeration markers are stripped, blank lines and
    repeats dropped, and parsing stops at the first stop-marker line.
    """
    items = []
    for line in generation.splitlines():
        line = line.strip()
        if line in STOP_MARKERS:
            break
        items.append(_MARKER_RE.sub("", line, count=1))
    return FeatureList.normalized(items)


# -- splits and I/O ---------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_n: int
    val_n: int
    test_n: int
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.train_n, self.val_n, self.test_n) < 0:
            raise ConfigError("split sizes must be non-negative")

    @property
    def total(self) -> int:
        return self.train_n + self.val_n + self.test_n


class Split(NamedTuple):
    train: list[CorpusRecord]
    val: list[CorpusRecord]
    test: list[CorpusRecord]


def split_corpus(records: Sequence[CorpusRecord], spec: SplitSpec) -> Split:
    if spec.total > len(records):
        raise ConfigError(f"split needs {spec.total} records, corpus has {len(records)}")
    order = list(records)
    random.Random(spec.seed).shuffle(order)
    a = spec.train_n
    b = a + spec.val_n
    return Split(order[:a], order[a:b], order[b : b + spec.test_n])


def _read_jsonl(path: str | os.PathLike) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, obj


def _write_jsonl(objs: Iterable[dict], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_corpus(path: str | os.PathLike) -> list[CorpusRecord]:
    records = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(path):
        try:
            record = CorpusRecord.from_json(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{path}: line {lineno}: {exc}") from None
        if record.repo_id in seen:
            raise CorpusError(f"{path}: line {lineno}: duplicate repo_id {record.repo_id!r}")
        seen.add(record.repo_id)
        records.append(record)
    return records


def save_corpus(records: Iterable[CorpusRecord], path: str | os.PathLike) -> None:
    _write_jsonl((r.to_json() for r in records), path)


def load_predictions(path: str | os.PathLike) -> dict[str, FeatureList]:
    """Read ``{"repo_id", "features"}`` lines; features are normalized on load."""
    preds: dict[str, FeatureList] = {}
    for lineno, obj in _read_jsonl(path):
        try:
            repo_id = obj["repo_id"]
            features = obj["features"]
        except KeyError as exc:
            raise CorpusError(f"{path}: line {lineno}: missing field {exc}") from None
        if not isinstance(features, list) or not all(isinstance(f, str) for f in features):
            raise CorpusError(f"{path}: line {lineno}: features must be a list of strings")
        if repo_id in preds:
            raise CorpusError(f"{path}: line {lineno}: duplicate repo_id {repo_id!r}")
        preds[repo_id] = FeatureList.normalized(features)
    return preds


def save_predictions(preds: dict[str, Iterable[str]], path: str | os.PathLike) -> None:
    _write_jsonl(({"repo_id": k, "features": list(v)} for k, v in preds.items()), path)

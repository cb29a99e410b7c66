"""Routing text batches to an external translation system.

Three modes: an identity echo for testing, a JSONL cache for reproducible
desk-scale runs, and a line-delimited-JSON subprocess protocol for live
systems.  The subprocess child receives one ``{"id", "text"}`` object per
line on stdin and must answer one ``{"id", "translation"}`` object per line
on stdout (any order within a batch, flush per line).
"""

from __future__ import annotations

import hashlib
import json
import selectors
import shlex
import subprocess
import time
from dataclasses import dataclass

DEFAULT_TIMEOUT = 120.0


class TranslationError(RuntimeError):
    """Translator failure: cache miss, child crash, or protocol violation."""


class CacheMissError(TranslationError):
    def __init__(self, missing_ids):
        self.missing_ids = list(missing_ids)
        shown = ", ".join(str(i) for i in self.missing_ids[:5])
        more = "" if len(self.missing_ids) <= 5 else f" (+{len(self.missing_ids) - 5} more)"
        super().__init__(f"cache miss for request ids: {shown}{more}")


@dataclass(frozen=True)
class TranslatorConfig:
    mode: str                     # "identity" | "cache" | "subprocess"
    system_id: str = "identity"
    cache_path: str | None = None
    command: str | None = None    # shell-style command line for the child
    batch_size: int = 32
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self):
        if self.mode not in ("identity", "cache", "subprocess"):
            raise ValueError(f"unknown translator mode {self.mode!r}")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.mode == "cache" and not self.cache_path:
            raise ValueError("cache mode requires cache_path")
        if self.mode == "subprocess" and not self.command:
            raise ValueError("subprocess mode requires a command")


def cache_key(system_id: str, text: str) -> str:
    """Stable cache key: blake2b-128 over system id and text."""
    material = f"{system_id}\x1f{text}".encode("utf-8")
    return hashlib.blake2b(material, digest_size=16).hexdigest()


def cache_store(path, system_id: str, pairs) -> None:
    """Append (text, translation) pairs to the JSONL cache."""
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        for text, translation in pairs:
            record = {"key": cache_key(system_id, text), "text": text,
                      "translation": translation}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_cache(path) -> dict[str, str]:
    """Read the JSONL cache into key -> translation; last write wins."""
    table = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise TranslationError(f"unreadable cache file {path}: {exc}") from exc
    with fh:
        for no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                table[record["key"]] = record["translation"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise TranslationError(f"malformed cache line {no} in {path}: {exc}") from exc
    return table


def cache_lookup(path, system_id: str, text: str) -> str | None:
    return load_cache(path).get(cache_key(system_id, text))


class SubprocessTranslator:
    """A long-running translator child owned by a single worker.

    One writer and one reader; batches of at most ``batch_size`` requests are
    written, then responses are collected until every id of the batch has
    resolved, with ``timeout`` seconds allowed per batch.
    """

    def __init__(self, config: TranslatorConfig):
        self.config = config
        argv = shlex.split(config.command)
        try:
            self.proc = subprocess.Popen(argv, stdin=subprocess.PIPE,
                                         stdout=subprocess.PIPE, bufsize=0)
        except OSError as exc:
            raise TranslationError(
                f"cannot start translator child {config.command!r}: {exc}") from exc
        self._buffer = b""

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def translate(self, texts) -> dict:
        resolved = {}
        texts = list(texts)
        for start in range(0, len(texts), self.config.batch_size):
            batch = texts[start:start + self.config.batch_size]
            self._send(batch)
            resolved.update(self._collect({r["id"] for r in batch}))
        return resolved

    def _send(self, batch):
        payload = "".join(
            json.dumps({"id": r["id"], "text": r["text"]}, ensure_ascii=False) + "\n"
            for r in batch).encode("utf-8")
        try:
            self.proc.stdin.write(payload)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise TranslationError(
                f"translator child exited early (status {self.proc.poll()})")

    def _read_lines(self, deadline):
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.proc.kill()
                self.proc.wait()
                raise TranslationError(
                    f"translator child timed out after {self.config.timeout}s")
            with selectors.DefaultSelector() as sel:
                sel.register(self.proc.stdout, selectors.EVENT_READ)
                if not sel.select(timeout=remaining):
                    continue
            chunk = self.proc.stdout.read(65536)
            if chunk == b"":
                status = self.proc.wait()
                raise TranslationError(
                    f"translator child closed its output (status {status}) "
                    f"with requests unresolved")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line.decode("utf-8")

    def _collect(self, expected):
        results = {}
        deadline = time.monotonic() + self.config.timeout
        while len(results) < len(expected):
            line = self._read_lines(deadline)
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rid, translation = obj["id"], obj["translation"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise TranslationError(f"malformed child output line {line!r} ({exc})")
            if rid not in expected:
                raise TranslationError(f"child answered unknown request id {rid!r}")
            if rid in results:
                raise TranslationError(f"child answered request id {rid!r} twice")
            results[rid] = translation
        return results


def translate_batch(config: TranslatorConfig, texts) -> list[dict]:
    """Translate [{"id", "text"}, ...] and return [{"id", "translation"}, ...]
    in request order."""
    texts = list(texts)
    ids = [r["id"] for r in texts]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be unique")

    if config.mode == "identity":
        resolved = {r["id"]: r["text"] for r in texts}
    elif config.mode == "cache":
        table = load_cache(config.cache_path)
        resolved = {}
        missing = []
        for r in texts:
            key = cache_key(config.system_id, r["text"])
            if key in table:
                resolved[r["id"]] = table[key]
            else:
                missing.append(r["id"])
        if missing:
            raise CacheMissError(missing)
    else:
        with SubprocessTranslator(config) as child:
            resolved = child.translate(texts)

    return [{"id": rid, "translation": resolved[rid]} for rid in ids]

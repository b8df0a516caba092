"""Thin HTTP clients for the chat and image model endpoints.

Chat: POST {endpoint}/v1/chat {"messages": [{role, content}], "temperature"}
-> {"content": "..."}. Images: POST {endpoint}/v1/images {"prompt", "n"}
-> {"images": [base64, ...]}. Every call's wall time is returned so the
pipeline can record per-step latency in provenance.
"""

from __future__ import annotations

import base64
import time
from typing import List, Tuple

import requests

from ..errors import UpstreamFailure


class ChatClient:
    def __init__(self, endpoint: str, timeout: float = 120.0):
        self.endpoint = endpoint.rstrip("/")
        self._timeout = timeout
        self._session = requests.Session()

    def complete(self, messages: List[dict], temperature: float) -> Tuple[str, float]:
        t0 = time.perf_counter()
        try:
            resp = self._session.post(
                f"{self.endpoint}/v1/chat",
                json={"messages": messages, "temperature": temperature},
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise UpstreamFailure(f"chat endpoint failed: {exc}") from exc
        elapsed = time.perf_counter() - t0
        if resp.status_code != 200:
            raise UpstreamFailure(f"chat endpoint returned HTTP {resp.status_code}")
        try:
            content = resp.json()["content"]
        except (ValueError, KeyError) as exc:
            raise UpstreamFailure(f"malformed chat reply: {exc}") from exc
        if not isinstance(content, str):
            raise UpstreamFailure(f"chat reply content is {type(content).__name__}, not text")
        return content, elapsed


class ImageClient:
    def __init__(self, endpoint: str, timeout: float = 300.0):
        self.endpoint = endpoint.rstrip("/")
        self._timeout = timeout
        self._session = requests.Session()

    def generate(self, prompt: str, n: int) -> Tuple[List[bytes], float]:
        t0 = time.perf_counter()
        try:
            resp = self._session.post(
                f"{self.endpoint}/v1/images",
                json={"prompt": prompt, "n": n},
                timeout=self._timeout,
            )
        except requests.RequestException as exc:
            raise UpstreamFailure(f"image endpoint failed: {exc}") from exc
        elapsed = time.perf_counter() - t0
        if resp.status_code != 200:
            raise UpstreamFailure(f"image endpoint returned HTTP {resp.status_code}")
        try:
            images = resp.json()["images"]
            raw = [base64.b64decode(img) for img in images]
        except (ValueError, KeyError, TypeError) as exc:
            raise UpstreamFailure(f"malformed image reply: {exc}") from exc
        if len(raw) != n:
            raise UpstreamFailure(f"asked for {n} images, got {len(raw)}")
        return raw, elapsed

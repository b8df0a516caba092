import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from guiscout.embed import ReferenceEmbedder

DIM = 64  # small dim keeps the suite fast; acceptance tests pick their own


def write_png(path: Path, seed: int, size=(48, 32)) -> Path:
    """Deterministic pseudo-screenshot: seeded noise blocks."""
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    Image.fromarray(arr, "RGB").save(path, format="PNG")
    return path


def write_manifest(path: Path, rows) -> Path:
    path.write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n",
        encoding="utf-8",
    )
    return path


PLATFORMS = ("ios", "android", "web")

FIXTURE_CAPTIONS = [
    "health monitoring report with charts and daily summary",
    "health monitoring dashboard showing heart rate trends",
    "workout tracking screen with progress rings",
    "login screen with email and password fields",
    "onboarding carousel introducing the app",
    "user profile page with avatar and settings",
    "payment checkout form with card entry",
    "chat conversation list with unread badges",
    "music player with album art and controls",
    "calendar month view with event dots",
]


def build_fixture_corpus(root: Path, n: int = 10, id_prefix: str = "scr") -> Path:
    """Write n PNGs + a manifest under root; returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(n):
        name = f"{id_prefix}{i:03d}.png"
        write_png(root / name, seed=1000 + i)
        rows.append({
            "id": f"{id_prefix}{i:03d}",
            "app_id": f"app{i % 4:02d}",
            "app_url": f"https://apps.example/app{i % 4:02d}",
            "caption": FIXTURE_CAPTIONS[i % len(FIXTURE_CAPTIONS)],
            "image_path": name,
            "platform": PLATFORMS[i % 3],
            "category": "health" if i < 3 else "general",
        })
    return write_manifest(root / "manifest.jsonl", rows)


@pytest.fixture()
def embedder() -> ReferenceEmbedder:
    return ReferenceEmbedder(dim=DIM, seed=42)


@pytest.fixture()
def fixture_manifest(tmp_path) -> Path:
    return build_fixture_corpus(tmp_path / "repo")

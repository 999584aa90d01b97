"""Regenerate the bundled sample screenshots (assets/sample_screens/).

The files are committed; rerunning this script reproduces them byte for
byte, so the offline demo corpus never drifts.
"""

from __future__ import annotations

import sys
from pathlib import Path

from PIL import Image, ImageDraw

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from uisearch.fingerprint import DigestStream  # noqa: E402

WIDTH, HEIGHT = 96, 192
COUNT = 10


def paint(index: int) -> Image.Image:
    stream = DigestStream(b"sample-screen", str(index).encode())
    base = (stream.randint(20, 235), stream.randint(20, 235), stream.randint(20, 235))
    accent = (stream.randint(20, 235), stream.randint(20, 235), stream.randint(20, 235))
    image = Image.new("RGB", (WIDTH, HEIGHT), base)
    draw = ImageDraw.Draw(image)
    # status bar, nav bar, and a handful of "cards"
    draw.rectangle([0, 0, WIDTH, 12], fill=accent)
    draw.rectangle([0, HEIGHT - 18, WIDTH, HEIGHT], fill=accent)
    for _ in range(stream.randint(3, 6)):
        x = stream.randint(4, WIDTH - 30)
        y = stream.randint(16, HEIGHT - 50)
        w = stream.randint(20, WIDTH - x - 5)
        h = stream.randint(10, 28)
        fill = (stream.randint(0, 255), stream.randint(0, 255), stream.randint(0, 255))
        draw.rectangle([x, y, x + w, y + h], fill=fill)
    return image


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "assets" / "sample_screens"
    out_dir.mkdir(parents=True, exist_ok=True)
    for index in range(COUNT):
        path = out_dir / f"screen_{index:02d}.png"
        paint(index).save(path, format="PNG")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

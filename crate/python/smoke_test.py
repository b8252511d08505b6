"""Smoke test for the audiocons Python extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/audiocons-*.whl
"""

import math
import tempfile
from pathlib import Path

import audiocons as ac


def tone(freq, n=33536, rate=22050):
    return [0.3 * math.sin(2 * math.pi * freq * i / rate) for i in range(n)]


def main():
    a = ac.AudioClip("a", 22050, tone(440.0))
    b = ac.AudioClip("b", 22050, tone(660.0))
    assert len(a) == 33536 and a.id == "a"

    fa, fb = a.mfcc(), b.mfcc()
    assert len(fa) == 128 and len(fa[0]) == 24
    assert ac.dtw(fa, fa) == 0.0
    assert ac.dtw(fa, fb, radius=100) == ac.dtw_exact(fa, fb)
    assert ac.simple(fa, fa) == 0.0
    assert len(a.mfcc_stats()) == 144

    noisy = a.transform("PN", 10.0, seed=1)
    assert abs(noisy.loudness() - a.loudness()) < 0.1
    slowed = a.transform("TS", 50.0)
    assert abs(len(slowed) / (2 * len(a)) - 1) < 0.01
    assert ac.dtw(fa, noisy.mfcc()) < ac.dtw(fb, noisy.mfcc())

    assert ac.spearman([1, 2, 3, 4], [1, 3, 2, 4]) == 0.8
    mean, low, high = ac.bootstrap_ci([0.5] * 10)
    assert mean == low == high == 0.5
    assert 30.0 in ac.default_grid("PN") and -15.0 in ac.default_grid("PN")

    name = ac.excerpt_file_name("clip7", "PN", -15.0)
    assert name == "clip7__PN__-15.wav"
    assert ac.parse_excerpt_file_name(name) == ("clip7", "PN", -15.0)
    assert ac.parse_excerpt_file_name("clip7__OG__none.wav") == ("clip7", "OG", None)

    with tempfile.TemporaryDirectory() as d:
        rows = [
            ("a", "OG", None, a.mfcc_stats()),
            ("a", "PN", 10.0, noisy.mfcc_stats()),
        ]
        manifest = ac.write_emb1(Path(d), "mfcc", rows)
        loaded = {(c, cat, m): v for c, cat, m, v in ac.load_emb1(manifest)}
        for c, cat, m, v in rows:
            got = loaded[(c, cat, m)]
            assert all(abs(x - y) <= 1e-6 * max(1.0, abs(y)) for x, y in zip(got, v))

        path = Path(d) / "a.wav"
        a.save(path)
        back = ac.AudioClip.load(path)
        assert back.id == "a" and len(back) == len(a)

    print("audiocons", ac.__version__, "smoke test passed")


if __name__ == "__main__":
    main()

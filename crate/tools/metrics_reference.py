#!/usr/bin/env python3
"""Independent numpy implementation of the map-scoring metrics.

Writes crates/core/tests/fixtures/metrics_reference.json: a few seeded
prediction/truth pairs together with the metrics computed here. The Rust
test suite scores the same inputs and compares.

    python3 tools/metrics_reference.py [output-path]
"""
import json
import sys
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

CLAMP = 1e-7
WINDOW = 8
C1 = 0.01**2
C2 = 0.03**2


def ssim_channel(x, y):
    wh, ww = min(WINDOW, x.shape[0]), min(WINDOW, x.shape[1])
    xs = sliding_window_view(x, (wh, ww)).reshape(-1, wh * ww)
    ys = sliding_window_view(y, (wh, ww)).reshape(-1, wh * ww)
    ddof = 1 if wh * ww > 1 else 0
    mx, my = xs.mean(axis=1), ys.mean(axis=1)
    vx, vy = xs.var(axis=1, ddof=ddof), ys.var(axis=1, ddof=ddof)
    cxy = ((xs - mx[:, None]) * (ys - my[:, None])).sum(axis=1) / (wh * ww - ddof)
    s = ((2 * mx * my + C1) * (2 * cxy + C2)) / ((mx**2 + my**2 + C1) * (vx + vy + C2))
    return s.mean()


def metrics(probs, truth):
    h, w, k = probs.shape
    onehot = np.eye(k)[truth]
    accuracy = float((probs.argmax(axis=2) == truth).mean())
    p = np.clip(probs, CLAMP, 1 - CLAMP)
    bce = float(-(onehot * np.log(p) + (1 - onehot) * np.log(1 - p)).mean())
    mse = float(((probs - onehot) ** 2).mean())
    psnr = "inf" if mse == 0 else float(10 * np.log10(1 / mse))
    ssim = float(np.mean([ssim_channel(probs[:, :, c], onehot[:, :, c]) for c in range(k)]))
    return {"accuracy": accuracy, "bce": bce, "bce_per_cell": bce * k, "mse": mse, "psnr": psnr, "ssim": ssim}


def case(name, probs, truth):
    h, w, k = probs.shape
    return {
        "name": name,
        "input": {
            "pred": {"width": w, "height": h, "k": k, "probs": probs.reshape(-1).tolist()},
            "truth": {"width": w, "height": h, "labels": truth.reshape(-1).tolist()},
        },
        "expected": metrics(probs, truth),
    }


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/metrics_reference.json"
    rng = np.random.default_rng(20240607)
    cases = []

    truth = rng.integers(0, 3, size=(9, 11))
    probs = rng.dirichlet(np.ones(3), size=(9, 11))
    cases.append(case("random_k3_11x9", probs, truth))

    truth = rng.integers(0, 2, size=(4, 5))
    probs = rng.dirichlet([2.0, 1.0], size=(4, 5))
    cases.append(case("small_k2_5x4", probs, truth))

    truth = np.zeros((12, 12), dtype=int)
    truth[3:9, 2:7] = 1
    truth[8:, 8:] = 2
    noisy = 0.7 * np.eye(4)[truth] + 0.3 * rng.dirichlet(np.ones(4), size=(12, 12))
    cases.append(case("blocks_k4_12x12", noisy, truth))

    cases.append(case("perfect_k2_8x8", np.eye(2)[truth[:8, :8] % 2], truth[:8, :8] % 2))

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"version": 1, "cases": cases}, indent=1) + "\n")
    print(f"wrote {out} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
